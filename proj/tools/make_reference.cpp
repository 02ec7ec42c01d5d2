// Regenerates the shipped reference control for the controlled-diffusion
// benchmark: data/example1_reference.csv, columns t,u1,u2 on the N = 320
// grid. The values come from the problem's deterministic reduction solved to
// quadrature precision.

#include <iostream>
#include <string>

#include "bsmp/harness/csv.hpp"
#include "bsmp/problems/benchmarks.hpp"

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "data/example1_reference.csv";
    const int steps = argc > 2 ? std::stoi(argv[2]) : 320;

    bsmp::benchmarks::ControlledDiffusion problem;
    bsmp::TimeGrid grid(problem.horizon, steps);
    const auto reference = problem.reference_control(grid);

    bsmp::csv::Table t;
    t.header = {"t", "u1", "u2"};
    for (int n = 0; n < grid.steps; ++n)
        t.rows.push_back({bsmp::csv::format_double(grid.time(n)),
                          bsmp::csv::format_double(reference[0][n]),
                          bsmp::csv::format_double(reference[1][n])});
    bsmp::csv::write_file(path, t);
    std::cout << "wrote " << path << " (" << grid.steps << " rows)" << std::endl;
    return 0;
}
