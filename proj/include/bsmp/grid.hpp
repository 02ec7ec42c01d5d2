#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bsmp {

/// Uniform time grid on [0, T] with N steps of size dt = T/N.
/// Times are addressed by index; time(n) = n*T/N so time(N) == T exactly
/// up to one rounding of the division.
struct TimeGrid {
    double horizon = 1.0;
    int steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, int N) : horizon(T), steps(N) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (N < 1) throw std::invalid_argument("TimeGrid: need at least one step");
    }

    double dt() const { return horizon / steps; }
    double time(int n) const { return n * horizon / steps; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.horizon == b.horizon && a.steps == b.steps;
    }
};

/// Piecewise-constant scalar control on a uniform grid: value n applies on
/// [t_n, t_{n+1}). Vector-valued problems are handled as independent scalar
/// coordinates, each with its own ControlPath.
class ControlPath {
  public:
    ControlPath() = default;
    ControlPath(TimeGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_.steps)
            throw std::invalid_argument("ControlPath: value count must equal grid steps");
    }

    static ControlPath zeros(TimeGrid grid) {
        return ControlPath(grid, std::vector<double>(grid.steps, 0.0));
    }

    /// Sample a continuous control at the left endpoint of every cell.
    template <class Fn>
    static ControlPath sample(TimeGrid grid, Fn&& fn) {
        std::vector<double> v(grid.steps);
        for (int n = 0; n < grid.steps; ++n) v[n] = fn(grid.time(n));
        return ControlPath(grid, std::move(v));
    }

    const TimeGrid& grid() const { return grid_; }
    int size() const { return grid_.steps; }
    double operator[](int n) const { return values_[n]; }
    double& operator[](int n) { return values_[n]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    friend bool operator==(const ControlPath& a, const ControlPath& b) {
        return a.grid_ == b.grid_ && a.values_ == b.values_;
    }

  private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// L2 norm of a piecewise-constant path: sqrt(dt * sum_n u_n^2).
inline double l2_norm(const ControlPath& u) {
    double s = 0.0;
    for (int n = 0; n < u.size(); ++n) s += u[n] * u[n];
    return std::sqrt(u.grid().dt() * s);
}

enum class ErrorKind { relative_l2, absolute_l2 };

struct ErrorMetric {
    ErrorKind kind = ErrorKind::relative_l2;
    double value = 0.0;
};

/// Exact piecewise-constant refinement: each cell is split into `factor`
/// equal cells carrying the same value.
inline ControlPath refine(const ControlPath& u, int factor) {
    if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
    TimeGrid fine(u.grid().horizon, u.grid().steps * factor);
    std::vector<double> v(static_cast<std::size_t>(fine.steps));
    for (int n = 0; n < u.size(); ++n)
        for (int j = 0; j < factor; ++j) v[static_cast<std::size_t>(n) * factor + j] = u[n];
    return ControlPath(fine, std::move(v));
}

/// ||u - ref|| / ||ref|| in the grid L2 norm; falls back to the absolute
/// error when the reference is identically zero.
inline ErrorMetric control_error(const ControlPath& u, const ControlPath& ref) {
    if (!(u.grid() == ref.grid()))
        throw std::invalid_argument("control_error: grids differ (refine first)");
    double diff = 0.0, base = 0.0;
    for (int n = 0; n < u.size(); ++n) {
        double d = u[n] - ref[n];
        diff += d * d;
        base += ref[n] * ref[n];
    }
    double dt = u.grid().dt();
    if (base == 0.0) return {ErrorKind::absolute_l2, std::sqrt(dt * diff)};
    return {ErrorKind::relative_l2, std::sqrt(diff / base)};
}

inline double relative_error(const ControlPath& u, const ControlPath& ref) {
    return control_error(u, ref).value;
}

/// Joint error over independent coordinates sharing one grid:
/// sqrt(sum ||u_i - ref_i||^2) / sqrt(sum ||ref_i||^2).
inline double relative_error(const std::vector<ControlPath>& u,
                             const std::vector<ControlPath>& ref) {
    if (u.size() != ref.size())
        throw std::invalid_argument("relative_error: coordinate count mismatch");
    double diff = 0.0, base = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        if (!(u[c].grid() == ref[c].grid()))
            throw std::invalid_argument("relative_error: grids differ");
        for (int n = 0; n < u[c].size(); ++n) {
            double d = u[c][n] - ref[c][n];
            diff += d * d;
            base += ref[c][n] * ref[c][n];
        }
    }
    if (base == 0.0) {
        double dt = u.empty() ? 1.0 : u[0].grid().dt();
        return std::sqrt(dt * diff);
    }
    return std::sqrt(diff / base);
}

}  // namespace bsmp
