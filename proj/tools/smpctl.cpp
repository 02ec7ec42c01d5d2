// Command-line front end for the solver and the experiment drivers.
//
// Subcommands:
//   solve    run one method/problem/grid for every configured seed
//   study    convergence-rate sweep (n_list) or contraction plateau (k_list)
//   compare  efficiency table: plain SGD vs batch SGD vs contraction
//   hjb      train the randomized feedback net and compare against the
//            Monte-Carlo reference value
//
// Exit codes: 0 success, 2 configuration error, 3 solver divergence
// (partial outputs are kept).

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsmp/harness/run.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::uint64_t seed_offset = 0;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "flat key = value experiment description")
        ->required();
    sub->add_option("--out", args.out, "output directory (default: config 'out' key)");
    sub->add_option("--seed-offset", args.seed_offset, "added to every configured seed");
}

std::string resolve_out(const CommonArgs& args, const bsmp::harness::ExperimentConfig& cfg,
                        const std::string& command) {
    if (!args.out.empty()) return args.out;
    if (!cfg.out.empty()) return cfg.out;
    return command + "_out";
}

int do_solve(const CommonArgs& args) {
    const auto cfg = bsmp::harness::parse_config_file(args.config);
    const std::string out = resolve_out(args, cfg, "solve");
    const auto res = bsmp::harness::run_experiment(cfg, out, args.seed_offset);
    std::cout << "solve " << res.problem << " method=" << res.method << " N=" << res.n
              << " M=" << res.m << " K=" << res.k;
    if (res.mean_rel_err) std::cout << " mean_rel_err=" << *res.mean_rel_err;
    if (res.mean_ctrl_rel_err)
        std::cout << " mean_ctrl_rel_err=" << *res.mean_ctrl_rel_err;
    std::cout << " mean_time_s=" << res.mean_time_s << "\nwrote " << out << std::endl;
    return 0;
}

int do_study(const CommonArgs& args) {
    const auto cfg = bsmp::harness::parse_config_file(args.config);
    const std::string out = resolve_out(args, cfg, "study");
    if (!cfg.k_list.empty() && !cfg.n_list.empty())
        throw bsmp::harness::ConfigError("give n_list (rate study) or k_list (plateau), not both");
    if (!cfg.k_list.empty()) {
        const auto points = bsmp::harness::contraction_study(cfg, out, args.seed_offset);
        for (const auto& pt : points)
            std::cout << "K=" << pt.k << " N=" << pt.n << " mean_err=" << pt.mean_err << '\n';
        std::cout << "wrote " << out << std::endl;
        return 0;
    }
    const auto study = bsmp::harness::convergence_study(cfg, out, args.seed_offset);
    for (std::size_t i = 0; i < study.ns.size(); ++i)
        std::cout << "N=" << study.ns[i] << " mean_err=" << study.mean_errs[i] << '\n';
    std::cout << "slope=" << study.fit.slope << " r2=" << study.fit.r2 << "\nwrote " << out
              << std::endl;
    return 0;
}

int do_compare(const CommonArgs& args) {
    const auto cfg = bsmp::harness::parse_config_file(args.config);
    const std::string out = resolve_out(args, cfg, "compare");
    const auto rows = bsmp::harness::compare_methods(cfg, out, args.seed_offset);
    for (const auto& row : rows) {
        std::cout << row.method << " M=" << row.m << " K=" << row.k
                  << " time_s=" << row.mean_time_s;
        if (row.mean_rel_err) std::cout << " rel_err=" << *row.mean_rel_err;
        std::cout << '\n';
    }
    std::cout << "wrote " << out << std::endl;
    return 0;
}

int do_hjb(const CommonArgs& args) {
    auto cfg = bsmp::harness::parse_config_file(args.config);
    const std::string out = resolve_out(args, cfg, "hjb");
    const auto res = bsmp::harness::hjb_run(cfg, out, args.seed_offset);
    std::cout << "hjb d=" << cfg.dim << " lambda=" << cfg.lambda
              << " reference=" << res.reference << " (se " << res.reference_se << ")\n";
    for (const auto& run : res.runs)
        std::cout << "seed " << run.seed << ": value=" << run.value
                  << " rel_err=" << run.rel_err << " time_s=" << run.time_s << '\n';
    std::cout << "mean_rel_err=" << res.mean_rel_err << "\nwrote " << out << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch sample-wise stochastic optimal control toolkit"};
    app.require_subcommand(1);
    CommonArgs args;
    CLI::App* solve = app.add_subcommand("solve", "run one experiment");
    CLI::App* study = app.add_subcommand("study", "convergence or plateau study");
    CLI::App* compare = app.add_subcommand("compare", "method efficiency table");
    CLI::App* hjb = app.add_subcommand("hjb", "train the feedback control");
    for (CLI::App* sub : {solve, study, compare, hjb}) add_common(sub, args);

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return do_solve(args);
        if (study->parsed()) return do_study(args);
        if (compare->parsed()) return do_compare(args);
        if (hjb->parsed()) return do_hjb(args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const bsmp::harness::RunDivergence& e) {
        std::cerr << "divergence: " << e.what() << " (partial outputs retained)" << std::endl;
        return 3;
    } catch (const bsmp::hjb::TrainDivergence& e) {
        std::cerr << "divergence: " << e.what() << std::endl;
        return 3;
    } catch (const bsmp::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << std::endl;
        return 3;
    } catch (const bsmp::harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
