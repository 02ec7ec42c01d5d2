#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bsmp/grid.hpp"
#include "bsmp/harness/config.hpp"
#include "bsmp/harness/csv.hpp"
#include "bsmp/harness/ratefit.hpp"
#include "bsmp/noise.hpp"
#include "bsmp/optimize.hpp"
#include "bsmp/problems/benchmarks.hpp"
#include "bsmp/problems/hjb_train.hpp"
#include "bsmp/problems/lq.hpp"

#ifndef BSMP_VERSION_STRING
#define BSMP_VERSION_STRING "0.0.0+unknown"
#endif

namespace bsmp::harness {

inline const char* version_string() { return BSMP_VERSION_STRING; }

/// A problem instantiated for the drivers: one scalar spec per coordinate
/// plus an optional reference control factory (any grid).
struct ProblemSetup {
    std::string name;
    std::vector<ProblemSpec> coords;
    std::function<std::vector<ControlPath>(TimeGrid)> reference;
};

inline ProblemSetup make_problem(const ExperimentConfig& cfg) {
    ProblemSetup setup;
    setup.name = cfg.problem;
    if (cfg.problem == "example1") {
        benchmarks::ControlledDiffusion p;
        setup.coords = {p.coordinate(0), p.coordinate(1)};
        setup.reference = [p](TimeGrid grid) { return p.reference_control(grid); };
    } else if (cfg.problem == "example2") {
        benchmarks::MultiplicativeNoise p;
        setup.coords = {p.coordinate(0), p.coordinate(1)};
        setup.reference = [p](TimeGrid grid) { return p.reference_control(grid); };
    } else if (cfg.problem == "custom") {
        setup.coords = {cfg.lq.spec()};
    } else if (cfg.problem == "hjb") {
        throw ConfigError("the feedback problem runs through the hjb driver, not solve/study");
    } else {
        throw ConfigError("unknown problem: " + cfg.problem);
    }
    return setup;
}

struct HistoryRow {
    long k = 0;
    double grad_norm = 0.0;
    std::optional<double> rel_error;
    double wall_time_s = 0.0;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<ControlPath> controls;
    std::optional<double> rel_err;  // joint over coordinates, final iterate
    double time_s = 0.0;
    std::vector<HistoryRow> history;
    bool diverged = false;
    std::string message;
};

struct ExperimentResult {
    std::string problem;
    std::string method;
    int n = 0;
    long m = 0;
    long k = 0;
    std::vector<SeedRun> runs;
    std::optional<double> mean_rel_err;
    std::optional<double> std_rel_err;
    double mean_time_s = 0.0;
    std::optional<double> mean_ctrl_rel_err;  // error of the seed-averaged control
    bool diverged = false;
};

class RunDivergence : public std::runtime_error {
  public:
    RunDivergence(std::string what, ExperimentResult partial)
        : std::runtime_error(std::move(what)), result(std::move(partial)) {}
    ExperimentResult result;
};

namespace detail {

inline LearningRate schedule_from(const ExperimentConfig& cfg) {
    if (cfg.theta) return LearningRate::diminishing(*cfg.theta, cfg.m0);
    if (cfg.lr) return LearningRate::constant(*cfg.lr);
    throw ConfigError("method '" + cfg.method + "' needs lr or theta in the config");
}

/// Runs all coordinates of one seed and merges the per-coordinate histories
/// into joint rows (joint gradient norm, joint relative error, summed time).
inline SeedRun solve_seed(const ProblemSetup& setup, const ExperimentConfig& cfg, TimeGrid grid,
                          long m, long k, std::uint64_t seed,
                          const std::vector<ControlPath>* reference) {
    SeedRun run;
    run.seed = seed;
    std::vector<SolveResult> parts;
    parts.reserve(setup.coords.size());
    for (std::size_t coord = 0; coord < setup.coords.size(); ++coord) {
        const ControlPath* ref =
            reference ? &(*reference)[coord] : nullptr;
        const std::uint64_t coord_seed = bsmp::detail::substream(seed, coord);
        const ControlPath start = ControlPath::zeros(grid);
        try {
            if (cfg.method == "batch_sgd") {
                ProjectionConfig pc;
                pc.iterations = k;
                pc.batch_size = static_cast<int>(m);
                pc.lr = schedule_from(cfg);
                pc.seed = coord_seed;
                pc.scheme = cfg.scheme;
                pc.clamp = cfg.clamp;
                parts.push_back(run_projection(setup.coords[coord], grid, pc, start, ref));
            } else if (cfg.method == "contraction") {
                ContractionConfig cc;
                cc.iterations = k;
                cc.batch_size = static_cast<int>(m);
                cc.damping = cfg.rho;
                cc.seed = coord_seed;
                parts.push_back(run_contraction(setup.coords[coord], grid, cc, start, ref));
            } else {
                throw ConfigError("unknown method for this problem: " + cfg.method);
            }
        } catch (const DivergenceError& e) {
            run.diverged = true;
            run.message = e.what();
            parts.push_back(e.partial());
        }
        if (run.diverged) break;
    }

    std::vector<double> ref_norms;
    if (reference)
        for (const auto& r : *reference) ref_norms.push_back(l2_norm(r));

    std::size_t rows = 0;
    for (const auto& part : parts) rows = std::max(rows, part.history.size());
    run.history.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        HistoryRow& row = run.history[i];
        row.k = static_cast<long>(i) + 1;
        double g2 = 0.0, diff2 = 0.0, base2 = 0.0, wall = 0.0;
        bool have_err = reference != nullptr;
        for (std::size_t c = 0; c < parts.size(); ++c) {
            if (i >= parts[c].history.size()) continue;  // truncated by divergence
            const IterationRecord& rec = parts[c].history[i];
            g2 += rec.grad_norm * rec.grad_norm;
            wall += rec.wall_time_s;
            if (reference && rec.relative_error) {
                const double abs_err = *rec.relative_error * ref_norms[c];
                diff2 += abs_err * abs_err;
                base2 += ref_norms[c] * ref_norms[c];
            } else {
                have_err = false;
            }
        }
        row.grad_norm = std::sqrt(g2);
        row.wall_time_s = wall;
        if (have_err && base2 > 0.0) row.rel_error = std::sqrt(diff2 / base2);
    }

    for (auto& part : parts) run.controls.push_back(std::move(part.control));
    for (const auto& part : parts)
        if (!part.history.empty()) run.time_s += part.history.back().wall_time_s;
    if (reference && !run.diverged)
        run.rel_err = relative_error(run.controls, *reference);
    return run;
}

inline std::optional<double> ctrl_average_error(const std::vector<SeedRun>& runs,
                                                const std::vector<ControlPath>* reference,
                                                TimeGrid grid) {
    if (!reference || runs.empty()) return std::nullopt;
    const std::size_t coords = reference->size();
    std::vector<std::vector<double>> mean(coords);
    for (std::size_t c = 0; c < coords; ++c)
        mean[c].assign(static_cast<std::size_t>(grid.steps), 0.0);
    int counted = 0;
    for (const auto& run : runs) {
        if (run.diverged || run.controls.size() != coords) continue;
        for (std::size_t c = 0; c < coords; ++c)
            for (int n = 0; n < grid.steps; ++n)
                mean[c][static_cast<std::size_t>(n)] += run.controls[c][n];
        ++counted;
    }
    if (counted == 0) return std::nullopt;
    std::vector<ControlPath> avg;
    for (std::size_t c = 0; c < coords; ++c) {
        for (double& v : mean[c]) v /= counted;
        avg.emplace_back(grid, mean[c]);
    }
    return relative_error(avg, *reference);
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

}  // namespace detail

/// Core driver: run the configured method for every seed on one grid size.
/// Pure computation; file emission is separate.
inline ExperimentResult run_single(const ExperimentConfig& cfg, int n,
                                   std::uint64_t seed_offset = 0) {
    const ProblemSetup setup = make_problem(cfg);
    TimeGrid grid(1.0, n);
    ExperimentResult res;
    res.problem = cfg.problem;
    res.method = cfg.method;
    res.n = n;
    res.m = cfg.m.resolve(n);
    res.k = cfg.k.resolve(n);

    std::optional<std::vector<ControlPath>> reference;
    if (setup.reference) reference = setup.reference(grid);
    const std::vector<ControlPath>* ref_ptr = reference ? &*reference : nullptr;

    for (std::uint64_t seed : cfg.seeds) {
        res.runs.push_back(
            detail::solve_seed(setup, cfg, grid, res.m, res.k, seed + seed_offset, ref_ptr));
        if (res.runs.back().diverged) {
            res.diverged = true;
            break;
        }
    }

    std::vector<double> errs;
    double time_sum = 0.0;
    int timed = 0;
    for (const auto& run : res.runs) {
        if (run.diverged) continue;
        if (run.rel_err) errs.push_back(*run.rel_err);
        time_sum += run.time_s;
        ++timed;
    }
    if (timed > 0) res.mean_time_s = time_sum / timed;
    if (!errs.empty()) {
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= static_cast<double>(errs.size());
        res.mean_rel_err = mean;
        double var = 0.0;
        for (double e : errs) var += (e - mean) * (e - mean);
        res.std_rel_err = errs.size() > 1
                              ? std::sqrt(var / (static_cast<double>(errs.size()) - 1.0))
                              : 0.0;
    }
    res.mean_ctrl_rel_err = detail::ctrl_average_error(res.runs, ref_ptr, grid);
    return res;
}

namespace detail {

inline void write_history(const std::string& dir, const SeedRun& run) {
    csv::Table t;
    t.header = {"k", "grad_norm", "rel_error", "wall_time_s"};
    for (const auto& row : run.history)
        t.rows.push_back({std::to_string(row.k), csv::format_double(row.grad_norm),
                          opt_cell(row.rel_error), csv::format_double(row.wall_time_s)});
    csv::write_file(dir + "/history_" + std::to_string(run.seed) + ".csv", t);
}

inline void write_summary(const std::string& dir, const ExperimentResult& res) {
    csv::Table t;
    t.header = {"method", "N",           "M",           "K",
                "mean_rel_err", "std_rel_err", "mean_time_s", "mean_ctrl_rel_err"};
    t.rows.push_back({res.method, std::to_string(res.n), std::to_string(res.m),
                      std::to_string(res.k), opt_cell(res.mean_rel_err),
                      opt_cell(res.std_rel_err), csv::format_double(res.mean_time_s),
                      opt_cell(res.mean_ctrl_rel_err)});
    csv::write_file(dir + "/summary.csv", t);
}

inline nlohmann::json config_json(const ExperimentConfig& cfg, std::uint64_t seed_offset) {
    nlohmann::json j;
    j["problem"] = cfg.problem;
    j["method"] = cfg.method;
    j["n"] = cfg.n;
    if (!cfg.n_list.empty()) j["n_list"] = cfg.n_list;
    j["m"] = cfg.m.str();
    j["k"] = cfg.k.str();
    if (!cfg.k_list.empty()) j["k_list"] = cfg.k_list;
    j["scheme"] = cfg.scheme == Scheme::euler ? "euler" : "order2";
    if (cfg.lr) j["lr"] = *cfg.lr;
    if (cfg.theta) {
        j["theta"] = *cfg.theta;
        j["m0"] = cfg.m0;
    }
    j["rho"] = cfg.rho;
    j["eta"] = cfg.eta;
    if (cfg.clamp) j["clamp"] = *cfg.clamp;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s : cfg.seeds) seeds.push_back(s + seed_offset);
    j["seeds"] = seeds;
    if (cfg.problem == "custom") {
        j["coefficients"] = {{"x0", cfg.lq.x0}, {"a", cfg.lq.a},     {"b", cfg.lq.b},
                             {"c", cfg.lq.c},   {"s0", cfg.lq.s0},   {"su", cfg.lq.su},
                             {"qx", cfg.lq.qx}, {"xbar", cfg.lq.xbar}, {"r", cfg.lq.r},
                             {"gt", cfg.lq.gT}};
    }
    if (cfg.problem == "hjb") {
        j["d"] = cfg.dim;
        j["lambda"] = cfg.lambda;
        j["width"] = cfg.width;
        j["epochs"] = cfg.epochs;
        j["batch"] = cfg.batch;
        j["ref_samples"] = cfg.ref_samples;
        j["eval_samples"] = cfg.eval_samples;
        if (cfg.weight_scale > 0.0) j["weight_scale"] = cfg.weight_scale;
    }
    return j;
}

inline void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                           std::uint64_t seed_offset, const std::string& command,
                           bool diverged, nlohmann::json resolved = {}) {
    nlohmann::json j;
    j["version"] = version_string();
    j["command"] = command;
    j["status"] = diverged ? "diverged" : "ok";
    j["config"] = config_json(cfg, seed_offset);
    if (!resolved.is_null() && !resolved.empty()) j["resolved"] = resolved;
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + dir);
    os << j.dump(2) << '\n';
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

}  // namespace detail

/// Full single-experiment pipeline: run every seed, then emit
/// history_<seed>.csv per seed, summary.csv, and manifest.json under out_dir.
/// Empty out_dir skips emission. Divergence writes what exists, then throws
/// RunDivergence carrying the partial result.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                       std::uint64_t seed_offset = 0) {
    const ExperimentResult res = run_single(cfg, cfg.n, seed_offset);
    if (!out_dir.empty()) {
        detail::ensure_dir(out_dir);
        for (const auto& run : res.runs) detail::write_history(out_dir, run);
        if (!res.diverged) detail::write_summary(out_dir, res);
        nlohmann::json resolved;
        resolved["m"] = res.m;
        resolved["k"] = res.k;
        detail::write_manifest(out_dir, cfg, seed_offset, "solve", res.diverged, resolved);
    }
    if (res.diverged) {
        std::string msg = "divergence";
        for (const auto& run : res.runs)
            if (run.diverged) msg = run.message + " (seed " + std::to_string(run.seed) + ")";
        throw RunDivergence(msg, res);
    }
    return res;
}

struct StudyResult {
    std::vector<int> ns;
    std::vector<double> mean_errs;
    std::vector<ExperimentResult> per_n;
    RateFit fit;
};

/// Error-versus-resolution sweep with a log-log rate fit over the seed-mean
/// final errors. Emits ratefit.csv (N, mean_err rows; slope and r2 footer)
/// plus full per-N experiment outputs in n_<N>/ subdirectories.
inline StudyResult convergence_study(const ExperimentConfig& cfg, const std::string& out_dir,
                                     std::uint64_t seed_offset = 0) {
    if (cfg.n_list.size() < 3)
        throw ConfigError("convergence study needs n_list with at least 3 grid sizes");
    StudyResult study;
    for (int n : cfg.n_list) {
        ExperimentConfig sub = cfg;
        sub.n = n;
        sub.n_list.clear();
        const std::string sub_dir =
            out_dir.empty() ? std::string() : out_dir + "/n_" + std::to_string(n);
        ExperimentResult res = run_experiment(sub, sub_dir, seed_offset);
        if (!res.mean_rel_err)
            throw ConfigError("convergence study needs a problem with a reference control");
        study.ns.push_back(n);
        study.mean_errs.push_back(*res.mean_rel_err);
        study.per_n.push_back(std::move(res));
    }
    std::vector<double> xs(study.ns.begin(), study.ns.end());
    study.fit = fit_rate(xs, study.mean_errs);
    if (!out_dir.empty()) {
        detail::ensure_dir(out_dir);
        csv::Table t;
        t.header = {"N", "mean_err"};
        for (std::size_t i = 0; i < study.ns.size(); ++i)
            t.rows.push_back(
                {std::to_string(study.ns[i]), csv::format_double(study.mean_errs[i])});
        t.rows.push_back({"slope", csv::format_double(study.fit.slope)});
        t.rows.push_back({"r2", csv::format_double(study.fit.r2)});
        csv::write_file(out_dir + "/ratefit.csv", t);
        detail::write_manifest(out_dir, cfg, seed_offset, "study", false);
    }
    return study;
}

struct PlateauPoint {
    long k = 0;
    int n = 0;
    double mean_err = 0.0;
    ExperimentResult result;
};

/// Damped-contraction preset coupling the grid to the iteration budget via
/// N = floor(1 / eta^K). Emits plateau.csv with one row per configured K.
inline std::vector<PlateauPoint> contraction_study(const ExperimentConfig& cfg,
                                                   const std::string& out_dir,
                                                   std::uint64_t seed_offset = 0) {
    if (cfg.k_list.empty()) throw ConfigError("contraction study needs k_list");
    if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ConfigError("eta must be in (0, 1)");
    std::vector<PlateauPoint> points;
    for (long kk : cfg.k_list) {
        const double coupled = std::floor(1.0 / std::pow(cfg.eta, static_cast<double>(kk)));
        if (!(coupled >= 1.0) || coupled > 1e6)
            throw ConfigError("k_list entry " + std::to_string(kk) +
                              " puts the coupled grid size out of range");
        PlateauPoint pt;
        pt.k = kk;
        pt.n = static_cast<int>(coupled);
        ExperimentConfig sub = cfg;
        sub.method = "contraction";
        sub.n = pt.n;
        sub.k = SymbolicCount::literal(kk);
        sub.k_list.clear();
        const std::string sub_dir =
            out_dir.empty() ? std::string() : out_dir + "/k_" + std::to_string(kk);
        pt.result = run_experiment(sub, sub_dir, seed_offset);
        if (!pt.result.mean_rel_err)
            throw ConfigError("contraction study needs a problem with a reference control");
        pt.mean_err = *pt.result.mean_rel_err;
        points.push_back(std::move(pt));
    }
    if (!out_dir.empty()) {
        detail::ensure_dir(out_dir);
        csv::Table t;
        t.header = {"K", "N", "mean_err", "mean_ctrl_rel_err"};
        for (const auto& pt : points)
            t.rows.push_back({std::to_string(pt.k), std::to_string(pt.n),
                              csv::format_double(pt.mean_err),
                              detail::opt_cell(pt.result.mean_ctrl_rel_err)});
        csv::write_file(out_dir + "/plateau.csv", t);
        detail::write_manifest(out_dir, cfg, seed_offset, "study", false);
    }
    return points;
}

struct CompareRow {
    std::string method;
    long m = 0;
    long k = 0;
    int n = 0;
    double mean_time_s = 0.0;
    std::optional<double> mean_rel_err;
    ExperimentResult result;
};

/// Efficiency table: single-sample SGD (M=1, K=N^3), batch SGD (M=N, K=N^2),
/// and damped contraction (M=N^2, K from the config). Emits comparison.csv.
inline std::vector<CompareRow> compare_methods(const ExperimentConfig& cfg,
                                               const std::string& out_dir,
                                               std::uint64_t seed_offset = 0) {
    const long n = cfg.n;
    struct Plan {
        const char* label;
        const char* method;
        long m;
        long k;
    };
    const std::vector<Plan> plans = {
        {"plain_sgd", "batch_sgd", 1, n * n * n},
        {"batch_sgd", "batch_sgd", n, n * n},
        {"contraction", "contraction", n * n, cfg.k.resolve(cfg.n)},
    };
    std::vector<CompareRow> rows;
    for (const Plan& plan : plans) {
        ExperimentConfig sub = cfg;
        sub.method = plan.method;
        sub.m = SymbolicCount::literal(plan.m);
        sub.k = SymbolicCount::literal(plan.k);
        CompareRow row;
        row.method = plan.label;
        row.m = plan.m;
        row.k = plan.k;
        row.n = cfg.n;
        const std::string sub_dir =
            out_dir.empty() ? std::string() : out_dir + "/" + plan.label;
        row.result = run_experiment(sub, sub_dir, seed_offset);
        row.mean_time_s = row.result.mean_time_s;
        row.mean_rel_err = row.result.mean_rel_err;
        rows.push_back(std::move(row));
    }
    if (!out_dir.empty()) {
        detail::ensure_dir(out_dir);
        csv::Table t;
        t.header = {"method", "M", "K", "N", "mean_time_s", "mean_rel_err"};
        for (const auto& row : rows)
            t.rows.push_back({row.method, std::to_string(row.m), std::to_string(row.k),
                              std::to_string(row.n), csv::format_double(row.mean_time_s),
                              detail::opt_cell(row.mean_rel_err)});
        csv::write_file(out_dir + "/comparison.csv", t);
        detail::write_manifest(out_dir, cfg, seed_offset, "compare", false);
    }
    return rows;
}

struct HjbSeedRun {
    std::uint64_t seed = 0;
    double value = 0.0;
    double rel_err = 0.0;
    double time_s = 0.0;
    std::vector<hjb::EpochRecord> history;
};

struct HjbResult {
    double reference = 0.0;
    double reference_se = 0.0;
    std::vector<HjbSeedRun> runs;
    double mean_rel_err = 0.0;
    double std_rel_err = 0.0;
    double mean_time_s = 0.0;
};

/// Feedback-control training driver: trains the randomized net per seed and
/// compares the trained value estimate against the Monte-Carlo reference.
inline HjbResult hjb_run(const ExperimentConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed_offset = 0) {
    if (cfg.problem != "hjb") throw ConfigError("hjb driver needs problem = hjb");
    hjb::ParamOptimizer opt;
    if (cfg.method == "param_sgd")
        opt = hjb::ParamOptimizer::sgd;
    else if (cfg.method == "adagrad")
        opt = hjb::ParamOptimizer::adagrad;
    else if (cfg.method == "adam")
        opt = hjb::ParamOptimizer::adam;
    else
        throw ConfigError("hjb method must be param_sgd, adagrad, or adam");

    const hjb::HjbSpec spec = hjb::HjbSpec::standard(cfg.dim, cfg.lambda);
    TimeGrid grid(spec.horizon, cfg.n);
    const hjb::ReferenceValue ref =
        hjb::reference_value(spec, cfg.ref_samples, bsmp::detail::substream(0x9d2c5680ull, seed_offset));
    if (ref.value == 0.0) throw std::runtime_error("hjb reference value is zero; relative error undefined");

    HjbResult out;
    out.reference = ref.value;
    out.reference_se = ref.std_error;

    for (std::uint64_t seed : cfg.seeds) {
        hjb::TrainConfig tc;
        tc.grid = grid;
        tc.batch = cfg.batch;
        tc.epochs = cfg.epochs;
        tc.lr = cfg.lr ? *cfg.lr : 2e-3;
        tc.optimizer = opt;
        tc.width = cfg.width;
        tc.weight_scale = cfg.weight_scale;
        tc.seed = seed + seed_offset;
        bsmp::detail::StopWatch watch;
        hjb::TrainResult trained = hjb::train(spec, tc);
        const hjb::CostEstimate value = hjb::simulate_cost(
            spec, trained.net, grid, static_cast<int>(cfg.eval_samples),
            bsmp::detail::substream(seed + seed_offset, 0xe7a1ull));
        HjbSeedRun run;
        run.seed = seed + seed_offset;
        run.value = value.value;
        run.rel_err = std::abs(value.value - ref.value) / std::abs(ref.value);
        run.time_s = watch.seconds();
        run.history = std::move(trained.history);
        out.runs.push_back(std::move(run));
    }

    double mean = 0.0;
    for (const auto& r : out.runs) {
        mean += r.rel_err;
        out.mean_time_s += r.time_s;
    }
    mean /= static_cast<double>(out.runs.size());
    out.mean_rel_err = mean;
    double var = 0.0;
    for (const auto& r : out.runs) var += (r.rel_err - mean) * (r.rel_err - mean);
    out.std_rel_err =
        out.runs.size() > 1 ? std::sqrt(var / (static_cast<double>(out.runs.size()) - 1.0)) : 0.0;
    out.mean_time_s /= static_cast<double>(out.runs.size());

    if (!out_dir.empty()) {
        detail::ensure_dir(out_dir);
        for (const auto& run : out.runs) {
            csv::Table t;
            t.header = {"k", "grad_norm", "rel_error", "wall_time_s"};
            for (const auto& rec : run.history)
                t.rows.push_back({std::to_string(rec.epoch), csv::format_double(rec.grad_norm),
                                  csv::format_double(std::abs(rec.cost - ref.value) /
                                                     std::abs(ref.value)),
                                  csv::format_double(rec.wall_time_s)});
            csv::write_file(out_dir + "/history_" + std::to_string(run.seed) + ".csv", t);
        }
        csv::Table t;
        t.header = {"method", "N",           "M",           "K",
                    "mean_rel_err", "std_rel_err", "mean_time_s", "mean_ctrl_rel_err"};
        t.rows.push_back({cfg.method, std::to_string(cfg.n), std::to_string(cfg.batch),
                          std::to_string(cfg.epochs), csv::format_double(out.mean_rel_err),
                          csv::format_double(out.std_rel_err),
                          csv::format_double(out.mean_time_s), std::string()});
        csv::write_file(out_dir + "/summary.csv", t);
        nlohmann::json resolved;
        resolved["reference_value"] = out.reference;
        resolved["reference_se"] = out.reference_se;
        detail::write_manifest(out_dir, cfg, seed_offset, "hjb", false, resolved);
    }
    return out;
}

}  // namespace bsmp::harness
