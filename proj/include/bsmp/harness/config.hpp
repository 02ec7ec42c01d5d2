#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsmp/problems/lq.hpp"
#include "bsmp/simulate.hpp"

namespace bsmp::harness {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A count that may be a literal or one of the grid-coupled forms
/// N, N^2, c*N, c*N^2 (c a positive literal), resolved once N is known.
class SymbolicCount {
  public:
    static SymbolicCount literal(long v) {
        SymbolicCount s;
        s.kind_ = Kind::literal;
        s.literal_ = v;
        return s;
    }

    static SymbolicCount parse(const std::string& text) {
        SymbolicCount s;
        std::string body = text;
        const auto star = text.find('*');
        if (star != std::string::npos) {
            try {
                std::size_t used = 0;
                s.factor_ = std::stod(text.substr(0, star), &used);
                if (used != star) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("bad count expression: " + text);
            }
            if (!(s.factor_ > 0.0)) throw ConfigError("count multiplier must be positive: " + text);
            body = text.substr(star + 1);
        }
        if (body == "N") {
            s.kind_ = Kind::linear;
        } else if (body == "N^2") {
            s.kind_ = Kind::quadratic;
        } else if (star == std::string::npos) {
            try {
                std::size_t used = 0;
                s.literal_ = std::stol(body, &used);
                if (used != body.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("bad count expression: " + text);
            }
            s.kind_ = Kind::literal;
        } else {
            throw ConfigError("bad count expression: " + text);
        }
        return s;
    }

    long resolve(int n) const {
        double v = 0.0;
        switch (kind_) {
            case Kind::literal:
                return literal_;
            case Kind::linear:
                v = factor_ * n;
                break;
            case Kind::quadratic:
                v = factor_ * n * static_cast<double>(n);
                break;
        }
        const long out = std::lround(v);
        if (out < 1) throw ConfigError("count expression resolves to a non-positive value");
        return out;
    }

    std::string str() const {
        switch (kind_) {
            case Kind::literal:
                return std::to_string(literal_);
            case Kind::linear:
                return factor_ == 1.0 ? "N" : trim_num(factor_) + "*N";
            case Kind::quadratic:
                return factor_ == 1.0 ? "N^2" : trim_num(factor_) + "*N^2";
        }
        return {};
    }

  private:
    enum class Kind { literal, linear, quadratic };
    Kind kind_ = Kind::literal;
    long literal_ = 1;
    double factor_ = 1.0;

    static std::string trim_num(double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    }
};

/// Flat key = value experiment description. Unset optionals fall back to
/// per-driver defaults; unknown keys are rejected.
struct ExperimentConfig {
    std::string problem = "example2";
    std::string method = "batch_sgd";
    int n = 40;
    std::vector<int> n_list;                      // convergence studies
    SymbolicCount m = SymbolicCount::literal(1);  // batch size
    SymbolicCount k = SymbolicCount::literal(1);  // iterations
    Scheme scheme = Scheme::euler;
    std::optional<double> lr;     // constant learning rate
    std::optional<double> theta;  // diminishing schedule scale
    double m0 = 0.0;              // diminishing schedule offset
    double rho = 0.995;
    std::vector<std::uint64_t> seeds{1};
    std::optional<double> clamp;
    std::string out;

    // contraction study preset
    std::vector<long> k_list;
    double eta = 0.995;

    // custom problem coefficients
    LqProblem lq;

    // feedback problem
    int dim = 10;
    double lambda = 1.0;
    int width = 128;
    int epochs = 380;
    int batch = 1024;
    long long ref_samples = 1000000;
    long long eval_samples = 100000;
    double weight_scale = 0.0;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + v);
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for '" + key + "': " + v);
    }
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, Fn one) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(one(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    bool seeds_set = false;
    long long num_seeds = 0;
    std::uint64_t first_seed = 1;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::strip(line.substr(0, eq));
        const std::string value = detail::strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");

        if (key == "problem") {
            cfg.problem = value;
        } else if (key == "method") {
            cfg.method = value;
        } else if (key == "n") {
            cfg.n = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "n_list") {
            cfg.n_list = detail::parse_list<int>(key, value, [](const std::string& k2,
                                                                const std::string& v2) {
                return static_cast<int>(detail::parse_int(k2, v2));
            });
        } else if (key == "m") {
            cfg.m = SymbolicCount::parse(value);
        } else if (key == "k") {
            cfg.k = SymbolicCount::parse(value);
        } else if (key == "k_list") {
            cfg.k_list = detail::parse_list<long>(key, value, [](const std::string& k2,
                                                                 const std::string& v2) {
                return static_cast<long>(detail::parse_int(k2, v2));
            });
        } else if (key == "scheme") {
            if (value == "euler")
                cfg.scheme = Scheme::euler;
            else if (value == "order2")
                cfg.scheme = Scheme::order2;
            else
                throw ConfigError("unknown scheme: " + value);
        } else if (key == "lr") {
            cfg.lr = detail::parse_double(key, value);
        } else if (key == "theta") {
            cfg.theta = detail::parse_double(key, value);
        } else if (key == "m0") {
            cfg.m0 = detail::parse_double(key, value);
        } else if (key == "rho") {
            cfg.rho = detail::parse_double(key, value);
        } else if (key == "eta") {
            cfg.eta = detail::parse_double(key, value);
        } else if (key == "clamp") {
            cfg.clamp = detail::parse_double(key, value);
        } else if (key == "seeds") {
            cfg.seeds = detail::parse_list<std::uint64_t>(
                key, value, [](const std::string& k2, const std::string& v2) {
                    return static_cast<std::uint64_t>(detail::parse_int(k2, v2));
                });
            seeds_set = true;
        } else if (key == "num_seeds") {
            num_seeds = detail::parse_int(key, value);
        } else if (key == "first_seed") {
            first_seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "x0") {
            cfg.lq.x0 = detail::parse_double(key, value);
        } else if (key == "a") {
            cfg.lq.a = detail::parse_double(key, value);
        } else if (key == "b") {
            cfg.lq.b = detail::parse_double(key, value);
        } else if (key == "c") {
            cfg.lq.c = detail::parse_double(key, value);
        } else if (key == "s0") {
            cfg.lq.s0 = detail::parse_double(key, value);
        } else if (key == "su") {
            cfg.lq.su = detail::parse_double(key, value);
        } else if (key == "qx") {
            cfg.lq.qx = detail::parse_double(key, value);
        } else if (key == "xbar") {
            cfg.lq.xbar = detail::parse_double(key, value);
        } else if (key == "r") {
            cfg.lq.r = detail::parse_double(key, value);
        } else if (key == "gt") {
            cfg.lq.gT = detail::parse_double(key, value);
        } else if (key == "d") {
            cfg.dim = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "lambda") {
            cfg.lambda = detail::parse_double(key, value);
        } else if (key == "width") {
            cfg.width = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "epochs") {
            cfg.epochs = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "batch") {
            cfg.batch = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "ref_samples") {
            cfg.ref_samples = detail::parse_int(key, value);
        } else if (key == "eval_samples") {
            cfg.eval_samples = detail::parse_int(key, value);
        } else if (key == "weight_scale") {
            cfg.weight_scale = detail::parse_double(key, value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    if (num_seeds > 0) {
        if (seeds_set) throw ConfigError("give either seeds or num_seeds, not both");
        cfg.seeds.clear();
        for (long long i = 0; i < num_seeds; ++i)
            cfg.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
    }
    if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
    if (cfg.n < 1) throw ConfigError("n must be positive");
    if (cfg.lr && cfg.theta) throw ConfigError("give either lr or theta, not both");
    if (cfg.lr && !(*cfg.lr > 0.0)) throw ConfigError("lr must be positive");
    if (cfg.theta && !(*cfg.theta > 0.0)) throw ConfigError("theta must be positive");
    if (cfg.m0 < 0.0) throw ConfigError("m0 must be nonnegative");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ConfigError("rho must be in (0, 1)");
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse_config(is);
}

}  // namespace bsmp::harness
