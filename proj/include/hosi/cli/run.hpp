#pragma once

// Run configuration and the four command bodies (estimate, oracle, compare,
// transform), independent of argument parsing.

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hosi/cli/function_spec.hpp"
#include "hosi/cli/report.hpp"
#include "hosi/cyclic_design.hpp"
#include "hosi/mobius.hpp"
#include "hosi/moment_indices.hpp"
#include "hosi/oracles.hpp"
#include "hosi/sampling.hpp"
#include "hosi/spectral_fourier.hpp"
#include "hosi/spectral_walsh.hpp"

namespace hosi::cli {

enum class Command { estimate, oracle, compare, transform };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::estimate: return "estimate";
        case Command::oracle: return "oracle";
        case Command::compare: return "compare";
        case Command::transform: return "transform";
    }
    return "?";
}

struct RunConfig {
    Command command = Command::estimate;
    std::string function;
    int p = 2;
    std::string family = "moment";  // moment | fourier | walsh
    int base = 2;
    std::string estimator;           // empty: family default
    std::string subsets = "singletons";
    std::uint64_t n = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string sampler = "mc";      // mc | lattice
    std::string format = "csv";
    std::string out;                 // empty: stdout
    std::optional<int> dim;          // extern only
    double z_max = 4.0;
    double timeout = 30.0;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& msg) : Error("--" + field + ": " + msg) {}
};

inline IndexFamily parse_family(const std::string& s) {
    if (s == "moment") return IndexFamily::moment;
    if (s == "fourier") return IndexFamily::fourier;
    if (s == "walsh") return IndexFamily::walsh;
    throw ConfigError("family", "unknown family '" + s + "' (moment, fourier, walsh)");
}

inline std::string default_estimator(IndexFamily f) { return f == IndexFamily::moment ? "difference" : "full"; }

/// Selector grammar: ';'-separated parts, each `all` (nonempty subsets,
/// d <= 20), `singletons`, `pairs`, or an explicit `{1,3}`.  Duplicates are
/// dropped; order is ascending by mask.
inline std::vector<VarSubset> parse_subsets(const std::string& text, int d) {
    std::map<VarSubset::Mask, bool> seen;
    std::stringstream ss(text);
    std::string part;
    bool any = false;
    while (std::getline(ss, part, ';')) {
        while (!part.empty() && part.front() == ' ') part.erase(part.begin());
        while (!part.empty() && part.back() == ' ') part.pop_back();
        if (part.empty()) continue;
        any = true;
        if (part == "all") {
            if (d > kMaxLatticeDim) throw ConfigError("subsets", "'all' needs d <= 20; use singletons, pairs or explicit subsets");
            for (const auto& u : enumerate_subsets(d, SubsetFilter::nonempty)) seen[u.mask()] = true;
        } else if (part == "singletons") {
            for (const auto& u : enumerate_subsets(d, SubsetFilter::singletons)) seen[u.mask()] = true;
        } else if (part == "pairs") {
            for (const auto& u : enumerate_subsets(d, SubsetFilter::up_to_size, 2))
                if (u.size() == 2) seen[u.mask()] = true;
        } else if (part.front() == '{' && part.back() == '}') {
            std::vector<int> vars;
            std::stringstream inner(part.substr(1, part.size() - 2));
            std::string tok;
            while (std::getline(inner, tok, ',')) {
                if (tok.find_first_not_of(' ') == std::string::npos) continue;
                try {
                    std::size_t used = 0;
                    const int v = std::stoi(tok, &used);
                    if (tok.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(tok);
                    vars.push_back(v);
                } catch (const std::exception&) {
                    throw ConfigError("subsets", "bad variable index '" + tok + "' in " + part);
                }
            }
            try {
                seen[VarSubset::of(d, vars).mask()] = true;
            } catch (const Error& e) {
                throw ConfigError("subsets", e.what());
            }
        } else {
            throw ConfigError("subsets", "unknown selector '" + part + "' (all, singletons, pairs, {i,j,...})");
        }
    }
    if (!any) throw ConfigError("subsets", "empty selector");
    std::vector<VarSubset> out;
    for (const auto& [m, flag] : seen) out.emplace_back(d, m);
    return out;
}

/// Everything validated before the first evaluation.
struct PreparedRun {
    RunConfig cfg;
    FunctionSpec spec;
    IndexFamily family = IndexFamily::moment;
    std::string estimator;
    std::vector<VarSubset> subsets;
    PointSet points = PointSet::monte_carlo;
};

inline PreparedRun prepare(const RunConfig& cfg) {
    PreparedRun run;
    run.cfg = cfg;
    if (cfg.function.empty()) throw ConfigError("function", "a function spec is required");
    run.family = parse_family(cfg.family);
    if (cfg.p < 2 || cfg.p > 8) throw ConfigError("p", "order must lie in [2, 8]");
    if (run.family == IndexFamily::walsh) {
        if (cfg.base < 2 || cfg.base > kMaxWalshBase) throw ConfigError("base", "Walsh base must lie in [2, 64]");
    }
    if (cfg.command != Command::oracle && cfg.n < 2) throw ConfigError("n", "need at least 2 replicates");
    if (cfg.sampler == "mc") run.points = PointSet::monte_carlo;
    else if (cfg.sampler == "lattice") run.points = PointSet::shifted_lattice;
    else throw ConfigError("sampler", "unknown sampler '" + cfg.sampler + "' (mc, lattice)");
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format", "unknown format '" + cfg.format + "' (csv, json)");
    if (!(cfg.z_max > 0.0)) throw ConfigError("z-max", "must be positive");
    if (!(cfg.timeout > 0.0)) throw ConfigError("timeout", "must be positive");

    run.estimator = cfg.estimator.empty() ? default_estimator(run.family) : cfg.estimator;
    if (run.family == IndexFamily::moment) {
        if (run.estimator != "difference" && run.estimator != "centered" && run.estimator != "total")
            throw ConfigError("estimator", "moment family estimators: difference, centered, total");
        if (run.estimator == "total" && cfg.p != 2) throw ConfigError("estimator", "the total index is defined for p = 2 only");
    } else if (run.estimator != "full" && run.estimator != "reduced") {
        throw ConfigError("estimator", std::string(to_string(run.family)) + " family estimators: full, reduced");
    }

    try {
        run.spec = parse_function_spec(cfg.function, cfg.dim);
    } catch (const SpecParseError& e) {
        throw ConfigError("function", e.what());
    }
    if ((cfg.command == Command::oracle || cfg.command == Command::compare) && !run.spec.oracle_capable())
        throw ConfigError("function", "external functions have no oracle; use the estimate command");
    run.subsets = parse_subsets(cfg.subsets, run.spec.dim);
    return run;
}

/// Per-subset design seed: the run seed mixed with the subset mask, so
/// subsets get independent streams.
inline std::uint64_t subset_seed(std::uint64_t seed, const VarSubset& u) {
    return splitmix64(seed ^ splitmix64(u.mask() + 0x9e3779b97f4a7c15ull));
}

struct SubsetEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
};

inline SubsetEstimate estimate_subset(const PreparedRun& run, const BlackBoxFunction& f, const VarSubset& u) {
    const auto& c = run.cfg;
    const std::uint64_t seed = subset_seed(c.seed, u);
    const int d = run.spec.dim;
    if (run.family == IndexFamily::moment) {
        const int p = run.estimator == "total" ? 1 : c.p;
        const auto design = build_pickfreeze(seed, c.n, d, std::max(p, 2), u, run.points);
        IndexEstimate e;
        if (run.estimator == "difference") e = estimate_ult_p_difference(f, u, c.p, design, c.workers);
        else if (run.estimator == "centered") e = estimate_ult_p_centered(f, u, c.p, design, c.workers);
        else e = estimate_total_effect(f, u, design, c.workers);
        return {e.value, e.std_error, seed};
    }
    const CyclicDesign design(seed, c.n, d, c.p, u, run.estimator == "full" ? CyclicForm::full : CyclicForm::reduced,
                              run.family == IndexFamily::fourier ? Synthesis::fourier : Synthesis::walsh, c.base,
                              run.points);
    const SpectralEstimate e = estimate_ult_cyclic(f, u, c.p, design, c.workers);
    return {e.value, e.std_error, seed};
}

/// Oracle value matching the estimator: ult_u, or for the total index
/// ult_{1..d} - ult_{-u}.
inline double oracle_for(const PreparedRun& run, const VarSubset& u) {
    if (run.estimator == "total") {
        const int d = run.spec.dim;
        const VarSubset rest = complement(u);
        const double full = run.spec.oracle(VarSubset::full(d), 2, run.family, run.cfg.base).ult;
        const double comp = rest.is_empty() ? 0.0 : run.spec.oracle(rest, 2, run.family, run.cfg.base).ult;
        return full - comp;
    }
    return run.spec.oracle(u, run.cfg.p, run.family, run.cfg.base).ult;
}

/// (estimate - oracle) / SE, defined as 0 when both the SE and the
/// difference vanish.
inline double z_score(double estimate, double oracle, double se) {
    const double diff = estimate - oracle;
    if (se > 0.0) return diff / se;
    if (diff == 0.0) return 0.0;
    return diff > 0 ? INFINITY : -INFINITY;
}

inline std::string format_config_number(double v) { return format_number(v); }

inline Report make_report(const PreparedRun& run) {
    const auto& c = run.cfg;
    Report rep;
    rep.config = {{"command", to_string(c.command)},
                  {"function", c.function},
                  {"dim", std::to_string(run.spec.dim)},
                  {"p", std::to_string(c.p)},
                  {"family", c.family},
                  {"base", std::to_string(c.base)},
                  {"estimator", run.estimator},
                  {"subsets", c.subsets},
                  {"n", std::to_string(c.n)},
                  {"seed", std::to_string(c.seed)},
                  {"workers", std::to_string(c.workers)},
                  {"sampler", c.sampler},
                  {"z_max", format_config_number(c.z_max)}};
    if (c.p % 2 == 1) {
        if (run.family == IndexFamily::moment)
            rep.notes.push_back("odd p: ult^(p) is a signed moment quantity and may be negative");
        else
            rep.notes.push_back("odd p: spectral estimand is the real part of a possibly complex coefficient sum (experimental)");
    }
    return rep;
}

struct RunOutcome {
    Report report;
    int exit_code = 0;
};

/// Runs against `f`; the plain overload builds f from the spec.  Passing a
/// different function lets a harness pair an estimate with a foreign oracle.
inline RunOutcome execute(const PreparedRun& run, const BlackBoxFunction& f) {
    const auto& c = run.cfg;
    RunOutcome out;
    out.report = make_report(run);
    const std::string family = c.family == "walsh" ? "walsh" + std::to_string(c.base) : c.family;

    if (c.command == Command::oracle) {
        for (const auto& u : run.subsets) {
            ReportRow r{u.to_string(), family, c.p, "oracle", 0, 0, oracle_for(run, u), 0.0, {}, {}};
            out.report.rows.push_back(std::move(r));
        }
        return out;
    }

    if (c.command == Command::transform) {
        if (run.estimator == "total") throw ConfigError("estimator", "transform works on cumulative indices, not totals");
        SubsetMap cum(run.spec.dim), se(run.spec.dim), orc(run.spec.dim);
        cum.set(VarSubset::empty(run.spec.dim), 0.0);
        se.set(VarSubset::empty(run.spec.dim), 0.0);
        orc.set(VarSubset::empty(run.spec.dim), 0.0);
        for (const auto& u : run.subsets) cum.set(u, 0.0);
        (void)moebius_transform(cum);  // validates downward closure before evaluating
        // Oracle columns are optional here: a missing closed form only drops them.
        bool with_oracle = run.spec.oracle_capable();
        if (with_oracle) {
            try {
                for (const auto& u : run.subsets) orc.set(u, oracle_for(run, u));
            } catch (const OracleUnavailable& e) {
                with_oracle = false;
                out.report.notes.push_back(std::string("no oracle columns: ") + e.what());
            }
        }
        std::map<VarSubset::Mask, std::uint64_t> seeds;
        for (const auto& u : run.subsets) {
            const auto e = estimate_subset(run, f, u);
            cum.set(u, e.value);
            se.set(u, e.std_error);
            seeds[u.mask()] = e.seed;
        }
        const SubsetMap comp = moebius_transform(cum);
        const SubsetMap comp_se = moebius_std_errors(se);
        const SubsetMap comp_orc = with_oracle ? moebius_transform(orc) : orc;
        out.report.notes.push_back("component standard errors assume independent subset estimates (approximate)");
        for (const auto& u : run.subsets) {
            ReportRow r{u.to_string(), family, c.p, run.estimator + ":component", c.n, seeds[u.mask()],
                        comp.at(u), comp_se.at(u), {}, {}};
            if (with_oracle) {
                r.oracle = comp_orc.at(u);
                r.z = z_score(r.value, *r.oracle, r.std_error);
            }
            out.report.rows.push_back(std::move(r));
        }
        return out;
    }

    std::vector<double> oracles;
    if (c.command == Command::compare)
        for (const auto& u : run.subsets) oracles.push_back(oracle_for(run, u));  // fail before sampling
    for (std::size_t i = 0; i < run.subsets.size(); ++i) {
        const auto& u = run.subsets[i];
        const auto e = estimate_subset(run, f, u);
        ReportRow r{u.to_string(), family, c.p, run.estimator, c.n, e.seed, e.value, e.std_error, {}, {}};
        if (c.command == Command::compare) {
            r.oracle = oracles[i];
            r.z = z_score(e.value, oracles[i], e.std_error);
            if (!(std::abs(*r.z) <= c.z_max)) out.exit_code = 3;
        }
        out.report.rows.push_back(std::move(r));
    }
    return out;
}

inline RunOutcome execute(const PreparedRun& run) {
    if (run.cfg.command == Command::oracle) return execute(run, BlackBoxFunction());
    return execute(run, run.spec.make_function(run.cfg.timeout));
}

}  // namespace hosi::cli
