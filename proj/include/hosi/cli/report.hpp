#pragma once

// Run reports as CSV or JSON.  Both carry the full run configuration and
// format every float as its shortest round-trip decimal, so the two files
// hold identical numbers and reruns are byte-identical.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hosi/cli/external_evaluator.hpp"

namespace hosi::cli {

struct ReportRow {
    std::string subset;
    std::string family;
    int p = 2;
    std::string estimator;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
    double std_error = 0.0;
    std::optional<double> oracle;
    std::optional<double> z;
};

struct Report {
    std::vector<std::pair<std::string, std::string>> config;  // in emission order
    std::vector<ReportRow> rows;
    std::vector<std::string> notes;

    bool has_oracle() const {
        for (const auto& r : rows)
            if (r.oracle) return true;
        return false;
    }
};

/// Shortest round-trip decimal; non-finite values print as inf, -inf, nan.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return shortest_decimal(v);
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const Report& rep) {
    std::ostringstream os;
    for (const auto& [k, v] : rep.config) os << "# " << k << '=' << v << '\n';
    for (const auto& note : rep.notes) os << "# note: " << note << '\n';
    const bool oracle = rep.has_oracle();
    os << "subset,family,p,estimator,n,seed,value,std_error" << (oracle ? ",oracle,z" : "") << '\n';
    for (const auto& r : rep.rows) {
        os << csv_quote(r.subset) << ',' << r.family << ',' << r.p << ',' << r.estimator << ',' << r.n << ',' << r.seed
           << ',' << format_number(r.value) << ',' << format_number(r.std_error);
        if (oracle)
            os << ',' << (r.oracle ? format_number(*r.oracle) : "") << ',' << (r.z ? format_number(*r.z) : "");
        os << '\n';
    }
    return os.str();
}

namespace detail {

/// JSON number, or a string for non-finite values (JSON has no inf/nan).
inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

}  // namespace detail

inline std::string to_json(const Report& rep) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rep.config) cfg[k] = v;
    j["config"] = cfg;
    j["notes"] = rep.notes;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json o;
        o["subset"] = r.subset;
        o["family"] = r.family;
        o["p"] = r.p;
        o["estimator"] = r.estimator;
        o["n"] = r.n;
        o["seed"] = r.seed;
        o["value"] = detail::json_number(r.value);
        o["std_error"] = detail::json_number(r.std_error);
        if (r.oracle) o["oracle"] = detail::json_number(*r.oracle);
        if (r.z) o["z"] = detail::json_number(*r.z);
        rows.push_back(std::move(o));
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

inline std::string render(const Report& rep, const std::string& format) {
    if (format == "csv") return to_csv(rep);
    if (format == "json") return to_json(rep);
    throw Error("unknown output format '" + format + "' (csv, json)");
}

}  // namespace hosi::cli
