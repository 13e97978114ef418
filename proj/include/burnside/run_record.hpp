#pragma once

// JSON and CSV forms of estimator output. JSON is the full record; CSV rows
// are the tabular interchange read by the plotting scripts.
//
// Worker count is not recorded: it cannot change any estimate, and leaving
// it out keeps records from runs with different thread counts identical.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "burnside/estimator.hpp"
#include "burnside/oracle.hpp"

namespace burnside {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

using json = nlohmann::json;

inline json to_json(const RatioEstimate& r) {
    json j{{"level", r.level},
           {"value", r.value},
           {"std_error", r.std_error},
           {"std_error_reliable", r.std_error_reliable},
           {"zero_fraction", r.zero_fraction},
           {"samples_used", r.samples_used}};
    if (!r.exponent_counts.empty()) {
        json counts = json::object();
        for (const auto& [t, c] : r.exponent_counts) counts[std::to_string(t)] = c;
        j["exponent_counts"] = counts;
    }
    return j;
}

inline RatioEstimate ratio_from_json(const json& j) {
    RatioEstimate r;
    r.level = j.at("level").get<int>();
    r.value = j.at("value").get<double>();
    r.std_error = j.at("std_error").get<double>();
    r.std_error_reliable = j.at("std_error_reliable").get<bool>();
    r.zero_fraction = j.at("zero_fraction").get<double>();
    r.samples_used = j.at("samples_used").get<std::uint64_t>();
    if (j.contains("exponent_counts"))
        for (const auto& [t, c] : j.at("exponent_counts").items()) r.exponent_counts[std::stoi(t)] = c.get<std::uint64_t>();
    return r;
}

inline json to_json(const LogCountEstimate& e) {
    json levels = json::array();
    for (const auto& r : e.per_level) levels.push_back(to_json(r));
    json failures = json::array();
    for (const auto& f : e.failures) failures.push_back({{"level", f.level}, {"zero_fraction", f.zero_fraction}});
    json j{{"problem", e.problem},
           {"n", e.n},
           {"log_base", e.log_base},
           {"base_log_count", e.base_log_count},
           {"config",
            {{"burn_in", e.config.burn_in},
             {"samples", e.config.samples},
             {"master_seed", e.config.master_seed},
             {"level_schedule", e.config.level_schedule}}},
           {"per_level", levels},
           {"failures", failures},
           {"valid", e.valid()},
           {"log_count", e.log_count ? json(*e.log_count) : json(nullptr)},
           {"aggregate_std_error", e.aggregate_std_error},
           {"aggregate_std_error_reliable", e.aggregate_std_error_reliable},
           {"aggregate_std_error_note", "first-order propagation assuming independent levels; approximate"},
           {"elapsed_seconds", e.elapsed_seconds}};
    if (e.problem == "unitriangular") j["q"] = e.q;
    if (e.problem == "multiset") j["k"] = e.k;
    return j;
}

inline LogCountEstimate estimate_from_json(const json& j) {
    LogCountEstimate e;
    e.problem = j.at("problem").get<std::string>();
    e.n = j.at("n").get<int>();
    if (j.contains("q")) e.q = j.at("q").get<std::uint32_t>();
    if (j.contains("k")) e.k = j.at("k").get<int>();
    e.log_base = j.at("log_base").get<double>();
    e.base_log_count = j.at("base_log_count").get<double>();
    const json& c = j.at("config");
    e.config.burn_in = c.at("burn_in").get<std::uint64_t>();
    e.config.samples = c.at("samples").get<std::uint64_t>();
    e.config.master_seed = c.at("master_seed").get<std::uint64_t>();
    e.config.level_schedule = c.at("level_schedule").get<std::vector<int>>();
    for (const auto& r : j.at("per_level")) e.per_level.push_back(ratio_from_json(r));
    for (const auto& f : j.at("failures")) e.failures.push_back({f.at("level").get<int>(), f.at("zero_fraction").get<double>()});
    if (!j.at("log_count").is_null()) e.log_count = j.at("log_count").get<double>();
    e.aggregate_std_error = j.at("aggregate_std_error").get<double>();
    e.aggregate_std_error_reliable = j.at("aggregate_std_error_reliable").get<bool>();
    e.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    return e;
}

/// One estimation run as written by the CLI.
struct RunRecord {
    std::string command;  // subcommand name
    int rep = 0;
    LogCountEstimate estimate;
    std::optional<double> log_true;  // exact target when known
    double wall_clock_seconds = 0.0;
};

inline json to_json(const RunRecord& r) {
    json j{{"schema_version", kSchemaVersion},
           {"artifact_version", kArtifactVersion},
           {"command", r.command},
           {"rep", r.rep},
           {"estimate", to_json(r.estimate)},
           {"log_true", r.log_true ? json(*r.log_true) : json(nullptr)},
           {"elapsed_seconds", r.wall_clock_seconds}};
    if (r.estimate.problem == "unitriangular") j["higman"] = [&] {
            const HigmanReport h = verify_higman_band(r.estimate);
            return json{{"applicable", h.applicable},
                        {"ratio", h.ratio},
                        {"lower_reference", h.lower_reference},
                        {"upper_reference", h.upper_reference},
                        {"refined_reference", h.refined_reference},
                        {"within_band", h.within_band}};
        }();
    return j;
}

inline RunRecord run_record_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::runtime_error("unsupported schema version");
    RunRecord r;
    r.command = j.at("command").get<std::string>();
    r.rep = j.at("rep").get<int>();
    r.estimate = estimate_from_json(j.at("estimate"));
    if (!j.at("log_true").is_null()) r.log_true = j.at("log_true").get<double>();
    r.wall_clock_seconds = j.at("elapsed_seconds").get<double>();
    return r;
}

/// Copy of j with every "elapsed_seconds" member removed, at any depth.
inline json without_elapsed(json j) {
    if (j.is_object()) {
        j.erase("elapsed_seconds");
        for (auto& [key, value] : j.items()) value = without_elapsed(value);
    } else if (j.is_array()) {
        for (auto& value : j) value = without_elapsed(value);
    }
    return j;
}

/// Shortest decimal text that reads back as the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

inline constexpr const char* kUnitriangularCsvHeader = "n,q,seed,logq_count,stderr,elapsed";
inline constexpr const char* kMultisetCsvHeader = "n,k,log_true,log_est,rep";
inline constexpr const char* kHistogramCsvHeader = "exponent,count";

inline std::string unitriangular_csv_row(const LogCountEstimate& e) {
    std::ostringstream os;
    os << e.n << ',' << e.q << ',' << e.config.master_seed << ','
       << (e.log_count ? format_double(*e.log_count) : std::string("nan")) << ','
       << format_double(e.aggregate_std_error) << ',' << format_double(e.elapsed_seconds);
    return os.str();
}

inline std::string multiset_csv_row(const LogCountEstimate& e, double log_true, int rep) {
    std::ostringstream os;
    os << e.n << ',' << e.k << ',' << format_double(log_true) << ','
       << (e.log_count ? format_double(*e.log_count) : std::string("nan")) << ',' << rep;
    return os.str();
}

}  // namespace burnside
