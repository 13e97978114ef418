// burnside_count: approximate orbit counting from the command line.
//
//   burnside_count unitriangular --n 8 --q 2 --burnin 10000 --samples 10000
//   burnside_count multiset --n 20 --k 2 3 4 --reps 5
//   burnside_count oracle --n 4 --q 2 --check theorem2
//   burnside_count histogram --n 6 --q 2 --samples 100000
//
// Exit codes: 0 success, 2 flag error, 3 failed level, 4 guard refusal.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "burnside/estimator.hpp"
#include "burnside/oracle.hpp"
#include "burnside/pattern.hpp"
#include "burnside/rng.hpp"
#include "burnside/run_record.hpp"

namespace {

using namespace burnside;

constexpr int kExitFlagError = 2;
constexpr int kExitFailedLevel = 3;
constexpr int kExitGuard = 4;

struct Options {
    int n = 0;
    std::uint32_t q = 2;
    std::vector<int> k{2};
    std::uint64_t burn_in = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
    int reps = 1;
    unsigned workers = 1;
    std::uint64_t guard = kEnumerationGuard;
    std::string check = "count";
    int level = 0;
    std::string out_json;
    std::string out_csv;
};

/// Output file opened on demand; empty path means no file.
class OptionalFile {
  public:
    explicit OptionalFile(const std::string& path) {
        if (path.empty()) return;
        out_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*out_) throw std::runtime_error("cannot open " + path + " for writing");
    }
    bool open() const noexcept { return out_ != nullptr; }
    void line(const std::string& s) {
        if (out_) *out_ << s << '\n';
    }

  private:
    std::unique_ptr<std::ofstream> out_;
};

void report_failures(const LogCountEstimate& e) {
    for (const auto& f : e.failures)
        std::cerr << "error: level " << f.level << " failed: every sample had weight zero (zero_fraction "
                  << format_double(f.zero_fraction) << ")\n";
}

int run_unitriangular(const Options& o) {
    const PrimeField field(o.q);  // validates q
    OptionalFile json_out(o.out_json);
    OptionalFile csv_out(o.out_csv);
    csv_out.line(kUnitriangularCsvHeader);
    int status = 0;
    for (int rep = 0; rep < o.reps; ++rep) {
        ChainConfig cfg;
        cfg.burn_in = o.burn_in;
        cfg.samples = o.samples;
        cfg.master_seed = o.seed + static_cast<std::uint64_t>(rep);
        cfg.worker_count = o.workers;
        RunRecord rec;
        rec.command = "unitriangular";
        rec.rep = rep;
        rec.estimate = estimate_count(UnitriangularProblem{o.n, field.order()}, cfg);
        rec.wall_clock_seconds = rec.estimate.elapsed_seconds;
        json_out.line(to_json(rec).dump());
        csv_out.line(unitriangular_csv_row(rec.estimate));
        if (!rec.estimate.valid()) {
            report_failures(rec.estimate);
            status = kExitFailedLevel;
            continue;
        }
        std::cout << "n=" << o.n << " q=" << o.q << " seed=" << cfg.master_seed
                  << " log_q k=" << format_double(*rec.estimate.log_count)
                  << " se=" << format_double(rec.estimate.aggregate_std_error) << '\n';
    }
    return status;
}

int run_multiset(const Options& o) {
    OptionalFile json_out(o.out_json);
    OptionalFile csv_out(o.out_csv);
    csv_out.line(kMultisetCsvHeader);
    int status = 0;
    for (int k : o.k) {
        if (k < 1) throw std::invalid_argument("--k values must be >= 1");
        const double log_true = log_multiset_count(o.n, k);
        for (int rep = 0; rep < o.reps; ++rep) {
            ChainConfig cfg;
            cfg.burn_in = o.burn_in;
            cfg.samples = o.samples;
            cfg.master_seed = o.seed + static_cast<std::uint64_t>(rep);
            cfg.worker_count = o.workers;
            RunRecord rec;
            rec.command = "multiset";
            rec.rep = rep;
            rec.estimate = estimate_count(MultisetProblem{o.n, k}, cfg);
            rec.log_true = log_true;
            rec.wall_clock_seconds = rec.estimate.elapsed_seconds;
            json_out.line(to_json(rec).dump());
            csv_out.line(multiset_csv_row(rec.estimate, log_true, rep));
            if (!rec.estimate.valid()) {
                report_failures(rec.estimate);
                status = kExitFailedLevel;
                continue;
            }
            std::cout << "n=" << o.n << " k=" << k << " rep=" << rep << " log_true=" << format_double(log_true)
                      << " log_est=" << format_double(*rec.estimate.log_count) << '\n';
        }
    }
    return status;
}

std::string rational_text(const Rational& r) { return r.str(); }

int run_oracle(const Options& o) {
    const PrimeField field(o.q);
    OptionalFile json_out(o.out_json);
    OptionalFile csv_out(o.out_csv);
    json doc{{"schema_version", kSchemaVersion}, {"command", "oracle"}, {"check", o.check}, {"n", o.n}, {"q", o.q}};
    bool pass = true;
    if (o.check == "count") {
        const ExactCount c = exact_count_conjugacy(ClosedPositionSet::full(o.n), field.order(), o.guard);
        std::cout << "k(U_" << o.n << "(F_" << o.q << ")) = " << c.k << '\n';
        json profile = json::object();
        csv_out.line("exponent,classes");
        for (const auto& [e, cnt] : c.class_size_profile) {
            std::cout << "  classes of size " << o.q << "^" << e << ": " << cnt << '\n';
            profile[std::to_string(e)] = cnt;
            csv_out.line(std::to_string(e) + "," + std::to_string(cnt));
        }
        doc["k"] = c.k;
        doc["class_size_profile"] = profile;
        doc["orbit_stabilizer_consistent"] = c.orbit_stabilizer_consistent;
    } else if (o.check == "theorem2") {
        const Theorem2Report rep = verify_theorem2(o.n, field.order(), o.guard);
        csv_out.line("m,k_previous,k_current,ratio,within_bounds");
        json rows = json::array();
        for (const auto& r : rep.rows) {
            std::cout << "m=" << r.m << " k(H_m-1)=" << r.k_previous << " k(H_m)=" << r.k_current
                      << " ratio=" << rational_text(r.ratio) << (r.within_bounds ? " ok" : " VIOLATION") << '\n';
            csv_out.line(std::to_string(r.m) + "," + std::to_string(r.k_previous) + "," + std::to_string(r.k_current) +
                         "," + format_double(static_cast<double>(r.ratio)) + "," + (r.within_bounds ? "1" : "0"));
            rows.push_back({{"m", r.m},
                            {"k_previous", r.k_previous},
                            {"k_current", r.k_current},
                            {"ratio", rational_text(r.ratio)},
                            {"within_bounds", r.within_bounds}});
        }
        pass = rep.all_pass;
        std::cout << (pass ? "all levels within [1/q, q^3]" : "bound violated") << '\n';
        doc["rows"] = rows;
        doc["all_pass"] = pass;
    } else if (o.check == "corollary41") {
        const Corollary41Report rep = verify_corollary41(o.n, field.order(), o.level, o.guard);
        csv_out.line("m,mean,variance,std,bound,holds,unbiased");
        json rows = json::array();
        for (const auto& l : rep.levels) {
            const double mean = static_cast<double>(l.mean);
            const double sd = std::sqrt(static_cast<double>(l.variance));
            const double bound = static_cast<double>(o.q) * o.q * mean;
            const bool holds = l.corollary_holds(o.q);
            std::cout << "m=" << l.m << " mean=" << rational_text(l.mean) << " var=" << rational_text(l.variance)
                      << " std=" << format_double(sd) << " bound=" << format_double(bound)
                      << (holds ? " ok" : " VIOLATION") << (l.unbiased() ? "" : " BIASED") << '\n';
            csv_out.line(std::to_string(l.m) + "," + format_double(mean) + "," +
                         format_double(static_cast<double>(l.variance)) + "," + format_double(sd) + "," +
                         format_double(bound) + "," + (holds ? "1" : "0") + "," + (l.unbiased() ? "1" : "0"));
            rows.push_back({{"m", l.m},
                            {"mean", rational_text(l.mean)},
                            {"variance", rational_text(l.variance)},
                            {"exact_ratio", rational_text(l.exact_ratio)},
                            {"holds", holds},
                            {"unbiased", l.unbiased()}});
        }
        pass = rep.all_pass && rep.all_unbiased;
        doc["rows"] = rows;
        doc["all_pass"] = pass;
    } else {
        throw CLI::ValidationError("--check", "must be one of count, theorem2, corollary41");
    }
    json_out.line(doc.dump());
    return pass ? 0 : 1;
}

int run_histogram(const Options& o) {
    const PrimeField field(o.q);
    RngStream rng(o.seed);
    const auto hist = class_size_histogram(o.n, field.order(), o.samples, rng, o.burn_in);
    OptionalFile csv_out(o.out_csv);
    std::ostream& out = std::cout;
    auto emit = [&](const std::string& s) {
        if (csv_out.open())
            csv_out.line(s);
        else
            out << s << '\n';
    };
    emit(kHistogramCsvHeader);
    for (const auto& [e, c] : hist) emit(std::to_string(e) + "," + std::to_string(c));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate orbit counting with the Burnside process and importance sampling"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Master seed (rep r uses seed + r)")->capture_default_str();
        sub->add_option("--reps", o.reps, "Independent replications")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--workers", o.workers, "Worker threads over levels")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--out-json", o.out_json, "JSON Lines output, one document per rep");
        sub->add_option("--out-csv", o.out_csv, "CSV output");
    };

    auto* uni = app.add_subcommand("unitriangular", "Estimate log_q k(U_n(F_q))");
    uni->add_option("--n", o.n, "Matrix dimension")->required()->check(CLI::PositiveNumber);
    uni->add_option("--q", o.q, "Prime field order")->capture_default_str();
    uni->add_option("--burnin", o.burn_in, "Burn-in steps per level")->default_val(100000);
    uni->add_option("--samples", o.samples, "Samples per level")->default_val(100000)->check(CLI::PositiveNumber);
    uni->add_option("--guard", o.guard, "Enumeration guard (unused by estimation)")->capture_default_str();
    add_common(uni);

    auto* ms = app.add_subcommand("multiset", "Estimate ln C(n+k-1, k-1) for S_n on C_k^n");
    ms->add_option("--n", o.n, "Tuple length")->required()->check(CLI::PositiveNumber);
    ms->add_option("--k", o.k, "Alphabet size(s)")->capture_default_str();
    ms->add_option("--burnin", o.burn_in, "Burn-in steps per level")->default_val(20);
    ms->add_option("--samples", o.samples, "Samples per level")->default_val(10000)->check(CLI::PositiveNumber);
    add_common(ms);

    auto* orc = app.add_subcommand("oracle", "Exact enumeration checks");
    orc->add_option("--n", o.n, "Matrix dimension")->required()->check(CLI::PositiveNumber);
    orc->add_option("--q", o.q, "Prime field order")->capture_default_str();
    orc->add_option("--check", o.check, "count | theorem2 | corollary41")
        ->check(CLI::IsMember({"count", "theorem2", "corollary41"}))
        ->capture_default_str();
    orc->add_option("--m", o.level, "Single level for corollary41 (0 = all)")->capture_default_str();
    orc->add_option("--guard", o.guard, "Maximum group order to enumerate")->capture_default_str();
    orc->add_option("--out-json", o.out_json, "JSON output");
    orc->add_option("--out-csv", o.out_csv, "CSV output");

    auto* hist = app.add_subcommand("histogram", "Class-size histogram from the U_n(F_q) chain");
    hist->add_option("--n", o.n, "Matrix dimension")->required()->check(CLI::PositiveNumber);
    hist->add_option("--q", o.q, "Prime field order")->capture_default_str();
    hist->add_option("--samples", o.samples, "Recorded chain steps")->default_val(100000)->check(CLI::PositiveNumber);
    hist->add_option("--burnin", o.burn_in, "Discarded steps")->default_val(0);
    hist->add_option("--seed", o.seed, "Seed")->capture_default_str();
    hist->add_option("--out-csv", o.out_csv, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitFlagError;
    }

    try {
        if (*uni) return run_unitriangular(o);
        if (*ms) return run_multiset(o);
        if (*orc) return run_oracle(o);
        if (*hist) return run_histogram(o);
    } catch (const GuardExceeded& e) {
        std::cerr << "refused: " << e.what() << " (raise --guard to override)\n";
        return kExitGuard;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFlagError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFlagError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitFlagError;
}
