#pragma once

// Command-line front end: constants, densities, samples and validation
// suites, written as JSON lines or CSV. Exit codes: 0 success, 1 failed
// validation, 2 usage or domain error.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatsect/densities.hpp"
#include "flatsect/errors.hpp"
#include "flatsect/parallel.hpp"
#include "flatsect/specfun.hpp"
#include "flatsect/validation.hpp"

namespace flatsect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kSchemaVersion = 1;

enum class Command { Constants, Density, Sample, Validate };
enum class FamilyKind { Ball, Tangent, Fixed };
enum class OutputFormat { Json, Csv };

struct RunConfig {
    Command command = Command::Constants;
    std::optional<CaseTriple> triple;
    FamilyKind family = FamilyKind::Ball;
    double h = 1.0;
    std::int64_t n_samples = 100000;
    std::uint64_t seed = 42;
    int chunks = 16;
    double alpha = 0.01;
    OutputFormat format = OutputFormat::Json;
    std::vector<double> grid;
    std::string out_path;
    bool tamper = false;
};

/// Shortest-safe round-trip text for a double: 17 significant digits.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string family_name(FamilyKind f) {
    switch (f) {
        case FamilyKind::Ball: return "ball";
        case FamilyKind::Tangent: return "tangent";
        case FamilyKind::Fixed: return "fixed";
    }
    return "ball";
}

inline std::string triple_tag(const CaseTriple& c) {
    return std::to_string(c.n()) + "," + std::to_string(c.q()) + "," + std::to_string(c.gamma());
}

using Json = nlohmann::ordered_json;

/// JSON number, or null where JSON has no representation (infinities, NaN).
inline Json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Rows of named cells written either as JSON lines or as CSV with a header.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    struct Cell {
        enum class Kind { Number, Integer, Text, Boolean, Null } kind = Kind::Null;
        double number = 0.0;
        std::int64_t integer = 0;
        std::string text;
        bool boolean = false;
    };

    static Cell num(double x) { return {Cell::Kind::Number, x, 0, {}, false}; }
    static Cell integer(std::int64_t x) { return {Cell::Kind::Integer, 0.0, x, {}, false}; }
    static Cell text(std::string s) { return {Cell::Kind::Text, 0.0, 0, std::move(s), false}; }
    static Cell boolean(bool b) { return {Cell::Kind::Boolean, 0.0, 0, {}, b}; }
    static Cell null() { return {}; }

    void add(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw std::logic_error("Table: row width mismatch");
        rows_.push_back(std::move(row));
    }

    void write(std::ostream& os, OutputFormat format) const {
        if (format == OutputFormat::Csv) {
            for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
            os << '\n';
            for (const auto& row : rows_) {
                for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv(row[i]);
                os << '\n';
            }
            return;
        }
        for (const auto& row : rows_) {
            Json j;
            j["schema_version"] = kSchemaVersion;
            for (std::size_t i = 0; i < row.size(); ++i) j[columns_[i]] = json(row[i]);
            os << j.dump() << '\n';
        }
    }

private:
    static std::string csv(const Cell& c) {
        switch (c.kind) {
            case Cell::Kind::Number: return format_double(c.number);
            case Cell::Kind::Integer: return std::to_string(c.integer);
            case Cell::Kind::Boolean: return c.boolean ? "true" : "false";
            case Cell::Kind::Null: return "";
            case Cell::Kind::Text: {
                if (c.text.find_first_of(",\"\n") == std::string::npos) return c.text;
                std::string q = "\"";
                for (char ch : c.text) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                return q + "\"";
            }
        }
        return "";
    }

    static Json json(const Cell& c) {
        switch (c.kind) {
            case Cell::Kind::Number: return json_number(c.number);
            case Cell::Kind::Integer: return c.integer;
            case Cell::Kind::Boolean: return c.boolean;
            case Cell::Kind::Text: return c.text;
            case Cell::Kind::Null: return nullptr;
        }
        return nullptr;
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// ---------------------------------------------------------------------------
// constants / density / sample
// ---------------------------------------------------------------------------

inline Table cmd_constants(const RunConfig& cfg) {
    const CaseTriple& c = *cfg.triple;
    Table t({"quantity", "n", "q", "gamma", "value"});
    auto row = [&](const std::string& name, double v) {
        t.add({Table::text(name), Table::integer(c.n()), Table::integer(c.q()),
               Table::integer(c.gamma()), Table::num(v)});
    };
    row("omega_n", omega(c.n()));
    row("kappa_n", kappa(c.n()));
    row("D", d_constant(c));
    row("D_tilde", d_tilde_constant(c));
    row("hit_probability", hit_probability(c));
    row("hit_probability_asymptotic", hit_probability_asymptotic(c));
    const auto ball = RadialDensity::ball(c).moment_window();
    const auto tangent = RadialDensity::tangent(c).moment_window();
    row("ball_moment_window_lo", ball.lo);
    row("ball_moment_window_hi", ball.hi);
    row("tangent_moment_window_lo", tangent.lo);
    row("tangent_moment_window_hi", tangent.hi);
    return t;
}

inline RadialDensity law_for(const RunConfig& cfg) {
    const CaseTriple& c = *cfg.triple;
    if (cfg.family == FamilyKind::Tangent) return RadialDensity::tangent(c);
    return RadialDensity::ball(c, cfg.h);
}

inline Table cmd_density(const RunConfig& cfg) {
    if (cfg.grid.empty()) throw DomainError("density: --grid must list at least one point");
    const RadialDensity law = law_for(cfg);
    Table t({"family", "x", "density", "cdf"});
    for (double x : cfg.grid) {
        if (!(x >= 0.0)) throw DomainError("density: grid points must be >= 0");
        t.add({Table::text(family_name(cfg.family)), Table::num(x), Table::num(law.density(x)),
               Table::num(law.cdf(x))});
    }
    return t;
}

inline Family family_for(const RunConfig& cfg) {
    const CaseTriple& c = *cfg.triple;
    switch (cfg.family) {
        case FamilyKind::Tangent: return Tangent{};
        case FamilyKind::Fixed: return FixedSubspace{LinearSubspace::coordinate(c.n(), c.q()), cfg.h};
        case FamilyKind::Ball: break;
    }
    return BallRestricted{cfg.h};
}

inline Parallelism parallelism_for(const RunConfig& cfg) {
    return default_parallelism(cfg.chunks);
}

inline Table cmd_sample(const RunConfig& cfg) {
    const DistanceSample s = sample_intersection_distances(
        *cfg.triple, family_for(cfg), cfg.n_samples, RandomStream(cfg.seed), parallelism_for(cfg));
    Table t({"index", "distance"});
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        t.add({Table::integer(static_cast<std::int64_t>(i)), Table::num(s.values[i])});
    }
    return t;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct CheckRecord {
    std::string check_id;
    std::string reference;
    double estimate = 0.0;
    double target = 0.0;
    std::optional<double> std_error;
    std::optional<GoodnessOfFitReport> ks;
    bool pass = false;
    std::uint64_t seed = 0;
    std::int64_t n_samples = 0;
};

/// Stream identifier of a check, derived from its id so that adding or
/// removing checks leaves the draws of the others unchanged.
inline std::uint64_t stream_for(std::string_view check_id) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : check_id) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Suite {
public:
    explicit Suite(const RunConfig& cfg) : cfg_(cfg), par_(parallelism_for(cfg)) {}

    RandomStream stream(const std::string& id) const { return RandomStream(cfg_.seed, stream_for(id)); }
    const Parallelism& parallelism() const { return par_; }
    const RunConfig& config() const { return cfg_; }

    void add_mc(const std::string& id, const std::string& ref, const MCEstimate& e, double target) {
        if (cfg_.tamper) target += 1.0;
        CheckRecord r{id, ref, e.value, target, e.std_error, std::nullopt,
                      within_three_sigma(e, target), cfg_.seed, e.n_samples};
        records_.push_back(std::move(r));
    }

    void add_ks(const std::string& id, const std::string& ref, const GoodnessOfFitReport& g) {
        CheckRecord r{id,     ref,    g.ks_statistic, g.critical_value, std::nullopt,
                      g,      g.pass, cfg_.seed,      g.n_samples};
        records_.push_back(std::move(r));
    }

    void add_exact(const std::string& id, const std::string& ref, double value, double target,
                   bool pass) {
        records_.push_back(
            {id, ref, value, target, std::nullopt, std::nullopt, pass, cfg_.seed, 0});
    }

    const std::vector<CheckRecord>& records() const { return records_; }

    bool all_pass() const {
        return std::all_of(records_.begin(), records_.end(), [](const auto& r) { return r.pass; });
    }

private:
    RunConfig cfg_;
    Parallelism par_;
    std::vector<CheckRecord> records_;
};

inline void suite_hit_probability(Suite& s, const CaseTriple& c) {
    const std::string id = "hit_probability/" + triple_tag(c);
    const MCEstimate e = estimate_hit_probability(c, s.config().n_samples, s.stream(id), s.parallelism());
    s.add_mc(id, "hit probability of the intersection flat", e, hit_probability(c));
}

inline void suite_distance_law(Suite& s, const CaseTriple& c, const Family& f, const std::string& tag) {
    const std::string id = "distance_law/" + tag + "/" + triple_tag(c);
    s.add_ks(id, "radial law of d(o, E cap L)",
             validate_distance_law(c, f, s.config().n_samples, s.stream(id), s.config().alpha,
                                   s.parallelism()));
}

inline void suite_tangent_beta(Suite& s, const CaseTriple& c) {
    const std::string id = "tangent_beta/" + triple_tag(c);
    s.add_ks(id, "beta law of d^-2 for tangent flats",
             validate_tangent_beta(c, s.config().n_samples, s.stream(id), s.config().alpha,
                                   s.parallelism()));
}

inline void suite_moment(Suite& s, const CaseTriple& c, const Family& f, const std::string& tag,
                         double alpha) {
    const RadialDensity law = family_law(c, f);
    if (!moment_estimable(law, alpha)) return;
    const std::string id = "moment/" + tag + "/" + triple_tag(c) + "/alpha=" + format_double(alpha);
    s.add_mc(id, "moment of d(o, E cap L)",
             estimate_moment(c, f, alpha, s.config().n_samples, s.stream(id), s.parallelism()),
             law.moment(alpha));
}

inline void suite_fixed_subspace(Suite& s, const CaseTriple& c, double h) {
    const std::string id = "fixed_subspace/" + triple_tag(c);
    const auto r = validate_fixed_subspace_theorem(c, LinearSubspace::coordinate(c.n(), c.q()),
                                                   WeightProfile::ball_indicator(h),
                                                   s.config().n_samples, s.stream(id),
                                                   s.config().alpha, s.parallelism());
    s.add_ks(id, "deterministic linear subspace, same radial law", r.gof);
    s.add_exact(id + "/containment", "intersection lies in L0", r.max_containment_residual, 1e-8,
                r.max_containment_residual <= 1e-8);
}

inline void suite_weighted_measure(Suite& s, const CaseTriple& c, double h) {
    const std::string id = "transformation_formula/" + triple_tag(c) + "/h=" + format_double(h);
    const std::vector<double> grid{0.25, 1.0, 2.0, 5.0};
    const auto checks = validate_theorem_general(c, WeightProfile::ball_indicator(h), grid,
                                                 s.config().n_samples, s.stream(id), s.parallelism());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.add_mc(id + "/delta=" + format_double(grid[i]), "weighted intersection-distance measure",
                 checks[i].lhs, checks[i].rhs);
    }
}

inline void suite_axis_moment(Suite& s) {
    const std::string id = "axis_moment/4,1,2/alpha=2";
    RandomStream setup = s.stream(id + "/setup");
    const Vector u = sample_unit_sphere(4, setup);
    const LinearSubspace m = sample_grassmannian(4, 1, setup);
    const PairedCheck r = validate_lemma_axis_moment(4, 1, 2, 2.0, u, m, s.config().n_samples,
                                                     s.stream(id), s.parallelism());
    s.add_mc(id, "subspace-determinant moment over subspaces containing an axis", r.lhs, r.rhs);
}

inline void suite_multiple(Suite& s, const IntersectionPattern& pat, const std::string& tag) {
    const std::string id = "multiple_intersections/" + tag;
    const auto r = validate_multiple_intersections(pat, s.config().n_samples, s.stream(id),
                                                   s.config().alpha, s.parallelism());
    s.add_ks(id + "/uniformity", "intersection of uniform subspaces is uniform", r.uniformity);
    s.add_mc(id + "/crofton", "Crofton integral of the intersection volume", r.crofton.lhs,
             r.crofton.rhs);
}

inline const std::vector<CaseTriple>& default_triples() {
    static const std::vector<CaseTriple> triples{{2, 1, 0}, {3, 2, 1}, {3, 1, 0},
                                                 {8, 5, 2}, {9, 5, 3}, {9, 6, 1}};
    return triples;
}

inline void run_default_suite(Suite& s) {
    for (const auto& c : default_triples()) {
        suite_hit_probability(s, c);
        suite_distance_law(s, c, BallRestricted{1.0}, "ball");
    }
    for (const auto& c : {CaseTriple(2, 1, 0), CaseTriple(3, 1, 0), CaseTriple(3, 2, 1),
                          CaseTriple(9, 5, 3)}) {
        suite_tangent_beta(s, c);
    }
    suite_moment(s, CaseTriple(8, 5, 2), BallRestricted{1.0}, "ball", 1.0);
    suite_moment(s, CaseTriple(9, 5, 3), BallRestricted{1.0}, "ball", 1.0);
    suite_fixed_subspace(s, CaseTriple(2, 1, 0), 1.0);
    suite_fixed_subspace(s, CaseTriple(3, 2, 1), 1.0);
    suite_weighted_measure(s, CaseTriple(3, 2, 1), 1.0);
    suite_axis_moment(s);
    suite_multiple(s, {3, {2, 2}, {2}}, "n=3,q=2+2,p=2");
    suite_multiple(s, {3, {2}, {2, 2}}, "n=3,q=2,p=2+2");
}

inline void run_triple_suite(Suite& s) {
    const RunConfig& cfg = s.config();
    const CaseTriple& c = *cfg.triple;
    const Family f = family_for(cfg);
    const std::string tag = family_name(cfg.family);
    switch (cfg.family) {
        case FamilyKind::Ball:
            suite_hit_probability(s, c);
            suite_distance_law(s, c, f, tag);
            suite_moment(s, c, f, tag, 1.0);
            suite_weighted_measure(s, c, cfg.h);
            break;
        case FamilyKind::Tangent:
            suite_tangent_beta(s, c);
            suite_distance_law(s, c, f, tag);
            suite_moment(s, c, f, tag, 1.0);
            break;
        case FamilyKind::Fixed:
            suite_fixed_subspace(s, c, cfg.h);
            break;
    }
}

inline Table records_table(const std::vector<CheckRecord>& records) {
    Table t({"check_id", "reference", "estimate", "target", "std_error", "ks_statistic",
             "critical_value", "n_samples", "pass", "seed"});
    for (const auto& r : records) {
        t.add({Table::text(r.check_id), Table::text(r.reference), Table::num(r.estimate),
               Table::num(r.target), r.std_error ? Table::num(*r.std_error) : Table::null(),
               r.ks ? Table::num(r.ks->ks_statistic) : Table::null(),
               r.ks ? Table::num(r.ks->critical_value) : Table::null(),
               r.n_samples > 0 ? Table::integer(r.n_samples) : Table::null(),
               Table::boolean(r.pass),
               Table::integer(static_cast<std::int64_t>(r.seed))});
    }
    return t;
}

inline Suite cmd_validate(const RunConfig& cfg) {
    Suite s(cfg);
    if (cfg.triple) run_triple_suite(s); else run_default_suite(s);
    return s;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses argv, runs the command and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distances of random flat intersections: constants, densities and Monte Carlo checks",
                 "flatsect"};
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(1);

    RunConfig cfg;
    std::optional<int> n, q, gamma;
    std::string family = "ball", format = "json";
    std::uint64_t seed = 42;

    auto add_common = [&](CLI::App* sub, bool needs_triple) {
        auto* on = sub->add_option("--n", n, "ambient dimension");
        auto* oq = sub->add_option("--q", q, "dimension of the linear subspace L");
        auto* og = sub->add_option("--gamma", gamma, "dimension of the intersection E cap L");
        if (needs_triple) {
            on->required();
            oq->required();
            og->required();
        }
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", cfg.out_path, "write output to this file instead of stdout");
    };
    auto add_family = [&](CLI::App* sub) {
        sub->add_option("--family", family, "law of the random flat E")
            ->check(CLI::IsMember({"ball", "tangent", "fixed"}));
        sub->add_option("--h", cfg.h, "radius of the ball E must hit")->check(CLI::PositiveNumber);
    };
    auto add_sampling = [&](CLI::App* sub) {
        sub->add_option("--samples", cfg.n_samples, "Monte Carlo sample size")
            ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--chunks", cfg.chunks, "number of Monte Carlo chunks (fixes the stream layout)")
            ->check(CLI::Range(1, 1 << 16));
    };

    auto* constants = app.add_subcommand("constants", "closed-form constants of a triple");
    add_common(constants, true);

    auto* density = app.add_subcommand("density", "density and CDF of the distance on a grid");
    add_common(density, true);
    add_family(density);
    density->add_option("--grid", cfg.grid, "comma-separated evaluation points")
        ->delimiter(',')
        ->required();

    auto* sample = app.add_subcommand("sample", "sampled distances d(o, E cap L)");
    add_common(sample, true);
    add_family(sample);
    add_sampling(sample);

    auto* validate = app.add_subcommand("validate", "Monte Carlo validation suite");
    add_common(validate, false);
    add_family(validate);
    add_sampling(validate);
    validate->add_option("--alpha", cfg.alpha, "level of the goodness-of-fit tests")
        ->check(CLI::Range(1e-6, 0.5));
    validate->add_flag("--tamper", cfg.tamper, "shift every Monte Carlo target (harness self-test)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        cfg.seed = seed;
        cfg.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        cfg.family = family == "tangent" ? FamilyKind::Tangent
                     : family == "fixed" ? FamilyKind::Fixed
                                         : FamilyKind::Ball;
        const int given = (n ? 1 : 0) + (q ? 1 : 0) + (gamma ? 1 : 0);
        if (given == 3) {
            cfg.triple = CaseTriple(*n, *q, *gamma);
        } else if (given != 0) {
            throw DomainError("--n, --q and --gamma must be given together");
        }

        std::ofstream file;
        std::ostream* os = &out;
        if (!cfg.out_path.empty()) {
            file.open(cfg.out_path, std::ios::binary);
            if (!file) throw DomainError("cannot open output file " + cfg.out_path);
            os = &file;
        }

        if (constants->parsed()) {
            cfg.command = Command::Constants;
            cmd_constants(cfg).write(*os, cfg.format);
        } else if (density->parsed()) {
            cfg.command = Command::Density;
            cmd_density(cfg).write(*os, cfg.format);
        } else if (sample->parsed()) {
            cfg.command = Command::Sample;
            cmd_sample(cfg).write(*os, cfg.format);
        } else {
            cfg.command = Command::Validate;
            const Suite s = cmd_validate(cfg);
            records_table(s.records()).write(*os, cfg.format);
            os->flush();
            return s.all_pass() ? kExitOk : kExitValidationFailed;
        }
        os->flush();
        return kExitOk;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const HarnessError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidationFailed;
    }
}

}  // namespace flatsect::cli
