// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "flatsect/cli.hpp"
#include "flatsect/densities.hpp"
#include "flatsect/quadrature.hpp"
#include "flatsect/specfun.hpp"
#include "flatsect/validation.hpp"

using namespace flatsect;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kAlpha = 0.01;
constexpr std::uint64_t kSeed = 42;

const std::vector<CaseTriple> kTriples{{2, 1, 0}, {3, 2, 1}, {3, 1, 0},
                                       {8, 5, 2}, {9, 5, 3}, {9, 6, 1}};

std::string tag(const CaseTriple& c) {
    return "(" + std::to_string(c.n()) + "," + std::to_string(c.q()) + "," +
           std::to_string(c.gamma()) + ")";
}

RandomStream stream(std::string_view id) { return RandomStream(kSeed, cli::stream_for(id)); }

Parallelism par() { return default_parallelism(16); }

void detail_line(const char* fmt, auto... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

void paired_line(const std::string& what, const MCEstimate& e, double target, bool pass) {
    detail_line("%-34s est %.6f +- %.2e  target %.6f  z %+.2f  %s", what.c_str(), e.value,
                e.std_error, target, e.std_error > 0 ? (e.value - target) / e.std_error : 0.0,
                pass ? "ok" : "MISS");
}

void ks_line(const std::string& what, const GoodnessOfFitReport& g) {
    detail_line("%-34s KS %.5f  crit %.5f  n %lld  %s", what.c_str(), g.ks_statistic,
                g.critical_value, static_cast<long long>(g.n_samples), g.pass ? "ok" : "REJECT");
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// ---------------------------------------------------------------------------

bool criterion_hit_probabilities() {
    const std::vector<double> closed{2.0 / pi, pi / 4.0, 0.5, 128.0 / (105.0 * pi), 0.5,
                                     15.0 * pi / 256.0};
    bool ok = true;
    for (std::size_t i = 0; i < kTriples.size(); ++i) {
        const auto& c = kTriples[i];
        const auto e = estimate_hit_probability(c, 1000000, stream("hit/" + tag(c)), par());
        const bool pass = within_three_sigma(e, closed[i]) &&
                          rel_close(hit_probability(c), closed[i], 1e-12);
        paired_line("p" + tag(c), e, closed[i], pass);
        ok &= pass;
    }
    return ok;
}

bool criterion_distance_law() {
    bool ok = true;
    for (const auto& c : kTriples) {
        const auto g = validate_distance_law(c, BallRestricted{}, 100000, stream("law/" + tag(c)),
                                             kAlpha, par());
        ks_line("ball law " + tag(c), g);
        ok &= g.pass;
    }
    int trials = 0, rejections = 0;
    for (const auto& c : kTriples) {
        const auto r =
            calibrate_ks(RadialDensity::ball(c), 200, 1000, kAlpha, stream("calib/" + tag(c)));
        detail_line("calibration %-22s %d/%d rejections", tag(c).c_str(), r.rejections, r.trials);
        trials += r.trials;
        rejections += r.rejections;
    }
    const auto pooled = make_calibration(trials, rejections, kAlpha);
    detail_line("pooled calibration rate %.4f in [%.4f, %.4f]: %s", pooled.rate, pooled.lo,
                pooled.hi, pooled.pass ? "ok" : "OUT OF BAND");
    return ok && pooled.pass;
}

bool criterion_tangent_beta() {
    bool ok = true;
    for (const auto& c : {CaseTriple(2, 1, 0), CaseTriple(3, 1, 0), CaseTriple(3, 2, 1),
                          CaseTriple(9, 5, 3)}) {
        const auto g = validate_tangent_beta(c, 100000, stream("tangent/" + tag(c)), kAlpha, par());
        ks_line("r^-2 beta law " + tag(c), g);
        ok &= g.pass;
    }
    return ok;
}

bool criterion_moments() {
    bool ok = true;
    const std::pair<CaseTriple, double> cases[] = {{{8, 5, 2}, 4.0 / pi}, {{9, 5, 3}, 16.0 / 15.0}};
    for (const auto& [c, target] : cases) {
        const auto e = estimate_moment(c, BallRestricted{}, 1.0, 1000000,
                                       stream("moment/" + tag(c)), par());
        const bool pass = within_three_sigma(e, target);
        paired_line("E d " + tag(c), e, target, pass);
        ok &= pass;
    }
    const double m321 = moment_ball({3, 2, 1}, 1.0);
    const bool quad_ok = std::abs(m321 - pi / 4.0) <= 1e-6;
    detail_line("moment_ball(3,2,1) = %.12f vs pi/4, |diff| %.1e  %s", m321, std::abs(m321 - pi / 4.0),
                quad_ok ? "ok" : "MISS");
    ok &= quad_ok;

    // Tangent mean against direct quadrature of r g(r). With r = 1/sin(theta) the
    // (1 - r^{-2})^{(n-q)/2-1} endpoint factor becomes a power of cos(theta).
    const CaseTriple c(3, 2, 1);
    const double oracle = quad::integrate(
        [&](double theta) {
            const double s = std::sin(theta);
            return s > 0.0 ? density_tangent(c, 1.0 / s) * std::cos(theta) / (s * s * s) : 0.0;
        },
        0.0, 0.5 * pi, {1e-14, 1e-13, 4000});
    const double mean = moment_tangent(c, 1.0);
    const bool tangent_ok = std::abs(mean - oracle) <= 1e-8 && std::abs(mean - pi / 2.0) <= 1e-12;
    detail_line("tangent mean (3,2,1) = %.12f, quadrature %.12f  %s", mean, oracle,
                tangent_ok ? "ok" : "MISS");
    const double alt = std::exp(log_omega(c.n() - c.q() + c.gamma()) - log_omega(c.gamma())) *
                       std::pow(2.0 * pi, -(c.n() - c.q()));
    detail_line("note: the closed form (w_{n-q+g}/w_g)(2 pi)^{-(n-q)} gives %.6f here and is "
                "inconsistent with the quadrature",
                alt);
    return ok && tangent_ok;
}

bool criterion_axis_moment() {
    struct Config {
        int n, p, q;
        double alpha;
    };
    // alpha = 3 rows come from (n,q,g) -> (n-g, n-q, q-g, g+1), the use made of the
    // constant in the distance-measure identity.
    const std::vector<Config> configs{
        {3, 1, 1, 1.0}, {3, 1, 2, 2.0}, {3, 2, 1, 1.0}, {3, 2, 1, 2.0}, {4, 1, 2, 1.0},
        {4, 2, 2, 2.0}, {4, 1, 3, 2.0}, {4, 3, 1, 1.0}, {5, 2, 3, 1.0}, {5, 2, 2, 2.0},
        {5, 1, 4, 2.0}, {5, 3, 2, 1.0}, {3, 1, 2, 3.0}, {4, 2, 2, 3.0}, {5, 2, 2, 3.0},
    };
    bool ok = true;
    int i = 0;
    for (const auto& k : configs) {
        const std::string id = "axis/" + std::to_string(i++);
        RandomStream setup = stream(id + "/setup");
        const Vector u = sample_unit_sphere(k.n, setup);
        const LinearSubspace m = sample_grassmannian(k.n, k.p, setup);
        const auto r = validate_lemma_axis_moment(k.n, k.p, k.q, k.alpha, u, m, 100000, stream(id), par());
        char what[64];
        std::snprintf(what, sizeof what, "a(%d,%d,%d,%g)[u,M]^a", k.n, k.p, k.q, k.alpha);
        paired_line(what, r.lhs, r.rhs, r.pass);
        ok &= r.pass;
    }
    double worst = 0.0;
    for (int n = 2; n <= 10; ++n)
        for (int p = 1; p <= n - 1; ++p)
            for (int q = 1; q <= n - p; ++q)
                for (double a : {0.0, 1.0, 2.0, static_cast<double>(q)}) {
                    const double lhs = axis_moment_constant(n, p, q, a);
                    const double rhs = hug_moment_constant(n - 1, n - q, n - p - 1, a);
                    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
                }
    const bool identity_ok = worst <= 1e-12;
    detail_line("a(n,p,q,a) = A(n-1,n-q,n-p-1,a), n <= 10: max rel err %.1e  %s", worst,
                identity_ok ? "ok" : "MISS");
    return ok && identity_ok;
}

bool criterion_constant_algebra() {
    double worst_c2 = 0.0, worst_hit = 0.0, worst_beta = 0.0;
    for (int n = 2; n <= 50; ++n)
        for (int q = 1; q <= n - 1; ++q)
            for (int g = 0; g <= q - 1; ++g) {
                const CaseTriple c(n, q, g);
                if (n <= 12) {
                    worst_c2 = std::max(worst_c2,
                                        std::abs(c2_constant(c) - d_constant(c)) / d_constant(c));
                }
                const double a = hit_probability_omega_form(c), b = hit_probability_gamma_form(c);
                worst_hit = std::max(worst_hit, std::abs(a - b) / b);
            }
    for (int m = 1; m <= 20; ++m)
        for (int k = 1; k <= 20; ++k) {
            const double lhs = beta_complete(0.5 * m, 0.5 * k);
            const double rhs = 2.0 * omega(m + k) / (omega(m) * omega(k));
            worst_beta = std::max(worst_beta, std::abs(lhs - rhs) / rhs);
        }
    const bool ok = worst_c2 <= 1e-10 && worst_hit <= 1e-12 && worst_beta <= 1e-12;
    detail_line("c2 = D (n <= 12) max rel err %.1e", worst_c2);
    detail_line("hit probability omega vs Gamma form (n <= 50) max rel err %.1e", worst_hit);
    detail_line("B(m/2,k/2) = 2 w_{m+k}/(w_m w_k) (m,k <= 20) max rel err %.1e", worst_beta);
    return ok;
}

bool criterion_transformation_formula() {
    const std::vector<double> grid{0.25, 1.0, 2.0, 5.0};
    bool ok = true;
    for (const auto& c : {CaseTriple(2, 1, 0), CaseTriple(3, 2, 1), CaseTriple(4, 2, 1)}) {
        for (double h : {0.5, 1.0, 2.0}) {
            const std::string id = "weighted/" + tag(c) + "/h=" + cli::format_double(h);
            const auto checks = validate_theorem_general(c, WeightProfile::ball_indicator(h), grid,
                                                         1000000, stream(id), par());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                char what[64];
                std::snprintf(what, sizeof what, "%s h=%g delta=%g", tag(c).c_str(), h, grid[j]);
                paired_line(what, checks[j].lhs, checks[j].rhs, checks[j].pass);
                ok &= checks[j].pass;
            }
        }
    }
    return ok;
}

bool criterion_fixed_subspace() {
    bool ok = true;
    for (const auto& c : {CaseTriple(2, 1, 0), CaseTriple(3, 2, 1)}) {
        const auto r = validate_fixed_subspace_theorem(
            c, LinearSubspace::coordinate(c.n(), c.q()), WeightProfile::ball_indicator(1.0), 100000,
            stream("fixed/" + tag(c)), kAlpha, par());
        ks_line("fixed L0 " + tag(c), r.gof);
        detail_line("hit fraction %.5f (p = %.5f), containment residual %.1e", r.hit_fraction,
                    hit_probability(c), r.max_containment_residual);
        ok &= r.gof.pass && r.max_containment_residual <= 1e-8;
    }
    return ok;
}

bool criterion_multiple_intersections() {
    bool ok = true;
    const auto planes = validate_multiple_intersections({3, {2, 2}, {2}}, 1000000,
                                                        stream("multiple/planes"), kAlpha, par());
    ks_line("two planes in R^3: line vs uniform", planes.uniformity);
    ok &= planes.uniformity.pass;

    struct Case {
        const char* name;
        IntersectionPattern pattern;
    };
    const Case cases[] = {{"(n,m)=(2,1): one line in R^2", {2, {1}, {1}}},
                          {"(n,m)=(3,2): two planes in R^3", {3, {2}, {2, 2}}}};
    for (const auto& k : cases) {
        const auto r = validate_multiple_intersections(k.pattern, 1000000,
                                                       stream(std::string("multiple/") + k.name),
                                                       kAlpha, par());
        paired_line(k.name, r.crofton.lhs, r.crofton.rhs, r.crofton.pass);
        detail_line("constant %.6f (variant with w_{p_j}: %.6f)", r.crofton_constant,
                    r.crofton_constant_unshifted);
        ok &= r.crofton.pass;
    }
    return ok;
}

bool criterion_asymptotics() {
    const int n = 1000;
    bool printed_ok = true;
    for (auto [q, g] : {std::pair{1, 0}, std::pair{5, 3}}) {
        const CaseTriple c(n, q, g);
        const double p = hit_probability_gamma_form(c);
        const double as_printed = std::exp(log_omega(g + 1) - log_omega(q + 1)) *
                                  std::pow(2.0 / (pi * n), 0.5 * (q - g));
        const double ratio = p / as_printed;
        const bool pass = ratio >= 0.98 && ratio <= 1.02;
        detail_line("p/[(w_{g+1}/w_{q+1})(2/(pi n))^{(q-g)/2}] (q,g)=(%d,%d): %.5f  %s", q, g, ratio,
                    pass ? "ok" : "OUT OF [0.98, 1.02]");
        detail_line("info: p/[G((q+1)/2)/G((g+1)/2)(2/n)^{(q-g)/2}] = %.5f",
                    p / hit_probability_asymptotic(c));
        printed_ok &= pass;
    }
    const int m = 400;
    const double ratio = moment_tangent({m, 2, 1}, 1.0) / std::sqrt(static_cast<double>(m)) /
                         mean_tangent_limit(1);
    const bool tangent_ok = std::abs(ratio - 1.0) <= 0.02;
    detail_line("tangent mean / (sqrt(n) limit) at n=400, (q,g)=(2,1): %.5f  %s", ratio,
                tangent_ok ? "ok" : "MISS");
    return printed_ok && tangent_ok;
}

bool criterion_determinism() {
    auto run = [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"flatsect"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return std::to_string(code) + "\n" + out.str();
    };
    bool ok = true;
    const std::vector<std::vector<std::string>> runs{
        {"validate", "--samples", "20000", "--seed", "42", "--chunks", "16"},
        {"validate", "--n", "4", "--q", "2", "--gamma", "1", "--samples", "50000", "--seed", "7",
         "--format", "csv"},
        {"validate", "--n", "3", "--q", "2", "--gamma", "1", "--family", "tangent", "--samples",
         "50000", "--seed", "9", "--chunks", "5"},
    };
    for (const auto& args : runs) {
        const std::string a = run(args), b = run(args);
        const bool same = a == b;
        std::string joined;
        for (const auto& s : args) joined += s + " ";
        detail_line("%s: %zu bytes, %s", joined.c_str(), a.size(), same ? "identical" : "DIFFERENT");
        ok &= same;
    }
    // The chunk layout, not the worker count, fixes the draws.
    const auto one = sample_intersection_distances({5, 3, 1}, BallRestricted{}, 20000,
                                                   stream("determinism"), {16, 1});
    const auto four = sample_intersection_distances({5, 3, 1}, BallRestricted{}, 20000,
                                                    stream("determinism"), {16, 4});
    const bool threads_ok = one.values == four.values;
    detail_line("1 vs 4 worker threads, same chunk layout: %s", threads_ok ? "identical" : "DIFFERENT");
    return ok && threads_ok;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "hit probabilities, 1e6 samples per triple", criterion_hit_probabilities},
        {2, "distance law KS at 1e5 and calibration", criterion_distance_law},
        {3, "tangent family beta law", criterion_tangent_beta},
        {4, "moments", criterion_moments},
        {5, "subspace-determinant moment over subspaces containing an axis", criterion_axis_moment},
        {6, "constant algebra", criterion_constant_algebra},
        {7, "weighted transformation formula, two-sided", criterion_transformation_formula},
        {8, "fixed linear subspace", criterion_fixed_subspace},
        {9, "multiple intersections", criterion_multiple_intersections},
        {10, "high-dimensional asymptotics", criterion_asymptotics},
        {11, "determinism", criterion_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        bool pass = false;
        try {
            pass = c.run();
        } catch (const std::exception& e) {
            std::printf("    error: %s\n", e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d %s  %s (%.1f s)\n", c.id, pass ? "PASS" : "FAIL", c.name, secs);
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
