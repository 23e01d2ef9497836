#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "flatsect/random.hpp"
#include "flatsect/specfun.hpp"

using namespace flatsect;
namespace bm = boost::math;

constexpr double pi = std::numbers::pi;

static void expect_rel(double actual, double expected, double tol) {
    EXPECT_NEAR(actual, expected, tol * std::abs(expected)) << "expected " << expected;
}

TEST(CaseTriple, AcceptsValidRejectsInvalid) {
    EXPECT_NO_THROW(CaseTriple(2, 1, 0));
    EXPECT_NO_THROW(CaseTriple(9, 6, 1));
    EXPECT_THROW(CaseTriple(1, 1, 0), DomainError);
    EXPECT_THROW(CaseTriple(3, 3, 0), DomainError);
    EXPECT_THROW(CaseTriple(3, 2, 2), DomainError);
    EXPECT_THROW(CaseTriple(3, 0, 0), DomainError);
    EXPECT_THROW(CaseTriple(4, 2, -1), DomainError);
    const CaseTriple c(9, 5, 3);
    EXPECT_EQ(c.affine_dim(), 7);
    EXPECT_EQ(c.codim(), 2);
}

TEST(CaseTriple, ErrorMessageStatesConstraint) {
    try {
        CaseTriple(1, 1, 0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("1 <= q <= n-1"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("0 <= gamma <= q-1"), std::string::npos);
    }
}

TEST(LogGamma, Examples) {
    EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-15);
    expect_rel(log_gamma(0.5), std::log(std::sqrt(pi)), 1e-13);
    expect_rel(log_gamma(10.0), std::log(362880.0), 1e-13);
    EXPECT_THROW(log_gamma(0.0), DomainError);
    EXPECT_THROW(log_gamma(-1.5), DomainError);
}

TEST(LogGamma, MatchesBoostOn05To1000) {
    for (double x = 0.5; x <= 1000.0; x *= 1.37) {
        const double ref = bm::lgamma(x);
        if (std::abs(ref) < 1e-3) continue;
        expect_rel(log_gamma(x), ref, 1e-13);
    }
}

TEST(Omega, Examples) {
    expect_rel(omega(1), 2.0, 1e-14);
    expect_rel(omega(2), 2.0 * pi, 1e-14);
    expect_rel(omega(3), 4.0 * pi, 1e-14);
    expect_rel(omega(4), 2.0 * pi * pi, 1e-14);
    EXPECT_THROW(omega(0), DomainError);
}

TEST(Kappa, Examples) {
    EXPECT_DOUBLE_EQ(kappa(0), 1.0);
    expect_rel(kappa(1), 2.0, 1e-14);
    expect_rel(kappa(2), pi, 1e-14);
    expect_rel(kappa(3), 4.0 * pi / 3.0, 1e-14);
    EXPECT_THROW(kappa(-1), DomainError);
}

TEST(Kappa, OmegaIsNTimesKappa) {
    for (int n = 1; n <= 100; ++n) expect_rel(omega(n), n * kappa(n), 1e-12);
}

TEST(BetaComplete, Examples) {
    expect_rel(beta_complete(1, 1), 1.0, 1e-14);
    expect_rel(beta_complete(0.5, 0.5), pi, 1e-14);
    expect_rel(beta_complete(1.5, 1), 2.0 / 3.0, 1e-14);
    EXPECT_THROW(beta_complete(0.0, 1.0), DomainError);
}

TEST(BetaComplete, SphereIdentity) {
    for (int m = 1; m <= 20; ++m) {
        for (int k = 1; k <= 20; ++k) {
            expect_rel(beta_incomplete(1.0, 0.5 * m, 0.5 * k),
                       2.0 * omega(m + k) / (omega(m) * omega(k)), 1e-12);
        }
    }
}

TEST(BetaIncomplete, Examples) {
    EXPECT_EQ(beta_incomplete(0.0, 2.0, 3.0), 0.0);
    for (double x : {0.1, 0.37, 0.9}) EXPECT_NEAR(beta_incomplete(x, 1.0, 1.0), x, 1e-14);
    EXPECT_NEAR(beta_incomplete(0.25, 0.5, 0.5), pi / 3.0, 1e-12);
    EXPECT_THROW(beta_incomplete(1.5, 1.0, 1.0), DomainError);
    EXPECT_THROW(beta_incomplete(-0.1, 1.0, 1.0), DomainError);
}

TEST(BetaIncomplete, ArcsineAgainstQuadrature) {
    bm::quadrature::tanh_sinh<double> ts;
    auto f = [](double t) { return 1.0 / std::sqrt(t * (1.0 - t)); };
    EXPECT_NEAR(ts.integrate(f, 0.0, 0.25), beta_incomplete(0.25, 0.5, 0.5), 1e-12);
}

TEST(BetaIncomplete, MatchesBoostIbeta) {
    RandomStream rng(7);
    for (int i = 0; i < 500; ++i) {
        const double a = 0.5 * (1 + static_cast<int>(rng.uniform() * 30));
        const double b = 0.5 * (1 + static_cast<int>(rng.uniform() * 30));
        const double x = rng.uniform();
        EXPECT_NEAR(beta_regularized(x, a, b), bm::ibeta(a, b, x), 1e-12)
            << "a=" << a << " b=" << b << " x=" << x;
        EXPECT_NEAR(beta_incomplete(x, a, b), bm::beta(a, b, x), 1e-12 * (1 + bm::beta(a, b)));
    }
}

TEST(BetaIncomplete, ReflectionIdentity) {
    RandomStream rng(11);
    for (int i = 0; i < 200; ++i) {
        const double a = 0.2 + 8.0 * rng.uniform();
        const double b = 0.2 + 8.0 * rng.uniform();
        const double x = rng.uniform();
        EXPECT_NEAR(beta_incomplete(x, a, b), beta_complete(a, b) - beta_incomplete(1 - x, b, a),
                    1e-12 * std::max(1.0, beta_complete(a, b)));
    }
}

TEST(BetaIncomplete, MonotoneInX) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = beta_incomplete(i / 1000.0, 2.5, 0.5);
        EXPECT_GE(v, prev - 1e-15);
        prev = v;
    }
}

// Brute-force omega product, independent of the log-space implementation.
static double w(int n) { return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n); }

TEST(DConstant, Examples) {
    expect_rel(d_constant(CaseTriple(2, 1, 0)), 2.0 / (pi * pi), 1e-13);
    expect_rel(d_constant(CaseTriple(3, 1, 0)), 1.0 / (2.0 * pi), 1e-13);
    // w2 w1 w1 / (w3 w2) = 1/pi by direct product.
    expect_rel(d_constant(CaseTriple(3, 2, 1)), w(2) * w(1) * w(1) / (w(3) * w(2)), 1e-13);
    expect_rel(d_constant(CaseTriple(3, 2, 1)), 1.0 / pi, 1e-13);
}

TEST(DConstant, MatchesBruteForceProduct) {
    for (int n = 2; n <= 12; ++n)
        for (int q = 1; q <= n - 1; ++q)
            for (int g = 0; g <= q - 1; ++g) {
                const double ref =
                    w(g + 1) * w(q - g) * w(n - q) / (w(n - (q - g) + 1) * w(n - g));
                expect_rel(d_constant(CaseTriple(n, q, g)), ref, 1e-12);
            }
}

TEST(DConstant, FiniteForLargeN) {
    const double v = d_constant(CaseTriple(500, 250, 100));
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
}

TEST(DTildeConstant, Examples) {
    expect_rel(d_tilde_constant(CaseTriple(3, 1, 0)), 1.0 / (4.0 * pi), 1e-13);
    const CaseTriple c(2, 1, 0);
    expect_rel(d_tilde_constant(c), d_constant(c) * omega(3) / (omega(2) * omega(1)), 1e-12);
    const CaseTriple c9(9, 5, 3);
    // w_{n+1} w_{g+1} w_{q-g} / (w_{n-(q-g)+1} w_{n-g} w_{q+1})
    expect_rel(d_tilde_constant(c9), w(10) * w(4) * w(2) / (w(8) * w(6) * w(6)), 1e-12);
}

TEST(DTildeConstant, ConsistentWithD) {
    for (int n = 2; n <= 12; ++n)
        for (int q = 1; q <= n - 1; ++q)
            for (int g = 0; g <= q - 1; ++g) {
                const CaseTriple c(n, q, g);
                expect_rel(d_tilde_constant(c),
                           d_constant(c) * omega(n + 1) / (omega(q + 1) * omega(n - q)), 1e-12);
            }
}

TEST(HugMomentConstant, Examples) {
    EXPECT_DOUBLE_EQ(hug_moment_constant(5, 3, 5, 2.0), 1.0);
    expect_rel(hug_moment_constant(6, 4, 3, 0.0), 1.0, 1e-14);
    // (3,2,1,2): i = 0, 1.
    const double ref = std::tgamma(1.5) * std::tgamma(2.0) / (std::tgamma(2.5) * std::tgamma(1.0)) *
                       std::tgamma(1.0) * std::tgamma(1.5) / (std::tgamma(2.0) * std::tgamma(0.5));
    expect_rel(hug_moment_constant(3, 2, 1, 2.0), ref, 1e-13);
    EXPECT_THROW(hug_moment_constant(3, 1, 1, 1.0), DomainError);
    for (int n = 2; n <= 8; ++n)
        for (int k = 1; k <= n; ++k)
            for (int r = n - k; r <= n; ++r) {
                if (r < 1) continue;
                const double v = hug_moment_constant(n, k, r, 1.7);
                EXPECT_GT(v, 0.0);
                EXPECT_LE(v, 1.0 + 1e-14);
            }
}

TEST(AxisMomentConstant, Examples) {
    expect_rel(axis_moment_constant(5, 2, 2, 0.0), 1.0, 1e-14);
    // q = 1: the only line through u is span u, so the integral is [u, M]^alpha.
    expect_rel(axis_moment_constant(3, 1, 1, 1.0), 1.0, 1e-13);
    // n = 4, M a line, L = span{u, w} with w uniform in u^perp:
    // E[L, M]^2 = 1 - c^2 - (1 - c^2)/3 = (2/3)[u, M]^2, c = <u, m>.
    expect_rel(axis_moment_constant(4, 1, 2, 2.0), 2.0 / 3.0, 1e-13);
    EXPECT_THROW(axis_moment_constant(4, 2, 3, 1.0), DomainError);
}

TEST(AxisMomentConstant, EqualsHugConstantUnderSubstitution) {
    for (int n = 2; n <= 10; ++n)
        for (int p = 1; p <= n - 1; ++p)
            for (int q = 1; q <= n - p; ++q)
                for (double a : {0.0, 1.0, 2.0, 0.5 * q + 1.0, static_cast<double>(q)}) {
                    expect_rel(axis_moment_constant(n, p, q, a),
                               hug_moment_constant(n - 1, n - q, n - p - 1, a), 1e-12);
                }
}

TEST(BCoefficient, Examples) {
    for (int i = 1; i <= 10; ++i) expect_rel(b_coefficient(i, i), 1.0, 1e-13);
    expect_rel(b_coefficient(3, 1), 2.0 * pi, 1e-13);
    EXPECT_THROW(b_coefficient(2, 3), DomainError);
    EXPECT_THROW(b_coefficient(2, 0), DomainError);
}

TEST(C2Identity, EqualsDForAllTriplesUpTo12) {
    for (int n = 2; n <= 12; ++n)
        for (int q = 1; q <= n - 1; ++q)
            for (int g = 0; g <= q - 1; ++g) {
                const CaseTriple c(n, q, g);
                expect_rel(c2_constant(c), d_constant(c), 1e-10);
            }
}

TEST(HitProbability, Examples) {
    expect_rel(hit_probability(CaseTriple(2, 1, 0)), 2.0 / pi, 1e-13);
    expect_rel(hit_probability(CaseTriple(3, 2, 1)), pi / 4.0, 1e-13);
    expect_rel(hit_probability(CaseTriple(3, 1, 0)), 0.5, 1e-13);
    expect_rel(hit_probability(CaseTriple(8, 5, 2)), 128.0 / (105.0 * pi), 1e-13);
    expect_rel(hit_probability(CaseTriple(9, 5, 3)), 0.5, 1e-13);
    expect_rel(hit_probability(CaseTriple(9, 6, 1)), 15.0 * pi / 256.0, 1e-13);
}

TEST(HitProbability, OmegaAndGammaFormsAgree) {
    for (int n = 2; n <= 50; ++n)
        for (int q = 1; q <= n - 1; ++q)
            for (int g = 0; g <= q - 1; ++g) {
                const CaseTriple c(n, q, g);
                const double p = hit_probability_gamma_form(c);
                expect_rel(hit_probability_omega_form(c), p, 1e-12);
                EXPECT_GT(p, 0.0);
                EXPECT_LE(p, 1.0);
            }
}

TEST(HitProbabilityAsymptotic, RatioTendsToOne) {
    const CaseTriple big(1000, 1, 0);
    EXPECT_NEAR(hit_probability(big) / hit_probability_asymptotic(big), 1.0, 1e-3);
    const double r20 = hit_probability(CaseTriple(20, 5, 3)) /
                       hit_probability_asymptotic(CaseTriple(20, 5, 3));
    const double r200 = hit_probability(CaseTriple(200, 5, 3)) /
                        hit_probability_asymptotic(CaseTriple(200, 5, 3));
    EXPECT_LT(std::abs(r200 - 1.0), std::abs(r20 - 1.0));
    // Leading term in omega form.
    const CaseTriple c(50, 5, 3);
    expect_rel(hit_probability_asymptotic(c),
               omega(4) / omega(6) * std::pow(2.0 * pi / 50.0, 1.0), 1e-12);
}
