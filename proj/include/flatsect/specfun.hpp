#pragma once

// Special functions and the closed-form constants of the linear/affine
// intersection formulas. Every Gamma-product is evaluated as a sum of
// log-Gamma terms followed by a single exponential, which keeps the
// constants finite for ambient dimensions up to a few hundred.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "flatsect/errors.hpp"

namespace flatsect {

/// Dimension triple (n, q, gamma): ambient dimension, dimension of the
/// random linear subspace L, and dimension of the intersection E cap L.
/// The affine flat E then has dimension n - q + gamma.
class CaseTriple {
public:
    static constexpr const char* kConstraint =
        "invalid case: require n >= 2, 1 <= q <= n-1 and 0 <= gamma <= q-1";

    CaseTriple(int n, int q, int gamma) : n_(n), q_(q), gamma_(gamma) {
        if (!is_valid(n, q, gamma)) {
            throw DomainError(std::string(kConstraint) + " (got n=" + std::to_string(n) +
                              ", q=" + std::to_string(q) + ", gamma=" + std::to_string(gamma) +
                              ")");
        }
    }

    static constexpr bool is_valid(int n, int q, int gamma) noexcept {
        return n >= 2 && q >= 1 && q <= n - 1 && gamma >= 0 && gamma <= q - 1;
    }

    constexpr int n() const noexcept { return n_; }
    constexpr int q() const noexcept { return q_; }
    constexpr int gamma() const noexcept { return gamma_; }
    /// Dimension of the affine flat E.
    constexpr int affine_dim() const noexcept { return n_ - q_ + gamma_; }
    /// q - gamma, the codimension of E; also the radial exponent of the law near 0.
    constexpr int codim() const noexcept { return q_ - gamma_; }

    friend constexpr bool operator==(const CaseTriple&, const CaseTriple&) = default;

private:
    int n_;
    int q_;
    int gamma_;
};

// ---------------------------------------------------------------------------
// Gamma and Beta functions
// ---------------------------------------------------------------------------

inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    return std::lgamma(x);
}

/// log of the surface area of S^{n-1}.
inline double log_omega(int n) {
    if (n <= 0) throw DomainError("omega: n must be >= 1");
    return std::log(2.0) + 0.5 * n * std::log(std::numbers::pi) - log_gamma(0.5 * n);
}

/// Surface area of the unit sphere S^{n-1}: 2 pi^{n/2} / Gamma(n/2).
inline double omega(int n) { return std::exp(log_omega(n)); }

/// log of the volume of the unit ball B^n. kappa_0 = 1.
inline double log_kappa(int n) {
    if (n < 0) throw DomainError("kappa: n must be >= 0");
    return 0.5 * n * std::log(std::numbers::pi) - log_gamma(0.5 * n + 1.0);
}

/// Volume of the unit ball B^n: pi^{n/2} / Gamma(n/2 + 1).
inline double kappa(int n) { return std::exp(log_kappa(n)); }

inline double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta: parameters must be positive");
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

inline double beta_complete(double a, double b) { return std::exp(log_beta(a, b)); }

namespace detail {

// Modified Lentz evaluation of the continued fraction for the incomplete
// beta function; converges fast for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("beta_incomplete: continued fraction did not converge");
}

inline void check_beta_args(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("beta_incomplete: x must lie in [0,1]");
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_incomplete: parameters must be positive");
}

}  // namespace detail

/// Unnormalized incomplete beta integral B(x; a, b) = int_0^x t^{a-1}(1-t)^{b-1} dt.
inline double beta_incomplete(double x, double a, double b) {
    detail::check_beta_args(x, a, b);
    if (x == 0.0) return 0.0;
    if (x == 1.0) return beta_complete(a, b);
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(x, a, b) / a;
    }
    return beta_complete(a, b) - front * detail::beta_continued_fraction(1.0 - x, b, a) / b;
}

/// Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) distribution function.
inline double beta_regularized(double x, double a, double b) {
    detail::check_beta_args(x, a, b);
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * detail::beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(1.0 - x, b, a) / b;
}

// ---------------------------------------------------------------------------
// Constants of the transformation formulas
// ---------------------------------------------------------------------------

inline double log_d_constant(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return log_omega(g + 1) + log_omega(q - g) + log_omega(n - q) - log_omega(n - (q - g) + 1) -
           log_omega(n - g);
}

/// D(n,q,gamma) = w_{g+1} w_{q-g} w_{n-q} / (w_{n-(q-g)+1} w_{n-g}).
inline double d_constant(const CaseTriple& c) { return std::exp(log_d_constant(c)); }

/// Constant for the unrestricted (H = 1) version of the formula:
/// w_{n+1} w_{g+1} w_{q-g} / (w_{n-(q-g)+1} w_{n-g} w_{q+1}).
inline double d_tilde_constant(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return std::exp(log_omega(n + 1) + log_omega(g + 1) + log_omega(q - g) -
                    log_omega(n - (q - g) + 1) - log_omega(n - g) - log_omega(q + 1));
}

/// Moment of the subspace determinant [F, L]^alpha of a fixed F in G(n,r)
/// against a uniform L in G(n,k):
///   prod_{i=0}^{n-r-1} G((n-i)/2) G((k-i+a)/2) / (G((n-i+a)/2) G((k-i)/2)),
/// equal to 1 when r = n. Requires r + k >= n; r = 0 is accepted (then k = n
/// and the product is identically 1).
inline double hug_moment_constant(int n, int k, int r, double alpha) {
    if (n < 1 || k < 1 || k > n || r < 0 || r > n || r + k < n) {
        throw DomainError("hug_moment_constant: require k,r in {1..n} and r + k >= n");
    }
    if (!(alpha >= 0.0)) throw DomainError("hug_moment_constant: alpha must be >= 0");
    double log_sum = 0.0;
    for (int i = 0; i <= n - r - 1; ++i) {
        log_sum += log_gamma(0.5 * (n - i)) + log_gamma(0.5 * (k - i + alpha)) -
                   log_gamma(0.5 * (n - i + alpha)) - log_gamma(0.5 * (k - i));
    }
    return std::exp(log_sum);
}

/// Constant a(n,p,q,alpha) of the subspace-determinant moment over the
/// q-dimensional subspaces containing a fixed axis:
///   prod_{i=1}^{p} G((n-i)/2) G((n-q-i+a+1)/2) / (G((n-i+a)/2) G((n-q-i+1)/2)).
inline double axis_moment_constant(int n, int p, int q, double alpha) {
    if (n < 2 || p < 1 || q < 1 || p > n - 1 || q > n - 1 || p + q > n) {
        throw DomainError("axis_moment_constant: require p,q in {1..n-1} and p + q <= n");
    }
    if (!(alpha >= 0.0)) throw DomainError("axis_moment_constant: alpha must be >= 0");
    double log_sum = 0.0;
    for (int i = 1; i <= p; ++i) {
        log_sum += log_gamma(0.5 * (n - i)) + log_gamma(0.5 * (n - q - i + alpha + 1)) -
                   log_gamma(0.5 * (n - i + alpha)) - log_gamma(0.5 * (n - q - i + 1));
    }
    return std::exp(log_sum);
}

inline double log_b_coefficient(int i, int j) {
    if (i < 1 || j < 1 || j > i) throw DomainError("b_coefficient: require 1 <= j <= i");
    double s = 0.0;
    for (int k = i - j + 1; k <= i; ++k) s += log_omega(k);
    for (int k = 1; k <= j; ++k) s -= log_omega(k);
    return s;
}

/// b_{i,j} = (w_{i-j+1} ... w_i) / (w_1 ... w_j).
inline double b_coefficient(int i, int j) { return std::exp(log_b_coefficient(i, j)); }

/// Constant of the affine Blaschke-Petkantschin formula for intersecting a
/// q-flat with an (n-q+gamma)-flat:
///   b_{n,n-g} b_{n-g,n-q} b_{n-g,q-g} / (b_{n,n-q} b_{n,q-g}).
inline double bar_b(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return std::exp(log_b_coefficient(n, n - g) + log_b_coefficient(n - g, n - q) +
                    log_b_coefficient(n - g, q - g) - log_b_coefficient(n, n - q) -
                    log_b_coefficient(n, q - g));
}

/// c1 = a(n-g, n-q, q-g, g+1) w_{q-g} / w_{n-g}.
inline double c1_constant(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return axis_moment_constant(n - g, n - q, q - g, g + 1.0) *
           std::exp(log_omega(q - g) - log_omega(n - g));
}

/// c2 = bar_b c1 w_{n-q} w_{q-g} / w_{n-g}; equals d_constant for every valid triple.
inline double c2_constant(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return bar_b(c) * c1_constant(c) *
           std::exp(log_omega(n - q) + log_omega(q - g) - log_omega(n - g));
}

// ---------------------------------------------------------------------------
// Hit probability p_{n,q,gamma} = P[E cap L cap B^n != empty]
// ---------------------------------------------------------------------------

inline double hit_probability_omega_form(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return std::exp(log_omega(g + 1) + log_omega(n + 1) - log_omega(q + 1) -
                    log_omega(n - (q - g) + 1));
}

inline double hit_probability_gamma_form(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return std::exp(log_gamma(0.5 * (q + 1)) + log_gamma(0.5 * (n - (q - g) + 1)) -
                    log_gamma(0.5 * (g + 1)) - log_gamma(0.5 * (n + 1)));
}

inline double hit_probability(const CaseTriple& c) {
    const double by_omega = hit_probability_omega_form(c);
    const double by_gamma = hit_probability_gamma_form(c);
    if (std::abs(by_omega - by_gamma) > 1e-10 * by_gamma) {
        throw std::logic_error("hit_probability: omega and Gamma forms disagree");
    }
    return by_omega;
}

/// Leading Stirling term of p_{n,q,gamma} for n -> infinity with q, gamma fixed:
///   G((q+1)/2)/G((g+1)/2) (2/n)^{(q-g)/2} = (w_{g+1}/w_{q+1}) (2 pi/n)^{(q-g)/2}.
/// The variant written with (2/(pi n)) in place of (2 pi/n) is off by pi^{q-g}.
inline double hit_probability_asymptotic(const CaseTriple& c) {
    const int n = c.n(), q = c.q(), g = c.gamma();
    return std::exp(log_gamma(0.5 * (q + 1)) - log_gamma(0.5 * (g + 1)) +
                    0.5 * (q - g) * std::log(2.0 / n));
}

}  // namespace flatsect
