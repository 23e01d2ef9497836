#pragma once

// Radial laws of d(o, E cap L) for a uniform random q-subspace L and an
// independent invariant (n-q+gamma)-flat E, together with the weight
// function J_H of the underlying transformation formula.
//
// Two families of E are covered:
//   ball     E uniform among flats hitting the ball hB^n;
//   tangent  E uniform among flats at distance exactly 1 from the origin.
// In the tangent case d^{-2} ~ Beta((gamma+1)/2, (n-q)/2). The ball law has
// density m p delta^{m-1} on [0,1] (m = q - gamma, p the hit probability)
// and a tail (m K/2) delta^{m-1} B(delta^{-2}; (q+1)/2, (n-q)/2) beyond 1,
// with K = w_{gamma+1} w_{n-q} / w_{n-(q-gamma)+1}.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "flatsect/errors.hpp"
#include "flatsect/quadrature.hpp"
#include "flatsect/specfun.hpp"

namespace flatsect {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Rotation invariant density H of the law of E with respect to the
/// invariant measure, described through its radial profile H_I(d(o,E)).
class WeightProfile {
public:
    enum class Kind { BallIndicator, Constant, Radial };

    /// H_I = 1 on [0, h], 0 beyond.
    static WeightProfile ball_indicator(double h) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw DomainError("WeightProfile: ball radius must be positive and finite");
        }
        return WeightProfile(Kind::BallIndicator, h, {});
    }

    static WeightProfile constant() { return WeightProfile(Kind::Constant, kInfinity, {}); }

    /// User profile r -> H_I(r) >= 0, vanishing beyond support_radius.
    static WeightProfile radial(std::function<double(double)> profile,
                                double support_radius = kInfinity) {
        if (!profile) throw DomainError("WeightProfile: empty radial profile");
        if (!(support_radius > 0.0)) throw DomainError("WeightProfile: support must be positive");
        return WeightProfile(Kind::Radial, support_radius, std::move(profile));
    }

    Kind kind() const noexcept { return kind_; }
    /// h for BallIndicator, the declared support for Radial, infinity for Constant.
    double support_radius() const noexcept { return radius_; }

    double operator()(double r) const {
        switch (kind_) {
            case Kind::BallIndicator: return r <= radius_ ? 1.0 : 0.0;
            case Kind::Constant: return 1.0;
            case Kind::Radial: {
                if (r > radius_) return 0.0;
                const double v = profile_(r);
                if (!(v >= 0.0)) throw DomainError("WeightProfile: radial profile must be >= 0");
                return v;
            }
        }
        return 0.0;
    }

private:
    WeightProfile(Kind kind, double radius, std::function<double(double)> profile)
        : kind_(kind), radius_(radius), profile_(std::move(profile)) {}

    Kind kind_;
    double radius_;
    std::function<double(double)> profile_;
};

namespace detail {

inline void check_dims(int q, int n) {
    if (n < 2 || q < 1 || q > n - 1) throw DomainError("j_weight: require 1 <= q <= n-1");
}

/// w_{n+1} / (w_{q+1} w_{n-q}) = (1/2) B((q+1)/2, (n-q)/2).
inline double j_weight_full(int q, int n) {
    return std::exp(log_omega(n + 1) - log_omega(q + 1) - log_omega(n - q));
}

}  // namespace detail

/// J_H(r) = int_0^1 H_I(r z) z^q (1 - z^2)^{(n-q)/2 - 1} dz.
inline double j_weight(const WeightProfile& h, int q, int n, double r) {
    detail::check_dims(q, n);
    if (!(r >= 0.0)) throw DomainError("j_weight: r must be >= 0");
    switch (h.kind()) {
        case WeightProfile::Kind::Constant: return detail::j_weight_full(q, n);
        case WeightProfile::Kind::BallIndicator: {
            const double radius = h.support_radius();
            if (r <= radius) return detail::j_weight_full(q, n);
            const double x = (radius / r) * (radius / r);
            return 0.5 * beta_incomplete(x, 0.5 * (q + 1), 0.5 * (n - q));
        }
        case WeightProfile::Kind::Radial: {
            // z = sin(theta) removes the (1-z^2)^{-1/2} endpoint singularity at n - q = 1.
            auto integrand = [&](double theta) {
                const double s = std::sin(theta);
                return h(r * s) * std::pow(s, q) * std::pow(std::cos(theta), n - q - 1);
            };
            const quad::Tolerance tol{1e-11, 1e-11, 4000};
            const double half_pi = 0.5 * std::numbers::pi;
            const double support = h.support_radius();
            if (r > 0.0 && r > support) {
                const double cut = std::asin(support / r);
                return quad::integrate(integrand, 0.0, cut, tol);
            }
            return quad::integrate(integrand, 0.0, half_pi, tol);
        }
    }
    return 0.0;
}

/// Weighted invariant measure of {(L, E) : d(o, E cap L) <= delta}:
///   D(n,q,gamma) w_{n-gamma} int_0^delta r^{q-gamma-1} J_H(r) dr.
inline double distance_mass(const CaseTriple& c, const WeightProfile& h, double delta) {
    if (!(delta >= 0.0)) throw DomainError("distance_mass: delta must be >= 0");
    if (delta == 0.0) return 0.0;
    if (!std::isfinite(delta)) throw DomainError("distance_mass: delta must be finite");
    const int m = c.codim();
    auto integrand = [&](double r) { return std::pow(r, m - 1) * j_weight(h, c.q(), c.n(), r); };
    std::vector<double> breaks{0.0};
    if (h.support_radius() < delta) breaks.push_back(h.support_radius());
    breaks.push_back(delta);
    const double integral = quad::integrate_piecewise(integrand, breaks, {1e-13, 1e-11, 4000});
    return d_constant(c) * omega(c.n() - c.gamma()) * integral;
}

/// Finiteness window (lo, hi) for E d^alpha: finite iff lo < alpha < hi.
struct MomentWindow {
    double lo;
    double hi;
    bool contains(double alpha) const noexcept { return alpha > lo && alpha < hi; }
};

/// Law of d(o, E cap L) for one of the two families of E.
class RadialDensity {
public:
    enum class Family { BallRestricted, Tangent };

    static RadialDensity ball(const CaseTriple& c, double h = 1.0) {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("RadialDensity: h must be positive");
        return RadialDensity(c, Family::BallRestricted, h);
    }
    static RadialDensity tangent(const CaseTriple& c) {
        return RadialDensity(c, Family::Tangent, 1.0);
    }

    const CaseTriple& case_triple() const noexcept { return case_; }
    Family family() const noexcept { return family_; }
    double radius() const noexcept { return h_; }
    /// K = w_{gamma+1} w_{n-q} / w_{n-(q-gamma)+1} = 2 / B((gamma+1)/2, (n-q)/2).
    double normalization() const noexcept { return k_; }

    /// Shape parameters of the beta law of d^{-2} (tangent) / of the mixing variable (ball).
    double beta_a() const noexcept { return 0.5 * (case_.gamma() + 1); }
    double beta_b() const noexcept { return 0.5 * (case_.n() - case_.q()); }

    double density(double r) const {
        check_arg(r);
        if (family_ == Family::Tangent) return tangent_density(r);
        return ball_density(r / h_) / h_;
    }

    double cdf(double r) const {
        check_arg(r);
        if (family_ == Family::Tangent) {
            if (r <= 1.0) return 0.0;
            if (!std::isfinite(r)) return 1.0;
            return 1.0 - beta_regularized(1.0 / (r * r), beta_a(), beta_b());
        }
        const double delta = r / h_;
        if (delta <= 1.0) return p_ * std::pow(delta, case_.codim());
        if (!std::isfinite(delta)) return p_ + tail_from_one_;
        return p_ + tail_from_one_ - ball_tail(delta);
    }

    /// 1 - cdf(r), evaluated without cancellation in the tail.
    double survival(double r) const {
        check_arg(r);
        if (family_ == Family::Tangent) {
            if (r <= 1.0) return 1.0;
            if (!std::isfinite(r)) return 0.0;
            return beta_regularized(1.0 / (r * r), beta_a(), beta_b());
        }
        const double delta = r / h_;
        if (delta <= 1.0) return 1.0 - cdf(r);
        if (!std::isfinite(delta)) return 0.0;
        return ball_tail(delta);
    }

    MomentWindow moment_window() const noexcept {
        const double hi = case_.gamma() + 1.0;
        if (family_ == Family::Tangent) return {-kInfinity, hi};
        return {static_cast<double>(case_.gamma() - case_.q()), hi};
    }

    /// E d^alpha, or +infinity outside the finiteness window.
    double moment(double alpha) const {
        if (!moment_window().contains(alpha)) return kInfinity;
        if (family_ == Family::Tangent) {
            return std::exp(log_beta(beta_a() - 0.5 * alpha, beta_b()) -
                            log_beta(beta_a(), beta_b()));
        }
        return std::pow(h_, alpha) * ball_moment_unit(alpha);
    }

private:
    RadialDensity(const CaseTriple& c, Family family, double h)
        : case_(c),
          family_(family),
          h_(h),
          k_(std::exp(log_omega(c.gamma() + 1) + log_omega(c.n() - c.q()) -
                      log_omega(c.n() - c.codim() + 1))),
          p_(hit_probability(c)) {
        if (family_ == Family::BallRestricted) tail_from_one_ = ball_tail(1.0);
    }

    static void check_arg(double r) {
        if (!(r >= 0.0)) throw DomainError("RadialDensity: argument must be >= 0");
    }

    double a_tail() const noexcept { return 0.5 * (case_.q() + 1); }

    double ball_density(double delta) const {
        const int m = case_.codim();
        if (delta <= 1.0) return m * p_ * std::pow(delta, m - 1);
        if (!std::isfinite(delta)) return 0.0;
        // delta^{m-1} B(delta^{-2}) = delta^{-(gamma+2)} scaled_beta(1/delta), finite for huge delta.
        return 0.5 * m * k_ * std::pow(delta, -(case_.gamma() + 2)) * scaled_beta(1.0 / delta);
    }

    double tangent_density(double r) const {
        if (r <= 1.0 || !std::isfinite(r)) return 0.0;
        const double x = 1.0 - 1.0 / (r * r);
        return k_ * std::pow(r, -(case_.gamma() + 2)) * std::pow(x, beta_b() - 1.0);
    }

    // B(s^2; a, b) / s^{q+1}, bounded near s = 0 where it tends to 1/a.
    double scaled_beta(double s) const {
        const double a = a_tail();
        if (s < 1e-8) return 1.0 / a;
        return beta_incomplete(s * s, a, beta_b()) / std::pow(s, case_.q() + 1);
    }

    // int_delta^inf of the unit-ball density, delta >= 1. With s = 1/t it
    // becomes (m K/2) int_0^{1/delta} s^gamma B(s^2)/s^{q+1} ds on a finite,
    // smooth domain.
    double ball_tail(double delta) const {
        const int g = case_.gamma();
        auto integrand = [&](double s) { return std::pow(s, g) * scaled_beta(s); };
        const double integral = quad::integrate(integrand, 0.0, 1.0 / delta, {0.0, 1e-12, 4000});
        return 0.5 * case_.codim() * k_ * integral;
    }

    // E d^alpha for h = 1. The [0,1] piece is closed form; the tail uses
    // s = 1/t and s = w^{1/beta}, beta = gamma - alpha + 1, which turns the
    // s^{gamma-alpha} endpoint singularity into a constant factor 1/beta.
    double ball_moment_unit(double alpha) const {
        const int m = case_.codim();
        const double head = m * p_ / (alpha + m);
        const double beta = case_.gamma() - alpha + 1.0;
        auto integrand = [&](double w) { return scaled_beta(std::pow(w, 1.0 / beta)); };
        const double integral = quad::integrate(integrand, 0.0, 1.0, {1e-13, 1e-12, 4000});
        return head + 0.5 * m * k_ * integral / beta;
    }

    CaseTriple case_;
    Family family_;
    double h_;
    double k_;
    double p_;
    double tail_from_one_ = 0.0;
};

/// Density f_{n,q,gamma}(delta) of d(o, E cap L) for E hitting the unit ball.
inline double density_ball(const CaseTriple& c, double delta) {
    return RadialDensity::ball(c).density(delta);
}

/// Distribution function of d(o, E cap L) for E hitting the unit ball.
inline double cdf_ball(const CaseTriple& c, double delta) { return RadialDensity::ball(c).cdf(delta); }

/// Density g_{n,q,gamma}(r) of d(o, E cap L) for E tangent to the unit sphere.
inline double density_tangent(const CaseTriple& c, double r) {
    return RadialDensity::tangent(c).density(r);
}

/// Tangent density obtained by transforming the Beta((gamma+1)/2, (n-q)/2)
/// density of T = R^{-2}: f_R(r) = f_T(r^{-2}) 2 r^{-3}.
inline double density_tangent_beta_form(const CaseTriple& c, double r) {
    if (!(r >= 0.0)) throw DomainError("density_tangent_beta_form: r must be >= 0");
    if (r <= 1.0 || !std::isfinite(r)) return 0.0;
    const double a = 0.5 * (c.gamma() + 1), b = 0.5 * (c.n() - c.q());
    const double t = 1.0 / (r * r);
    const double log_ft = (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - log_beta(a, b);
    return std::exp(log_ft) * 2.0 / (r * r * r);
}

inline double cdf_tangent(const CaseTriple& c, double r) {
    return RadialDensity::tangent(c).cdf(r);
}

/// E d(o, E cap L)^alpha for the unit-ball family; +infinity unless
/// gamma - q < alpha < gamma + 1.
inline double moment_ball(const CaseTriple& c, double alpha) {
    return RadialDensity::ball(c).moment(alpha);
}

/// E d(o, E cap L)^alpha for the tangent family; +infinity for alpha >= gamma + 1.
/// The mean (gamma >= 1) equals w_{g+1} w_{n-q+g} / (w_g w_{n-q+g+1}). A second
/// closed form, (w_{n-q+g}/w_g)(2 pi)^{-(n-q)}, sometimes quoted for the same
/// mean, disagrees with this one (pi/2 vs 1/2 at (3,2,1)) and is not used.
inline double moment_tangent(const CaseTriple& c, double alpha) {
    return RadialDensity::tangent(c).moment(alpha);
}

/// lim_{n -> inf} E d(o, E cap L) / sqrt(n) in the tangent case:
/// w_{gamma+1} / (w_gamma sqrt(2 pi)).
inline double mean_tangent_limit(int gamma) {
    if (gamma < 1) throw DomainError("mean_tangent_limit: gamma must be >= 1");
    return std::exp(log_omega(gamma + 1) - log_omega(gamma)) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace flatsect
