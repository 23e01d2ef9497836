#pragma once

// Monte Carlo harness. Each estimator draws pairs (L, E) from the invariant
// laws, reduces chunk results in a fixed order and compares against the
// closed forms of specfun/densities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "flatsect/densities.hpp"
#include "flatsect/errors.hpp"
#include "flatsect/parallel.hpp"
#include "flatsect/random.hpp"
#include "flatsect/sampling.hpp"
#include "flatsect/specfun.hpp"
#include "flatsect/stats.hpp"
#include "flatsect/subspaces.hpp"

namespace flatsect {

/// Allowed fraction of degenerate draws.
inline constexpr double kDegeneracyBudget = 1e-4;

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::int64_t rejected = 0;
};

/// Monte Carlo estimate paired with its exact value; passes within 3 standard errors.
struct PairedCheck {
    MCEstimate lhs;
    double rhs = 0.0;
    bool pass = false;
};

inline bool within_three_sigma(const MCEstimate& e, double target) {
    return std::abs(e.value - target) <= 3.0 * e.std_error + 1e-12;
}

inline PairedCheck make_paired(const MCEstimate& e, double target) {
    return {e, target, within_three_sigma(e, target)};
}

// ---------------------------------------------------------------------------
// Families of the random flat E
// ---------------------------------------------------------------------------

/// E hits the centered ball of radius h, L uniform.
struct BallRestricted {
    double h = 1.0;
};
/// E tangent to the unit sphere, L uniform.
struct Tangent {};
/// E hits the centered ball of radius h, L = l0 fixed.
struct FixedSubspace {
    LinearSubspace l0;
    double h = 1.0;
};

using Family = std::variant<BallRestricted, Tangent, FixedSubspace>;

/// The radial law shared by all members of a family.
inline RadialDensity family_law(const CaseTriple& c, const Family& family) {
    if (std::holds_alternative<Tangent>(family)) return RadialDensity::tangent(c);
    if (const auto* b = std::get_if<BallRestricted>(&family)) return RadialDensity::ball(c, b->h);
    return RadialDensity::ball(c, std::get<FixedSubspace>(family).h);
}

namespace detail {

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t count = 0;
    std::int64_t rejected = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        count += o.count;
        rejected += o.rejected;
    }
};

inline MCEstimate to_estimate(const Accumulator& acc, std::uint64_t seed) {
    MCEstimate e;
    e.n_samples = acc.count;
    e.seed = seed;
    e.rejected = acc.rejected;
    if (acc.count == 0) return e;
    const double n = static_cast<double>(acc.count);
    e.value = acc.sum / n;
    if (acc.count > 1) {
        const double var = std::max(0.0, (acc.sum_sq - acc.sum * acc.sum / n) / (n - 1.0));
        e.std_error = std::sqrt(var / n);
    }
    return e;
}

inline double rejection_cap(std::int64_t n_samples) {
    return kDegeneracyBudget * static_cast<double>(n_samples);
}

inline void check_budget(std::int64_t rejected, std::int64_t n_samples) {
    if (static_cast<double>(rejected) > rejection_cap(n_samples)) {
        throw HarnessError("degeneracy budget exceeded: " + std::to_string(rejected) +
                           " degenerate draws out of " + std::to_string(n_samples));
    }
}

inline void check_samples(std::int64_t n_samples) {
    if (n_samples < 1) throw DomainError("n_samples must be >= 1");
}

/// One draw of (d(o, E cap L), d(o, E)) for the family.
inline std::pair<double, double> draw_distance(const CaseTriple& c, const Family& family,
                                               RandomStream& rng) {
    const int n = c.n(), k = c.affine_dim();
    if (const auto* f = std::get_if<FixedSubspace>(&family)) {
        const SampledFlat e = sample_affine_hitting_ball_framed(n, k, f->h, rng);
        return {intersection_distance(e.flat, e.normal, f->l0), distance_to_origin(e.flat)};
    }
    const LinearSubspace l = sample_grassmannian(n, c.q(), rng);
    const SampledFlat e = std::holds_alternative<Tangent>(family)
                              ? sample_affine_tangent_framed(n, k, rng)
                              : sample_affine_hitting_ball_framed(
                                    n, k, std::get<BallRestricted>(family).h, rng);
    return {intersection_distance(e.flat, e.normal, l), distance_to_origin(e.flat)};
}

inline void check_family(const CaseTriple& c, const Family& family) {
    if (const auto* f = std::get_if<FixedSubspace>(&family)) {
        if (f->l0.ambient_dim() != c.n() || f->l0.dim() != c.q()) {
            throw DomainError("FixedSubspace: L0 must be a q-dimensional subspace of R^n");
        }
        if (!(f->h > 0.0)) throw DomainError("FixedSubspace: h must be positive");
    }
    if (const auto* b = std::get_if<BallRestricted>(&family)) {
        if (!(b->h > 0.0)) throw DomainError("BallRestricted: h must be positive");
    }
}

/// Runs draw() until `count` non-degenerate draws were made; draw() returns
/// false on a degenerate configuration. Aborts once the run-wide budget is spent.
template <class Draw>
std::int64_t draw_with_budget(std::int64_t count, std::int64_t n_samples, Draw&& draw) {
    std::int64_t rejected = 0;
    for (std::int64_t got = 0; got < count;) {
        if (draw()) {
            ++got;
        } else {
            ++rejected;
            check_budget(rejected, n_samples);
        }
    }
    return rejected;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distance samples
// ---------------------------------------------------------------------------

struct DistanceSample {
    std::vector<double> values;
    std::int64_t rejected = 0;
    /// Draws with d(o, E cap L) < d(o, E), which must never happen.
    std::int64_t monotonicity_violations = 0;
};

/// n_samples values of d(o, E cap L) for the family. Degenerate draws are
/// discarded and redrawn within the degeneracy budget.
inline DistanceSample sample_intersection_distances(const CaseTriple& c, const Family& family,
                                                    std::int64_t n_samples, const RandomStream& rng,
                                                    const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    detail::check_family(c, family);
    auto chunks = run_chunked(n_samples, rng, par,
                              [&](int, std::int64_t count, RandomStream& stream) {
        DistanceSample part;
        part.values.reserve(static_cast<std::size_t>(count));
        part.rejected = detail::draw_with_budget(count, n_samples, [&] {
            try {
                const auto [d, flat_d] = detail::draw_distance(c, family, stream);
                if (d < flat_d * (1.0 - 1e-9) - 1e-12) ++part.monotonicity_violations;
                part.values.push_back(d);
                return true;
            } catch (const GeometryError&) {
                return false;
            }
        });
        return part;
    });
    DistanceSample out;
    out.values.reserve(static_cast<std::size_t>(n_samples));
    for (auto& part : chunks) {
        out.values.insert(out.values.end(), part.values.begin(), part.values.end());
        out.rejected += part.rejected;
        out.monotonicity_violations += part.monotonicity_violations;
    }
    detail::check_budget(out.rejected, n_samples);
    return out;
}

/// Exact draws from the radial law by the scale mixture
/// d = h T^{-1/2} V^{1/(q-gamma)} (ball) or d = T^{-1/2} (tangent), with
/// T ~ Beta((gamma+1)/2, (n-q)/2) and V uniform. Used to calibrate the KS
/// validators on data that follow the oracle law exactly.
inline double sample_radial_law(const RadialDensity& law, RandomStream& rng) {
    const double t = rng.beta(law.beta_a(), law.beta_b());
    const double r = 1.0 / std::sqrt(t);
    if (law.family() == RadialDensity::Family::Tangent) return r;
    const double v = rng.uniform_open();
    return law.radius() * r * std::pow(v, 1.0 / law.case_triple().codim());
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// P[E cap L meets B^n] for E hitting the unit ball.
inline MCEstimate estimate_hit_probability(const CaseTriple& c, std::int64_t n_samples,
                                           const RandomStream& rng, const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    const Family family = BallRestricted{1.0};
    auto chunks = run_chunked(n_samples, rng, par,
                              [&](int, std::int64_t count, RandomStream& stream) {
        detail::Accumulator acc;
        acc.rejected = detail::draw_with_budget(count, n_samples, [&] {
            try {
                acc.add(detail::draw_distance(c, family, stream).first <= 1.0 ? 1.0 : 0.0);
                return true;
            } catch (const GeometryError&) {
                return false;
            }
        });
        return acc;
    });
    detail::Accumulator total;
    for (const auto& a : chunks) total.merge(a);
    detail::check_budget(total.rejected, n_samples);
    MCEstimate e = detail::to_estimate(total, rng.seed());
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(e.n_samples));
    return e;
}

/// Whether the sample mean of d^alpha has finite variance for the family,
/// i.e. 2 alpha lies strictly inside the finiteness window.
inline bool moment_estimable(const RadialDensity& law, double alpha) {
    return law.moment_window().contains(2.0 * alpha);
}

/// Sample mean of d(o, E cap L)^alpha. Refused (DomainError) when the
/// estimator has infinite variance; the exact value is then available from
/// RadialDensity::moment.
inline MCEstimate estimate_moment(const CaseTriple& c, const Family& family, double alpha,
                                  std::int64_t n_samples, const RandomStream& rng,
                                  const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    detail::check_family(c, family);
    const RadialDensity law = family_law(c, family);
    if (!moment_estimable(law, alpha)) {
        const auto w = law.moment_window();
        throw DomainError("estimate_moment: refused, d^alpha has infinite variance (2 alpha = " +
                          std::to_string(2.0 * alpha) + " outside (" + std::to_string(w.lo) +
                          ", " + std::to_string(w.hi) +
                          ")); use the quadrature moment instead");
    }
    auto chunks = run_chunked(n_samples, rng, par,
                              [&](int, std::int64_t count, RandomStream& stream) {
        detail::Accumulator acc;
        acc.rejected = detail::draw_with_budget(count, n_samples, [&] {
            try {
                acc.add(std::pow(detail::draw_distance(c, family, stream).first, alpha));
                return true;
            } catch (const GeometryError&) {
                return false;
            }
        });
        return acc;
    });
    detail::Accumulator total;
    for (const auto& a : chunks) total.merge(a);
    detail::check_budget(total.rejected, n_samples);
    return detail::to_estimate(total, rng.seed());
}

// ---------------------------------------------------------------------------
// Validators
// ---------------------------------------------------------------------------

/// KS test of sampled distances against the radial law of the family.
inline GoodnessOfFitReport validate_distance_law(const CaseTriple& c, const Family& family,
                                                 std::int64_t n_samples, const RandomStream& rng,
                                                 double alpha = 0.01,
                                                 const Parallelism& par = {}) {
    const RadialDensity law = family_law(c, family);
    DistanceSample s = sample_intersection_distances(c, family, n_samples, rng, par);
    return ks_test(std::move(s.values), [&](double x) { return law.cdf(x); }, alpha);
}

/// KS test of R^{-2}, R the tangent-family distance, against Beta((gamma+1)/2, (n-q)/2).
inline GoodnessOfFitReport validate_tangent_beta(const CaseTriple& c, std::int64_t n_samples,
                                                 const RandomStream& rng, double alpha = 0.01,
                                                 const Parallelism& par = {}) {
    DistanceSample s = sample_intersection_distances(c, Tangent{}, n_samples, rng, par);
    for (double& r : s.values) r = 1.0 / (r * r);
    const double a = 0.5 * (c.gamma() + 1), b = 0.5 * (c.n() - c.q());
    return ks_test(std::move(s.values),
                   [&](double t) {
                       if (t <= 0.0) return 0.0;
                       if (t >= 1.0) return 1.0;
                       return beta_regularized(t, a, b);
                   },
                   alpha);
}

struct FixedSubspaceReport {
    GoodnessOfFitReport gof;
    /// Fraction of draws with d(o, E cap L0) <= h.
    double hit_fraction = 0.0;
    /// Largest distance from a point of E cap L0 to L0 over the containment probe.
    double max_containment_residual = 0.0;
    std::int64_t rejected = 0;
};

/// With L = l0 fixed and E hitting the ball of radius h (H = BallIndicator(h)),
/// d(o, E cap l0) follows the same law as for uniform L.
inline FixedSubspaceReport validate_fixed_subspace_theorem(
    const CaseTriple& c, const LinearSubspace& l0, const WeightProfile& h, std::int64_t n_samples,
    const RandomStream& rng, double alpha = 0.01, const Parallelism& par = {},
    std::int64_t containment_probe = 1000) {
    if (h.kind() != WeightProfile::Kind::BallIndicator) {
        throw DomainError("validate_fixed_subspace_theorem: requires a BallIndicator profile");
    }
    const double radius = h.support_radius();
    const Family family = FixedSubspace{l0, radius};
    detail::check_family(c, family);
    const RadialDensity law = family_law(c, family);

    DistanceSample s = sample_intersection_distances(c, family, n_samples, rng, par);
    FixedSubspaceReport r;
    r.rejected = s.rejected;
    r.hit_fraction =
        static_cast<double>(std::count_if(s.values.begin(), s.values.end(),
                                          [&](double d) { return d <= radius; })) /
        static_cast<double>(s.values.size());
    r.gof = ks_test(std::move(s.values), [&](double x) { return law.cdf(x); }, alpha);

    // Full intersections on a separate stream: every E cap l0 must lie in l0.
    RandomStream probe = rng.substream(0xC0FFEEull);
    const LinearSubspace l0_perp = complement(l0);
    for (std::int64_t i = 0; i < containment_probe; ++i) {
        const AffineFlat e = sample_affine_hitting_ball(c.n(), c.affine_dim(), radius, probe);
        try {
            const AffineFlat x = intersect_affine_linear(e, l0);
            double res = (l0_perp.frame().transpose() * x.foot()).norm();
            if (x.dim() > 0) {
                res = std::max(res, (l0_perp.frame().transpose() * x.direction().frame()).norm());
            }
            r.max_containment_residual = std::max(r.max_containment_residual, res);
        } catch (const GeometryError&) {
        }
    }
    return r;
}

/// Integral of [L, M]^alpha over the q-subspaces L containing u, against
/// axis_moment_constant(n, p, q, alpha) [u, M]^alpha.
inline PairedCheck validate_lemma_axis_moment(int n, int p, int q, double alpha, const Vector& u,
                                              const LinearSubspace& m, std::int64_t n_samples,
                                              const RandomStream& rng,
                                              const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    if (p < 1 || q < 1 || p + q > n) throw DomainError("validate_lemma_axis_moment: need p + q <= n");
    if (u.size() != n || std::abs(u.norm() - 1.0) > 1e-10) {
        throw DomainError("validate_lemma_axis_moment: u must be a unit vector of R^n");
    }
    if (m.ambient_dim() != n || m.dim() != p) {
        throw DomainError("validate_lemma_axis_moment: M must be a p-subspace of R^n");
    }
    const LinearSubspace axis = LinearSubspace::from_orthonormal(Matrix(u));
    auto chunks = run_chunked(n_samples, rng, par,
                              [&](int, std::int64_t count, RandomStream& stream) {
        detail::Accumulator acc;
        for (std::int64_t i = 0; i < count; ++i) {
            const LinearSubspace l = sample_containing(axis, q, stream);
            acc.add(std::pow(subspace_determinant(l, m), alpha));
        }
        return acc;
    });
    detail::Accumulator total;
    for (const auto& a : chunks) total.merge(a);
    const double target =
        axis_moment_constant(n, p, q, alpha) * std::pow(subspace_determinant(axis, m), alpha);
    return make_paired(detail::to_estimate(total, rng.seed()), target);
}

/// Both sides of the transformation formula for f = 1{d(o, .) <= delta}:
///   int int 1{d(o, E cap L) <= delta} H(E) mu_{n-q+gamma}(dE) nu_q(dL)
///     = D(n,q,gamma) w_{n-gamma} int_0^delta r^{q-gamma-1} J_H(r) dr.
/// Since d(o, E cap L) >= d(o, E), only flats within R = min(support H,
/// max delta) of the origin contribute; E is drawn uniformly from those
/// (total measure kappa_{q-gamma} R^{q-gamma}) and weighted by H_I(d(o, E)).
inline std::vector<PairedCheck> validate_theorem_general(const CaseTriple& c,
                                                         const WeightProfile& h,
                                                         const std::vector<double>& delta_grid,
                                                         std::int64_t n_samples,
                                                         const RandomStream& rng,
                                                         const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    if (delta_grid.empty()) throw DomainError("validate_theorem_general: empty delta grid");
    for (double d : delta_grid) {
        if (!(d >= 0.0)) throw DomainError("validate_theorem_general: delta must be >= 0");
    }
    const double max_delta = *std::max_element(delta_grid.begin(), delta_grid.end());
    const double radius = std::min(h.support_radius(), max_delta);
    if (!std::isfinite(radius)) {
        throw DomainError(
            "validate_theorem_general: both sides are infinite unless the test function or H "
            "has bounded support; use a finite delta grid");
    }
    const int m = c.codim();
    const std::size_t k = delta_grid.size();

    std::vector<PairedCheck> out(k);
    if (!(radius > 0.0)) {
        for (std::size_t j = 0; j < k; ++j) {
            out[j] = make_paired(MCEstimate{0.0, 0.0, n_samples, rng.seed(), 0}, 0.0);
        }
        return out;
    }
    const double mass = kappa(m) * std::pow(radius, m);

    auto chunks = run_chunked(n_samples, rng, par,
                              [&](int, std::int64_t count, RandomStream& stream) {
        std::vector<detail::Accumulator> acc(k);
        const std::int64_t rejected = detail::draw_with_budget(count, n_samples, [&] {
            const LinearSubspace l = sample_grassmannian(c.n(), c.q(), stream);
            const SampledFlat e =
                sample_affine_hitting_ball_framed(c.n(), c.affine_dim(), radius, stream);
            double d;
            try {
                d = intersection_distance(e.flat, e.normal, l);
            } catch (const GeometryError&) {
                return false;
            }
            const double w = h(distance_to_origin(e.flat));
            for (std::size_t j = 0; j < k; ++j) {
                acc[j].add(d <= delta_grid[j] ? mass * w : 0.0);
            }
            return true;
        });
        acc[0].rejected = rejected;
        return acc;
    });
    std::vector<detail::Accumulator> total(k);
    std::int64_t rejected = 0;
    for (const auto& part : chunks) {
        for (std::size_t j = 0; j < k; ++j) total[j].merge(part[j]);
        rejected += part[0].rejected;
    }
    detail::check_budget(rejected, n_samples);
    for (std::size_t j = 0; j < k; ++j) {
        MCEstimate e = detail::to_estimate(total[j], rng.seed());
        e.rejected = rejected;
        out[j] = make_paired(e, distance_mass(c, h, delta_grid[j]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multiple intersections
// ---------------------------------------------------------------------------

/// l independent uniform linear subspaces of dimensions linear_dims and m
/// independent ball-restricted flats of dimensions flat_dims in R^n.
struct IntersectionPattern {
    int n = 0;
    std::vector<int> linear_dims;
    std::vector<int> flat_dims;

    /// Generic dimension of the intersection of the linear subspaces.
    int q() const {
        return std::accumulate(linear_dims.begin(), linear_dims.end(), 0) -
               (static_cast<int>(linear_dims.size()) - 1) * n;
    }
    /// Generic dimension of the intersection of the flats.
    int flat_intersection_dim() const {
        return std::accumulate(flat_dims.begin(), flat_dims.end(), 0) -
               (static_cast<int>(flat_dims.size()) - 1) * n;
    }
    int gamma() const { return flat_intersection_dim() - n + q(); }

    void validate() const {
        if (n < 2) throw DomainError("IntersectionPattern: n must be >= 2");
        if (linear_dims.empty() || flat_dims.empty()) {
            throw DomainError("IntersectionPattern: need at least one subspace and one flat");
        }
        for (int d : linear_dims) {
            if (d < 1 || d > n - 1) throw DomainError("IntersectionPattern: linear dims in {1..n-1}");
        }
        for (int d : flat_dims) {
            if (d < 0 || d > n - 1) throw DomainError("IntersectionPattern: flat dims in {0..n-1}");
        }
        if (!CaseTriple::is_valid(n, q(), gamma())) {
            throw DomainError(
                "IntersectionPattern: need q = sum q_i - (l-1)n in {1..n-1} and "
                "sum p_j - (m-1)n = n - q + gamma with 0 <= gamma <= q-1");
        }
    }
};

/// Crofton constant c with
///   int ... int H^d(E_1 cap ... cap E_m cap B^n) mu_{p_1}(dE_1) ... mu_{p_m}(dE_m) = c kappa_n,
/// d = sum p_j - (m-1) n: c = w_{n+1}^m w_{d+1} / (w_{p_1+1} ... w_{p_m+1} w_{n+1}).
inline double crofton_constant(int n, const std::vector<int>& flat_dims) {
    const int m = static_cast<int>(flat_dims.size());
    const int d = std::accumulate(flat_dims.begin(), flat_dims.end(), 0) - (m - 1) * n;
    double s = (m - 1) * log_omega(n + 1) + log_omega(d + 1);
    for (int p : flat_dims) s -= log_omega(p + 1);
    return std::exp(s);
}

/// The same constant with w_{p_j} in place of w_{p_j+1}; kept for reporting only.
inline double crofton_constant_unshifted(int n, const std::vector<int>& flat_dims) {
    const int m = static_cast<int>(flat_dims.size());
    const int d = std::accumulate(flat_dims.begin(), flat_dims.end(), 0) - (m - 1) * n;
    double s = (m - 1) * log_omega(n + 1) + log_omega(d + 1);
    for (int p : flat_dims) s -= p == 0 ? 0.0 : log_omega(p);
    return std::exp(s);
}

struct MultipleIntersectionReport {
    int q = 0;
    int gamma = 0;
    /// Two-sample KS: angle to e_1 of the intersection vs of a direct nu_q sample.
    GoodnessOfFitReport uniformity;
    /// Monte Carlo Crofton integral against crofton_constant * kappa_n.
    PairedCheck crofton;
    double crofton_constant = 0.0;
    double crofton_constant_unshifted = 0.0;
    std::int64_t rejected = 0;
};

/// Angle between e_1 and the subspace l.
inline double angle_to_first_axis(const LinearSubspace& l) {
    const double c = std::clamp(l.frame().row(0).norm(), 0.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    return std::atan2(s, c);
}

inline MultipleIntersectionReport validate_multiple_intersections(const IntersectionPattern& pat,
                                                                  std::int64_t n_samples,
                                                                  const RandomStream& rng,
                                                                  double alpha = 0.01,
                                                                  const Parallelism& par = {}) {
    detail::check_samples(n_samples);
    pat.validate();
    const int n = pat.n, q = pat.q();
    MultipleIntersectionReport r;
    r.q = q;
    r.gamma = pat.gamma();

    // (a) uniformity of the intersection of independent uniform subspaces.
    struct AnglePart {
        std::vector<double> intersected, direct;
        std::int64_t rejected = 0;
    };
    auto angle_chunks = run_chunked(n_samples, rng.substream(1), par,
                                    [&](int, std::int64_t count, RandomStream& stream) {
        AnglePart part;
        part.rejected = detail::draw_with_budget(count, n_samples, [&] {
            LinearSubspace x = sample_grassmannian(n, pat.linear_dims[0], stream);
            for (std::size_t i = 1; i < pat.linear_dims.size(); ++i) {
                x = intersect_linear(x, sample_grassmannian(n, pat.linear_dims[i], stream));
            }
            if (x.dim() != q) return false;
            part.intersected.push_back(angle_to_first_axis(x));
            part.direct.push_back(angle_to_first_axis(sample_grassmannian(n, q, stream)));
            return true;
        });
        return part;
    });
    std::vector<double> intersected, direct;
    for (auto& part : angle_chunks) {
        intersected.insert(intersected.end(), part.intersected.begin(), part.intersected.end());
        direct.insert(direct.end(), part.direct.begin(), part.direct.end());
        r.rejected += part.rejected;
    }
    r.uniformity = ks_two_sample(std::move(intersected), std::move(direct), alpha);

    // (b) Crofton integral over ball-restricted flats, un-normalized by the
    // restricted masses kappa_{n-p_j}.
    const int d = pat.flat_intersection_dim();
    double scale = 1.0;
    for (int p : pat.flat_dims) scale *= kappa(n - p);
    auto crofton_chunks = run_chunked(n_samples, rng.substream(2), par,
                                      [&](int, std::int64_t count, RandomStream& stream) {
        detail::Accumulator acc;
        acc.rejected = detail::draw_with_budget(count, n_samples, [&] {
            try {
                AffineFlat x = sample_affine_hitting_ball(n, pat.flat_dims[0], 1.0, stream);
                for (std::size_t j = 1; j < pat.flat_dims.size(); ++j) {
                    x = intersect_affine(x, sample_affine_hitting_ball(n, pat.flat_dims[j], 1.0,
                                                                       stream));
                }
                const double rho = distance_to_origin(x);
                acc.add(rho <= 1.0 ? scale * kappa(d) * std::pow(1.0 - rho * rho, 0.5 * d) : 0.0);
                return true;
            } catch (const GeometryError&) {
                return false;
            }
        });
        return acc;
    });
    detail::Accumulator total;
    for (const auto& a : crofton_chunks) total.merge(a);
    r.rejected += total.rejected;
    detail::check_budget(r.rejected, 2 * n_samples);
    r.crofton_constant = crofton_constant(n, pat.flat_dims);
    r.crofton_constant_unshifted = crofton_constant_unshifted(n, pat.flat_dims);
    r.crofton = make_paired(detail::to_estimate(total, rng.seed()), r.crofton_constant * kappa(n));
    return r;
}

// ---------------------------------------------------------------------------
// KS calibration
// ---------------------------------------------------------------------------

struct CalibrationReport {
    int trials = 0;
    int rejections = 0;
    double rate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
};

inline CalibrationReport make_calibration(int trials, int rejections, double alpha) {
    CalibrationReport r;
    r.trials = trials;
    r.rejections = rejections;
    r.rate = trials > 0 ? static_cast<double>(rejections) / trials : 0.0;
    r.lo = alpha / 3.0;
    r.hi = 3.0 * alpha;
    r.pass = r.rate >= r.lo && r.rate <= r.hi;
    return r;
}

/// Runs `trials` KS tests of `draws` exact samples from `law` against its own
/// CDF; trial t uses rng.substream(t). The rejection rate should be close to alpha.
inline CalibrationReport calibrate_ks(const RadialDensity& law, int trials, std::int64_t draws,
                                      double alpha, const RandomStream& rng) {
    if (trials < 1 || draws < 1) throw DomainError("calibrate_ks: trials and draws must be >= 1");
    int rejections = 0;
    std::vector<double> xs(static_cast<std::size_t>(draws));
    for (int t = 0; t < trials; ++t) {
        RandomStream stream = rng.substream(static_cast<std::uint64_t>(t));
        for (auto& x : xs) x = sample_radial_law(law, stream);
        if (!ks_test(xs, [&](double x) { return law.cdf(x); }, alpha).pass) ++rejections;
    }
    return make_calibration(trials, rejections, alpha);
}

}  // namespace flatsect
