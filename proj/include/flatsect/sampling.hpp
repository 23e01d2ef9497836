#pragma once

// Samplers for the invariant distributions: Haar rotations, uniform
// Grassmannians, ball-restricted and sphere-tangent affine flats, and the
// relative Grassmannian of subspaces containing a fixed subspace.

#include <cmath>

#include <Eigen/Dense>

#include "flatsect/errors.hpp"
#include "flatsect/random.hpp"
#include "flatsect/subspaces.hpp"

namespace flatsect {

/// n x k matrix of independent standard normals, filled column by column.
inline Matrix gaussian_matrix(int n, int k, RandomStream& rng) {
    Matrix g(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    return g;
}

inline Vector gaussian_vector(int n, RandomStream& rng) {
    Vector g(n);
    for (int i = 0; i < n; ++i) g[i] = rng.normal();
    return g;
}

/// Haar-distributed element of SO(n).
inline Matrix sample_rotation(int n, RandomStream& rng) {
    if (n < 1) throw DomainError("sample_rotation: n must be >= 1");
    const Matrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    // Without this sign correction the QR factor is not Haar distributed.
    for (int j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

/// Uniform (rotation invariant) random element of G(n, k).
inline LinearSubspace sample_grassmannian(int n, int k, RandomStream& rng) {
    if (n < 1 || k < 0 || k > n) throw DomainError("sample_grassmannian: need 0 <= k <= n");
    if (k == 0) return LinearSubspace::zero(n);
    if (k == n) return LinearSubspace::full(n);
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, k, rng));
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    return LinearSubspace::from_orthonormal(std::move(q));
}

/// Uniform point on S^{d-1}.
inline Vector sample_unit_sphere(int d, RandomStream& rng) {
    if (d < 1) throw DomainError("sample_unit_sphere: d must be >= 1");
    for (;;) {
        Vector g = gaussian_vector(d, rng);
        const double norm = g.norm();
        if (norm > 0.0) return g / norm;
    }
}

/// Uniform point in the ball of the given radius in R^d.
inline Vector sample_ball_uniform(int d, double radius, RandomStream& rng) {
    if (!(radius > 0.0)) throw DomainError("sample_ball_uniform: radius must be positive");
    Vector dir = sample_unit_sphere(d, rng);
    return dir * (radius * std::pow(rng.uniform(), 1.0 / d));
}

/// An affine flat together with an orthonormal frame of lin(E)^perp, the
/// form consumed by intersection_distance.
struct SampledFlat {
    AffineFlat flat;
    Matrix normal;
};

namespace detail {

// Haar rotation split as lin(E) = first k columns, lin(E)^perp = the rest;
// the foot direction is a uniform unit vector in the span of the rest.
inline SampledFlat sample_flat_at_distance(int n, int k, double distance, RandomStream& rng) {
    const Matrix q = sample_rotation(n, rng);
    const Vector s = sample_unit_sphere(n - k, rng);
    Matrix normal = q.rightCols(n - k);
    Vector foot = normal * (s * distance);
    return {AffineFlat(LinearSubspace::from_orthonormal(q.leftCols(k)), std::move(foot)),
            std::move(normal)};
}

}  // namespace detail

/// Invariant k-flat conditioned to hit the centered ball of radius h:
/// direction M ~ nu_k, foot uniform in the radius-h ball of M^perp.
inline SampledFlat sample_affine_hitting_ball_framed(int n, int k, double h, RandomStream& rng) {
    if (k < 0 || k > n - 1) throw DomainError("sample_affine_hitting_ball: need 0 <= k <= n-1");
    if (!(h > 0.0)) throw DomainError("sample_affine_hitting_ball: h must be positive");
    const double radius = h * std::pow(rng.uniform(), 1.0 / (n - k));
    return detail::sample_flat_at_distance(n, k, radius, rng);
}

inline AffineFlat sample_affine_hitting_ball(int n, int k, double h, RandomStream& rng) {
    return sample_affine_hitting_ball_framed(n, k, h, rng).flat;
}

/// Invariant k-flat tangent to S^{n-1}: M ~ nu_k, u uniform on S^{n-1} cap M^perp, E = M + u.
inline SampledFlat sample_affine_tangent_framed(int n, int k, RandomStream& rng) {
    if (k < 1 || k > n - 1) throw DomainError("sample_affine_tangent: need 1 <= k <= n-1");
    return detail::sample_flat_at_distance(n, k, 1.0, rng);
}

inline AffineFlat sample_affine_tangent(int n, int k, RandomStream& rng) {
    return sample_affine_tangent_framed(n, k, rng).flat;
}

/// Invariant random p-subspace containing l0: l0 plus a uniform
/// (p - dim l0)-subspace of l0^perp.
inline LinearSubspace sample_containing(const LinearSubspace& l0, int p, RandomStream& rng) {
    const int n = l0.ambient_dim();
    const int base = l0.dim();
    if (p < base || p > n) throw DomainError("sample_containing: need dim L0 <= p <= n");
    if (p == base) return l0;
    if (p == n) return LinearSubspace::full(n);
    const LinearSubspace perp = complement(l0);
    const Matrix coords = gaussian_matrix(n - base, p - base, rng);
    Eigen::HouseholderQR<Matrix> qr(perp.frame() * coords);
    const Matrix extra = qr.householderQ() * Matrix::Identity(n, p - base);
    return direct_sum_orthogonal(l0, extra);
}

}  // namespace flatsect
