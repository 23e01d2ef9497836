#pragma once

// Linear subspaces and affine flats of R^n stored as orthonormal frames,
// with the intersection, projection, distance and subspace-determinant
// kernels used by the samplers and the Monte Carlo harness.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flatsect/errors.hpp"

namespace flatsect {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance used when none is given.
inline constexpr double kRankTolerance = 1e-9;
/// Frames whose Gram matrix deviates from the identity by more than this are rejected.
inline constexpr double kFrameTolerance = 1e-10;

class LinearSubspace {
public:
    /// Wraps an n x k matrix whose columns are already orthonormal.
    static LinearSubspace from_orthonormal(Matrix frame) {
        LinearSubspace s(std::move(frame));
        if (s.orthonormality_defect() > kFrameTolerance) {
            throw DomainError("LinearSubspace: frame columns are not orthonormal");
        }
        return s;
    }

    static LinearSubspace zero(int n) { return LinearSubspace(Matrix(n, 0)); }
    static LinearSubspace full(int n) { return LinearSubspace(Matrix::Identity(n, n)); }
    /// span{e_1, ..., e_k}.
    static LinearSubspace coordinate(int n, int k) {
        if (k < 0 || k > n) throw DomainError("LinearSubspace::coordinate: need 0 <= k <= n");
        return LinearSubspace(Matrix::Identity(n, k));
    }

    int ambient_dim() const noexcept { return static_cast<int>(frame_.rows()); }
    int dim() const noexcept { return static_cast<int>(frame_.cols()); }
    const Matrix& frame() const noexcept { return frame_; }

    /// Frobenius norm of frame^T frame - I.
    double orthonormality_defect() const {
        if (dim() == 0) return 0.0;
        return (frame_.transpose() * frame_ - Matrix::Identity(dim(), dim())).norm();
    }

    Matrix projector() const { return frame_ * frame_.transpose(); }

    /// Image under an orthogonal map of R^n.
    LinearSubspace transformed(const Matrix& rotation) const {
        return LinearSubspace(rotation * frame_);
    }

private:
    explicit LinearSubspace(Matrix frame) : frame_(std::move(frame)) {}
    Matrix frame_;

    friend LinearSubspace orthonormalize(const Matrix&, double);
    friend LinearSubspace complement(const LinearSubspace&);
    friend LinearSubspace intersect_linear(const LinearSubspace&, const LinearSubspace&, double);
    friend LinearSubspace direct_sum_orthogonal(const LinearSubspace&, const Matrix&);
};

/// Orthonormal frame for the column span; columns whose pivot falls below
/// tol * (largest column norm) are treated as dependent.
inline LinearSubspace orthonormalize(const Matrix& columns, double tol = kRankTolerance) {
    const auto n = columns.rows();
    if (columns.cols() == 0) return LinearSubspace(Matrix(n, 0));
    Eigen::ColPivHouseholderQR<Matrix> qr;
    qr.setThreshold(tol);
    qr.compute(columns);
    const auto rank = qr.rank();
    Matrix q = qr.householderQ();
    return LinearSubspace(q.leftCols(rank));
}

/// Orthogonal complement L^perp.
inline LinearSubspace complement(const LinearSubspace& l) {
    const int n = l.ambient_dim();
    const int k = l.dim();
    if (k == 0) return LinearSubspace(Matrix::Identity(n, n));
    if (k == n) return LinearSubspace(Matrix(n, 0));
    Eigen::HouseholderQR<Matrix> qr(l.frame());
    Matrix q = qr.householderQ();
    return LinearSubspace(q.rightCols(n - k));
}

/// L0 + span(extra) where the columns of `extra` are orthonormal and orthogonal to L0.
inline LinearSubspace direct_sum_orthogonal(const LinearSubspace& l0, const Matrix& extra) {
    Matrix frame(l0.ambient_dim(), l0.dim() + extra.cols());
    frame << l0.frame(), extra;
    return LinearSubspace(std::move(frame));
}

/// Orthogonal projection x|L.
inline Vector project(const Vector& x, const LinearSubspace& l) {
    if (x.size() != l.ambient_dim()) throw DomainError("project: dimension mismatch");
    return l.frame() * (l.frame().transpose() * x);
}

/// Affine flat E = lin(E) + foot, with foot the point of E closest to the origin.
class AffineFlat {
public:
    AffineFlat(LinearSubspace direction, Vector foot)
        : direction_(std::move(direction)), foot_(std::move(foot)) {
        if (foot_.size() != direction_.ambient_dim()) {
            throw DomainError("AffineFlat: foot has the wrong dimension");
        }
        const double scale = std::max(1.0, foot_.norm());
        if (direction_.dim() > 0 &&
            (direction_.frame().transpose() * foot_).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw DomainError("AffineFlat: foot is not orthogonal to the direction space");
        }
    }

    /// The flat direction + point, for an arbitrary point on it.
    static AffineFlat through(const LinearSubspace& direction, const Vector& point) {
        return AffineFlat(direction, point - project(point, direction));
    }

    static AffineFlat linear(const LinearSubspace& l) {
        return AffineFlat(l, Vector::Zero(l.ambient_dim()));
    }

    const LinearSubspace& direction() const noexcept { return direction_; }
    const Vector& foot() const noexcept { return foot_; }
    int dim() const noexcept { return direction_.dim(); }
    int ambient_dim() const noexcept { return direction_.ambient_dim(); }

    /// Distance from x to the flat.
    double residual(const Vector& x) const {
        const Vector d = x - foot_;
        return (d - project(d, direction_)).norm();
    }

private:
    LinearSubspace direction_;
    Vector foot_;
};

/// d(o, E) = |foot|.
inline double distance_to_origin(const AffineFlat& e) { return e.foot().norm(); }

namespace detail {

inline Matrix stacked_complement_projectors(const LinearSubspace& a, const LinearSubspace& b) {
    const int n = a.ambient_dim();
    Matrix s(2 * n, n);
    s.topRows(n) = Matrix::Identity(n, n) - a.projector();
    s.bottomRows(n) = Matrix::Identity(n, n) - b.projector();
    return s;
}

inline double rank_threshold(const Matrix& s, double tol) {
    return tol * s.colwise().norm().maxCoeff();
}

}  // namespace detail

/// L1 cap L2, computed as the null space of [P_{L1^perp}; P_{L2^perp}].
inline LinearSubspace intersect_linear(const LinearSubspace& l1, const LinearSubspace& l2,
                                       double tol = kRankTolerance) {
    if (l1.ambient_dim() != l2.ambient_dim()) {
        throw DomainError("intersect_linear: ambient dimensions differ");
    }
    const int n = l1.ambient_dim();
    const Matrix s = detail::stacked_complement_projectors(l1, l2);
    Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullV);
    const double threshold = detail::rank_threshold(s, tol);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < n && sv[rank] > threshold) ++rank;
    return LinearSubspace(svd.matrixV().rightCols(n - rank));
}

/// E1 cap E2 for affine flats. Solves [P_{lin E1^perp}; P_{lin E2^perp}] x =
/// [foot1; foot2] by least squares and returns the minimum-norm solution as
/// the foot of the intersection.
/// Throws EmptyIntersection when the system is inconsistent and
/// DegenerateConfiguration when the intersection dimension is not
/// dim E1 + dim E2 - n.
inline AffineFlat intersect_affine(const AffineFlat& e1, const AffineFlat& e2,
                                   double tol = kRankTolerance) {
    if (e1.ambient_dim() != e2.ambient_dim()) {
        throw DomainError("intersect_affine: ambient dimensions differ");
    }
    const int n = e1.ambient_dim();
    const Matrix s = detail::stacked_complement_projectors(e1.direction(), e2.direction());
    Vector rhs(2 * n);
    rhs << e1.foot(), e2.foot();

    Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const double threshold = detail::rank_threshold(s, tol);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < n && sv[rank] > threshold) ++rank;

    const Vector coeffs = (svd.matrixU().leftCols(rank).transpose() * rhs).cwiseQuotient(
        sv.head(rank));
    const Vector x = svd.matrixV().leftCols(rank) * coeffs;
    if ((s * x - rhs).norm() > 1e-7 * (1.0 + rhs.norm())) {
        throw EmptyIntersection("intersect_affine: flats do not meet");
    }
    const int generic = e1.dim() + e2.dim() - n;
    if (n - rank != generic) {
        throw DegenerateConfiguration("intersect_affine: intersection has dimension " +
                                      std::to_string(n - rank) + ", generic dimension is " +
                                      std::to_string(generic));
    }
    LinearSubspace direction = LinearSubspace::from_orthonormal(svd.matrixV().rightCols(n - rank));
    return AffineFlat::through(direction, x);
}

inline AffineFlat intersect_affine_linear(const AffineFlat& e, const LinearSubspace& l,
                                          double tol = kRankTolerance) {
    return intersect_affine(e, AffineFlat::linear(l), tol);
}

/// d(o, E cap L) from a frame `normal` of lin(E)^perp. Points of L are F y
/// with F the frame of L; F y lies in E iff N^T F y = N^T foot, and the
/// minimum-norm solution y has |y| = d(o, E cap L). Same exceptions as
/// intersect_affine.
inline double intersection_distance(const AffineFlat& e, const Matrix& normal,
                                    const LinearSubspace& l, double tol = kRankTolerance) {
    const int n = e.ambient_dim();
    if (l.ambient_dim() != n || normal.rows() != n || normal.cols() != n - e.dim()) {
        throw DomainError("intersection_distance: dimension mismatch");
    }
    const int generic = e.dim() + l.dim() - n;
    if (generic < 0) {
        throw DegenerateConfiguration("intersection_distance: dim E + dim L < n");
    }
    const Matrix a = normal.transpose() * l.frame();
    const Vector b = normal.transpose() * e.foot();
    if (a.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    // Entries of a are cosines bounded by 1, so tol is already relative.
    if (sv[sv.size() - 1] <= tol) {
        throw DegenerateConfiguration("intersection_distance: E and L are not in general position");
    }
    const Vector y = svd.matrixV() * (svd.matrixU().transpose() * b).cwiseQuotient(sv);
    return y.norm();
}

/// [L, M] for dim L + dim M <= n: volume of the parallelepiped spanned by
/// the two frames, sqrt(det Gram).
inline double subspace_determinant_gram(const LinearSubspace& l, const LinearSubspace& m) {
    const int n = l.ambient_dim();
    if (m.ambient_dim() != n) throw DomainError("subspace_determinant: ambient dimensions differ");
    if (l.dim() + m.dim() > n) {
        throw DomainError("subspace_determinant_gram: requires dim L + dim M <= n");
    }
    if (l.dim() + m.dim() == 0) return 1.0;
    Matrix c(n, l.dim() + m.dim());
    c << l.frame(), m.frame();
    const Matrix gram = c.transpose() * c;
    const double det = gram.partialPivLu().determinant();
    return std::clamp(std::sqrt(std::max(det, 0.0)), 0.0, 1.0);
}

/// Subspace determinant [L, M]; for dim L + dim M >= n it is [L^perp, M^perp].
inline double subspace_determinant(const LinearSubspace& l, const LinearSubspace& m) {
    if (l.ambient_dim() != m.ambient_dim()) {
        throw DomainError("subspace_determinant: ambient dimensions differ");
    }
    if (l.dim() + m.dim() <= l.ambient_dim()) return subspace_determinant_gram(l, m);
    return subspace_determinant_gram(complement(l), complement(m));
}

/// Principal angles in [0, pi/2], largest first; min(dim L1, dim L2) entries.
/// Small angles come from the sines, large ones from the cosines.
inline std::vector<double> principal_angles(const LinearSubspace& l1, const LinearSubspace& l2) {
    if (l1.ambient_dim() != l2.ambient_dim()) {
        throw DomainError("principal_angles: ambient dimensions differ");
    }
    const LinearSubspace& big = l1.dim() >= l2.dim() ? l1 : l2;
    const LinearSubspace& small = l1.dim() >= l2.dim() ? l2 : l1;
    const int k = small.dim();
    if (k == 0) return {};

    const Matrix cross = big.frame().transpose() * small.frame();
    const Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();
    const Matrix residual = small.frame() - big.frame() * cross;
    const Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();

    std::vector<double> angles(k);
    for (int i = 0; i < k; ++i) {
        // cosines descend, sines descend: the i-th largest cosine pairs with
        // the i-th smallest sine.
        const double c = std::clamp(cosines[i], 0.0, 1.0);
        const double s = std::clamp(sines[k - 1 - i], 0.0, 1.0);
        angles[i] = c > std::sqrt(0.5) ? std::asin(s) : std::acos(c);
    }
    std::reverse(angles.begin(), angles.end());
    return angles;
}

}  // namespace flatsect
