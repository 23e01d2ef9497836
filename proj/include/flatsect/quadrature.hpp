#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "flatsect/errors.hpp"

namespace flatsect::quad {

struct Tolerance {
    double abs = 1e-12;
    double rel = 1e-12;
    std::size_t max_intervals = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the Kronrod nodes with odd index (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b]. Bisects the segment with the largest error
/// estimate until the summed estimate meets max(tol.abs, tol.rel * |I|).
/// The integrand is never evaluated at the endpoints.
template <class F>
Result integrate_detailed(F&& f, double a, double b, const Tolerance& tol = {}) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("quad::integrate: limits must be finite");
    }
    if (a == b) return {0.0, 0.0, 0, true};
    const double sign = b < a ? -1.0 : 1.0;
    if (b < a) std::swap(a, b);

    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gauss_kronrod_15(f, a, b));
    double total = heap.top().value;
    double error = heap.top().error;
    while (error > std::max(tol.abs, tol.rel * std::abs(total)) &&
           heap.size() < tol.max_intervals) {
        const detail::Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the cancellation accumulated by incremental updates.
    double value = 0.0, err = 0.0;
    const std::size_t count = heap.size();
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    const bool ok = err <= std::max(tol.abs, tol.rel * std::abs(value));
    return {sign * value, err, count, ok};
}

template <class F>
double integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
    return integrate_detailed(std::forward<F>(f), a, b, tol).value;
}

/// Integrates over consecutive breakpoints x[0] < x[1] < ... < x[k].
template <class F>
double integrate_piecewise(F&& f, const std::vector<double>& breakpoints,
                           const Tolerance& tol = {}) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        sum += integrate(f, breakpoints[i], breakpoints[i + 1], tol);
    }
    return sum;
}

}  // namespace flatsect::quad
