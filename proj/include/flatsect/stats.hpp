#pragma once

// Goodness-of-fit statistics: one- and two-sample Kolmogorov-Smirnov with
// asymptotic critical values, and an equiprobable chi-square test on the
// probability-integral transform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "flatsect/errors.hpp"

namespace flatsect {

struct GoodnessOfFitReport {
    double ks_statistic = 0.0;
    std::int64_t n_samples = 0;
    double critical_value = 0.0;
    bool pass = false;
    double alpha = 0.0;
};

/// c(alpha) with sup|F_n - F| > c(alpha)/sqrt(n) rejecting at level alpha.
/// Tabulated for the usual levels, sqrt(-ln(alpha/2)/2) otherwise.
inline double ks_critical_coefficient(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks: alpha must lie in (0, 1)");
    struct Entry {
        double alpha, c;
    };
    static constexpr Entry table[] = {{0.10, 1.224}, {0.05, 1.358}, {0.025, 1.480},
                                      {0.01, 1.628}, {0.005, 1.731}, {0.001, 1.949}};
    for (const auto& e : table) {
        if (std::abs(alpha - e.alpha) < 1e-12) return e.c;
    }
    return std::sqrt(-0.5 * std::log(0.5 * alpha));
}

/// One-sample KS statistic sup |F_n - F|; sorts `samples` in place.
inline double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

inline GoodnessOfFitReport ks_test(std::vector<double> samples,
                                   const std::function<double(double)>& cdf, double alpha) {
    const double crit_coeff = ks_critical_coefficient(alpha);
    GoodnessOfFitReport r;
    r.n_samples = static_cast<std::int64_t>(samples.size());
    r.ks_statistic = ks_statistic(samples, cdf);
    r.critical_value = crit_coeff / std::sqrt(static_cast<double>(r.n_samples));
    r.pass = r.ks_statistic < r.critical_value;
    r.alpha = alpha;
    return r;
}

/// Two-sample KS; the critical value uses n_eff = n1 n2 / (n1 + n2).
inline GoodnessOfFitReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                                         double alpha) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    const double crit_coeff = ks_critical_coefficient(alpha);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    GoodnessOfFitReport r;
    r.n_samples = static_cast<std::int64_t>(a.size() + b.size());
    r.ks_statistic = d;
    r.critical_value = crit_coeff / std::sqrt(na * nb / (na + nb));
    r.pass = d < r.critical_value;
    r.alpha = alpha;
    return r;
}

/// Standard normal quantile by bisection on erfc.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct ChiSquareReport {
    double statistic = 0.0;
    int bins = 0;
    double critical_value = 0.0;
    bool pass = false;
    double alpha = 0.0;
};

/// Chi-square test with Sturges' bin count, ceil(log2 n) + 1, on
/// u = F(x) in equiprobable bins. The critical value of chi^2_{bins-1} is
/// the Wilson-Hilferty approximation.
inline ChiSquareReport chi_square_test(const std::vector<double>& samples,
                                       const std::function<double(double)>& cdf, double alpha) {
    if (samples.empty()) throw DomainError("chi_square_test: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi_square_test: alpha must lie in (0, 1)");
    const double n = static_cast<double>(samples.size());
    const int bins = std::max(2, static_cast<int>(std::ceil(std::log2(n))) + 1);
    std::vector<double> counts(bins, 0.0);
    for (double x : samples) {
        const double u = std::clamp(cdf(x), 0.0, 1.0);
        counts[std::min(bins - 1, static_cast<int>(u * bins))] += 1.0;
    }
    const double expected = n / bins;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    const double k = bins - 1;
    const double z = normal_quantile(1.0 - alpha);
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    ChiSquareReport r;
    r.statistic = stat;
    r.bins = bins;
    r.critical_value = k * t * t * t;
    r.pass = stat < r.critical_value;
    r.alpha = alpha;
    return r;
}

}  // namespace flatsect
