// Shared statistical helpers for the test suites. These are oracle-side
// utilities: they never call into the code paths they are used to check.

#ifndef LIL_TESTS_TESTUTIL_HPP
#define LIL_TESTS_TESTUTIL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace testutil {

inline double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
    double m = mean(x), s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Kolmogorov-Smirnov p-value against a given CDF, with the usual finite-n
// adjustment of the asymptotic Kolmogorov distribution.
template <typename Cdf>
double ks_test_pvalue(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

// chi-squared upper-tail p-value
inline double chi2_pvalue(double stat, double dof) {
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

// Wrapped-Gaussian transition density on a circle of circumference L:
// p(t,x,y) = (2 pi t)^{-1/2} sum_k exp(-(x-y+kL)^2 / (2t)).
inline double wrapped_gaussian_kernel(double L, double t, double x, double y) {
    const double d0 = x - y;
    double s = 0.0;
    for (int k = 0;; ++k) {
        double a = std::exp(-(d0 + k * L) * (d0 + k * L) / (2.0 * t));
        double b = k == 0 ? 0.0 : std::exp(-(d0 - k * L) * (d0 - k * L) / (2.0 * t));
        s += a + b;
        if (k > 0 && a + b < 1e-300) break;
    }
    return s / std::sqrt(2.0 * std::numbers::pi * t);
}

}  // namespace testutil

#endif  // LIL_TESTS_TESTUTIL_HPP
