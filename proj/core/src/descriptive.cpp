#include "tabgap/descriptive.hpp"

#include <algorithm>
#include <cstddef>

namespace tabgap {

std::vector<double> drop_missing(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (!is_missing(v)) out.push_back(v);
    }
    return out;
}

double vec_sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double vec_mean(std::span<const double> v) {
    if (v.empty()) return kMissing;
    return vec_sum(v) / static_cast<double>(v.size());
}

double vec_variance(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) return kMissing;
    const double m = vec_mean(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

double vec_sd(std::span<const double> v) {
    const double var = vec_variance(v);
    return is_missing(var) ? kMissing : std::sqrt(var);
}

double vec_min(std::span<const double> v) {
    if (v.empty()) return kMissing;
    return *std::min_element(v.begin(), v.end());
}

double vec_max(std::span<const double> v) {
    if (v.empty()) return kMissing;
    return *std::max_element(v.begin(), v.end());
}

double quantile_sorted(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) return kMissing;
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> v, double p) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, p);
}

double vec_median(std::span<const double> v) { return quantile(v, 0.5); }

double skewness_g1(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 3) return kMissing;
    const double m = vec_mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) return kMissing;
    return m3 / std::pow(m2, 1.5);
}

double kurtosis_g2(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 4) return kMissing;
    const double m = vec_mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 <= 0.0) return kMissing;
    return m4 / (m2 * m2) - 3.0;
}

double mad_scaled(std::span<const double> v) {
    if (v.empty()) return kMissing;
    const double med = vec_median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::fabs(v[i] - med);
    return 1.4826 * vec_median(dev);
}

double trimmed_mean(std::span<const double> v, double trim) {
    const std::size_t n = v.size();
    if (n == 0) return kMissing;
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * trim));
    if (2 * k >= n) return kMissing;
    double s = 0.0;
    for (std::size_t i = k; i < n - k; ++i) s += sorted[i];
    return s / static_cast<double>(n - 2 * k);
}

std::array<double, 10> histogram10(std::span<const double> v) {
    std::array<double, 10> bins{};
    if (v.empty()) {
        bins.fill(kMissing);
        return bins;
    }
    const double lo = vec_min(v);
    const double hi = vec_max(v);
    if (!(hi > lo)) {
        bins.fill(0.0);
        bins[0] = 1.0;
        return bins;
    }
    const double width = (hi - lo) / 10.0;
    for (double x : v) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b > 9) b = 9;
        bins[b] += 1.0;
    }
    for (double& b : bins) b /= static_cast<double>(v.size());
    return bins;
}

}  // namespace tabgap
