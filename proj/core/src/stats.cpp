#include "tabgap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabgap/error.hpp"

namespace tabgap {

std::vector<double> midranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double midrank_against(std::span<const double> reference, double value) {
    std::size_t below = 0, tied = 0;
    for (double r : reference) {
        if (r < value) ++below;
        else if (r == value) ++tied;
    }
    return static_cast<double>(below) + 0.5 * static_cast<double>(tied + 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) return kMissing;
    const double mx = vec_mean(x);
    const double my = vec_mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return kMissing;
    return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) return kMissing;
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double spearman_pvalue(double rho, std::size_t n) {
    if (n < 4 || is_missing(rho)) return kMissing;
    const double ar = std::fabs(rho);
    if (ar >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    // Two-tailed Student-t tail mass: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2).
    const double p = ibeta_reg(0.5 * df, 0.5, df / (df + t * t));
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
    const std::size_t n = p_values.size();
    std::vector<std::size_t> testable;
    testable.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(p_values[i])) testable.push_back(i);
    }
    std::vector<double> q(n, kMissing);
    const std::size_t m = testable.size();
    if (m == 0) return q;

    std::stable_sort(testable.begin(), testable.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double scaled =
            p_values[testable[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
        running = std::min(running, std::min(scaled, 1.0));
        q[testable[r]] = running;
    }
    return q;
}

Interval percentile_interval(std::span<const double> sample, double level) {
    if (sample.empty()) return {};
    if (!(level > 0.0 && level < 1.0)) throw Error("percentile_interval: level must be in (0,1)");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double alpha = 0.5 * (1.0 - level);
    return {quantile_sorted(sorted, alpha), quantile_sorted(sorted, 1.0 - alpha)};
}

std::pair<std::vector<double>, std::vector<double>> complete_pairs(
    std::span<const double> x, std::span<const double> y) {
    std::vector<double> cx, cy;
    const std::size_t n = std::min(x.size(), y.size());
    cx.reserve(n);
    cy.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(x[i]) && !is_missing(y[i])) {
            cx.push_back(x[i]);
            cy.push_back(y[i]);
        }
    }
    return {std::move(cx), std::move(cy)};
}

}  // namespace tabgap
