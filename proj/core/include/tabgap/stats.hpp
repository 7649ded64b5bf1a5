#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tabgap/descriptive.hpp"

namespace tabgap {

/// 1-based midranks: tied values receive the average of their rank block.
std::vector<double> midranks(std::span<const double> v);

/// Midrank a single value would receive against a reference sample
/// (count below + half the tie block + 1/2).
double midrank_against(std::span<const double> reference, double value);

/// Pearson correlation; NaN when either vector is constant or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation: Pearson correlation of midranks.
/// NaN when fewer than 3 pairs or either vector is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation, absolute error well below 1e-12 for the df ranges here.
double ibeta_reg(double a, double b, double x);

/// Two-tailed p-value of a Spearman correlation via the asymptotic
/// t-approximation: t = rho sqrt((n-2)/(1-rho^2)), df = n-2.
/// |rho| >= 1 gives 0; n < 4 gives NaN.
double spearman_pvalue(double rho, std::size_t n);

/// Benjamini-Hochberg step-up adjustment. NaN entries are excluded from
/// the family size m and stay NaN in the output.
std::vector<double> bh_adjust(std::span<const double> p_values);

struct Interval {
    double lo = kMissing;
    double hi = kMissing;
};

/// Percentile interval at `level` (e.g. 0.95) over an unsorted sample.
Interval percentile_interval(std::span<const double> sample, double level);

/// Drops pairs where either side is missing; returns the aligned columns.
std::pair<std::vector<double>, std::vector<double>> complete_pairs(
    std::span<const double> x, std::span<const double> y);

}  // namespace tabgap
