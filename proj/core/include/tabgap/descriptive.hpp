#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace tabgap {

/// Missing cells are carried as quiet NaN throughout the toolkit; infinities
/// are legal values until preprocessing maps them to missing.
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) { return std::isnan(x); }

/// Copy of `values` with missing entries removed.
std::vector<double> drop_missing(std::span<const double> values);

double vec_sum(std::span<const double> v);
double vec_mean(std::span<const double> v);          // NaN when empty
double vec_variance(std::span<const double> v);      // sample variance, NaN when n < 2
double vec_sd(std::span<const double> v);            // sqrt of sample variance
double vec_min(std::span<const double> v);           // NaN when empty
double vec_max(std::span<const double> v);

/// Quantile with linear interpolation on h = (n-1)p over a sorted vector.
double quantile_sorted(std::span<const double> sorted, double p);

/// Quantile of an unsorted vector (sorts a copy).
double quantile(std::span<const double> v, double p);

double vec_median(std::span<const double> v);

/// Fisher-Pearson skewness g1 = m3 / m2^(3/2); NaN when n < 3 or variance 0.
double skewness_g1(std::span<const double> v);

/// Excess kurtosis g2 = m4 / m2^2 - 3; NaN when n < 4 or variance 0.
double kurtosis_g2(std::span<const double> v);

/// Median absolute deviation scaled by 1.4826.
double mad_scaled(std::span<const double> v);

/// Mean after trimming `trim` of the mass from each tail (floor(n*trim)
/// values per side).
double trimmed_mean(std::span<const double> v, double trim);

/// Relative frequencies over 10 equal-width bins spanning [min, max];
/// min == max puts all mass in bin 0. NaN-filled when empty.
std::array<double, 10> histogram10(std::span<const double> v);

}  // namespace tabgap
