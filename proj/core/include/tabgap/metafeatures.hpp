#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabgap/matrix.hpp"
#include "tabgap/raw_table.hpp"

namespace tabgap {

struct MetaFeatureOptions {
    int high_cardinality_threshold = 20;   // distinct values above which a categorical is high-card
    double high_corr_threshold = 0.8;      // |Spearman| gate for high_corr_pair_fraction
    double cor_attr_threshold = 0.5;       // |Spearman| gate for nr_cor_attr
    std::size_t pair_cap = 5000;           // sampled pairs when the pair universe exceeds this
    std::size_t max_eigen_columns = 500;   // spectrum features emit missing above this width
    std::uint64_t seed = 0;                // drives pair sampling only
};

struct NamedValue {
    std::string name;
    double value;  // NaN when undefined
    FeatureGroup group;
};

/// The fixed control-feature set used as covariates and baseline predictors.
const std::vector<std::string>& control_feature_names();

/// Spectrum condensation used by the redundancy features: negative
/// eigenvalues clip to 0, p_i = lambda_i / sum; effective_rank =
/// exp(-sum p ln p), participation_ratio = (sum lambda)^2 / sum lambda^2.
/// Both NaN when no eigenvalue is positive.
struct SpectrumSummary {
    double effective_rank = 0.0;
    double participation_ratio = 0.0;
};
SpectrumSummary spectrum_summary(std::span<const double> eigenvalues);

/// Basic table properties: n, d, log_n, log_d, d_over_n, cat_fraction,
/// feature_missing_fraction, high_cardinality_fraction.
std::vector<NamedValue> extract_basic(const RawDatasetTable& table,
                                      const MetaFeatureOptions& options);

/// Redundancy features over numeric column pairs: high_corr_pair_fraction,
/// nr_cor_attr, effective_rank, participation_ratio.
std::vector<NamedValue> extract_redundancy(const RawDatasetTable& table,
                                           const MetaFeatureOptions& options,
                                           std::vector<std::string>* log = nullptr);

/// Statistical and information-theoretic base vectors, each expanded
/// through the summarization grammar.
std::vector<NamedValue> extract_statistical(const RawDatasetTable& table,
                                            const MetaFeatureOptions& options,
                                            std::vector<std::string>* log = nullptr);

/// Exactly log_n, log_d, d_over_n, cat_fraction, feature_missing_fraction,
/// flagged FeatureGroup::control.
std::vector<NamedValue> compute_controls(const RawDatasetTable& table);

/// All groups merged; the five control names appear once, owned by the
/// control group. Every call emits the same feature-name schema, with NaN
/// for whatever is undefined on this table.
std::vector<NamedValue> extract_all(const RawDatasetTable& table,
                                    const MetaFeatureOptions& options,
                                    std::vector<std::string>* log = nullptr);

/// Applies the summarizer set to one base vector, producing
/// "<base>.mean", ..., "<base>.quantiles.0".."4", "<base>.histogram.0".."9".
/// Missing entries of `vec` are dropped first.
std::vector<std::pair<std::string, double>> summarize(const std::string& base_name,
                                                      std::span<const double> vec);

/// Names emitted by summarize() for a given base, in order.
std::vector<std::string> summarizer_names(const std::string& base_name);

/// Equal-frequency discretization with bin count min(#distinct,
/// ceil(2 m^(1/3))) over m non-missing values; missing stays -1. Bin
/// boundaries are quantile cuts, so the result depends only on ranks.
std::vector<std::int32_t> discretize_equal_frequency(std::span<const double> values);

/// Shannon entropy (nats) of a column's value distribution; numeric
/// columns are discretized first. NaN when the column has no values.
double attr_entropy(const RawColumn& column);

/// Goodman-Kruskal tau(Y|X) from the joint distribution of two discretized
/// columns over jointly non-missing rows. NaN when Y is constant there.
double goodman_kruskal_tau(std::span<const std::int32_t> x, std::span<const std::int32_t> y);

/// Extracts every dataset (parallel across datasets, deterministic
/// assembly in input order) and assembles the matrix.
MetaFeatureMatrix build_matrix(std::span<const RawDatasetTable> tables,
                               const MetaFeatureOptions& options, int jobs = 1,
                               std::vector<std::string>* log = nullptr);

}  // namespace tabgap
