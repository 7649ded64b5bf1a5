#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabgap/gaps.hpp"
#include "tabgap/matrix.hpp"

namespace tabgap {

struct BootstrapConfig {
    int n_resamples = 500;   // 500 for screening, 5000 for predictive intervals
    std::uint64_t seed = 0;
    double ci_level = 0.95;
};

/// One feature's screening outcome for one comparison.
struct AssociationResult {
    std::string comparison_id;
    std::string feature_name;
    int n = 0;  // complete (feature, gap) pairs
    double rho = 0.0;
    double p_value = 1.0;
    double q_bh = 1.0;
    double sign_consistency = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool retained = false;  // q_bh < fdr_level and sign_consistency >= sign_gate
};

/// Post-screening covariate check with the fixed controls.
struct AdjustedResult {
    std::string comparison_id;
    std::string feature_name;
    double adj_coef = 0.0;
    double adj_ci_low = 0.0;
    double adj_ci_high = 0.0;
    double adj_sign_consistency = 0.0;
    bool direction_confirmed = false;
    bool computable = true;
    std::string note;  // reason when not computable
};

struct ScreenOptions {
    BootstrapConfig bootstrap;    // screening default: 500 resamples
    double fdr_level = 0.05;
    double sign_gate = 0.90;
    std::size_t min_pairs = 8;    // fewest complete pairs for a testable feature
    int jobs = 1;
};

/// Bootstrap sign consistency and percentile CI of a Spearman correlation.
/// Resample b draws n pairs with replacement under the sub-seed
/// (cfg.seed, stream, b); resamples with undefined correlation count as
/// sign-inconsistent and are excluded from the CI sample.
struct SignConsistency {
    double consistency = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};
SignConsistency bootstrap_sign_consistency(std::span<const double> x, std::span<const double> y,
                                           double point_rho, const BootstrapConfig& cfg,
                                           std::uint64_t stream);

/// Runs the full screen of one comparison: Spearman + t p-values over
/// pairwise-complete datasets, BH across all testable features, bootstrap
/// sign consistency and CIs, retention flags. Sorted by p ascending, ties
/// by feature name.
std::vector<AssociationResult> screen_features(const MetaFeatureMatrix& matrix,
                                               std::span<const GapRecord> gaps,
                                               const std::string& comparison_id,
                                               const ScreenOptions& options,
                                               std::vector<std::string>* log = nullptr);

/// Rank-based linear model of the gap on one retained feature plus the
/// control columns: complete cases, midranks, standardization, least
/// squares with a 1e-8 ridge floor. Bootstrap over datasets gives the
/// adjusted sign consistency and CI.
AdjustedResult covariate_adjust(const MetaFeatureMatrix& matrix, std::span<const GapRecord> gaps,
                                const std::string& comparison_id, const std::string& feature_name,
                                double univariate_rho, std::span<const std::string> control_names,
                                const ScreenOptions& options);

}  // namespace tabgap
