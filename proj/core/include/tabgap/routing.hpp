#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabgap/gaps.hpp"
#include "tabgap/matrix.hpp"
#include "tabgap/screening.hpp"

namespace tabgap {

enum class FeatureSetKind { controls, all, controls_plus_all, robust, controls_plus_robust };

std::string to_string(FeatureSetKind k);
std::optional<FeatureSetKind> feature_set_kind_from_string(const std::string& s);

struct FeatureSetSpec {
    FeatureSetKind kind = FeatureSetKind::controls;
    std::vector<std::string> resolved_columns;
    int n_pred = 0;
};

/// Resolves the requested kinds against the cleaned matrix. "all" means
/// every non-control column; robust kinds resolve only when screening
/// retained at least one feature, otherwise they are skipped with a note.
std::vector<FeatureSetSpec> resolve_feature_sets(const MetaFeatureMatrix& matrix,
                                                 std::span<const std::string> control_names,
                                                 std::span<const std::string> retained_features,
                                                 std::span<const FeatureSetKind> kinds,
                                                 std::vector<std::string>* log = nullptr);

struct PredictorSpec {
    enum class Kind { knn, rank_ridge, external };
    Kind kind = Kind::knn;
    std::string label;            // defaults to the kind name
    int k = 5;                    // knn
    double lambda = 1.0;          // rank_ridge
    std::string command;          // external
    double timeout_seconds = 300; // external, per fold

    std::string name() const;
};

/// One leave-one-dataset-out fold: the held-out dataset and the training
/// dataset ids (everything else), in canonical order.
struct LodoFold {
    std::string held_out;
    std::vector<std::string> train;
};

/// Exactly one fold per dataset, folds ordered by dataset id. Throws on
/// fewer than 2 datasets.
std::vector<LodoFold> lodo_folds(std::span<const std::string> dataset_ids);

/// Training design for one fold: feature rows and gaps of the training
/// datasets plus the held-out feature row, in the given column order.
/// Exposed so leakage tests can inspect exactly what a fit sees.
struct FoldData {
    std::vector<std::vector<double>> train_rows;  // one per training dataset
    std::vector<double> train_gaps;
    std::vector<double> test_row;
};
FoldData assemble_fold(const MetaFeatureMatrix& matrix, std::span<const GapRecord> gaps,
                       std::span<const std::string> columns, const LodoFold& fold);

/// Deterministic gap prediction for one held-out row.
/// knn: median imputation and z-scoring from the training rows, exact
/// duplicate columns collapsed, inverse-distance weighting over
/// k = min(k, n_train) neighbours, zero-distance neighbours dominate.
/// rank_ridge: median imputation, midrank standardization from training
/// rows, ridge regression on the raw gaps.
/// external: one subprocess per call speaking the JSON line protocol.
double fit_predict(const PredictorSpec& predictor, const FoldData& fold,
                   std::span<const std::string> columns, std::vector<std::string>* log = nullptr);

struct BaselinePrediction {
    double mean_pred = 0.0;
    int majority_sign = 1;  // ties go to +1 (family B); zero gaps count to neither side
};
BaselinePrediction baseline_predictions(std::span<const double> train_gaps);

struct PredictionRow {
    std::string dataset_id;
    double true_gap = 0.0;
    double predicted_gap = 0.0;
};

struct PredictiveResult {
    std::string comparison_id;
    std::string predictor;
    std::string feature_set;
    int n = 0;
    int n_pred = 0;
    double mae = 0.0;
    double mae_lo = 0.0;
    double mae_hi = 0.0;
    double sign_accuracy = 0.0;
    double sign_lo = 0.0;
    double sign_hi = 0.0;
    std::vector<PredictionRow> per_dataset;
};

/// Leave-one-dataset-out evaluation of every (feature set, predictor) pair
/// plus the mean/majority baseline row. CIs are percentile bootstrap over
/// the per-dataset (prediction, truth) pairs.
std::vector<PredictiveResult> evaluate_lodo(const std::string& comparison_id,
                                            const MetaFeatureMatrix& matrix,
                                            std::span<const GapRecord> gaps,
                                            std::span<const FeatureSetSpec> feature_sets,
                                            std::span<const PredictorSpec> predictors,
                                            const BootstrapConfig& cfg, int jobs = 1,
                                            std::vector<std::string>* log = nullptr);

/// Sign-accuracy scoring: a zero prediction is correct only against a
/// zero true gap.
bool sign_correct(double predicted, double truth);

}  // namespace tabgap
