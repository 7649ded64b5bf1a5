#pragma once

#include <span>
#include <string>
#include <vector>

#include "tabgap/store.hpp"
#include "tabgap/study_config.hpp"

namespace tabgap {

/// Per-split normalization anchors: best and median error of the method
/// pool, spread floored at epsilon.
struct SplitAnchors {
    double e_min = 0.0;
    double e_med = 0.0;
    double r = 0.0;
    double epsilon = 1e-5;

    static SplitAnchors from_errors(std::span<const double> errors, double epsilon);

    /// clip((e - e_min) / r, 0, 1)
    double normalize(double e) const;
};

struct NormalizedRun {
    const MethodRun* run = nullptr;
    double val_norm = 0.0;
    double test_norm = 0.0;
};

/// Normalizes one (dataset, split) pool. Test and validation scores are
/// anchored separately, each to its own pool min/median. Throws on an
/// empty pool; a single-run pool degenerates to r = epsilon and score 0.
std::vector<NormalizedRun> normalize_split(std::span<const MethodRun> pool, double epsilon);

/// The family member with minimal normalized validation error; ties break
/// by (method_id, subtype). Returns nullptr when the family has no member
/// in the pool (the caller skips the split).
const NormalizedRun* select_family_rep(const FamilySpec& family,
                                       std::span<const NormalizedRun> pool);

/// Dataset-level performance gap for one comparison: the mean over usable
/// splits of (normalized test error of A's representative minus B's).
/// Positive delta means family B achieves lower error.
struct GapRecord {
    std::string comparison_id;
    std::string dataset_id;
    double delta = 0.0;
    int n_splits_used = 0;
    std::vector<double> per_split_gaps;
    std::vector<SplitId> splits;  // aligned with per_split_gaps
};

struct GapOptions {
    double epsilon = 1e-5;
};

/// Computes gaps for every dataset admitted by the comparison's
/// applicability rule (all datasets when it has none). Splits where either
/// family lacks a representative are skipped; datasets with no usable
/// split are omitted and noted in `log`.
std::vector<GapRecord> compute_gaps(const ComparisonSpec& comparison, const FamilySpec& family_a,
                                    const FamilySpec& family_b, const RunStore& store,
                                    std::span<const DatasetInfo> infos, const GapOptions& options,
                                    std::vector<std::string>* log = nullptr);

}  // namespace tabgap
