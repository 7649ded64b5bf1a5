#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tabgap/matrix.hpp"
#include "tabgap/table.hpp"

namespace tabgap {

struct PreprocessOptions {
    double missing_threshold = 0.20;       // drop above this missing fraction
    double near_constant_share = 0.99;     // modal share at or above which a column is constant
    double near_constant_variance = 1e-12; // variance below which a column is constant
    double dedup_rho = 0.95;               // |Spearman| above which columns are duplicates
    std::size_t dedup_min_overlap = 10;    // shared datasets required for a dedup edge
};

enum class DropReason { too_missing, near_constant, dedup };

std::string to_string(DropReason r);

struct DropLogEntry {
    std::string feature_name;
    DropReason reason = DropReason::too_missing;
    std::string detail;
};

/// The four cleaning steps, in order: (1) infinities become missing,
/// (2) drop columns over the missing threshold, (3) drop near-constant
/// columns, (4) keep one member per group of mutually correlated columns
/// (|Spearman| > dedup_rho over >= dedup_min_overlap shared datasets),
/// preferring fewer missing values, then more unique values, then name.
/// Control columns are never dropped and take no part in dedup.
/// Idempotent: preprocess(preprocess(m)) == preprocess(m).
std::pair<MetaFeatureMatrix, std::vector<DropLogEntry>> preprocess_matrix(
    const MetaFeatureMatrix& matrix, const PreprocessOptions& options = {});

Table drop_log_table(const std::vector<DropLogEntry>& entries);

}  // namespace tabgap
