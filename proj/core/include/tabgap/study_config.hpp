#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tabgap/store.hpp"

namespace tabgap {

/// Dataset-size restrictions under which a comparison is evaluated.
/// Bounds are inclusive ("at most"); absent bounds are unconstrained.
struct ApplicabilityRule {
    std::optional<long long> max_train_samples;
    std::optional<long long> max_features;
    std::optional<long long> max_classes;
    bool classification_only = false;
};

struct FamilyMember {
    std::string method_id;
    std::vector<Subtype> subtypes;  // empty means every subtype
};

struct FamilySpec {
    std::string family_id;
    std::vector<FamilyMember> members;

    bool contains(const std::string& method_id, Subtype subtype) const;
};

struct ComparisonSpec {
    std::string comparison_id;
    std::string family_a;
    std::string family_b;
    std::optional<ApplicabilityRule> applicability;
};

struct StudyDefinition {
    std::vector<FamilySpec> families;
    std::vector<ComparisonSpec> comparisons;  // document order
    std::vector<std::string> controls;

    const FamilySpec& family(const std::string& family_id) const;
};

/// Parses the study-definition portion of a config document (JSON text with
/// keys families[], comparisons[], controls[], applicability{}). A top-level
/// applicability rule applies to comparisons that do not declare their own.
StudyDefinition load_study_config(const std::string& json_text);

/// Datasets satisfying every present bound of `rule`. The training-sample
/// count is floor(2n/3), the train share of a 3-fold split.
std::set<std::string> applicable_datasets(const ApplicabilityRule& rule,
                                          std::span<const DatasetInfo> infos);

}  // namespace tabgap
