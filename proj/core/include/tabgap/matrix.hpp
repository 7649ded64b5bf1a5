#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabgap/table.hpp"

namespace tabgap {

enum class FeatureGroup { basic, redundancy, statistical, control };

std::string to_string(FeatureGroup g);
FeatureGroup feature_group_from_string(const std::string& s);

/// Datasets x meta-features, row-major, NaN as the missing marker.
/// Feature names follow the grammar <base>.<summarizer>[.<index>] for
/// summarized vectors and bare names for scalars.
class MetaFeatureMatrix {
public:
    MetaFeatureMatrix() = default;
    MetaFeatureMatrix(std::vector<std::string> feature_names, std::vector<FeatureGroup> groups);

    std::size_t n_datasets() const { return dataset_ids_.size(); }
    std::size_t n_features() const { return feature_names_.size(); }

    const std::vector<std::string>& dataset_ids() const { return dataset_ids_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    FeatureGroup group(std::size_t feature) const { return groups_[feature]; }
    FeatureGroup group(const std::string& feature_name) const;

    std::optional<std::size_t> feature_index(const std::string& name) const;
    std::optional<std::size_t> dataset_index(const std::string& dataset_id) const;

    void append_dataset(const std::string& dataset_id, std::span<const double> values);

    double cell(std::size_t dataset, std::size_t feature) const {
        return cells_[dataset * n_features() + feature];
    }
    void set_cell(std::size_t dataset, std::size_t feature, double value) {
        cells_[dataset * n_features() + feature] = value;
    }

    /// One feature across datasets, in dataset order.
    std::vector<double> column(std::size_t feature) const;

    /// Restriction to a subset of features (order preserved as given).
    MetaFeatureMatrix select_features(std::span<const std::size_t> features) const;

    /// Matrix CSV: first column dataset_id, then one real column per feature.
    Table to_table() const;
    static MetaFeatureMatrix from_table(const Table& matrix, const Table& groups);

    /// Sidecar table mapping feature_name -> group.
    Table groups_table() const;

private:
    std::vector<std::string> dataset_ids_;
    std::vector<std::string> feature_names_;
    std::vector<FeatureGroup> groups_;
    std::vector<double> cells_;
};

}  // namespace tabgap
