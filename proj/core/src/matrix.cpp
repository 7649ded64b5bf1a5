#include "tabgap/matrix.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

std::string to_string(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::basic: return "basic";
        case FeatureGroup::redundancy: return "redundancy";
        case FeatureGroup::statistical: return "statistical";
        case FeatureGroup::control: return "control";
    }
    return "unknown";
}

FeatureGroup feature_group_from_string(const std::string& s) {
    if (s == "basic") return FeatureGroup::basic;
    if (s == "redundancy") return FeatureGroup::redundancy;
    if (s == "statistical") return FeatureGroup::statistical;
    if (s == "control") return FeatureGroup::control;
    throw Error("unknown feature group '" + s + "'");
}

MetaFeatureMatrix::MetaFeatureMatrix(std::vector<std::string> feature_names,
                                     std::vector<FeatureGroup> groups)
    : feature_names_(std::move(feature_names)), groups_(std::move(groups)) {
    if (feature_names_.size() != groups_.size()) {
        throw Error("feature name and group lists differ in length");
    }
    std::set<std::string> seen;
    for (const auto& name : feature_names_) {
        if (!seen.insert(name).second) throw Error("duplicate feature name '" + name + "'");
    }
}

FeatureGroup MetaFeatureMatrix::group(const std::string& feature_name) const {
    const auto idx = feature_index(feature_name);
    if (!idx) throw Error("unknown feature '" + feature_name + "'");
    return groups_[*idx];
}

std::optional<std::size_t> MetaFeatureMatrix::feature_index(const std::string& name) const {
    const auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names_.begin());
}

std::optional<std::size_t> MetaFeatureMatrix::dataset_index(const std::string& dataset_id) const {
    const auto it = std::find(dataset_ids_.begin(), dataset_ids_.end(), dataset_id);
    if (it == dataset_ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - dataset_ids_.begin());
}

void MetaFeatureMatrix::append_dataset(const std::string& dataset_id,
                                       std::span<const double> values) {
    if (values.size() != n_features()) {
        throw Error("row for '" + dataset_id + "' has " + std::to_string(values.size()) +
                    " cells, expected " + std::to_string(n_features()));
    }
    dataset_ids_.push_back(dataset_id);
    cells_.insert(cells_.end(), values.begin(), values.end());
}

std::vector<double> MetaFeatureMatrix::column(std::size_t feature) const {
    std::vector<double> out(n_datasets());
    for (std::size_t d = 0; d < n_datasets(); ++d) out[d] = cell(d, feature);
    return out;
}

MetaFeatureMatrix MetaFeatureMatrix::select_features(std::span<const std::size_t> features) const {
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    names.reserve(features.size());
    groups.reserve(features.size());
    for (std::size_t f : features) {
        names.push_back(feature_names_[f]);
        groups.push_back(groups_[f]);
    }
    MetaFeatureMatrix out(std::move(names), std::move(groups));
    std::vector<double> row(features.size());
    for (std::size_t d = 0; d < n_datasets(); ++d) {
        for (std::size_t i = 0; i < features.size(); ++i) row[i] = cell(d, features[i]);
        out.append_dataset(dataset_ids_[d], row);
    }
    return out;
}

Table MetaFeatureMatrix::to_table() const {
    Table t;
    t.add_string_column("dataset_id");
    for (const auto& name : feature_names_) t.add_real_column(name);
    for (std::size_t d = 0; d < n_datasets(); ++d) {
        t.append_row();
        t.set_string(d, 0, dataset_ids_[d]);
        for (std::size_t f = 0; f < n_features(); ++f) {
            const double v = cell(d, f);
            if (!is_missing(v)) t.set_real(d, f + 1, v);
        }
    }
    return t;
}

Table MetaFeatureMatrix::groups_table() const {
    Table t;
    t.add_string_column("feature_name");
    t.add_string_column("group");
    for (std::size_t f = 0; f < n_features(); ++f) {
        t.append_row();
        t.set_string(f, 0, feature_names_[f]);
        t.set_string(f, 1, to_string(groups_[f]));
    }
    return t;
}

MetaFeatureMatrix MetaFeatureMatrix::from_table(const Table& matrix, const Table& groups) {
    if (matrix.n_cols() == 0 || matrix.column_names()[0] != "dataset_id") {
        throw Error("matrix table must start with a dataset_id column");
    }
    std::map<std::string, FeatureGroup> group_of;
    for (std::size_t r = 0; r < groups.n_rows(); ++r) {
        group_of[groups.get_string(r, 0)] = feature_group_from_string(groups.get_string(r, 1));
    }
    std::vector<std::string> names;
    std::vector<FeatureGroup> gs;
    for (std::size_t c = 1; c < matrix.n_cols(); ++c) {
        const std::string& name = matrix.column_names()[c];
        const auto it = group_of.find(name);
        if (it == group_of.end()) throw Error("feature '" + name + "' missing from groups table");
        names.push_back(name);
        gs.push_back(it->second);
    }
    MetaFeatureMatrix out(std::move(names), std::move(gs));
    std::vector<double> row(matrix.n_cols() - 1);
    for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
        for (std::size_t c = 1; c < matrix.n_cols(); ++c) {
            row[c - 1] = matrix.missing(r, c) ? kMissing : matrix.get_real(r, c);
        }
        out.append_dataset(matrix.get_string(r, 0), row);
    }
    return out;
}

}  // namespace tabgap
