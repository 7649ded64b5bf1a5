#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tabgap {

struct SplitId {
    int repeat = 0;
    int fold = 0;

    auto operator<=>(const SplitId&) const = default;
};

enum class Subtype { default_, tuned, tuned_ensemble };

std::string to_string(Subtype s);
std::optional<Subtype> subtype_from_string(const std::string& s);

enum class ProblemType { binary, multiclass, regression };

std::string to_string(ProblemType t);
std::optional<ProblemType> problem_type_from_string(const std::string& s);

/// One benchmark measurement: a method variant evaluated on one
/// cross-validation split of one dataset.
struct MethodRun {
    std::string dataset_id;
    SplitId split;
    std::string method_id;
    Subtype subtype = Subtype::default_;
    ProblemType problem_type = ProblemType::binary;
    std::string metric_name;
    double val_error = 0.0;
    double test_error = 0.0;
};

struct DatasetInfo {
    std::string dataset_id;
    long long n_instances = 0;
    long long n_features = 0;
    ProblemType problem_type = ProblemType::binary;
    std::optional<long long> n_classes;
    double pct_categorical = 0.0;
};

/// Immutable collection of MethodRun keyed by (dataset, split, method,
/// subtype), held in canonical order. Safe for concurrent reads.
class RunStore {
public:
    /// Canonical results CSV columns, in order.
    static const std::vector<std::string>& csv_header();

    /// Parses the canonical results CSV. Rejects schema mismatches,
    /// non-finite errors (with line numbers) and duplicate keys (citing
    /// both offending lines).
    static RunStore ingest(std::istream& in);

    std::size_t size() const { return runs_.size(); }
    bool empty() const { return runs_.empty(); }
    const std::vector<MethodRun>& runs() const { return runs_; }

    /// Dataset ids present, sorted.
    std::vector<std::string> dataset_ids() const;

    /// Per-split pools for one dataset, in split order. Each span covers
    /// every method/subtype measured on that split.
    std::vector<std::pair<SplitId, std::span<const MethodRun>>> pools(
        const std::string& dataset_id) const;

    /// Canonical serialization: header plus rows in key order. Permuting
    /// the ingested rows leaves this output byte-identical.
    void write_canonical_csv(std::ostream& out) const;

private:
    void build_index();

    std::vector<MethodRun> runs_;  // sorted by (dataset, split, method, subtype)
    std::map<std::string, std::pair<std::size_t, std::size_t>> dataset_ranges_;
};

/// Parses the dataset-info CSV (dataset_id, n_instances, n_features,
/// problem_type, n_classes, pct_categorical).
std::vector<DatasetInfo> read_dataset_info(std::istream& in);

void write_dataset_info(std::ostream& out, std::span<const DatasetInfo> infos);

}  // namespace tabgap
