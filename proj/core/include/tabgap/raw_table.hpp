#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tabgap {

enum class ColumnKind { numeric, categorical };

/// One feature column of a raw training table. Numeric cells use NaN as
/// the missing marker; categorical cells use code -1 plus a label table
/// (codes are assigned by first appearance and never interpreted as order).
struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> numeric;
    std::vector<std::int32_t> codes;
    std::vector<std::string> labels;

    std::size_t size() const {
        return kind == ColumnKind::numeric ? numeric.size() : codes.size();
    }
    bool cell_missing(std::size_t row) const {
        return kind == ColumnKind::numeric ? std::isnan(numeric[row]) : codes[row] < 0;
    }
    std::size_t n_missing() const;
    /// Count of distinct non-missing values.
    std::size_t n_distinct() const;
};

struct RawDatasetTable {
    std::string dataset_id;
    std::vector<RawColumn> columns;
    std::size_t n_rows = 0;
};

/// How a dataset manifest entry defines cross-validation splits.
struct SplitDefinition {
    enum class Kind { all_rows, explicit_indices, seeded_kfold };
    Kind kind = Kind::all_rows;

    // explicit_indices: training row indices per (repeat, fold)
    struct Fold {
        int repeat = 0;
        int fold = 0;
        std::vector<std::size_t> train_rows;
    };
    std::vector<Fold> folds;

    // seeded_kfold: deterministic permutation per repeat, contiguous folds
    int n_repeats = 1;
    int n_folds = 3;
    std::uint64_t seed = 0;
};

struct DatasetManifestEntry {
    std::string dataset_id;
    std::filesystem::path table_path;
    std::string target_column;  // empty when the table has no target
    std::vector<std::string> categorical_columns;
    SplitDefinition split;
};

/// Parses the dataset manifest JSON (a list of entries). Relative table
/// paths resolve against the manifest's directory.
std::vector<DatasetManifestEntry> load_dataset_manifest(const std::filesystem::path& path);

/// Which training rows define the extraction table.
enum class TrainingRows {
    first_split,  // training partition of split (repeat 0, fold 0)
    union_all,    // union of all training partitions (every row that trains at least once)
    all_rows,     // the full table, regardless of split definition
};

/// Training row indices of `entry` for the requested mode, ascending.
std::vector<std::size_t> training_rows(const SplitDefinition& split, std::size_t n_rows,
                                       TrainingRows mode);

/// Loads the raw table restricted to training rows. The target column is
/// dropped; column kinds come from `categorical_columns`.
RawDatasetTable load_raw_table(const DatasetManifestEntry& entry, TrainingRows mode);

}  // namespace tabgap
