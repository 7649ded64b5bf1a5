#include "tabgap/raw_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tabgap/csv.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/rng.hpp"

namespace tabgap {

std::size_t RawColumn::n_missing() const {
    std::size_t count = 0;
    for (std::size_t r = 0; r < size(); ++r) {
        if (cell_missing(r)) ++count;
    }
    return count;
}

std::size_t RawColumn::n_distinct() const {
    if (kind == ColumnKind::numeric) {
        std::set<double> seen;
        for (double v : numeric) {
            if (!std::isnan(v)) seen.insert(v);
        }
        return seen.size();
    }
    std::set<std::int32_t> seen;
    for (std::int32_t c : codes) {
        if (c >= 0) seen.insert(c);
    }
    return seen.size();
}

std::vector<DatasetManifestEntry> load_dataset_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset manifest " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("dataset manifest is not valid JSON: " + std::string(e.what()));
    }
    const auto base = path.parent_path();
    const nlohmann::json& list = doc.is_array() ? doc : doc.at("datasets");

    std::vector<DatasetManifestEntry> entries;
    std::set<std::string> ids;
    for (const auto& j : list) {
        DatasetManifestEntry e;
        e.dataset_id = j.at("dataset_id").get<std::string>();
        if (!ids.insert(e.dataset_id).second) {
            throw ConfigError("duplicate dataset_id '" + e.dataset_id + "' in manifest");
        }
        std::filesystem::path table = j.at("table_path").get<std::string>();
        e.table_path = table.is_absolute() ? table : base / table;
        e.target_column = j.value("target_column", std::string{});
        for (const auto& c : j.value("categorical_columns", nlohmann::json::array())) {
            e.categorical_columns.push_back(c.get<std::string>());
        }
        if (j.contains("split_definition") && !j.at("split_definition").is_null()) {
            const auto& js = j.at("split_definition");
            const std::string kind = js.value("kind", std::string("all"));
            if (kind == "all") {
                e.split.kind = SplitDefinition::Kind::all_rows;
            } else if (kind == "indices") {
                e.split.kind = SplitDefinition::Kind::explicit_indices;
                for (const auto& jf : js.at("folds")) {
                    SplitDefinition::Fold fold;
                    fold.repeat = jf.at("repeat").get<int>();
                    fold.fold = jf.at("fold").get<int>();
                    for (const auto& idx : jf.at("train")) {
                        fold.train_rows.push_back(idx.get<std::size_t>());
                    }
                    e.split.folds.push_back(std::move(fold));
                }
            } else if (kind == "kfold") {
                e.split.kind = SplitDefinition::Kind::seeded_kfold;
                e.split.n_repeats = js.value("repeats", 1);
                e.split.n_folds = js.value("folds", 3);
                e.split.seed = js.at("seed").get<std::uint64_t>();
                if (e.split.n_folds < 2) throw ConfigError("kfold split needs >= 2 folds");
            } else {
                throw ConfigError("unknown split_definition kind '" + kind + "'");
            }
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

namespace {

// Fold assignment for one repeat: permute rows, cut into n_folds
// contiguous chunks of near-equal size.
std::vector<std::size_t> kfold_test_rows(std::uint64_t seed, int repeat, int fold, int n_folds,
                                         std::size_t n_rows) {
    Rng rng(sub_seed(seed, fnv1a64("kfold"), static_cast<std::uint64_t>(repeat)));
    const auto perm = rng.permutation(n_rows);
    const std::size_t base = n_rows / static_cast<std::size_t>(n_folds);
    const std::size_t extra = n_rows % static_cast<std::size_t>(n_folds);
    std::size_t start = 0;
    for (int f = 0; f < fold; ++f) {
        start += base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    }
    const std::size_t len = base + (static_cast<std::size_t>(fold) < extra ? 1 : 0);
    return {perm.begin() + static_cast<std::ptrdiff_t>(start),
            perm.begin() + static_cast<std::ptrdiff_t>(start + len)};
}

}  // namespace

std::vector<std::size_t> training_rows(const SplitDefinition& split, std::size_t n_rows,
                                       TrainingRows mode) {
    std::vector<std::size_t> rows;
    if (mode == TrainingRows::all_rows || split.kind == SplitDefinition::Kind::all_rows) {
        rows.resize(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) rows[i] = i;
        return rows;
    }

    if (split.kind == SplitDefinition::Kind::explicit_indices) {
        if (split.folds.empty()) throw ConfigError("split_definition has no folds");
        std::set<std::size_t> selected;
        if (mode == TrainingRows::first_split) {
            const auto it = std::min_element(
                split.folds.begin(), split.folds.end(), [](const auto& a, const auto& b) {
                    return std::make_pair(a.repeat, a.fold) < std::make_pair(b.repeat, b.fold);
                });
            selected.insert(it->train_rows.begin(), it->train_rows.end());
        } else {
            for (const auto& fold : split.folds) {
                selected.insert(fold.train_rows.begin(), fold.train_rows.end());
            }
        }
        for (std::size_t r : selected) {
            if (r >= n_rows) throw ConfigError("split index " + std::to_string(r) + " out of range");
        }
        return {selected.begin(), selected.end()};
    }

    // seeded_kfold: training rows = complement of the fold's test chunk
    if (mode == TrainingRows::first_split) {
        const auto test = kfold_test_rows(split.seed, 0, 0, split.n_folds, n_rows);
        std::vector<bool> is_test(n_rows, false);
        for (std::size_t r : test) is_test[r] = true;
        for (std::size_t i = 0; i < n_rows; ++i) {
            if (!is_test[i]) rows.push_back(i);
        }
        return rows;
    }
    // union of training partitions across folds of one repeat is every row
    rows.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) rows[i] = i;
    return rows;
}

RawDatasetTable load_raw_table(const DatasetManifestEntry& entry, TrainingRows mode) {
    std::ifstream in(entry.table_path);
    if (!in) throw IoError("cannot open dataset table " + entry.table_path.string());

    CsvReader reader(in);
    CsvRecord rec;
    if (!reader.next(rec)) throw ParseError(entry.table_path.string() + " is empty");
    const std::vector<std::string> header = rec.cells;

    std::optional<std::size_t> target_idx;
    if (!entry.target_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), entry.target_column);
        if (it == header.end()) {
            throw ConfigError("target column '" + entry.target_column + "' not found in " +
                              entry.table_path.string());
        }
        target_idx = static_cast<std::size_t>(it - header.begin());
    }
    const std::set<std::string> categorical(entry.categorical_columns.begin(),
                                            entry.categorical_columns.end());
    for (const std::string& name : entry.categorical_columns) {
        if (std::find(header.begin(), header.end(), name) == header.end()) {
            throw ConfigError("categorical column '" + name + "' not found in " +
                              entry.table_path.string());
        }
    }

    std::vector<std::vector<std::string>> raw_cells(header.size());
    std::size_t n_rows = 0;
    while (reader.next(rec)) {
        if (rec.cells.size() != header.size()) {
            throw ParseError(entry.table_path.string() + " line " + std::to_string(rec.line_no) +
                             ": expected " + std::to_string(header.size()) + " cells");
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            raw_cells[c].push_back(std::move(rec.cells[c]));
        }
        ++n_rows;
    }

    const auto keep = training_rows(entry.split, n_rows, mode);

    RawDatasetTable table;
    table.dataset_id = entry.dataset_id;
    table.n_rows = keep.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (target_idx && c == *target_idx) continue;
        RawColumn col;
        col.name = header[c];
        if (categorical.count(col.name)) {
            col.kind = ColumnKind::categorical;
            std::map<std::string, std::int32_t> code_of;
            col.codes.reserve(keep.size());
            for (std::size_t r : keep) {
                const std::string& cell = raw_cells[c][r];
                if (cell.empty()) {
                    col.codes.push_back(-1);
                    continue;
                }
                auto [it, inserted] =
                    code_of.emplace(cell, static_cast<std::int32_t>(col.labels.size()));
                if (inserted) col.labels.push_back(cell);
                col.codes.push_back(it->second);
            }
        } else {
            col.kind = ColumnKind::numeric;
            col.numeric.reserve(keep.size());
            for (std::size_t r : keep) {
                const std::string& cell = raw_cells[c][r];
                if (cell.empty()) {
                    col.numeric.push_back(kMissing);
                    continue;
                }
                const auto v = parse_double(cell);
                if (!v) {
                    throw ParseError(entry.table_path.string() + ": column '" + col.name +
                                     "' has non-numeric cell '" + cell +
                                     "' (declare it categorical or clean the data)");
                }
                col.numeric.push_back(*v);
            }
        }
        table.columns.push_back(std::move(col));
    }
    if (table.columns.empty()) {
        throw ConfigError("dataset '" + entry.dataset_id + "' has no feature columns");
    }
    return table;
}

}  // namespace tabgap
