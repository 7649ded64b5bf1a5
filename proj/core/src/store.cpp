#include "tabgap/store.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <tuple>

#include "tabgap/csv.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

std::string to_string(Subtype s) {
    switch (s) {
        case Subtype::default_: return "default";
        case Subtype::tuned: return "tuned";
        case Subtype::tuned_ensemble: return "tuned_ensemble";
    }
    return "unknown";
}

std::optional<Subtype> subtype_from_string(const std::string& s) {
    if (s == "default") return Subtype::default_;
    if (s == "tuned") return Subtype::tuned;
    if (s == "tuned_ensemble") return Subtype::tuned_ensemble;
    return std::nullopt;
}

std::string to_string(ProblemType t) {
    switch (t) {
        case ProblemType::binary: return "binary";
        case ProblemType::multiclass: return "multiclass";
        case ProblemType::regression: return "regression";
    }
    return "unknown";
}

std::optional<ProblemType> problem_type_from_string(const std::string& s) {
    if (s == "binary") return ProblemType::binary;
    if (s == "multiclass") return ProblemType::multiclass;
    if (s == "regression") return ProblemType::regression;
    return std::nullopt;
}

namespace {

// Canonical key order: dataset, split (repeat then fold), method, subtype.
auto run_key(const MethodRun& r) {
    return std::tie(r.dataset_id, r.split.repeat, r.split.fold, r.method_id, r.subtype);
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

const std::vector<std::string>& RunStore::csv_header() {
    static const std::vector<std::string> header = {
        "dataset_id", "repeat",      "fold",      "method_id", "subtype",
        "problem_type", "metric_name", "val_error", "test_error"};
    return header;
}

RunStore RunStore::ingest(std::istream& in) {
    CsvReader reader(in);
    CsvRecord rec;
    if (!reader.next(rec)) throw ParseError("results CSV is empty (missing header)");

    const auto& expected = csv_header();
    if (rec.cells.size() != expected.size()) {
        throw ParseError("results CSV header has " + std::to_string(rec.cells.size()) +
                         " columns, expected " + std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (rec.cells[i] != expected[i]) {
            throw ParseError("results CSV header column " + std::to_string(i + 1) + " is '" +
                             rec.cells[i] + "', expected '" + expected[i] + "'");
        }
    }

    RunStore store;
    // key -> first line number, for duplicate diagnostics
    std::map<std::tuple<std::string, int, int, std::string, Subtype>, std::size_t> seen;
    while (reader.next(rec)) {
        if (rec.cells.size() != expected.size()) {
            row_error(rec.line_no, "expected " + std::to_string(expected.size()) + " cells, got " +
                                       std::to_string(rec.cells.size()));
        }
        MethodRun run;
        run.dataset_id = rec.cells[0];
        if (run.dataset_id.empty()) row_error(rec.line_no, "empty dataset_id");

        const auto repeat = parse_int(rec.cells[1]);
        if (!repeat || *repeat < 0) row_error(rec.line_no, "bad repeat '" + rec.cells[1] + "'");
        const auto fold = parse_int(rec.cells[2]);
        if (!fold || *fold < 0) row_error(rec.line_no, "bad fold '" + rec.cells[2] + "'");
        run.split = {static_cast<int>(*repeat), static_cast<int>(*fold)};

        run.method_id = rec.cells[3];
        if (run.method_id.empty()) row_error(rec.line_no, "empty method_id");

        const auto subtype = subtype_from_string(rec.cells[4]);
        if (!subtype) row_error(rec.line_no, "unknown subtype '" + rec.cells[4] + "'");
        run.subtype = *subtype;

        const auto ptype = problem_type_from_string(rec.cells[5]);
        if (!ptype) row_error(rec.line_no, "unknown problem_type '" + rec.cells[5] + "'");
        run.problem_type = *ptype;
        run.metric_name = rec.cells[6];

        const auto val = parse_double(rec.cells[7]);
        if (!val) row_error(rec.line_no, "bad val_error '" + rec.cells[7] + "'");
        const auto test = parse_double(rec.cells[8]);
        if (!test) row_error(rec.line_no, "bad test_error '" + rec.cells[8] + "'");
        if (!std::isfinite(*val)) row_error(rec.line_no, "val_error is not finite");
        if (!std::isfinite(*test)) row_error(rec.line_no, "test_error is not finite");
        run.val_error = *val;
        run.test_error = *test;

        auto key = std::make_tuple(run.dataset_id, run.split.repeat, run.split.fold,
                                   run.method_id, run.subtype);
        const auto [it, inserted] = seen.emplace(std::move(key), rec.line_no);
        if (!inserted) {
            row_error(rec.line_no,
                      "duplicate (dataset, split, method, subtype) key; first seen on line " +
                          std::to_string(it->second));
        }
        store.runs_.push_back(std::move(run));
    }

    std::sort(store.runs_.begin(), store.runs_.end(),
              [](const MethodRun& a, const MethodRun& b) { return run_key(a) < run_key(b); });
    store.build_index();
    return store;
}

void RunStore::build_index() {
    dataset_ranges_.clear();
    if (runs_.empty()) return;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= runs_.size(); ++i) {
        if (i == runs_.size() || (i > start && runs_[i].dataset_id != runs_[start].dataset_id)) {
            dataset_ranges_[runs_[start].dataset_id] = {start, i};
            start = i;
        }
    }
}

std::vector<std::string> RunStore::dataset_ids() const {
    std::vector<std::string> out;
    out.reserve(dataset_ranges_.size());
    for (const auto& [id, _] : dataset_ranges_) out.push_back(id);
    return out;
}

std::vector<std::pair<SplitId, std::span<const MethodRun>>> RunStore::pools(
    const std::string& dataset_id) const {
    std::vector<std::pair<SplitId, std::span<const MethodRun>>> out;
    const auto it = dataset_ranges_.find(dataset_id);
    if (it == dataset_ranges_.end()) return out;
    const auto [lo, hi] = it->second;
    std::size_t start = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (i == hi || runs_[i].split != runs_[start].split) {
            out.emplace_back(runs_[start].split,
                             std::span<const MethodRun>(runs_.data() + start, i - start));
            start = i;
        }
    }
    return out;
}

void RunStore::write_canonical_csv(std::ostream& out) const {
    write_csv_row(out, csv_header());
    std::vector<std::string> cells(9);
    for (const MethodRun& r : runs_) {
        cells[0] = r.dataset_id;
        cells[1] = std::to_string(r.split.repeat);
        cells[2] = std::to_string(r.split.fold);
        cells[3] = r.method_id;
        cells[4] = to_string(r.subtype);
        cells[5] = to_string(r.problem_type);
        cells[6] = r.metric_name;
        cells[7] = format_double(r.val_error);
        cells[8] = format_double(r.test_error);
        write_csv_row(out, cells);
    }
}

std::vector<DatasetInfo> read_dataset_info(std::istream& in) {
    CsvReader reader(in);
    CsvRecord rec;
    if (!reader.next(rec)) throw ParseError("dataset-info CSV is empty (missing header)");
    static const std::vector<std::string> expected = {"dataset_id",   "n_instances", "n_features",
                                                      "problem_type", "n_classes",   "pct_categorical"};
    if (rec.cells != expected) throw ParseError("dataset-info CSV header mismatch");

    std::vector<DatasetInfo> infos;
    while (reader.next(rec)) {
        if (rec.cells.size() != expected.size()) {
            row_error(rec.line_no, "expected " + std::to_string(expected.size()) + " cells");
        }
        DatasetInfo info;
        info.dataset_id = rec.cells[0];
        if (info.dataset_id.empty()) row_error(rec.line_no, "empty dataset_id");

        const auto n = parse_int(rec.cells[1]);
        if (!n || *n <= 0) row_error(rec.line_no, "bad n_instances '" + rec.cells[1] + "'");
        info.n_instances = *n;

        const auto d = parse_int(rec.cells[2]);
        if (!d || *d <= 0) row_error(rec.line_no, "bad n_features '" + rec.cells[2] + "'");
        info.n_features = *d;

        const auto ptype = problem_type_from_string(rec.cells[3]);
        if (!ptype) row_error(rec.line_no, "unknown problem_type '" + rec.cells[3] + "'");
        info.problem_type = *ptype;

        if (!rec.cells[4].empty()) {
            const auto k = parse_int(rec.cells[4]);
            if (!k || *k <= 0) row_error(rec.line_no, "bad n_classes '" + rec.cells[4] + "'");
            info.n_classes = *k;
        }
        if (info.problem_type == ProblemType::regression && info.n_classes) {
            row_error(rec.line_no, "n_classes must be absent for regression datasets");
        }
        if (info.problem_type != ProblemType::regression && !info.n_classes) {
            row_error(rec.line_no, "n_classes required for classification datasets");
        }

        const auto pct = parse_double(rec.cells[5]);
        if (!pct || *pct < 0.0 || *pct > 100.0) {
            row_error(rec.line_no, "pct_categorical must be in [0,100]");
        }
        info.pct_categorical = *pct;
        infos.push_back(std::move(info));
    }
    return infos;
}

void write_dataset_info(std::ostream& out, std::span<const DatasetInfo> infos) {
    static const std::vector<std::string> header = {"dataset_id",   "n_instances", "n_features",
                                                    "problem_type", "n_classes",   "pct_categorical"};
    write_csv_row(out, header);
    std::vector<std::string> cells(6);
    for (const DatasetInfo& info : infos) {
        cells[0] = info.dataset_id;
        cells[1] = std::to_string(info.n_instances);
        cells[2] = std::to_string(info.n_features);
        cells[3] = to_string(info.problem_type);
        cells[4] = info.n_classes ? std::to_string(*info.n_classes) : std::string{};
        cells[5] = format_double(info.pct_categorical);
        write_csv_row(out, cells);
    }
}

}  // namespace tabgap
