#include "tabgap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "tabgap/csv.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/rng.hpp"

namespace tabgap {

namespace {

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

double apply_link(const PlantedLink& link, double x) {
    switch (link.kind) {
        case PlantedLink::Kind::linear: return x;
        case PlantedLink::Kind::monotone_nonlinear: return x * x * x;
    }
    return x;
}

}  // namespace

PlantedStudy gen_planted_matrix(const PlantedStudySpec& spec) {
    if (spec.n_datasets < 4) throw Error("gen_planted_matrix: need >= 4 datasets");
    if (spec.noise_sd < 0.0) throw Error("gen_planted_matrix: noise_sd must be >= 0");
    if (spec.missing_rate < 0.0 || spec.missing_rate >= 1.0) {
        throw Error("gen_planted_matrix: missing_rate must be in [0, 1)");
    }

    const std::size_t n_planted = spec.planted.size();
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (std::size_t p = 0; p < n_planted; ++p) {
        names.push_back("planted_" + std::to_string(p));
        groups.push_back(FeatureGroup::statistical);
    }
    for (int f = 0; f < spec.n_null_features; ++f) {
        names.push_back("null_" + zero_pad(f, 3));
        groups.push_back(FeatureGroup::statistical);
    }
    PlantedStudy study{MetaFeatureMatrix(std::move(names), std::move(groups)), {}, {}};
    for (std::size_t p = 0; p < n_planted; ++p) {
        study.planted_names.push_back("planted_" + std::to_string(p));
    }

    Rng value_rng(sub_seed(spec.seed, fnv1a64("planted_values"), 0));
    Rng missing_rng(sub_seed(spec.seed, fnv1a64("planted_missing"), 0));
    const std::size_t n_features = n_planted + static_cast<std::size_t>(spec.n_null_features);
    std::vector<double> row(n_features);
    for (int d = 0; d < spec.n_datasets; ++d) {
        double gap = 0.0;
        for (std::size_t p = 0; p < n_planted; ++p) {
            const double x = value_rng.normal();
            row[p] = x;
            gap += spec.planted[p].beta * apply_link(spec.planted[p], x);
        }
        for (std::size_t f = n_planted; f < n_features; ++f) row[f] = value_rng.normal();
        gap += spec.noise_sd * value_rng.normal();

        for (std::size_t f = 0; f < n_features; ++f) {
            if (spec.missing_rate > 0.0 && missing_rng.uniform01() < spec.missing_rate) {
                row[f] = kMissing;
            }
        }
        const std::string dataset_id = "ds_" + zero_pad(d, 3);
        study.matrix.append_dataset(dataset_id, row);

        GapRecord rec;
        rec.comparison_id = "synthetic";
        rec.dataset_id = dataset_id;
        rec.delta = gap;
        rec.n_splits_used = 1;
        rec.per_split_gaps = {gap};
        rec.splits = {SplitId{0, 0}};
        study.gaps.push_back(std::move(rec));
    }
    return study;
}

RawDatasetTable gen_raw_table(const std::string& dataset_id, std::size_t n_rows,
                              std::span<const SynthColumnSpec> columns, std::uint64_t seed) {
    if (columns.empty()) throw Error("gen_raw_table: need at least one column spec");
    RawDatasetTable table;
    table.dataset_id = dataset_id;
    table.n_rows = n_rows;

    Rng rng(sub_seed(seed, fnv1a64("raw_table:" + dataset_id), 0));
    for (const SynthColumnSpec& spec : columns) {
        switch (spec.kind) {
            case SynthColumnSpec::Kind::categorical_uniform: {
                if (spec.n_levels < 1) throw Error("categorical_uniform: need >= 1 level");
                RawColumn col;
                col.name = spec.name;
                col.kind = ColumnKind::categorical;
                for (int l = 0; l < spec.n_levels; ++l) col.labels.push_back("L" + std::to_string(l));
                col.codes.resize(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    col.codes[r] = static_cast<std::int32_t>(r % static_cast<std::size_t>(spec.n_levels));
                }
                table.columns.push_back(std::move(col));
                break;
            }
            case SynthColumnSpec::Kind::numeric_normal:
            case SynthColumnSpec::Kind::numeric_uniform: {
                RawColumn col;
                col.name = spec.name;
                col.kind = ColumnKind::numeric;
                col.numeric.resize(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    col.numeric[r] = spec.kind == SynthColumnSpec::Kind::numeric_normal
                                         ? rng.normal()
                                         : rng.uniform01();
                }
                table.columns.push_back(std::move(col));
                break;
            }
            case SynthColumnSpec::Kind::monotone_of_previous: {
                if (table.columns.empty()) {
                    throw Error("monotone_of_previous: no previous column");
                }
                const RawColumn& prev = table.columns.back();
                RawColumn col;
                col.name = spec.name;
                col.kind = prev.kind;
                if (prev.kind == ColumnKind::numeric) {
                    col.numeric.resize(n_rows);
                    for (std::size_t r = 0; r < n_rows; ++r) {
                        const double x = prev.numeric[r];
                        col.numeric[r] = std::isnan(x) ? kMissing : 2.0 * x + std::exp(x * 0.1);
                    }
                } else {
                    // relabeled copy: a bijection of the level set
                    col.codes = prev.codes;
                    for (std::size_t l = 0; l < prev.labels.size(); ++l) {
                        col.labels.push_back("M" + std::to_string(l));
                    }
                }
                table.columns.push_back(std::move(col));
                break;
            }
            case SynthColumnSpec::Kind::categorical_product_pair: {
                const auto ka = static_cast<std::size_t>(spec.n_levels);
                const auto kb = static_cast<std::size_t>(spec.n_levels_b);
                if (ka < 1 || kb < 1) throw Error("categorical_product_pair: need >= 1 level");
                RawColumn a, b;
                a.name = spec.name + "_a";
                b.name = spec.name + "_b";
                a.kind = b.kind = ColumnKind::categorical;
                for (std::size_t l = 0; l < ka; ++l) a.labels.push_back("A" + std::to_string(l));
                for (std::size_t l = 0; l < kb; ++l) b.labels.push_back("B" + std::to_string(l));
                a.codes.resize(n_rows);
                b.codes.resize(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    a.codes[r] = static_cast<std::int32_t>(r % ka);
                    b.codes[r] = static_cast<std::int32_t>((r / ka) % kb);
                }
                table.columns.push_back(std::move(a));
                table.columns.push_back(std::move(b));
                break;
            }
        }
        if (spec.missing_rate > 0.0) {
            RawColumn& col = table.columns.back();
            for (std::size_t r = 0; r < n_rows; ++r) {
                if (rng.uniform01() < spec.missing_rate) {
                    if (col.kind == ColumnKind::numeric) {
                        col.numeric[r] = kMissing;
                    } else {
                        col.codes[r] = -1;
                    }
                }
            }
        }
    }
    return table;
}

void gen_benchmark_runs(std::ostream& out, const BenchmarkSimSpec& spec) {
    if (spec.methods.size() < 2) throw Error("gen_benchmark_runs: need >= 2 methods");
    std::set<std::string> families;
    for (const SimMethod& m : spec.methods) families.insert(m.family_id);
    if (families.size() < 2) throw Error("gen_benchmark_runs: need >= 2 families");
    if (!spec.dataset_offsets.empty() && spec.dataset_offsets.size() != spec.dataset_ids.size()) {
        throw Error("gen_benchmark_runs: dataset_offsets must align with dataset_ids");
    }

    write_csv_row(out, RunStore::csv_header());
    // validation errors pivot around the pool center: fidelity 1 mirrors
    // the test errors, fidelity -1 reverses the method ordering
    double center = 0.0;
    for (const SimMethod& m : spec.methods) center += m.base_error;
    center /= static_cast<double>(spec.methods.size());

    std::vector<std::string> cells(9);
    for (std::size_t d = 0; d < spec.dataset_ids.size(); ++d) {
        const std::string& dataset_id = spec.dataset_ids[d];
        const double offset = spec.dataset_offsets.empty() ? 0.0 : spec.dataset_offsets[d];
        for (int rep = 0; rep < spec.n_repeats; ++rep) {
            for (int fold = 0; fold < spec.n_folds; ++fold) {
                const auto split_index =
                    static_cast<std::uint64_t>(rep * spec.n_folds + fold);
                for (const SimMethod& method : spec.methods) {
                    Rng rng(sub_seed(spec.seed, fnv1a64(dataset_id + "|" + method.method_id),
                                     split_index));
                    const double shift = method.family_id == spec.offset_family ? offset : 0.0;
                    const auto emit = [&](Subtype subtype, double gain) {
                        const double test =
                            method.base_error + shift + gain + spec.error_noise_sd * rng.normal();
                        const double val = center + spec.val_fidelity * (test - center) +
                                           spec.val_noise_sd * rng.normal();
                        cells[0] = dataset_id;
                        cells[1] = std::to_string(rep);
                        cells[2] = std::to_string(fold);
                        cells[3] = method.method_id;
                        cells[4] = to_string(subtype);
                        cells[5] = to_string(spec.problem_type);
                        cells[6] = spec.metric_name;
                        cells[7] = format_double(val);
                        cells[8] = format_double(test);
                        write_csv_row(out, cells);
                    };
                    emit(Subtype::default_, 0.0);
                    if (spec.emit_tuned) emit(Subtype::tuned, -spec.tuned_gain);
                }
            }
        }
    }
}

}  // namespace tabgap
