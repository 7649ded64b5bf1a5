#include "tabgap/metafeatures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/parallel.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/stats.hpp"

namespace tabgap {

const std::vector<std::string>& control_feature_names() {
    static const std::vector<std::string> names = {
        "log_n", "log_d", "d_over_n", "cat_fraction", "feature_missing_fraction"};
    return names;
}

namespace {

void note(std::vector<std::string>* log, const std::string& dataset_id, const std::string& msg) {
    if (log) log->push_back("[" + dataset_id + "] " + msg);
}

std::size_t count_missing_cells(const RawDatasetTable& table) {
    std::size_t total = 0;
    for (const RawColumn& col : table.columns) total += col.n_missing();
    return total;
}

/// Indices of numeric columns.
std::vector<std::size_t> numeric_columns(const RawDatasetTable& table) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c].kind == ColumnKind::numeric) out.push_back(c);
    }
    return out;
}

/// Jointly non-missing values of two numeric columns.
std::pair<std::vector<double>, std::vector<double>> complete_rows(const RawColumn& a,
                                                                  const RawColumn& b) {
    std::vector<double> xa, xb;
    const std::size_t n = a.numeric.size();
    for (std::size_t r = 0; r < n; ++r) {
        if (!std::isnan(a.numeric[r]) && !std::isnan(b.numeric[r])) {
            xa.push_back(a.numeric[r]);
            xb.push_back(b.numeric[r]);
        }
    }
    return {std::move(xa), std::move(xb)};
}

/// Floyd's algorithm: `cap` distinct indices from [0, total), ascending.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t cap, std::uint64_t seed) {
    std::vector<std::size_t> out;
    if (total <= cap) {
        out.resize(total);
        for (std::size_t i = 0; i < total; ++i) out[i] = i;
        return out;
    }
    Rng rng(seed);
    std::set<std::size_t> chosen;
    for (std::size_t j = total - cap; j < total; ++j) {
        const std::size_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

std::pair<std::size_t, std::size_t> unordered_pair_at(std::size_t index, std::size_t d) {
    std::size_t i = 0;
    std::size_t consumed = 0;
    while (index >= consumed + (d - 1 - i)) {
        consumed += d - 1 - i;
        ++i;
    }
    return {i, i + 1 + (index - consumed)};
}

std::pair<std::size_t, std::size_t> ordered_pair_at(std::size_t index, std::size_t d) {
    const std::size_t i = index / (d - 1);
    const std::size_t r = index % (d - 1);
    return {i, r < i ? r : r + 1};
}

/// Spearman over jointly non-missing rows; NaN when degenerate.
double pair_spearman(const RawColumn& a, const RawColumn& b) {
    const auto [xa, xb] = complete_rows(a, b);
    return spearman(xa, xb);
}

/// Pairwise-complete Spearman correlation matrix of numeric columns;
/// undefined entries fall back to 0.
Eigen::MatrixXd spearman_matrix(const RawDatasetTable& table,
                                std::span<const std::size_t> cols, std::size_t* n_undefined) {
    const auto d = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            double r = pair_spearman(table.columns[cols[static_cast<std::size_t>(i)]],
                                     table.columns[cols[static_cast<std::size_t>(j)]]);
            if (is_missing(r)) {
                r = 0.0;
                if (n_undefined) ++*n_undefined;
            }
            rho(i, j) = rho(j, i) = r;
        }
    }
    return rho;
}

/// Pairwise-complete covariance matrix; undefined entries fall back to 0.
Eigen::MatrixXd covariance_matrix(const RawDatasetTable& table,
                                  std::span<const std::size_t> cols) {
    const auto d = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto vi = drop_missing(table.columns[cols[static_cast<std::size_t>(i)]].numeric);
        const double var = vec_variance(vi);
        cov(i, i) = is_missing(var) ? 0.0 : var;
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const auto [xa, xb] = complete_rows(table.columns[cols[static_cast<std::size_t>(i)]],
                                                table.columns[cols[static_cast<std::size_t>(j)]]);
            double c = kMissing;
            if (xa.size() >= 2) {
                const double ma = vec_mean(xa);
                const double mb = vec_mean(xb);
                double s = 0.0;
                for (std::size_t r = 0; r < xa.size(); ++r) s += (xa[r] - ma) * (xb[r] - mb);
                c = s / static_cast<double>(xa.size() - 1);
            }
            cov(i, j) = cov(j, i) = is_missing(c) ? 0.0 : c;
        }
    }
    return cov;
}

double sparsity_of(const RawColumn& col) {
    std::size_t m = 0;
    for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col.cell_missing(r)) ++m;
    }
    if (m < 2) return kMissing;
    const double phi = static_cast<double>(col.n_distinct());
    return (1.0 / static_cast<double>(m - 1)) * (static_cast<double>(m) / phi - 1.0);
}

/// Discretized view of any column: categorical codes pass through,
/// numeric columns go through equal-frequency binning.
std::vector<std::int32_t> discretized_codes(const RawColumn& col) {
    if (col.kind == ColumnKind::categorical) return col.codes;
    return discretize_equal_frequency(col.numeric);
}

}  // namespace

SpectrumSummary spectrum_summary(std::span<const double> eigenvalues) {
    double sum = 0.0, sum_sq = 0.0;
    for (double lambda : eigenvalues) {
        const double clipped = std::max(lambda, 0.0);
        sum += clipped;
        sum_sq += clipped * clipped;
    }
    if (sum <= 0.0) return {kMissing, kMissing};
    double entropy = 0.0;
    for (double lambda : eigenvalues) {
        if (lambda > 0.0) {
            const double p = lambda / sum;
            entropy -= p * std::log(p);
        }
    }
    return {std::exp(entropy), sum * sum / sum_sq};
}

std::vector<std::string> summarizer_names(const std::string& base_name) {
    std::vector<std::string> names;
    names.reserve(24);
    for (const char* s : {"mean", "sd", "median", "min", "max", "range", "iq_range",
                          "skewness", "kurtosis"}) {
        names.push_back(base_name + "." + s);
    }
    for (int q = 0; q <= 4; ++q) names.push_back(base_name + ".quantiles." + std::to_string(q));
    for (int b = 0; b <= 9; ++b) names.push_back(base_name + ".histogram." + std::to_string(b));
    return names;
}

std::vector<std::pair<std::string, double>> summarize(const std::string& base_name,
                                                      std::span<const double> vec) {
    const auto clean = drop_missing(vec);
    const auto names = summarizer_names(base_name);
    std::vector<double> values;
    values.reserve(24);

    std::vector<double> sorted = clean;
    std::sort(sorted.begin(), sorted.end());

    values.push_back(vec_mean(clean));
    values.push_back(vec_sd(clean));
    values.push_back(quantile_sorted(sorted, 0.5));
    values.push_back(vec_min(clean));
    values.push_back(vec_max(clean));
    values.push_back(clean.empty() ? kMissing : vec_max(clean) - vec_min(clean));
    values.push_back(clean.empty() ? kMissing
                                   : quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25));
    values.push_back(skewness_g1(clean));
    values.push_back(kurtosis_g2(clean));
    for (int q = 0; q <= 4; ++q) values.push_back(quantile_sorted(sorted, 0.25 * q));
    const auto bins = histogram10(clean);
    values.insert(values.end(), bins.begin(), bins.end());

    std::vector<std::pair<std::string, double>> out;
    out.reserve(24);
    for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(names[i], values[i]);
    return out;
}

std::vector<std::int32_t> discretize_equal_frequency(std::span<const double> values) {
    std::vector<std::int32_t> codes(values.size(), -1);
    std::vector<double> clean = drop_missing(values);
    const std::size_t m = clean.size();
    if (m == 0) return codes;
    std::sort(clean.begin(), clean.end());

    std::size_t distinct = 1;
    for (std::size_t i = 1; i < m; ++i) {
        if (clean[i] != clean[i - 1]) ++distinct;
    }
    const auto rice = static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(static_cast<double>(m))));
    const std::size_t k = std::min(distinct, rice);
    if (k <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isnan(values[i])) codes[i] = 0;
        }
        return codes;
    }

    std::vector<double> cuts;
    cuts.reserve(k - 1);
    for (std::size_t j = 1; j < k; ++j) {
        const double c = quantile_sorted(clean, static_cast<double>(j) / static_cast<double>(k));
        if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) continue;
        // values equal to a cut fall into the lower bin
        const auto it = std::lower_bound(cuts.begin(), cuts.end(), values[i]);
        codes[i] = static_cast<std::int32_t>(it - cuts.begin());
    }
    return codes;
}

double attr_entropy(const RawColumn& column) {
    std::map<std::int32_t, std::size_t> counts;
    std::size_t m = 0;
    for (std::int32_t code : discretized_codes(column)) {
        if (code < 0) continue;
        ++counts[code];
        ++m;
    }
    if (m == 0) return kMissing;
    double h = 0.0;
    for (const auto& [_, count] : counts) {
        const double p = static_cast<double>(count) / static_cast<double>(m);
        h -= p * std::log(p);
    }
    return h;
}

double goodman_kruskal_tau(std::span<const std::int32_t> x, std::span<const std::int32_t> y) {
    if (x.size() != y.size()) throw Error("goodman_kruskal_tau: misaligned columns");
    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> joint;
    std::map<std::int32_t, std::size_t> mx, my;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.size(); ++r) {
        if (x[r] < 0 || y[r] < 0) continue;
        ++joint[{x[r], y[r]}];
        ++mx[x[r]];
        ++my[y[r]];
        ++n;
    }
    if (n == 0 || my.size() < 2) return kMissing;

    const double nd = static_cast<double>(n);
    double sum_py2 = 0.0;
    for (const auto& [_, cnt] : my) {
        const double p = static_cast<double>(cnt) / nd;
        sum_py2 += p * p;
    }
    double sum_cond = 0.0;
    for (const auto& [cell, cnt] : joint) {
        const double pxy = static_cast<double>(cnt) / nd;
        const double px = static_cast<double>(mx[cell.first]) / nd;
        sum_cond += pxy * pxy / px;
    }
    const double denom = 1.0 - sum_py2;
    if (denom <= 0.0) return kMissing;
    return (sum_cond - sum_py2) / denom;
}

std::vector<NamedValue> extract_basic(const RawDatasetTable& table,
                                      const MetaFeatureOptions& options) {
    if (table.columns.empty()) throw Error("extract_basic: table has no feature columns");
    const double n = static_cast<double>(table.n_rows);
    const double d = static_cast<double>(table.columns.size());

    std::size_t n_categorical = 0;
    std::size_t n_high_card = 0;
    for (const RawColumn& col : table.columns) {
        if (col.kind != ColumnKind::categorical) continue;
        ++n_categorical;
        if (col.n_distinct() > static_cast<std::size_t>(options.high_cardinality_threshold)) {
            ++n_high_card;
        }
    }
    const double missing_cells = static_cast<double>(count_missing_cells(table));

    return {
        {"n", n, FeatureGroup::basic},
        {"d", d, FeatureGroup::basic},
        {"log_n", std::log(n), FeatureGroup::basic},
        {"log_d", std::log(d), FeatureGroup::basic},
        {"d_over_n", d / n, FeatureGroup::basic},
        {"cat_fraction", static_cast<double>(n_categorical) / d, FeatureGroup::basic},
        {"feature_missing_fraction", missing_cells / (n * d), FeatureGroup::basic},
        {"high_cardinality_fraction", static_cast<double>(n_high_card) / d, FeatureGroup::basic},
    };
}

std::vector<NamedValue> extract_redundancy(const RawDatasetTable& table,
                                           const MetaFeatureOptions& options,
                                           std::vector<std::string>* log) {
    const auto cols = numeric_columns(table);
    const std::size_t dn = cols.size();

    double high_corr = kMissing, nr_cor = kMissing;
    double eff_rank = kMissing, part_ratio = kMissing;

    if (dn >= 2) {
        const std::size_t total_pairs = dn * (dn - 1) / 2;
        const auto chosen =
            sample_indices(total_pairs, options.pair_cap,
                           sub_seed(options.seed, fnv1a64("numeric_pairs:" + table.dataset_id), 0));
        if (chosen.size() < total_pairs) {
            note(log, table.dataset_id,
                 "pair cap: sampled " + std::to_string(chosen.size()) + " of " +
                     std::to_string(total_pairs) + " numeric pairs");
        }
        std::size_t valid = 0, above_high = 0, above_low = 0;
        for (std::size_t idx : chosen) {
            const auto [i, j] = unordered_pair_at(idx, dn);
            const double rho = pair_spearman(table.columns[cols[i]], table.columns[cols[j]]);
            if (is_missing(rho)) continue;
            ++valid;
            if (std::fabs(rho) > options.high_corr_threshold) ++above_high;
            if (std::fabs(rho) > options.cor_attr_threshold) ++above_low;
        }
        if (valid > 0) {
            high_corr = static_cast<double>(above_high) / static_cast<double>(valid);
            nr_cor = static_cast<double>(above_low) / static_cast<double>(valid);
        } else {
            note(log, table.dataset_id, "redundancy fractions undefined: no valid numeric pair");
        }

        if (dn <= options.max_eigen_columns) {
            std::size_t undefined = 0;
            const Eigen::MatrixXd rho = spearman_matrix(table, cols, &undefined);
            if (undefined > 0) {
                note(log, table.dataset_id,
                     std::to_string(undefined) + " undefined correlations set to 0 for spectrum");
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
            const Eigen::VectorXd raw = es.eigenvalues();
            const std::vector<double> lambdas(raw.data(), raw.data() + raw.size());
            const SpectrumSummary summary = spectrum_summary(lambdas);
            if (is_missing(summary.effective_rank)) {
                note(log, table.dataset_id, "spectrum features undefined: no positive eigenvalue");
            } else {
                eff_rank = summary.effective_rank;
                part_ratio = summary.participation_ratio;
            }
        } else {
            note(log, table.dataset_id,
                 "spectrum features skipped: " + std::to_string(dn) + " numeric columns exceed cap " +
                     std::to_string(options.max_eigen_columns));
        }
    } else {
        note(log, table.dataset_id, "redundancy features undefined: fewer than 2 numeric columns");
    }

    return {
        {"high_corr_pair_fraction", high_corr, FeatureGroup::redundancy},
        {"nr_cor_attr", nr_cor, FeatureGroup::redundancy},
        {"effective_rank", eff_rank, FeatureGroup::redundancy},
        {"participation_ratio", part_ratio, FeatureGroup::redundancy},
    };
}

std::vector<NamedValue> extract_statistical(const RawDatasetTable& table,
                                            const MetaFeatureOptions& options,
                                            std::vector<std::string>* log) {
    const auto cols = numeric_columns(table);
    const std::size_t dn = cols.size();
    const std::size_t d_all = table.columns.size();

    // Per-attribute base vectors over numeric columns.
    const std::vector<std::string> per_attr_names = {"mean",     "sd",    "var",      "median",
                                                     "min",      "max",   "range",    "iq_range",
                                                     "mad",      "t_mean", "skewness", "kurtosis",
                                                     "sparsity"};
    std::map<std::string, std::vector<double>> base;
    for (const auto& name : per_attr_names) base[name] = {};

    for (std::size_t c : cols) {
        const auto clean = drop_missing(table.columns[c].numeric);
        std::vector<double> sorted = clean;
        std::sort(sorted.begin(), sorted.end());
        base["mean"].push_back(vec_mean(clean));
        base["sd"].push_back(vec_sd(clean));
        base["var"].push_back(vec_variance(clean));
        base["median"].push_back(quantile_sorted(sorted, 0.5));
        base["min"].push_back(vec_min(clean));
        base["max"].push_back(vec_max(clean));
        base["range"].push_back(clean.empty() ? kMissing : vec_max(clean) - vec_min(clean));
        base["iq_range"].push_back(clean.empty() ? kMissing
                                                 : quantile_sorted(sorted, 0.75) -
                                                       quantile_sorted(sorted, 0.25));
        base["mad"].push_back(mad_scaled(clean));
        base["t_mean"].push_back(trimmed_mean(clean, 0.10));
        base["skewness"].push_back(skewness_g1(clean));
        base["kurtosis"].push_back(kurtosis_g2(clean));
        base["sparsity"].push_back(sparsity_of(table.columns[c]));
    }

    // Pairwise base vectors: cor/cov over numeric pairs, attr_conc over
    // ordered discretized pairs.
    std::vector<double> cor_vec, cov_vec, conc_vec;
    if (dn >= 2) {
        const std::size_t total_pairs = dn * (dn - 1) / 2;
        const auto chosen =
            sample_indices(total_pairs, options.pair_cap,
                           sub_seed(options.seed, fnv1a64("numeric_pairs:" + table.dataset_id), 0));
        for (std::size_t idx : chosen) {
            const auto [i, j] = unordered_pair_at(idx, dn);
            const auto [xa, xb] = complete_rows(table.columns[cols[i]], table.columns[cols[j]]);
            const double rho = pearson(xa, xb);
            cor_vec.push_back(is_missing(rho) ? kMissing : std::fabs(rho));
            double cv = kMissing;
            if (xa.size() >= 2) {
                const double ma = vec_mean(xa);
                const double mb = vec_mean(xb);
                double s = 0.0;
                for (std::size_t r = 0; r < xa.size(); ++r) s += (xa[r] - ma) * (xb[r] - mb);
                cv = std::fabs(s / static_cast<double>(xa.size() - 1));
            }
            cov_vec.push_back(cv);
        }
    }
    if (d_all >= 2) {
        std::vector<std::vector<std::int32_t>> codes(d_all);
        for (std::size_t c = 0; c < d_all; ++c) codes[c] = discretized_codes(table.columns[c]);
        const std::size_t total_ordered = d_all * (d_all - 1);
        const auto chosen =
            sample_indices(total_ordered, options.pair_cap,
                           sub_seed(options.seed, fnv1a64("ordered_pairs:" + table.dataset_id), 0));
        if (chosen.size() < total_ordered) {
            note(log, table.dataset_id,
                 "pair cap: sampled " + std::to_string(chosen.size()) + " of " +
                     std::to_string(total_ordered) + " ordered pairs for attr_conc");
        }
        for (std::size_t idx : chosen) {
            const auto [i, j] = ordered_pair_at(idx, d_all);
            conc_vec.push_back(goodman_kruskal_tau(codes[i], codes[j]));
        }
    }

    // Per-attribute entropy over all columns.
    std::vector<double> ent_vec;
    ent_vec.reserve(d_all);
    for (const RawColumn& col : table.columns) ent_vec.push_back(attr_entropy(col));

    // Covariance spectrum of numeric columns.
    std::vector<double> eig_vec;
    if (dn >= 2 && dn <= options.max_eigen_columns) {
        const Eigen::MatrixXd cov = covariance_matrix(table, cols);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        const Eigen::VectorXd ev = es.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) eig_vec.push_back(ev(i));
    } else if (dn > options.max_eigen_columns) {
        note(log, table.dataset_id, "covariance spectrum skipped: column cap exceeded");
    }

    std::vector<NamedValue> out;
    const auto emit = [&](const std::string& base_name, std::span<const double> vec) {
        for (auto& [name, value] : summarize(base_name, vec)) {
            out.push_back({name, value, FeatureGroup::statistical});
        }
    };
    for (const auto& name : per_attr_names) emit(name, base[name]);
    emit("cor", cor_vec);
    emit("cov", cov_vec);
    emit("attr_conc", conc_vec);
    emit("attr_ent", ent_vec);
    emit("eigenvalues", eig_vec);
    return out;
}

std::vector<NamedValue> compute_controls(const RawDatasetTable& table) {
    if (table.columns.empty()) throw Error("compute_controls: table has no feature columns");
    const double n = static_cast<double>(table.n_rows);
    const double d = static_cast<double>(table.columns.size());
    std::size_t n_categorical = 0;
    for (const RawColumn& col : table.columns) {
        if (col.kind == ColumnKind::categorical) ++n_categorical;
    }
    const double missing_cells = static_cast<double>(count_missing_cells(table));
    return {
        {"log_n", std::log(n), FeatureGroup::control},
        {"log_d", std::log(d), FeatureGroup::control},
        {"d_over_n", d / n, FeatureGroup::control},
        {"cat_fraction", static_cast<double>(n_categorical) / d, FeatureGroup::control},
        {"feature_missing_fraction", missing_cells / (n * d), FeatureGroup::control},
    };
}

std::vector<NamedValue> extract_all(const RawDatasetTable& table,
                                    const MetaFeatureOptions& options,
                                    std::vector<std::string>* log) {
    std::vector<NamedValue> out = compute_controls(table);
    std::set<std::string> control_names(control_feature_names().begin(),
                                        control_feature_names().end());
    for (auto& v : extract_basic(table, options)) {
        if (!control_names.count(v.name)) out.push_back(std::move(v));
    }
    for (auto& v : extract_redundancy(table, options, log)) out.push_back(std::move(v));
    for (auto& v : extract_statistical(table, options, log)) out.push_back(std::move(v));
    return out;
}

MetaFeatureMatrix build_matrix(std::span<const RawDatasetTable> tables,
                               const MetaFeatureOptions& options, int jobs,
                               std::vector<std::string>* log) {
    if (tables.empty()) throw Error("build_matrix: no datasets");

    std::vector<std::vector<NamedValue>> rows(tables.size());
    std::vector<std::vector<std::string>> logs(tables.size());
    parallel_for(tables.size(), jobs, [&](std::size_t i) {
        rows[i] = extract_all(tables[i], options, log ? &logs[i] : nullptr);
    });
    if (log) {
        for (auto& l : logs) log->insert(log->end(), l.begin(), l.end());
    }

    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (const NamedValue& v : rows[0]) {
        names.push_back(v.name);
        groups.push_back(v.group);
    }
    MetaFeatureMatrix matrix(std::move(names), std::move(groups));
    std::vector<double> cells(rows[0].size());
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (rows[i].size() != cells.size()) {
            throw Error("inconsistent feature schema for dataset '" + tables[i].dataset_id + "'");
        }
        for (std::size_t f = 0; f < cells.size(); ++f) cells[f] = rows[i][f].value;
        matrix.append_dataset(tables[i].dataset_id, cells);
    }
    return matrix;
}

}  // namespace tabgap
