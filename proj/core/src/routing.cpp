#include "tabgap/routing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tabgap/error.hpp"
#include "tabgap/json_util.hpp"
#include "tabgap/parallel.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/stats.hpp"
#include "tabgap/subprocess.hpp"

namespace tabgap {

std::string to_string(FeatureSetKind k) {
    switch (k) {
        case FeatureSetKind::controls: return "controls";
        case FeatureSetKind::all: return "all";
        case FeatureSetKind::controls_plus_all: return "controls_plus_all";
        case FeatureSetKind::robust: return "robust";
        case FeatureSetKind::controls_plus_robust: return "controls_plus_robust";
    }
    return "unknown";
}

std::optional<FeatureSetKind> feature_set_kind_from_string(const std::string& s) {
    if (s == "controls") return FeatureSetKind::controls;
    if (s == "all") return FeatureSetKind::all;
    if (s == "controls_plus_all") return FeatureSetKind::controls_plus_all;
    if (s == "robust") return FeatureSetKind::robust;
    if (s == "controls_plus_robust") return FeatureSetKind::controls_plus_robust;
    return std::nullopt;
}

std::string PredictorSpec::name() const {
    if (!label.empty()) return label;
    switch (kind) {
        case Kind::knn: return "knn";
        case Kind::rank_ridge: return "rank_ridge";
        case Kind::external: return "external";
    }
    return "unknown";
}

std::vector<FeatureSetSpec> resolve_feature_sets(const MetaFeatureMatrix& matrix,
                                                 std::span<const std::string> control_names,
                                                 std::span<const std::string> retained_features,
                                                 std::span<const FeatureSetKind> kinds,
                                                 std::vector<std::string>* log) {
    std::vector<std::string> controls;
    for (const std::string& c : control_names) {
        if (matrix.feature_index(c)) controls.push_back(c);
    }
    const std::set<std::string> control_set(controls.begin(), controls.end());
    std::vector<std::string> all;
    for (const std::string& name : matrix.feature_names()) {
        if (!control_set.count(name)) all.push_back(name);
    }
    std::vector<std::string> robust;
    for (const std::string& name : retained_features) {
        if (matrix.feature_index(name)) robust.push_back(name);
    }

    std::vector<FeatureSetSpec> out;
    for (FeatureSetKind kind : kinds) {
        FeatureSetSpec spec;
        spec.kind = kind;
        switch (kind) {
            case FeatureSetKind::controls: spec.resolved_columns = controls; break;
            case FeatureSetKind::all: spec.resolved_columns = all; break;
            case FeatureSetKind::controls_plus_all:
                spec.resolved_columns = controls;
                spec.resolved_columns.insert(spec.resolved_columns.end(), all.begin(), all.end());
                break;
            case FeatureSetKind::robust: spec.resolved_columns = robust; break;
            case FeatureSetKind::controls_plus_robust:
                spec.resolved_columns = controls;
                for (const std::string& r : robust) {
                    if (!control_set.count(r)) spec.resolved_columns.push_back(r);
                }
                break;
        }
        const bool robust_kind =
            kind == FeatureSetKind::robust || kind == FeatureSetKind::controls_plus_robust;
        if (robust_kind && robust.empty()) {
            if (log) log->push_back("feature set '" + to_string(kind) + "' skipped: no retained feature");
            continue;
        }
        if (spec.resolved_columns.empty()) {
            if (log) log->push_back("feature set '" + to_string(kind) + "' skipped: resolves to no columns");
            continue;
        }
        spec.n_pred = static_cast<int>(spec.resolved_columns.size());
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<LodoFold> lodo_folds(std::span<const std::string> dataset_ids) {
    if (dataset_ids.size() < 2) throw Error("lodo_folds: need at least 2 datasets");
    std::vector<std::string> sorted(dataset_ids.begin(), dataset_ids.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<LodoFold> folds;
    folds.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        LodoFold fold;
        fold.held_out = sorted[i];
        fold.train.reserve(sorted.size() - 1);
        for (std::size_t j = 0; j < sorted.size(); ++j) {
            if (j != i) fold.train.push_back(sorted[j]);
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

FoldData assemble_fold(const MetaFeatureMatrix& matrix, std::span<const GapRecord> gaps,
                       std::span<const std::string> columns, const LodoFold& fold) {
    std::map<std::string, double> gap_of;
    for (const GapRecord& g : gaps) gap_of[g.dataset_id] = g.delta;

    std::vector<std::size_t> col_idx;
    col_idx.reserve(columns.size());
    for (const std::string& c : columns) {
        const auto idx = matrix.feature_index(c);
        if (!idx) throw Error("feature '" + c + "' not in matrix");
        col_idx.push_back(*idx);
    }
    const auto row_of = [&](const std::string& dataset_id) {
        const auto d = matrix.dataset_index(dataset_id);
        if (!d) throw Error("dataset '" + dataset_id + "' not in matrix");
        std::vector<double> row(col_idx.size());
        for (std::size_t c = 0; c < col_idx.size(); ++c) row[c] = matrix.cell(*d, col_idx[c]);
        return row;
    };

    FoldData data;
    for (const std::string& id : fold.train) {
        const auto it = gap_of.find(id);
        if (it == gap_of.end()) throw Error("dataset '" + id + "' has no gap");
        data.train_rows.push_back(row_of(id));
        data.train_gaps.push_back(it->second);
    }
    data.test_row = row_of(fold.held_out);
    return data;
}

namespace {

/// Column-wise train medians; NaN when a training column is all-missing.
std::vector<double> train_medians(const std::vector<std::vector<double>>& rows,
                                  std::size_t n_cols) {
    std::vector<double> medians(n_cols, kMissing);
    std::vector<double> buf;
    for (std::size_t c = 0; c < n_cols; ++c) {
        buf.clear();
        for (const auto& row : rows) {
            if (!is_missing(row[c])) buf.push_back(row[c]);
        }
        if (!buf.empty()) medians[c] = vec_median(buf);
    }
    return medians;
}

double knn_predict(const PredictorSpec& spec, const FoldData& fold,
                   std::vector<std::string>* log) {
    const std::size_t n_train = fold.train_rows.size();
    const std::size_t n_cols = fold.test_row.size();
    if (n_train == 0) throw Error("knn: empty training set");

    const auto medians = train_medians(fold.train_rows, n_cols);
    // impute: train medians, falling back to 0 for all-missing columns
    auto imputed = fold.train_rows;
    std::vector<double> test = fold.test_row;
    for (std::size_t c = 0; c < n_cols; ++c) {
        const double fill = is_missing(medians[c]) ? 0.0 : medians[c];
        if (is_missing(medians[c]) && log) {
            log->push_back("knn: all-missing training column " + std::to_string(c) +
                           ", imputing 0 after scaling");
        }
        for (auto& row : imputed) {
            if (is_missing(row[c])) row[c] = fill;
        }
        if (is_missing(test[c])) test[c] = fill;
    }
    // z-score with train statistics; constant training columns contribute 0
    std::vector<std::vector<double>> scaled(n_train, std::vector<double>());
    std::vector<double> test_scaled;
    std::vector<double> col(n_train);
    for (std::size_t c = 0; c < n_cols; ++c) {
        for (std::size_t i = 0; i < n_train; ++i) col[i] = imputed[i][c];
        const double mean = vec_mean(col);
        double sd = n_train >= 2 ? vec_sd(col) : 0.0;
        if (is_missing(sd)) sd = 0.0;
        if (sd <= 0.0) {
            for (std::size_t i = 0; i < n_train; ++i) scaled[i].push_back(0.0);
            test_scaled.push_back(0.0);
        } else {
            for (std::size_t i = 0; i < n_train; ++i) scaled[i].push_back((col[i] - mean) / sd);
            test_scaled.push_back((test[c] - mean) / sd);
        }
    }
    // collapse exact duplicate columns so copies cannot double-count
    std::vector<std::size_t> kept_cols;
    for (std::size_t c = 0; c < n_cols; ++c) {
        bool duplicate = false;
        for (std::size_t k : kept_cols) {
            bool same = test_scaled[c] == test_scaled[k];
            for (std::size_t i = 0; same && i < n_train; ++i) {
                same = scaled[i][c] == scaled[i][k];
            }
            if (same) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept_cols.push_back(c);
    }

    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        double ss = 0.0;
        for (std::size_t c : kept_cols) {
            const double d = scaled[i][c] - test_scaled[c];
            ss += d * d;
        }
        dist[i] = {std::sqrt(ss), i};
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, spec.k)),
                                                n_train);

    // exact matches dominate: average their gaps
    double zero_sum = 0.0;
    std::size_t zero_count = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (dist[i].first == 0.0) {
            zero_sum += fold.train_gaps[dist[i].second];
            ++zero_count;
        }
    }
    if (zero_count > 0) return zero_sum / static_cast<double>(zero_count);

    double wsum = 0.0, psum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / dist[i].first;
        wsum += w;
        psum += w * fold.train_gaps[dist[i].second];
    }
    return psum / wsum;
}

double rank_ridge_predict(const PredictorSpec& spec, const FoldData& fold) {
    const std::size_t n_train = fold.train_rows.size();
    const std::size_t n_cols = fold.test_row.size();
    if (n_train == 0) throw Error("rank_ridge: empty training set");

    const auto medians = train_medians(fold.train_rows, n_cols);
    std::vector<std::vector<double>> z_cols;  // standardized rank columns over train
    std::vector<double> z_test;
    std::vector<double> col(n_train);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const double fill = is_missing(medians[c]) ? 0.0 : medians[c];
        for (std::size_t i = 0; i < n_train; ++i) {
            const double v = fold.train_rows[i][c];
            col[i] = is_missing(v) ? fill : v;
        }
        auto ranks = midranks(col);
        const double sd = n_train >= 2 ? vec_sd(ranks) : 0.0;
        if (is_missing(sd) || sd <= 0.0) continue;  // constant column carries nothing
        const double mean = vec_mean(ranks);
        for (double& r : ranks) r = (r - mean) / sd;
        const double tv = is_missing(fold.test_row[c]) ? fill : fold.test_row[c];
        z_test.push_back((midrank_against(col, tv) - mean) / sd);
        z_cols.push_back(std::move(ranks));
    }

    const double y_mean = vec_mean(fold.train_gaps);
    if (z_cols.empty()) return y_mean;

    const auto p = static_cast<Eigen::Index>(z_cols.size());
    const auto n = static_cast<Eigen::Index>(n_train);
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = fold.train_gaps[static_cast<std::size_t>(i)] - y_mean;
        for (Eigen::Index c = 0; c < p; ++c) {
            design(i, c) = z_cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        }
    }
    const Eigen::MatrixXd gram =
        design.transpose() * design + spec.lambda * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd beta = gram.ldlt().solve(design.transpose() * y);
    double pred = y_mean;
    for (Eigen::Index c = 0; c < p; ++c) pred += beta(c) * z_test[static_cast<std::size_t>(c)];
    return pred;
}

double external_predict(const PredictorSpec& spec, const FoldData& fold,
                        std::span<const std::string> columns) {
    if (spec.command.empty()) throw PredictorError("external predictor has no command");
    const std::vector<std::vector<double>> test_rows = {fold.test_row};
    const std::string request =
        external_request_json(columns, fold.train_rows, fold.train_gaps, test_rows);
    const SubprocessResult res = run_with_input(spec.command, request, spec.timeout_seconds);
    if (res.timed_out) {
        throw PredictorError("external predictor timed out after " +
                             std::to_string(spec.timeout_seconds) + "s");
    }
    if (res.exit_code != 0) {
        throw PredictorError("external predictor exited with " + std::to_string(res.exit_code) +
                             "; stderr: " + res.err);
    }
    const auto preds = external_response_preds(res.out);
    if (preds.size() != 1) {
        throw PredictorError("external predictor returned " + std::to_string(preds.size()) +
                             " predictions, expected 1; stdout: " + res.out);
    }
    if (!std::isfinite(preds[0])) throw PredictorError("external predictor returned non-finite value");
    return preds[0];
}

}  // namespace

double fit_predict(const PredictorSpec& predictor, const FoldData& fold,
                   std::span<const std::string> columns, std::vector<std::string>* log) {
    if (fold.train_rows.empty()) throw Error("fit_predict: empty training set");
    for (const auto& row : fold.train_rows) {
        if (row.size() != fold.test_row.size()) {
            throw Error("fit_predict: train/test column mismatch");
        }
    }
    switch (predictor.kind) {
        case PredictorSpec::Kind::knn: return knn_predict(predictor, fold, log);
        case PredictorSpec::Kind::rank_ridge: return rank_ridge_predict(predictor, fold);
        case PredictorSpec::Kind::external: return external_predict(predictor, fold, columns);
    }
    throw Error("fit_predict: unknown predictor kind");
}

BaselinePrediction baseline_predictions(std::span<const double> train_gaps) {
    if (train_gaps.empty()) throw Error("baseline_predictions: empty training set");
    BaselinePrediction out;
    out.mean_pred = vec_mean(train_gaps);
    std::size_t positive = 0, negative = 0;
    for (double g : train_gaps) {
        if (g > 0.0) ++positive;
        else if (g < 0.0) ++negative;
    }
    out.majority_sign = negative > positive ? -1 : 1;
    return out;
}

bool sign_correct(double predicted, double truth) {
    const auto sgn = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
    return sgn(predicted) == sgn(truth);
}

namespace {

struct Metrics {
    double mae = 0.0;
    double sign_acc = 0.0;
};

Metrics compute_metrics(std::span<const double> truths, std::span<const double> preds,
                        std::span<const double> sign_preds) {
    Metrics m;
    const std::size_t n = truths.size();
    for (std::size_t i = 0; i < n; ++i) {
        m.mae += std::fabs(truths[i] - preds[i]);
        if (sign_correct(sign_preds[i], truths[i])) m.sign_acc += 1.0;
    }
    m.mae /= static_cast<double>(n);
    m.sign_acc /= static_cast<double>(n);
    return m;
}

/// Percentile bootstrap over per-dataset pairs, one deterministic stream
/// per result row.
void attach_intervals(PredictiveResult& result, std::span<const double> truths,
                      std::span<const double> preds, std::span<const double> sign_preds,
                      const BootstrapConfig& cfg) {
    const std::size_t n = truths.size();
    const std::uint64_t stream =
        fnv1a64(result.comparison_id + "|" + result.predictor + "|" + result.feature_set);
    std::vector<double> maes, signs;
    maes.reserve(static_cast<std::size_t>(cfg.n_resamples));
    signs.reserve(static_cast<std::size_t>(cfg.n_resamples));
    std::vector<double> bt(n), bp(n), bs(n);
    for (int b = 0; b < cfg.n_resamples; ++b) {
        Rng rng(sub_seed(cfg.seed, stream, static_cast<std::uint64_t>(b)));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = rng.below(n);
            bt[i] = truths[idx];
            bp[i] = preds[idx];
            bs[i] = sign_preds[idx];
        }
        const Metrics m = compute_metrics(bt, bp, bs);
        maes.push_back(m.mae);
        signs.push_back(m.sign_acc);
    }
    const Interval mae_ci = percentile_interval(maes, cfg.ci_level);
    const Interval sign_ci = percentile_interval(signs, cfg.ci_level);
    result.mae_lo = mae_ci.lo;
    result.mae_hi = mae_ci.hi;
    result.sign_lo = sign_ci.lo;
    result.sign_hi = sign_ci.hi;
}

}  // namespace

std::vector<PredictiveResult> evaluate_lodo(const std::string& comparison_id,
                                            const MetaFeatureMatrix& matrix,
                                            std::span<const GapRecord> gaps,
                                            std::span<const FeatureSetSpec> feature_sets,
                                            std::span<const PredictorSpec> predictors,
                                            const BootstrapConfig& cfg, int jobs,
                                            std::vector<std::string>* log) {
    std::vector<std::string> dataset_ids;
    for (const GapRecord& g : gaps) {
        if (matrix.dataset_index(g.dataset_id)) {
            dataset_ids.push_back(g.dataset_id);
        } else if (log) {
            log->push_back("[" + comparison_id + "] dataset '" + g.dataset_id +
                           "' has a gap but no meta-feature row; excluded from LODO");
        }
    }
    const auto folds = lodo_folds(dataset_ids);
    const std::size_t n = folds.size();

    std::vector<double> truths(n);
    {
        std::map<std::string, double> gap_of;
        for (const GapRecord& g : gaps) gap_of[g.dataset_id] = g.delta;
        for (std::size_t i = 0; i < n; ++i) truths[i] = gap_of.at(folds[i].held_out);
    }

    std::vector<PredictiveResult> results;

    // Baseline row: mean predictor scores MAE, majority-sign scores direction.
    {
        std::vector<double> mean_preds(n), sign_preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> train_gaps;
            train_gaps.reserve(folds[i].train.size());
            std::map<std::string, double> gap_of;
            for (const GapRecord& g : gaps) gap_of[g.dataset_id] = g.delta;
            for (const std::string& id : folds[i].train) train_gaps.push_back(gap_of.at(id));
            const auto base = baseline_predictions(train_gaps);
            mean_preds[i] = base.mean_pred;
            sign_preds[i] = static_cast<double>(base.majority_sign);
        }
        PredictiveResult r;
        r.comparison_id = comparison_id;
        r.predictor = "baseline";
        r.feature_set = "baseline";
        r.n = static_cast<int>(n);
        r.n_pred = 0;
        const Metrics m = compute_metrics(truths, mean_preds, sign_preds);
        r.mae = m.mae;
        r.sign_accuracy = m.sign_acc;
        attach_intervals(r, truths, mean_preds, sign_preds, cfg);
        for (std::size_t i = 0; i < n; ++i) {
            r.per_dataset.push_back({folds[i].held_out, truths[i], mean_preds[i]});
        }
        results.push_back(std::move(r));
    }

    for (const FeatureSetSpec& fs : feature_sets) {
        for (const PredictorSpec& predictor : predictors) {
            std::vector<double> preds(n);
            std::vector<std::vector<std::string>> fold_logs(n);
            parallel_for(n, jobs, [&](std::size_t i) {
                const FoldData fold =
                    assemble_fold(matrix, gaps, fs.resolved_columns, folds[i]);
                preds[i] = fit_predict(predictor, fold, fs.resolved_columns,
                                       log ? &fold_logs[i] : nullptr);
            });
            if (log) {
                for (auto& l : fold_logs) log->insert(log->end(), l.begin(), l.end());
            }
            PredictiveResult r;
            r.comparison_id = comparison_id;
            r.predictor = predictor.name();
            r.feature_set = to_string(fs.kind);
            r.n = static_cast<int>(n);
            r.n_pred = fs.n_pred;
            const Metrics m = compute_metrics(truths, preds, preds);
            r.mae = m.mae;
            r.sign_accuracy = m.sign_acc;
            attach_intervals(r, truths, preds, preds, cfg);
            for (std::size_t i = 0; i < n; ++i) {
                r.per_dataset.push_back({folds[i].held_out, truths[i], preds[i]});
            }
            results.push_back(std::move(r));
        }
    }
    return results;
}

}  // namespace tabgap
