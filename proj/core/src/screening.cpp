#include "tabgap/screening.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "tabgap/error.hpp"
#include "tabgap/parallel.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/stats.hpp"

namespace tabgap {

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

/// Gap vector aligned with the matrix's dataset rows; NaN where absent.
std::vector<double> aligned_gaps(const MetaFeatureMatrix& matrix,
                                 std::span<const GapRecord> gaps) {
    std::map<std::string, double> by_dataset;
    for (const GapRecord& g : gaps) by_dataset[g.dataset_id] = g.delta;
    std::vector<double> out(matrix.n_datasets(), kMissing);
    for (std::size_t d = 0; d < matrix.n_datasets(); ++d) {
        const auto it = by_dataset.find(matrix.dataset_ids()[d]);
        if (it != by_dataset.end()) out[d] = it->second;
    }
    return out;
}

bool is_constant(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] != v[0]) return false;
    }
    return true;
}

}  // namespace

SignConsistency bootstrap_sign_consistency(std::span<const double> x, std::span<const double> y,
                                           double point_rho, const BootstrapConfig& cfg,
                                           std::uint64_t stream) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3) throw Error("bootstrap_sign_consistency: need >= 3 pairs");
    if (is_missing(point_rho)) throw Error("bootstrap_sign_consistency: undefined point estimate");

    const int point_sign = sign_of(point_rho);
    std::vector<double> bx(n), by(n);
    std::vector<double> rhos;
    rhos.reserve(static_cast<std::size_t>(cfg.n_resamples));
    int matches = 0;
    for (int b = 0; b < cfg.n_resamples; ++b) {
        Rng rng(sub_seed(cfg.seed, stream, static_cast<std::uint64_t>(b)));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = rng.below(n);
            bx[i] = x[idx];
            by[i] = y[idx];
        }
        const double rho_b = spearman(bx, by);
        if (is_missing(rho_b)) continue;  // counts as sign-inconsistent
        rhos.push_back(rho_b);
        if (sign_of(rho_b) == point_sign) ++matches;
    }
    SignConsistency out;
    out.consistency = static_cast<double>(matches) / static_cast<double>(cfg.n_resamples);
    const Interval ci = percentile_interval(rhos, cfg.ci_level);
    out.ci_low = ci.lo;
    out.ci_high = ci.hi;
    return out;
}

std::vector<AssociationResult> screen_features(const MetaFeatureMatrix& matrix,
                                               std::span<const GapRecord> gaps,
                                               const std::string& comparison_id,
                                               const ScreenOptions& options,
                                               std::vector<std::string>* log) {
    const auto note = [&](const std::string& msg) {
        if (log) log->push_back("[" + comparison_id + "] " + msg);
    };
    const std::vector<double> gap_col = aligned_gaps(matrix, gaps);

    struct Testable {
        std::size_t feature = 0;
        std::vector<double> x, y;
        double rho = 0.0;
        double p = 1.0;
    };
    std::vector<Testable> testable;
    for (std::size_t f = 0; f < matrix.n_features(); ++f) {
        auto [x, y] = complete_pairs(matrix.column(f), gap_col);
        if (x.size() < options.min_pairs) {
            note("feature '" + matrix.feature_names()[f] + "' skipped: only " +
                 std::to_string(x.size()) + " complete pairs");
            continue;
        }
        if (is_constant(x) || is_constant(y)) {
            note("feature '" + matrix.feature_names()[f] + "' skipped: constant vector");
            continue;
        }
        Testable t;
        t.feature = f;
        t.rho = spearman(x, y);
        if (is_missing(t.rho)) {
            note("feature '" + matrix.feature_names()[f] + "' skipped: undefined correlation");
            continue;
        }
        t.p = spearman_pvalue(t.rho, x.size());
        t.x = std::move(x);
        t.y = std::move(y);
        testable.push_back(std::move(t));
    }
    if (testable.empty()) {
        note("warning: no testable feature");
        return {};
    }

    std::vector<double> p_values(testable.size());
    for (std::size_t i = 0; i < testable.size(); ++i) p_values[i] = testable[i].p;
    const std::vector<double> q_values = bh_adjust(p_values);

    std::vector<AssociationResult> results(testable.size());
    parallel_for(testable.size(), options.jobs, [&](std::size_t i) {
        const Testable& t = testable[i];
        const std::string& name = matrix.feature_names()[t.feature];
        const auto sc = bootstrap_sign_consistency(t.x, t.y, t.rho, options.bootstrap,
                                                   fnv1a64(name));
        AssociationResult r;
        r.comparison_id = comparison_id;
        r.feature_name = name;
        r.n = static_cast<int>(t.x.size());
        r.rho = t.rho;
        r.p_value = t.p;
        r.q_bh = q_values[i];
        r.sign_consistency = sc.consistency;
        r.ci_low = sc.ci_low;
        r.ci_high = sc.ci_high;
        r.retained = r.q_bh < options.fdr_level && r.sign_consistency >= options.sign_gate;
        results[i] = std::move(r);
    });

    std::sort(results.begin(), results.end(),
              [](const AssociationResult& a, const AssociationResult& b) {
                  if (a.p_value != b.p_value) return a.p_value < b.p_value;
                  return a.feature_name < b.feature_name;
              });
    return results;
}

namespace {

/// Midrank-standardized design matrix fit: returns the coefficient of the
/// first predictor column, or NaN when no predictor survives.
double rank_fit_coefficient(const std::vector<std::vector<double>>& predictors,
                            std::span<const double> response) {
    const std::size_t n = response.size();
    // rank-transform and standardize; constant columns contribute nothing
    std::vector<std::vector<double>> z;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < predictors.size(); ++c) {
        auto ranks = midranks(predictors[c]);
        const double sd = vec_sd(ranks);
        if (is_missing(sd) || sd <= 0.0) {
            if (c == 0) return kMissing;  // the feature itself is degenerate
            continue;
        }
        const double mean = vec_mean(ranks);
        for (double& r : ranks) r = (r - mean) / sd;
        z.push_back(std::move(ranks));
        kept.push_back(c);
    }
    if (z.empty() || kept[0] != 0) return kMissing;

    auto y_ranks = midranks(response);
    const double y_sd = vec_sd(y_ranks);
    if (is_missing(y_sd) || y_sd <= 0.0) return kMissing;
    const double y_mean = vec_mean(y_ranks);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = (y_ranks[i] - y_mean) / y_sd;

    const auto p = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index c = 0; c < p; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            design(static_cast<Eigen::Index>(i), c) = z[static_cast<std::size_t>(c)][i];
        }
    }
    // standardization removes the intercept; ridge floor guards collinearity
    const Eigen::MatrixXd gram =
        design.transpose() * design + 1e-8 * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd beta = gram.ldlt().solve(design.transpose() * y);
    return beta(0);
}

}  // namespace

AdjustedResult covariate_adjust(const MetaFeatureMatrix& matrix, std::span<const GapRecord> gaps,
                                const std::string& comparison_id, const std::string& feature_name,
                                double univariate_rho, std::span<const std::string> control_names,
                                const ScreenOptions& options) {
    AdjustedResult out;
    out.comparison_id = comparison_id;
    out.feature_name = feature_name;

    const auto feature_idx = matrix.feature_index(feature_name);
    if (!feature_idx) {
        out.computable = false;
        out.note = "feature not in matrix";
        return out;
    }
    std::vector<std::size_t> cols = {*feature_idx};
    for (const std::string& c : control_names) {
        const auto idx = matrix.feature_index(c);
        if (idx && *idx != *feature_idx) cols.push_back(*idx);
    }

    const std::vector<double> gap_col = aligned_gaps(matrix, gaps);
    // complete cases across the feature, every control and the gap
    std::vector<std::size_t> rows;
    for (std::size_t d = 0; d < matrix.n_datasets(); ++d) {
        if (is_missing(gap_col[d])) continue;
        bool complete = true;
        for (std::size_t c : cols) {
            if (is_missing(matrix.cell(d, c))) {
                complete = false;
                break;
            }
        }
        if (complete) rows.push_back(d);
    }
    if (rows.size() < cols.size() + 3) {
        out.computable = false;
        out.note = "only " + std::to_string(rows.size()) + " complete cases for " +
                   std::to_string(cols.size()) + " predictors";
        return out;
    }

    const auto gather = [&](std::span<const std::size_t> idx) {
        std::vector<std::vector<double>> predictors(cols.size());
        std::vector<double> response(idx.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            predictors[c].resize(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                predictors[c][i] = matrix.cell(idx[i], cols[c]);
            }
        }
        for (std::size_t i = 0; i < idx.size(); ++i) response[i] = gap_col[idx[i]];
        return std::make_pair(std::move(predictors), std::move(response));
    };

    const auto [predictors, response] = gather(rows);
    out.adj_coef = rank_fit_coefficient(predictors, response);
    if (is_missing(out.adj_coef)) {
        out.computable = false;
        out.note = "degenerate rank design";
        return out;
    }

    const int point_sign = sign_of(out.adj_coef);
    const std::uint64_t stream = fnv1a64(feature_name + "#adjust");
    const std::size_t n = rows.size();
    std::vector<std::size_t> resampled(n);
    std::vector<double> coefs;
    coefs.reserve(static_cast<std::size_t>(options.bootstrap.n_resamples));
    int matches = 0;
    for (int b = 0; b < options.bootstrap.n_resamples; ++b) {
        Rng rng(sub_seed(options.bootstrap.seed, stream, static_cast<std::uint64_t>(b)));
        for (std::size_t i = 0; i < n; ++i) resampled[i] = rows[rng.below(n)];
        const auto [bp, br] = gather(resampled);
        const double coef_b = rank_fit_coefficient(bp, br);
        if (is_missing(coef_b)) continue;  // counts as sign-inconsistent
        coefs.push_back(coef_b);
        if (sign_of(coef_b) == point_sign) ++matches;
    }
    out.adj_sign_consistency =
        static_cast<double>(matches) / static_cast<double>(options.bootstrap.n_resamples);
    const Interval ci = percentile_interval(coefs, options.bootstrap.ci_level);
    out.adj_ci_low = ci.lo;
    out.adj_ci_high = ci.hi;
    out.direction_confirmed = point_sign == sign_of(univariate_rho) &&
                              out.adj_sign_consistency > options.sign_gate;
    return out;
}

}  // namespace tabgap
