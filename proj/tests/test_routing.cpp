#include <cmath>
#include <set>

#include "doctest.h"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/routing.hpp"

using namespace tabgap;

namespace {

GapRecord gap_of(const std::string& dataset, double delta) {
    GapRecord g;
    g.comparison_id = "c";
    g.dataset_id = dataset;
    g.delta = delta;
    g.n_splits_used = 1;
    g.per_split_gaps = {delta};
    return g;
}

MetaFeatureMatrix single_feature_matrix(const std::vector<std::pair<std::string, double>>& rows) {
    MetaFeatureMatrix m({"feat"}, {FeatureGroup::statistical});
    for (const auto& [id, v] : rows) m.append_dataset(id, std::vector<double>{v});
    return m;
}

}  // namespace

TEST_CASE("lodo folds partition the dataset set") {
    std::vector<std::string> ids;
    for (int i = 0; i < 51; ++i) ids.push_back("d" + std::to_string(i));
    const auto folds = lodo_folds(ids);
    REQUIRE(folds.size() == 51);
    std::set<std::string> held;
    for (const auto& fold : folds) {
        CHECK(fold.train.size() == 50);
        CHECK(held.insert(fold.held_out).second);  // each dataset held out once
        for (const auto& t : fold.train) CHECK(t != fold.held_out);
    }
    CHECK(held.size() == 51);

    SUBCASE("two datasets give two singleton training sets") {
        const std::vector<std::string> two = {"b", "a"};
        const auto f2 = lodo_folds(two);
        REQUIRE(f2.size() == 2);
        CHECK(f2[0].held_out == "a");  // canonical order
        CHECK(f2[0].train == std::vector<std::string>{"b"});
    }
    SUBCASE("fewer than two datasets is an error") {
        const std::vector<std::string> one = {"a"};
        CHECK_THROWS(lodo_folds(one));
    }
}

TEST_CASE("knn worked examples") {
    PredictorSpec knn;
    knn.kind = PredictorSpec::Kind::knn;
    knn.k = 5;

    SUBCASE("single training dataset always predicts that gap") {
        FoldData fold;
        fold.train_rows = {{0.4}};
        fold.train_gaps = {0.37};
        fold.test_row = {99.0};
        CHECK(fit_predict(knn, fold, {}) == doctest::Approx(0.37));
    }
    SUBCASE("exact match returns that training gap") {
        FoldData fold;
        fold.train_rows = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
        fold.train_gaps = {0.1, 0.2, 0.3};
        fold.test_row = {3.0, 4.0};
        CHECK(fit_predict(knn, fold, {}) == doctest::Approx(0.2));
    }
    SUBCASE("inverse-distance weighting: gaps 0 and 1 at distances 1 and 3 give 0.25") {
        // One standardized column: train values standardize to -1 and +1.
        // A test value equidistant in the raw scale keeps the 1:3 ratio.
        // Build it directly: train {0, 4}, test 1 -> standardized train
        // {-0.7071, 0.7071}, sd = 2.828..., test (1-2)/2.828 = -0.3536:
        // distances 0.3536 and 1.0607, ratio exactly 1:3.
        FoldData fold;
        fold.train_rows = {{0.0}, {4.0}};
        fold.train_gaps = {0.0, 1.0};
        fold.test_row = {1.0};
        CHECK(fit_predict(knn, fold, {}) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("missing test cells are imputed with the training median") {
        FoldData fold;
        fold.train_rows = {{0.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}};
        fold.train_gaps = {0.0, 0.5, 1.0};
        fold.test_row = {kMissing, 5.0};
        // imputed test = median 2 -> exact match with the middle row
        CHECK(fit_predict(knn, fold, {}) == doctest::Approx(0.5));
    }
    SUBCASE("an all-missing training column falls back to zero contribution") {
        FoldData fold;
        fold.train_rows = {{kMissing, 0.0}, {kMissing, 2.0}, {kMissing, 4.0}};
        fold.train_gaps = {0.0, 0.5, 1.0};
        fold.test_row = {7.0, 2.0};
        std::vector<std::string> log;
        // the dead column is imputed to a constant, so only the live
        // column drives distances: exact match with the middle row
        CHECK(fit_predict(knn, fold, {}, &log) == doctest::Approx(0.5));
        CHECK_FALSE(log.empty());
    }
    SUBCASE("duplicating a feature column does not change the prediction") {
        FoldData one;
        one.train_rows = {{0.0}, {1.0}, {3.0}};
        one.train_gaps = {0.0, 0.6, 0.9};
        one.test_row = {0.5};
        FoldData two;
        two.train_rows = {{0.0, 0.0}, {1.0, 1.0}, {3.0, 3.0}};
        two.train_gaps = one.train_gaps;
        two.test_row = {0.5, 0.5};
        CHECK(fit_predict(knn, one, {}) == doctest::Approx(fit_predict(knn, two, {})).epsilon(1e-12));
    }
}

TEST_CASE("rank ridge shrinks toward the training mean and tracks monotone signal") {
    PredictorSpec ridge;
    ridge.kind = PredictorSpec::Kind::rank_ridge;
    ridge.lambda = 1.0;

    FoldData fold;
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
        const double x = static_cast<double>(i);
        fold.train_rows.push_back({x});
        fold.train_gaps.push_back(0.02 * x);
    }
    fold.test_row = {29.0};
    const double hi = fit_predict(ridge, fold, {});
    fold.test_row = {0.0};
    const double lo = fit_predict(ridge, fold, {});
    CHECK(hi > lo);  // follows the monotone relation
    const double mean = vec_mean(fold.train_gaps);
    CHECK(hi < 0.58 + mean);  // ridge shrinkage keeps it bounded

    SUBCASE("all-constant features fall back to the training mean") {
        FoldData flat;
        flat.train_rows = {{1.0}, {1.0}, {1.0}};
        flat.train_gaps = {0.1, 0.2, 0.6};
        flat.test_row = {1.0};
        CHECK(fit_predict(ridge, flat, {}) == doctest::Approx(0.3).epsilon(1e-12));
    }
}

TEST_CASE("baseline predictions") {
    SUBCASE("mean and majority on positive gaps") {
        const std::vector<double> gaps = {0.1, 0.3};
        const auto base = baseline_predictions(gaps);
        CHECK(base.mean_pred == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(base.majority_sign == 1);
    }
    SUBCASE("majority follows the strict count") {
        const std::vector<double> gaps = {-0.2, -0.4, 0.1};
        const auto base = baseline_predictions(gaps);
        CHECK(base.mean_pred == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
        CHECK(base.majority_sign == -1);
    }
    SUBCASE("ties go to +1 and zeros count toward neither side") {
        const std::vector<double> tie = {-0.1, 0.1};
        CHECK(baseline_predictions(tie).majority_sign == 1);
        const std::vector<double> zeros = {0.0, 0.0, -0.3};
        CHECK(baseline_predictions(zeros).majority_sign == -1);
    }
}

TEST_CASE("sign scoring: zero predictions are correct only against zero truth") {
    CHECK(sign_correct(0.0, 0.0));
    CHECK_FALSE(sign_correct(0.0, 0.5));
    CHECK_FALSE(sign_correct(0.5, 0.0));
    CHECK(sign_correct(-2.0, -0.1));
    CHECK_FALSE(sign_correct(-2.0, 0.1));
}

TEST_CASE("assemble_fold never reads the held-out dataset (leakage mutation test)") {
    MetaFeatureMatrix m({"feat"}, {FeatureGroup::statistical});
    std::vector<GapRecord> gaps;
    for (int d = 0; d < 6; ++d) {
        m.append_dataset("ds" + std::to_string(d), std::vector<double>{static_cast<double>(d)});
        gaps.push_back(gap_of("ds" + std::to_string(d), 0.1 * d));
    }
    const std::vector<std::string> columns = {"feat"};
    const auto folds = lodo_folds(m.dataset_ids());
    const FoldData before = assemble_fold(m, gaps, columns, folds[2]);

    // mutate the held-out dataset's feature row
    m.set_cell(2, 0, 1e9);
    const FoldData after = assemble_fold(m, gaps, columns, folds[2]);
    CHECK(before.train_rows == after.train_rows);
    CHECK(before.train_gaps == after.train_gaps);
    CHECK(after.test_row[0] == 1e9);  // only the test row moved
}

TEST_CASE("evaluate_lodo end to end on a constant-gap study") {
    // every dataset has the same positive gap: the mean baseline is a
    // perfect predictor, so MAE 0, sign accuracy 1, CI width 0
    MetaFeatureMatrix m({"feat"}, {FeatureGroup::statistical});
    std::vector<GapRecord> gaps;
    Rng rng(5);
    for (int d = 0; d < 8; ++d) {
        m.append_dataset("ds" + std::to_string(d), std::vector<double>{rng.normal()});
        gaps.push_back(gap_of("ds" + std::to_string(d), 0.25));
    }
    BootstrapConfig cfg;
    cfg.n_resamples = 400;
    cfg.seed = 9;
    std::vector<FeatureSetKind> kinds = {FeatureSetKind::all};
    const auto sets = resolve_feature_sets(m, {}, {}, kinds);
    std::vector<PredictorSpec> predictors(1);
    const auto results = evaluate_lodo("c", m, gaps, sets, predictors, cfg);

    REQUIRE(results.size() == 2);  // baseline + knn x all
    const auto& baseline = results[0];
    CHECK(baseline.predictor == "baseline");
    CHECK(baseline.mae == doctest::Approx(0.0));
    CHECK(baseline.sign_accuracy == doctest::Approx(1.0));
    CHECK(baseline.mae_hi - baseline.mae_lo == doctest::Approx(0.0));
    CHECK(baseline.n == 8);
    CHECK(baseline.n_pred == 0);
    for (const auto& row : baseline.per_dataset) {
        CHECK(row.predicted_gap == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(row.true_gap == doctest::Approx(0.25));
    }
    // knn predicts some neighbour average of identical gaps: also perfect
    CHECK(results[1].mae == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mean-baseline MAE matches hand computation") {
    MetaFeatureMatrix m({"feat"}, {FeatureGroup::statistical});
    const std::vector<double> deltas = {0.3, -0.1, 0.2, 0.6};
    std::vector<GapRecord> gaps;
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        m.append_dataset("ds" + std::to_string(d), std::vector<double>{static_cast<double>(d)});
        gaps.push_back(gap_of("ds" + std::to_string(d), deltas[d]));
    }
    BootstrapConfig cfg;
    cfg.n_resamples = 50;
    cfg.seed = 1;
    const auto results = evaluate_lodo("c", m, gaps, {}, {}, cfg);
    REQUIRE(results.size() == 1);

    double expected = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double train_mean = 0.0;
        for (std::size_t j = 0; j < deltas.size(); ++j) {
            if (j != i) train_mean += deltas[j];
        }
        train_mean /= static_cast<double>(deltas.size() - 1);
        expected += std::fabs(deltas[i] - train_mean);
    }
    expected /= static_cast<double>(deltas.size());
    CHECK(results[0].mae == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("metrics are invariant to dataset enumeration order") {
    MetaFeatureMatrix fwd({"feat"}, {FeatureGroup::statistical});
    MetaFeatureMatrix rev({"feat"}, {FeatureGroup::statistical});
    std::vector<GapRecord> gaps_fwd, gaps_rev;
    Rng rng(7);
    std::vector<std::pair<std::string, double>> rows;
    for (int d = 0; d < 7; ++d) {
        rows.emplace_back("ds" + std::to_string(d), rng.normal());
    }
    for (const auto& [id, v] : rows) {
        fwd.append_dataset(id, std::vector<double>{v});
        gaps_fwd.push_back(gap_of(id, 0.7 * v + 0.1));
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        rev.append_dataset(it->first, std::vector<double>{it->second});
        gaps_rev.push_back(gap_of(it->first, 0.7 * it->second + 0.1));
    }
    BootstrapConfig cfg;
    cfg.n_resamples = 100;
    cfg.seed = 3;
    std::vector<FeatureSetKind> kinds = {FeatureSetKind::all};
    std::vector<PredictorSpec> predictors(1);
    const auto a = evaluate_lodo("c", fwd, gaps_fwd, resolve_feature_sets(fwd, {}, {}, kinds),
                                 predictors, cfg);
    const auto b = evaluate_lodo("c", rev, gaps_rev, resolve_feature_sets(rev, {}, {}, kinds),
                                 predictors, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mae == b[i].mae);
        CHECK(a[i].sign_accuracy == b[i].sign_accuracy);
        CHECK(a[i].mae_lo == b[i].mae_lo);
        CHECK(a[i].sign_hi == b[i].sign_hi);
    }
}

TEST_CASE("feature set resolution") {
    MetaFeatureMatrix m({"log_n", "cat_fraction", "f1", "f2"},
                        {FeatureGroup::control, FeatureGroup::control, FeatureGroup::statistical,
                         FeatureGroup::statistical});
    m.append_dataset("d0", std::vector<double>{1, 2, 3, 4});
    const std::vector<std::string> controls = {"log_n", "cat_fraction"};

    SUBCASE("robust sets require retained features") {
        std::vector<FeatureSetKind> kinds = {FeatureSetKind::robust,
                                             FeatureSetKind::controls_plus_robust};
        std::vector<std::string> log;
        const auto sets = resolve_feature_sets(m, controls, {}, kinds, &log);
        CHECK(sets.empty());
        CHECK(log.size() == 2);
    }
    SUBCASE("all five kinds resolve when a retained feature exists") {
        std::vector<FeatureSetKind> kinds = {
            FeatureSetKind::controls, FeatureSetKind::all, FeatureSetKind::controls_plus_all,
            FeatureSetKind::robust, FeatureSetKind::controls_plus_robust};
        const std::vector<std::string> retained = {"f2"};
        const auto sets = resolve_feature_sets(m, controls, retained, kinds);
        REQUIRE(sets.size() == 5);
        CHECK(sets[0].n_pred == 2);  // controls
        CHECK(sets[1].n_pred == 2);  // all = non-control columns
        CHECK(sets[2].n_pred == 4);  // controls + all
        CHECK(sets[3].n_pred == 1);  // robust
        CHECK(sets[4].n_pred == 3);  // controls + robust
        CHECK(sets[3].resolved_columns == std::vector<std::string>{"f2"});
    }
}

#ifdef TABGAP_MEAN_PREDICTOR_PATH
TEST_CASE("external predictor protocol reproduces the mean baseline") {
    MetaFeatureMatrix m({"feat"}, {FeatureGroup::statistical});
    std::vector<GapRecord> gaps;
    Rng rng(13);
    for (int d = 0; d < 6; ++d) {
        m.append_dataset("ds" + std::to_string(d),
                         std::vector<double>{d == 2 ? kMissing : rng.normal()});
        gaps.push_back(gap_of("ds" + std::to_string(d), rng.normal()));
    }
    BootstrapConfig cfg;
    cfg.n_resamples = 80;
    cfg.seed = 21;
    std::vector<FeatureSetKind> kinds = {FeatureSetKind::all};
    const auto sets = resolve_feature_sets(m, {}, {}, kinds);

    PredictorSpec external;
    external.kind = PredictorSpec::Kind::external;
    external.command = TABGAP_MEAN_PREDICTOR_PATH;
    external.timeout_seconds = 30;
    std::vector<PredictorSpec> predictors = {external};
    const auto results = evaluate_lodo("c", m, gaps, sets, predictors, cfg);
    REQUIRE(results.size() == 2);
    CHECK(results[1].predictor == "external");
    CHECK(results[1].mae == doctest::Approx(results[0].mae).epsilon(1e-12));
    for (std::size_t i = 0; i < results[0].per_dataset.size(); ++i) {
        CHECK(results[1].per_dataset[i].predicted_gap ==
              doctest::Approx(results[0].per_dataset[i].predicted_gap).epsilon(1e-12));
    }
}

TEST_CASE("external predictor failures surface as predictor errors") {
    FoldData fold;
    fold.train_rows = {{1.0}, {2.0}};
    fold.train_gaps = {0.1, 0.2};
    fold.test_row = {1.5};
    PredictorSpec broken;
    broken.kind = PredictorSpec::Kind::external;
    broken.command = "exit 3";
    CHECK_THROWS_AS(fit_predict(broken, fold, {}), PredictorError);

    PredictorSpec garbled;
    garbled.kind = PredictorSpec::Kind::external;
    garbled.command = "echo not-json";
    CHECK_THROWS_AS(fit_predict(garbled, fold, {}), PredictorError);

    PredictorSpec stuck;
    stuck.kind = PredictorSpec::Kind::external;
    stuck.command = "sleep 30";
    stuck.timeout_seconds = 0.3;
    CHECK_THROWS_WITH_AS(fit_predict(stuck, fold, {}), doctest::Contains("timed out"),
                         PredictorError);
}
#endif
