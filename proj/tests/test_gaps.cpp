#include <cmath>
#include <sstream>

#include "doctest.h"
#include "tabgap/csv.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/gaps.hpp"
#include "tabgap/rng.hpp"

using namespace tabgap;

namespace {

MethodRun make_run(const std::string& dataset, SplitId split, const std::string& method,
                   Subtype subtype, double val, double test) {
    MethodRun r;
    r.dataset_id = dataset;
    r.split = split;
    r.method_id = method;
    r.subtype = subtype;
    r.problem_type = ProblemType::binary;
    r.metric_name = "logloss";
    r.val_error = val;
    r.test_error = test;
    return r;
}

RunStore store_from_runs(const std::vector<MethodRun>& runs) {
    std::ostringstream csv;
    write_csv_row(csv, RunStore::csv_header());
    std::vector<std::string> cells(9);
    for (const MethodRun& r : runs) {
        cells[0] = r.dataset_id;
        cells[1] = std::to_string(r.split.repeat);
        cells[2] = std::to_string(r.split.fold);
        cells[3] = r.method_id;
        cells[4] = to_string(r.subtype);
        cells[5] = to_string(r.problem_type);
        cells[6] = r.metric_name;
        cells[7] = format_double(r.val_error);
        cells[8] = format_double(r.test_error);
        write_csv_row(csv, cells);
    }
    std::istringstream in(csv.str());
    return RunStore::ingest(in);
}

FamilySpec family_of(const std::string& id, std::initializer_list<std::string> methods) {
    FamilySpec f;
    f.family_id = id;
    for (const std::string& m : methods) f.members.push_back({m, {}});
    return f;
}

}  // namespace

TEST_CASE("normalization anchors and clipping") {
    std::vector<MethodRun> pool;
    pool.push_back(make_run("d", {0, 0}, "m1", Subtype::default_, 0.2, 0.2));
    pool.push_back(make_run("d", {0, 0}, "m2", Subtype::default_, 0.4, 0.4));
    pool.push_back(make_run("d", {0, 0}, "m3", Subtype::default_, 0.6, 0.3));
    const auto normalized = normalize_split(pool, 1e-5);

    // pool test errors {0.2, 0.4, 0.3}: min 0.2, median 0.3, r 0.1
    CHECK(normalized[0].test_norm == doctest::Approx(0.0));           // e = e_min -> 0
    CHECK(normalized[1].test_norm == doctest::Approx(1.0));           // e >= median -> 1 (clip)
    CHECK(normalized[2].test_norm == doctest::Approx(1.0));           // e = e_med -> 1 exact

    // validation errors {0.2, 0.4, 0.6}: min 0.2, median 0.4, r 0.2
    CHECK(normalized[0].val_norm == doctest::Approx(0.0));
    CHECK(normalized[1].val_norm == doctest::Approx(1.0));
    CHECK(normalized[2].val_norm == doctest::Approx(1.0));
}

TEST_CASE("normalization worked example: (0.3-0.2)/(0.4-0.2) = 0.5") {
    // pool {0.2, 0.4, 0.6}: median is 0.4, so e = 0.3 maps to 0.5
    const SplitAnchors anchors = SplitAnchors::from_errors(std::vector<double>{0.2, 0.4, 0.6}, 1e-5);
    CHECK(anchors.e_min == doctest::Approx(0.2));
    CHECK(anchors.e_med == doctest::Approx(0.4));
    CHECK(anchors.normalize(0.3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("even pool size takes the midpoint of the middle two") {
    const SplitAnchors anchors =
        SplitAnchors::from_errors(std::vector<double>{0.1, 0.2, 0.4, 0.9}, 1e-5);
    CHECK(anchors.e_med == doctest::Approx(0.3));
}

TEST_CASE("degenerate pools") {
    SUBCASE("all errors equal give r = epsilon and score 0") {
        std::vector<MethodRun> pool;
        for (int i = 0; i < 4; ++i) {
            pool.push_back(make_run("d", {0, 0}, "m" + std::to_string(i), Subtype::default_, 0.5, 0.5));
        }
        for (const auto& nr : normalize_split(pool, 1e-5)) {
            CHECK(nr.test_norm == 0.0);
            CHECK(nr.val_norm == 0.0);
        }
    }
    SUBCASE("single-run pool scores 0") {
        std::vector<MethodRun> pool = {make_run("d", {0, 0}, "m", Subtype::default_, 0.7, 0.9)};
        const auto normalized = normalize_split(pool, 1e-5);
        CHECK(normalized[0].test_norm == 0.0);
        CHECK(normalized[0].val_norm == 0.0);
    }
    SUBCASE("empty pool throws") {
        CHECK_THROWS_AS(normalize_split({}, 1e-5), Error);
    }
}

TEST_CASE("normalized scores stay in [0,1] and are affine-invariant") {
    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(12);
        std::vector<MethodRun> pool;
        for (std::size_t i = 0; i < n; ++i) {
            pool.push_back(make_run("d", {0, 0}, "m" + std::to_string(i), Subtype::default_,
                                    rng.normal(), rng.normal()));
        }
        const auto base = normalize_split(pool, 1e-5);
        for (const auto& nr : base) {
            CHECK(nr.test_norm >= 0.0);
            CHECK(nr.test_norm <= 1.0);
        }
        const double a = 0.5 + rng.uniform01() * 3.0;
        const double b = rng.normal();
        std::vector<MethodRun> scaled = pool;
        for (auto& r : scaled) {
            r.test_error = a * r.test_error + b;
            r.val_error = a * r.val_error + b;
        }
        // invariance holds when the unclipped spread exceeds epsilon
        std::vector<double> tests;
        for (const auto& r : pool) tests.push_back(r.test_error);
        const SplitAnchors anchors = SplitAnchors::from_errors(tests, 1e-5);
        if (anchors.e_med - anchors.e_min > 1e-5) {
            const auto transformed = normalize_split(scaled, 1e-5);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(transformed[i].test_norm == doctest::Approx(base[i].test_norm).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("family representative selection") {
    std::vector<MethodRun> pool;
    pool.push_back(make_run("d", {0, 0}, "catboost", Subtype::default_, 0.30, 0.9));
    pool.push_back(make_run("d", {0, 0}, "xgboost", Subtype::default_, 0.10, 0.1));
    pool.push_back(make_run("d", {0, 0}, "realmlp", Subtype::default_, 0.20, 0.0));
    const auto normalized = normalize_split(pool, 1e-5);

    SUBCASE("singleton family picks its only member") {
        const auto fam = family_of("solo", {"realmlp"});
        const NormalizedRun* rep = select_family_rep(fam, normalized);
        REQUIRE(rep != nullptr);
        CHECK(rep->run->method_id == "realmlp");
    }
    SUBCASE("selection minimizes validation score even when test disagrees") {
        // xgboost has the best validation but catboost the best... test is
        // irrelevant by contract
        const auto fam = family_of("trees", {"catboost", "xgboost"});
        const NormalizedRun* rep = select_family_rep(fam, normalized);
        REQUIRE(rep != nullptr);
        CHECK(rep->run->method_id == "xgboost");
    }
    SUBCASE("absent family yields no representative") {
        const auto fam = family_of("ghosts", {"nothere"});
        CHECK(select_family_rep(fam, normalized) == nullptr);
    }
}

TEST_CASE("exact validation tie breaks lexicographically") {
    std::vector<MethodRun> pool;
    pool.push_back(make_run("d", {0, 0}, "xgboost", Subtype::default_, 0.10, 0.2));
    pool.push_back(make_run("d", {0, 0}, "catboost", Subtype::default_, 0.10, 0.9));
    pool.push_back(make_run("d", {0, 0}, "zzz", Subtype::default_, 0.99, 0.99));
    const auto normalized = normalize_split(pool, 1e-5);
    const auto fam = family_of("trees", {"catboost", "xgboost"});
    const NormalizedRun* rep = select_family_rep(fam, normalized);
    REQUIRE(rep != nullptr);
    CHECK(rep->run->method_id == "catboost");
}

TEST_CASE("compute_gaps hand-derived two-split fixture") {
    // selected representatives: A test norms (0.2, 0.4), B (0.1, 0.1),
    // so the per-split gaps are (0.1, 0.3) and delta is 0.2.
    // Each 7-method pool has min 0 and median 1, hence r = 1 and the raw
    // errors equal their normalized scores.
    std::vector<MethodRun> runs;
    const auto add_pool = [&](SplitId split, double a_err, double b_err) {
        runs.push_back(make_run("d", split, "a_method", Subtype::default_, 0.4, a_err));
        runs.push_back(make_run("d", split, "b_method", Subtype::default_, 0.5, b_err));
        runs.push_back(make_run("d", split, "low", Subtype::default_, 0.0, 0.0));
        runs.push_back(make_run("d", split, "mid", Subtype::default_, 1.0, 1.0));
        runs.push_back(make_run("d", split, "f1", Subtype::default_, 1.2, 1.2));
        runs.push_back(make_run("d", split, "f2", Subtype::default_, 1.4, 1.4));
        runs.push_back(make_run("d", split, "f3", Subtype::default_, 1.6, 1.6));
    };
    add_pool({0, 0}, 0.2, 0.1);
    add_pool({0, 1}, 0.4, 0.1);
    const RunStore store = store_from_runs(runs);

    ComparisonSpec cmp;
    cmp.comparison_id = "a_vs_b";
    cmp.family_a = "fa";
    cmp.family_b = "fb";
    const auto fa = family_of("fa", {"a_method"});
    const auto fb = family_of("fb", {"b_method"});
    const auto gaps = compute_gaps(cmp, fa, fb, store, {}, {});
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].n_splits_used == 2);
    CHECK(gaps[0].delta == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(gaps[0].per_split_gaps[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(gaps[0].per_split_gaps[1] == doctest::Approx(0.3).epsilon(1e-12));

    SUBCASE("delta equals the mean of per-split gaps") {
        CHECK(gaps[0].delta ==
              doctest::Approx(vec_mean(gaps[0].per_split_gaps)).epsilon(1e-12));
    }
    SUBCASE("swapping families negates the gap") {
        ComparisonSpec rev = cmp;
        std::swap(rev.family_a, rev.family_b);
        const auto reversed = compute_gaps(rev, fb, fa, store, {}, {});
        REQUIRE(reversed.size() == 1);
        CHECK(reversed[0].delta == doctest::Approx(-gaps[0].delta).epsilon(1e-12));
    }
}

TEST_CASE("identical family definitions give zero gaps") {
    std::vector<MethodRun> runs;
    Rng rng(14);
    for (int d = 0; d < 3; ++d) {
        for (int s = 0; s < 2; ++s) {
            for (int m = 0; m < 4; ++m) {
                runs.push_back(make_run("d" + std::to_string(d), {0, s}, "m" + std::to_string(m),
                                        Subtype::default_, rng.uniform01(), rng.uniform01()));
            }
        }
    }
    const RunStore store = store_from_runs(runs);
    const auto fam = family_of("f", {"m0", "m1"});
    ComparisonSpec cmp;
    cmp.comparison_id = "same";
    const auto gaps = compute_gaps(cmp, fam, fam, store, {}, {});
    REQUIRE(gaps.size() == 3);
    for (const auto& g : gaps) CHECK(g.delta == 0.0);
}

TEST_CASE("splits without both families are skipped; empty datasets are omitted") {
    std::vector<MethodRun> runs;
    runs.push_back(make_run("d1", {0, 0}, "a", Subtype::default_, 0.1, 0.1));
    runs.push_back(make_run("d1", {0, 0}, "b", Subtype::default_, 0.2, 0.2));
    runs.push_back(make_run("d1", {0, 1}, "a", Subtype::default_, 0.1, 0.1));  // b missing
    runs.push_back(make_run("d2", {0, 0}, "a", Subtype::default_, 0.3, 0.3));  // b never there
    const RunStore store = store_from_runs(runs);
    ComparisonSpec cmp;
    cmp.comparison_id = "ab";
    std::vector<std::string> log;
    const auto gaps = compute_gaps(cmp, family_of("fa", {"a"}), family_of("fb", {"b"}), store, {},
                                   {}, &log);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].dataset_id == "d1");
    CHECK(gaps[0].n_splits_used == 1);
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("d2") != std::string::npos);
}

TEST_CASE("representative choice is unchanged when test errors are permuted") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<MethodRun> pool;
        const std::size_t n = 3 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            pool.push_back(make_run("d", {0, 0}, "m" + std::to_string(i), Subtype::default_,
                                    rng.uniform01(), rng.uniform01()));
        }
        const auto fam = family_of("f", {"m0", "m1", "m2"});
        const auto before = normalize_split(pool, 1e-5);
        const NormalizedRun* rep_before = select_family_rep(fam, before);

        std::vector<double> tests;
        for (const auto& r : pool) tests.push_back(r.test_error);
        for (std::size_t i = tests.size(); i > 1; --i) std::swap(tests[i - 1], tests[rng.below(i)]);
        for (std::size_t i = 0; i < n; ++i) pool[i].test_error = tests[i];

        const auto after = normalize_split(pool, 1e-5);
        const NormalizedRun* rep_after = select_family_rep(fam, after);
        REQUIRE(rep_before != nullptr);
        REQUIRE(rep_after != nullptr);
        CHECK(rep_before->run->method_id == rep_after->run->method_id);
        CHECK(rep_before->run->subtype == rep_after->run->subtype);
    }
}
