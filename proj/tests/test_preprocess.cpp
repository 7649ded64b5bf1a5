#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "tabgap/descriptive.hpp"
#include "tabgap/preprocess.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/stats.hpp"

using namespace tabgap;

namespace {

MetaFeatureMatrix matrix_of(const std::vector<std::string>& names,
                            const std::vector<FeatureGroup>& groups,
                            const std::vector<std::vector<double>>& rows) {
    MetaFeatureMatrix m(names, groups);
    for (std::size_t d = 0; d < rows.size(); ++d) {
        m.append_dataset("ds" + std::to_string(d), rows[d]);
    }
    return m;
}

bool dropped_as(const std::vector<DropLogEntry>& log, const std::string& name, DropReason why) {
    for (const auto& e : log) {
        if (e.feature_name == name) return e.reason == why;
    }
    return false;
}

}  // namespace

TEST_CASE("step 1 maps infinities to missing") {
    auto m = matrix_of({"f"}, {FeatureGroup::statistical},
                       {{1.0}, {std::numeric_limits<double>::infinity()}, {2.0}, {3.0},
                        {4.0}, {5.0}, {6.0}, {7.0}, {8.0}, {9.0}, {10.0}, {11.0}});
    const auto [clean, log] = preprocess_matrix(m, {});
    REQUIRE(clean.n_features() == 1);
    CHECK(is_missing(clean.cell(1, 0)));
    for (std::size_t d = 0; d < clean.n_datasets(); ++d) {
        CHECK_FALSE(std::isinf(clean.cell(d, 0)));
    }
}

TEST_CASE("columns over the missing threshold are dropped") {
    // 25% missing > 20% threshold
    std::vector<std::vector<double>> rows;
    Rng rng(3);
    for (int d = 0; d < 20; ++d) {
        rows.push_back({d < 5 ? kMissing : rng.normal(), rng.normal()});
    }
    const auto m = matrix_of({"leaky", "good"},
                             {FeatureGroup::statistical, FeatureGroup::statistical}, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    CHECK(clean.n_features() == 1);
    CHECK(clean.feature_names()[0] == "good");
    CHECK(dropped_as(log, "leaky", DropReason::too_missing));
}

TEST_CASE("near-constant columns are dropped") {
    std::vector<std::vector<double>> rows;
    Rng rng(4);
    for (int d = 0; d < 100; ++d) {
        rows.push_back({d == 0 ? 2.0 : 1.0, rng.normal()});  // modal share 0.99
    }
    const auto m = matrix_of({"flat", "good"},
                             {FeatureGroup::statistical, FeatureGroup::statistical}, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    CHECK(clean.n_features() == 1);
    CHECK(dropped_as(log, "flat", DropReason::near_constant));
}

TEST_CASE("dedup keeps the member with fewer missing values") {
    // exact duplicate with one extra missing cell loses
    std::vector<std::vector<double>> rows;
    Rng rng(5);
    for (int d = 0; d < 20; ++d) {
        const double v = rng.normal();
        rows.push_back({v, d == 0 ? kMissing : v});
    }
    const auto m = matrix_of({"original", "copy_with_hole"},
                             {FeatureGroup::statistical, FeatureGroup::statistical}, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    REQUIRE(clean.n_features() == 1);
    CHECK(clean.feature_names()[0] == "original");
    CHECK(dropped_as(log, "copy_with_hole", DropReason::dedup));
}

TEST_CASE("three mutually correlated columns leave one survivor") {
    // three monotone transforms of one vector across 20 synthetic datasets
    std::vector<std::vector<double>> rows;
    Rng rng(6);
    for (int d = 0; d < 20; ++d) {
        const double v = rng.normal();
        rows.push_back({v, std::exp(v), v * v * v + 2.0});
    }
    const auto m = matrix_of(
        {"raw", "exp", "cube"},
        {FeatureGroup::statistical, FeatureGroup::statistical, FeatureGroup::statistical}, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    CHECK(clean.n_features() == 1);
    std::size_t dedup_count = 0;
    for (const auto& e : log) {
        if (e.reason == DropReason::dedup) ++dedup_count;
    }
    CHECK(dedup_count == 2);
}

TEST_CASE("unique-value count breaks dedup ties, then the name") {
    // same missing count; "coarse" has fewer unique values than "fine"
    std::vector<std::vector<double>> rows;
    for (int d = 0; d < 20; ++d) {
        const double v = static_cast<double>(d);
        rows.push_back({v, std::floor(v / 2.0)});
    }
    const auto m = matrix_of({"fine", "coarse"},
                             {FeatureGroup::statistical, FeatureGroup::statistical}, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    REQUIRE(clean.n_features() == 1);
    CHECK(clean.feature_names()[0] == "fine");
}

TEST_CASE("controls are never dropped and do not join dedup") {
    std::vector<std::vector<double>> rows;
    for (int d = 0; d < 20; ++d) {
        const double v = static_cast<double>(d);
        // control constant + control correlated with a statistical column
        rows.push_back({1.0, v, v * 2.0, kMissing});
    }
    const auto m = matrix_of({"cat_fraction", "log_n", "n", "holes"},
                             {FeatureGroup::control, FeatureGroup::control,
                              FeatureGroup::statistical, FeatureGroup::statistical},
                             rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    // cat_fraction constant but control -> kept; log_n correlates with n but
    // controls bypass dedup so n survives too; holes is all/mostly missing -> dropped
    CHECK(clean.feature_index("cat_fraction").has_value());
    CHECK(clean.feature_index("log_n").has_value());
    CHECK(clean.feature_index("n").has_value());
    CHECK_FALSE(clean.feature_index("holes").has_value());
}

TEST_CASE("preprocessing is idempotent") {
    Rng rng(8);
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (int f = 0; f < 12; ++f) {
        names.push_back("f" + std::to_string(f));
        groups.push_back(FeatureGroup::statistical);
    }
    std::vector<std::vector<double>> rows;
    for (int d = 0; d < 25; ++d) {
        std::vector<double> row(12);
        const double shared = rng.normal();
        for (int f = 0; f < 12; ++f) {
            if (f < 3) {
                row[f] = shared + 0.0001 * f;  // tightly correlated trio
            } else if (f == 3) {
                row[f] = 7.0;  // constant
            } else if (f == 4) {
                row[f] = rng.uniform01() < 0.4 ? kMissing : rng.normal();
            } else {
                row[f] = rng.normal();
            }
        }
        rows.push_back(std::move(row));
    }
    const auto m = matrix_of(names, groups, rows);
    const auto [once, log1] = preprocess_matrix(m, {});
    const auto [twice, log2] = preprocess_matrix(once, {});
    CHECK(log2.empty());
    REQUIRE(once.n_features() == twice.n_features());
    CHECK(once.feature_names() == twice.feature_names());
    for (std::size_t d = 0; d < once.n_datasets(); ++d) {
        for (std::size_t f = 0; f < once.n_features(); ++f) {
            const double a = once.cell(d, f);
            const double b = twice.cell(d, f);
            CHECK((is_missing(a) ? is_missing(b) : a == b));
        }
    }
}

TEST_CASE("every dropped column is logged exactly once, no cell is infinite") {
    Rng rng(9);
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (int f = 0; f < 20; ++f) {
        names.push_back("f" + std::to_string(f));
        groups.push_back(FeatureGroup::statistical);
    }
    std::vector<std::vector<double>> rows;
    for (int d = 0; d < 30; ++d) {
        std::vector<double> row(20);
        for (int f = 0; f < 20; ++f) {
            const double u = rng.uniform01();
            if (u < 0.05) {
                row[f] = std::numeric_limits<double>::infinity();
            } else if (u < 0.3) {
                row[f] = kMissing;
            } else {
                row[f] = rng.normal();
            }
        }
        rows.push_back(std::move(row));
    }
    const auto m = matrix_of(names, groups, rows);
    const auto [clean, log] = preprocess_matrix(m, {});
    std::set<std::string> seen;
    for (const auto& e : log) CHECK(seen.insert(e.feature_name).second);
    CHECK(clean.n_features() + log.size() == 20);
    for (std::size_t d = 0; d < clean.n_datasets(); ++d) {
        for (std::size_t f = 0; f < clean.n_features(); ++f) {
            CHECK_FALSE(std::isinf(clean.cell(d, f)));
        }
    }
}

TEST_CASE("dedup components match a brute-force connected-component oracle") {
    Rng rng(10);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n_features = 8;
        const std::size_t n_rows = 30;
        // random generators: group features around a few latent factors so
        // correlation edges form nontrivial components
        std::vector<std::vector<double>> rows(n_rows, std::vector<double>(n_features));
        std::vector<std::size_t> factor(n_features);
        for (auto& f : factor) f = rng.below(3);
        for (std::size_t d = 0; d < n_rows; ++d) {
            double latent[3] = {rng.normal(), rng.normal(), rng.normal()};
            for (std::size_t f = 0; f < n_features; ++f) {
                const bool noisy = rng.uniform01() < 0.25;
                rows[d][f] = latent[factor[f]] * (noisy ? 0.2 : 1.0) + (noisy ? rng.normal() : 0.0);
            }
        }
        std::vector<std::string> names;
        std::vector<FeatureGroup> groups;
        for (std::size_t f = 0; f < n_features; ++f) {
            names.push_back("f" + std::to_string(f));
            groups.push_back(FeatureGroup::statistical);
        }
        const auto m = matrix_of(names, groups, rows);
        PreprocessOptions opts;
        const auto [clean, log] = preprocess_matrix(m, opts);

        // oracle: adjacency by |spearman| > threshold, BFS components,
        // one survivor per component
        std::vector<std::vector<double>> cols(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            for (std::size_t d = 0; d < n_rows; ++d) cols[f].push_back(rows[d][f]);
        }
        std::vector<std::vector<std::size_t>> adj(n_features);
        for (std::size_t a = 0; a < n_features; ++a) {
            for (std::size_t b = a + 1; b < n_features; ++b) {
                const double rho = spearman(cols[a], cols[b]);
                if (!is_missing(rho) && std::fabs(rho) > opts.dedup_rho) {
                    adj[a].push_back(b);
                    adj[b].push_back(a);
                }
            }
        }
        std::vector<int> component(n_features, -1);
        int n_components = 0;
        for (std::size_t start = 0; start < n_features; ++start) {
            if (component[start] >= 0) continue;
            std::vector<std::size_t> queue = {start};
            component[start] = n_components;
            while (!queue.empty()) {
                const std::size_t cur = queue.back();
                queue.pop_back();
                for (std::size_t next : adj[cur]) {
                    if (component[next] < 0) {
                        component[next] = n_components;
                        queue.push_back(next);
                    }
                }
            }
            ++n_components;
        }
        // no column here is missing or near-constant, so survivors ==
        // number of components
        CHECK(clean.n_features() == static_cast<std::size_t>(n_components));
        // exactly one survivor per component
        std::map<int, int> survivors;
        for (const auto& name : clean.feature_names()) {
            const std::size_t idx = static_cast<std::size_t>(std::stoi(name.substr(1)));
            survivors[component[idx]] += 1;
        }
        for (const auto& [_, count] : survivors) CHECK(count == 1);
    }
}
