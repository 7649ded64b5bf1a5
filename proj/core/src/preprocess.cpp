#include "tabgap/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "tabgap/csv.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/stats.hpp"

namespace tabgap {

std::string to_string(DropReason r) {
    switch (r) {
        case DropReason::too_missing: return "too_missing";
        case DropReason::near_constant: return "near_constant";
        case DropReason::dedup: return "dedup";
    }
    return "unknown";
}

namespace {

struct ColumnStats {
    std::size_t n_missing = 0;
    std::size_t n_present = 0;
    std::size_t n_unique = 0;
    double modal_share = 0.0;  // share of the most frequent value among present cells
    double variance = 0.0;
};

ColumnStats column_stats(std::span<const double> col) {
    ColumnStats s;
    std::map<double, std::size_t> counts;
    std::vector<double> present;
    for (double v : col) {
        if (is_missing(v)) {
            ++s.n_missing;
            continue;
        }
        ++counts[v];
        present.push_back(v);
    }
    s.n_present = present.size();
    s.n_unique = counts.size();
    std::size_t modal = 0;
    for (const auto& [_, c] : counts) modal = std::max(modal, c);
    s.modal_share = present.empty() ? 0.0 : static_cast<double>(modal) / present.size();
    const double var = vec_variance(present);
    s.variance = is_missing(var) ? 0.0 : var;
    return s;
}

// Union-find over feature indices.
struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::pair<MetaFeatureMatrix, std::vector<DropLogEntry>> preprocess_matrix(
    const MetaFeatureMatrix& matrix, const PreprocessOptions& options) {
    const std::size_t n_rows = matrix.n_datasets();
    const std::size_t n_cols = matrix.n_features();

    // Step 1: infinities become missing.
    MetaFeatureMatrix work = matrix;
    for (std::size_t d = 0; d < n_rows; ++d) {
        for (std::size_t f = 0; f < n_cols; ++f) {
            if (std::isinf(work.cell(d, f))) work.set_cell(d, f, kMissing);
        }
    }

    std::vector<DropLogEntry> dropped;
    std::vector<bool> alive(n_cols, true);
    std::vector<ColumnStats> stats(n_cols);
    std::vector<std::vector<double>> columns(n_cols);
    for (std::size_t f = 0; f < n_cols; ++f) {
        columns[f] = work.column(f);
        stats[f] = column_stats(columns[f]);
    }
    const auto is_control = [&](std::size_t f) {
        return work.group(f) == FeatureGroup::control;
    };

    // Step 2: missing fraction.
    for (std::size_t f = 0; f < n_cols; ++f) {
        if (is_control(f)) continue;
        const double frac =
            n_rows == 0 ? 0.0 : static_cast<double>(stats[f].n_missing) / static_cast<double>(n_rows);
        if (frac > options.missing_threshold) {
            alive[f] = false;
            dropped.push_back({work.feature_names()[f], DropReason::too_missing,
                               "missing fraction " + format_double(frac)});
        }
    }

    // Step 3: near-constant columns.
    for (std::size_t f = 0; f < n_cols; ++f) {
        if (!alive[f] || is_control(f)) continue;
        const bool constant = stats[f].n_present > 0 &&
                              (stats[f].modal_share >= options.near_constant_share ||
                               stats[f].variance < options.near_constant_variance);
        if (constant) {
            alive[f] = false;
            dropped.push_back({work.feature_names()[f], DropReason::near_constant,
                               "modal share " + format_double(stats[f].modal_share)});
        }
    }

    // Step 4: dedup of mutually correlated columns (controls excluded).
    std::vector<std::size_t> candidates;
    for (std::size_t f = 0; f < n_cols; ++f) {
        if (alive[f] && !is_control(f)) candidates.push_back(f);
    }
    DisjointSet components(candidates.size());
    for (std::size_t a = 0; a < candidates.size(); ++a) {
        for (std::size_t b = a + 1; b < candidates.size(); ++b) {
            const auto [x, y] = complete_pairs(columns[candidates[a]], columns[candidates[b]]);
            if (x.size() < options.dedup_min_overlap) continue;
            const double rho = spearman(x, y);
            if (!is_missing(rho) && std::fabs(rho) > options.dedup_rho) {
                components.unite(a, b);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t a = 0; a < candidates.size(); ++a) {
        groups[components.find(a)].push_back(candidates[a]);
    }
    for (auto& [_, members] : groups) {
        if (members.size() < 2) continue;
        // keep: fewest missing, then most unique values, then name
        const auto keep = *std::min_element(
            members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
                const auto key_a = std::make_tuple(stats[a].n_missing,
                                                   n_rows - stats[a].n_unique,
                                                   work.feature_names()[a]);
                const auto key_b = std::make_tuple(stats[b].n_missing,
                                                   n_rows - stats[b].n_unique,
                                                   work.feature_names()[b]);
                return key_a < key_b;
            });
        for (std::size_t f : members) {
            if (f == keep) continue;
            alive[f] = false;
            dropped.push_back({work.feature_names()[f], DropReason::dedup,
                               "kept " + work.feature_names()[keep]});
        }
    }

    std::vector<std::size_t> keep_indices;
    for (std::size_t f = 0; f < n_cols; ++f) {
        if (alive[f]) keep_indices.push_back(f);
    }
    std::sort(dropped.begin(), dropped.end(),
              [](const DropLogEntry& a, const DropLogEntry& b) {
                  return a.feature_name < b.feature_name;
              });
    return {work.select_features(keep_indices), std::move(dropped)};
}

Table drop_log_table(const std::vector<DropLogEntry>& entries) {
    Table t;
    t.add_string_column("feature_name");
    t.add_string_column("reason");
    t.add_string_column("detail");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        t.append_row();
        t.set_string(i, 0, entries[i].feature_name);
        t.set_string(i, 1, to_string(entries[i].reason));
        t.set_string(i, 2, entries[i].detail);
    }
    return t;
}

}  // namespace tabgap
