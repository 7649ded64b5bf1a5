#include "tabgap/gaps.hpp"

#include <algorithm>
#include <cmath>

#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

SplitAnchors SplitAnchors::from_errors(std::span<const double> errors, double epsilon) {
    if (errors.empty()) throw Error("normalization pool is empty");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    SplitAnchors a;
    a.epsilon = epsilon;
    a.e_min = sorted.front();
    const std::size_t n = sorted.size();
    // even pool: midpoint of the two middle order statistics
    a.e_med = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    a.r = std::max(a.e_med - a.e_min, epsilon);
    return a;
}

double SplitAnchors::normalize(double e) const {
    return std::clamp((e - e_min) / r, 0.0, 1.0);
}

std::vector<NormalizedRun> normalize_split(std::span<const MethodRun> pool, double epsilon) {
    if (pool.empty()) throw Error("normalize_split: empty pool");
    std::vector<double> test_errors(pool.size()), val_errors(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        test_errors[i] = pool[i].test_error;
        val_errors[i] = pool[i].val_error;
    }
    const SplitAnchors test_anchors = SplitAnchors::from_errors(test_errors, epsilon);
    const SplitAnchors val_anchors = SplitAnchors::from_errors(val_errors, epsilon);

    std::vector<NormalizedRun> out(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out[i].run = &pool[i];
        out[i].test_norm = test_anchors.normalize(pool[i].test_error);
        out[i].val_norm = val_anchors.normalize(pool[i].val_error);
    }
    return out;
}

const NormalizedRun* select_family_rep(const FamilySpec& family,
                                       std::span<const NormalizedRun> pool) {
    const NormalizedRun* best = nullptr;
    for (const NormalizedRun& nr : pool) {
        if (!family.contains(nr.run->method_id, nr.run->subtype)) continue;
        if (best == nullptr) {
            best = &nr;
            continue;
        }
        if (nr.val_norm < best->val_norm) {
            best = &nr;
        } else if (nr.val_norm == best->val_norm) {
            const auto key = std::make_pair(nr.run->method_id, nr.run->subtype);
            const auto best_key = std::make_pair(best->run->method_id, best->run->subtype);
            if (key < best_key) best = &nr;
        }
    }
    return best;
}

std::vector<GapRecord> compute_gaps(const ComparisonSpec& comparison, const FamilySpec& family_a,
                                    const FamilySpec& family_b, const RunStore& store,
                                    std::span<const DatasetInfo> infos, const GapOptions& options,
                                    std::vector<std::string>* log) {
    const auto note = [&](const std::string& msg) {
        if (log) log->push_back("[" + comparison.comparison_id + "] " + msg);
    };

    std::set<std::string> admitted;
    if (comparison.applicability) {
        admitted = applicable_datasets(*comparison.applicability, infos);
    }

    std::vector<GapRecord> records;
    for (const std::string& dataset_id : store.dataset_ids()) {
        if (comparison.applicability && !admitted.count(dataset_id)) continue;

        GapRecord rec;
        rec.comparison_id = comparison.comparison_id;
        rec.dataset_id = dataset_id;
        for (const auto& [split, pool] : store.pools(dataset_id)) {
            const auto normalized = normalize_split(pool, options.epsilon);
            const NormalizedRun* rep_a = select_family_rep(family_a, normalized);
            const NormalizedRun* rep_b = select_family_rep(family_b, normalized);
            if (rep_a == nullptr || rep_b == nullptr) continue;
            rec.per_split_gaps.push_back(rep_a->test_norm - rep_b->test_norm);
            rec.splits.push_back(split);
        }
        if (rec.per_split_gaps.empty()) {
            note("dataset '" + dataset_id + "' omitted: no split has both families measured");
            continue;
        }
        rec.n_splits_used = static_cast<int>(rec.per_split_gaps.size());
        rec.delta = vec_mean(rec.per_split_gaps);
        records.push_back(std::move(rec));
    }
    if (records.empty()) {
        note("warning: no applicable dataset yields a usable split");
    }
    return records;
}

}  // namespace tabgap
