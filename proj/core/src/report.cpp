#include "tabgap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "tabgap/csv.hpp"

namespace tabgap {

namespace {

std::string fmt3(double v) {
    if (std::isnan(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt_ci(double v, double lo, double hi) {
    if (std::isnan(v)) return "-";
    return fmt3(v) + " [" + fmt3(lo) + ", " + fmt3(hi) + "]";
}

void warn(std::vector<std::string>* log, const std::string& msg) {
    if (log) log->push_back("report: " + msg);
}

}  // namespace

void emit_report(ArtifactStore& store, const ReportOptions& options,
                 std::vector<std::string>* log) {
    std::ostringstream md;
    md << "# Study report\n";

    // Retention funnel
    md << "\n## Meta-feature retention funnel\n\n";
    if (store.has("metafeatures") && store.has("droplog")) {
        const Table matrix = store.load("metafeatures");
        const Table droplog = store.load("droplog");
        FunnelCounts funnel;
        funnel.extracted = matrix.n_cols() > 0 ? matrix.n_cols() - 1 : 0;  // minus dataset_id
        std::size_t too_missing = 0, near_constant = 0, dedup = 0;
        for (std::size_t r = 0; r < droplog.n_rows(); ++r) {
            const std::string reason = droplog.get_string(r, 1);
            if (reason == "too_missing") ++too_missing;
            else if (reason == "near_constant") ++near_constant;
            else if (reason == "dedup") ++dedup;
        }
        funnel.after_missing_filter = funnel.extracted - too_missing;
        funnel.after_near_constant = funnel.after_missing_filter - near_constant;
        funnel.after_dedup = funnel.after_near_constant - dedup;

        bool have_screen = store.has("associations");
        if (have_screen) {
            const Table assoc = store.load("associations");
            std::set<std::string> testable, nominal, fdr_pass, retained;
            for (std::size_t r = 0; r < assoc.n_rows(); ++r) {
                const std::string feature = assoc.get_string(r, 1);
                testable.insert(feature);
                if (!assoc.missing(r, 6) && assoc.get_real(r, 6) < 0.05) nominal.insert(feature);
                if (!assoc.missing(r, 7) && assoc.get_real(r, 7) < 0.05) fdr_pass.insert(feature);
                if (assoc.get_integer(r, 9) != 0) retained.insert(feature);
            }
            funnel.testable = testable.size();
            funnel.nominal = nominal.size();
            funnel.fdr_pass = fdr_pass.size();
            funnel.retained = retained.size();
        }

        md << "| step | features |\n|---|---|\n";
        md << "| extracted | " << funnel.extracted << " |\n";
        md << "| after missing-value filter | " << funnel.after_missing_filter << " |\n";
        md << "| after near-constant filter | " << funnel.after_near_constant << " |\n";
        md << "| after correlation dedup | " << funnel.after_dedup << " |\n";
        if (have_screen) {
            md << "| testable (any comparison) | " << funnel.testable << " |\n";
            md << "| nominal p < 0.05 (any comparison) | " << funnel.nominal << " |\n";
            md << "| q_BH < 0.05 (any comparison) | " << funnel.fdr_pass << " |\n";
            md << "| retained (any comparison) | " << funnel.retained << " |\n";
        }
    } else {
        md << "_absent (metafeature artifacts not found)_\n";
        warn(log, "funnel section absent: missing metafeatures/droplog artifacts");
    }

    // Retained associations
    md << "\n## Retained robust associations\n\n";
    std::vector<std::string> comparisons;  // in artifact order
    if (store.has("associations")) {
        const Table assoc = store.load("associations");
        for (std::size_t r = 0; r < assoc.n_rows(); ++r) {
            const std::string cmp = assoc.get_string(r, 0);
            if (std::find(comparisons.begin(), comparisons.end(), cmp) == comparisons.end()) {
                comparisons.push_back(cmp);
            }
        }
        md << "| comparison | feature | n | rho (95% CI) | q_BH | sign cons. | adj. coef (95% CI) "
              "| adj. sign cons. |\n|---|---|---|---|---|---|---|---|\n";
        std::size_t n_retained = 0;
        for (std::size_t r = 0; r < assoc.n_rows(); ++r) {
            if (assoc.get_integer(r, 9) == 0) continue;
            ++n_retained;
            md << "| " << assoc.get_string(r, 0) << " | `" << assoc.get_string(r, 1) << "` | "
               << assoc.get_integer(r, 2) << " | "
               << fmt_ci(assoc.get_real(r, 3), assoc.get_real(r, 4), assoc.get_real(r, 5)) << " | "
               << fmt3(assoc.get_real(r, 7)) << " | " << fmt3(assoc.get_real(r, 8)) << " | "
               << (assoc.missing(r, 10)
                       ? std::string("-")
                       : fmt_ci(assoc.get_real(r, 10), assoc.get_real(r, 11), assoc.get_real(r, 12)))
               << " | " << (assoc.missing(r, 13) ? std::string("-") : fmt3(assoc.get_real(r, 13)))
               << " |\n";
        }
        if (n_retained == 0) md << "\n_No feature survives the robust screen._\n";
    } else {
        md << "_absent (associations artifact not found)_\n";
        warn(log, "retained section absent: missing associations artifact");
    }

    // Nominal associations per comparison
    md << "\n## Nominal associations (top " << options.top_nominal << " by p, p < 0.05)\n";
    if (store.has("associations")) {
        const Table assoc = store.load("associations");
        for (const std::string& cmp : comparisons) {
            md << "\n### " << cmp << "\n\n";
            md << "| feature | n | rho | p | q_BH |\n|---|---|---|---|---|\n";
            int emitted = 0;
            for (std::size_t r = 0; r < assoc.n_rows() && emitted < options.top_nominal; ++r) {
                if (assoc.get_string(r, 0) != cmp) continue;
                if (assoc.missing(r, 6) || assoc.get_real(r, 6) >= 0.05) continue;
                md << "| `" << assoc.get_string(r, 1) << "` | " << assoc.get_integer(r, 2) << " | "
                   << fmt3(assoc.get_real(r, 3)) << " | " << fmt3(assoc.get_real(r, 6)) << " | "
                   << fmt3(assoc.get_real(r, 7)) << " |\n";
                ++emitted;
            }
            if (emitted == 0) md << "\n_none_\n";
        }
    } else {
        md << "\n_absent_\n";
    }

    // Predictive evaluation
    md << "\n## Leave-one-dataset-out predictive evaluation\n";
    if (store.has("predictive")) {
        const Table pred = store.load("predictive");
        std::vector<std::string> pred_comparisons;
        for (std::size_t r = 0; r < pred.n_rows(); ++r) {
            const std::string cmp = pred.get_string(r, 0);
            if (std::find(pred_comparisons.begin(), pred_comparisons.end(), cmp) ==
                pred_comparisons.end()) {
                pred_comparisons.push_back(cmp);
            }
        }
        for (const std::string& cmp : pred_comparisons) {
            md << "\n### " << cmp << "\n\n";
            md << "| predictor | feature set | n | n_pred | MAE (95% CI) "
                  "| sign accuracy (95% CI) |\n|---|---|---|---|---|---|\n";
            for (std::size_t r = 0; r < pred.n_rows(); ++r) {
                if (pred.get_string(r, 0) != cmp) continue;
                md << "| " << pred.get_string(r, 1) << " | " << pred.get_string(r, 2) << " | "
                   << pred.get_integer(r, 3) << " | " << pred.get_integer(r, 4) << " | "
                   << fmt_ci(pred.get_real(r, 5), pred.get_real(r, 6), pred.get_real(r, 7)) << " | "
                   << fmt_ci(pred.get_real(r, 8), pred.get_real(r, 9), pred.get_real(r, 10))
                   << " |\n";
            }
        }

        // Plot-ready CSVs mirroring the predictive points with CI columns.
        Table mae;
        mae.add_string_column("comparison_id");
        mae.add_string_column("predictor");
        mae.add_string_column("feature_set");
        mae.add_real_column("mae");
        mae.add_real_column("lo");
        mae.add_real_column("hi");
        Table sign = mae;
        {
            // rebuild with the sign column names
            Table s;
            s.add_string_column("comparison_id");
            s.add_string_column("predictor");
            s.add_string_column("feature_set");
            s.add_real_column("sign_acc");
            s.add_real_column("lo");
            s.add_real_column("hi");
            sign = s;
        }
        for (std::size_t r = 0; r < pred.n_rows(); ++r) {
            mae.append_row();
            mae.set_string(r, 0, pred.get_string(r, 0));
            mae.set_string(r, 1, pred.get_string(r, 1));
            mae.set_string(r, 2, pred.get_string(r, 2));
            mae.set_real(r, 3, pred.get_real(r, 5));
            mae.set_real(r, 4, pred.get_real(r, 6));
            mae.set_real(r, 5, pred.get_real(r, 7));
            sign.append_row();
            sign.set_string(r, 0, pred.get_string(r, 0));
            sign.set_string(r, 1, pred.get_string(r, 1));
            sign.set_string(r, 2, pred.get_string(r, 2));
            sign.set_real(r, 3, pred.get_real(r, 8));
            sign.set_real(r, 4, pred.get_real(r, 9));
            sign.set_real(r, 5, pred.get_real(r, 10));
        }
        store.persist("plot-mae", mae);
        store.persist("plot-sign", sign);
    } else {
        md << "\n_absent (predictive artifact not found)_\n";
        warn(log, "predictive section absent: missing predictive artifact");
    }

    store.persist_text("report", "report.md", md.str());
}

}  // namespace tabgap
