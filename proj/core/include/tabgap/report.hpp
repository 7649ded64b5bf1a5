#pragma once

#include <string>
#include <vector>

#include "tabgap/artifact.hpp"

namespace tabgap {

struct ReportOptions {
    int top_nominal = 10;  // rows per nominal-association table
};

/// Renders report.md plus the plot-ready CSVs (plot-mae, plot-sign) from
/// the artifacts already in the store. A pure view: every number is
/// formatted from artifact values, nothing is recomputed. Missing
/// artifacts leave their section marked absent and add a warning.
void emit_report(ArtifactStore& store, const ReportOptions& options,
                 std::vector<std::string>* log = nullptr);

/// The Figure-1-style retention funnel: feature counts after each
/// pipeline step, a feature counting toward a screening step when it
/// passes for at least one comparison.
struct FunnelCounts {
    std::size_t extracted = 0;
    std::size_t after_missing_filter = 0;
    std::size_t after_near_constant = 0;
    std::size_t after_dedup = 0;
    std::size_t testable = 0;
    std::size_t nominal = 0;   // p < 0.05 for at least one comparison
    std::size_t fdr_pass = 0;  // q_BH < 0.05 for at least one comparison
    std::size_t retained = 0;
};

}  // namespace tabgap
