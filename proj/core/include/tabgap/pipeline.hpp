#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tabgap/artifact.hpp"
#include "tabgap/gaps.hpp"
#include "tabgap/matrix.hpp"
#include "tabgap/metafeatures.hpp"
#include "tabgap/preprocess.hpp"
#include "tabgap/raw_table.hpp"
#include "tabgap/routing.hpp"
#include "tabgap/screening.hpp"
#include "tabgap/study_config.hpp"

namespace tabgap {

enum class Stage { ingest, gaps, metafeatures, preprocess, screen, adjust, route_eval, report };

const std::vector<Stage>& all_stages();
std::string to_string(Stage s);
std::optional<Stage> stage_from_string(const std::string& s);

/// The one configuration document driving a study. The seed is mandatory;
/// nothing falls back to wall-clock time.
struct StudyConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    double epsilon = 1e-5;

    std::filesystem::path results_path;
    std::filesystem::path dataset_info_path;
    std::filesystem::path dataset_manifest_path;

    StudyDefinition study;

    TrainingRows training_rows = TrainingRows::first_split;
    MetaFeatureOptions metafeatures;
    PreprocessOptions preprocess;

    ScreenOptions screening;       // bootstrap defaults to 500 resamples
    BootstrapConfig predictive;    // defaults to 5000 resamples

    std::vector<PredictorSpec> predictors;
    std::vector<FeatureSetKind> feature_sets;
    int top_nominal = 10;          // rows per nominal report table
    bool verbose_artifacts = false;

    /// Loads and validates a config file; relative paths resolve against
    /// the file's directory. `out_override` and `seed_override` come from
    /// the command line.
    static StudyConfig load_file(const std::filesystem::path& path,
                                 const std::optional<std::filesystem::path>& out_override = {},
                                 const std::optional<std::uint64_t>& seed_override = {});
};

struct PipelineOptions {
    int jobs = 1;
    bool verbose = false;
};

/// Runs the requested stages in canonical order. Every stage reads and
/// writes only canonical artifacts in the study's output directory, so a
/// rerun with unchanged inputs and seed is byte-identical. Throws
/// ConfigError (naming the prerequisite command) when a stage dependency
/// is missing.
void run_pipeline(const StudyConfig& config, const std::vector<Stage>& stages,
                  const PipelineOptions& options, std::vector<std::string>* log = nullptr);

// Artifact <-> domain conversions shared by stages, tools and tests.
Table runs_to_table(const RunStore& store);
RunStore runs_from_table(const Table& t);
Table dataset_info_to_table(std::span<const DatasetInfo> infos);
std::vector<DatasetInfo> dataset_info_from_table(const Table& t);
Table gaps_to_table(std::span<const GapRecord> gaps);
std::vector<GapRecord> gaps_from_table(const Table& t);
Table per_split_gaps_to_table(std::span<const GapRecord> gaps);
Table associations_to_table(std::span<const AssociationResult> results,
                            std::span<const AdjustedResult> adjusted);
Table predictive_to_table(std::span<const PredictiveResult> results);
Table predictions_to_table(std::span<const PredictiveResult> results);

}  // namespace tabgap
