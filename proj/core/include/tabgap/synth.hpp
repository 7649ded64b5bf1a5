#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tabgap/gaps.hpp"
#include "tabgap/matrix.hpp"
#include "tabgap/raw_table.hpp"
#include "tabgap/store.hpp"

namespace tabgap {

// Every generator here is a pure function of its spec: all randomness
// comes from Rng (std::mt19937_64) seeded through sub_seed, so outputs
// are bit-reproducible across platforms.

struct PlantedLink {
    enum class Kind { linear, monotone_nonlinear };
    Kind kind = Kind::linear;
    double beta = 1.0;
};

struct PlantedStudySpec {
    int n_datasets = 50;
    int n_null_features = 200;
    std::vector<PlantedLink> planted;
    double noise_sd = 1.0;
    double missing_rate = 0.0;  // in [0, 1), applied to feature cells only
    std::uint64_t seed = 0;
};

struct PlantedStudy {
    MetaFeatureMatrix matrix;
    std::vector<GapRecord> gaps;   // comparison_id "synthetic"
    std::vector<std::string> planted_names;
};

/// Null features are i.i.d. standard normal; planted features drive the
/// gap through their link plus Gaussian noise. With noise_sd = 1 and a
/// linear link, beta = 1.4 puts the population Spearman correlation near
/// 0.8 (pre-calibrated; see the synth tests).
PlantedStudy gen_planted_matrix(const PlantedStudySpec& spec);

/// Column recipes with analytically known meta-feature values.
struct SynthColumnSpec {
    enum class Kind {
        categorical_uniform,     // exactly n/n_levels rows per level (n divisible)
        numeric_normal,
        numeric_uniform,
        monotone_of_previous,    // strictly increasing map of the previous column
        categorical_product_pair // two columns with exact product counts (independent)
    };
    std::string name;
    Kind kind = Kind::numeric_normal;
    int n_levels = 2;    // categorical_uniform / first of the product pair
    int n_levels_b = 2;  // second of the product pair
    double missing_rate = 0.0;
};

RawDatasetTable gen_raw_table(const std::string& dataset_id, std::size_t n_rows,
                              std::span<const SynthColumnSpec> columns, std::uint64_t seed);

/// Synthetic benchmark run table in the canonical results CSV schema.
struct SimMethod {
    std::string method_id;
    std::string family_id;
    double base_error = 0.5;
};

struct BenchmarkSimSpec {
    std::vector<std::string> dataset_ids;
    int n_repeats = 2;
    int n_folds = 3;
    std::vector<SimMethod> methods;
    std::string offset_family;            // family whose test errors shift per dataset
    std::vector<double> dataset_offsets;  // aligned with dataset_ids; empty means zeros
    double error_noise_sd = 0.0;
    double val_fidelity = 1.0;   // 1: validation mirrors test; -1: anti-correlated
    double val_noise_sd = 0.0;
    bool emit_tuned = true;      // also emit a slightly better "tuned" row per method
    double tuned_gain = 0.01;
    ProblemType problem_type = ProblemType::binary;
    std::string metric_name = "logloss";
    std::uint64_t seed = 0;
};

void gen_benchmark_runs(std::ostream& out, const BenchmarkSimSpec& spec);

}  // namespace tabgap
