#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "tabgap/artifact.hpp"
#include "tabgap/csv.hpp"
#include "tabgap/error.hpp"
#include "tabgap/pipeline.hpp"
#include "tabgap/report.hpp"
#include "tabgap/synth.hpp"

using namespace tabgap;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("tabgap_pipeline_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << content;
}

// Minimal complete study: benchmark runs for two families over six
// datasets plus tiny raw tables.
fs::path write_tiny_study(const std::string& tag) {
    const auto dir = temp_dir(tag);
    fs::create_directories(dir / "datasets");

    std::vector<std::string> ids;
    for (int d = 0; d < 6; ++d) ids.push_back("ds" + std::to_string(d));

    BenchmarkSimSpec sim;
    sim.dataset_ids = ids;
    sim.n_repeats = 2;
    sim.n_folds = 2;
    sim.methods = {{"a1", "alpha", 0.5}, {"a2", "alpha", 0.52},
                   {"b1", "beta", 0.5},  {"b2", "beta", 0.54}};
    sim.offset_family = "beta";
    sim.dataset_offsets = {-0.15, -0.09, -0.03, 0.03, 0.09, 0.15};
    sim.error_noise_sd = 0.01;
    sim.seed = 99;
    std::ostringstream runs;
    gen_benchmark_runs(runs, sim);
    write_file(dir / "results.csv", runs.str());

    std::string info_csv =
        "dataset_id,n_instances,n_features,problem_type,n_classes,pct_categorical\n";
    std::string manifest = R"({"datasets": [)";
    for (int d = 0; d < 6; ++d) {
        const std::size_t rows = 40 + 25 * static_cast<std::size_t>(d);
        std::vector<SynthColumnSpec> specs = {
            {"x", SynthColumnSpec::Kind::numeric_normal, 0, 0, 0.0},
            {"y", SynthColumnSpec::Kind::numeric_uniform, 0, 0, 0.0},
            {"k", SynthColumnSpec::Kind::categorical_uniform, 3, 0, 0.0},
        };
        const auto table = gen_raw_table(ids[static_cast<std::size_t>(d)], rows, specs, 7);
        std::ostringstream csv;
        csv << "x,y,k\n";
        for (std::size_t r = 0; r < rows; ++r) {
            csv << format_double(table.columns[0].numeric[r]) << ","
                << format_double(table.columns[1].numeric[r]) << ","
                << table.columns[2].labels[static_cast<std::size_t>(table.columns[2].codes[r])]
                << "\n";
        }
        write_file(dir / "datasets" / (ids[static_cast<std::size_t>(d)] + ".csv"), csv.str());

        info_csv += ids[static_cast<std::size_t>(d)] + "," + std::to_string(rows) +
                    ",3,binary,2,33.3\n";
        if (d > 0) manifest += ",";
        manifest += "{\"dataset_id\": \"" + ids[static_cast<std::size_t>(d)] +
                    "\", \"table_path\": \"" + ids[static_cast<std::size_t>(d)] +
                    ".csv\", \"categorical_columns\": [\"k\"]}";
    }
    manifest += "]}";
    write_file(dir / "dataset_info.csv", info_csv);
    write_file(dir / "datasets" / "manifest.json", manifest);

    const std::string config = R"({
      "seed": 13,
      "out_dir": "out",
      "paths": {
        "results": "results.csv",
        "dataset_info": "dataset_info.csv",
        "dataset_manifest": "datasets/manifest.json"
      },
      "families": [
        {"id": "alpha", "members": ["a1", "a2"]},
        {"id": "beta", "members": ["b1", "b2"]}
      ],
      "comparisons": [
        {"id": "alpha_vs_beta", "family_a": "alpha", "family_b": "beta"}
      ],
      "controls": ["log_n", "log_d", "d_over_n", "cat_fraction", "feature_missing_fraction"],
      "screening": {"n_resamples": 200, "min_pairs": 4},
      "predictive": {"n_resamples": 300},
      "predictors": [{"kind": "knn", "k": 3}]
    })";
    write_file(dir / "config.json", config);
    return dir;
}

std::map<std::string, std::string> artifact_hashes(const fs::path& out_dir) {
    std::map<std::string, std::string> hashes;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(ArtifactStore::hash_bytes(buf.str())));
        hashes[entry.path().filename().string()] = hex;
    }
    return hashes;
}

}  // namespace

TEST_CASE("full pipeline runs and reruns byte-identically") {
    const auto dir = write_tiny_study("full");
    const auto config = StudyConfig::load_file(dir / "config.json");

    PipelineOptions opts;
    opts.jobs = 1;
    run_pipeline(config, all_stages(), opts);

    const auto out_dir = dir / "out";
    ArtifactStore store(out_dir);
    for (const std::string name : {"runs", "dataset-info", "gaps", "metafeatures",
                                   "metafeatures-clean", "droplog", "associations", "predictive",
                                   "predictions", "plot-mae", "plot-sign"}) {
        CHECK(store.has(name));
    }
    CHECK(fs::exists(out_dir / "report.md"));

    const auto first = artifact_hashes(out_dir);
    PipelineOptions parallel;
    parallel.jobs = 4;
    run_pipeline(config, all_stages(), parallel);
    const auto second = artifact_hashes(out_dir);
    CHECK(first == second);

    SUBCASE("gap table matches the canonical schema") {
        const Table gaps = store.load("gaps");
        REQUIRE(gaps.n_cols() == 4);
        CHECK(gaps.column_names() ==
              std::vector<std::string>{"comparison_id", "dataset_id", "delta", "n_splits_used"});
        CHECK(gaps.n_rows() == 6);
    }
    SUBCASE("association table matches the documented schema") {
        const Table assoc = store.load("associations");
        CHECK(assoc.column_names() ==
              std::vector<std::string>{"comparison_id", "feature", "n", "rho", "ci_low", "ci_high",
                                       "p", "q_bh", "sign_consistency", "retained", "adj_coef",
                                       "adj_ci_low", "adj_ci_high", "adj_sign_consistency"});
    }
    SUBCASE("predictive table matches the documented schema") {
        const Table pred = store.load("predictive");
        CHECK(pred.column_names() ==
              std::vector<std::string>{"comparison_id", "predictor", "feature_set", "n", "n_pred",
                                       "mae", "mae_lo", "mae_hi", "sign_acc", "sign_lo",
                                       "sign_hi"});
        bool has_baseline = false;
        for (std::size_t r = 0; r < pred.n_rows(); ++r) {
            if (pred.get_string(r, 1) == "baseline") has_baseline = true;
        }
        CHECK(has_baseline);
    }
}

TEST_CASE("stage dependencies produce actionable errors") {
    const auto dir = write_tiny_study("deps");
    const auto config = StudyConfig::load_file(dir / "config.json");
    PipelineOptions opts;

    SUBCASE("gaps before ingest") {
        CHECK_THROWS_WITH_AS(run_pipeline(config, {Stage::gaps}, opts),
                             doctest::Contains("ingest"), ConfigError);
    }
    SUBCASE("route-eval with robust sets before screen") {
        run_pipeline(config, {Stage::ingest, Stage::gaps, Stage::metafeatures, Stage::preprocess},
                     opts);
        CHECK_THROWS_WITH_AS(run_pipeline(config, {Stage::route_eval}, opts),
                             doctest::Contains("screen"), ConfigError);
    }
}

TEST_CASE("report renders retained rows, or an explicit empty note") {
    const auto dir = temp_dir("report_retained");
    ArtifactStore store(dir);

    Table assoc;
    assoc.add_string_column("comparison_id");
    assoc.add_string_column("feature");
    assoc.add_integer_column("n");
    assoc.add_real_column("rho");
    assoc.add_real_column("ci_low");
    assoc.add_real_column("ci_high");
    assoc.add_real_column("p");
    assoc.add_real_column("q_bh");
    assoc.add_real_column("sign_consistency");
    assoc.add_integer_column("retained");
    assoc.add_real_column("adj_coef");
    assoc.add_real_column("adj_ci_low");
    assoc.add_real_column("adj_ci_high");
    assoc.add_real_column("adj_sign_consistency");
    const auto add_row = [&](const std::string& feature, double p, double q, bool retained) {
        const std::size_t r = assoc.n_rows();
        assoc.append_row();
        assoc.set_string(r, 0, "cmp");
        assoc.set_string(r, 1, feature);
        assoc.set_integer(r, 2, 50);
        assoc.set_real(r, 3, -0.5);
        assoc.set_real(r, 4, -0.7);
        assoc.set_real(r, 5, -0.2);
        assoc.set_real(r, 6, p);
        assoc.set_real(r, 7, q);
        assoc.set_real(r, 8, retained ? 1.0 : 0.6);
        assoc.set_integer(r, 9, retained ? 1 : 0);
    };

    const auto render = [&] {
        emit_report(store, ReportOptions{}, nullptr);
        std::ifstream in(dir / "report.md");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    add_row("null_feature", 0.2, 0.8, false);
    store.persist("associations", assoc);
    const std::string empty_report = render();
    CHECK(empty_report.find("No feature survives") != std::string::npos);

    add_row("planted_0", 0.0001, 0.01, true);
    store.persist("associations", assoc);
    const std::string full_report = render();
    CHECK(full_report.find("planted_0") != std::string::npos);
    CHECK(full_report.find("No feature survives") == std::string::npos);
}

TEST_CASE("report renders with missing artifacts and exits cleanly") {
    const auto dir = temp_dir("report_only");
    ArtifactStore store(dir);
    std::vector<std::string> log;
    emit_report(store, ReportOptions{}, &log);
    CHECK(fs::exists(dir / "report.md"));
    CHECK_FALSE(log.empty());
    std::ifstream in(dir / "report.md");
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().find("absent") != std::string::npos);
}

TEST_CASE("config validation") {
    const auto dir = temp_dir("config_validation");
    SUBCASE("missing seed is rejected") {
        write_file(dir / "c.json", R"({"out_dir": "out"})");
        CHECK_THROWS_WITH_AS(StudyConfig::load_file(dir / "c.json"), doctest::Contains("seed"),
                             ConfigError);
    }
    SUBCASE("seed override wins") {
        write_file(dir / "c.json", R"({"seed": 1, "out_dir": "out"})");
        const auto cfg = StudyConfig::load_file(dir / "c.json", {}, 42);
        CHECK(cfg.seed == 42);
    }
    SUBCASE("unknown feature set is rejected") {
        write_file(dir / "c.json", R"({"seed": 1, "out_dir": "out", "feature_sets": ["bogus"]})");
        CHECK_THROWS_AS(StudyConfig::load_file(dir / "c.json"), ConfigError);
    }
}
