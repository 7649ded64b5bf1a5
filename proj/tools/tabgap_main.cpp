// tabgap command line: orchestrates the study pipeline
// (ingest -> gaps -> metafeatures -> preprocess -> screen -> adjust ->
// route-eval -> report) plus the synthetic-study generators.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabgap/csv.hpp"
#include "tabgap/error.hpp"
#include "tabgap/gaps.hpp"
#include "tabgap/matrix.hpp"
#include "tabgap/pipeline.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/screening.hpp"
#include "tabgap/stats.hpp"
#include "tabgap/synth.hpp"

namespace {

bool use_color() {
    if (std::getenv("NO_COLOR") != nullptr) return false;
    return isatty(fileno(stderr)) != 0;
}

void print_error(const std::string& msg) {
    if (use_color()) {
        std::cerr << "\033[31merror:\033[0m " << msg << "\n";
    } else {
        std::cerr << "error: " << msg << "\n";
    }
}

struct CommonOpts {
    std::string config;
    std::string out;
    long long seed = -1;
    bool seed_set = false;
    int jobs = 1;
    bool verbose = false;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool config_required = true) {
    auto* config = sub->add_option("--config", opts.config, "study config JSON");
    if (config_required) config->required();
    sub->add_option("--out", opts.out, "output directory override");
    sub->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    sub->add_option("--jobs", opts.jobs, "worker threads for stage-internal parallelism")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", opts.verbose, "print stage notes");
}

int run_stages(const CommonOpts& opts, const std::vector<tabgap::Stage>& stages) {
    std::optional<std::filesystem::path> out_override;
    if (!opts.out.empty()) out_override = opts.out;
    std::optional<std::uint64_t> seed_override;
    if (opts.seed_set) seed_override = static_cast<std::uint64_t>(opts.seed);

    const auto config = tabgap::StudyConfig::load_file(opts.config, out_override, seed_override);
    std::vector<std::string> log;
    tabgap::PipelineOptions pipeline_opts;
    pipeline_opts.jobs = opts.jobs;
    pipeline_opts.verbose = opts.verbose;
    tabgap::run_pipeline(config, stages, pipeline_opts, &log);
    if (opts.verbose) {
        for (const std::string& line : log) std::cerr << "note: " << line << "\n";
    }
    for (tabgap::Stage s : stages) std::cout << to_string(s) << ": done\n";
    return 0;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

// ---------------------------------------------------------------------------
// synth: writes a complete self-contained demo study into a directory.

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw tabgap::IoError("cannot write " + path.string());
    out << content;
}

void write_demo_study(const std::filesystem::path& dir, int n_datasets, std::uint64_t seed) {
    namespace fs = std::filesystem;
    using namespace tabgap;
    if (n_datasets < 4) throw Error("synth: need at least 4 datasets");
    fs::create_directories(dir / "datasets");

    std::vector<std::string> dataset_ids;
    for (int d = 0; d < n_datasets; ++d) dataset_ids.push_back("ds_" + zero_pad(d, 2));

    // Raw tables: sizes grow with the dataset index so size-driven
    // descriptors carry signal; the benchmark offsets below follow the
    // same index, giving the screen something real to find.
    nlohmann::json manifest = nlohmann::json::array();
    std::vector<DatasetInfo> infos;
    for (int d = 0; d < n_datasets; ++d) {
        const std::size_t rows = 160 + 12 * static_cast<std::size_t>(d);
        std::vector<SynthColumnSpec> cols;
        cols.push_back({"x_norm", SynthColumnSpec::Kind::numeric_normal, 0, 0, 0.0});
        cols.push_back({"x_mono", SynthColumnSpec::Kind::monotone_of_previous, 0, 0, 0.0});
        cols.push_back({"x_unif", SynthColumnSpec::Kind::numeric_uniform, 0, 0,
                        0.05 * static_cast<double>(d % 3)});
        cols.push_back({"x_norm2", SynthColumnSpec::Kind::numeric_normal, 0, 0, 0.0});
        cols.push_back({"cat4", SynthColumnSpec::Kind::categorical_uniform, 4, 0, 0.0});
        cols.push_back({"catp", SynthColumnSpec::Kind::categorical_product_pair, 2, 3, 0.0});
        cols.push_back({"target", SynthColumnSpec::Kind::numeric_normal, 0, 0, 0.0});
        const RawDatasetTable table = gen_raw_table(dataset_ids[static_cast<std::size_t>(d)],
                                                    rows, cols, seed);

        // write the table CSV
        std::ostringstream csv;
        std::vector<std::string> header;
        for (const RawColumn& col : table.columns) header.push_back(col.name);
        write_csv_row(csv, header);
        std::vector<std::string> cells(table.columns.size());
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                const RawColumn& col = table.columns[c];
                if (col.cell_missing(r)) {
                    cells[c].clear();
                } else if (col.kind == ColumnKind::numeric) {
                    cells[c] = format_double(col.numeric[r]);
                } else {
                    cells[c] = col.labels[static_cast<std::size_t>(col.codes[r])];
                }
            }
            write_csv_row(csv, cells);
        }
        const std::string file = dataset_ids[static_cast<std::size_t>(d)] + ".csv";
        write_file(dir / "datasets" / file, csv.str());

        nlohmann::json entry;
        entry["dataset_id"] = dataset_ids[static_cast<std::size_t>(d)];
        entry["table_path"] = file;
        entry["target_column"] = "target";
        entry["categorical_columns"] = {"cat4", "catp_a", "catp_b"};
        entry["split_definition"] = {{"kind", "kfold"}, {"repeats", 2}, {"folds", 3},
                                     {"seed", seed + static_cast<std::uint64_t>(d)}};
        manifest.push_back(std::move(entry));

        DatasetInfo info;
        info.dataset_id = dataset_ids[static_cast<std::size_t>(d)];
        info.n_instances = static_cast<long long>(rows);
        info.n_features = 7;
        switch (d % 3) {
            case 0:
                info.problem_type = ProblemType::binary;
                info.n_classes = 2;
                break;
            case 1:
                info.problem_type = ProblemType::multiclass;
                info.n_classes = 3;
                break;
            default: info.problem_type = ProblemType::regression; break;
        }
        info.pct_categorical = 100.0 * 3.0 / 7.0;
        infos.push_back(std::move(info));
    }
    write_file(dir / "datasets" / "manifest.json",
               nlohmann::json{{"datasets", manifest}}.dump(2) + "\n");

    {
        std::ostringstream info_csv;
        write_dataset_info(info_csv, infos);
        write_file(dir / "dataset_info.csv", info_csv.str());
    }

    // Benchmark runs: the "nets" family drifts from behind to ahead as the
    // dataset index grows, so its gap against "trees" tracks dataset size.
    BenchmarkSimSpec sim;
    sim.dataset_ids = dataset_ids;
    sim.n_repeats = 2;
    sim.n_folds = 3;
    sim.methods = {
        {"tree_one", "trees", 0.48}, {"tree_two", "trees", 0.52},
        {"net_one", "nets", 0.50},   {"net_two", "nets", 0.55},
        {"fm_one", "fm", 0.45},      {"fm_two", "fm", 0.58},
    };
    sim.offset_family = "nets";
    for (int d = 0; d < n_datasets; ++d) {
        const double t = static_cast<double>(d) / static_cast<double>(n_datasets - 1);
        sim.dataset_offsets.push_back(0.35 * (0.5 - t));
    }
    sim.error_noise_sd = 0.02;
    sim.val_fidelity = 0.9;
    sim.val_noise_sd = 0.01;
    sim.seed = seed;
    {
        std::ostringstream runs_csv;
        gen_benchmark_runs(runs_csv, sim);
        write_file(dir / "results.csv", runs_csv.str());
    }

    nlohmann::json config;
    config["seed"] = seed;
    config["out_dir"] = "out";
    config["epsilon"] = 1e-5;
    config["paths"] = {{"results", "results.csv"},
                       {"dataset_info", "dataset_info.csv"},
                       {"dataset_manifest", "datasets/manifest.json"}};
    config["families"] = nlohmann::json::array({
        nlohmann::json{{"id", "trees"}, {"members", {"tree_one", "tree_two"}}},
        nlohmann::json{{"id", "nets"}, {"members", {"net_one", "net_two"}}},
        nlohmann::json{{"id", "fm"}, {"members", {"fm_one", "fm_two"}}},
    });
    config["comparisons"] = nlohmann::json::array({
        nlohmann::json{{"id", "trees_vs_nets"}, {"family_a", "trees"}, {"family_b", "nets"}},
        nlohmann::json{{"id", "trees_vs_fm"},
                       {"family_a", "trees"},
                       {"family_b", "fm"},
                       {"applicability", {{"max_train_samples", 200}}}},
    });
    config["controls"] = {"log_n", "log_d", "d_over_n", "cat_fraction",
                          "feature_missing_fraction"};
    config["screening"] = {{"n_resamples", 500}};
    config["predictive"] = {{"n_resamples", 5000}};
    config["predictors"] = nlohmann::json::array({
        nlohmann::json{{"kind", "knn"}, {"k", 5}},
        nlohmann::json{{"kind", "rank_ridge"}, {"lambda", 1.0}},
    });
    write_file(dir / "config.json", config.dump(2) + "\n");
    std::cout << "demo study written to " << dir.string() << "\n"
              << "run it with: tabgap run --config " << (dir / "config.json").string() << "\n";
}

// ---------------------------------------------------------------------------
// sweep: planted-signal retention rate across study sizes.

struct SweepOpts {
    std::string out;
    std::uint64_t seed = 7;
    std::string grid = "25,51,100,200";
    std::string betas = "0,0.7,1.4";
    int reps = 10;
    int n_null = 200;
    double noise_sd = 1.0;
    int jobs = 1;
};

void run_sweep(const SweepOpts& opts) {
    using namespace tabgap;
    const auto grid = parse_int_list(opts.grid);
    const auto betas = parse_double_list(opts.betas);
    if (grid.empty() || betas.empty() || opts.reps < 1) {
        throw Error("sweep: empty grid, betas, or reps");
    }

    std::ostringstream csv;
    csv << "n_datasets,beta,retention_rate,mean_q,mean_sign_consistency\n";
    for (int n_datasets : grid) {
        for (double beta : betas) {
            int retained = 0;
            double q_sum = 0.0, sc_sum = 0.0;
            int measured = 0;
            for (int rep = 0; rep < opts.reps; ++rep) {
                PlantedStudySpec spec;
                spec.n_datasets = n_datasets;
                spec.n_null_features = opts.n_null;
                if (beta != 0.0) spec.planted = {{PlantedLink::Kind::linear, beta}};
                spec.noise_sd = opts.noise_sd;
                spec.seed = sub_seed(opts.seed,
                                     fnv1a64("sweep:" + std::to_string(n_datasets) + ":" +
                                             format_double(beta)),
                                     static_cast<std::uint64_t>(rep));
                const PlantedStudy study = gen_planted_matrix(spec);

                ScreenOptions screen;
                screen.bootstrap.n_resamples = 500;
                screen.bootstrap.seed = spec.seed;
                screen.jobs = opts.jobs;
                const auto results =
                    screen_features(study.matrix, study.gaps, "synthetic", screen);
                if (spec.planted.empty()) continue;
                for (const AssociationResult& r : results) {
                    if (r.feature_name == study.planted_names[0]) {
                        if (r.retained) ++retained;
                        q_sum += r.q_bh;
                        sc_sum += r.sign_consistency;
                        ++measured;
                        break;
                    }
                }
            }
            csv << n_datasets << "," << format_double(beta) << ","
                << format_double(beta == 0.0
                                     ? 0.0
                                     : static_cast<double>(retained) / opts.reps)
                << "," << format_double(measured > 0 ? q_sum / measured : 1.0) << ","
                << format_double(measured > 0 ? sc_sum / measured : 0.0) << "\n";
        }
    }
    write_file(opts.out, csv.str());
    std::cout << "sweep report written to " << opts.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-feature analysis of tabular benchmark performance gaps"};
    app.require_subcommand(1);

    // pipeline stage subcommands
    struct StageCommand {
        const char* name;
        const char* help;
        std::vector<tabgap::Stage> stages;
    };
    const std::vector<StageCommand> stage_commands = {
        {"ingest", "ingest benchmark results and dataset info", {tabgap::Stage::ingest}},
        {"gaps", "compute per-comparison dataset gaps", {tabgap::Stage::gaps}},
        {"metafeatures", "extract the meta-feature matrix", {tabgap::Stage::metafeatures}},
        {"preprocess", "clean the meta-feature matrix", {tabgap::Stage::preprocess}},
        {"screen", "run the robust association screen", {tabgap::Stage::screen}},
        {"adjust", "covariate-adjust the retained associations", {tabgap::Stage::adjust}},
        {"route-eval", "leave-one-dataset-out predictive evaluation",
         {tabgap::Stage::route_eval}},
        {"report", "render report.md and plot-ready CSVs", {tabgap::Stage::report}},
    };

    std::vector<std::unique_ptr<CommonOpts>> opt_holders;
    std::vector<std::function<int()>> actions;

    for (const StageCommand& cmd : stage_commands) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        opt_holders.push_back(std::make_unique<CommonOpts>());
        CommonOpts& opts = *opt_holders.back();
        add_common(sub, opts);
        const auto stages = cmd.stages;
        sub->callback([&opts, stages] { std::exit(run_stages(opts, stages)); });
    }

    // run: all stages (or a subset via --stages)
    {
        auto* sub = app.add_subcommand("run", "run the full pipeline");
        opt_holders.push_back(std::make_unique<CommonOpts>());
        CommonOpts& opts = *opt_holders.back();
        add_common(sub, opts);
        auto stages_csv = std::make_shared<std::string>();
        sub->add_option("--stages", *stages_csv, "comma-separated stage subset");
        sub->callback([&opts, stages_csv] {
            std::vector<tabgap::Stage> stages;
            if (stages_csv->empty()) {
                stages = tabgap::all_stages();
            } else {
                std::stringstream ss(*stages_csv);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    const auto stage = tabgap::stage_from_string(item);
                    if (!stage) throw tabgap::ConfigError("unknown stage '" + item + "'");
                    stages.push_back(*stage);
                }
            }
            std::exit(run_stages(opts, stages));
        });
    }

    // synth: bundled demo study
    {
        auto* sub = app.add_subcommand("synth", "generate a self-contained synthetic demo study");
        auto out = std::make_shared<std::string>();
        auto seed = std::make_shared<long long>(7);
        auto n_datasets = std::make_shared<int>(24);
        sub->add_option("--out", *out, "directory for the demo study")->required();
        sub->add_option("--seed", *seed, "generator seed");
        sub->add_option("--datasets", *n_datasets, "number of synthetic datasets");
        sub->callback([out, seed, n_datasets] {
            write_demo_study(*out, *n_datasets, static_cast<std::uint64_t>(*seed));
            std::exit(0);
        });
    }

    // sweep: retention-rate power analysis
    {
        auto* sub = app.add_subcommand("sweep", "planted-signal retention sweep over study sizes");
        auto opts = std::make_shared<SweepOpts>();
        sub->add_option("--out", opts->out, "output CSV path")->required();
        auto seed = std::make_shared<long long>(7);
        sub->add_option("--seed", *seed, "sweep seed");
        sub->add_option("--grid", opts->grid, "dataset counts, comma separated");
        sub->add_option("--betas", opts->betas, "planted effect sizes, comma separated");
        sub->add_option("--reps", opts->reps, "seeded replicates per cell");
        sub->add_option("--n-null", opts->n_null, "null features per study");
        sub->add_option("--noise-sd", opts->noise_sd, "gap noise standard deviation");
        sub->add_option("--jobs", opts->jobs, "worker threads");
        sub->callback([opts, seed] {
            opts->seed = static_cast<std::uint64_t>(*seed);
            run_sweep(*opts);
            std::exit(0);
        });
    }

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const tabgap::Error& e) {
        print_error(e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(e.what());
        return 1;
    }
    return 0;
}
