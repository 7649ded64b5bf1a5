#include "tabgap/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tabgap/csv.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"
#include "tabgap/parallel.hpp"
#include "tabgap/report.hpp"

namespace tabgap {

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = {Stage::ingest,  Stage::gaps,   Stage::metafeatures,
                                              Stage::preprocess, Stage::screen, Stage::adjust,
                                              Stage::route_eval, Stage::report};
    return stages;
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::gaps: return "gaps";
        case Stage::metafeatures: return "metafeatures";
        case Stage::preprocess: return "preprocess";
        case Stage::screen: return "screen";
        case Stage::adjust: return "adjust";
        case Stage::route_eval: return "route-eval";
        case Stage::report: return "report";
    }
    return "unknown";
}

std::optional<Stage> stage_from_string(const std::string& s) {
    for (Stage stage : all_stages()) {
        if (to_string(stage) == s) return stage;
    }
    return std::nullopt;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path = p;
    return path.is_absolute() ? path : base / path;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

StudyConfig StudyConfig::load_file(const std::filesystem::path& path,
                                   const std::optional<std::filesystem::path>& out_override,
                                   const std::optional<std::uint64_t>& seed_override) {
    const std::string text = read_text_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    const auto base = std::filesystem::absolute(path).parent_path();

    StudyConfig cfg;
    if (seed_override) {
        cfg.seed = *seed_override;
    } else if (doc.contains("seed")) {
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    } else {
        throw ConfigError("config must set a seed (runs never default to wall-clock time)");
    }
    if (out_override) {
        cfg.out_dir = *out_override;
    } else if (doc.contains("out_dir")) {
        cfg.out_dir = resolve(base, doc.at("out_dir").get<std::string>());
    } else {
        throw ConfigError("config must set out_dir (or pass --out)");
    }
    cfg.epsilon = doc.value("epsilon", 1e-5);

    if (doc.contains("paths")) {
        const auto& paths = doc.at("paths");
        if (paths.contains("results")) {
            cfg.results_path = resolve(base, paths.at("results").get<std::string>());
        }
        if (paths.contains("dataset_info")) {
            cfg.dataset_info_path = resolve(base, paths.at("dataset_info").get<std::string>());
        }
        if (paths.contains("dataset_manifest")) {
            cfg.dataset_manifest_path =
                resolve(base, paths.at("dataset_manifest").get<std::string>());
        }
    }

    cfg.study = load_study_config(text);

    if (doc.contains("metafeatures")) {
        const auto& j = doc.at("metafeatures");
        cfg.metafeatures.high_cardinality_threshold =
            j.value("high_cardinality_threshold", cfg.metafeatures.high_cardinality_threshold);
        cfg.metafeatures.high_corr_threshold =
            j.value("high_corr_threshold", cfg.metafeatures.high_corr_threshold);
        cfg.metafeatures.cor_attr_threshold =
            j.value("cor_attr_threshold", cfg.metafeatures.cor_attr_threshold);
        cfg.metafeatures.pair_cap = j.value("pair_cap", cfg.metafeatures.pair_cap);
        cfg.metafeatures.max_eigen_columns =
            j.value("max_eigen_columns", cfg.metafeatures.max_eigen_columns);
        const std::string rows = j.value("training_rows", std::string("first_split"));
        if (rows == "first_split") {
            cfg.training_rows = TrainingRows::first_split;
        } else if (rows == "union") {
            cfg.training_rows = TrainingRows::union_all;
        } else if (rows == "all") {
            cfg.training_rows = TrainingRows::all_rows;
        } else {
            throw ConfigError("unknown training_rows mode '" + rows + "'");
        }
    }
    cfg.metafeatures.seed = cfg.seed;

    if (doc.contains("preprocess")) {
        const auto& j = doc.at("preprocess");
        cfg.preprocess.missing_threshold =
            j.value("missing_threshold", cfg.preprocess.missing_threshold);
        cfg.preprocess.near_constant_share =
            j.value("near_constant_share", cfg.preprocess.near_constant_share);
        cfg.preprocess.near_constant_variance =
            j.value("near_constant_variance", cfg.preprocess.near_constant_variance);
        cfg.preprocess.dedup_rho = j.value("dedup_rho", cfg.preprocess.dedup_rho);
        cfg.preprocess.dedup_min_overlap =
            j.value("dedup_min_overlap", cfg.preprocess.dedup_min_overlap);
    }

    cfg.screening.bootstrap.n_resamples = 500;
    cfg.screening.bootstrap.seed = cfg.seed;
    if (doc.contains("screening")) {
        const auto& j = doc.at("screening");
        cfg.screening.bootstrap.n_resamples =
            j.value("n_resamples", cfg.screening.bootstrap.n_resamples);
        cfg.screening.bootstrap.ci_level = j.value("ci_level", cfg.screening.bootstrap.ci_level);
        cfg.screening.fdr_level = j.value("fdr_level", cfg.screening.fdr_level);
        cfg.screening.sign_gate = j.value("sign_gate", cfg.screening.sign_gate);
        cfg.screening.min_pairs = j.value("min_pairs", cfg.screening.min_pairs);
    }

    cfg.predictive.n_resamples = 5000;
    cfg.predictive.seed = cfg.seed;
    if (doc.contains("predictive")) {
        const auto& j = doc.at("predictive");
        cfg.predictive.n_resamples = j.value("n_resamples", cfg.predictive.n_resamples);
        cfg.predictive.ci_level = j.value("ci_level", cfg.predictive.ci_level);
    }

    if (doc.contains("predictors")) {
        for (const auto& j : doc.at("predictors")) {
            PredictorSpec spec;
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "knn") {
                spec.kind = PredictorSpec::Kind::knn;
                spec.k = j.value("k", spec.k);
            } else if (kind == "rank_ridge") {
                spec.kind = PredictorSpec::Kind::rank_ridge;
                spec.lambda = j.value("lambda", spec.lambda);
            } else if (kind == "external") {
                spec.kind = PredictorSpec::Kind::external;
                spec.command = j.at("command").get<std::string>();
                spec.timeout_seconds = j.value("timeout_seconds", spec.timeout_seconds);
            } else {
                throw ConfigError("unknown predictor kind '" + kind + "'");
            }
            spec.label = j.value("label", std::string{});
            cfg.predictors.push_back(std::move(spec));
        }
    } else {
        cfg.predictors.push_back(PredictorSpec{});  // knn default
    }

    if (doc.contains("feature_sets")) {
        for (const auto& j : doc.at("feature_sets")) {
            const auto kind = feature_set_kind_from_string(j.get<std::string>());
            if (!kind) throw ConfigError("unknown feature set '" + j.get<std::string>() + "'");
            cfg.feature_sets.push_back(*kind);
        }
    } else {
        cfg.feature_sets = {FeatureSetKind::controls, FeatureSetKind::all,
                            FeatureSetKind::controls_plus_all, FeatureSetKind::robust,
                            FeatureSetKind::controls_plus_robust};
    }
    if (doc.contains("report")) {
        cfg.top_nominal = doc.at("report").value("top_nominal", cfg.top_nominal);
    }
    cfg.verbose_artifacts = doc.value("verbose_artifacts", false);
    return cfg;
}

// ---------------------------------------------------------------------------
// Artifact conversions

Table runs_to_table(const RunStore& store) {
    Table t;
    t.add_string_column("dataset_id");
    t.add_integer_column("repeat");
    t.add_integer_column("fold");
    t.add_string_column("method_id");
    t.add_string_column("subtype");
    t.add_string_column("problem_type");
    t.add_string_column("metric_name");
    t.add_real_column("val_error");
    t.add_real_column("test_error");
    std::size_t r = 0;
    for (const MethodRun& run : store.runs()) {
        t.append_row();
        t.set_string(r, 0, run.dataset_id);
        t.set_integer(r, 1, run.split.repeat);
        t.set_integer(r, 2, run.split.fold);
        t.set_string(r, 3, run.method_id);
        t.set_string(r, 4, to_string(run.subtype));
        t.set_string(r, 5, to_string(run.problem_type));
        t.set_string(r, 6, run.metric_name);
        t.set_real(r, 7, run.val_error);
        t.set_real(r, 8, run.test_error);
        ++r;
    }
    return t;
}

RunStore runs_from_table(const Table& t) {
    std::ostringstream csv;
    t.write_csv(csv);
    std::istringstream in(csv.str());
    return RunStore::ingest(in);
}

Table dataset_info_to_table(std::span<const DatasetInfo> infos) {
    Table t;
    t.add_string_column("dataset_id");
    t.add_integer_column("n_instances");
    t.add_integer_column("n_features");
    t.add_string_column("problem_type");
    t.add_integer_column("n_classes");
    t.add_real_column("pct_categorical");
    std::size_t r = 0;
    for (const DatasetInfo& info : infos) {
        t.append_row();
        t.set_string(r, 0, info.dataset_id);
        t.set_integer(r, 1, info.n_instances);
        t.set_integer(r, 2, info.n_features);
        t.set_string(r, 3, to_string(info.problem_type));
        if (info.n_classes) t.set_integer(r, 4, *info.n_classes);
        t.set_real(r, 5, info.pct_categorical);
        ++r;
    }
    return t;
}

std::vector<DatasetInfo> dataset_info_from_table(const Table& t) {
    std::ostringstream csv;
    t.write_csv(csv);
    std::istringstream in(csv.str());
    return read_dataset_info(in);
}

Table gaps_to_table(std::span<const GapRecord> gaps) {
    Table t;
    t.add_string_column("comparison_id");
    t.add_string_column("dataset_id");
    t.add_real_column("delta");
    t.add_integer_column("n_splits_used");
    std::size_t r = 0;
    for (const GapRecord& g : gaps) {
        t.append_row();
        t.set_string(r, 0, g.comparison_id);
        t.set_string(r, 1, g.dataset_id);
        t.set_real(r, 2, g.delta);
        t.set_integer(r, 3, g.n_splits_used);
        ++r;
    }
    return t;
}

std::vector<GapRecord> gaps_from_table(const Table& t) {
    std::vector<GapRecord> gaps;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        GapRecord g;
        g.comparison_id = t.get_string(r, 0);
        g.dataset_id = t.get_string(r, 1);
        g.delta = t.get_real(r, 2);
        g.n_splits_used = static_cast<int>(t.get_integer(r, 3));
        gaps.push_back(std::move(g));
    }
    return gaps;
}

Table per_split_gaps_to_table(std::span<const GapRecord> gaps) {
    Table t;
    t.add_string_column("comparison_id");
    t.add_string_column("dataset_id");
    t.add_integer_column("repeat");
    t.add_integer_column("fold");
    t.add_real_column("gap");
    std::size_t r = 0;
    for (const GapRecord& g : gaps) {
        for (std::size_t s = 0; s < g.per_split_gaps.size(); ++s) {
            t.append_row();
            t.set_string(r, 0, g.comparison_id);
            t.set_string(r, 1, g.dataset_id);
            t.set_integer(r, 2, g.splits[s].repeat);
            t.set_integer(r, 3, g.splits[s].fold);
            t.set_real(r, 4, g.per_split_gaps[s]);
            ++r;
        }
    }
    return t;
}

Table associations_to_table(std::span<const AssociationResult> results,
                            std::span<const AdjustedResult> adjusted) {
    std::map<std::pair<std::string, std::string>, const AdjustedResult*> adj_of;
    for (const AdjustedResult& a : adjusted) {
        adj_of[{a.comparison_id, a.feature_name}] = &a;
    }
    Table t;
    t.add_string_column("comparison_id");
    t.add_string_column("feature");
    t.add_integer_column("n");
    t.add_real_column("rho");
    t.add_real_column("ci_low");
    t.add_real_column("ci_high");
    t.add_real_column("p");
    t.add_real_column("q_bh");
    t.add_real_column("sign_consistency");
    t.add_integer_column("retained");
    t.add_real_column("adj_coef");
    t.add_real_column("adj_ci_low");
    t.add_real_column("adj_ci_high");
    t.add_real_column("adj_sign_consistency");
    std::size_t r = 0;
    for (const AssociationResult& a : results) {
        t.append_row();
        t.set_string(r, 0, a.comparison_id);
        t.set_string(r, 1, a.feature_name);
        t.set_integer(r, 2, a.n);
        t.set_real(r, 3, a.rho);
        t.set_real(r, 4, a.ci_low);
        t.set_real(r, 5, a.ci_high);
        t.set_real(r, 6, a.p_value);
        t.set_real(r, 7, a.q_bh);
        t.set_real(r, 8, a.sign_consistency);
        t.set_integer(r, 9, a.retained ? 1 : 0);
        const auto it = adj_of.find({a.comparison_id, a.feature_name});
        if (it != adj_of.end() && it->second->computable) {
            t.set_real(r, 10, it->second->adj_coef);
            t.set_real(r, 11, it->second->adj_ci_low);
            t.set_real(r, 12, it->second->adj_ci_high);
            t.set_real(r, 13, it->second->adj_sign_consistency);
        }
        ++r;
    }
    return t;
}

Table predictive_to_table(std::span<const PredictiveResult> results) {
    Table t;
    t.add_string_column("comparison_id");
    t.add_string_column("predictor");
    t.add_string_column("feature_set");
    t.add_integer_column("n");
    t.add_integer_column("n_pred");
    t.add_real_column("mae");
    t.add_real_column("mae_lo");
    t.add_real_column("mae_hi");
    t.add_real_column("sign_acc");
    t.add_real_column("sign_lo");
    t.add_real_column("sign_hi");
    std::size_t r = 0;
    for (const PredictiveResult& p : results) {
        t.append_row();
        t.set_string(r, 0, p.comparison_id);
        t.set_string(r, 1, p.predictor);
        t.set_string(r, 2, p.feature_set);
        t.set_integer(r, 3, p.n);
        t.set_integer(r, 4, p.n_pred);
        t.set_real(r, 5, p.mae);
        t.set_real(r, 6, p.mae_lo);
        t.set_real(r, 7, p.mae_hi);
        t.set_real(r, 8, p.sign_accuracy);
        t.set_real(r, 9, p.sign_lo);
        t.set_real(r, 10, p.sign_hi);
        ++r;
    }
    return t;
}

Table predictions_to_table(std::span<const PredictiveResult> results) {
    Table t;
    t.add_string_column("comparison_id");
    t.add_string_column("predictor");
    t.add_string_column("feature_set");
    t.add_string_column("dataset_id");
    t.add_real_column("true_gap");
    t.add_real_column("predicted_gap");
    std::size_t r = 0;
    for (const PredictiveResult& p : results) {
        for (const PredictionRow& row : p.per_dataset) {
            t.append_row();
            t.set_string(r, 0, p.comparison_id);
            t.set_string(r, 1, p.predictor);
            t.set_string(r, 2, p.feature_set);
            t.set_string(r, 3, row.dataset_id);
            t.set_real(r, 4, row.true_gap);
            t.set_real(r, 5, row.predicted_gap);
            ++r;
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

void require_artifact(const ArtifactStore& store, const std::string& name,
                      const std::string& producing_command) {
    if (!store.has(name)) {
        throw ConfigError("artifact '" + name + "' is missing; run `tabgap " + producing_command +
                          "` first");
    }
}

void stage_ingest(const StudyConfig& cfg, ArtifactStore& store) {
    if (cfg.results_path.empty()) throw ConfigError("config paths.results is required for ingest");
    if (cfg.dataset_info_path.empty()) {
        throw ConfigError("config paths.dataset_info is required for ingest");
    }
    std::ifstream results(cfg.results_path);
    if (!results) throw IoError("cannot open " + cfg.results_path.string());
    const RunStore runs = RunStore::ingest(results);
    store.persist("runs", runs_to_table(runs));

    std::ifstream info_in(cfg.dataset_info_path);
    if (!info_in) throw IoError("cannot open " + cfg.dataset_info_path.string());
    const auto infos = read_dataset_info(info_in);
    store.persist("dataset-info", dataset_info_to_table(infos));
}

void stage_gaps(const StudyConfig& cfg, ArtifactStore& store, bool verbose,
                std::vector<std::string>* log) {
    require_artifact(store, "runs", "ingest");
    require_artifact(store, "dataset-info", "ingest");
    const RunStore runs = runs_from_table(store.load("runs"));
    const auto infos = dataset_info_from_table(store.load("dataset-info"));

    if (log) {
        std::set<std::string> methods_in_store;
        for (const MethodRun& r : runs.runs()) methods_in_store.insert(r.method_id);
        for (const FamilySpec& fam : cfg.study.families) {
            for (const FamilyMember& m : fam.members) {
                if (!methods_in_store.count(m.method_id)) {
                    log->push_back("family '" + fam.family_id + "' references method '" +
                                   m.method_id + "' which never appears in the run store");
                }
            }
        }
    }

    GapOptions options;
    options.epsilon = cfg.epsilon;
    std::vector<GapRecord> all_gaps;
    for (const ComparisonSpec& cmp : cfg.study.comparisons) {
        const auto gaps = compute_gaps(cmp, cfg.study.family(cmp.family_a),
                                       cfg.study.family(cmp.family_b), runs, infos, options, log);
        all_gaps.insert(all_gaps.end(), gaps.begin(), gaps.end());
    }
    store.persist("gaps", gaps_to_table(all_gaps));
    if (cfg.verbose_artifacts || verbose) {
        store.persist("gaps-per-split", per_split_gaps_to_table(all_gaps));
    }
}

void stage_metafeatures(const StudyConfig& cfg, ArtifactStore& store, int jobs,
                        std::vector<std::string>* log) {
    if (cfg.dataset_manifest_path.empty()) {
        throw ConfigError("config paths.dataset_manifest is required for metafeatures");
    }
    const auto entries = load_dataset_manifest(cfg.dataset_manifest_path);
    if (entries.empty()) throw ConfigError("dataset manifest lists no datasets");

    std::vector<RawDatasetTable> tables(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        tables[i] = load_raw_table(entries[i], cfg.training_rows);
    });
    const MetaFeatureMatrix matrix = build_matrix(tables, cfg.metafeatures, jobs, log);
    store.persist("metafeatures", matrix.to_table());
    store.persist("feature-groups", matrix.groups_table());
}

void stage_preprocess(const StudyConfig& cfg, ArtifactStore& store) {
    require_artifact(store, "metafeatures", "metafeatures");
    require_artifact(store, "feature-groups", "metafeatures");
    const MetaFeatureMatrix matrix =
        MetaFeatureMatrix::from_table(store.load("metafeatures"), store.load("feature-groups"));
    auto [clean, drops] = preprocess_matrix(matrix, cfg.preprocess);
    store.persist("metafeatures-clean", clean.to_table());
    store.persist("feature-groups-clean", clean.groups_table());
    store.persist("droplog", drop_log_table(drops));
}

ScreenOptions screening_options(const StudyConfig& cfg, int jobs) {
    ScreenOptions opts = cfg.screening;
    opts.bootstrap.seed = cfg.seed;
    opts.jobs = jobs;
    return opts;
}

void stage_screen(const StudyConfig& cfg, ArtifactStore& store, int jobs,
                  std::vector<std::string>* log) {
    require_artifact(store, "metafeatures-clean", "preprocess");
    require_artifact(store, "gaps", "gaps");
    const MetaFeatureMatrix matrix = MetaFeatureMatrix::from_table(
        store.load("metafeatures-clean"), store.load("feature-groups-clean"));
    const auto all_gaps = gaps_from_table(store.load("gaps"));

    std::vector<AssociationResult> results;
    for (const ComparisonSpec& cmp : cfg.study.comparisons) {
        std::vector<GapRecord> gaps;
        for (const GapRecord& g : all_gaps) {
            if (g.comparison_id == cmp.comparison_id) gaps.push_back(g);
        }
        if (gaps.size() < 4) {
            if (log) {
                log->push_back("[" + cmp.comparison_id + "] screening skipped: only " +
                               std::to_string(gaps.size()) + " datasets with gaps");
            }
            continue;
        }
        const auto screened =
            screen_features(matrix, gaps, cmp.comparison_id, screening_options(cfg, jobs), log);
        results.insert(results.end(), screened.begin(), screened.end());
    }
    store.persist("associations", associations_to_table(results, {}));
}

void stage_adjust(const StudyConfig& cfg, ArtifactStore& store, int jobs,
                  std::vector<std::string>* log) {
    require_artifact(store, "associations", "screen");
    require_artifact(store, "metafeatures-clean", "preprocess");
    require_artifact(store, "gaps", "gaps");
    const MetaFeatureMatrix matrix = MetaFeatureMatrix::from_table(
        store.load("metafeatures-clean"), store.load("feature-groups-clean"));
    const auto all_gaps = gaps_from_table(store.load("gaps"));
    const Table assoc = store.load("associations");

    // reconstruct the screening rows, then fill the adjusted columns
    std::vector<AssociationResult> results;
    for (std::size_t r = 0; r < assoc.n_rows(); ++r) {
        AssociationResult a;
        a.comparison_id = assoc.get_string(r, 0);
        a.feature_name = assoc.get_string(r, 1);
        a.n = static_cast<int>(assoc.get_integer(r, 2));
        a.rho = assoc.get_real(r, 3);
        a.ci_low = assoc.get_real(r, 4);
        a.ci_high = assoc.get_real(r, 5);
        a.p_value = assoc.get_real(r, 6);
        a.q_bh = assoc.get_real(r, 7);
        a.sign_consistency = assoc.get_real(r, 8);
        a.retained = assoc.get_integer(r, 9) != 0;
        results.push_back(std::move(a));
    }

    std::vector<AdjustedResult> adjusted;
    for (const AssociationResult& a : results) {
        if (!a.retained) continue;
        std::vector<GapRecord> gaps;
        for (const GapRecord& g : all_gaps) {
            if (g.comparison_id == a.comparison_id) gaps.push_back(g);
        }
        const auto adj = covariate_adjust(matrix, gaps, a.comparison_id, a.feature_name, a.rho,
                                          cfg.study.controls, screening_options(cfg, jobs));
        if (!adj.computable && log) {
            log->push_back("[" + a.comparison_id + "] adjustment for '" + a.feature_name +
                           "' not computable: " + adj.note);
        }
        adjusted.push_back(adj);
    }
    store.persist("associations", associations_to_table(results, adjusted));
}

void stage_route_eval(const StudyConfig& cfg, ArtifactStore& store, int jobs,
                      std::vector<std::string>* log) {
    require_artifact(store, "metafeatures-clean", "preprocess");
    require_artifact(store, "gaps", "gaps");
    const bool robust_requested =
        std::any_of(cfg.feature_sets.begin(), cfg.feature_sets.end(), [](FeatureSetKind k) {
            return k == FeatureSetKind::robust || k == FeatureSetKind::controls_plus_robust;
        });
    if (robust_requested) require_artifact(store, "associations", "screen");

    const MetaFeatureMatrix matrix = MetaFeatureMatrix::from_table(
        store.load("metafeatures-clean"), store.load("feature-groups-clean"));
    const auto all_gaps = gaps_from_table(store.load("gaps"));

    std::map<std::string, std::vector<std::string>> retained_of;
    if (robust_requested) {
        const Table assoc = store.load("associations");
        for (std::size_t r = 0; r < assoc.n_rows(); ++r) {
            if (assoc.get_integer(r, 9) != 0) {
                retained_of[assoc.get_string(r, 0)].push_back(assoc.get_string(r, 1));
            }
        }
    }

    BootstrapConfig predictive = cfg.predictive;
    predictive.seed = cfg.seed;

    std::vector<PredictiveResult> results;
    for (const ComparisonSpec& cmp : cfg.study.comparisons) {
        std::vector<GapRecord> gaps;
        for (const GapRecord& g : all_gaps) {
            if (g.comparison_id == cmp.comparison_id) gaps.push_back(g);
        }
        if (gaps.size() < 2) {
            if (log) {
                log->push_back("[" + cmp.comparison_id + "] route-eval skipped: fewer than 2 gaps");
            }
            continue;
        }
        const auto& retained = retained_of[cmp.comparison_id];
        const auto sets = resolve_feature_sets(matrix, cfg.study.controls, retained,
                                               cfg.feature_sets, log);
        const auto evaluated = evaluate_lodo(cmp.comparison_id, matrix, gaps, sets,
                                             cfg.predictors, predictive, jobs, log);
        results.insert(results.end(), evaluated.begin(), evaluated.end());
    }
    store.persist("predictive", predictive_to_table(results));
    store.persist("predictions", predictions_to_table(results));
}

}  // namespace

void run_pipeline(const StudyConfig& config, const std::vector<Stage>& stages,
                  const PipelineOptions& options, std::vector<std::string>* log) {
    const std::set<Stage> requested(stages.begin(), stages.end());
    ArtifactStore store(config.out_dir);
    for (Stage stage : all_stages()) {
        if (!requested.count(stage)) continue;
        switch (stage) {
            case Stage::ingest: stage_ingest(config, store); break;
            case Stage::gaps: stage_gaps(config, store, options.verbose, log); break;
            case Stage::metafeatures: stage_metafeatures(config, store, options.jobs, log); break;
            case Stage::preprocess: stage_preprocess(config, store); break;
            case Stage::screen: stage_screen(config, store, options.jobs, log); break;
            case Stage::adjust: stage_adjust(config, store, options.jobs, log); break;
            case Stage::route_eval: stage_route_eval(config, store, options.jobs, log); break;
            case Stage::report: emit_report(store, ReportOptions{config.top_nominal}, log); break;
        }
    }
}

}  // namespace tabgap
