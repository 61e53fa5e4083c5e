// Command-line front end for the mmg library: manifest-driven preprocessing,
// per-modality training and prediction, fusion, weight search, evaluation,
// and a synthetic data generator so the whole pipeline runs without any
// external assets.
//
// Exit codes: 0 success, 1 usage or config error, 2 some samples failed
// during preprocessing, 3 fatal I/O (unreadable or corrupt files).

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <mmg/mmg.hpp>

namespace fs = std::filesystem;

namespace {

unsigned default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

void log_line(const std::string& msg) { std::cerr << "[mmg] " << msg << "\n"; }

std::string percent3(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", fraction * 100.0);
    return buf;
}

std::string hash_hex(const nlohmann::json& j) {
    const std::string s = j.dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(mmg::fnv1a64(s.data(), s.size())));
    return buf;
}

// Paths on the command line resolve against --root when given, otherwise the
// working directory; paths inside a manifest resolve against --root when
// given, otherwise the manifest's own directory.
struct PathCtx {
    fs::path root;
    fs::path manifest_dir;

    fs::path cli(const fs::path& p) const {
        return (p.is_absolute() || root.empty()) ? p : root / p;
    }
    fs::path data(const fs::path& p) const {
        if (p.is_absolute()) return p;
        return (root.empty() ? manifest_dir : root) / p;
    }
};

struct SampleResult {
    bool ok = false;
    std::string file;
    std::size_t frames = 0;
    std::string error;
};

void parallel_samples(std::size_t n, unsigned workers,
                      const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

int write_index_and_report(const mmg::DatasetManifest& manifest,
                           const std::vector<SampleResult>& results, const std::string& kind,
                           const std::string& params_hash, const fs::path& out_dir) {
    nlohmann::json produced = nlohmann::json::array();
    nlohmann::json failed = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (r.ok) {
            nlohmann::json e;
            e["id"] = manifest.entries[i].id;
            e["file"] = r.file;
            e["frames"] = r.frames;
            produced.push_back(std::move(e));
        } else {
            nlohmann::json e;
            e["id"] = manifest.entries[i].id;
            e["error"] = r.error;
            failed.push_back(std::move(e));
        }
    }
    nlohmann::json index;
    index["kind"] = kind;
    index["params_hash"] = params_hash;
    index["produced"] = std::move(produced);
    index["failed"] = std::move(failed);
    mmg::atomic_write_text(out_dir / "index.json", index.dump(2) + "\n");
    const std::size_t bad = index["failed"].size();
    log_line(kind + ": " + std::to_string(results.size() - bad) + " volumes written, " +
             std::to_string(bad) + " failed");
    return bad == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// Preprocessing stages

int do_preprocess_heatmaps(const mmg::DatasetManifest& manifest, const mmg::RunConfig& cfg,
                           const PathCtx& paths, const std::string& kind, const fs::path& out_dir,
                           unsigned workers) {
    const mmg::KeypointSubset subset{cfg.heatmap.subset};
    const mmg::EdgeList edges{cfg.heatmap.edges};
    const mmg::HeatmapParams hp = cfg.heatmap_params();
    fs::create_directories(out_dir);
    std::vector<SampleResult> results(manifest.entries.size());
    parallel_samples(manifest.entries.size(), workers, [&](std::size_t i) {
        const mmg::SampleEntry& e = manifest.entries[i];
        try {
            const auto it = e.modality_paths.find("skeleton");
            if (it == e.modality_paths.end())
                throw mmg::ValidationError("no skeleton path in manifest");
            mmg::SkeletonSequence raw =
                mmg::load_skeleton(paths.data(it->second), mmg::kRawKeypointCount);
            mmg::SkeletonSequence sub = mmg::select_subset(raw, subset);
            mmg::CropBox box = mmg::keypoint_bbox(sub, cfg.heatmap.crop_pad);
            if (cfg.heatmap.crop_jitter > 0.0) {
                mmg::SplitMix64 rng = mmg::substream(cfg.heatmap.crop_seed, i);
                box = mmg::sample_crop_box(box, cfg.heatmap.crop_jitter, rng);
            }
            const mmg::SkeletonSequence mapped =
                mmg::transform_coords(sub, box, hp.out_h, hp.out_w);
            const mmg::HeatmapVolume vol = kind == "joint"
                                               ? mmg::joint_heatmap_volume(mapped, hp)
                                               : mmg::limb_heatmap_volume(mapped, edges, hp);
            const std::string file = e.id + "." + kind + ".rvid";
            mmg::save_rvid(vol.data, out_dir / file);
            results[i] = {true, file, vol.data.frames, {}};
        } catch (const std::exception& ex) {
            results[i] = {false, {}, 0, ex.what()};
        }
    });
    nlohmann::json params = mmg::config_json(cfg)["heatmap"];
    params["kind"] = kind;
    return write_index_and_report(manifest, results, kind, hash_hex(params), out_dir);
}

int do_preprocess_taylor(const mmg::DatasetManifest& manifest, const mmg::RunConfig& cfg,
                         const PathCtx& paths, const fs::path& out_dir, unsigned workers) {
    const mmg::TaylorParams tp = cfg.taylor_params();
    fs::create_directories(out_dir);
    std::vector<SampleResult> results(manifest.entries.size());
    parallel_samples(manifest.entries.size(), workers, [&](std::size_t i) {
        const mmg::SampleEntry& e = manifest.entries[i];
        try {
            const auto it = e.modality_paths.find("rgb");
            if (it == e.modality_paths.end())
                throw mmg::ValidationError("no rgb path in manifest");
            const mmg::VideoTensor video = mmg::load_video(paths.data(it->second));
            const mmg::VideoTensor out = mmg::taylor_video(video, tp);
            const std::string file = e.id + ".taylor.rvid";
            mmg::save_rvid(out, out_dir / file);
            results[i] = {true, file, out.frames, {}};
        } catch (const std::exception& ex) {
            results[i] = {false, {}, 0, ex.what()};
        }
    });
    nlohmann::json params = mmg::config_json(cfg)["taylor"];
    return write_index_and_report(manifest, results, "taylor", hash_hex(params), out_dir);
}

// ---------------------------------------------------------------------------
// Feature assembly, training, prediction

mmg::FeatureMatrix features_for_split(const mmg::DatasetManifest& manifest,
                                      const std::string& split, const std::string& modality,
                                      const std::optional<fs::path>& features_dir,
                                      const PathCtx& paths) {
    const auto entries = manifest.split(split);
    if (entries.empty()) throw mmg::ValidationError("split \"" + split + "\" has no samples");
    mmg::FeatureMatrix fm;
    for (const mmg::SampleEntry* e : entries) {
        fs::path file;
        if (features_dir) {
            file = *features_dir / (e->id + "." + modality + ".rvid");
        } else {
            const auto it = e->modality_paths.find(modality);
            if (it == e->modality_paths.end())
                throw mmg::ValidationError("sample " + e->id + " has no \"" + modality +
                                           "\" path and no --features directory was given");
            file = paths.data(it->second);
        }
        const mmg::VideoTensor vol =
            fs::is_directory(file) ? mmg::load_video(file) : mmg::load_rvid(file);
        fm.push_row(mmg::pool_features(vol), e->id);
    }
    return fm;
}

std::vector<std::size_t> labels_for_split(const mmg::DatasetManifest& manifest,
                                          const std::string& split) {
    std::vector<std::size_t> y;
    for (const mmg::SampleEntry* e : manifest.split(split)) y.push_back(e->label);
    return y;
}

nlohmann::json train_report_json(const mmg::TrainReport& r) {
    nlohmann::json j;
    j["loss_trace"] = r.loss_trace;
    j["final_train_accuracy"] = r.final_train_accuracy;
    j["iterations"] = r.iterations;
    j["seed"] = r.seed;
    return j;
}

mmg::LinearModel do_train(const mmg::DatasetManifest& manifest, const mmg::RunConfig& cfg,
                          const PathCtx& paths, const std::string& modality,
                          const std::optional<fs::path>& features_dir, const std::string& split,
                          const std::optional<fs::path>& warm_start_path,
                          const fs::path& model_path, const std::optional<fs::path>& report_path) {
    mmg::FeatureMatrix fm = features_for_split(manifest, split, modality, features_dir, paths);
    mmg::TrainConfig tc;
    tc.class_count = manifest.class_count;
    tc.learning_rate = cfg.classifier.learning_rate;
    tc.iterations = cfg.classifier.iterations;
    tc.l2 = cfg.classifier.l2;
    tc.seed = cfg.classifier.seed;
    if (warm_start_path) tc.warm_start = mmg::load_model(*warm_start_path);
    auto [model, report] = mmg::train(fm, labels_for_split(manifest, split), tc);
    mmg::save_model(model, model_path);
    const fs::path rp = report_path ? *report_path : fs::path(model_path.string() + ".report.json");
    mmg::atomic_write_text(rp, train_report_json(report).dump(2) + "\n");
    log_line("train " + modality + ": final loss " +
             std::to_string(report.loss_trace.back()) + ", train accuracy " +
             percent3(report.final_train_accuracy));
    return model;
}

void do_predict(const mmg::DatasetManifest& manifest, const PathCtx& paths,
                const std::string& modality, const std::optional<fs::path>& features_dir,
                const std::string& split, const mmg::LinearModel& model, const fs::path& out) {
    mmg::FeatureMatrix fm = features_for_split(manifest, split, modality, features_dir, paths);
    mmg::save_probs(mmg::predict_probs(model, fm), out);
    log_line("predict " + modality + "/" + split + " -> " + out.string());
}

// ---------------------------------------------------------------------------
// Fusion-side helpers

// "--probs name=path" or bare path whose filename stem up to the first dot
// names the modality (joint.val.csv -> joint).
std::vector<std::pair<std::string, fs::path>> parse_probs_args(
    const std::vector<std::string>& specs, const PathCtx& paths) {
    std::vector<std::pair<std::string, fs::path>> out;
    for (const std::string& s : specs) {
        const std::size_t eq = s.find('=');
        std::string name;
        fs::path path;
        if (eq != std::string::npos && eq > 0) {
            name = s.substr(0, eq);
            path = s.substr(eq + 1);
        } else {
            path = s;
            std::string base = path.filename().string();
            name = base.substr(0, base.find('.'));
        }
        if (name.empty()) throw mmg::ValidationError("cannot derive a modality name from: " + s);
        out.emplace_back(name, paths.cli(path));
    }
    return out;
}

std::vector<std::pair<std::string, mmg::ProbabilityMatrix>> load_probs_set(
    const std::vector<std::pair<std::string, fs::path>>& named) {
    std::vector<std::pair<std::string, mmg::ProbabilityMatrix>> out;
    out.reserve(named.size());
    for (const auto& [name, path] : named) out.emplace_back(name, mmg::load_probs(path));
    return out;
}

void print_report(const mmg::EvalReport& r) {
    std::cout << percent3(r.top1) << "\n";
    std::cout << "top-1 " << percent3(r.top1) << "% on " << r.n << " samples\n";
    std::cout << "class support correct accuracy\n";
    for (std::size_t c = 0; c < r.class_count; ++c) {
        std::size_t support = 0;
        for (std::size_t j = 0; j < r.class_count; ++j)
            support += r.confusion[c * r.class_count + j];
        std::cout << c << " " << support << " " << r.confusion[c * r.class_count + c] << " "
                  << percent3(r.per_class[c]) << "\n";
    }
}

mmg::SearchConfig search_config(const mmg::RunConfig& cfg) {
    mmg::SearchConfig sc;
    sc.mode = cfg.fusion.mode;
    sc.step = cfg.fusion.step;
    sc.coarse_step = cfg.fusion.coarse_step;
    sc.refine_step = cfg.fusion.refine_step;
    sc.refine_radius = cfg.fusion.refine_radius;
    sc.max_grid_points = cfg.fusion.max_grid_points;
    return sc;
}

// ---------------------------------------------------------------------------
// The pipeline command: everything above in sequence on one manifest.

int do_pipeline(const mmg::DatasetManifest& manifest, const mmg::RunConfig& cfg,
                const PathCtx& paths, const fs::path& out_dir, unsigned workers) {
    const std::vector<std::string> modalities = {"joint", "limb", "taylor"};
    const fs::path heat_dir = out_dir / "heatmaps";
    const fs::path taylor_dir = out_dir / "taylor";

    for (const std::string& kind : {std::string("joint"), std::string("limb")}) {
        log_line("stage preprocess-" + kind);
        if (do_preprocess_heatmaps(manifest, cfg, paths, kind, heat_dir, workers) != 0)
            return 2;
    }
    log_line("stage preprocess-taylor");
    if (do_preprocess_taylor(manifest, cfg, paths, taylor_dir, workers) != 0) return 2;

    const auto labels = manifest.label_index();
    std::vector<std::pair<std::string, mmg::ProbabilityMatrix>> val_preds, test_preds;
    for (const std::string& m : modalities) {
        log_line("stage train/" + m);
        const std::optional<fs::path> feat_dir = (m == "taylor") ? taylor_dir : heat_dir;
        const mmg::LinearModel model =
            do_train(manifest, cfg, paths, m, feat_dir, "train", std::nullopt,
                     out_dir / "models" / (m + ".json"), std::nullopt);
        for (const std::string& split : {std::string("val"), std::string("test")}) {
            const fs::path probs_path = out_dir / "probs" / (m + "." + split + ".csv");
            do_predict(manifest, paths, m, feat_dir, split, model, probs_path);
            auto& bucket = split == "val" ? val_preds : test_preds;
            bucket.emplace_back(m, mmg::load_probs(probs_path));
        }
    }

    log_line("stage search-weights");
    const mmg::AlignedPredictions val = mmg::align(val_preds, &labels);
    auto [weights, val_report] = mmg::search_weights(val, search_config(cfg));
    mmg::save_weights(weights, out_dir / "fusion" / "weights.json");
    mmg::save_report(val_report, out_dir / "fusion" / "val_report.json");
    log_line("val fused top-1 " + percent3(val_report.top1));

    log_line("stage fuse/evaluate test");
    const mmg::AlignedPredictions test = mmg::align(test_preds, &labels);
    const mmg::ProbabilityMatrix fused = mmg::weighted_fuse(test, weights);
    mmg::save_probs(fused, out_dir / "fusion" / "test.fused.csv");
    const mmg::EvalReport fused_report = mmg::evaluate_top1(fused, *test.labels);
    mmg::save_report(fused_report, out_dir / "reports" / "fused.test.json");
    for (const std::string& m : modalities) {
        const mmg::ProbabilityMatrix single =
            mmg::average_fuse(test, std::vector<std::string>{m});
        const mmg::EvalReport r = mmg::evaluate_top1(single, *test.labels);
        mmg::save_report(r, out_dir / "reports" / (m + ".test.json"));
        std::cout << m << " " << percent3(r.top1) << "\n";
    }
    std::cout << "fused " << percent3(fused_report.top1) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal micro-gesture recognition pipeline"};
    app.require_subcommand(1);

    std::string root_arg;
    app.add_option("--root", root_arg, "base directory for relative paths")->group("Global");

    // shared option storage; each subcommand binds the subset it uses
    std::string manifest_arg, config_arg, kind_arg, modality_arg, split_arg = "train";
    std::string features_arg, model_arg, out_arg, report_arg, weights_arg, warm_arg;
    std::vector<std::string> probs_args;
    bool uniform_flag = false;
    unsigned workers = default_workers();
    std::string synth_out;
    std::size_t synth_samples = 60, synth_classes = 4, synth_modalities = 3;
    std::uint64_t synth_seed = 42;
    std::vector<double> synth_accuracy;
    double synth_rho = 0.0;

    auto* pre_h = app.add_subcommand("preprocess-heatmaps",
                                     "render joint or limb heatmap volumes for every sample");
    pre_h->add_option("--manifest", manifest_arg)->required();
    pre_h->add_option("--config", config_arg);
    pre_h->add_option("--kind", kind_arg)->required()->check(CLI::IsMember({"joint", "limb"}));
    pre_h->add_option("--out-dir", out_arg)->required();
    pre_h->add_option("--workers", workers);

    auto* pre_t = app.add_subcommand("preprocess-taylor",
                                     "compute taylor expansion videos for every sample");
    pre_t->add_option("--manifest", manifest_arg)->required();
    pre_t->add_option("--config", config_arg);
    pre_t->add_option("--out-dir", out_arg)->required();
    pre_t->add_option("--workers", workers);

    auto* train_cmd = app.add_subcommand("train", "fit the linear classifier for one modality");
    train_cmd->add_option("--manifest", manifest_arg)->required();
    train_cmd->add_option("--config", config_arg);
    train_cmd->add_option("--modality", modality_arg)->required();
    train_cmd->add_option("--features", features_arg,
                          "directory of <id>.<modality>.rvid volumes");
    train_cmd->add_option("--model", model_arg, "output model path")->required();
    train_cmd->add_option("--split", split_arg);
    train_cmd->add_option("--warm-start", warm_arg, "initialize from this model");
    train_cmd->add_option("--report", report_arg);

    auto* predict_cmd = app.add_subcommand("predict", "write class probabilities for a split");
    predict_cmd->add_option("--manifest", manifest_arg)->required();
    predict_cmd->add_option("--modality", modality_arg)->required();
    predict_cmd->add_option("--features", features_arg);
    predict_cmd->add_option("--model", model_arg)->required();
    predict_cmd->add_option("--split", split_arg)->required();
    predict_cmd->add_option("--out", out_arg)->required();

    auto* fuse_cmd = app.add_subcommand("fuse", "combine probability files into one");
    fuse_cmd->add_option("--probs", probs_args, "name=path or path per modality")->required();
    auto* fw = fuse_cmd->add_option("--weights", weights_arg, "fusion weights json");
    auto* fu = fuse_cmd->add_flag("--uniform", uniform_flag, "average fusion");
    fw->excludes(fu);
    fuse_cmd->add_option("--out", out_arg)->required();

    auto* search_cmd =
        app.add_subcommand("search-weights", "grid-search fusion weights on labeled data");
    search_cmd->add_option("--probs", probs_args)->required();
    search_cmd->add_option("--manifest", manifest_arg, "labels source")->required();
    search_cmd->add_option("--config", config_arg);
    search_cmd->add_option("--weights-out", weights_arg)->required();
    search_cmd->add_option("--report", report_arg);

    auto* eval_cmd = app.add_subcommand("evaluate", "top-1 accuracy of a probability file");
    eval_cmd->add_option("--probs", probs_args)->required()->expected(1);
    eval_cmd->add_option("--manifest", manifest_arg, "labels source")->required();
    eval_cmd->add_option("--report", report_arg);

    auto* pipe_cmd = app.add_subcommand("pipeline", "preprocess, train, fuse and evaluate");
    pipe_cmd->add_option("--manifest", manifest_arg)->required();
    pipe_cmd->add_option("--config", config_arg);
    pipe_cmd->add_option("--out-dir", out_arg)->required();
    pipe_cmd->add_option("--workers", workers);

    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic inputs");
    synth_cmd->require_subcommand(1);
    auto* synth_data = synth_cmd->add_subcommand("dataset", "toy videos+skeletons+manifest");
    synth_data->add_option("--out-dir", synth_out)->required();
    synth_data->add_option("--samples", synth_samples);
    synth_data->add_option("--classes", synth_classes);
    synth_data->add_option("--seed", synth_seed);
    auto* synth_preds = synth_cmd->add_subcommand("preds", "correlated predictor ensemble");
    synth_preds->add_option("--out-dir", synth_out)->required();
    synth_preds->add_option("--samples", synth_samples);
    synth_preds->add_option("--classes", synth_classes);
    synth_preds->add_option("--modalities", synth_modalities);
    synth_preds->add_option("--accuracy", synth_accuracy, "per-modality targets");
    synth_preds->add_option("--rho", synth_rho, "uniform off-diagonal error overlap");
    synth_preds->add_option("--seed", synth_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        PathCtx paths;
        paths.root = root_arg;

        auto load_ctx = [&](bool need_manifest) -> mmg::DatasetManifest {
            mmg::DatasetManifest m;
            if (need_manifest) {
                const fs::path mp = paths.cli(manifest_arg);
                paths.manifest_dir = mp.parent_path();
                m = mmg::load_manifest(mp);
            }
            return m;
        };
        auto load_cfg = [&]() -> mmg::RunConfig {
            mmg::RunConfig c;
            if (!config_arg.empty()) c = mmg::load_run_config(paths.cli(config_arg));
            c.validate();
            return c;
        };

        if (pre_h->parsed()) {
            const auto manifest = load_ctx(true);
            return do_preprocess_heatmaps(manifest, load_cfg(), paths, kind_arg,
                                          paths.cli(out_arg), workers);
        }
        if (pre_t->parsed()) {
            const auto manifest = load_ctx(true);
            return do_preprocess_taylor(manifest, load_cfg(), paths, paths.cli(out_arg),
                                        workers);
        }
        if (train_cmd->parsed()) {
            const auto manifest = load_ctx(true);
            std::optional<fs::path> feat_dir;
            if (!features_arg.empty()) feat_dir = paths.cli(features_arg);
            std::optional<fs::path> warm;
            if (!warm_arg.empty()) warm = paths.cli(warm_arg);
            std::optional<fs::path> report;
            if (!report_arg.empty()) report = paths.cli(report_arg);
            do_train(manifest, load_cfg(), paths, modality_arg, feat_dir, split_arg, warm,
                     paths.cli(model_arg), report);
            return 0;
        }
        if (predict_cmd->parsed()) {
            const auto manifest = load_ctx(true);
            std::optional<fs::path> feat_dir;
            if (!features_arg.empty()) feat_dir = paths.cli(features_arg);
            do_predict(manifest, paths, modality_arg, feat_dir, split_arg,
                       mmg::load_model(paths.cli(model_arg)), paths.cli(out_arg));
            return 0;
        }
        if (fuse_cmd->parsed()) {
            if (weights_arg.empty() && !uniform_flag)
                throw mmg::ValidationError("fuse needs --weights or --uniform");
            const auto preds = load_probs_set(parse_probs_args(probs_args, paths));
            const mmg::AlignedPredictions aligned = mmg::align(preds);
            if (!aligned.dropped_ids.empty())
                log_line("dropped " + std::to_string(aligned.dropped_ids.size()) +
                         " samples missing from some modality");
            mmg::ProbabilityMatrix fused;
            if (uniform_flag) {
                fused = mmg::average_fuse(aligned, aligned.modality_names);
            } else {
                fused = mmg::weighted_fuse(aligned, mmg::load_weights(paths.cli(weights_arg)));
            }
            mmg::save_probs(fused, paths.cli(out_arg));
            log_line("fused " + std::to_string(fused.rows()) + " rows -> " + out_arg);
            return 0;
        }
        if (search_cmd->parsed()) {
            const auto manifest = load_ctx(true);
            const auto cfg = load_cfg();
            const auto labels = manifest.label_index();
            const auto preds = load_probs_set(parse_probs_args(probs_args, paths));
            const mmg::AlignedPredictions aligned = mmg::align(preds, &labels);
            if (!aligned.dropped_ids.empty())
                log_line("dropped " + std::to_string(aligned.dropped_ids.size()) +
                         " samples missing from some modality");
            auto [weights, report] = mmg::search_weights(aligned, search_config(cfg));
            mmg::save_weights(weights, paths.cli(weights_arg));
            if (!report_arg.empty()) mmg::save_report(report, paths.cli(report_arg));
            log_line("best validation top-1 " + percent3(report.top1));
            return 0;
        }
        if (eval_cmd->parsed()) {
            const auto manifest = load_ctx(true);
            const auto label_map = manifest.label_index();
            const mmg::ProbabilityMatrix p =
                mmg::load_probs(parse_probs_args(probs_args, paths).front().second);
            std::vector<std::size_t> y;
            y.reserve(p.rows());
            for (const auto& id : p.sample_ids) {
                const auto it = label_map.find(id);
                if (it == label_map.end())
                    throw mmg::ValidationError("sample " + id + " has no label in the manifest");
                y.push_back(it->second);
            }
            const mmg::EvalReport r = mmg::evaluate_top1(p, y);
            if (!report_arg.empty()) mmg::save_report(r, paths.cli(report_arg));
            print_report(r);
            return 0;
        }
        if (pipe_cmd->parsed()) {
            const auto manifest = load_ctx(true);
            return do_pipeline(manifest, load_cfg(), paths, paths.cli(out_arg), workers);
        }
        if (synth_data->parsed()) {
            mmg::SyntheticDatasetParams p;
            p.samples = synth_samples;
            p.classes = synth_classes;
            p.seed = synth_seed;
            mmg::write_synthetic_dataset(paths.cli(synth_out), p);
            log_line("wrote synthetic dataset under " + synth_out);
            return 0;
        }
        if (synth_preds->parsed()) {
            mmg::SyntheticSpec spec;
            spec.samples = synth_samples;
            spec.classes = synth_classes;
            spec.seed = synth_seed;
            spec.accuracy = synth_accuracy.empty()
                                ? std::vector<double>(synth_modalities, 0.65)
                                : synth_accuracy;
            const std::size_t m = spec.accuracy.size();
            spec.overlap.assign(m * m, synth_rho);
            for (std::size_t i = 0; i < m; ++i) spec.overlap[i * m + i] = 1.0;
            const mmg::AlignedPredictions preds = mmg::gen_predictions(spec);
            const fs::path dir = paths.cli(synth_out);
            mmg::DatasetManifest manifest;
            manifest.class_count = spec.classes;
            for (std::size_t i = 0; i < preds.rows(); ++i) {
                mmg::SampleEntry e;
                e.id = preds.sample_ids[i];
                e.label = (*preds.labels)[i];
                e.split = "val";
                manifest.entries.push_back(std::move(e));
            }
            mmg::save_manifest(manifest, dir / "manifest.jsonl");
            for (std::size_t mi = 0; mi < preds.modalities(); ++mi) {
                mmg::ProbabilityMatrix pm;
                pm.class_count = preds.class_count;
                pm.sample_ids = preds.sample_ids;
                pm.probs = preds.probs[mi];
                mmg::save_probs(pm, dir / (preds.modality_names[mi] + ".csv"));
            }
            log_line("wrote " + std::to_string(preds.modalities()) +
                     " probability files under " + synth_out);
            return 0;
        }
        throw mmg::ValidationError("no subcommand selected");
    } catch (const mmg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mmg::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mmg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mmg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
