// Command line front end: feature extraction, benchmarking, SNR
// reporting, and single-model train/predict.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "soundbench/bench.hpp"

namespace {

int g_threads = 1;
bool g_verbose = false;

void vlog(const std::string& msg) {
    if (g_verbose) std::cerr << "[soundbench] " << msg << "\n";
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

sb::BenchCell parse_single_cell(const std::string& spec) {
    std::istringstream in("cell " + spec);
    auto cells = sb::parse_cells(in);
    if (cells.size() != 1)
        throw sb::ConfigError("expected exactly one cell, got " + std::to_string(cells.size()));
    return cells[0];
}

// Pipeline sidecar: everything besides the model needed to reproduce the
// representation at predict time (feature/postproc ids, class names,
// interpolation length, BoW codebook).
void save_pipeline(const std::string& path, const sb::BenchCell& cell,
                   const sb::DatasetManifest& manifest, const sb::FoldArtifacts& art) {
    nlohmann::ordered_json j;
    j["feature"] = sb::to_string(cell.feature);
    j["postproc"] = sb::to_string(cell.postproc);
    j["classifier"] = sb::to_string(cell.classifier);
    j["classes"] = manifest.class_names;
    j["interp_len"] = art.interp_len;
    if (art.has_codebook) {
        j["codebook_rows"] = art.codebook.centroids.rows;
        j["codebook_cols"] = art.codebook.centroids.cols;
        j["codebook"] = art.codebook.centroids.data;
    }
    std::ofstream out(path);
    if (!out) throw sb::FormatError("cannot write pipeline file: " + path);
    out << j.dump(2) << "\n";
}

struct Pipeline {
    sb::BenchCell cell;
    std::vector<std::string> classes;
    sb::FoldArtifacts art;
};

Pipeline load_pipeline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sb::FormatError("cannot open pipeline file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    Pipeline p;
    p.cell.feature = sb::detail::parse_feature(j.at("feature").get<std::string>());
    p.cell.postproc = sb::detail::parse_postproc(j.at("postproc").get<std::string>());
    p.cell.classifier = sb::detail::parse_classifier(j.at("classifier").get<std::string>());
    p.classes = j.at("classes").get<std::vector<std::string>>();
    p.art.interp_len = j.at("interp_len").get<std::size_t>();
    if (j.contains("codebook")) {
        p.art.has_codebook = true;
        p.art.codebook.centroids = sb::Matrix(j.at("codebook_rows").get<std::size_t>(),
                                              j.at("codebook_cols").get<std::size_t>());
        p.art.codebook.centroids.data = j.at("codebook").get<std::vector<double>>();
        p.art.codebook.k = p.art.codebook.centroids.rows;
    }
    return p;
}

int cmd_extract(const std::string& manifest_path, const std::string& feature,
                const std::string& out_dir) {
    sb::FeatureId fid = sb::detail::parse_feature(feature);
    sb::DatasetManifest manifest = sb::load_manifest(manifest_path);
    std::filesystem::create_directories(out_dir);
    sb::FeatureConfig cfg;
    for (const auto& e : manifest.entries) {
        sb::AudioClip clip = sb::load_wav(e.path);
        sb::FeatureSequence seq = sb::extract_features(clip, fid, cfg);
        std::string out = out_dir + "/" + stem_of(e.path) + ".nard";
        sb::write_feature_matrix(out, seq);
        vlog("wrote " + out + " (" + std::to_string(seq.frames()) + "x" +
             std::to_string(seq.dim()) + ")");
    }
    std::cout << "extracted " << manifest.entries.size() << " feature files to " << out_dir
              << "\n";
    return 0;
}

int cmd_bench(const std::string& manifest_path, const std::string& cells_path, int folds,
              int runs, std::uint64_t seed, const std::string& out_path, bool with_timing) {
    std::ifstream cfg(cells_path);
    if (!cfg) throw sb::ConfigError("cannot open cells config: " + cells_path);
    std::vector<sb::BenchCell> cells = sb::parse_cells(cfg);
    vlog(std::to_string(cells.size()) + " cells");

    sb::DatasetManifest manifest = sb::load_manifest(manifest_path);
    sb::LoadedDataset ds = sb::load_dataset(manifest);
    vlog("loaded " + std::to_string(ds.clips.size()) + " clips, " +
         std::to_string(manifest.num_classes()) + " classes");

    std::vector<sb::BenchmarkReport> reports(cells.size());
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                vlog("cell " + sb::cell_name(cells[i]));
                reports[i] = sb::cross_validate(ds, cells[i], folds, runs, seed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    int threads = std::max(1, std::min<int>(g_threads, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (!errors[i].empty()) throw sb::ConfigError(errors[i]);

    // timing runs single-threaded after the parallel phase
    if (with_timing)
        for (std::size_t i = 0; i < cells.size(); ++i)
            sb::measure_times(ds, cells[i], reports[i], seed);

    nlohmann::ordered_json j;
    j["classes"] = manifest.class_names;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) j["cells"].push_back(sb::report_json(r));
    std::ofstream out(out_path);
    if (!out) throw sb::FormatError("cannot write report: " + out_path);
    out << j.dump(2) << "\n";

    for (const auto& r : reports)
        std::cout << sb::cell_name(r.cell) << ": " << r.accuracy_mean << " +/- "
                  << r.accuracy_std << " %  (" << r.model_bytes << " bytes)\n";
    return 0;
}

int cmd_snr(const std::string& manifest_path, const std::string& noise_path) {
    sb::DatasetManifest manifest = sb::load_manifest(manifest_path);
    sb::AudioClip noise = sb::load_wav(noise_path);
    std::map<std::string, std::pair<double, int>> per_class;
    for (const auto& e : manifest.entries) {
        sb::AudioClip clip = sb::load_wav(e.path);
        double snr = sb::compute_snr(clip, noise);
        per_class[e.class_name].first += snr;
        per_class[e.class_name].second += 1;
    }
    for (const auto& name : manifest.class_names) {
        const auto& [sum, count] = per_class.at(name);
        std::cout << name << ": " << sum / count << " dB (" << count << " clips)\n";
    }
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& cell_spec,
              const std::string& model_path, std::uint64_t seed) {
    sb::BenchCell cell = parse_single_cell(cell_spec);
    sb::validate_cell(cell);
    sb::DatasetManifest manifest = sb::load_manifest(manifest_path);
    sb::LoadedDataset ds = sb::load_dataset(manifest);

    sb::FeatureConfig cfg;
    std::vector<sb::FeatureSequence> features;
    std::vector<const sb::FeatureSequence*> seq_ptrs;
    for (const auto& clip : ds.clips)
        features.push_back(sb::extract_features(clip, cell.feature, cfg));
    for (const auto& f : features) seq_ptrs.push_back(&f);

    sb::FoldArtifacts art = sb::fit_postproc(seq_ptrs, cell, seed);
    std::vector<sb::FeatureInput> inputs;
    for (const auto* s : seq_ptrs) inputs.push_back(sb::represent(*s, cell, art));
    sb::TrainedModel model =
        sb::train_classifier(inputs, ds.labels, manifest.num_classes(), cell, seed);
    sb::save_model(model_path, model);
    save_pipeline(model_path + ".pipe", cell, manifest, art);
    std::cout << "model: " << model_path << " (" << sb::model_memory(model)
              << " bytes), pipeline: " << model_path << ".pipe\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& wav_path) {
    sb::TrainedModel model = sb::load_model(model_path);
    Pipeline p = load_pipeline(model_path + ".pipe");
    sb::AudioClip clip = sb::load_wav(wav_path);
    sb::FeatureConfig cfg;
    sb::FeatureSequence seq = sb::extract_features(clip, p.cell.feature, cfg);
    sb::FeatureInput input = sb::represent(seq, p.cell, p.art);
    int label = sb::classify(model, input);
    std::cout << wav_path << ": class " << label << " (" << p.classes.at(label - 1) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sound classification benchmark toolkit"};
    app.require_subcommand(1);
    app.add_option("--threads", g_threads, "worker threads for the benchmark")
        ->capture_default_str();
    app.add_flag("--verbose", g_verbose, "progress logging to stderr");

    std::string manifest_path, feature = "MFCC", out_dir = "features";
    auto* extract = app.add_subcommand("extract", "write per-clip feature files");
    extract->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
    extract->add_option("--feature", feature, "TTFF | MFCC | MFCC+TTFF | Wavelets")
        ->capture_default_str();
    extract->add_option("--out", out_dir, "output directory")->capture_default_str();

    std::string cells_path, report_path = "report.json";
    int folds = 10, runs = 10;
    std::uint64_t seed = 42;
    bool with_timing = false;
    auto* bench = app.add_subcommand("bench", "cross-validated benchmark");
    bench->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
    bench->add_option("--cells", cells_path, "cells config file")->required();
    bench->add_option("--folds", folds, "fold count")->capture_default_str();
    bench->add_option("--runs", runs, "repeated runs")->capture_default_str();
    bench->add_option("--seed", seed, "base RNG seed")->capture_default_str();
    bench->add_option("--out", report_path, "JSON report path")->capture_default_str();
    bench->add_flag("--timing", with_timing, "also measure wall-clock times");

    std::string noise_path;
    auto* snr = app.add_subcommand("snr", "per-class SNR against a noise reference");
    snr->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
    snr->add_option("--noise", noise_path, "noise reference WAV")->required();

    std::string cell_spec, model_path = "model.nmdl";
    auto* train = app.add_subcommand("train", "train one model on the full dataset");
    train->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
    train->add_option("--cell", cell_spec, "cell spec, e.g. 'feature=MFCC post=interp clf=knn'")
        ->required();
    train->add_option("--out", model_path, "model output path")->capture_default_str();
    train->add_option("--seed", seed, "RNG seed")->capture_default_str();

    std::string wav_path;
    auto* predict = app.add_subcommand("predict", "classify one WAV with a trained model");
    predict->add_option("--model", model_path, "model path (pipeline sidecar expected)")
        ->required();
    predict->add_option("--wav", wav_path, "input WAV")->required();

    try {
        app.parse(argc, argv);
        if (*extract) return cmd_extract(manifest_path, feature, out_dir);
        if (*bench)
            return cmd_bench(manifest_path, cells_path, folds, runs, seed, report_path,
                             with_timing);
        if (*snr) return cmd_snr(manifest_path, noise_path);
        if (*train) return cmd_train(manifest_path, cell_spec, model_path, seed);
        if (*predict) return cmd_predict(model_path, wav_path);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const sb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
