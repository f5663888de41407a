#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "soundbench/audio.hpp"
#include "soundbench/core.hpp"
#include "soundbench/features.hpp"
#include "soundbench/manifest.hpp"
#include "soundbench/model.hpp"
#include "soundbench/postproc.hpp"

namespace sb {

enum class FeatureId { Ttff, Mfcc, MfccTtff, Wavelets };
enum class PostprocId { Mean, MeanStd, Bow, Interp, Sequence };
enum class ClassifierId { Knn, Qnn, Gmm1, GmmT, Hmm, Svm };

struct HyperParams {
    int knn_k = 1;
    std::size_t qnn_parts = 4;
    std::size_t qnn_codewords = 50;
    bool qnn_conventional = false;
    KernelSpec svm_kernel;      // gamma <= 0 means "use 1/d"
    double svm_box = 10.0;      // the misclassification regulator Q
    int gmm_components = 3;
    CovKind gmm_cov = CovKind::Diagonal;
    int hmm_states = 4;
    int hmm_components = 1;
    std::size_t bow_codewords = 50;
    int max_iters = 100;

    HyperParams() { svm_kernel.gamma = 0.0; }
};

struct BenchCell {
    FeatureId feature = FeatureId::Mfcc;
    PostprocId postproc = PostprocId::Interp;
    ClassifierId classifier = ClassifierId::Knn;
    HyperParams params;
};

inline std::string to_string(FeatureId f) {
    switch (f) {
        case FeatureId::Ttff: return "TTFF";
        case FeatureId::Mfcc: return "MFCC";
        case FeatureId::MfccTtff: return "MFCC+TTFF";
        case FeatureId::Wavelets: return "Wavelets";
    }
    return "?";
}

inline std::string to_string(PostprocId p) {
    switch (p) {
        case PostprocId::Mean: return "mean";
        case PostprocId::MeanStd: return "mean_std";
        case PostprocId::Bow: return "bow";
        case PostprocId::Interp: return "interp";
        case PostprocId::Sequence: return "seq";
    }
    return "?";
}

inline std::string to_string(ClassifierId c) {
    switch (c) {
        case ClassifierId::Knn: return "knn";
        case ClassifierId::Qnn: return "qnn";
        case ClassifierId::Gmm1: return "gmm1";
        case ClassifierId::GmmT: return "gmmT";
        case ClassifierId::Hmm: return "hmm";
        case ClassifierId::Svm: return "svm";
    }
    return "?";
}

inline std::string cell_name(const BenchCell& cell) {
    return to_string(cell.feature) + "+" + to_string(cell.postproc) + "+" +
           to_string(cell.classifier);
}

// Compatibility matrix. Sequence classifiers need variable-length
// sequences; everything else needs a pooled vector; GMM-1 on an
// interpolated (time-ordered) vector is rejected.
inline void validate_cell(const BenchCell& cell) {
    bool sequence_clf =
        cell.classifier == ClassifierId::GmmT || cell.classifier == ClassifierId::Hmm;
    if (sequence_clf && cell.postproc != PostprocId::Sequence)
        throw ConfigError(cell_name(cell) +
                          ": gmmT/hmm consume raw sequences; use post=seq (bow/interp/mean "
                          "pooling discards the per-frame structure they model)");
    if (!sequence_clf && cell.postproc == PostprocId::Sequence)
        throw ConfigError(cell_name(cell) +
                          ": knn/qnn/gmm1/svm need a fixed-length vector; post=seq only feeds "
                          "gmmT/hmm");
    if (cell.classifier == ClassifierId::Gmm1 && cell.postproc == PostprocId::Interp)
        throw ConfigError(cell_name(cell) +
                          ": gmm1 on interpolated sequences is not a meaningful density model; "
                          "use gmmT on post=seq instead");
}

// ---------------------------------------------------------------------------
// feature extraction

// Computes the cell's per-frame feature sequence for one clip. Wavelet
// features are a single fixed vector, represented as a 1-frame sequence.
inline FeatureSequence extract_features(const AudioClip& clip, FeatureId id,
                                        const FeatureConfig& cfg_in) {
    // the default mel edge targets 48 kHz material; clamp to Nyquist for
    // lower-rate corpora
    FeatureConfig cfg = cfg_in;
    cfg.mel_fmax = std::min(cfg.mel_fmax, clip.sample_rate / 2.0);
    if (id == FeatureId::Wavelets) {
        auto wd = dwt(clip.samples, cfg.wavelet_levels);
        auto v = wavelet_features(wd);
        FeatureSequence seq;
        seq.clip_duration = clip.duration_seconds();
        seq.values = Matrix(1, v.size());
        seq.values.data = v;
        for (std::size_t i = 0; i < v.size(); ++i)
            seq.feature_names.push_back("wav" + std::to_string(i));
        return seq;
    }

    FrameSequence hamming =
        frame_signal(clip.samples, clip.sample_rate, cfg.frame_ms, cfg.overlap, WindowKind::Hamming);
    Spectrogram spec = stft_magnitude(hamming, cfg.fft_size);

    if (id == FeatureId::Mfcc) {
        FeatureSequence m = mfcc(spec, cfg);
        m.clip_duration = clip.duration_seconds();
        return m;
    }

    FrameSequence rect = frame_signal(clip.samples, clip.sample_rate, cfg.frame_ms, cfg.overlap,
                                      WindowKind::Rectangular);
    FeatureSequence tf = time_features(rect, clip);
    FeatureSequence shape = spectral_shape(spec, cfg);
    FeatureSequence dyn = spectral_dynamics(spec);

    if (id == FeatureId::Ttff)
        return assemble_ttff({&tf, &shape, &dyn}, cfg.ttff_subset);

    // MFCC+TTFF: cepstral columns first, then the TTFF subset
    FeatureSequence m = mfcc(spec, cfg);
    m.clip_duration = clip.duration_seconds();
    std::vector<std::string> names = m.feature_names;
    names.insert(names.end(), cfg.ttff_subset.begin(), cfg.ttff_subset.end());
    return assemble_ttff({&m, &tf, &shape, &dyn}, names);
}

// ---------------------------------------------------------------------------
// training / prediction for one fold

struct FoldArtifacts {
    Codebook codebook;           // BoW only
    std::size_t interp_len = 0;  // Interp only
    bool has_codebook = false;
};

inline FoldArtifacts fit_postproc(const std::vector<const FeatureSequence*>& train,
                                  const BenchCell& cell, std::uint64_t seed) {
    FoldArtifacts art;
    if (cell.postproc == PostprocId::Bow) {
        std::size_t total = 0;
        for (const auto* s : train) total += s->frames();
        Matrix frames(total, train[0]->dim());
        std::size_t r = 0;
        for (const auto* s : train)
            for (std::size_t t = 0; t < s->frames(); ++t, ++r)
                for (std::size_t c = 0; c < s->dim(); ++c)
                    frames.at(r, c) = s->values.at(t, c);
        art.codebook = kmeans_train(frames, cell.params.bow_codewords, seed);
        art.has_codebook = true;
    } else if (cell.postproc == PostprocId::Interp) {
        std::vector<std::size_t> lengths;
        for (const auto* s : train) lengths.push_back(s->frames());
        art.interp_len = mean_sequence_length(lengths);
    }
    return art;
}

inline FeatureInput represent(const FeatureSequence& seq, const BenchCell& cell,
                              const FoldArtifacts& art) {
    switch (cell.postproc) {
        case PostprocId::Mean: return pool_mean(seq, false).values;
        case PostprocId::MeanStd: return pool_mean(seq, true).values;
        case PostprocId::Bow: return bow_encode(seq, art.codebook).values;
        case PostprocId::Interp: return interpolate(seq, art.interp_len).values;
        case PostprocId::Sequence: return seq.values;
    }
    throw ConfigError("represent: unknown postproc");
}

inline TrainedModel train_classifier(const std::vector<FeatureInput>& inputs,
                                     const std::vector<int>& labels, int num_classes,
                                     const BenchCell& cell, std::uint64_t seed) {
    const HyperParams& hp = cell.params;
    bool sequence_clf =
        cell.classifier == ClassifierId::GmmT || cell.classifier == ClassifierId::Hmm;

    if (!sequence_clf) {
        Matrix x(inputs.size(), std::get<std::vector<double>>(inputs[0]).size());
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto& v = std::get<std::vector<double>>(inputs[i]);
            if (v.size() != x.cols) throw ConfigError("train: inconsistent vector dimensions");
            std::copy(v.begin(), v.end(), x.row(i));
        }
        switch (cell.classifier) {
            case ClassifierId::Knn:
                return knn_train(x, labels, hp.knn_k);
            case ClassifierId::Qnn:
                return qnn_train(x, labels, hp.qnn_parts,
                                 std::min(hp.qnn_codewords, x.rows), seed,
                                 hp.qnn_conventional);
            case ClassifierId::Svm: {
                KernelSpec spec = hp.svm_kernel;
                if (spec.gamma <= 0.0) spec.gamma = 1.0 / static_cast<double>(x.cols);
                return svm_train_1v1(x, labels, spec, hp.svm_box);
            }
            case ClassifierId::Gmm1: {
                std::vector<Matrix> per_class(static_cast<std::size_t>(num_classes));
                for (int c = 0; c < num_classes; ++c) {
                    std::size_t count = 0;
                    for (std::size_t i = 0; i < labels.size(); ++i)
                        if (labels[i] == c + 1) ++count;
                    per_class[c] = Matrix(count, x.cols);
                    std::size_t r = 0;
                    for (std::size_t i = 0; i < labels.size(); ++i)
                        if (labels[i] == c + 1) {
                            std::copy(x.row(i), x.row(i) + x.cols, per_class[c].row(r));
                            ++r;
                        }
                }
                return gmm_train_set(per_class, hp.gmm_components, hp.gmm_cov, hp.max_iters,
                                     seed);
            }
            default: break;
        }
        throw ConfigError("train: unreachable classifier");
    }

    // sequence classifiers
    if (cell.classifier == ClassifierId::GmmT) {
        std::vector<Matrix> per_class(static_cast<std::size_t>(num_classes));
        std::size_t d = std::get<Matrix>(inputs[0]).cols;
        std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t i = 0; i < inputs.size(); ++i)
            counts[static_cast<std::size_t>(labels[i] - 1)] += std::get<Matrix>(inputs[i]).rows;
        for (int c = 0; c < num_classes; ++c) per_class[c] = Matrix(counts[c], d);
        std::vector<std::size_t> rows(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Matrix& seq = std::get<Matrix>(inputs[i]);
            std::size_t c = static_cast<std::size_t>(labels[i] - 1);
            for (std::size_t t = 0; t < seq.rows; ++t, ++rows[c])
                std::copy(seq.row(t), seq.row(t) + d, per_class[c].row(rows[c]));
        }
        return gmm_train_set(per_class, hp.gmm_components, hp.gmm_cov, hp.max_iters, seed);
    }
    std::vector<std::vector<Matrix>> per_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < inputs.size(); ++i)
        per_class[static_cast<std::size_t>(labels[i] - 1)].push_back(std::get<Matrix>(inputs[i]));
    for (std::size_t c = 0; c < per_class.size(); ++c)
        if (per_class[c].empty())
            throw ConfigError("hmm: class " + std::to_string(c + 1) + " has no sequences");
    return hmm_train_set(per_class, hp.hmm_states, hp.hmm_components, hp.gmm_cov, hp.max_iters,
                         seed);
}

// ---------------------------------------------------------------------------
// reporting

inline void confusion_and_accuracy(const std::vector<int>& predictions,
                                   const std::vector<int>& truths, int num_classes,
                                   Matrix& confusion, double& accuracy) {
    if (predictions.size() != truths.size())
        throw ConfigError("confusion_and_accuracy: length mismatch");
    confusion = Matrix(static_cast<std::size_t>(num_classes),
                       static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (truths[i] < 1 || truths[i] > num_classes || predictions[i] < 1 ||
            predictions[i] > num_classes)
            throw ConfigError("confusion_and_accuracy: label out of range");
        confusion.at(static_cast<std::size_t>(truths[i] - 1),
                     static_cast<std::size_t>(predictions[i] - 1)) += 1.0;
    }
    double diag = 0.0;
    for (int c = 0; c < num_classes; ++c)
        diag += confusion.at(static_cast<std::size_t>(c), static_cast<std::size_t>(c));
    accuracy = 100.0 * diag / static_cast<double>(predictions.size());
}

struct BenchmarkReport {
    BenchCell cell;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    Matrix confusion;  // summed over runs
    int runs = 0;
    int folds = 0;
    std::uint64_t seed = 0;
    std::size_t model_bytes = 0;

    // timing section (excluded from the deterministic report)
    double feature_time_ms = 0.0;
    double kmeans_time_ms = 0.0;
    double histo_time_ms = 0.0;
    double interp_time_ms = 0.0;
    double train_time_s = 0.0;
    double recognition_time_ms = 0.0;
};

// ---------------------------------------------------------------------------
// cross-validation

struct LoadedDataset {
    DatasetManifest manifest;
    std::vector<AudioClip> clips;  // parallel to manifest.entries
    std::vector<int> labels;
};

inline LoadedDataset load_dataset(const DatasetManifest& manifest) {
    LoadedDataset ds;
    ds.manifest = manifest;
    for (const auto& e : manifest.entries) {
        AudioClip clip = load_wav(e.path);
        clip.label = manifest.label_of(e.class_name);
        ds.clips.push_back(std::move(clip));
        ds.labels.push_back(manifest.label_of(e.class_name));
    }
    return ds;
}

// Repeated stratified k-fold cross-validation of one cell. Codebooks,
// interpolation length and models are fit on training folds only.
// Deterministic given the seed; timings are not measured here.
inline BenchmarkReport cross_validate(const LoadedDataset& ds, const BenchCell& cell, int folds,
                                      int runs, std::uint64_t seed) {
    validate_cell(cell);
    int num_classes = ds.manifest.num_classes();

    FeatureConfig cfg;
    std::vector<FeatureSequence> features;
    features.reserve(ds.clips.size());
    for (const auto& clip : ds.clips) features.push_back(extract_features(clip, cell.feature, cfg));

    BenchmarkReport report;
    report.cell = cell;
    report.runs = runs;
    report.folds = folds;
    report.seed = seed;
    report.confusion = Matrix(static_cast<std::size_t>(num_classes),
                              static_cast<std::size_t>(num_classes));

    std::vector<double> run_accuracy(static_cast<std::size_t>(runs), 0.0);
    bool first_model = true;

    for (int run = 0; run < runs; ++run) {
        FoldAssignment fa =
            stratified_folds(ds.manifest, folds, seed + static_cast<std::uint64_t>(run));
        std::vector<int> predictions, truths;
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t i = 0; i < ds.clips.size(); ++i) {
                if (fa.fold_of_clip.at(ds.manifest.entries[i].path) == fold)
                    test_idx.push_back(i);
                else
                    train_idx.push_back(i);
            }
            if (test_idx.empty()) continue;

            std::vector<const FeatureSequence*> train_seqs;
            std::vector<int> train_labels;
            for (std::size_t i : train_idx) {
                train_seqs.push_back(&features[i]);
                train_labels.push_back(ds.labels[i]);
            }
            std::uint64_t fold_seed = seed * 7919ull +
                                      static_cast<std::uint64_t>(run) * 100ull +
                                      static_cast<std::uint64_t>(fold);
            FoldArtifacts art = fit_postproc(train_seqs, cell, fold_seed);

            std::vector<FeatureInput> train_inputs;
            for (const auto* s : train_seqs) train_inputs.push_back(represent(*s, cell, art));
            TrainedModel model =
                train_classifier(train_inputs, train_labels, num_classes, cell, fold_seed);
            if (first_model) {
                report.model_bytes = model_memory(model);
                first_model = false;
            }
            for (std::size_t i : test_idx) {
                FeatureInput input = represent(features[i], cell, art);
                predictions.push_back(classify(model, input));
                truths.push_back(ds.labels[i]);
            }
        }
        Matrix run_conf;
        double acc;
        confusion_and_accuracy(predictions, truths, num_classes, run_conf, acc);
        run_accuracy[static_cast<std::size_t>(run)] = acc;
        for (std::size_t i = 0; i < run_conf.data.size(); ++i)
            report.confusion.data[i] += run_conf.data[i];
    }

    double mean = 0.0;
    for (double a : run_accuracy) mean += a;
    mean /= static_cast<double>(runs);
    double var = 0.0;
    for (double a : run_accuracy) var += (a - mean) * (a - mean);
    report.accuracy_mean = mean;
    report.accuracy_std = std::sqrt(var / static_cast<double>(runs));
    return report;
}

// ---------------------------------------------------------------------------
// timing

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace detail

// Wall-clock statistics for one cell: per-clip medians for feature /
// histogram / interpolation / recognition, totals for k-means and one
// fold fit. A warm-up pass precedes each measurement.
inline void measure_times(const LoadedDataset& ds, const BenchCell& cell,
                          BenchmarkReport& report, std::uint64_t seed) {
    validate_cell(cell);
    FeatureConfig cfg;
    int num_classes = ds.manifest.num_classes();

    // feature time
    extract_features(ds.clips[0], cell.feature, cfg);  // warm-up
    std::vector<double> per_clip;
    std::vector<FeatureSequence> features;
    for (const auto& clip : ds.clips) {
        auto start = detail::Clock::now();
        features.push_back(extract_features(clip, cell.feature, cfg));
        per_clip.push_back(detail::ms_since(start));
    }
    report.feature_time_ms = detail::median(per_clip);

    // single training split: fold 0 of a k-fold assignment held out
    FoldAssignment fa = stratified_folds(ds.manifest, report.folds > 1 ? report.folds : 10, seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.clips.size(); ++i) {
        if (fa.fold_of_clip.at(ds.manifest.entries[i].path) == 0)
            test_idx.push_back(i);
        else
            train_idx.push_back(i);
    }
    std::vector<const FeatureSequence*> train_seqs;
    std::vector<int> train_labels;
    for (std::size_t i : train_idx) {
        train_seqs.push_back(&features[i]);
        train_labels.push_back(ds.labels[i]);
    }

    FoldArtifacts art;
    if (cell.postproc == PostprocId::Bow) {
        fit_postproc(train_seqs, cell, seed);  // warm-up
        auto start = detail::Clock::now();
        art = fit_postproc(train_seqs, cell, seed);
        report.kmeans_time_ms = detail::ms_since(start);

        std::vector<double> histo;
        for (const auto* s : train_seqs) {
            auto h0 = detail::Clock::now();
            bow_encode(*s, art.codebook);
            histo.push_back(detail::ms_since(h0));
        }
        report.histo_time_ms = detail::median(histo);
    } else {
        art = fit_postproc(train_seqs, cell, seed);
    }
    if (cell.postproc == PostprocId::Interp) {
        std::vector<double> interp_times;
        for (const auto* s : train_seqs) {
            auto i0 = detail::Clock::now();
            interpolate(*s, art.interp_len);
            interp_times.push_back(detail::ms_since(i0));
        }
        report.interp_time_ms = detail::median(interp_times);
    }

    std::vector<FeatureInput> train_inputs;
    for (const auto* s : train_seqs) train_inputs.push_back(represent(*s, cell, art));
    auto t0 = detail::Clock::now();
    TrainedModel model = train_classifier(train_inputs, train_labels, num_classes, cell, seed);
    report.train_time_s = detail::ms_since(t0) / 1000.0;

    // recognition time per clip (median over the held-out fold)
    if (!test_idx.empty())
        classify(model, represent(features[test_idx[0]], cell, art));  // warm-up
    std::vector<double> rec;
    for (std::size_t i : test_idx) {
        FeatureInput input = represent(features[i], cell, art);
        auto r0 = detail::Clock::now();
        classify(model, input);
        rec.push_back(detail::ms_since(r0));
    }
    if (!rec.empty()) report.recognition_time_ms = detail::median(rec);
}

// ---------------------------------------------------------------------------
// JSON report

inline nlohmann::ordered_json cell_json(const BenchCell& cell) {
    nlohmann::ordered_json j;
    j["feature"] = to_string(cell.feature);
    j["postproc"] = to_string(cell.postproc);
    j["classifier"] = to_string(cell.classifier);
    const HyperParams& hp = cell.params;
    switch (cell.classifier) {
        case ClassifierId::Knn: j["knn.k"] = hp.knn_k; break;
        case ClassifierId::Qnn:
            j["qnn.P"] = hp.qnn_parts;
            j["qnn.K"] = hp.qnn_codewords;
            break;
        case ClassifierId::Svm:
            j["svm.Q"] = hp.svm_box;
            j["svm.gamma"] = hp.svm_kernel.gamma;
            break;
        case ClassifierId::Gmm1:
        case ClassifierId::GmmT: j["gmm.M"] = hp.gmm_components; break;
        case ClassifierId::Hmm:
            j["hmm.S"] = hp.hmm_states;
            j["hmm.M"] = hp.hmm_components;
            break;
    }
    if (cell.postproc == PostprocId::Bow) j["bow.K"] = hp.bow_codewords;
    return j;
}

// Deterministic section and timing section are separate so golden-file
// comparisons can ignore the latter.
inline nlohmann::ordered_json report_json(const BenchmarkReport& r) {
    nlohmann::ordered_json j;
    j["cell"] = cell_json(r.cell);
    nlohmann::ordered_json det;
    det["accuracy_mean"] = r.accuracy_mean;
    det["accuracy_std"] = r.accuracy_std;
    det["runs"] = r.runs;
    det["folds"] = r.folds;
    det["seed"] = r.seed;
    det["model_bytes"] = r.model_bytes;
    det["confusion"] = r.confusion.data;  // row-major C x C
    j["deterministic"] = det;
    nlohmann::ordered_json timing;
    timing["feature_time_ms"] = r.feature_time_ms;
    timing["kmeans_time_ms"] = r.kmeans_time_ms;
    timing["histo_time_ms"] = r.histo_time_ms;
    timing["interp_time_ms"] = r.interp_time_ms;
    timing["train_time_s"] = r.train_time_s;
    timing["recognition_time_ms"] = r.recognition_time_ms;
    j["timing"] = timing;
    return j;
}

// ---------------------------------------------------------------------------
// cell config parsing

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline FeatureId parse_feature(const std::string& s) {
    if (s == "TTFF") return FeatureId::Ttff;
    if (s == "MFCC") return FeatureId::Mfcc;
    if (s == "MFCC+TTFF") return FeatureId::MfccTtff;
    if (s == "Wavelets") return FeatureId::Wavelets;
    throw ConfigError("unknown feature: " + s);
}

inline PostprocId parse_postproc(const std::string& s) {
    if (s == "mean") return PostprocId::Mean;
    if (s == "mean_std") return PostprocId::MeanStd;
    if (s == "bow") return PostprocId::Bow;
    if (s == "interp") return PostprocId::Interp;
    if (s == "seq") return PostprocId::Sequence;
    throw ConfigError("unknown postproc: " + s);
}

inline ClassifierId parse_classifier(const std::string& s) {
    if (s == "knn") return ClassifierId::Knn;
    if (s == "qnn") return ClassifierId::Qnn;
    if (s == "gmm1") return ClassifierId::Gmm1;
    if (s == "gmmT") return ClassifierId::GmmT;
    if (s == "hmm") return ClassifierId::Hmm;
    if (s == "svm") return ClassifierId::Svm;
    throw ConfigError("unknown classifier: " + s);
}

inline KernelKind parse_kernel(const std::string& s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "poly") return KernelKind::Polynomial;
    if (s == "rbf") return KernelKind::Rbf;
    if (s == "sigmoid") return KernelKind::Sigmoid;
    if (s == "chi2") return KernelKind::Chi2;
    throw ConfigError("unknown kernel: " + s);
}

inline void apply_param(HyperParams& hp, const std::string& key, const std::string& value) {
    if (key == "knn.k") hp.knn_k = std::stoi(value);
    else if (key == "qnn.P") hp.qnn_parts = std::stoul(value);
    else if (key == "qnn.K") hp.qnn_codewords = std::stoul(value);
    else if (key == "qnn.conventional") hp.qnn_conventional = value == "1" || value == "true";
    else if (key == "svm.kernel") hp.svm_kernel.kind = parse_kernel(value);
    else if (key == "svm.Q") hp.svm_box = std::stod(value);
    else if (key == "svm.gamma") hp.svm_kernel.gamma = std::stod(value);
    else if (key == "svm.coef0") hp.svm_kernel.coef0 = std::stod(value);
    else if (key == "svm.degree") hp.svm_kernel.degree = std::stoi(value);
    else if (key == "gmm.M") hp.gmm_components = std::stoi(value);
    else if (key == "gmm.cov") hp.gmm_cov = value == "full" ? CovKind::Full : CovKind::Diagonal;
    else if (key == "hmm.S") hp.hmm_states = std::stoi(value);
    else if (key == "hmm.M") hp.hmm_components = std::stoi(value);
    else if (key == "bow.K") hp.bow_codewords = std::stoul(value);
    else if (key == "max_iters") hp.max_iters = std::stoi(value);
    else throw ConfigError("unknown hyperparameter key: " + key);
}

}  // namespace detail

// Parses the cells config. Grammar, one cell per line:
//   cell feature=<F> post=<P> clf=<C> [key=value ...]
// Comma-separated values expand into a hyperparameter grid.
// '#' starts a comment.
inline std::vector<BenchCell> parse_cells(std::istream& in) {
    std::vector<BenchCell> cells;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream words(line);
        std::string word;
        if (!(words >> word)) continue;
        if (word != "cell") throw ConfigError("cells config: expected `cell`, got: " + word);

        std::vector<BenchCell> expanding{BenchCell{}};
        bool have_feature = false, have_post = false, have_clf = false;
        while (words >> word) {
            auto eq = word.find('=');
            if (eq == std::string::npos)
                throw ConfigError("cells config: expected key=value, got: " + word);
            std::string key = word.substr(0, eq);
            std::string value = word.substr(eq + 1);
            if (key == "feature") {
                for (auto& c : expanding) c.feature = detail::parse_feature(value);
                have_feature = true;
            } else if (key == "post") {
                for (auto& c : expanding) c.postproc = detail::parse_postproc(value);
                have_post = true;
            } else if (key == "clf") {
                for (auto& c : expanding) c.classifier = detail::parse_classifier(value);
                have_clf = true;
            } else {
                auto values = detail::split(value, ',');
                std::vector<BenchCell> next;
                for (const auto& c : expanding)
                    for (const auto& v : values) {
                        BenchCell copy = c;
                        detail::apply_param(copy.params, key, v);
                        next.push_back(copy);
                    }
                expanding = std::move(next);
            }
        }
        if (!have_feature || !have_post || !have_clf)
            throw ConfigError("cells config: each cell needs feature=, post= and clf=");
        for (auto& c : expanding) {
            validate_cell(c);
            cells.push_back(c);
        }
    }
    if (cells.empty()) throw ConfigError("cells config: no cells defined");
    return cells;
}

}  // namespace sb
