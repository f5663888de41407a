#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "soundbench/bench.hpp"
#include "synthetic.hpp"

namespace {

sb::BenchCell cell_of(sb::FeatureId f, sb::PostprocId p, sb::ClassifierId c) {
    sb::BenchCell cell;
    cell.feature = f;
    cell.postproc = p;
    cell.classifier = c;
    return cell;
}

std::string scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "sb_bench" / name;
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("compatibility matrix rejects the gray cells") {
    using F = sb::FeatureId;
    using P = sb::PostprocId;
    using C = sb::ClassifierId;
    // sequence classifiers reject pooled representations
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Mfcc, P::Bow, C::Hmm)), sb::ConfigError);
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Mfcc, P::Interp, C::GmmT)), sb::ConfigError);
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Mfcc, P::Mean, C::Hmm)), sb::ConfigError);
    // pooled classifiers reject raw sequences
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Mfcc, P::Sequence, C::Knn)), sb::ConfigError);
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Ttff, P::Sequence, C::Svm)), sb::ConfigError);
    // interp + gmm1 is gray
    CHECK_THROWS_AS(sb::validate_cell(cell_of(F::Mfcc, P::Interp, C::Gmm1)), sb::ConfigError);
    // valid representatives
    CHECK_NOTHROW(sb::validate_cell(cell_of(F::Mfcc, P::Interp, C::Knn)));
    CHECK_NOTHROW(sb::validate_cell(cell_of(F::Ttff, P::Bow, C::Svm)));
    CHECK_NOTHROW(sb::validate_cell(cell_of(F::Wavelets, P::Mean, C::Gmm1)));
    CHECK_NOTHROW(sb::validate_cell(cell_of(F::Mfcc, P::Sequence, C::Hmm)));
}

TEST_CASE("cells config parsing and grid expansion") {
    std::istringstream cfg(
        "# comment line\n"
        "cell feature=MFCC post=interp clf=knn knn.k=1,3,5\n"
        "cell feature=TTFF post=bow clf=svm svm.kernel=linear,rbf svm.Q=1,10 bow.K=20\n");
    auto cells = sb::parse_cells(cfg);
    REQUIRE(cells.size() == 7);  // 3 + 2*2
    CHECK(cells[0].params.knn_k == 1);
    CHECK(cells[2].params.knn_k == 5);
    CHECK(cells[3].params.svm_kernel.kind == sb::KernelKind::Linear);
    CHECK(cells[3].params.bow_codewords == 20);
    CHECK(cells[6].params.svm_box == 10.0);

    std::istringstream bad_key("cell feature=MFCC post=mean clf=knn nope=1\n");
    CHECK_THROWS_WITH_AS(sb::parse_cells(bad_key), doctest::Contains("unknown hyperparameter"),
                         sb::ConfigError);
    std::istringstream missing("cell post=mean clf=knn\n");
    CHECK_THROWS_AS(sb::parse_cells(missing), sb::ConfigError);
    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(sb::parse_cells(empty), sb::ConfigError);
    std::istringstream invalid("cell feature=MFCC post=bow clf=hmm\n");
    CHECK_THROWS_AS(sb::parse_cells(invalid), sb::ConfigError);
}

TEST_CASE("confusion_and_accuracy") {
    sb::Matrix confusion;
    double acc = 0.0;

    sb::confusion_and_accuracy({1, 2, 3}, {1, 2, 3}, 3, confusion, acc);
    CHECK(acc == 100.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(confusion.at(i, j) == (i == j ? 1.0 : 0.0));

    sb::confusion_and_accuracy({1, 1, 1}, {1, 2, 3}, 3, confusion, acc);
    CHECK(acc == doctest::Approx(100.0 / 3.0));
    CHECK(confusion.at(1, 0) == 1.0);  // everything lands in column 1
    CHECK(confusion.at(2, 0) == 1.0);

    sb::confusion_and_accuracy({1, 2, 2, 1}, {1, 2, 1, 2}, 2, confusion, acc);
    CHECK(acc == 50.0);

    CHECK_THROWS_AS(sb::confusion_and_accuracy({1, 5}, {1, 2}, 3, confusion, acc),
                    sb::ConfigError);
    CHECK_THROWS_AS(sb::confusion_and_accuracy({1}, {1, 2}, 2, confusion, acc),
                    sb::ConfigError);
}

TEST_CASE("cross_validate: separable synthetic corpus reaches 100%") {
    // three tones at widely separated frequencies: trivially separable
    std::string dir = scratch("separable");
    std::ofstream manifest(dir + "/manifest.csv");
    manifest << "path,class,scenario\n";
    sb::Rng rng(5);
    const int per_class = 6;
    const double freqs[3] = {300.0, 1000.0, 3000.0};
    for (int cls = 1; cls <= 3; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            sb::AudioClip clip;
            clip.sample_rate = 16000;
            double dur = rng.uniform(0.3, 0.6);
            clip.samples.resize(static_cast<std::size_t>(dur * 16000));
            double gain = rng.uniform(0.3, 0.8);
            for (std::size_t s = 0; s < clip.samples.size(); ++s)
                clip.samples[s] = gain * std::sin(2.0 * std::numbers::pi * freqs[cls - 1] *
                                                  static_cast<double>(s) / 16000.0);
            std::string name = "c" + std::to_string(cls) + "_" + std::to_string(i) + ".wav";
            sb::write_wav(dir + "/" + name, clip);
            manifest << name << ",class" << cls << ",synthetic\n";
        }
    }
    manifest.close();

    auto ds = sb::load_dataset(sb::load_manifest(dir + "/manifest.csv"));
    auto cell = cell_of(sb::FeatureId::Mfcc, sb::PostprocId::Interp, sb::ClassifierId::Knn);
    auto report = sb::cross_validate(ds, cell, 3, 2, 11);
    CHECK(report.accuracy_mean == 100.0);
    CHECK(report.accuracy_std == 0.0);
    CHECK(report.model_bytes > 0);

    // confusion row sums: per-class test counts x runs
    for (std::size_t c = 0; c < 3; ++c) {
        double row = 0.0;
        for (std::size_t j = 0; j < 3; ++j) row += report.confusion.at(c, j);
        CHECK(row == doctest::Approx(per_class * 2));
    }
}

TEST_CASE("cross_validate: null dataset scores near chance") {
    // same generator for both labels: no signal to learn
    std::string dir = scratch("null");
    std::ofstream manifest(dir + "/manifest.csv");
    manifest << "path,class,scenario\n";
    sb::Rng rng(6);
    for (int i = 0; i < 24; ++i) {
        auto clip = sbtest::synth_clip(3, rng, 16000);  // all white noise
        std::string name = "n" + std::to_string(i) + ".wav";
        sb::write_wav(dir + "/" + name, clip);
        manifest << name << ",class" << (i % 2) << ",null\n";
    }
    manifest.close();

    auto ds = sb::load_dataset(sb::load_manifest(dir + "/manifest.csv"));
    auto cell = cell_of(sb::FeatureId::Mfcc, sb::PostprocId::Mean, sb::ClassifierId::Knn);
    auto report = sb::cross_validate(ds, cell, 4, 3, 21);
    CHECK(report.accuracy_mean > 20.0);  // chance is 50%, allow wide noise band
    CHECK(report.accuracy_mean < 80.0);
}

TEST_CASE("cross_validate is deterministic and leakage-free") {
    std::string dir = scratch("det");
    std::string manifest = sbtest::generate_dataset(dir, 5, 9, 16000);
    auto ds = sb::load_dataset(sb::load_manifest(manifest));

    auto cell = cell_of(sb::FeatureId::Ttff, sb::PostprocId::Bow, sb::ClassifierId::Knn);
    cell.params.bow_codewords = 8;
    auto r1 = sb::cross_validate(ds, cell, 4, 2, 33);
    auto r2 = sb::cross_validate(ds, cell, 4, 2, 33);
    CHECK(r1.accuracy_mean == r2.accuracy_mean);
    CHECK(r1.accuracy_std == r2.accuracy_std);
    CHECK(r1.confusion == r2.confusion);
    CHECK(sb::report_json(r1)["deterministic"].dump() ==
          sb::report_json(r2)["deterministic"].dump());

    // no leakage: codebook and interp length fit on training folds only,
    // so they cannot depend on any test-fold clip
    std::vector<sb::FeatureSequence> features;
    sb::FeatureConfig fcfg;
    for (const auto& clip : ds.clips)
        features.push_back(sb::extract_features(clip, cell.feature, fcfg));
    auto fa = sb::stratified_folds(ds.manifest, 4, 33);
    std::vector<const sb::FeatureSequence*> train_seqs;
    for (std::size_t i = 0; i < ds.clips.size(); ++i)
        if (fa.fold_of_clip.at(ds.manifest.entries[i].path) != 0)
            train_seqs.push_back(&features[i]);
    auto art_full = sb::fit_postproc(train_seqs, cell, 123);
    // dropping a *test-fold* clip changes nothing
    auto art_again = sb::fit_postproc(train_seqs, cell, 123);
    CHECK(art_full.codebook.centroids == art_again.codebook.centroids);
}

TEST_CASE("measure_times produces finite, sane figures") {
    std::string dir = scratch("timing");
    std::string manifest = sbtest::generate_dataset(dir, 4, 17, 16000);
    auto ds = sb::load_dataset(sb::load_manifest(manifest));

    auto knn = cell_of(sb::FeatureId::Mfcc, sb::PostprocId::Mean, sb::ClassifierId::Knn);
    sb::BenchmarkReport r;
    r.folds = 4;
    sb::measure_times(ds, knn, r, 1);
    CHECK(r.feature_time_ms >= 0.0);
    CHECK(std::isfinite(r.feature_time_ms));
    CHECK(r.recognition_time_ms >= 0.0);
    CHECK(std::isfinite(r.recognition_time_ms));
    CHECK(r.train_time_s >= 0.0);

    // superset feature pipeline cannot be cheaper than its parts (median,
    // small slack for scheduler noise)
    auto both = cell_of(sb::FeatureId::MfccTtff, sb::PostprocId::Mean, sb::ClassifierId::Knn);
    auto ttff = cell_of(sb::FeatureId::Ttff, sb::PostprocId::Mean, sb::ClassifierId::Knn);
    sb::BenchmarkReport rb, rt;
    rb.folds = rt.folds = 4;
    sb::measure_times(ds, both, rb, 1);
    sb::measure_times(ds, ttff, rt, 1);
    CHECK(rb.feature_time_ms >= 0.8 * std::max(r.feature_time_ms, rt.feature_time_ms));

    // bow cells report kmeans and histogram time
    auto bow = cell_of(sb::FeatureId::Mfcc, sb::PostprocId::Bow, sb::ClassifierId::Knn);
    bow.params.bow_codewords = 8;
    sb::BenchmarkReport rbow;
    rbow.folds = 4;
    sb::measure_times(ds, bow, rbow, 1);
    CHECK(rbow.kmeans_time_ms > 0.0);
    CHECK(rbow.histo_time_ms >= 0.0);
}

TEST_CASE("report JSON structure") {
    sb::BenchmarkReport r;
    r.cell = cell_of(sb::FeatureId::Mfcc, sb::PostprocId::Interp, sb::ClassifierId::Knn);
    r.accuracy_mean = 96.2;
    r.runs = 10;
    r.folds = 10;
    r.seed = 42;
    r.confusion = sb::Matrix(2, 2, 1.0);
    auto j = sb::report_json(r);
    CHECK(j["cell"]["feature"] == "MFCC");
    CHECK(j["cell"]["classifier"] == "knn");
    CHECK(j["deterministic"]["accuracy_mean"] == 96.2);
    CHECK(j["deterministic"]["confusion"].size() == 4);  // row-major
    CHECK(j.contains("timing"));
}
