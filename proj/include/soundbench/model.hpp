#pragma once

#include <cstring>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "soundbench/binio.hpp"
#include "soundbench/core.hpp"
#include "soundbench/gmm.hpp"
#include "soundbench/hmm.hpp"
#include "soundbench/knn.hpp"
#include "soundbench/qnn.hpp"
#include "soundbench/svm.hpp"

namespace sb {

using TrainedModel = std::variant<KnnStore, QnnModel, SvmModel, GmmSet, HmmSet>;

// Input to classify: a pooled fixed-length vector or a T x d sequence.
using FeatureInput = std::variant<std::vector<double>, Matrix>;

namespace detail {

inline void write_matrix(std::ostream& out, const Matrix& m) {
    io::write_u32(out, static_cast<std::uint32_t>(m.rows));
    io::write_u32(out, static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) io::write_f64(out, v);
}

inline Matrix read_matrix(std::istream& in) {
    std::uint32_t r = io::read_u32(in), c = io::read_u32(in);
    Matrix m(r, c);
    for (double& v : m.data) v = io::read_f64(in);
    return m;
}

inline void write_gmm(std::ostream& out, const Gmm& g, CovKind kind) {
    io::write_u32(out, static_cast<std::uint32_t>(g.components.size()));
    std::uint32_t d = static_cast<std::uint32_t>(g.components[0].mean.size());
    io::write_u32(out, d);
    for (std::size_t m = 0; m < g.components.size(); ++m) {
        io::write_f64(out, g.weights[m]);
        const auto& c = g.components[m];
        for (double v : c.mean) io::write_f64(out, v);
        if (kind == CovKind::Diagonal) {
            for (double v : c.diag_var) io::write_f64(out, v);
        } else {
            for (double v : c.full_cov.data) io::write_f64(out, v);
        }
    }
}

inline Gmm read_gmm(std::istream& in, CovKind kind) {
    std::uint32_t m_count = io::read_u32(in);
    std::uint32_t d = io::read_u32(in);
    Gmm g;
    for (std::uint32_t m = 0; m < m_count; ++m) {
        g.weights.push_back(io::read_f64(in));
        GaussianComponent c;
        c.cov_kind = kind;
        c.mean.resize(d);
        for (double& v : c.mean) v = io::read_f64(in);
        if (kind == CovKind::Diagonal) {
            c.diag_var.resize(d);
            for (double& v : c.diag_var) v = io::read_f64(in);
        } else {
            c.full_cov = Matrix(d, d);
            for (double& v : c.full_cov.data) v = io::read_f64(in);
        }
        c.finalize();
        g.components.push_back(std::move(c));
    }
    return g;
}

}  // namespace detail

// Canonical model container. Magic "NMDL", version u16, variant tag u8,
// then little-endian 64-bit floats / 32-bit integers in field order.
// The byte length of this serialization is the model-memory metric.
inline void serialize_model(std::ostream& out, const TrainedModel& model) {
    out.write("NMDL", 4);
    io::write_u16(out, 1);
    if (const auto* knn = std::get_if<KnnStore>(&model)) {
        io::write_u8(out, 0);
        io::write_u32(out, static_cast<std::uint32_t>(knn->k));
        io::write_u32(out, static_cast<std::uint32_t>(knn->labels.size()));
        for (int l : knn->labels) io::write_u32(out, static_cast<std::uint32_t>(l));
        detail::write_matrix(out, knn->vectors);
    } else if (const auto* qnn = std::get_if<QnnModel>(&model)) {
        io::write_u8(out, 1);
        io::write_u32(out, static_cast<std::uint32_t>(qnn->parts));
        io::write_u32(out, static_cast<std::uint32_t>(qnn->codewords));
        io::write_u8(out, qnn->conventional_distance ? 1 : 0);
        io::write_u32(out, static_cast<std::uint32_t>(qnn->part_offsets.size()));
        for (std::size_t o : qnn->part_offsets) io::write_u32(out, static_cast<std::uint32_t>(o));
        for (const auto& cb : qnn->codebooks) detail::write_matrix(out, cb.centroids);
        io::write_u32(out, static_cast<std::uint32_t>(qnn->labels.size()));
        for (int l : qnn->labels) io::write_u32(out, static_cast<std::uint32_t>(l));
        for (std::uint32_t c : qnn->codes) io::write_u32(out, c);
    } else if (const auto* svm = std::get_if<SvmModel>(&model)) {
        io::write_u8(out, 2);
        io::write_u8(out, static_cast<std::uint8_t>(svm->kernel.kind));
        io::write_f64(out, svm->kernel.gamma);
        io::write_f64(out, svm->kernel.coef0);
        io::write_u32(out, static_cast<std::uint32_t>(svm->kernel.degree));
        io::write_f64(out, svm->box);
        io::write_u32(out, static_cast<std::uint32_t>(svm->num_classes));
        io::write_u32(out, static_cast<std::uint32_t>(svm->machines.size()));
        for (const auto& m : svm->machines) {
            io::write_u32(out, static_cast<std::uint32_t>(m.pos_class));
            io::write_u32(out, static_cast<std::uint32_t>(m.neg_class));
            io::write_f64(out, m.bias);
            io::write_u32(out, static_cast<std::uint32_t>(m.coef.size()));
            for (double v : m.coef) io::write_f64(out, v);
            detail::write_matrix(out, m.support_vectors);
        }
    } else if (const auto* gmm = std::get_if<GmmSet>(&model)) {
        io::write_u8(out, 3);
        io::write_u8(out, gmm->cov_kind == CovKind::Diagonal ? 0 : 1);
        io::write_u32(out, static_cast<std::uint32_t>(gmm->num_components));
        io::write_u32(out, static_cast<std::uint32_t>(gmm->per_class.size()));
        for (const auto& g : gmm->per_class) detail::write_gmm(out, g, gmm->cov_kind);
    } else if (const auto* hmm = std::get_if<HmmSet>(&model)) {
        io::write_u8(out, 4);
        io::write_u8(out, hmm->cov_kind == CovKind::Diagonal ? 0 : 1);
        io::write_u32(out, static_cast<std::uint32_t>(hmm->num_states));
        io::write_u32(out, static_cast<std::uint32_t>(hmm->num_components));
        io::write_u32(out, static_cast<std::uint32_t>(hmm->per_class.size()));
        for (const auto& h : hmm->per_class) {
            io::write_u32(out, static_cast<std::uint32_t>(h.num_states));
            // band entries: self-loop and advance probability per state
            for (int s = 0; s + 1 < h.num_states; ++s) {
                io::write_f64(out, h.log_trans.at(s, s));
                io::write_f64(out, h.log_trans.at(s, s + 1));
            }
            for (const auto& e : h.emissions) detail::write_gmm(out, e, hmm->cov_kind);
        }
    }
}

inline TrainedModel deserialize_model(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NMDL", 4) != 0) throw FormatError("bad model magic");
    if (io::read_u16(in) != 1) throw FormatError("unsupported model version");
    std::uint8_t tag = io::read_u8(in);
    switch (tag) {
        case 0: {
            KnnStore knn;
            knn.k = static_cast<int>(io::read_u32(in));
            std::uint32_t n = io::read_u32(in);
            knn.labels.resize(n);
            for (int& l : knn.labels) l = static_cast<int>(io::read_u32(in));
            knn.vectors = detail::read_matrix(in);
            return knn;
        }
        case 1: {
            QnnModel qnn;
            qnn.parts = io::read_u32(in);
            qnn.codewords = io::read_u32(in);
            qnn.conventional_distance = io::read_u8(in) != 0;
            std::uint32_t no = io::read_u32(in);
            qnn.part_offsets.resize(no);
            for (auto& o : qnn.part_offsets) o = io::read_u32(in);
            for (std::size_t p = 0; p < qnn.parts; ++p) {
                Codebook cb;
                cb.centroids = detail::read_matrix(in);
                cb.k = cb.centroids.rows;
                qnn.codebooks.push_back(std::move(cb));
            }
            std::uint32_t n = io::read_u32(in);
            qnn.labels.resize(n);
            for (int& l : qnn.labels) l = static_cast<int>(io::read_u32(in));
            qnn.codes.resize(static_cast<std::size_t>(n) * qnn.parts);
            for (auto& c : qnn.codes) c = io::read_u32(in);
            detail::qnn_build_tables(qnn);
            return qnn;
        }
        case 2: {
            SvmModel svm;
            svm.kernel.kind = static_cast<KernelKind>(io::read_u8(in));
            svm.kernel.gamma = io::read_f64(in);
            svm.kernel.coef0 = io::read_f64(in);
            svm.kernel.degree = static_cast<int>(io::read_u32(in));
            svm.box = io::read_f64(in);
            svm.num_classes = static_cast<int>(io::read_u32(in));
            std::uint32_t nm = io::read_u32(in);
            for (std::uint32_t i = 0; i < nm; ++i) {
                SvmMachine m;
                m.pos_class = static_cast<int>(io::read_u32(in));
                m.neg_class = static_cast<int>(io::read_u32(in));
                m.bias = io::read_f64(in);
                std::uint32_t nsv = io::read_u32(in);
                m.coef.resize(nsv);
                for (double& v : m.coef) v = io::read_f64(in);
                m.support_vectors = detail::read_matrix(in);
                svm.machines.push_back(std::move(m));
            }
            return svm;
        }
        case 3: {
            GmmSet set;
            set.cov_kind = io::read_u8(in) == 0 ? CovKind::Diagonal : CovKind::Full;
            set.num_components = static_cast<int>(io::read_u32(in));
            std::uint32_t c = io::read_u32(in);
            for (std::uint32_t i = 0; i < c; ++i)
                set.per_class.push_back(detail::read_gmm(in, set.cov_kind));
            return set;
        }
        case 4: {
            HmmSet set;
            set.cov_kind = io::read_u8(in) == 0 ? CovKind::Diagonal : CovKind::Full;
            set.num_states = static_cast<int>(io::read_u32(in));
            set.num_components = static_cast<int>(io::read_u32(in));
            std::uint32_t c = io::read_u32(in);
            for (std::uint32_t i = 0; i < c; ++i) {
                Hmm h;
                h.num_states = static_cast<int>(io::read_u32(in));
                std::size_t s_count = static_cast<std::size_t>(h.num_states);
                h.log_trans =
                    Matrix(s_count, s_count, -std::numeric_limits<double>::infinity());
                for (std::size_t s = 0; s + 1 < s_count; ++s) {
                    h.log_trans.at(s, s) = io::read_f64(in);
                    h.log_trans.at(s, s + 1) = io::read_f64(in);
                }
                h.log_trans.at(s_count - 1, s_count - 1) = 0.0;
                for (std::size_t s = 0; s < s_count; ++s)
                    h.emissions.push_back(detail::read_gmm(in, set.cov_kind));
                set.per_class.push_back(std::move(h));
            }
            return set;
        }
    }
    throw FormatError("unknown model variant tag");
}

inline std::string serialize_model_bytes(const TrainedModel& model) {
    std::ostringstream out(std::ios::binary);
    serialize_model(out, model);
    return out.str();
}

inline std::size_t model_memory(const TrainedModel& model) {
    return serialize_model_bytes(model).size();
}

inline void save_model(const std::string& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write model file: " + path);
    serialize_model(out, model);
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);
    return deserialize_model(in);
}

namespace detail {

// argmax with lowest-class-id tie rule
inline int argmax_class(const std::vector<double>& g) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < g.size(); ++c)
        if (g[c] > g[best]) best = c;
    return static_cast<int>(best) + 1;
}

}  // namespace detail

// Shared decision rule: argmax over per-class scores. Representation
// kind must match the model variant (GMM accepts both: a pooled vector
// is scored as a length-1 sequence).
inline int classify(const TrainedModel& model, const FeatureInput& input) {
    if (const auto* knn = std::get_if<KnnStore>(&model)) {
        const auto* v = std::get_if<std::vector<double>>(&input);
        if (!v) throw ConfigError("classify: kNN requires a fixed-length vector");
        return knn_predict(*knn, *v).label;
    }
    if (const auto* qnn = std::get_if<QnnModel>(&model)) {
        const auto* v = std::get_if<std::vector<double>>(&input);
        if (!v) throw ConfigError("classify: QNN requires a fixed-length vector");
        return qnn_predict(*qnn, *v);
    }
    if (const auto* svm = std::get_if<SvmModel>(&model)) {
        const auto* v = std::get_if<std::vector<double>>(&input);
        if (!v) throw ConfigError("classify: SVM requires a fixed-length vector");
        return svm_predict(*svm, *v).label;
    }
    if (const auto* gmm = std::get_if<GmmSet>(&model)) {
        if (const auto* seq = std::get_if<Matrix>(&input))
            return detail::argmax_class(gmm_loglik(*gmm, *seq));
        const auto& v = std::get<std::vector<double>>(input);
        Matrix seq(1, v.size());
        seq.data = v;
        return detail::argmax_class(gmm_loglik(*gmm, seq));
    }
    const auto& hmm = std::get<HmmSet>(model);
    const auto* seq = std::get_if<Matrix>(&input);
    if (!seq) throw ConfigError("classify: HMM requires a frame sequence");
    return detail::argmax_class(hmm_loglik(hmm, *seq));
}

}  // namespace sb
