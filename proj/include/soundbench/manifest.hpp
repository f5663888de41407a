#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

struct ManifestEntry {
    std::string path;        // resolved against the manifest directory
    std::string class_name;
    std::string scenario;
};

// Class ids are 1-based and follow first appearance order in the file,
// which keeps report columns reproducible across runs.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> class_names;

    int num_classes() const { return static_cast<int>(class_names.size()); }

    int label_of(const std::string& class_name) const {
        for (std::size_t i = 0; i < class_names.size(); ++i)
            if (class_names[i] == class_name) return static_cast<int>(i) + 1;
        throw ConfigError("unknown class name: " + class_name);
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

// CSV with header `path,class,scenario`. Relative paths are resolved
// against the manifest's own directory.
inline DatasetManifest load_manifest(const std::string& path, bool check_files = true) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty manifest");
    auto header = detail::split_csv_line(line);
    if (header.size() != 3 || header[0] != "path" || header[1] != "class" ||
        header[2] != "scenario")
        throw FormatError(path + ": expected header `path,class,scenario`");

    std::filesystem::path base = std::filesystem::path(path).parent_path();
    DatasetManifest m;
    std::set<std::string> seen_paths;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 3) throw FormatError(path + ": malformed row: " + line);
        std::filesystem::path p(f[0]);
        if (p.is_relative()) p = base / p;
        std::string resolved = p.string();
        if (!seen_paths.insert(resolved).second)
            throw FormatError(path + ": duplicate clip path: " + resolved);
        if (check_files && !std::filesystem::exists(p))
            throw FormatError(path + ": missing file referenced: " + resolved);
        if (std::find(m.class_names.begin(), m.class_names.end(), f[1]) == m.class_names.end())
            m.class_names.push_back(f[1]);
        m.entries.push_back({resolved, f[1], f[2]});
    }
    if (m.num_classes() < 2) throw FormatError(path + ": C >= 2 required");
    return m;
}

struct FoldAssignment {
    std::map<std::string, int> fold_of_clip;  // clip path -> fold in {0..k-1}
    int k = 0;
    std::uint64_t seed = 0;
};

// Per-class seeded shuffle followed by round-robin assignment. Fold sizes
// within one class differ by at most 1.
inline FoldAssignment stratified_folds(const DatasetManifest& manifest, int k,
                                       std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count k must be >= 2");
    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    for (int c = 0; c < manifest.num_classes(); ++c) {
        std::vector<std::string> clips;
        for (const auto& e : manifest.entries)
            if (e.class_name == manifest.class_names[c]) clips.push_back(e.path);
        Rng rng(seed * 1000003ull + static_cast<std::uint64_t>(c));
        rng.shuffle(clips);
        for (std::size_t i = 0; i < clips.size(); ++i)
            fa.fold_of_clip[clips[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fa;
}

}  // namespace sb
