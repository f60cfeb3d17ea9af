#pragma once

// Shared test plumbing: fixture paths, cached fixture loads, scratch dirs.

#include <atomic>
#include <cmath>
#include <optional>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "semaug/coco.hpp"
#include "semaug/dataset_builder.hpp"
#include "semaug/embedding.hpp"

namespace semaug::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(SEMAUG_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

inline const Dataset& fixture() {
    static const Dataset d = parse_dataset(slurp(data_path("coco_fixture.json")));
    return d;
}

inline const EmbeddingTable& vectors() {
    static const EmbeddingTable t = [] {
        std::ifstream in(data_path("vectors_50d.txt"));
        return load_embeddings(in);
    }();
    return t;
}

inline const std::vector<Category>& coco_taxonomy() {
    static const std::vector<Category> cats = [] {
        return parse_dataset(slurp(data_path("coco_categories.json"))).taxonomy;
    }();
    return cats;
}

struct CaptionLabelPair {
    std::string caption;
    std::string label;
};

/// 200 deterministic caption/label pairs from the fixture: every caption paired
/// with each of its image's labels, then captions paired with labels from other
/// images until 200 are reached.
inline std::vector<CaptionLabelPair> matcher_pairs(std::size_t want = 200) {
    const Dataset& d = fixture();
    std::vector<CaptionLabelPair> out;
    for (const auto& c : d.captions) {
        for (const auto& cat : labels_for_image(d, c.image_id)) {
            if (out.size() < want) out.push_back({c.caption, cat.name});
        }
    }
    for (std::size_t i = 0; out.size() < want; ++i) {
        const auto& c = d.captions[i % d.captions.size()];
        const auto& cat = d.taxonomy[(i * 37) % d.taxonomy.size()];
        out.push_back({c.caption, cat.name});
    }
    return out;
}

struct OracleMatch {
    std::size_t start = 0;
    std::size_t end = 0;
    double score = 0.0;
};

/// Exhaustive recomputation: every in-vocabulary token against the mean label
/// vector, written without the library's similarity or phrase code.
inline std::optional<OracleMatch> oracle_match(const std::string& caption, const std::string& label,
                                               const EmbeddingTable& table, double min_score) {
    std::vector<double> lv(table.dimension(), 0.0);
    int n = 0;
    for (const auto& t : tokenize(label)) {
        if (const Vector* v = table.find(t.text)) {
            for (std::size_t k = 0; k < lv.size(); ++k) lv[k] += (*v)[k];
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    for (double& x : lv) x /= n;
    double ln = 0;
    for (double x : lv) ln += x * x;

    std::vector<OracleMatch> all;
    for (const auto& t : tokenize(caption)) {
        const Vector* v = table.find(t.text);
        if (!v) continue;
        double dot = 0, vn = 0;
        for (std::size_t k = 0; k < lv.size(); ++k) {
            dot += (*v)[k] * lv[k];
            vn += (*v)[k] * (*v)[k];
        }
        if (vn == 0) continue;
        all.push_back({t.start, t.end, std::max(-1.0, std::min(1.0, dot / std::sqrt(vn * ln)))});
    }
    std::optional<OracleMatch> best;
    for (const auto& m : all) {
        if (!best || m.score > best->score) best = m;
    }
    if (best && best->score >= min_score) return best;
    return std::nullopt;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("semaug_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

}  // namespace semaug::test
