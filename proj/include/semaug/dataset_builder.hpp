#pragma once

// Pipeline orchestration: plan caption augmentations, generate their images,
// write the augmented COCO dataset and mix it with the original.
//
// Output layout under out_dir:
//   images/aug_{ordinal:06}.png
//   annotations.json   augmented dataset (COCO)
//   failures.json      jobs that produced no image
//   manifest.json      MixManifest

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semaug/augmenter.hpp"
#include "semaug/coco.hpp"
#include "semaug/embedding.hpp"
#include "semaug/generation_client.hpp"

namespace semaug {

enum class BuildErrorKind {
    InvalidRatio,
    NoCaptions,  // no image in the dataset has a caption
    OutputNotWritable,
    AllJobsFailed,
    RatioUnsatisfiable,
    IdCollision,
    MalformedManifest,
};

std::string_view to_string(BuildErrorKind kind);

class BuildError : public std::runtime_error {
public:
    BuildError(BuildErrorKind kind, const std::string& message);
    BuildErrorKind kind() const { return kind_; }

private:
    BuildErrorKind kind_;
};

/// floor(ratio * n_images), tolerant of representation error in `ratio`.
std::size_t augmented_count(double ratio, std::size_t n_images);

struct GenerationSettings {
    int width = 512;
    int height = 512;
    int steps = 30;
    double guidance_scale = 7.5;
};

struct GenerationJob {
    std::size_t ordinal = 0;
    AugmentedCaption augmented;
    GenerationRequest request;
    std::string output_file;  // relative to out_dir
};

/// Seed for the image of job `ordinal`: fnv1a64("<ordinal>:<run_seed>").
uint64_t generation_seed(std::size_t ordinal, uint64_t run_seed);

/// floor(ratio * |images|) jobs. Images are cycled in ascending id order; each
/// visit draws one of the image's captions from the image's choice stream and
/// augments it with the caption's own stream. Images without captions are
/// skipped (a warning is appended) and the next image fills in.
std::vector<GenerationJob> plan_augmentation(const Dataset& d, const EmbeddingProvider& provider,
                                             const AugmentationConfig& cfg, double ratio, uint64_t run_seed,
                                             const GenerationSettings& settings = {},
                                             std::vector<std::string>* warnings = nullptr);

struct FailureRecord {
    std::size_t ordinal = 0;
    std::string output_file;
    std::string prompt;
    std::string error_kind;
    std::string message;
};

struct BuildResult {
    Dataset augmented;
    std::vector<FailureRecord> failures;
};

/// Generates every job's image, writes images/, annotations.json and
/// failures.json under out_dir. Augmented image ids start after the largest
/// original image id: id = max_original_id + ordinal + 1.
BuildResult build_augmented_dataset(const Dataset& original, std::span<const GenerationJob> jobs,
                                    const BackendConfig& backend, const std::filesystem::path& out_dir);

enum class EntrySource { Original, Augmented };

struct ManifestEntry {
    int64_t image_id = 0;
    std::string image_file;
    std::vector<int64_t> labels;
    EntrySource source = EntrySource::Original;
    std::optional<StrategyKind> strategy;
    std::optional<int64_t> source_caption_id;

    bool operator==(const ManifestEntry&) const = default;
};

struct MixManifest {
    std::vector<ManifestEntry> entries;
    double ratio = 0.0;
    uint64_t run_seed = 0;

    bool operator==(const MixManifest&) const = default;

    Json to_json() const;
    static MixManifest from_json(const Json& j);
};

enum class ShortfallPolicy {
    Reject,    // fewer augmented images than the ratio needs -> RatioUnsatisfiable
    Tolerate,  // use what exists (a build with failed jobs)
};

/// All originals plus the first floor(ratio * |originals|) augmented images
/// (ascending id), shuffled deterministically by run_seed.
MixManifest mix(const Dataset& original, const Dataset& augmented, double ratio, uint64_t run_seed,
                ShortfallPolicy policy = ShortfallPolicy::Reject);

struct CategoryCounts {
    std::size_t original = 0;
    std::size_t augmented = 0;
};

struct StatsReport {
    std::size_t original_count = 0;
    std::size_t augmented_count = 0;
    std::map<std::string, std::size_t> per_strategy;  // every strategy name present
    std::map<int64_t, CategoryCounts> per_category;   // entries carrying the label
    /// Share of mixed entries carrying the label minus share of original entries.
    std::map<int64_t, double> frequency_delta;

    Json to_json() const;
    std::string summary(std::span<const Category> taxonomy = {}) const;
};

StatsReport stats(const MixManifest& manifest);

/// Writes through a temporary file, then renames over `path`.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace semaug
