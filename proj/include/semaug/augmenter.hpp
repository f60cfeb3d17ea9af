#pragma once

// Caption rewriting: prefix, suffix, supercategory replacement and compound.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semaug/coco.hpp"
#include "semaug/embedding.hpp"
#include "semaug/label_matcher.hpp"

namespace semaug {

enum class StrategyKind { Prefix, Suffix, Replacement, Compound };

inline constexpr std::array<StrategyKind, 4> kAllStrategies = {
    StrategyKind::Prefix, StrategyKind::Suffix, StrategyKind::Replacement, StrategyKind::Compound};

std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

struct AugmentationConfig {
    std::vector<std::string> prefixes = {"A cartoon of", "A grainy image of", "A black and white image of"};
    std::vector<std::string> suffixes = {"on a rainy day", "on a foggy night", "in the mountains", "near the sea"};
    /// Indexed by StrategyKind.
    std::array<double, 4> strategy_weights = {0.25, 0.25, 0.25, 0.25};
    double replacement_prob = 0.5;
    double min_score = kDefaultMinScore;

    /// Throws std::invalid_argument describing the first problem.
    void validate() const;

    /// Missing keys keep their defaults; weights are normalized to sum to 1.
    static AugmentationConfig from_json(const Json& j);
    Json to_json() const;
};

/// Deterministic stream of 64-bit draws. Either seeded (mt19937_64) or
/// scripted from a fixed word list, after which `fill` repeats. Every word
/// consumed is appended to trace().
class ChoiceSource {
public:
    explicit ChoiceSource(uint64_t seed);

    static ChoiceSource scripted(std::vector<uint64_t> words, uint64_t fill = 0);

    /// Independent stream for one record: run_seed ^ fingerprint(kind, id).
    static ChoiceSource for_record(uint64_t run_seed, std::string_view kind, int64_t id);

    uint64_t next_word();
    /// Uniform in [0, n); n must be positive. Consumes one word.
    std::size_t next_index(std::size_t n);
    /// Uniform in [0, 1) with 53-bit resolution. Consumes one word.
    double next_unit();

    const std::vector<uint64_t>& trace() const { return trace_; }

private:
    ChoiceSource() = default;

    std::mt19937_64 engine_;
    bool scripted_ = false;
    std::vector<uint64_t> script_;
    std::size_t cursor_ = 0;
    uint64_t fill_ = 0;
    std::vector<uint64_t> trace_;
};

struct Replacement {
    int64_t old_category_id = 0;
    int64_t new_category_id = 0;
    /// Byte span of the inserted category name in the final caption text.
    std::size_t start = 0;
    std::size_t end = 0;
    /// Caption text that was replaced (original casing).
    std::string replaced_text;

    bool operator==(const Replacement&) const = default;
};

struct AugmentedCaption {
    int64_t source_caption_id = 0;
    int64_t source_image_id = 0;
    std::string text;
    StrategyKind strategy = StrategyKind::Prefix;
    std::vector<Replacement> replacements;
    std::vector<int64_t> labels_after;  // ascending, unique
    std::vector<uint64_t> choice_trace;

    bool operator==(const AugmentedCaption&) const = default;

    Json to_json() const;
    static AugmentedCaption from_json(const Json& j);
};

struct ReplacementOutcome {
    std::string text;
    std::vector<Replacement> replacements;
    std::vector<int64_t> labels_after;

    bool operator==(const ReplacementOutcome&) const = default;
};

/// prefix + " " + caption, with the caption's first letter lowercased.
std::string apply_prefix(std::string_view caption, std::string_view prefix);

/// caption without trailing periods/whitespace + " " + suffix.
std::string apply_suffix(std::string_view caption, std::string_view suffix);

/// Swaps a random nonempty subset of labels for supercategory peers, splicing
/// each peer name over the caption word matched to the label. Labels without
/// an anchor word or without peers are left alone.
ReplacementOutcome apply_replacement(std::string_view caption, std::span<const Category> labels,
                                     std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                     const AugmentationConfig& cfg, ChoiceSource& choices);

/// Prefix, then suffix, then replacement; prefix and suffix drawn from cfg.
ReplacementOutcome apply_compound(std::string_view caption, std::span<const Category> labels,
                                  std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                  const AugmentationConfig& cfg, ChoiceSource& choices);

StrategyKind draw_strategy(const AugmentationConfig& cfg, ChoiceSource& choices);

AugmentedCaption augment_caption(const CaptionAnnotation& caption, std::span<const Category> labels,
                                 std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                 const AugmentationConfig& cfg, ChoiceSource& choices);

}  // namespace semaug
