#include "semaug/augmenter.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "semaug/hash.hpp"

namespace semaug {

namespace {

bool is_ascii_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

void check_phrases(const std::vector<std::string>& list, const char* what) {
    if (list.empty()) {
        throw std::invalid_argument(std::string(what) + " must not be empty");
    }
    for (const auto& s : list) {
        if (s.empty()) {
            throw std::invalid_argument(std::string(what) + " must not contain empty strings");
        }
    }
}

std::vector<int64_t> sorted_ids(std::span<const Category> labels) {
    std::set<int64_t> ids;
    for (const auto& c : labels) ids.insert(c.id);
    return {ids.begin(), ids.end()};
}

bool overlaps(const Token& t, const std::vector<Replacement>& done) {
    return std::any_of(done.begin(), done.end(), [&](const Replacement& r) { return t.start < r.end && r.start < t.end; });
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Prefix: return "prefix";
        case StrategyKind::Suffix: return "suffix";
        case StrategyKind::Replacement: return "replacement";
        case StrategyKind::Compound: return "compound";
    }
    return "prefix";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
    for (StrategyKind k : kAllStrategies) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

// ---- AugmentationConfig ----

void AugmentationConfig::validate() const {
    check_phrases(prefixes, "prefixes");
    check_phrases(suffixes, "suffixes");
    double sum = 0.0;
    for (double w : strategy_weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("strategy_weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("strategy_weights must sum to 1");
    }
    if (!(replacement_prob > 0.0 && replacement_prob <= 1.0)) {
        throw std::invalid_argument("replacement_prob must lie in (0, 1]");
    }
    if (!(min_score >= -1.0 && min_score <= 1.0)) {
        throw std::invalid_argument("min_score must lie in [-1, 1]");
    }
}

AugmentationConfig AugmentationConfig::from_json(const Json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("augmentation config must be an object");
    }
    AugmentationConfig cfg;
    for (auto& [key, value] : j.items()) {
        try {
            if (key == "prefixes") {
                cfg.prefixes = value.get<std::vector<std::string>>();
            } else if (key == "suffixes") {
                cfg.suffixes = value.get<std::vector<std::string>>();
            } else if (key == "strategy_weights") {
                if (value.is_array()) {
                    if (value.size() != 4) {
                        throw std::invalid_argument("strategy_weights needs exactly 4 entries");
                    }
                    for (std::size_t k = 0; k < 4; ++k) cfg.strategy_weights[k] = value[k].get<double>();
                } else if (value.is_object()) {
                    cfg.strategy_weights = {0, 0, 0, 0};
                    for (auto& [name, w] : value.items()) {
                        auto kind = parse_strategy(name);
                        if (!kind) throw std::invalid_argument("unknown strategy '" + name + "'");
                        cfg.strategy_weights[static_cast<std::size_t>(*kind)] = w.get<double>();
                    }
                } else {
                    throw std::invalid_argument("strategy_weights must be an array or object");
                }
            } else if (key == "replacement_prob") {
                cfg.replacement_prob = value.get<double>();
            } else if (key == "min_score") {
                cfg.min_score = value.get<double>();
            } else {
                throw std::invalid_argument("unknown augmentation key '" + key + "'");
            }
        } catch (const Json::exception& e) {
            throw std::invalid_argument("augmentation." + key + ": " + e.what());
        }
    }
    double sum = 0.0;
    for (double w : cfg.strategy_weights) sum += w;
    if (sum > 0.0 && std::isfinite(sum)) {
        for (double& w : cfg.strategy_weights) w /= sum;
    }
    cfg.validate();
    return cfg;
}

Json AugmentationConfig::to_json() const {
    Json weights = Json::object();
    for (StrategyKind k : kAllStrategies) {
        weights[std::string(to_string(k))] = strategy_weights[static_cast<std::size_t>(k)];
    }
    return {{"prefixes", prefixes},
            {"suffixes", suffixes},
            {"strategy_weights", weights},
            {"replacement_prob", replacement_prob},
            {"min_score", min_score}};
}

// ---- ChoiceSource ----

ChoiceSource::ChoiceSource(uint64_t seed) : engine_(seed) {}

ChoiceSource ChoiceSource::scripted(std::vector<uint64_t> words, uint64_t fill) {
    ChoiceSource s;
    s.scripted_ = true;
    s.script_ = std::move(words);
    s.fill_ = fill;
    return s;
}

ChoiceSource ChoiceSource::for_record(uint64_t run_seed, std::string_view kind, int64_t id) {
    return ChoiceSource(run_seed ^ fingerprint(kind, id));
}

uint64_t ChoiceSource::next_word() {
    uint64_t w;
    if (scripted_) {
        w = cursor_ < script_.size() ? script_[cursor_] : fill_;
        ++cursor_;
    } else {
        w = engine_();
    }
    trace_.push_back(w);
    return w;
}

std::size_t ChoiceSource::next_index(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("next_index: empty range");
    }
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_word()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

double ChoiceSource::next_unit() {
    return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
}

// ---- AugmentedCaption ----

Json AugmentedCaption::to_json() const {
    Json reps = Json::array();
    for (const auto& r : replacements) {
        reps.push_back({{"old_category_id", r.old_category_id},
                        {"new_category_id", r.new_category_id},
                        {"span", {r.start, r.end}},
                        {"replaced_text", r.replaced_text}});
    }
    return {{"source_caption_id", source_caption_id},
            {"source_image_id", source_image_id},
            {"text", text},
            {"strategy", to_string(strategy)},
            {"replacements", reps},
            {"labels_after", labels_after},
            {"choice_trace", choice_trace}};
}

AugmentedCaption AugmentedCaption::from_json(const Json& j) {
    AugmentedCaption a;
    a.source_caption_id = j.at("source_caption_id").get<int64_t>();
    a.source_image_id = j.value("source_image_id", int64_t{0});
    a.text = j.at("text").get<std::string>();
    auto kind = parse_strategy(j.at("strategy").get<std::string>());
    if (!kind) {
        throw std::invalid_argument("unknown strategy '" + j.at("strategy").get<std::string>() + "'");
    }
    a.strategy = *kind;
    for (const auto& r : j.at("replacements")) {
        a.replacements.push_back({r.at("old_category_id").get<int64_t>(), r.at("new_category_id").get<int64_t>(),
                                  r.at("span").at(0).get<std::size_t>(), r.at("span").at(1).get<std::size_t>(),
                                  r.at("replaced_text").get<std::string>()});
    }
    a.labels_after = j.at("labels_after").get<std::vector<int64_t>>();
    a.choice_trace = j.at("choice_trace").get<std::vector<uint64_t>>();
    return a;
}

// ---- strategies ----

std::string apply_prefix(std::string_view caption, std::string_view prefix) {
    if (prefix.empty()) {
        throw std::invalid_argument("apply_prefix: empty prefix");
    }
    if (caption.empty()) {
        return std::string(prefix);
    }
    std::string body(caption);
    auto first = std::find_if(body.begin(), body.end(), is_ascii_alpha);
    if (first != body.end() && *first >= 'A' && *first <= 'Z') {
        *first = static_cast<char>(*first - 'A' + 'a');
    }
    return std::string(prefix) + " " + body;
}

std::string apply_suffix(std::string_view caption, std::string_view suffix) {
    if (suffix.empty()) {
        throw std::invalid_argument("apply_suffix: empty suffix");
    }
    std::size_t end = caption.size();
    while (end > 0) {
        const char c = caption[end - 1];
        if (c == '.' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            --end;
        } else {
            break;
        }
    }
    if (end == 0) {
        return std::string(suffix);
    }
    return std::string(caption.substr(0, end)) + " " + std::string(suffix);
}

ReplacementOutcome apply_replacement(std::string_view caption, std::span<const Category> labels,
                                     std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                     const AugmentationConfig& cfg, ChoiceSource& choices) {
    ReplacementOutcome out{std::string(caption), {}, sorted_ids(labels)};
    if (labels.empty()) {
        return out;
    }

    std::vector<const Category*> ordered;
    for (int64_t id : out.labels_after) {
        auto it = std::find_if(labels.begin(), labels.end(), [&](const Category& c) { return c.id == id; });
        ordered.push_back(&*it);
    }

    // Selection round: one Bernoulli draw per label, lowest id forced if none hit.
    std::vector<const Category*> selected;
    for (const Category* c : ordered) {
        if (choices.next_unit() < cfg.replacement_prob) {
            selected.push_back(c);
        }
    }
    if (selected.empty()) {
        selected.push_back(ordered.front());
    }

    for (const Category* label : selected) {
        std::vector<Token> candidates;
        for (Token& t : tokenize(out.text)) {
            if (!overlaps(t, out.replacements)) candidates.push_back(std::move(t));
        }
        std::optional<MatchResult> anchor;
        try {
            anchor = match_label_among(candidates, label->name, provider, cfg.min_score);
        } catch (const LabelOutOfVocabulary&) {
            continue;
        }
        if (!anchor) {
            continue;
        }
        std::vector<Category> peers;
        try {
            peers = supercategory_peers(taxonomy, label->id);
        } catch (const CocoError&) {
            continue;
        }
        if (peers.empty()) {
            continue;
        }
        const Category& peer = peers[choices.next_index(peers.size())];

        const std::size_t start = anchor->token.start;
        const std::size_t old_len = anchor->token.end - start;
        const std::string replaced = out.text.substr(start, old_len);
        out.text.replace(start, old_len, peer.name);

        const auto shift = static_cast<std::ptrdiff_t>(peer.name.size()) - static_cast<std::ptrdiff_t>(old_len);
        for (Replacement& r : out.replacements) {
            if (r.start >= start + old_len) {
                r.start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(r.start) + shift);
                r.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(r.end) + shift);
            }
        }
        out.replacements.push_back({label->id, peer.id, start, start + peer.name.size(), replaced});
    }

    std::set<int64_t> after(out.labels_after.begin(), out.labels_after.end());
    for (const auto& r : out.replacements) after.erase(r.old_category_id);
    for (const auto& r : out.replacements) after.insert(r.new_category_id);
    out.labels_after.assign(after.begin(), after.end());
    return out;
}

ReplacementOutcome apply_compound(std::string_view caption, std::span<const Category> labels,
                                  std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                  const AugmentationConfig& cfg, ChoiceSource& choices) {
    const std::string& prefix = cfg.prefixes.at(choices.next_index(cfg.prefixes.size()));
    const std::string& suffix = cfg.suffixes.at(choices.next_index(cfg.suffixes.size()));
    const std::string framed = apply_suffix(apply_prefix(caption, prefix), suffix);
    return apply_replacement(framed, labels, taxonomy, provider, cfg, choices);
}

StrategyKind draw_strategy(const AugmentationConfig& cfg, ChoiceSource& choices) {
    const double u = choices.next_unit();
    double cumulative = 0.0;
    std::optional<StrategyKind> last_positive;
    for (StrategyKind k : kAllStrategies) {
        const double w = cfg.strategy_weights[static_cast<std::size_t>(k)];
        if (w <= 0.0) continue;
        cumulative += w;
        last_positive = k;
        if (u < cumulative) return k;
    }
    if (!last_positive) {
        throw std::invalid_argument("all strategy weights are zero");
    }
    return *last_positive;  // rounding left cumulative just under 1
}

AugmentedCaption augment_caption(const CaptionAnnotation& caption, std::span<const Category> labels,
                                 std::span<const Category> taxonomy, const EmbeddingProvider& provider,
                                 const AugmentationConfig& cfg, ChoiceSource& choices) {
    const std::size_t trace_start = choices.trace().size();

    AugmentedCaption out;
    out.source_caption_id = caption.id;
    out.source_image_id = caption.image_id;
    out.strategy = draw_strategy(cfg, choices);

    switch (out.strategy) {
        case StrategyKind::Prefix:
            out.text = apply_prefix(caption.caption, cfg.prefixes.at(choices.next_index(cfg.prefixes.size())));
            out.labels_after = sorted_ids(labels);
            break;
        case StrategyKind::Suffix:
            out.text = apply_suffix(caption.caption, cfg.suffixes.at(choices.next_index(cfg.suffixes.size())));
            out.labels_after = sorted_ids(labels);
            break;
        case StrategyKind::Replacement:
        case StrategyKind::Compound: {
            ReplacementOutcome r = out.strategy == StrategyKind::Replacement
                                       ? apply_replacement(caption.caption, labels, taxonomy, provider, cfg, choices)
                                       : apply_compound(caption.caption, labels, taxonomy, provider, cfg, choices);
            out.text = std::move(r.text);
            out.replacements = std::move(r.replacements);
            out.labels_after = std::move(r.labels_after);
            break;
        }
    }

    const auto& trace = choices.trace();
    out.choice_trace.assign(trace.begin() + static_cast<std::ptrdiff_t>(trace_start), trace.end());
    return out;
}

}  // namespace semaug
