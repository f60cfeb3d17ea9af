#include "semaug/label_matcher.hpp"

#include <algorithm>
#include <stdexcept>

namespace semaug {

LabelOutOfVocabulary::LabelOutOfVocabulary(std::string label)
    : std::runtime_error("label '" + label + "' has no in-vocabulary token"), label_(std::move(label)) {}

std::optional<MatchResult> match_label_among(std::span<const Token> candidates, std::string_view label,
                                             const EmbeddingProvider& provider, double min_score) {
    if (!(min_score >= -1.0 && min_score <= 1.0)) {
        throw std::invalid_argument("min_score must lie in [-1, 1]");
    }
    Vector label_vec;
    try {
        label_vec = embed_phrase(provider, label);
    } catch (const EmbeddingError& e) {
        if (e.kind() == EmbeddingErrorKind::AllTokensOutOfVocabulary) {
            throw LabelOutOfVocabulary(std::string(label));
        }
        throw;
    }
    if (std::all_of(label_vec.begin(), label_vec.end(), [](double x) { return x == 0.0; })) {
        throw LabelOutOfVocabulary(std::string(label));
    }

    std::optional<MatchResult> best;
    for (const Token& t : candidates) {
        auto v = provider.word_vector(t.text);
        if (!v) {
            continue;
        }
        double score;
        try {
            score = cosine_similarity(*v, label_vec);
        } catch (const EmbeddingError& e) {
            if (e.kind() == EmbeddingErrorKind::ZeroVector) {
                continue;  // a zero vector has no direction to compare
            }
            throw;
        }
        // Strict comparison keeps the earliest token on ties.
        if (!best || score > best->score) {
            best = MatchResult{t, score, std::string(label)};
        }
    }
    if (best && best->score >= min_score) {
        return best;
    }
    return std::nullopt;
}

std::optional<MatchResult> match_label_word(std::string_view caption, std::string_view label,
                                            const EmbeddingProvider& provider, double min_score) {
    const auto tokens = tokenize(caption);
    return match_label_among(tokens, label, provider, min_score);
}

}  // namespace semaug
