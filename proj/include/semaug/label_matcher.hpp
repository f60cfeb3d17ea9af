#pragma once

// Finds the caption word that stands for a class label ("woman" for person).

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semaug/embedding.hpp"

namespace semaug {

inline constexpr double kDefaultMinScore = 0.35;

struct MatchResult {
    Token token;
    double score = 0.0;
    std::string label;
};

class LabelOutOfVocabulary : public std::runtime_error {
public:
    explicit LabelOutOfVocabulary(std::string label);
    const std::string& label() const { return label_; }

private:
    std::string label_;
};

/// Highest-similarity in-vocabulary token of `caption` against the label's
/// phrase vector. Ties go to the earliest token. Returns nullopt when no token
/// reaches `min_score` or every token is out of vocabulary.
std::optional<MatchResult> match_label_word(std::string_view caption, std::string_view label,
                                            const EmbeddingProvider& provider,
                                            double min_score = kDefaultMinScore);

/// Same search restricted to a given candidate token list (tokens must come
/// from one caption, in offset order).
std::optional<MatchResult> match_label_among(std::span<const Token> candidates, std::string_view label,
                                             const EmbeddingProvider& provider,
                                             double min_score = kDefaultMinScore);

}  // namespace semaug
