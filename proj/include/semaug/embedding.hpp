#pragma once

// Word vectors, caption tokenization and cosine similarity.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semaug {

using Vector = std::vector<double>;

enum class EmbeddingErrorKind {
    EmptyFile,
    DimensionMismatch,
    UnparsableFloat,
    DuplicateWord,
    DegenerateTable,  // every vector has zero norm
    ZeroVector,
    AllTokensOutOfVocabulary,
};

class EmbeddingError : public std::runtime_error {
public:
    EmbeddingError(EmbeddingErrorKind kind, const std::string& message, std::size_t line = 0, std::string word = {});

    EmbeddingErrorKind kind() const { return kind_; }
    /// 1-based line number for load errors, 0 otherwise.
    std::size_t line() const { return line_; }
    const std::string& word() const { return word_; }

private:
    EmbeddingErrorKind kind_;
    std::size_t line_;
    std::string word_;
};

/// Source of word vectors for label matching. The static table below is the
/// default; any other backend only needs to answer per-word lookups.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::optional<Vector> word_vector(std::string_view word) const = 0;
};

class EmbeddingTable final : public EmbeddingProvider {
public:
    explicit EmbeddingTable(std::size_t dimension);

    /// Adds a word; throws DuplicateWord / DimensionMismatch.
    void insert(std::string word, Vector v);

    std::size_t dimension() const override { return dimension_; }
    std::optional<Vector> word_vector(std::string_view word) const override;

    const Vector* find(std::string_view word) const;
    std::size_t size() const { return order_.size(); }
    /// Words in load order.
    const std::vector<std::string>& words() const { return order_; }

    bool operator==(const EmbeddingTable& other) const;

private:
    std::size_t dimension_;
    std::map<std::string, Vector, std::less<>> entries_;
    std::vector<std::string> order_;
};

/// Reads `word v1 ... vD` records. D is taken from the first record; words are
/// lowercased. Blank lines are skipped.
EmbeddingTable load_embeddings(std::istream& in);

/// Byte offsets into the source caption, half-open.
struct Token {
    std::string text;
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const Token&) const = default;
};

/// Splits on Unicode whitespace, strips leading/trailing ASCII punctuation,
/// lowercases ASCII letters and drops empty tokens.
std::vector<Token> tokenize(std::string_view caption);

/// u.v / (|u| |v|), clamped to [-1, 1].
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Mean vector of the in-vocabulary tokens of `phrase`.
Vector embed_phrase(const EmbeddingProvider& provider, std::string_view phrase);

}  // namespace semaug
