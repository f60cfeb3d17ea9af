#include "semaug/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace semaug {

namespace {

bool ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

bool ascii_punct(unsigned char c) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool unicode_space(char32_t cp) {
    switch (cp) {
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A) || (cp < 0x80 && ascii_space(static_cast<unsigned char>(cp)));
    }
}

// Length in bytes of the whitespace character at s[i], or 0 if none.
// Malformed UTF-8 is treated as non-space.
std::size_t space_length(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        return ascii_space(b0) ? 1 : 0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else {
        return 0;  // 4-byte sequences contain no whitespace
    }
    if (i + len > s.size()) {
        return 0;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            return 0;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    return unicode_space(cp) ? len : 0;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) fields.push_back(line.substr(i, j - i));
        i = j;
    }
    return fields;
}

}  // namespace

EmbeddingError::EmbeddingError(EmbeddingErrorKind kind, const std::string& message, std::size_t line, std::string word)
    : std::runtime_error(message), kind_(kind), line_(line), word_(std::move(word)) {}

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) {
        throw EmbeddingError(EmbeddingErrorKind::DimensionMismatch, "embedding dimension must be positive");
    }
}

void EmbeddingTable::insert(std::string word, Vector v) {
    if (v.size() != dimension_) {
        throw EmbeddingError(EmbeddingErrorKind::DimensionMismatch,
                             "vector for '" + word + "' has " + std::to_string(v.size()) + " components, expected " +
                                 std::to_string(dimension_),
                             0, word);
    }
    auto [it, inserted] = entries_.try_emplace(word, std::move(v));
    if (!inserted) {
        throw EmbeddingError(EmbeddingErrorKind::DuplicateWord, "duplicate word '" + word + "'", 0, word);
    }
    order_.push_back(std::move(word));
}

const Vector* EmbeddingTable::find(std::string_view word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Vector> EmbeddingTable::word_vector(std::string_view word) const {
    if (const Vector* v = find(word)) {
        return *v;
    }
    return std::nullopt;
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
    return dimension_ == other.dimension_ && order_ == other.order_ && entries_ == other.entries_;
}

EmbeddingTable load_embeddings(std::istream& in) {
    std::optional<EmbeddingTable> table;
    std::string line;
    std::size_t line_no = 0;
    bool any_nonzero = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto fields = split_fields(line);
        if (fields.empty()) {
            continue;
        }
        const std::size_t dim = fields.size() - 1;
        if (!table) {
            if (dim == 0) {
                throw EmbeddingError(EmbeddingErrorKind::DimensionMismatch,
                                     "line " + std::to_string(line_no) + ": record has no vector components", line_no);
            }
            table.emplace(dim);
        } else if (dim != table->dimension()) {
            throw EmbeddingError(EmbeddingErrorKind::DimensionMismatch,
                                 "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table->dimension()) + " components, found " + std::to_string(dim),
                                 line_no);
        }

        std::string word(fields[0]);
        std::transform(word.begin(), word.end(), word.begin(), ascii_lower);
        Vector v(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const std::string_view f = fields[k + 1];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v[k])) {
                throw EmbeddingError(EmbeddingErrorKind::UnparsableFloat,
                                     "line " + std::to_string(line_no) + ": cannot parse '" + std::string(f) + "'",
                                     line_no, word);
            }
            any_nonzero = any_nonzero || v[k] != 0.0;
        }
        try {
            table->insert(std::move(word), std::move(v));
        } catch (const EmbeddingError& e) {
            throw EmbeddingError(e.kind(), "line " + std::to_string(line_no) + ": " + e.what(), line_no, e.word());
        }
    }
    if (!table) {
        throw EmbeddingError(EmbeddingErrorKind::EmptyFile, "embedding file contains no records");
    }
    if (!any_nonzero) {
        throw EmbeddingError(EmbeddingErrorKind::DegenerateTable, "every embedding vector is zero");
    }
    return std::move(*table);
}

std::vector<Token> tokenize(std::string_view caption) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < caption.size()) {
        std::size_t n;
        while (i < caption.size() && (n = space_length(caption, i)) > 0) {
            i += n;
        }
        std::size_t j = i;
        while (j < caption.size() && space_length(caption, j) == 0) {
            ++j;
        }
        std::size_t start = i, end = j;
        while (start < end && ascii_punct(static_cast<unsigned char>(caption[start]))) ++start;
        while (end > start && ascii_punct(static_cast<unsigned char>(caption[end - 1]))) --end;
        if (end > start) {
            std::string text(caption.substr(start, end - start));
            std::transform(text.begin(), text.end(), text.begin(), ascii_lower);
            tokens.push_back({std::move(text), start, end});
        }
        i = j;
    }
    return tokens;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw EmbeddingError(EmbeddingErrorKind::DimensionMismatch,
                             "cosine_similarity: dimensions differ (" + std::to_string(u.size()) + " vs " +
                                 std::to_string(v.size()) + ")");
    }
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        dot += u[k] * v[k];
        uu += u[k] * u[k];
        vv += v[k] * v[k];
    }
    if (uu == 0.0 || vv == 0.0) {
        throw EmbeddingError(EmbeddingErrorKind::ZeroVector, "cosine_similarity: zero-norm vector");
    }
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

Vector embed_phrase(const EmbeddingProvider& provider, std::string_view phrase) {
    Vector sum(provider.dimension(), 0.0);
    std::size_t found = 0;
    for (const Token& t : tokenize(phrase)) {
        if (auto v = provider.word_vector(t.text)) {
            for (std::size_t k = 0; k < sum.size(); ++k) {
                sum[k] += (*v)[k];
            }
            ++found;
        }
    }
    if (found == 0) {
        throw EmbeddingError(EmbeddingErrorKind::AllTokensOutOfVocabulary,
                             "no token of '" + std::string(phrase) + "' is in the vocabulary", 0, std::string(phrase));
    }
    if (found > 1) {
        for (double& x : sum) {
            x /= static_cast<double>(found);
        }
    }
    return sum;
}

}  // namespace semaug
