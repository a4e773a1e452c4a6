/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#ifndef STORYSTREAM_EMBEDDING_HPP_
#define STORYSTREAM_EMBEDDING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace storystream {

using ArticleId = std::string;

/**
 * @brief Fixed-dimension real vector standing for one article, topic or story.
 * Arithmetic is coordinate-wise and requires equal dimensions.
 */
class DocVector {
  public:
    DocVector() = default;
    explicit DocVector(std::vector<double> values) : values_(std::move(values)) {}
    DocVector(std::initializer_list<double> values) : values_(values) {}

    static DocVector zeros(std::size_t dimension) { return DocVector(std::vector<double>(dimension, 0.0)); }

    [[nodiscard]] std::size_t dimension() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    DocVector& operator+=(const DocVector& other) {
        check_same_dimension(other);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            values_[i] += other.values_[i];
        }
        return *this;
    }

    DocVector& operator-=(const DocVector& other) {
        check_same_dimension(other);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            values_[i] -= other.values_[i];
        }
        return *this;
    }

    friend DocVector operator+(DocVector lhs, const DocVector& rhs) { return lhs += rhs; }
    friend DocVector operator-(DocVector lhs, const DocVector& rhs) { return lhs -= rhs; }
    friend bool operator==(const DocVector&, const DocVector&) = default;

    [[nodiscard]] double dot(const DocVector& other) const {
        check_same_dimension(other);
        double sum = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            sum += values_[i] * other.values_[i];
        }
        return sum;
    }

    [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }

    [[nodiscard]] bool all_finite() const noexcept {
        for (double v : values_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

  private:
    void check_same_dimension(const DocVector& other) const {
        if (other.values_.size() != values_.size()) {
            throw Error(Errc::DimensionMismatch, "vectors of dimension " + std::to_string(values_.size()) + " and " +
                                                     std::to_string(other.values_.size()));
        }
    }

    std::vector<double> values_;
};

// Fallback embedder ---------------------------------------------------------

namespace detail {

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Length in bytes of the whitespace code point starting at `s`, or 0.
inline std::size_t whitespace_length(std::string_view s) noexcept {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    if (s.empty()) {
        return 0;
    }
    switch (byte(0)) {
        case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
            return 1;
        default:
            break;
    }
    if (s.size() >= 2 && byte(0) == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) {
        return 2;
    }
    if (s.size() >= 3) {
        const unsigned a = byte(0), b = byte(1), c = byte(2);
        if (a == 0xE1 && b == 0x9A && c == 0x80) return 3;                 // U+1680
        if (a == 0xE2 && b == 0x80 && (c <= 0x8A || c == 0xA8 || c == 0xA9 || c == 0xAF)) return 3;
        if (a == 0xE2 && b == 0x81 && c == 0x9F) return 3;                 // U+205F
        if (a == 0xE3 && b == 0x80 && c == 0x80) return 3;                 // U+3000
    }
    return 0;
}

inline bool is_ascii_punct(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
           (u >= 0x7B && u <= 0x7E);
}

}// namespace detail

/// Lowercased (ASCII), whitespace-split words with leading/trailing ASCII
/// punctuation stripped. Tokens that strip to nothing are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto finish = [&] {
        std::size_t b = 0, e = current.size();
        while (b < e && detail::is_ascii_punct(current[b])) ++b;
        while (e > b && detail::is_ascii_punct(current[e - 1])) --e;
        if (e > b) {
            tokens.push_back(current.substr(b, e - b));
        }
        current.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        if (const auto ws = detail::whitespace_length(text.substr(i)); ws > 0) {
            finish();
            i += ws;
            continue;
        }
        char c = text[i];
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
        current.push_back(c);
        ++i;
    }
    finish();
    return tokens;
}

/// Bucket index and sign for one token. Exposed for tests and tooling.
struct HashedFeature {
    std::size_t index;
    int sign;
};

inline HashedFeature hash_token(std::string_view token, std::size_t dimension, std::uint64_t seed) noexcept {
    const std::uint64_t h = detail::splitmix64(detail::fnv1a64(token) ^ detail::splitmix64(seed));
    return {static_cast<std::size_t>(h % dimension), (h >> 63) != 0 ? -1 : 1};
}

/**
 * @brief Signed feature hashing of unigram counts, L2-normalized.
 *
 * Counts accumulate as integers, so the result does not depend on token
 * order. If the signed counts cancel exactly, unsigned counts are used so the
 * output stays a unit vector.
 */
inline DocVector embed_fallback(std::string_view text, std::size_t dimension, std::uint64_t seed) {
    if (dimension < 2) {
        throw Error(Errc::BadDimension, "dimension must be at least 2, got " + std::to_string(dimension));
    }
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw Error(Errc::EmptyText, "no tokens in input text");
    }
    std::vector<std::int64_t> counts(dimension, 0);
    const auto accumulate = [&](bool signed_counts) {
        std::int64_t squared = 0;
        std::fill(counts.begin(), counts.end(), 0);
        for (const auto& token : tokens) {
            const auto feature = hash_token(token, dimension, seed);
            counts[feature.index] += signed_counts ? feature.sign : 1;
        }
        for (auto c : counts) {
            squared += c * c;
        }
        return squared;
    };
    std::int64_t squared = accumulate(true);
    if (squared == 0) {
        squared = accumulate(false);
    }
    std::vector<double> values(dimension, 0.0);
    const double norm = std::sqrt(static_cast<double>(squared));
    for (std::size_t i = 0; i < dimension; ++i) {
        values[i] = static_cast<double>(counts[i]) / norm;
    }
    return DocVector(std::move(values));
}

// Precomputed vectors ---------------------------------------------------------

/// Reads JSON Lines records `{"id": string, "vector": [numbers]}`. Blank lines
/// are skipped; line numbers in errors are 1-based.
inline std::map<ArticleId, DocVector> parse_vectors(std::istream& in, std::size_t expected_dimension) {
    std::map<ArticleId, DocVector> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto where = "line " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
            !record.contains("vector") || !record["vector"].is_array()) {
            throw Error(Errc::ParseError, where + ": expected {\"id\": string, \"vector\": [numbers]}");
        }
        auto id = record["id"].get<std::string>();
        const auto& raw = record["vector"];
        std::vector<double> values;
        values.reserve(raw.size());
        for (const auto& v : raw) {
            if (!v.is_number()) {
                throw Error(Errc::ParseError, where + ": non-numeric vector entry for id '" + id + "'");
            }
            values.push_back(v.get<double>());
        }
        if (values.size() != expected_dimension) {
            throw Error(Errc::DimensionMismatch, where + ": id '" + id + "' has " + std::to_string(values.size()) +
                                                     " values, expected " + std::to_string(expected_dimension));
        }
        DocVector vec(std::move(values));
        if (!vec.all_finite()) {
            throw Error(Errc::ParseError, where + ": non-finite value for id '" + id + "'");
        }
        if (result.contains(id)) {
            throw Error(Errc::DuplicateId, where + ": id '" + id + "' already defined");
        }
        result.emplace(std::move(id), std::move(vec));
    }
    return result;
}

inline std::map<ArticleId, DocVector> load_vectors(const std::filesystem::path& path, std::size_t expected_dimension) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::ParseError, "cannot open vector file " + path.string());
    }
    return parse_vectors(in, expected_dimension);
}

}// namespace storystream

#endif// STORYSTREAM_EMBEDDING_HPP_
