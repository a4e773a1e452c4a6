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
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "storystream/embedding.hpp"

using namespace storystream;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::InvalidConfig;
}

}// namespace

TEST(Tokenize, LowercasesSplitsAndStripsPunctuation) {
    EXPECT_EQ(tokenize("Hello, World!  (again)"), (std::vector<std::string>{"hello", "world", "again"}));
    EXPECT_EQ(tokenize("  ...  --  "), std::vector<std::string>{});
    EXPECT_EQ(tokenize("don't stop"), (std::vector<std::string>{"don't", "stop"}));
}

TEST(Tokenize, SplitsOnUnicodeWhitespace) {
    // NBSP, ideographic space, em space
    EXPECT_EQ(tokenize("a b　c d"), (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_EQ(tokenize("café au lait"), (std::vector<std::string>{"café", "au", "lait"}));
}

TEST(EmbedFallback, Deterministic) {
    EXPECT_EQ(embed_fallback("hello", 64, 7), embed_fallback("hello", 64, 7));
}

TEST(EmbedFallback, EmptyTextRejected) {
    EXPECT_EQ(code_of([] { (void)embed_fallback("", 64, 7); }), Errc::EmptyText);
    EXPECT_EQ(code_of([] { (void)embed_fallback(" !? ", 64, 7); }), Errc::EmptyText);
}

TEST(EmbedFallback, BadDimension) {
    EXPECT_EQ(code_of([] { (void)embed_fallback("hello", 1, 0); }), Errc::BadDimension);
    EXPECT_EQ(code_of([] { (void)embed_fallback("hello", 0, 0); }), Errc::BadDimension);
}

// Bucket and sign computed independently from the FNV-1a / splitmix64 recipe.
TEST(EmbedFallback, RepeatedTokenFrozenBucket) {
    const auto v = embed_fallback("a a", 4, 0);
    EXPECT_EQ(v, (DocVector{0.0, 0.0, 1.0, 0.0}));
    const auto f = hash_token("a", 4, 0);
    EXPECT_EQ(f.index, 2u);
    EXPECT_EQ(f.sign, 1);
    EXPECT_EQ(hash_token("hello", 64, 7).index, 14u);
}

TEST(EmbedFallback, SeedChangesHashing) {
    EXPECT_NE(embed_fallback("the quick brown fox jumps", 64, 1), embed_fallback("the quick brown fox jumps", 64, 2));
}

TEST(EmbedFallback, UnitNormAndOrderInvariance) {
    std::mt19937_64 rng(11);
    const std::vector<std::string> vocab{"storm", "coast", "rescue", "vote", "leave", "market", "police", "city",
                                         "Flight", "search", "ocean", "debris", "Coup", "army", "night"};
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
        std::uniform_int_distribution<int> len(1, 12);
        std::vector<std::string> words;
        for (int i = len(rng); i > 0; --i) words.push_back(vocab[pick(rng)]);
        std::string text;
        for (const auto& w : words) text += w + " ";
        const auto d = static_cast<std::size_t>(2 + trial % 30);
        const auto v = embed_fallback(text, d, static_cast<std::uint64_t>(trial));
        EXPECT_NEAR(v.norm(), 1.0, 1e-9);
        EXPECT_TRUE(v.all_finite());
        std::shuffle(words.begin(), words.end(), rng);
        std::string shuffled;
        for (const auto& w : words) shuffled += "\t" + w;
        EXPECT_EQ(v, embed_fallback(shuffled, d, static_cast<std::uint64_t>(trial)));
    }
}

TEST(EmbedFallback, CancellingSignsStillUnit) {
    // Find two tokens sharing a bucket with opposite signs.
    std::string plus, minus;
    for (int i = 0; i < 1000 && (plus.empty() || minus.empty()); ++i) {
        const auto t = "w" + std::to_string(i);
        const auto f = hash_token(t, 2, 0);
        if (f.index != 0) continue;
        (f.sign > 0 ? plus : minus) = t;
    }
    ASSERT_FALSE(plus.empty());
    ASSERT_FALSE(minus.empty());
    const auto v = embed_fallback(plus + " " + minus, 2, 0);
    EXPECT_EQ(v, (DocVector{1.0, 0.0}));
}

TEST(LoadVectors, WellFormed) {
    std::istringstream in(R"({"id": "a", "vector": [1, 0, 0]}

{"id": "b", "vector": [0, 1.5, 0]}
{"id": "c", "vector": [0, 0, -2e-3]}
)");
    const auto m = parse_vectors(in, 3);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m.at("b"), (DocVector{0.0, 1.5, 0.0}));
}

TEST(LoadVectors, WrongLengthNamesId) {
    std::istringstream in("{\"id\": \"a\", \"vector\": [1, 0, 0]}\n{\"id\": \"short\", \"vector\": [1, 0]}\n");
    try {
        parse_vectors(in, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionMismatch);
        EXPECT_NE(std::string(e.what()).find("short"), std::string::npos);
    }
}

TEST(LoadVectors, DuplicateId) {
    std::istringstream in("{\"id\": \"a\", \"vector\": [1, 0]}\n{\"id\": \"a\", \"vector\": [0, 1]}\n");
    EXPECT_EQ(code_of([&] { parse_vectors(in, 2); }), Errc::DuplicateId);
}

TEST(LoadVectors, ParseErrorCarriesLineNumber) {
    std::istringstream in("{\"id\": \"a\", \"vector\": [1, 0]}\n{\"id\": \"b\", \"vector\": [0, 1]\n");
    try {
        parse_vectors(in, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    std::istringstream strings("{\"id\": \"a\", \"vector\": [\"x\", 0]}\n");
    EXPECT_EQ(code_of([&] { parse_vectors(strings, 2); }), Errc::ParseError);
}

TEST(LoadVectors, MissingFile) {
    EXPECT_EQ(code_of([] { load_vectors("/nonexistent/vectors.jsonl", 2); }), Errc::ParseError);
}

TEST(DocVector, ArithmeticChecksDimension) {
    DocVector a{1.0, 2.0};
    EXPECT_EQ((a + DocVector{0.5, 0.5}), (DocVector{1.5, 2.5}));
    EXPECT_EQ(code_of([&] { a += DocVector{1.0}; }), Errc::DimensionMismatch);
}
