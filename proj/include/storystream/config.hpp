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
#ifndef STORYSTREAM_CONFIG_HPP_
#define STORYSTREAM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "embedding.hpp"
#include "error.hpp"
#include "louvain.hpp"
#include "simgraph.hpp"
#include "time.hpp"
#include "topic.hpp"
#include "window.hpp"

namespace storystream {

enum class SnapshotCadence { PerSlide, FinalOnly };

struct VectorSourceConfig {
    enum class Kind { Precomputed, Fallback };

    Kind kind = Kind::Precomputed;
    std::size_t dimension = 64;
    std::uint64_t seed = 0;
    /// Precomputed only: vectors come from this file instead of each record.
    std::optional<std::filesystem::path> path;
};

/**
 * Everything that determines a run. Window lengths are whole multiples of
 * `unit`. JSON layout:
 *
 *   { "vectors":   {"source": "precomputed"|"fallback", "dimension": 64, "seed": 0, "path": "..."},
 *     "window":    {"unit": "days", "span": 4, "interval": 1, "lateness": 0},
 *     "weights":   {"transform": "clamp"|"shift", "epsilon": 0.0},
 *     "louvain":   {"resolution": 1.0, "min_gain": 1e-7},
 *     "snapshots": {"cadence": "per-slide"|"final-only"} }
 */
struct RunConfig {
    VectorSourceConfig vectors;
    std::string unit = "days";
    std::int64_t span = 4;
    std::int64_t interval = 1;
    std::int64_t lateness = 0;
    WeightTransform transform;
    LouvainConfig louvain;
    SnapshotCadence cadence = SnapshotCadence::PerSlide;

    [[nodiscard]] Duration unit_length() const {
        using namespace std::chrono;
        if (unit == "days") return duration_cast<Duration>(std::chrono::days{1});
        if (unit == "hours") return duration_cast<Duration>(hours{1});
        if (unit == "minutes") return duration_cast<Duration>(minutes{1});
        if (unit == "seconds") return duration_cast<Duration>(seconds{1});
        if (unit == "milliseconds") return Duration{1};
        throw Error(Errc::InvalidConfig, "unknown time unit '" + unit + "'");
    }

    [[nodiscard]] WindowConfig window() const {
        const auto u = unit_length();
        return WindowConfig{u * span, u * interval, u * lateness};
    }

    void validate() const {
        if (vectors.dimension < 2) {
            throw Error(Errc::InvalidConfig, "vector dimension must be at least 2");
        }
        if (vectors.path && vectors.kind != VectorSourceConfig::Kind::Precomputed) {
            throw Error(Errc::InvalidConfig, "a vector file only applies to the precomputed source");
        }
        if (vectors.path && !std::filesystem::exists(*vectors.path)) {
            throw Error(Errc::InvalidConfig, "vector file " + vectors.path->string() + " does not exist");
        }
        window().validate();
        transform.validate();
        louvain.validate();
    }
};

inline std::string_view to_string(SnapshotCadence c) noexcept {
    return c == SnapshotCadence::PerSlide ? "per-slide" : "final-only";
}

inline std::string_view to_string(VectorSourceConfig::Kind k) noexcept {
    return k == VectorSourceConfig::Kind::Precomputed ? "precomputed" : "fallback";
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view where,
                                std::initializer_list<std::string_view> known) {
    if (!obj.is_object()) {
        throw Error(Errc::InvalidConfig, std::string(where) + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) {
            throw Error(Errc::InvalidConfig, "unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <class T>
void read_if_present(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

}// namespace detail

/// Relative vector-file paths resolve against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::read_if_present;
    RunConfig cfg;
    detail::reject_unknown_keys(j, "config", {"vectors", "window", "weights", "louvain", "snapshots"});
    if (j.contains("vectors")) {
        const auto& v = j["vectors"];
        detail::reject_unknown_keys(v, "vectors", {"source", "dimension", "seed", "path"});
        std::string source = std::string(to_string(cfg.vectors.kind));
        read_if_present(v, "source", source);
        if (source == "precomputed") {
            cfg.vectors.kind = VectorSourceConfig::Kind::Precomputed;
        } else if (source == "fallback") {
            cfg.vectors.kind = VectorSourceConfig::Kind::Fallback;
        } else {
            throw Error(Errc::InvalidConfig, "unknown vector source '" + source + "'");
        }
        read_if_present(v, "dimension", cfg.vectors.dimension);
        read_if_present(v, "seed", cfg.vectors.seed);
        if (v.contains("path")) {
            std::string path;
            read_if_present(v, "path", path);
            std::filesystem::path p(path);
            cfg.vectors.path = p.is_relative() ? base_dir / p : p;
        }
    }
    if (j.contains("window")) {
        const auto& w = j["window"];
        detail::reject_unknown_keys(w, "window", {"unit", "span", "interval", "lateness"});
        read_if_present(w, "unit", cfg.unit);
        read_if_present(w, "span", cfg.span);
        read_if_present(w, "interval", cfg.interval);
        read_if_present(w, "lateness", cfg.lateness);
    }
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        detail::reject_unknown_keys(w, "weights", {"transform", "epsilon"});
        std::string kind = std::string(to_string(cfg.transform.kind));
        read_if_present(w, "transform", kind);
        cfg.transform.kind = parse_transform_kind(kind);
        read_if_present(w, "epsilon", cfg.transform.epsilon);
    }
    if (j.contains("louvain")) {
        const auto& l = j["louvain"];
        detail::reject_unknown_keys(l, "louvain", {"resolution", "min_gain"});
        read_if_present(l, "resolution", cfg.louvain.resolution);
        read_if_present(l, "min_gain", cfg.louvain.min_gain);
    }
    if (j.contains("snapshots")) {
        const auto& s = j["snapshots"];
        detail::reject_unknown_keys(s, "snapshots", {"cadence"});
        std::string cadence = std::string(to_string(cfg.cadence));
        read_if_present(s, "cadence", cadence);
        if (cadence == "per-slide") {
            cfg.cadence = SnapshotCadence::PerSlide;
        } else if (cadence == "final-only") {
            cfg.cadence = SnapshotCadence::FinalOnly;
        } else {
            throw Error(Errc::InvalidConfig, "unknown snapshot cadence '" + cadence + "'");
        }
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::InvalidConfig, "cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

/// Echo of every effective setting, embedded in snapshot metadata.
inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json vectors = {{"source", to_string(cfg.vectors.kind)},
                                      {"dimension", cfg.vectors.dimension},
                                      {"seed", cfg.vectors.seed}};
    if (cfg.vectors.path) {
        vectors["path"] = cfg.vectors.path->filename().string();
    }
    return {{"vectors", vectors},
            {"window",
             {{"unit", cfg.unit}, {"span", cfg.span}, {"interval", cfg.interval}, {"lateness", cfg.lateness}}},
            {"weights", {{"transform", to_string(cfg.transform.kind)}, {"epsilon", cfg.transform.epsilon}}},
            {"louvain", {{"resolution", cfg.louvain.resolution}, {"min_gain", cfg.louvain.min_gain}}},
            {"snapshots", {{"cadence", to_string(cfg.cadence)}}},
            {"metrics", {{"f1", "pairwise"}, {"nmi_normalization", "arithmetic"}}}};
}

/**
 * @brief Turns input records into articles.
 *
 * Records are `{"id", "timestamp", "text"?, "vector"?}`. Which optional field
 * is required depends on the vector source.
 */
class ArticleReader {
  public:
    explicit ArticleReader(const VectorSourceConfig& source) : source_(source) {
        if (source_.path) {
            file_vectors_ = load_vectors(*source_.path, source_.dimension);
        }
    }

    Article parse(std::string_view line, std::size_t line_no) const {
        const auto where = "line " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
            !record.contains("timestamp") || !record["timestamp"].is_string()) {
            throw Error(Errc::ParseError, where + ": record needs string \"id\" and \"timestamp\"");
        }
        Article article;
        article.id = record["id"].get<std::string>();
        try {
            article.timestamp = parse_timestamp(record["timestamp"].get<std::string>());
        } catch (const Error& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        const bool has_text = record.contains("text");
        const bool has_vector = record.contains("vector");
        if (source_.kind == VectorSourceConfig::Kind::Fallback) {
            if (!has_text || !record["text"].is_string() || has_vector) {
                throw Error(Errc::ParseError, where + ": fallback source needs \"text\" and no \"vector\"");
            }
            try {
                article.vector = embed_fallback(record["text"].get<std::string>(), source_.dimension, source_.seed);
            } catch (const Error& e) {
                throw Error(Errc::ParseError, where + ": " + e.what());
            }
        } else if (source_.path) {
            const auto it = file_vectors_.find(article.id);
            if (it == file_vectors_.end()) {
                throw Error(Errc::ParseError, where + ": no vector for '" + article.id + "' in vector file");
            }
            article.vector = it->second;
        } else {
            if (!has_vector || !record["vector"].is_array() || has_text) {
                throw Error(Errc::ParseError, where + ": precomputed source needs \"vector\" and no \"text\"");
            }
            std::vector<double> values;
            for (const auto& v : record["vector"]) {
                if (!v.is_number()) throw Error(Errc::ParseError, where + ": non-numeric vector entry");
                values.push_back(v.get<double>());
            }
            if (values.size() != source_.dimension) {
                throw Error(Errc::DimensionMismatch, where + ": id '" + article.id + "' has " +
                                                         std::to_string(values.size()) + " values, expected " +
                                                         std::to_string(source_.dimension));
            }
            article.vector = DocVector(std::move(values));
        }
        if (article.vector.norm() == 0.0) {
            throw Error(Errc::ZeroVector, where + ": article '" + article.id + "' has a zero vector");
        }
        return article;
    }

  private:
    VectorSourceConfig source_;
    std::map<ArticleId, DocVector> file_vectors_;
};

}// namespace storystream

#endif// STORYSTREAM_CONFIG_HPP_
