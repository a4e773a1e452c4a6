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
#ifndef STORYSTREAM_PIPELINE_HPP_
#define STORYSTREAM_PIPELINE_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "config.hpp"
#include "evalmetrics.hpp"
#include "error.hpp"
#include "storynet.hpp"
#include "window.hpp"

namespace storystream {

using Json = nlohmann::ordered_json;

inline constexpr int kSnapshotSchema = 1;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline Json to_json(const WindowEvent& event) {
    return std::visit(
        Overloaded{
            [](const TopicsEmitted& e) {
                Json topics = Json::array();
                for (const auto& t : e.topics) topics.push_back(t.members);
                return Json{{"type", "topics_emitted"},
                            {"at", format_timestamp(e.at)},
                            {"reason", to_string(e.reason)},
                            {"overridden", e.overridden},
                            {"topics", std::move(topics)}};
            },
            [](const TemporaryAssignment& e) {
                return Json{{"type", "temporary_assignment"},
                            {"at", format_timestamp(e.at)},
                            {"article", e.article},
                            {"community", e.community}};
            },
            [](const WindowSlid& e) {
                return Json{{"type", "window_slid"},
                            {"at", format_timestamp(e.at)},
                            {"new_start", format_timestamp(e.new_start)},
                            {"evicted", e.evicted}};
            },
        },
        event);
}

inline Json to_json(const MergeEvent& event) {
    return std::visit(
        Overloaded{
            [](const TopicMerged& e) {
                return Json{{"type", "topic_merged"}, {"at", format_timestamp(e.at)}, {"topic", e.topic},
                            {"story", e.story}, {"added", e.added}};
            },
            [](const TopicsCombined& e) {
                return Json{{"type", "topics_combined"}, {"at", format_timestamp(e.at)}, {"into", e.into},
                            {"from", e.from}};
            },
            [](const TopicCast& e) {
                return Json{{"type", "topic_cast"}, {"at", format_timestamp(e.at)}, {"topic", e.topic},
                            {"story", e.story}};
            },
            [](const TopicDropped& e) {
                return Json{{"type", "topic_dropped"}, {"at", format_timestamp(e.at)}, {"topic", e.topic}};
            },
            [](const StoriesMerged& e) {
                return Json{{"type", "stories_merged"}, {"at", format_timestamp(e.at)}, {"survivor", e.survivor},
                            {"absorbed", e.absorbed}};
            },
            [](const DocumentMigrated& e) {
                Json j{{"type", "document_migrated"}, {"at", format_timestamp(e.at)}, {"article", e.article},
                       {"from", e.from}};
                j["to"] = e.to ? Json(*e.to) : Json(nullptr);
                return j;
            },
        },
        event);
}

/**
 * @brief Drives embedding output through the inching window into the story
 * network and produces snapshots.
 */
class StoryPipeline {
  public:
    explicit StoryPipeline(RunConfig config)
        : config_((config.validate(), std::move(config))),
          window_(config_.window(), config_.transform, config_.louvain) {}

    /// Feeds one article; returns the snapshots produced by any slides.
    std::vector<Json> process(Article article) {
        if (!seen_.insert(article.id).second) {
            throw Error(Errc::DuplicateArticle, "article '" + article.id + "' appears twice in the stream");
        }
        const auto id = article.id;
        const auto at = article.timestamp;
        network_.retain(id, at, article.vector);
        auto events = window_.ingest(std::move(article));
        order_.push_back(id);
        std::vector<Json> snapshots;
        handle(events, snapshots);
        network_.forget_before(window_.high_water() - config_.window().span);
        return snapshots;
    }

    /// Flushes the window and returns the final snapshot.
    Json finish() {
        if (order_.empty()) {
            throw Error(Errc::EmptyWindow, "no articles");
        }
        std::vector<Json> ignored;
        handle(window_.flush(), ignored);
        return snapshot("final", window_.high_water());
    }

    /// Final article → story assignment in input order.
    [[nodiscard]] std::vector<std::pair<ArticleId, StoryId>> assignments() const {
        std::vector<std::pair<ArticleId, StoryId>> out;
        out.reserve(order_.size());
        for (const auto& id : order_) {
            const auto story = network_.owner(id);
            if (!story) {
                throw Error(Errc::NotAMember, "article '" + id + "' was never assigned to a story");
            }
            out.emplace_back(id, *story);
        }
        return out;
    }

    [[nodiscard]] Labeling labeling() const {
        Labeling out;
        for (const auto& [id, story] : assignments()) out.emplace(id, std::to_string(story));
        return out;
    }

    [[nodiscard]] const RunConfig& config() const noexcept { return config_; }
    [[nodiscard]] const InchingWindow& window() const noexcept { return window_; }
    [[nodiscard]] const StoryNetwork& network() const noexcept { return network_; }
    [[nodiscard]] const std::vector<WindowEvent>& event_log() const noexcept { return event_log_; }

  private:
    void handle(const std::vector<WindowEvent>& events, std::vector<Json>& snapshots) {
        for (const auto& event : events) {
            event_log_.push_back(event);
            pending_window_events_.push_back(to_json(event));
            if (const auto* emitted = std::get_if<TopicsEmitted>(&event)) {
                for (const auto& m : network_.integrate(emitted->topics, config_.transform, config_.louvain)) {
                    pending_merge_events_.push_back(to_json(m));
                }
                current_topics_ = emitted->topics;
            } else if (const auto* slid = std::get_if<WindowSlid>(&event)) {
                if (config_.cadence == SnapshotCadence::PerSlide) {
                    snapshots.push_back(snapshot("slide", slid->at));
                }
            }
        }
    }

    Json snapshot(std::string_view kind, Timestamp at) {
        Json stories = Json::array();
        for (const auto& [id, s] : network_.stories()) {
            stories.push_back(Json{{"id", id},
                                   {"created", format_timestamp(s.created)},
                                   {"last_active", format_timestamp(s.last_active)},
                                   {"member_count", s.members.size()},
                                   {"members", s.members}});
        }
        Json topics = Json::array();
        for (const auto& t : current_topics_) {
            topics.push_back(Json{{"emitted", format_timestamp(t.emitted)}, {"members", t.members}});
        }
        Json edges = Json::array();
        const auto& all = network_.stories();
        for (auto a = all.begin(); a != all.end(); ++a) {
            if (a->second.vector.norm() == 0.0) continue;
            for (auto b = std::next(a); b != all.end(); ++b) {
                if (b->second.vector.norm() == 0.0) continue;
                const double w = config_.transform.apply(cosine(a->second.vector, b->second.vector));
                if (config_.transform.keeps(w)) {
                    edges.push_back(Json{{"source", a->first}, {"target", b->first}, {"weight", w}});
                }
            }
        }
        Json window{{"phase", to_string(window_.phase())},
                    {"start", format_timestamp(window_.window_start())},
                    {"end", format_timestamp(window_.window_end())},
                    {"live_articles", window_.live_count()},
                    {"temporary_assignments", window_.temporary_count()}};
        Json snap{{"schema", kSnapshotSchema},
                  {"sequence", ++sequence_},
                  {"kind", kind},
                  {"timestamp", format_timestamp(at)},
                  {"config", to_json(config_)},
                  {"window", std::move(window)},
                  {"stories", std::move(stories)},
                  {"topics", std::move(topics)},
                  {"story_edges", std::move(edges)},
                  {"merge_events", std::move(pending_merge_events_)},
                  {"window_events", std::move(pending_window_events_)}};
        pending_merge_events_ = Json::array();
        pending_window_events_ = Json::array();
        return snap;
    }

    RunConfig config_;
    InchingWindow window_;
    StoryNetwork network_;
    std::set<ArticleId> seen_;
    std::vector<ArticleId> order_;
    std::vector<WindowEvent> event_log_;
    std::vector<Topic> current_topics_;
    Json pending_merge_events_ = Json::array();
    Json pending_window_events_ = Json::array();
    std::size_t sequence_ = 0;
};

/**
 * @brief Graphviz rendering of a snapshot's story network.
 *
 * Story nodes are labeled "id (member count)"; edge labels are weights
 * rounded to three decimals. Nodes and edges are emitted in id order.
 */
inline std::string export_dot(const nlohmann::json& snapshot) {
    const auto fail = [](const std::string& why) { return Error(Errc::ParseError, "snapshot: " + why); };
    if (!snapshot.is_object() || !snapshot.contains("stories") || !snapshot["stories"].is_array()) {
        throw fail("missing \"stories\" array");
    }
    std::map<std::uint64_t, std::uint64_t> nodes;
    for (const auto& s : snapshot["stories"]) {
        if (!s.is_object() || !s.contains("id") || !s["id"].is_number_unsigned() || !s.contains("member_count") ||
            !s["member_count"].is_number_unsigned()) {
            throw fail("story entries need unsigned \"id\" and \"member_count\"");
        }
        if (!nodes.emplace(s["id"].get<std::uint64_t>(), s["member_count"].get<std::uint64_t>()).second) {
            throw fail("duplicate story id");
        }
    }
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> edges;
    if (snapshot.contains("story_edges")) {
        if (!snapshot["story_edges"].is_array()) throw fail("\"story_edges\" must be an array");
        for (const auto& e : snapshot["story_edges"]) {
            if (!e.is_object() || !e.contains("source") || !e["source"].is_number_unsigned() ||
                !e.contains("target") || !e["target"].is_number_unsigned() || !e.contains("weight") ||
                !e["weight"].is_number()) {
                throw fail("edge entries need \"source\", \"target\" and \"weight\"");
            }
            auto u = e["source"].get<std::uint64_t>();
            auto v = e["target"].get<std::uint64_t>();
            if (!nodes.contains(u) || !nodes.contains(v)) throw fail("edge endpoint is not a story");
            if (u > v) std::swap(u, v);
            edges.emplace_back(u, v, e["weight"].get<double>());
        }
    }
    std::sort(edges.begin(), edges.end());
    std::string out = "graph stories {\n";
    for (const auto& [id, count] : nodes) {
        out += fmt::format("  s{} [label=\"{} ({})\"];\n", id, id, count);
    }
    for (const auto& [u, v, w] : edges) {
        out += fmt::format("  s{} -- s{} [label=\"{:.3f}\"];\n", u, v, w);
    }
    out += "}\n";
    return out;
}

/// Writes to a sibling temporary file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::InvalidConfig, "cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw Error(Errc::InvalidConfig, "short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string assignments_jsonl(const std::vector<std::pair<ArticleId, StoryId>>& rows) {
    std::string out;
    for (const auto& [id, story] : rows) {
        out += Json{{"id", id}, {"label", std::to_string(story)}, {"story", story}}.dump();
        out += '\n';
    }
    return out;
}

}// namespace storystream

#endif// STORYSTREAM_PIPELINE_HPP_
