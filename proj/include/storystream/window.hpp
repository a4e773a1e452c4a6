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
#ifndef STORYSTREAM_WINDOW_HPP_
#define STORYSTREAM_WINDOW_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "louvain.hpp"
#include "simgraph.hpp"
#include "time.hpp"
#include "topic.hpp"

namespace storystream {

struct WindowConfig {
    Duration span{whole_days(4)};
    Duration interval{whole_days(1)};
    Duration lateness{0};

    void validate() const {
        if (!(interval.count() > 0 && interval <= span)) {
            throw Error(Errc::InvalidConfig, "window requires 0 < interval <= span");
        }
        if (lateness.count() < 0) {
            throw Error(Errc::InvalidConfig, "lateness must be non-negative");
        }
    }
};

enum class WindowPhase { Filling, Inching };
enum class EmissionReason { Batch, Slide, Flush };

inline std::string_view to_string(WindowPhase p) noexcept { return p == WindowPhase::Filling ? "filling" : "inching"; }

inline std::string_view to_string(EmissionReason r) noexcept {
    switch (r) {
        case EmissionReason::Batch: return "batch";
        case EmissionReason::Slide: return "slide";
        case EmissionReason::Flush: return "flush";
    }
    return "unknown";
}

struct TopicsEmitted {
    Timestamp at{};
    EmissionReason reason = EmissionReason::Batch;
    std::vector<Topic> topics;
    /// Temporary assignments replaced by this re-clustering.
    std::size_t overridden = 0;

    friend bool operator==(const TopicsEmitted&, const TopicsEmitted&) = default;
};

struct TemporaryAssignment {
    Timestamp at{};
    ArticleId article;
    CommunityId community = 0;

    friend bool operator==(const TemporaryAssignment&, const TemporaryAssignment&) = default;
};

struct WindowSlid {
    Timestamp at{};         // the interval boundary that triggered the slide
    Timestamp new_start{};
    std::vector<ArticleId> evicted;

    friend bool operator==(const WindowSlid&, const WindowSlid&) = default;
};

using WindowEvent = std::variant<TopicsEmitted, TemporaryAssignment, WindowSlid>;

/**
 * @brief Inching-window driver over a chronological article stream.
 *
 * The first span [t0, t0 + span) is buffered and clustered as one batch once
 * an article at or past its end arrives (t0 is the first timestamp floored to
 * a multiple of the interval). From then on each article is placed by
 * assign_on_the_fly and flagged temporary. An article at or past the window
 * end triggers slide(): full re-clustering, then the start advances by one
 * interval and older articles are evicted.
 *
 * Graph node keys are arrival sequence numbers, so Louvain visits articles in
 * arrival order.
 */
class InchingWindow {
  public:
    using Sequence = std::uint64_t;

    InchingWindow(WindowConfig config, WeightTransform transform, LouvainConfig louvain)
        : config_(config), transform_(transform), louvain_(louvain) {
        config_.validate();
        transform_.validate();
        louvain_.validate();
    }

    std::vector<WindowEvent> ingest(Article article) {
        if (by_id_.contains(article.id)) {
            throw Error(Errc::DuplicateArticle, "article '" + article.id + "' is already in the window");
        }
        if (dimension_ != 0 && article.vector.dimension() != dimension_) {
            throw Error(Errc::DimensionMismatch, "article '" + article.id + "' has dimension " +
                                                     std::to_string(article.vector.dimension()) + ", expected " +
                                                     std::to_string(dimension_));
        }
        if (started_ && (article.timestamp < high_water_ - config_.lateness || article.timestamp < start_)) {
            throw Error(Errc::OutOfOrder, "article '" + article.id + "' at " + format_timestamp(article.timestamp) +
                                              " arrived after " + format_timestamp(high_water_));
        }

        std::vector<WindowEvent> events;
        if (!started_) {
            start_ = align(article.timestamp);
            end_ = start_ + config_.span;
            high_water_ = article.timestamp;
            dimension_ = article.vector.dimension();
            started_ = true;
        }
        high_water_ = std::max(high_water_, article.timestamp);

        if (phase_ == WindowPhase::Filling) {
            if (article.timestamp < end_) {
                insert(std::move(article));
                return events;
            }
            if (!graph_.empty()) {
                partition_ = cluster();
                events.emplace_back(TopicsEmitted{end_, EmissionReason::Batch, topics(partition_, end_), 0});
            }
            phase_ = WindowPhase::Inching;
        }

        while (article.timestamp >= end_) {
            auto slid = slide();
            events.insert(events.end(), std::make_move_iterator(slid.begin()), std::make_move_iterator(slid.end()));
        }
        const auto at = article.timestamp;
        const auto id = article.id;
        const auto seq = insert(std::move(article));
        const auto community = assign_on_the_fly(graph_, partition_without(seq), seq, louvain_.resolution);
        partition_[seq] = community;
        temporary_.insert(seq);
        events.emplace_back(TemporaryAssignment{at, id, community});
        return events;
    }

    std::vector<WindowEvent> slide() {
        if (phase_ != WindowPhase::Inching) {
            throw Error(Errc::NotInInchingPhase, "slide before the first window completed");
        }
        std::vector<WindowEvent> events;
        const auto boundary = end_;
        if (!graph_.empty()) {
            const auto overridden = temporary_.size();
            partition_ = cluster();
            temporary_.clear();
            events.emplace_back(TopicsEmitted{boundary, EmissionReason::Slide, topics(partition_, boundary), overridden});
        }
        start_ += config_.interval;
        end_ += config_.interval;

        std::set<Sequence> stale;
        std::vector<ArticleId> evicted;
        for (const auto& [seq, live] : live_) {
            if (live.timestamp < start_) {
                stale.insert(seq);
                evicted.push_back(live.id);
            }
        }
        remove_nodes(graph_, stale);
        for (auto seq : stale) {
            by_id_.erase(live_.at(seq).id);
            live_.erase(seq);
            vectors_.erase(seq);
            partition_.erase(seq);
            temporary_.erase(seq);
        }
        events.emplace_back(WindowSlid{boundary, start_, std::move(evicted)});
        return events;
    }

    /// End-of-stream re-clustering. Does not move or shrink the window; in
    /// the filling phase the result is reported but not kept.
    std::vector<WindowEvent> flush() {
        if (live_.empty()) {
            throw Error(Errc::EmptyWindow, "flush with no live articles");
        }
        auto fresh = cluster();
        const auto overridden = temporary_.size();
        std::vector<WindowEvent> events;
        events.emplace_back(TopicsEmitted{high_water_, EmissionReason::Flush, topics(fresh, high_water_), overridden});
        if (phase_ == WindowPhase::Inching) {
            partition_ = std::move(fresh);
            temporary_.clear();
        }
        return events;
    }

    [[nodiscard]] WindowPhase phase() const noexcept { return phase_; }
    [[nodiscard]] bool started() const noexcept { return started_; }
    [[nodiscard]] Timestamp window_start() const noexcept { return start_; }
    [[nodiscard]] Timestamp window_end() const noexcept { return end_; }
    [[nodiscard]] Timestamp high_water() const noexcept { return high_water_; }
    [[nodiscard]] std::size_t live_count() const noexcept { return live_.size(); }
    [[nodiscard]] std::size_t temporary_count() const noexcept { return temporary_.size(); }
    [[nodiscard]] const WeightedGraph<Sequence>& graph() const noexcept { return graph_; }
    [[nodiscard]] const WindowConfig& config() const noexcept { return config_; }

    struct LiveArticle {
        ArticleId id;
        Timestamp timestamp{};
    };

    [[nodiscard]] std::vector<LiveArticle> live_articles() const {
        std::vector<LiveArticle> out;
        for (const auto& [seq, live] : live_) out.push_back(live);
        return out;
    }

    /// Current community of a live article and whether it is temporary.
    [[nodiscard]] std::optional<std::pair<CommunityId, bool>> assignment(const ArticleId& id) const {
        const auto it = by_id_.find(id);
        if (it == by_id_.end() || !partition_.contains(it->second)) {
            return std::nullopt;
        }
        return std::pair{partition_.at(it->second), temporary_.contains(it->second)};
    }

  private:
    Timestamp align(Timestamp t) const {
        const auto step = config_.interval.count();
        auto ms = to_millis(t);
        auto floored = ms / step * step;
        if (floored > ms) floored -= step;
        return from_millis(floored);
    }

    Sequence insert(Article article) {
        const auto seq = next_seq_++;
        add_node(graph_, seq, article.vector, vectors_, transform_);
        by_id_.emplace(article.id, seq);
        live_.emplace(seq, LiveArticle{article.id, article.timestamp});
        vectors_.emplace(seq, std::move(article.vector));
        return seq;
    }

    Partition<Sequence> cluster() const { return louvain(graph_, louvain_).top().partition; }

    Partition<Sequence> partition_without(Sequence seq) const {
        auto p = partition_;
        p.erase(seq);
        return p;
    }

    // Topics ordered by their earliest-arrived member.
    std::vector<Topic> topics(const Partition<Sequence>& p, Timestamp at) const {
        std::vector<std::pair<Sequence, Topic>> keyed;
        for (const auto& [community, members] : group_by_community(p)) {
            Topic topic;
            topic.emitted = at;
            topic.vector = DocVector::zeros(dimension_);
            for (auto seq : members) {
                topic.members.push_back(live_.at(seq).id);
                topic.vector += vectors_.at(seq);
            }
            std::sort(topic.members.begin(), topic.members.end());
            keyed.emplace_back(members.front(), std::move(topic));
        }
        std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Topic> out;
        out.reserve(keyed.size());
        for (auto& [first, topic] : keyed) out.push_back(std::move(topic));
        return out;
    }

    WindowConfig config_;
    WeightTransform transform_;
    LouvainConfig louvain_;

    WindowPhase phase_ = WindowPhase::Filling;
    bool started_ = false;
    Timestamp start_{};
    Timestamp end_{};
    Timestamp high_water_{};
    std::size_t dimension_ = 0;

    Sequence next_seq_ = 0;
    std::map<Sequence, LiveArticle> live_;
    std::map<Sequence, DocVector> vectors_;
    std::map<ArticleId, Sequence> by_id_;
    WeightedGraph<Sequence> graph_;
    Partition<Sequence> partition_;
    std::set<Sequence> temporary_;
};

}// namespace storystream

#endif// STORYSTREAM_WINDOW_HPP_
