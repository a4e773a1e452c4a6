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
#ifndef STORYSTREAM_STORYNET_HPP_
#define STORYSTREAM_STORYNET_HPP_

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

using StoryId = std::uint64_t;

struct Story {
    StoryId id = 0;
    Timestamp created{};
    Timestamp last_active{};
    std::set<ArticleId> members;
    DocVector vector;

    friend bool operator==(const Story&, const Story&) = default;
};

// Merge events. Topics are referred to by their lead (smallest) member id.

struct TopicMerged {
    Timestamp at{};
    ArticleId topic;
    StoryId story = 0;
    std::size_t added = 0;
    friend bool operator==(const TopicMerged&, const TopicMerged&) = default;
};

struct TopicsCombined {
    Timestamp at{};
    ArticleId into;
    ArticleId from;
    friend bool operator==(const TopicsCombined&, const TopicsCombined&) = default;
};

struct TopicCast {
    Timestamp at{};
    ArticleId topic;
    StoryId story = 0;
    friend bool operator==(const TopicCast&, const TopicCast&) = default;
};

/// Every member of the topic was already owned by some story.
struct TopicDropped {
    Timestamp at{};
    ArticleId topic;
    friend bool operator==(const TopicDropped&, const TopicDropped&) = default;
};

struct StoriesMerged {
    Timestamp at{};
    StoryId survivor = 0;
    StoryId absorbed = 0;
    friend bool operator==(const StoriesMerged&, const StoriesMerged&) = default;
};

struct DocumentMigrated {
    Timestamp at{};
    ArticleId article;
    StoryId from = 0;
    std::optional<StoryId> to;  // empty while the receiving topic has no story yet
    friend bool operator==(const DocumentMigrated&, const DocumentMigrated&) = default;
};

using MergeEvent = std::variant<TopicMerged, TopicsCombined, TopicCast, TopicDropped, StoriesMerged, DocumentMigrated>;

/**
 * @brief Persistent set of stories fed by topic batches.
 *
 * A story keeps only member ids and the sum of member vectors. Individual
 * article vectors are retained separately, only as long as migrations may
 * still need them (see forget_before()).
 */
class StoryNetwork {
  public:
    // Retained vectors ---------------------------------------------------

    void retain(const ArticleId& id, Timestamp at, DocVector vec) { retained_[id] = Retained{at, std::move(vec)}; }

    /// Drops retained vectors of articles timestamped before `horizon`.
    void forget_before(Timestamp horizon) {
        std::erase_if(retained_, [&](const auto& entry) { return entry.second.at < horizon; });
    }

    [[nodiscard]] bool has_vector(const ArticleId& id) const { return retained_.contains(id); }
    [[nodiscard]] std::size_t retained_count() const noexcept { return retained_.size(); }

    [[nodiscard]] const DocVector& vector_of(const ArticleId& id) const {
        const auto it = retained_.find(id);
        if (it == retained_.end()) {
            throw Error(Errc::VectorUnavailable, "no retained vector for article '" + id + "'");
        }
        return it->second.vector;
    }

    // Inspection -----------------------------------------------------------

    [[nodiscard]] const std::map<StoryId, Story>& stories() const noexcept { return stories_; }
    [[nodiscard]] bool contains(StoryId id) const { return stories_.contains(id); }

    [[nodiscard]] const Story& story(StoryId id) const {
        const auto it = stories_.find(id);
        if (it == stories_.end()) {
            throw Error(Errc::UnknownStory, "story " + std::to_string(id) + " does not exist");
        }
        return it->second;
    }

    [[nodiscard]] std::optional<StoryId> owner(const ArticleId& article) const {
        const auto it = owner_.find(article);
        if (it == owner_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::vector<MergeEvent>& log() const noexcept { return log_; }
    [[nodiscard]] std::size_t article_count() const noexcept { return owner_.size(); }

    // Operations -------------------------------------------------------------

    /**
     * @brief Folds one batch of topics into the network.
     *
     * Stories and topics become nodes of a graph weighted by the cosine of
     * their vectors, and Louvain partitions it. Within each community:
     * topics merge into the oldest story; story-less topics merge with each
     * other and are cast as a new story; remaining stories merge into the
     * oldest. These phases run in that order across all communities.
     * Returns the events appended by this call.
     */
    std::vector<MergeEvent> integrate(const std::vector<Topic>& topics, const WeightTransform& transform,
                                      const LouvainConfig& cfg) {
        const auto first_event = log_.size();
        if (topics.empty()) {
            return {};
        }
        for (const auto& topic : topics) {
            if (topic.members.empty()) {
                throw Error(Errc::EmptyTopic, "topic without members");
            }
            for (const auto& a : topic.members) {
                if (!has_vector(a)) {
                    throw Error(Errc::MissingVector, "topic member '" + a + "' has no retained vector");
                }
            }
        }

        // Node keys: stories first (ascending id), then topics in batch order.
        std::vector<StoryId> story_ids;
        std::map<std::size_t, DocVector> vectors;
        for (const auto& [id, s] : stories_) {
            vectors.emplace(story_ids.size(), s.vector);
            story_ids.push_back(id);
        }
        const std::size_t topic_base = story_ids.size();
        for (std::size_t t = 0; t < topics.size(); ++t) {
            vectors.emplace(topic_base + t, topics[t].vector);
        }
        const auto graph = build_graph(vectors, transform);
        const auto partition = louvain(graph, cfg).top().partition;

        struct Group {
            std::vector<StoryId> stories;
            std::vector<std::size_t> topics;
        };
        std::vector<Group> groups;
        for (const auto& [community, nodes] : group_by_community(partition)) {
            Group group;
            for (auto node : nodes) {
                if (node < topic_base) {
                    group.stories.push_back(story_ids[node]);
                } else {
                    group.topics.push_back(node - topic_base);
                }
            }
            groups.push_back(std::move(group));
        }

        // Topic–story merges.
        std::vector<std::vector<Topic>> pending(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (auto t : groups[g].topics) {
                if (auto target = oldest_surviving(groups[g].stories)) {
                    merge_topic_into_story(topics[t], *target);
                } else {
                    pending[g].push_back(topics[t]);
                }
            }
        }
        // Topic–topic merges.
        std::vector<std::optional<Topic>> combined(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (pending[g].empty()) continue;
            Topic acc = pending[g].front();
            for (std::size_t i = 1; i < pending[g].size(); ++i) {
                acc = merge_topic_with_topic(acc, pending[g][i]);
            }
            combined[g] = std::move(acc);
        }
        // Casts.
        for (auto& topic : combined) {
            if (!topic) continue;
            try {
                cast_topic_to_story(*topic);
            } catch (const Error& e) {
                if (e.code() != Errc::EmptyTopic) throw;
                log_.emplace_back(TopicDropped{topic->emitted, topic->members.front()});
            }
        }
        // Story–story merges.
        for (const auto& group : groups) {
            std::vector<StoryId> alive;
            for (auto id : group.stories) {
                if (contains(id)) alive.push_back(id);
            }
            if (alive.size() < 2) continue;
            StoryId survivor = *oldest_surviving(alive);
            for (auto id : alive) {
                if (id != survivor) {
                    survivor = merge_story_with_story(survivor, id);
                }
            }
        }
        return {log_.begin() + static_cast<std::ptrdiff_t>(first_event), log_.end()};
    }

    /**
     * Members owned by another story are migrated out of it first;
     * members already in `target` are not counted twice.
     */
    void merge_topic_into_story(const Topic& topic, StoryId target) {
        (void)story(target);
        if (topic.members.empty()) {
            throw Error(Errc::EmptyTopic, "topic without members");
        }
        const auto at = topic.emitted;
        DocVector delta = topic.vector;
        std::vector<ArticleId> moving;
        for (const auto& a : topic.members) {
            const auto current = owner(a);
            if (current == target) {
                delta -= vector_of(a);
            } else {
                if (current) (void)vector_of(a);  // fail before mutating anything
                moving.push_back(a);
            }
        }
        for (const auto& a : moving) {
            if (const auto current = owner(a)) {
                detach(a, *current);
                log_.emplace_back(DocumentMigrated{at, a, *current, target});
            }
        }
        auto& s = stories_.at(target);
        for (const auto& a : moving) {
            s.members.insert(a);
            owner_[a] = target;
        }
        s.vector += delta;
        s.last_active = std::max(s.last_active, at);
        log_.emplace_back(TopicMerged{at, topic.members.front(), target, moving.size()});
    }

    /**
     * Members already owned by a story stay there and are removed
     * from the topic; the rest become a new story.
     */
    StoryId cast_topic_to_story(const Topic& topic) {
        Topic rest;
        rest.emitted = topic.emitted;
        rest.vector = topic.vector;
        for (const auto& a : topic.members) {
            if (owner(a)) {
                rest.vector -= vector_of(a);
            } else {
                rest.members.push_back(a);
            }
        }
        if (rest.members.empty()) {
            throw Error(Errc::EmptyTopic, "every member of topic '" + (topic.members.empty() ? std::string() : topic.members.front()) +
                                              "' already belongs to a story");
        }
        const StoryId id = next_id_++;
        Story s{id, topic.emitted, topic.emitted, {rest.members.begin(), rest.members.end()}, std::move(rest.vector)};
        for (const auto& a : s.members) owner_[a] = id;
        stories_.emplace(id, std::move(s));
        log_.emplace_back(TopicCast{topic.emitted, topic.members.front(), id});
        return id;
    }

    /// Union of members; shared members are counted once.
    Topic merge_topic_with_topic(const Topic& a, const Topic& b) {
        Topic merged;
        std::set_union(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                       std::back_inserter(merged.members));
        merged.vector = a.vector + b.vector;
        std::vector<ArticleId> shared;
        std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                              std::back_inserter(shared));
        for (const auto& x : shared) merged.vector -= vector_of(x);
        merged.emitted = std::max(a.emitted, b.emitted);
        const auto& [first, second] = a.members.front() <= b.members.front() ? std::tie(a, b) : std::tie(b, a);
        log_.emplace_back(TopicsCombined{merged.emitted, first.members.front(), second.members.front()});
        return merged;
    }

    /// The older story (earlier creation, then lower id) absorbs the other.
    StoryId merge_story_with_story(StoryId a, StoryId b) {
        if (!contains(a) || !contains(b)) {
            throw Error(Errc::UnknownStory, "story " + std::to_string(contains(a) ? b : a) + " does not exist");
        }
        if (a == b) return a;
        const bool a_older = std::pair(stories_.at(a).created, a) < std::pair(stories_.at(b).created, b);
        const StoryId survivor = a_older ? a : b;
        const StoryId absorbed = a_older ? b : a;
        auto& s = stories_.at(survivor);
        auto& gone = stories_.at(absorbed);
        for (const auto& m : gone.members) owner_[m] = survivor;
        s.members.merge(gone.members);
        s.vector += gone.vector;
        s.last_active = std::max(s.last_active, gone.last_active);
        const auto at = s.last_active;
        stories_.erase(absorbed);
        log_.emplace_back(StoriesMerged{at, survivor, absorbed});
        return survivor;
    }

    /// Moves one article between stories. An emptied source story is deleted.
    void migrate_document(const ArticleId& article, StoryId from, StoryId to) {
        check_migration(article, from);
        mutable_story(to);
        if (from == to) return;
        const auto& v = vector_of(article);
        const auto at = stories_.at(to).last_active;
        detach(article, from);
        auto& target = stories_.at(to);
        target.members.insert(article);
        target.vector += v;
        owner_[article] = to;
        log_.emplace_back(DocumentMigrated{at, article, from, to});
    }

    /// Moves one article out of a story into a not-yet-cast topic.
    void migrate_document(const ArticleId& article, StoryId from, Topic& to) {
        check_migration(article, from);
        const auto& v = vector_of(article);
        detach(article, from);
        owner_.erase(article);
        const auto pos = std::lower_bound(to.members.begin(), to.members.end(), article);
        if (pos == to.members.end() || *pos != article) {
            to.members.insert(pos, article);
            to.vector += v;
        }
        log_.emplace_back(DocumentMigrated{to.emitted, article, from, std::nullopt});
    }

  private:
    struct Retained {
        Timestamp at{};
        DocVector vector;
    };

    Story& mutable_story(StoryId id) { return const_cast<Story&>(story(id)); }

    void check_migration(const ArticleId& article, StoryId from) const {
        const auto& s = story(from);
        if (!s.members.contains(article)) {
            throw Error(Errc::NotAMember, "article '" + article + "' is not in story " + std::to_string(from));
        }
        (void)vector_of(article);
    }

    // Removes `article` from story `from`, subtracting its vector; deletes the
    // story when it empties. Ownership is left to the caller.
    void detach(const ArticleId& article, StoryId from) {
        auto& s = stories_.at(from);
        s.vector -= vector_of(article);
        s.members.erase(article);
        owner_.erase(article);
        if (s.members.empty()) {
            stories_.erase(from);
        }
    }

    std::optional<StoryId> oldest_surviving(const std::vector<StoryId>& ids) const {
        std::optional<StoryId> best;
        for (auto id : ids) {
            if (!contains(id)) continue;
            if (!best || std::pair(stories_.at(id).created, id) < std::pair(stories_.at(*best).created, *best)) {
                best = id;
            }
        }
        return best;
    }

    std::map<StoryId, Story> stories_;
    std::map<ArticleId, StoryId> owner_;
    std::map<ArticleId, Retained> retained_;
    std::vector<MergeEvent> log_;
    StoryId next_id_ = 1;
};

}// namespace storystream

#endif// STORYSTREAM_STORYNET_HPP_
