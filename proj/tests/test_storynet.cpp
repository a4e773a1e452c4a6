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
#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "storystream/storynet.hpp"

using namespace storystream;

namespace {

const WeightTransform kClamp{};
const Timestamp kDay0 = parse_timestamp("2016-06-24");

Timestamp day(int n) { return kDay0 + whole_days(n); }

template <class F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::InvalidConfig;
}

Topic topic_of(const StoryNetwork& net, std::vector<ArticleId> members, Timestamp at) {
    std::sort(members.begin(), members.end());
    Topic t;
    t.members = std::move(members);
    t.emitted = at;
    t.vector = DocVector::zeros(net.vector_of(t.members.front()).dimension());
    for (const auto& m : t.members) t.vector += net.vector_of(m);
    return t;
}

DocVector recompute(const StoryNetwork& net, const Story& s) {
    DocVector sum = DocVector::zeros(s.vector.dimension());
    for (const auto& m : s.members) sum += net.vector_of(m);
    return sum;
}

void expect_integrity(const StoryNetwork& net, double tol = 1e-6) {
    std::set<ArticleId> seen;
    for (const auto& [id, s] : net.stories()) {
        EXPECT_EQ(id, s.id);
        EXPECT_FALSE(s.members.empty());
        EXPECT_LE(s.created, s.last_active);
        for (const auto& m : s.members) {
            EXPECT_TRUE(seen.insert(m).second) << m << " in two stories";
            EXPECT_EQ(net.owner(m), id);
        }
        const auto sum = recompute(net, s);
        for (std::size_t k = 0; k < sum.dimension(); ++k) EXPECT_NEAR(s.vector[k], sum[k], tol);
    }
    EXPECT_EQ(seen.size(), net.article_count());
}

// Dyadic coordinates keep every sum exact.
StoryNetwork network_with(std::initializer_list<std::pair<const char*, DocVector>> vectors) {
    StoryNetwork net;
    for (const auto& [id, v] : vectors) net.retain(id, kDay0, v);
    return net;
}

}// namespace

TEST(Integrate, EmptyNetworkCastsTopic) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0.5, 0.25}}});
    const auto events = net.integrate({topic_of(net, {"a", "b"}, day(1))}, kClamp, {});
    ASSERT_EQ(events.size(), 1u);
    const auto cast = std::get<TopicCast>(events[0]);
    EXPECT_EQ(cast.story, 1u);
    ASSERT_EQ(net.stories().size(), 1u);
    const auto& s = net.story(1);
    EXPECT_EQ(s.members, (std::set<ArticleId>{"a", "b"}));
    EXPECT_EQ(s.vector, (DocVector{1.5, 0.25}));
    EXPECT_EQ(s.created, day(1));
    EXPECT_EQ(s.last_active, day(1));
}

TEST(Integrate, IdenticalVectorMergesIntoStory) {
    auto net = network_with({{"a", {1, 0}}, {"b", {1, 0}}, {"c", {0, 1}}});
    net.integrate({topic_of(net, {"a"}, day(0)), topic_of(net, {"c"}, day(0))}, kClamp, {});
    ASSERT_EQ(net.stories().size(), 2u);
    const auto events = net.integrate({topic_of(net, {"b"}, day(1))}, kClamp, {});
    ASSERT_EQ(events.size(), 1u);
    const auto merged = std::get<TopicMerged>(events[0]);
    EXPECT_EQ(merged.story, *net.owner("a"));
    EXPECT_EQ(net.owner("b"), net.owner("a"));
    EXPECT_EQ(net.story(merged.story).last_active, day(1));
    expect_integrity(net);
}

TEST(Integrate, MissingVectorLeavesNetworkUntouched) {
    auto net = network_with({{"a", {1, 0}}});
    net.integrate({topic_of(net, {"a"}, day(0))}, kClamp, {});
    Topic ghost{{"zz"}, {1, 0}, day(1)};
    const auto before = net.stories();
    EXPECT_EQ(code_of([&] { net.integrate({topic_of(net, {"a"}, day(1)), ghost}, kClamp, {}); }),
              Errc::MissingVector);
    EXPECT_EQ(net.stories(), before);
}

TEST(Integrate, Deterministic) {
    auto build = [] {
        auto net = network_with({{"a", {1, 0, 0}}, {"b", {0.75, 0.25, 0}}, {"c", {0, 1, 0}}, {"d", {0, 0.5, 0.5}},
                                 {"e", {0, 0, 1}}});
        net.integrate({topic_of(net, {"a", "b"}, day(0)), topic_of(net, {"c"}, day(0))}, kClamp, {});
        net.integrate({topic_of(net, {"b", "c", "d"}, day(1)), topic_of(net, {"e"}, day(1))}, kClamp, {});
        return net;
    };
    const auto x = build();
    const auto y = build();
    EXPECT_EQ(x.log(), y.log());
    EXPECT_EQ(x.stories(), y.stories());
    expect_integrity(x);
}

TEST(MergeTopicIntoStory, DisjointMembersAddExactly) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0.5, 0.5}}, {"c", {0.25, 0}}});
    const auto id = net.cast_topic_to_story(topic_of(net, {"a"}, day(0)));
    const auto old = net.story(id).vector;
    const auto t = topic_of(net, {"b", "c"}, day(2));
    net.merge_topic_into_story(t, id);
    EXPECT_EQ(net.story(id).members.size(), 3u);
    EXPECT_EQ(net.story(id).vector, old + t.vector);
    EXPECT_EQ(net.story(id).last_active, day(2));
}

TEST(MergeTopicIntoStory, SharedArticleMigratesFirst) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0.5, 0.5}}, {"c", {0, 1}}, {"d", {0.25, 0.75}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a", "b"}, day(0)));
    const auto s2 = net.cast_topic_to_story(topic_of(net, {"c"}, day(0)));
    net.merge_topic_into_story(topic_of(net, {"b", "d"}, day(1)), s2);
    EXPECT_EQ(net.story(s1).members, std::set<ArticleId>{"a"});
    EXPECT_EQ(net.story(s2).members, (std::set<ArticleId>{"b", "c", "d"}));
    EXPECT_EQ(net.story(s1).vector, (DocVector{1, 0}));
    const auto& log = net.log();
    const auto migrated = std::find_if(log.begin(), log.end(),
                                       [](const MergeEvent& e) { return std::holds_alternative<DocumentMigrated>(e); });
    ASSERT_NE(migrated, log.end());
    EXPECT_EQ(std::get<DocumentMigrated>(*migrated), (DocumentMigrated{day(1), "b", s1, s2}));
    expect_integrity(net);
}

TEST(MergeTopicIntoStory, IdempotentReMerge) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0.5, 0.5}}});
    const auto id = net.cast_topic_to_story(topic_of(net, {"a", "b"}, day(0)));
    const auto before = net.story(id);
    net.merge_topic_into_story(topic_of(net, {"a", "b"}, day(3)), id);
    auto after = net.story(id);
    EXPECT_EQ(after.last_active, day(3));
    after.last_active = before.last_active;
    EXPECT_EQ(after, before);
}

TEST(MergeTopicIntoStory, UnknownStory) {
    auto net = network_with({{"a", {1, 0}}});
    EXPECT_EQ(code_of([&] { net.merge_topic_into_story(topic_of(net, {"a"}, day(0)), 42); }), Errc::UnknownStory);
}

TEST(CastTopic, FirstTopicCopied) {
    auto net = network_with({{"a", {0.5, 0}}, {"b", {0.5, 1}}});
    const auto t = topic_of(net, {"a", "b"}, day(0));
    const auto id = net.cast_topic_to_story(t);
    EXPECT_EQ(net.story(id).vector, t.vector);
    EXPECT_EQ(net.story(id).members, (std::set<ArticleId>{"a", "b"}));
}

TEST(CastTopic, FullyClaimedTopicIsEmpty) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}});
    net.cast_topic_to_story(topic_of(net, {"a"}, day(0)));
    net.cast_topic_to_story(topic_of(net, {"b"}, day(0)));
    EXPECT_EQ(code_of([&] { net.cast_topic_to_story(topic_of(net, {"a", "b"}, day(1))); }), Errc::EmptyTopic);
    EXPECT_EQ(net.stories().size(), 2u);
}

TEST(CastTopic, TwoSeparateCommunitiesTwoStories) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}});
    net.integrate({topic_of(net, {"a"}, day(0)), topic_of(net, {"b"}, day(0))}, kClamp, {});
    ASSERT_EQ(net.stories().size(), 2u);
    EXPECT_NE(net.owner("a"), net.owner("b"));
    expect_integrity(net);
}

TEST(MergeTopicWithTopic, SingletonsDoubleVector) {
    auto net = network_with({{"a", {0.5, 0.25}}, {"b", {0.5, 0.25}}});
    const auto m = net.merge_topic_with_topic(topic_of(net, {"a"}, day(0)), topic_of(net, {"b"}, day(0)));
    EXPECT_EQ(m.members, (std::vector<ArticleId>{"a", "b"}));
    EXPECT_EQ(m.vector, (DocVector{1.0, 0.5}));
}

TEST(MergeTopicWithTopic, CommutativeAndFoldOrderFree) {
    auto net = network_with({{"a", {0.5, 0}}, {"b", {0.25, 1}}, {"c", {2, 0.75}}, {"d", {0.125, 0.5}}});
    const std::vector<Topic> ts{topic_of(net, {"a"}, day(0)), topic_of(net, {"b", "c"}, day(0)),
                                topic_of(net, {"c", "d"}, day(0))};
    const auto ab = net.merge_topic_with_topic(ts[0], ts[1]);
    const auto ba = net.merge_topic_with_topic(ts[1], ts[0]);
    EXPECT_EQ(ab.members, ba.members);
    EXPECT_EQ(ab.vector, ba.vector);
    std::vector<int> order{0, 1, 2};
    std::optional<Topic> reference;
    do {
        auto acc = ts[order[0]];
        acc = net.merge_topic_with_topic(acc, ts[order[1]]);
        acc = net.merge_topic_with_topic(acc, ts[order[2]]);
        EXPECT_EQ(acc.members, (std::vector<ArticleId>{"a", "b", "c", "d"}));
        EXPECT_EQ(acc.vector, (DocVector{2.875, 2.25}));  // shared "c" counted once
        if (reference) {
            EXPECT_EQ(acc, *reference);
        }
        reference = acc;
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST(MergeStories, OlderSurvives) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}});
    const auto young = net.cast_topic_to_story(topic_of(net, {"a"}, day(2)));
    const auto old = net.cast_topic_to_story(topic_of(net, {"b", "c"}, day(1)));
    EXPECT_EQ(net.merge_story_with_story(young, old), old);
    EXPECT_FALSE(net.contains(young));
    EXPECT_EQ(code_of([&] { (void)net.story(young); }), Errc::UnknownStory);
    EXPECT_EQ(net.story(old).members.size(), 3u);
    EXPECT_EQ(net.story(old).vector, (DocVector{2, 2}));
    EXPECT_EQ(net.story(old).last_active, day(2));
}

TEST(MergeStories, TieGoesToLowerId) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a"}, day(0)));
    const auto s2 = net.cast_topic_to_story(topic_of(net, {"b"}, day(0)));
    EXPECT_EQ(net.merge_story_with_story(s2, s1), s1);
    EXPECT_EQ(code_of([&] { net.merge_story_with_story(s1, s2); }), Errc::UnknownStory);
}

TEST(Migrate, SoleMemberDeletesSource) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a"}, day(0)));
    const auto s2 = net.cast_topic_to_story(topic_of(net, {"b"}, day(0)));
    net.migrate_document("a", s1, s2);
    EXPECT_FALSE(net.contains(s1));
    EXPECT_EQ(net.story(s2).vector, (DocVector{1, 1}));
}

TEST(Migrate, ThereAndBackRestoresBitwise) {
    auto net = network_with({{"a", {0.5, 0.125}}, {"b", {0.25, 1}}, {"c", {1, 0.375}}, {"d", {0.75, 0.5}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a", "b"}, day(0)));
    const auto s2 = net.cast_topic_to_story(topic_of(net, {"c", "d"}, day(0)));
    const auto before = net.stories();
    net.migrate_document("b", s1, s2);
    net.migrate_document("b", s2, s1);
    EXPECT_EQ(net.stories(), before);
}

TEST(Migrate, IntoPendingTopic) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {0, 0.5}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a", "b"}, day(0)));
    auto t = topic_of(net, {"c"}, day(1));
    net.migrate_document("b", s1, t);
    EXPECT_EQ(t.members, (std::vector<ArticleId>{"b", "c"}));
    EXPECT_EQ(t.vector, (DocVector{0, 1.5}));
    EXPECT_FALSE(net.owner("b"));
    EXPECT_EQ(std::get<DocumentMigrated>(net.log().back()).to, std::nullopt);
}

TEST(Migrate, Errors) {
    auto net = network_with({{"a", {1, 0}}, {"b", {0, 1}}});
    const auto s1 = net.cast_topic_to_story(topic_of(net, {"a"}, day(0)));
    const auto s2 = net.cast_topic_to_story(topic_of(net, {"b"}, day(0)));
    EXPECT_EQ(code_of([&] { net.migrate_document("b", s1, s2); }), Errc::NotAMember);
    net.forget_before(day(1));
    EXPECT_FALSE(net.has_vector("a"));
    EXPECT_EQ(code_of([&] { net.migrate_document("a", s1, s2); }), Errc::VectorUnavailable);
    EXPECT_EQ(net.story(s1).members.size(), 1u);
}

TEST(Retention, ForgetBeforeIsStrict) {
    StoryNetwork net;
    net.retain("old", day(0), {1, 0});
    net.retain("edge", day(1), {1, 0});
    net.forget_before(day(1));
    EXPECT_FALSE(net.has_vector("old"));
    EXPECT_TRUE(net.has_vector("edge"));
    EXPECT_EQ(net.retained_count(), 1u);
}

// Random integrate batches over shifting themes keep the structural invariants.
TEST(StoryNetProperty, IntegrateSequences) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        StoryNetwork net;
        std::vector<DocVector> themes;
        for (int t = 0; t < 4; ++t) {
            DocVector v = DocVector::zeros(6);
            for (std::size_t k = 0; k < 6; ++k) v[k] = gauss(rng);
            themes.push_back(v);
        }
        std::vector<ArticleId> pool;
        int next = 0;
        Timestamp last_created{};
        for (int batch = 0; batch < 12; ++batch) {
            for (int i = 0; i < 5; ++i) {
                const auto id = "t" + std::to_string(trial) + "-" + std::to_string(next++);
                DocVector v = themes[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];
                for (std::size_t k = 0; k < 6; ++k) v[k] += 0.3 * gauss(rng);
                net.retain(id, day(batch), v);
                pool.push_back(id);
            }
            // Topics over the most recent articles, split at random.
            std::vector<ArticleId> recent(pool.end() - std::min<std::ptrdiff_t>(12, pool.size()), pool.end());
            std::shuffle(recent.begin(), recent.end(), rng);
            std::vector<Topic> topics;
            std::size_t pos = 0;
            while (pos < recent.size()) {
                const auto len = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
                std::vector<ArticleId> members(recent.begin() + pos, recent.begin() + std::min(recent.size(), pos + len));
                topics.push_back(topic_of(net, members, day(batch)));
                pos += len;
            }
            for (const auto& e : net.integrate(topics, kClamp, {})) {
                if (const auto* c = std::get_if<TopicCast>(&e)) {
                    EXPECT_GE(c->at, last_created);
                    last_created = c->at;
                }
            }
            expect_integrity(net);
            // Every topic member now belongs to a story.
            for (const auto& t : topics) {
                for (const auto& m : t.members) EXPECT_TRUE(net.owner(m).has_value());
            }
        }
    }
}
