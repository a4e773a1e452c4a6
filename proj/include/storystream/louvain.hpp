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
#ifndef STORYSTREAM_LOUVAIN_HPP_
#define STORYSTREAM_LOUVAIN_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "simgraph.hpp"

namespace storystream {

using CommunityId = std::size_t;

/// Node → community. Community ids are opaque; only equality matters.
template <class Key>
using Partition = std::map<Key, CommunityId>;

template <class Key>
struct HierarchyLevel {
    Partition<Key> partition;
    double modularity = 0.0;
};

/// Level 0 is the finest partition; each later level merges communities of
/// the one before it.
template <class Key>
struct Hierarchy {
    std::vector<HierarchyLevel<Key>> levels;

    [[nodiscard]] const HierarchyLevel<Key>& top() const { return levels.back(); }
    friend bool operator==(const Hierarchy& a, const Hierarchy& b) {
        if (a.levels.size() != b.levels.size()) return false;
        for (std::size_t i = 0; i < a.levels.size(); ++i) {
            if (a.levels[i].partition != b.levels[i].partition || a.levels[i].modularity != b.levels[i].modularity) {
                return false;
            }
        }
        return true;
    }
};

struct LouvainConfig {
    double resolution = 1.0;
    /// A local-moving pass stops once a sweep improves Q by less than this.
    double min_gain = 1e-7;

    void validate() const {
        if (!(resolution > 0.0)) throw Error(Errc::InvalidConfig, "resolution must be positive");
        if (!(min_gain > 0.0)) throw Error(Errc::InvalidConfig, "min modularity gain must be positive");
    }
};

template <class Key>
std::map<CommunityId, std::vector<Key>> group_by_community(const Partition<Key>& p) {
    std::map<CommunityId, std::vector<Key>> groups;
    for (const auto& [node, c] : p) {
        groups[c].push_back(node);
    }
    return groups;
}

namespace detail {

template <class Key>
void check_covers(const WeightedGraph<Key>& g, const Partition<Key>& p) {
    if (p.size() != g.node_count()) {
        throw Error(Errc::PartitionMismatch, "partition has " + std::to_string(p.size()) + " nodes, graph has " +
                                                 std::to_string(g.node_count()));
    }
    for (const auto& [node, c] : p) {
        if (!g.contains(node)) {
            throw Error(Errc::PartitionMismatch, "partition names unknown node '" + describe(node) + "'");
        }
    }
}

}// namespace detail

/**
 * Weighted Newman–Girvan modularity with resolution γ:
 *   Q = Σ_c [ in_c / 2m − γ (tot_c / 2m)² ]
 * where in_c sums A_ij over ordered pairs inside c and tot_c sums degrees.
 * Returns 0 on an edgeless graph.
 */
template <class Key>
double modularity(const WeightedGraph<Key>& g, const Partition<Key>& p, double resolution = 1.0) {
    detail::check_covers(g, p);
    const double two_m = 2.0 * g.total_weight();
    if (two_m == 0.0) {
        return 0.0;
    }
    struct Sums {
        double inside = 0.0;
        double total = 0.0;
    };
    std::map<CommunityId, Sums> sums;
    for (const auto& [node, c] : p) {
        auto& s = sums[c];
        s.total += g.degree(node);
        for (const auto& [other, w] : g.neighbors(node)) {
            if (p.at(other) == c) {
                s.inside += w;
            }
        }
    }
    double q = 0.0;
    for (const auto& [c, s] : sums) {
        const double share = s.total / two_m;
        q += s.inside / two_m - resolution * share * share;
    }
    return q;
}

namespace detail {

// Index-based graph used between aggregation rounds. `loops[i]` is the A_ii
// term of Σ_ij A_ij (an internal edge of weight w contributes 2w).
struct CompactGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
    std::vector<double> loops;
    std::vector<double> degree;
    double two_m = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return degree.size(); }
};

template <class Key>
CompactGraph compact(const WeightedGraph<Key>& g, const std::vector<Key>& keys) {
    std::map<Key, std::size_t> index;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        index.emplace(keys[i], i);
    }
    CompactGraph cg;
    cg.adjacency.resize(keys.size());
    cg.loops.assign(keys.size(), 0.0);
    cg.degree.assign(keys.size(), 0.0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (const auto& [other, w] : g.neighbors(keys[i])) {
            cg.adjacency[i].emplace_back(index.at(other), w);
        }
        cg.degree[i] = g.degree(keys[i]);
        cg.two_m += cg.degree[i];
    }
    return cg;
}

inline double compact_modularity(const CompactGraph& cg, const std::vector<std::size_t>& comm, double resolution) {
    if (cg.two_m == 0.0) {
        return 0.0;
    }
    std::vector<double> inside(cg.size(), 0.0);
    std::vector<double> total(cg.size(), 0.0);
    for (std::size_t i = 0; i < cg.size(); ++i) {
        inside[comm[i]] += cg.loops[i];
        total[comm[i]] += cg.degree[i];
        for (const auto& [j, w] : cg.adjacency[i]) {
            if (comm[j] == comm[i]) {
                inside[comm[i]] += w;
            }
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < cg.size(); ++c) {
        const double share = total[c] / cg.two_m;
        q += inside[c] / cg.two_m - resolution * share * share;
    }
    return q;
}

// Relative slack on gain comparisons so rounding noise never triggers a move.
inline constexpr double kGainSlack = 1e-12;

// Local-moving phase. Returns the community of each node, renumbered densely
// in order of first appearance, and the number of communities.
inline std::pair<std::vector<std::size_t>, std::size_t> local_moving(const CompactGraph& cg, const LouvainConfig& cfg) {
    const std::size_t n = cg.size();
    std::vector<std::size_t> comm(n);
    for (std::size_t i = 0; i < n; ++i) comm[i] = i;
    std::vector<double> total = cg.degree;

    std::vector<double> link(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> candidates;

    double q = compact_modularity(cg, comm, cfg.resolution);
    while (cg.two_m > 0.0) {
        std::size_t moves = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t own = comm[i];
            const double k = cg.degree[i];
            candidates.clear();
            for (const auto& [j, w] : cg.adjacency[i]) {
                const std::size_t c = comm[j];
                if (!seen[c]) {
                    seen[c] = 1;
                    candidates.push_back(c);
                }
                link[c] += w;
            }
            std::sort(candidates.begin(), candidates.end());

            total[own] -= k;
            std::size_t best = own;
            double best_gain = link[own] - cfg.resolution * total[own] * k / cg.two_m;
            const double slack = kGainSlack * k;
            for (std::size_t c : candidates) {
                if (c == own) continue;
                const double gain = link[c] - cfg.resolution * total[c] * k / cg.two_m;
                if (gain > best_gain + slack) {
                    best = c;
                    best_gain = gain;
                }
            }
            total[best] += k;
            if (best != own) {
                comm[i] = best;
                ++moves;
            }
            for (std::size_t c : candidates) {
                link[c] = 0.0;
                seen[c] = 0;
            }
            link[own] = 0.0;
        }
        if (moves == 0) {
            break;
        }
        const double next = compact_modularity(cg, comm, cfg.resolution);
        const double improvement = next - q;
        q = next;
        if (improvement < cfg.min_gain) {
            break;
        }
    }

    std::vector<std::size_t> renumber(n, std::numeric_limits<std::size_t>::max());
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (renumber[comm[i]] == std::numeric_limits<std::size_t>::max()) {
            renumber[comm[i]] = count++;
        }
        comm[i] = renumber[comm[i]];
    }
    return {std::move(comm), count};
}

inline CompactGraph aggregate(const CompactGraph& cg, const std::vector<std::size_t>& comm, std::size_t count) {
    CompactGraph next;
    next.loops.assign(count, 0.0);
    next.degree.assign(count, 0.0);
    next.adjacency.resize(count);
    std::vector<std::map<std::size_t, double>> links(count);
    for (std::size_t i = 0; i < cg.size(); ++i) {
        const std::size_t ci = comm[i];
        next.loops[ci] += cg.loops[i];
        next.degree[ci] += cg.degree[i];
        for (const auto& [j, w] : cg.adjacency[i]) {
            const std::size_t cj = comm[j];
            if (cj == ci) {
                next.loops[ci] += w;
            } else {
                links[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < count; ++c) {
        next.adjacency[c].assign(links[c].begin(), links[c].end());
        next.two_m += next.degree[c];
    }
    return next;
}

}// namespace detail

/**
 * @brief Hierarchical Louvain modularity optimization.
 *
 * Nodes are visited in ascending key order. A node leaves its community only
 * for a strictly better gain; equal-gain alternatives resolve to the lowest
 * community id. Aggregation repeats until a pass produces no merge.
 */
template <class Key>
Hierarchy<Key> louvain(const WeightedGraph<Key>& g, const LouvainConfig& cfg = {}) {
    cfg.validate();
    if (g.empty()) {
        throw Error(Errc::EmptyGraph, "louvain on an empty graph");
    }
    const auto keys = g.nodes();
    auto cg = detail::compact(g, keys);
    std::vector<std::size_t> membership(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) membership[i] = i;

    Hierarchy<Key> hierarchy;
    auto record = [&] {
        HierarchyLevel<Key> level;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            level.partition.emplace(keys[i], membership[i]);
        }
        level.modularity = modularity(g, level.partition, cfg.resolution);
        hierarchy.levels.push_back(std::move(level));
    };

    while (true) {
        auto [comm, count] = detail::local_moving(cg, cfg);
        if (count == cg.size()) {
            if (hierarchy.levels.empty()) {
                for (auto& m : membership) m = comm[m];
                record();
            }
            break;
        }
        for (auto& m : membership) m = comm[m];
        record();
        cg = detail::aggregate(cg, comm, count);
    }
    return hierarchy;
}

/**
 * @brief Places `new_node` into the community that maximizes modularity.
 *
 * Candidates are every community of `p` plus a fresh singleton. The winner
 * equals the argmax of a full modularity() evaluation of each candidate
 * partition; the difference against the singleton reduces to
 * (1/m)·[k_{i,C} − γ·tot_C·k_i / 2m]. Exact ties go to the singleton, then to
 * the lowest community id. The fresh id is one past the largest id in `p`.
 */
template <class Key>
CommunityId assign_on_the_fly(const WeightedGraph<Key>& g, const Partition<Key>& p, const Key& new_node,
                              double resolution = 1.0) {
    if (!g.contains(new_node)) {
        throw Error(Errc::NodeMissing, "node '" + detail::describe(new_node) + "' not in graph");
    }
    if (p.contains(new_node) || p.size() + 1 != g.node_count()) {
        throw Error(Errc::PartitionMismatch, "partition must cover every node except the newcomer");
    }
    for (const auto& [node, c] : p) {
        if (!g.contains(node)) {
            throw Error(Errc::PartitionMismatch, "partition names unknown node '" + detail::describe(node) + "'");
        }
    }
    CommunityId fresh = 0;
    for (const auto& [node, c] : p) {
        fresh = std::max(fresh, c + 1);
    }
    const double two_m = 2.0 * g.total_weight();
    const double k = g.degree(new_node);
    if (two_m == 0.0 || k == 0.0) {
        return fresh;
    }
    std::map<CommunityId, double> total;
    for (const auto& [node, c] : p) {
        total[c] += g.degree(node);
    }
    std::map<CommunityId, double> link;
    for (const auto& [other, w] : g.neighbors(new_node)) {
        link[p.at(other)] += w;
    }
    CommunityId best = fresh;
    double best_gain = 0.0;
    for (const auto& [c, tot] : total) {
        const auto it = link.find(c);
        const double k_in = it == link.end() ? 0.0 : it->second;
        const double gain = k_in - resolution * tot * k / two_m;
        if (gain > best_gain) {
            best = c;
            best_gain = gain;
        }
    }
    return best;
}

}// namespace storystream

#endif// STORYSTREAM_LOUVAIN_HPP_
