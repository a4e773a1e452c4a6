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
#ifndef STORYSTREAM_SIMGRAPH_HPP_
#define STORYSTREAM_SIMGRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "embedding.hpp"
#include "error.hpp"

namespace storystream {

/// Cosine similarity. Throws ZeroVector / DimensionMismatch.
inline double cosine(const DocVector& u, const DocVector& v) {
    if (u.dimension() != v.dimension()) {
        throw Error(Errc::DimensionMismatch, "cosine of dimensions " + std::to_string(u.dimension()) + " and " +
                                                 std::to_string(v.dimension()));
    }
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
        throw Error(Errc::ZeroVector, "cosine of a zero vector");
    }
    return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

/// Maps a cosine to a non-negative edge weight. Pairs whose weight is not
/// strictly above `epsilon` get no edge.
struct WeightTransform {
    enum class Kind { Clamp, Shift };

    Kind kind = Kind::Clamp;
    double epsilon = 0.0;

    [[nodiscard]] double apply(double cos) const noexcept {
        return kind == Kind::Clamp ? std::max(0.0, cos) : (cos + 1.0) / 2.0;
    }

    [[nodiscard]] bool keeps(double weight) const noexcept { return weight > epsilon; }

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon < 1.0)) {
            throw Error(Errc::InvalidConfig, "weight threshold must lie in [0, 1)");
        }
    }
};

inline std::string_view to_string(WeightTransform::Kind kind) noexcept {
    return kind == WeightTransform::Kind::Clamp ? "clamp" : "shift";
}

inline WeightTransform::Kind parse_transform_kind(std::string_view name) {
    if (name == "clamp") return WeightTransform::Kind::Clamp;
    if (name == "shift") return WeightTransform::Kind::Shift;
    throw Error(Errc::InvalidConfig, "unknown weight transform '" + std::string(name) + "'");
}

namespace detail {

template <class Key>
std::string describe(const Key& key) {
    if constexpr (std::is_convertible_v<Key, std::string_view>) {
        return std::string(key);
    } else {
        std::ostringstream os;
        os << key;
        return os.str();
    }
}

}// namespace detail

/**
 * @brief Undirected weighted graph without self-edges.
 *
 * Keeps the weighted degree of every node and the total edge weight m
 * (each edge counted once). Node iteration is in ascending key order.
 */
template <class Key>
class WeightedGraph {
  public:
    using key_type = Key;
    using Neighbors = std::map<Key, double>;

    [[nodiscard]] bool contains(const Key& id) const { return nodes_.contains(id); }
    [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edge_count_; }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    [[nodiscard]] double total_weight() const noexcept { return total_weight_; }

    [[nodiscard]] std::vector<Key> nodes() const {
        std::vector<Key> out;
        out.reserve(nodes_.size());
        for (const auto& [id, node] : nodes_) {
            out.push_back(id);
        }
        return out;
    }

    [[nodiscard]] const Neighbors& neighbors(const Key& id) const { return at(id).edges; }
    [[nodiscard]] double degree(const Key& id) const { return at(id).degree; }

    [[nodiscard]] double weight(const Key& u, const Key& v) const {
        const auto& edges = at(u).edges;
        const auto it = edges.find(v);
        return it == edges.end() ? 0.0 : it->second;
    }

    void add_node(const Key& id) {
        if (!nodes_.emplace(id, Node{}).second) {
            throw Error(Errc::DuplicateNode, "node '" + detail::describe(id) + "' already present");
        }
    }

    /// Inserts or overwrites the edge u–v. Weights must be positive.
    void set_edge(const Key& u, const Key& v, double w) {
        if (u == v) {
            throw Error(Errc::UnknownNode, "self-edge on '" + detail::describe(u) + "'");
        }
        if (!(w > 0.0)) {
            throw Error(Errc::InvalidConfig, "edge weights must be positive");
        }
        auto& a = at(u);
        auto& b = at(v);
        const auto existing = a.edges.find(v);
        if (existing != a.edges.end()) {
            const double old = existing->second;
            a.degree -= old;
            b.degree -= old;
            total_weight_ -= old;
            --edge_count_;
        }
        a.edges[v] = w;
        b.edges[u] = w;
        a.degree += w;
        b.degree += w;
        total_weight_ += w;
        ++edge_count_;
    }

    /// Removes the given nodes and their incident edges. All ids are checked
    /// before anything is mutated.
    void erase(const std::set<Key>& ids) {
        for (const auto& id : ids) {
            if (!contains(id)) {
                throw Error(Errc::UnknownNode, "node '" + detail::describe(id) + "' not in graph");
            }
        }
        if (ids.empty()) {
            return;
        }
        std::set<Key> touched;
        for (const auto& id : ids) {
            for (const auto& [other, w] : nodes_.at(id).edges) {
                if (!ids.contains(other)) {
                    nodes_.at(other).edges.erase(id);
                    touched.insert(other);
                }
            }
            nodes_.erase(id);
        }
        for (const auto& id : touched) {
            auto& node = nodes_.at(id);
            node.degree = 0.0;
            for (const auto& [other, w] : node.edges) {
                node.degree += w;
            }
        }
        recount();
    }

  private:
    struct Node {
        Neighbors edges;
        double degree = 0.0;
    };

    const Node& at(const Key& id) const {
        const auto it = nodes_.find(id);
        if (it == nodes_.end()) {
            throw Error(Errc::UnknownNode, "node '" + detail::describe(id) + "' not in graph");
        }
        return it->second;
    }

    Node& at(const Key& id) { return const_cast<Node&>(std::as_const(*this).at(id)); }

    void recount() {
        total_weight_ = 0.0;
        edge_count_ = 0;
        for (const auto& [u, node] : nodes_) {
            for (const auto& [v, w] : node.edges) {
                if (u < v) {
                    total_weight_ += w;
                    ++edge_count_;
                }
            }
        }
    }

    std::map<Key, Node> nodes_;
    std::size_t edge_count_ = 0;
    double total_weight_ = 0.0;
};

/// Dense pairwise construction; one node per vector.
template <class Key>
WeightedGraph<Key> build_graph(const std::map<Key, DocVector>& vectors, const WeightTransform& transform) {
    WeightedGraph<Key> g;
    for (const auto& [id, vec] : vectors) {
        g.add_node(id);
    }
    for (auto i = vectors.begin(); i != vectors.end(); ++i) {
        for (auto j = std::next(i); j != vectors.end(); ++j) {
            const double w = transform.apply(cosine(i->second, j->second));
            if (transform.keeps(w)) {
                g.set_edge(i->first, j->first, w);
            }
        }
    }
    return g;
}

/// Adds `id` and its edges to every existing node. `others` must hold a
/// vector for exactly the nodes currently in `g`.
template <class Key>
void add_node(WeightedGraph<Key>& g, const Key& id, const DocVector& vec, const std::map<Key, DocVector>& others,
              const WeightTransform& transform) {
    if (g.contains(id)) {
        throw Error(Errc::DuplicateNode, "node '" + detail::describe(id) + "' already present");
    }
    if (others.size() != g.node_count()) {
        throw Error(Errc::UnknownNode, "vector map does not cover the graph's nodes");
    }
    std::vector<std::pair<Key, double>> edges;
    for (const auto& [other, other_vec] : others) {
        if (!g.contains(other)) {
            throw Error(Errc::UnknownNode, "vector given for node '" + detail::describe(other) + "' not in graph");
        }
        const double w = transform.apply(cosine(vec, other_vec));
        if (transform.keeps(w)) {
            edges.emplace_back(other, w);
        }
    }
    g.add_node(id);
    for (const auto& [other, w] : edges) {
        g.set_edge(id, other, w);
    }
}

template <class Key>
void remove_nodes(WeightedGraph<Key>& g, const std::set<Key>& ids) {
    g.erase(ids);
}

}// namespace storystream

#endif// STORYSTREAM_SIMGRAPH_HPP_
