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
#ifndef STORYSTREAM_EVALMETRICS_HPP_
#define STORYSTREAM_EVALMETRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "embedding.hpp"
#include "error.hpp"

namespace storystream {

/// Article id → cluster label.
using Labeling = std::map<ArticleId, std::string>;

struct IdSetDifference {
    std::vector<ArticleId> only_in_pred;
    std::vector<ArticleId> only_in_gold;
    [[nodiscard]] bool empty() const noexcept { return only_in_pred.empty() && only_in_gold.empty(); }
};

inline IdSetDifference id_set_difference(const Labeling& pred, const Labeling& gold) {
    IdSetDifference diff;
    for (const auto& [id, label] : pred) {
        if (!gold.contains(id)) diff.only_in_pred.push_back(id);
    }
    for (const auto& [id, label] : gold) {
        if (!pred.contains(id)) diff.only_in_gold.push_back(id);
    }
    return diff;
}

namespace detail {

inline void check_same_ids(const Labeling& pred, const Labeling& gold) {
    if (pred.empty() || gold.empty()) {
        throw Error(Errc::IdSetMismatch, "labelings must be non-empty");
    }
    const auto diff = id_set_difference(pred, gold);
    if (!diff.empty()) {
        throw Error(Errc::IdSetMismatch, std::to_string(diff.only_in_pred.size()) + " ids only in prediction, " +
                                             std::to_string(diff.only_in_gold.size()) + " only in gold");
    }
}

struct Contingency {
    std::map<std::pair<std::string, std::string>, std::int64_t> joint;
    std::map<std::string, std::int64_t> pred;
    std::map<std::string, std::int64_t> gold;
    std::int64_t n = 0;
};

inline Contingency contingency(const Labeling& pred, const Labeling& gold) {
    Contingency c;
    for (const auto& [id, p] : pred) {
        const auto& g = gold.at(id);
        ++c.joint[{p, g}];
        ++c.pred[p];
        ++c.gold[g];
        ++c.n;
    }
    return c;
}

inline std::int64_t pairs(std::int64_t k) { return k * (k - 1) / 2; }

}// namespace detail

/// Harmonic mean of pair precision and recall given integer pair counts.
/// Both sides pairless means two all-singleton clusterings, which agree.
inline double f1_from_pair_counts(std::int64_t both, std::int64_t pred_pairs, std::int64_t gold_pairs) {
    if (pred_pairs == 0 && gold_pairs == 0) {
        return 1.0;
    }
    const double precision = pred_pairs == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(pred_pairs);
    const double recall = gold_pairs == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(gold_pairs);
    if (precision + recall == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

/// Pair-counting F1 over all unordered article pairs.
inline double pairwise_f1(const Labeling& pred, const Labeling& gold) {
    detail::check_same_ids(pred, gold);
    const auto c = detail::contingency(pred, gold);
    std::int64_t both = 0, pred_pairs = 0, gold_pairs = 0;
    for (const auto& [key, count] : c.joint) both += detail::pairs(count);
    for (const auto& [label, count] : c.pred) pred_pairs += detail::pairs(count);
    for (const auto& [label, count] : c.gold) gold_pairs += detail::pairs(count);
    return f1_from_pair_counts(both, pred_pairs, gold_pairs);
}

/// Mutual information normalized by the arithmetic mean of the two entropies
/// (natural log).
inline double nmi(const Labeling& pred, const Labeling& gold) {
    detail::check_same_ids(pred, gold);
    const auto c = detail::contingency(pred, gold);
    const double n = static_cast<double>(c.n);
    auto entropy = [n](const std::map<std::string, std::int64_t>& counts) {
        double h = 0.0;
        for (const auto& [label, count] : counts) {
            const double p = static_cast<double>(count) / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double h_pred = entropy(c.pred);
    const double h_gold = entropy(c.gold);
    if (c.pred.size() == 1 && c.gold.size() == 1) return 1.0;
    if (c.pred.size() == 1 || c.gold.size() == 1) return 0.0;
    double mi = 0.0;
    for (const auto& [key, count] : c.joint) {
        const double pxy = static_cast<double>(count) / n;
        const double px = static_cast<double>(c.pred.at(key.first)) / n;
        const double py = static_cast<double>(c.gold.at(key.second)) / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    const double value = mi / ((h_pred + h_gold) / 2.0);
    return std::clamp(value, 0.0, 1.0);
}

/// JSON Lines `{"id": string, "label": string|number}`.
inline Labeling parse_labels(std::istream& in) {
    Labeling labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = "line " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string() || !record.contains("label")) {
            throw Error(Errc::ParseError, where + ": expected {\"id\": string, \"label\": string}");
        }
        const auto& raw = record["label"];
        std::string label;
        if (raw.is_string()) {
            label = raw.get<std::string>();
        } else if (raw.is_number_integer()) {
            label = raw.dump();
        } else {
            throw Error(Errc::ParseError, where + ": label must be a string or integer");
        }
        auto id = record["id"].get<std::string>();
        if (!labels.emplace(id, std::move(label)).second) {
            throw Error(Errc::DuplicateId, where + ": id '" + id + "' labeled twice");
        }
    }
    return labels;
}

inline Labeling load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::ParseError, "cannot open label file " + path.string());
    }
    return parse_labels(in);
}

}// namespace storystream

#endif// STORYSTREAM_EVALMETRICS_HPP_
