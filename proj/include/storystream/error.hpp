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
#ifndef STORYSTREAM_ERROR_HPP_
#define STORYSTREAM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace storystream {

enum class Errc {
    // embedding
    EmptyText,
    BadDimension,
    DimensionMismatch,
    DuplicateId,
    ParseError,
    // simgraph
    ZeroVector,
    DuplicateNode,
    UnknownNode,
    // louvain
    PartitionMismatch,
    EmptyGraph,
    NodeMissing,
    // window
    OutOfOrder,
    DuplicateArticle,
    NotInInchingPhase,
    EmptyWindow,
    // storynet
    MissingVector,
    UnknownStory,
    EmptyTopic,
    VectorUnavailable,
    NotAMember,
    // evalmetrics
    IdSetMismatch,
    // configuration
    InvalidConfig,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyText: return "EmptyText";
        case Errc::BadDimension: return "BadDimension";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::ParseError: return "ParseError";
        case Errc::ZeroVector: return "ZeroVector";
        case Errc::DuplicateNode: return "DuplicateNode";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::PartitionMismatch: return "PartitionMismatch";
        case Errc::EmptyGraph: return "EmptyGraph";
        case Errc::NodeMissing: return "NodeMissing";
        case Errc::OutOfOrder: return "OutOfOrder";
        case Errc::DuplicateArticle: return "DuplicateArticle";
        case Errc::NotInInchingPhase: return "NotInInchingPhase";
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::MissingVector: return "MissingVector";
        case Errc::UnknownStory: return "UnknownStory";
        case Errc::EmptyTopic: return "EmptyTopic";
        case Errc::VectorUnavailable: return "VectorUnavailable";
        case Errc::NotAMember: return "NotAMember";
        case Errc::IdSetMismatch: return "IdSetMismatch";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

}// namespace storystream

#endif// STORYSTREAM_ERROR_HPP_
