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
#ifndef STORYSTREAM_TOPIC_HPP_
#define STORYSTREAM_TOPIC_HPP_

#include <vector>

#include "embedding.hpp"
#include "time.hpp"

namespace storystream {

/// A community found inside one window. `vector` is the sum of the member
/// vectors; members are kept sorted.
struct Topic {
    std::vector<ArticleId> members;
    DocVector vector;
    Timestamp emitted{};

    friend bool operator==(const Topic&, const Topic&) = default;
};

struct Article {
    ArticleId id;
    Timestamp timestamp{};
    DocVector vector;
};

}// namespace storystream

#endif// STORYSTREAM_TOPIC_HPP_
