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
#ifndef STORYSTREAM_HPP_
#define STORYSTREAM_HPP_

#include "storystream/config.hpp"
#include "storystream/embedding.hpp"
#include "storystream/error.hpp"
#include "storystream/evalmetrics.hpp"
#include "storystream/louvain.hpp"
#include "storystream/pipeline.hpp"
#include "storystream/simgraph.hpp"
#include "storystream/storynet.hpp"
#include "storystream/time.hpp"
#include "storystream/topic.hpp"
#include "storystream/window.hpp"

#endif// STORYSTREAM_HPP_
