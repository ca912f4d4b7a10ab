/*
    Copyright 2026 The stepcorr Authors

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
#pragma once

#include <stepcorr/event_set.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace stepcorr {

struct PMConfig {
    std::size_t max_order = 1;  // m
    std::size_t lookahead = 1;  // l
    double p_thr = 0.0;

    void validate() const;
};

struct PMPrediction {
    std::vector<EventSet> sequence;
    double probability = 0.0;
    /// Length of the history suffix the prediction came from.
    std::size_t order = 0;
};

/// Variable-order predictor by partial matching.
///
/// The trie stores every contiguous state sequence of length up to m + l with
/// its occurrence count. Predictions extend each matching suffix of the last m
/// states by up to l states; an extension's probability is the product of
/// stepwise conditionals along the trie path.
class PartialMatchTrie {
  public:
    explicit PartialMatchTrie(PMConfig config = {});

    void observe(const EventSet& state);

    const PMConfig& config() const noexcept { return config_; }
    std::uint64_t steps() const noexcept { return nodes_.front().count; }
    std::uint64_t path_count(std::span<const EventSet> path) const;
    const std::deque<EventSet>& history() const noexcept { return history_; }

    /// Every extension above p_thr. When an extension is reachable from
    /// several suffix orders, the instance from the longest suffix is kept.
    /// Sorted by descending probability, then by sequence.
    std::vector<PMPrediction> predict() const;

    /// Highest-probability length-1 extension; ties go to the smallest state.
    std::optional<EventSet> recommend() const;

    nlohmann::json to_json() const;
    static PartialMatchTrie from_json(const nlohmann::json& doc);

  private:
    struct Node {
        std::uint64_t count = 0;
        std::map<EventSet, std::size_t> children;
    };

    std::optional<std::size_t> find(std::span<const EventSet> path) const;
    std::size_t find_or_insert(std::span<const EventSet> path);
    std::size_t max_depth() const noexcept { return config_.max_order + config_.lookahead; }

    PMConfig config_;
    std::vector<Node> nodes_;
    std::deque<EventSet> history_;
};

}  // namespace stepcorr
