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
#include <stepcorr/partial_matching.hpp>

#include <stepcorr/error.hpp>
#include "json_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace stepcorr {

using detail::non_negative_integer;

namespace {

nlohmann::json path_to_json(std::span<const EventSet> path) {
    auto arr = nlohmann::json::array();
    for (const auto& state : path) {
        auto members = nlohmann::json::array();
        for (auto m : state.members()) members.push_back(m);
        arr.push_back(std::move(members));
    }
    return arr;
}

std::vector<EventSet> path_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) fail(ErrorCode::Parse, "trie paths must be arrays of states");
    std::vector<EventSet> path;
    for (const auto& state : doc) {
        if (!state.is_array()) fail(ErrorCode::Parse, "trie states must be index arrays");
        std::vector<EventTypeIndex> members;
        for (const auto& m : state) {
            if (!non_negative_integer(m)) fail(ErrorCode::Parse, "state members must be positive integers");
            const auto raw = m.get<std::uint64_t>();
            if (raw == 0 || raw > kMaxStreams) fail(ErrorCode::Parse, "state member out of range");
            members.push_back(static_cast<EventTypeIndex>(raw));
        }
        path.push_back(EventSet::from_members(std::move(members)));
    }
    return path;
}

}  // namespace

void PMConfig::validate() const {
    require(max_order >= 1, "partial matching order m must be at least 1");
    require(lookahead >= 1, "partial matching lookahead l must be at least 1");
    require(p_thr >= 0.0 && p_thr <= 1.0, "p_thr must lie in [0, 1]");
}

PartialMatchTrie::PartialMatchTrie(PMConfig config) : config_(config), nodes_(1) { config_.validate(); }

std::optional<std::size_t> PartialMatchTrie::find(std::span<const EventSet> path) const {
    std::size_t at = 0;
    for (const auto& state : path) {
        auto it = nodes_[at].children.find(state);
        if (it == nodes_[at].children.end()) return std::nullopt;
        at = it->second;
    }
    return at;
}

std::size_t PartialMatchTrie::find_or_insert(std::span<const EventSet> path) {
    std::size_t at = 0;
    for (const auto& state : path) {
        auto it = nodes_[at].children.find(state);
        if (it == nodes_[at].children.end()) {
            nodes_.emplace_back();
            it = nodes_[at].children.emplace(state, nodes_.size() - 1).first;
        }
        at = it->second;
    }
    return at;
}

void PartialMatchTrie::observe(const EventSet& state) {
    history_.push_back(state);
    if (history_.size() > max_depth()) history_.pop_front();
    ++nodes_.front().count;
    // Count every suffix ending at the new state; shorter paths were counted
    // when their own last state arrived.
    const std::vector<EventSet> window(history_.begin(), history_.end());
    for (std::size_t len = 1; len <= window.size(); ++len) {
        std::span<const EventSet> suffix(window.data() + window.size() - len, len);
        ++nodes_[find_or_insert(suffix)].count;
    }
    // Only the last m + l - 1 states can prefix a future suffix.
    if (history_.size() > max_depth() - 1) history_.pop_front();
}

std::uint64_t PartialMatchTrie::path_count(std::span<const EventSet> path) const {
    auto at = find(path);
    return at ? nodes_[*at].count : 0;
}

std::vector<PMPrediction> PartialMatchTrie::predict() const {
    std::map<std::vector<EventSet>, PMPrediction> merged;
    const std::vector<EventSet> window(history_.begin(), history_.end());
    const std::size_t longest = std::min(config_.max_order, window.size());
    for (std::size_t order = longest; order >= 1; --order) {
        std::span<const EventSet> suffix(window.data() + window.size() - order, order);
        auto anchor = find(suffix);
        if (!anchor || nodes_[*anchor].count == 0) continue;
        const double base = static_cast<double>(nodes_[*anchor].count);
        std::vector<EventSet> extension;
        std::function<void(std::size_t)> walk = [&](std::size_t at) {
            for (const auto& [state, child] : nodes_[at].children) {
                const double p = static_cast<double>(nodes_[child].count) / base;
                if (!(p > config_.p_thr)) continue;
                extension.push_back(state);
                // Longer suffixes were visited first and win.
                merged.try_emplace(extension, PMPrediction{extension, p, order});
                if (extension.size() < config_.lookahead) walk(child);
                extension.pop_back();
            }
        };
        walk(*anchor);
    }
    std::vector<PMPrediction> out;
    out.reserve(merged.size());
    for (auto& [key, prediction] : merged) out.push_back(std::move(prediction));
    std::stable_sort(out.begin(), out.end(),
                     [](const PMPrediction& a, const PMPrediction& b) { return a.probability > b.probability; });
    return out;
}

std::optional<EventSet> PartialMatchTrie::recommend() const {
    std::optional<EventSet> best;
    double best_p = -1.0;
    // predict() is ordered by probability then sequence, so the first
    // length-1 entry is the answer.
    for (const auto& prediction : predict()) {
        if (prediction.sequence.size() == 1 && prediction.probability > best_p) {
            best = prediction.sequence.front();
            best_p = prediction.probability;
        }
    }
    return best;
}

nlohmann::json PartialMatchTrie::to_json() const {
    nlohmann::json doc;
    doc["order"] = config_.max_order;
    doc["lookahead"] = config_.lookahead;
    doc["p_thr"] = config_.p_thr;
    doc["t"] = nodes_.front().count;
    doc["history"] = path_to_json(std::vector<EventSet>(history_.begin(), history_.end()));
    auto paths = nlohmann::json::array();
    std::vector<EventSet> path;
    std::function<void(std::size_t)> dump = [&](std::size_t at) {
        for (const auto& [state, child] : nodes_[at].children) {
            path.push_back(state);
            paths.push_back({path_to_json(path), nodes_[child].count});
            dump(child);
            path.pop_back();
        }
    };
    dump(0);
    doc["paths"] = std::move(paths);
    return doc;
}

PartialMatchTrie PartialMatchTrie::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("order") || !doc.contains("lookahead") || !doc.contains("paths")) {
        fail(ErrorCode::Parse, "trie document needs 'order', 'lookahead' and 'paths'");
    }
    PMConfig config;
    config.max_order = doc["order"].get<std::size_t>();
    config.lookahead = doc["lookahead"].get<std::size_t>();
    config.p_thr = doc.value("p_thr", 0.0);
    PartialMatchTrie trie(config);
    trie.nodes_.front().count = doc.value("t", std::uint64_t{0});
    for (const auto& entry : doc["paths"]) {
        if (!entry.is_array() || entry.size() != 2) fail(ErrorCode::Parse, "trie entries are [path, count]");
        auto path = path_from_json(entry[0]);
        if (path.empty() || path.size() > trie.max_depth()) fail(ErrorCode::Parse, "trie path length out of range");
        trie.nodes_[trie.find_or_insert(path)].count = entry[1].get<std::uint64_t>();
    }
    if (doc.contains("history")) {
        for (auto& state : path_from_json(doc["history"])) trie.history_.push_back(std::move(state));
    }
    if (trie.history_.size() > trie.max_depth() - 1) fail(ErrorCode::Parse, "trie history longer than m + l - 1");
    return trie;
}

}  // namespace stepcorr
