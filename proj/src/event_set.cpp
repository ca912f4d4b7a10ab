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
#include <stepcorr/event_set.hpp>

#include <stepcorr/error.hpp>

#include <algorithm>
#include <charconv>
#include <iterator>
#include <limits>
#include <random>

namespace stepcorr {

EventSet::EventSet(std::initializer_list<EventTypeIndex> members)
    : EventSet(from_members(std::vector<EventTypeIndex>(members))) {}

EventSet EventSet::from_members(std::vector<EventTypeIndex> members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (!members.empty()) {
        require(members.front() >= 1, "event type indices are 1-based");
        require(members.back() <= kMaxStreams, "event type index exceeds engine limit");
    }
    EventSet out;
    out.members_ = std::move(members);
    return out;
}

bool EventSet::contains(EventTypeIndex type) const noexcept {
    return std::binary_search(members_.begin(), members_.end(), type);
}

bool EventSet::is_superset_of(const EventSet& other) const noexcept {
    return std::includes(members_.begin(), members_.end(), other.members_.begin(), other.members_.end());
}

std::string EventSet::to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(members_[i]);
    }
    out += '}';
    return out;
}

EventSet EventSet::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (!text.empty() && text.front() == '{') {
        if (text.back() != '}') {
            fail(ErrorCode::Parse, "unterminated event set: " + std::string(text));
        }
        text = trim(text.substr(1, text.size() - 2));
    }
    std::vector<EventTypeIndex> members;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto token = trim(text.substr(0, comma));
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0 || value > kMaxStreams) {
            fail(ErrorCode::Parse, "bad event type index '" + std::string(token) + "'");
        }
        members.push_back(static_cast<EventTypeIndex>(value));
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return from_members(std::move(members));
}

EventSet encode_state(const EventVector& ev) {
    require(ev.bits.size() <= kMaxStreams, "event vector longer than engine limit");
    std::vector<EventTypeIndex> members;
    for (std::size_t i = 0; i < ev.bits.size(); ++i) {
        if (ev.bits[i] != 0) {
            members.push_back(static_cast<EventTypeIndex>(i + 1));
        }
    }
    return EventSet::from_members(std::move(members));
}

EventVector decode_state(const EventSet& state, std::size_t n, std::uint64_t t) {
    EventVector ev{t, std::vector<std::uint8_t>(n, 0)};
    for (auto m : state.members()) {
        require(m <= n, "event set member outside stream range");
        ev.bits[m - 1] = 1;
    }
    return ev;
}

EventSet bound_state(const EventSet& state, const BoundOptions& options, std::uint64_t step) {
    require(options.max_combo_k >= 1, "max_combo_k must be at least 1");
    if (state.size() <= options.max_combo_k) {
        return state;
    }
    std::vector<EventTypeIndex> members(state.members().begin(), state.members().end());
    if (options.policy == BoundPolicy::LowestIndex) {
        members.resize(options.max_combo_k);
        return EventSet::from_members(std::move(members));
    }
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<EventTypeIndex> picked;
    picked.reserve(options.max_combo_k);
    std::sample(members.begin(), members.end(), std::back_inserter(picked), options.max_combo_k, rng);
    return EventSet::from_members(std::move(picked));
}

std::uint64_t count_bounded_states(std::size_t n, std::size_t max_combo_k) {
    require(n >= 1, "n must be positive");
    require(n <= kMaxStreams, "n exceeds the supported stream count");
    require(max_combo_k <= n, "max_combo_k must not exceed n");
    // binom stays below 2^64 * n between checks, well inside 128 bits.
    __extension__ using u128 = unsigned __int128;
    constexpr u128 kLimit = std::numeric_limits<std::uint64_t>::max();
    u128 binom = 1;
    u128 total = 1;
    for (std::size_t i = 0; i < max_combo_k; ++i) {
        // C(n, i+1) = C(n, i) * (n - i) / (i + 1) is exact at every step.
        binom = binom * (n - i) / (i + 1);
        total += binom;
        if (binom > kLimit || total > kLimit) {
            fail(ErrorCode::Overflow, "bounded state count exceeds 64 bits for n=" + std::to_string(n) +
                                          ", k=" + std::to_string(max_combo_k));
        }
    }
    return static_cast<std::uint64_t>(total);
}

std::string_view to_string(BoundPolicy policy) {
    return policy == BoundPolicy::Random ? "random" : "lowest-index";
}

BoundPolicy parse_bound_policy(std::string_view text) {
    if (text == "random") return BoundPolicy::Random;
    if (text == "lowest-index" || text == "lowest") return BoundPolicy::LowestIndex;
    fail(ErrorCode::InvalidArgument, "unknown bound policy '" + std::string(text) + "'");
}

}  // namespace stepcorr
