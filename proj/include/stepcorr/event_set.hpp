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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stepcorr {

/// Upper bound on the number of streams (and therefore event types).
inline constexpr std::size_t kMaxStreams = 1024;

using EventTypeIndex = std::uint16_t;

/// Binary n-vector produced by change detection at step `t`.
struct EventVector {
    std::uint64_t t = 0;
    std::vector<std::uint8_t> bits;
};

/// Canonical set of active event types, a node of the correlation graph.
///
/// Members are 1-based stream indices kept strictly increasing. The empty set
/// is the "no events" state. Ordering is lexicographic on the sorted member
/// list, so the empty set sorts first.
class EventSet {
  public:
    EventSet() = default;
    EventSet(std::initializer_list<EventTypeIndex> members);

    /// Sorts and deduplicates; throws on index 0 or indices above kMaxStreams.
    static EventSet from_members(std::vector<EventTypeIndex> members);

    std::span<const EventTypeIndex> members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }

    bool contains(EventTypeIndex type) const noexcept;
    bool is_superset_of(const EventSet& other) const noexcept;

    /// Renders as `{1,3}`; the empty state renders as `{}`.
    std::string to_string() const;
    /// Accepts `{1,3}`, `1,3`, `{}` or the empty string.
    static EventSet parse(std::string_view text);

    friend bool operator==(const EventSet&, const EventSet&) = default;
    friend std::strong_ordering operator<=>(const EventSet& a, const EventSet& b) {
        return a.members_ <=> b.members_;
    }

  private:
    std::vector<EventTypeIndex> members_;
};

EventSet encode_state(const EventVector& ev);
EventVector decode_state(const EventSet& state, std::size_t n, std::uint64_t t = 0);

enum class BoundPolicy { Random, LowestIndex };

struct BoundOptions {
    std::size_t max_combo_k = 0;
    BoundPolicy policy = BoundPolicy::Random;
    std::uint64_t seed = 0;
};

/// Reduces `state` to at most `max_combo_k` members. Under `Random` the subset
/// is uniform without replacement and a pure function of (seed, step).
EventSet bound_state(const EventSet& state, const BoundOptions& options, std::uint64_t step);

/// Sum of C(n, i) for i in [0, k]. Throws Overflow above 2^64 - 1.
std::uint64_t count_bounded_states(std::size_t n, std::size_t max_combo_k);

std::string_view to_string(BoundPolicy policy);
BoundPolicy parse_bound_policy(std::string_view text);

}  // namespace stepcorr
