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

#include <iosfwd>
#include <string>
#include <vector>

namespace stepcorr {

/// Binary event streams as written by `detect`: a `t` column, an optional
/// `timestamp` column, then one 0/1 column per stream.
struct EventStream {
    std::vector<std::string> stream_names;
    std::vector<EventVector> vectors;
    std::vector<std::string> timestamps;

    std::size_t n() const noexcept { return stream_names.size(); }
    std::vector<EventSet> states() const;
};

void write_event_csv(std::ostream& out, const EventStream& stream);
EventStream read_event_csv(std::istream& in);

}  // namespace stepcorr
