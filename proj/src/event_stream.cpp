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
#include <stepcorr/event_stream.hpp>

#include <stepcorr/error.hpp>
#include <stepcorr/ingest.hpp>

#include <charconv>
#include <istream>
#include <ostream>

namespace stepcorr {

std::vector<EventSet> EventStream::states() const {
    std::vector<EventSet> out;
    out.reserve(vectors.size());
    for (const auto& ev : vectors) out.push_back(encode_state(ev));
    return out;
}

void write_event_csv(std::ostream& out, const EventStream& stream) {
    const bool with_time = !stream.timestamps.empty();
    require(!with_time || stream.timestamps.size() == stream.vectors.size(), "timestamp count mismatch");
    out << 't';
    if (with_time) out << ",timestamp";
    for (const auto& name : stream.stream_names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < stream.vectors.size(); ++r) {
        const auto& ev = stream.vectors[r];
        require(ev.bits.size() == stream.n(), "event vector width does not match stream count");
        out << ev.t;
        if (with_time) out << ',' << stream.timestamps[r];
        for (auto bit : ev.bits) out << ',' << (bit ? '1' : '0');
        out << '\n';
    }
}

EventStream read_event_csv(std::istream& in) {
    EventStream stream;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        fail(ErrorCode::Parse, "event stream is empty");
    }
    ++line_no;
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t") {
        fail(ErrorCode::Parse, "event stream header must start with 't'");
    }
    std::size_t first_stream = 1;
    bool with_time = header.size() > 1 && header[1] == "timestamp";
    if (with_time) first_stream = 2;
    for (std::size_t c = first_stream; c < header.size(); ++c) stream.stream_names.emplace_back(header[c]);
    require(!stream.stream_names.empty() && stream.stream_names.size() <= kMaxStreams,
            "event stream stream count out of range");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                       " cells, found " + std::to_string(cells.size()));
        }
        EventVector ev;
        auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), ev.t);
        if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size()) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad step index");
        }
        if (with_time) stream.timestamps.emplace_back(cells[1]);
        ev.bits.reserve(stream.n());
        for (std::size_t c = first_stream; c < cells.size(); ++c) {
            if (cells[c] == "1") {
                ev.bits.push_back(1);
            } else if (cells[c] == "0") {
                ev.bits.push_back(0);
            } else {
                fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": event cells must be 0 or 1");
            }
        }
        stream.vectors.push_back(std::move(ev));
    }
    return stream;
}

}  // namespace stepcorr
