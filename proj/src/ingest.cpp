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
#include <stepcorr/ingest.hpp>

#include <stepcorr/error.hpp>
#include <stepcorr/event_set.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

namespace stepcorr {
namespace {

constexpr std::string_view kTimestamp = "timestamp";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool blank(std::string_view line) { return trim(line).empty(); }

// Per-row failure that the caller turns into skip-or-abort.
struct RowFailure {
    std::string message;
};

std::vector<std::optional<double>> decode_csv_cells(const std::vector<std::string_view>& cells,
                                                    const std::vector<std::optional<std::size_t>>& column_to_stream,
                                                    std::size_t n, std::optional<std::size_t> timestamp_col,
                                                    std::string& timestamp) {
    if (cells.size() != column_to_stream.size()) {
        throw RowFailure{"expected " + std::to_string(column_to_stream.size()) + " cells, found " +
                         std::to_string(cells.size())};
    }
    std::vector<std::optional<double>> values(n);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto cell = trim(cells[c]);
        if (timestamp_col && c == *timestamp_col) {
            timestamp = std::string(cell);
            continue;
        }
        if (cell.empty()) {
            continue;
        }
        auto value = parse_double(cell);
        if (!value) {
            throw RowFailure{"non-numeric cell '" + std::string(cell) + "' in column " + std::to_string(c + 1)};
        }
        if (!std::isfinite(*value)) {
            throw RowFailure{"non-finite cell '" + std::string(cell) + "' in column " + std::to_string(c + 1)};
        }
        values[*column_to_stream[c]] = *value;
    }
    return values;
}

void record_failure(RecordBatch& batch, const IngestOptions& options, std::size_t line, const std::string& message) {
    if (options.on_error == ErrorPolicy::Abort) {
        fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + message);
    }
    ++batch.skipped_rows;
    batch.errors.push_back({line, message});
}

RecordBatch parse_csv(std::istream& source, const StreamSchema& schema, const IngestOptions& options) {
    RecordBatch batch;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!blank(line)) break;
    }
    if (blank(line)) {
        fail(ErrorCode::Parse, "CSV input has no header row");
    }
    const auto header = split_csv_line(line);
    const std::string timestamp_name = schema.timestamp_column.value_or(std::string(kTimestamp));
    std::vector<std::optional<std::size_t>> column_to_stream(header.size());
    std::optional<std::size_t> timestamp_col;
    std::vector<bool> seen(schema.n(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto name = trim(header[c]);
        if (name == timestamp_name) {
            timestamp_col = c;
            continue;
        }
        auto idx = schema.index_of(name);
        if (!idx) {
            fail(ErrorCode::Parse, "CSV header has unknown column '" + std::string(name) + "'");
        }
        if (seen[*idx]) {
            fail(ErrorCode::Parse, "CSV header repeats column '" + std::string(name) + "'");
        }
        seen[*idx] = true;
        column_to_stream[c] = *idx;
    }
    for (std::size_t i = 0; i < schema.n(); ++i) {
        if (!seen[i]) {
            fail(ErrorCode::Parse, "CSV header is missing column '" + schema.stream_names[i] + "'");
        }
    }
    if (schema.timestamp_column && !timestamp_col) {
        fail(ErrorCode::Parse, "CSV header is missing timestamp column '" + *schema.timestamp_column + "'");
    }

    while (std::getline(source, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::string timestamp = std::to_string(line_no);
        try {
            auto values = decode_csv_cells(split_csv_line(line), column_to_stream, schema.n(), timestamp_col, timestamp);
            batch.records.push_back({std::move(timestamp), std::move(values)});
        } catch (const RowFailure& failure) {
            record_failure(batch, options, line_no, failure.message);
        }
    }
    return batch;
}

RecordBatch parse_ndjson(std::istream& source, const StreamSchema& schema, const IngestOptions& options) {
    RecordBatch batch;
    const std::string timestamp_name = schema.timestamp_column.value_or(std::string(kTimestamp));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (blank(line)) continue;
        try {
            auto doc = nlohmann::json::parse(line, nullptr, false);
            if (doc.is_discarded() || !doc.is_object()) {
                throw RowFailure{"line is not a JSON object"};
            }
            PartialRecord record{std::to_string(line_no), std::vector<std::optional<double>>(schema.n())};
            for (const auto& [key, value] : doc.items()) {
                if (key == timestamp_name) {
                    record.timestamp = value.is_string() ? value.get<std::string>() : value.dump();
                    continue;
                }
                auto idx = schema.index_of(key);
                if (!idx || value.is_null()) {
                    continue;
                }
                if (!value.is_number()) {
                    throw RowFailure{"non-numeric value for '" + key + "'"};
                }
                const double v = value.get<double>();
                if (!std::isfinite(v)) {
                    throw RowFailure{"non-finite value for '" + key + "'"};
                }
                record.values[*idx] = v;
            }
            batch.records.push_back(std::move(record));
        } catch (const RowFailure& failure) {
            record_failure(batch, options, line_no, failure.message);
        }
    }
    return batch;
}

}  // namespace

void StreamSchema::validate() const {
    require(!stream_names.empty(), "schema needs at least one stream");
    require(stream_names.size() <= kMaxStreams, "schema exceeds the engine limit of 1024 streams");
    std::set<std::string_view> unique;
    for (const auto& name : stream_names) {
        require(!name.empty(), "stream names must be non-empty");
        require(unique.insert(name).second, "duplicate stream name '" + name + "'");
    }
    if (timestamp_column) {
        require(!unique.contains(*timestamp_column), "timestamp column collides with a stream name");
    }
}

std::optional<std::size_t> StreamSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < stream_names.size(); ++i) {
        if (stream_names[i] == name) return i;
    }
    return std::nullopt;
}

InputFormat parse_input_format(std::string_view text) {
    if (text == "csv") return InputFormat::Csv;
    if (text == "ndjson") return InputFormat::Ndjson;
    fail(ErrorCode::InvalidArgument, "unknown input format '" + std::string(text) + "'");
}

AlignPolicy parse_align_policy(std::string_view text) {
    if (text == "strict") return AlignPolicy::Strict;
    if (text == "hold" || text == "last-value-hold") return AlignPolicy::LastValueHold;
    fail(ErrorCode::InvalidArgument, "unknown alignment policy '" + std::string(text) + "'");
}

ErrorPolicy parse_error_policy(std::string_view text) {
    if (text == "skip") return ErrorPolicy::Skip;
    if (text == "abort") return ErrorPolicy::Abort;
    fail(ErrorCode::InvalidArgument, "unknown error policy '" + std::string(text) + "'");
}

std::string_view to_string(AlignPolicy policy) { return policy == AlignPolicy::Strict ? "strict" : "hold"; }

RecordBatch parse_records(std::istream& source, const StreamSchema& schema, const IngestOptions& options) {
    schema.validate();
    return options.format == InputFormat::Csv ? parse_csv(source, schema, options)
                                              : parse_ndjson(source, schema, options);
}

AlignedStream align_streams(std::span<const PartialRecord> records, std::size_t n, AlignPolicy policy) {
    AlignedStream out;
    std::vector<std::optional<double>> held(n);
    std::size_t i = 0;
    while (i < records.size()) {
        // Collapse every record carrying the same timestamp into one tick.
        std::vector<std::optional<double>> tick(n);
        const std::string& stamp = records[i].timestamp;
        for (; i < records.size() && records[i].timestamp == stamp; ++i) {
            require(records[i].values.size() == n, "record width does not match stream count");
            for (std::size_t s = 0; s < n; ++s) {
                if (records[i].values[s]) tick[s] = records[i].values[s];
            }
        }
        if (policy == AlignPolicy::LastValueHold) {
            for (std::size_t s = 0; s < n; ++s) {
                if (tick[s]) held[s] = tick[s];
            }
            tick = held;
        }
        bool complete = true;
        for (const auto& v : tick) complete = complete && v.has_value();
        if (!complete) {
            ++out.dropped_steps;
            continue;
        }
        ContextVector cv{out.vectors.size() + 1, {}};
        cv.values.reserve(n);
        for (const auto& v : tick) cv.values.push_back(*v);
        out.vectors.push_back(std::move(cv));
        out.timestamps.push_back(stamp);
    }
    return out;
}

ContextStream parse_context_stream(std::istream& source, const StreamSchema& schema, const IngestOptions& options) {
    auto batch = parse_records(source, schema, options);
    auto aligned = align_streams(batch.records, schema.n(), options.align);
    return {std::move(aligned.vectors), std::move(aligned.timestamps), batch.skipped_rows, aligned.dropped_steps,
            std::move(batch.errors)};
}

StreamSchema infer_schema(std::istream& source, InputFormat format) {
    StreamSchema schema;
    std::string line;
    while (std::getline(source, line) && blank(line)) {
    }
    if (blank(line)) {
        fail(ErrorCode::Parse, "input is empty, cannot infer stream names");
    }
    if (format == InputFormat::Csv) {
        for (auto cell : split_csv_line(line)) {
            auto name = trim(cell);
            if (name == kTimestamp) {
                schema.timestamp_column = std::string(kTimestamp);
            } else {
                schema.stream_names.emplace_back(name);
            }
        }
    } else {
        auto doc = nlohmann::ordered_json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            fail(ErrorCode::Parse, "first NDJSON line is not an object");
        }
        for (const auto& [key, value] : doc.items()) {
            if (key == kTimestamp) {
                schema.timestamp_column = std::string(kTimestamp);
            } else {
                schema.stream_names.push_back(key);
            }
        }
    }
    schema.validate();
    return schema;
}

void write_context_csv(std::ostream& out, const StreamSchema& schema, std::span<const ContextVector> vectors,
                       std::span<const std::string> timestamps) {
    const bool with_time = !timestamps.empty();
    require(!with_time || timestamps.size() == vectors.size(), "timestamp count does not match vector count");
    if (with_time) out << schema.timestamp_column.value_or(std::string(kTimestamp)) << ',';
    for (std::size_t i = 0; i < schema.n(); ++i) {
        out << (i ? "," : "") << schema.stream_names[i];
    }
    out << '\n';
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        require(vectors[r].values.size() == schema.n(), "context vector width does not match schema");
        if (with_time) out << timestamps[r] << ',';
        for (std::size_t i = 0; i < vectors[r].values.size(); ++i) {
            out << (i ? "," : "") << format_double(vectors[r].values[i]);
        }
        out << '\n';
    }
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace stepcorr
