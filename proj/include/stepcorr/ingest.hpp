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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stepcorr {

/// Ordered, named set of numeric streams.
struct StreamSchema {
    std::vector<std::string> stream_names;
    std::optional<std::string> timestamp_column;

    std::size_t n() const noexcept { return stream_names.size(); }
    /// Throws InvalidArgument on empty, duplicate or too many names.
    void validate() const;
    std::optional<std::size_t> index_of(std::string_view name) const;
};

/// One synchronized row of readings. `t` is the 1-based step index.
struct ContextVector {
    std::uint64_t t = 0;
    std::vector<double> values;

    friend bool operator==(const ContextVector&, const ContextVector&) = default;
};

enum class InputFormat { Csv, Ndjson };
enum class AlignPolicy { Strict, LastValueHold };
enum class ErrorPolicy { Skip, Abort };

InputFormat parse_input_format(std::string_view text);
AlignPolicy parse_align_policy(std::string_view text);
ErrorPolicy parse_error_policy(std::string_view text);
std::string_view to_string(AlignPolicy policy);

/// A record as it arrives: an opaque timestamp plus whichever streams reported.
struct PartialRecord {
    std::string timestamp;
    std::vector<std::optional<double>> values;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct IngestOptions {
    InputFormat format = InputFormat::Csv;
    AlignPolicy align = AlignPolicy::Strict;
    ErrorPolicy on_error = ErrorPolicy::Abort;
};

struct RecordBatch {
    std::vector<PartialRecord> records;
    std::size_t skipped_rows = 0;
    std::vector<RowError> errors;
};

struct AlignedStream {
    std::vector<ContextVector> vectors;
    std::vector<std::string> timestamps;
    std::size_t dropped_steps = 0;
};

struct ContextStream {
    std::vector<ContextVector> vectors;
    std::vector<std::string> timestamps;
    std::size_t skipped_rows = 0;
    std::size_t dropped_steps = 0;
    std::vector<RowError> errors;
};

/// Decodes CSV or NDJSON into partial records with columns in schema order.
/// Bad rows are skipped and counted or abort the parse, per `on_error`. A
/// missing schema column always aborts. Records without a timestamp column
/// get their data line number as timestamp.
RecordBatch parse_records(std::istream& source, const StreamSchema& schema, const IngestOptions& options);

/// Merges records sharing a timestamp and emits complete context vectors with
/// consecutive steps starting at 1.
AlignedStream align_streams(std::span<const PartialRecord> records, std::size_t n, AlignPolicy policy);

ContextStream parse_context_stream(std::istream& source, const StreamSchema& schema, const IngestOptions& options);

/// Reads the stream names from a CSV header or the first NDJSON object. A
/// column or key named `timestamp` is taken as the timestamp column.
StreamSchema infer_schema(std::istream& source, InputFormat format);

/// Writes a header plus one row per vector using shortest round-trip
/// formatting. Timestamps, when given, go into a leading column.
void write_context_csv(std::ostream& out, const StreamSchema& schema, std::span<const ContextVector> vectors,
                       std::span<const std::string> timestamps = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace stepcorr
