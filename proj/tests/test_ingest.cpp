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
#include <stepcorr/error.hpp>
#include <stepcorr/event_stream.hpp>
#include <stepcorr/ingest.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace stepcorr;

namespace {

StreamSchema abc() { return {{"a", "b", "c"}, std::nullopt}; }

ContextStream parse(const std::string& text, const StreamSchema& schema, IngestOptions opts = {}) {
    std::istringstream in(text);
    return parse_context_stream(in, schema, opts);
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Ingest, CsvColumnsMapByNameNotPosition) {
    const auto s = parse("c,a,b\n3,1,2\n6,4,5\n", abc());
    ASSERT_EQ(s.vectors.size(), 2u);
    EXPECT_EQ(s.vectors[0].values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(s.vectors[1].t, 2u);
    EXPECT_EQ(s.vectors[1].values, (std::vector<double>{4, 5, 6}));
}

TEST(Ingest, HeaderProblemsAlwaysAbort) {
    IngestOptions skip{InputFormat::Csv, AlignPolicy::Strict, ErrorPolicy::Skip};
    EXPECT_EQ(code_of([&] { parse("a,b\n1,2\n", abc(), skip); }), ErrorCode::Parse);
    EXPECT_EQ(code_of([&] { parse("a,b,c,d\n1,2,3,4\n", abc(), skip); }), ErrorCode::Parse);
    EXPECT_EQ(code_of([&] { parse("a,b,b\n1,2,3\n", abc(), skip); }), ErrorCode::Parse);
    EXPECT_EQ(code_of([&] { parse("", abc(), skip); }), ErrorCode::Parse);
}

TEST(Ingest, BadRowsSkipOrAbort) {
    const std::string text = "a,b,c\n1,2,3\n1,x,3\n1,2\n1,nan,3\n7,8,9\n";
    IngestOptions skip{InputFormat::Csv, AlignPolicy::Strict, ErrorPolicy::Skip};
    const auto s = parse(text, abc(), skip);
    EXPECT_EQ(s.vectors.size(), 2u);
    EXPECT_EQ(s.skipped_rows, 3u);
    ASSERT_EQ(s.errors.size(), 3u);
    EXPECT_EQ(s.errors[0].line, 3u);
    EXPECT_EQ(s.vectors[1].t, 2u);
    EXPECT_EQ(code_of([&] { parse(text, abc()); }), ErrorCode::Parse);
}

TEST(Ingest, StrictDropsIncompleteTicks) {
    const auto s = parse("a,b,c\n1,2,3\n4,,6\n7,8,9\n", abc());
    ASSERT_EQ(s.vectors.size(), 2u);
    EXPECT_EQ(s.dropped_steps, 1u);
    EXPECT_EQ(s.vectors[1].values, (std::vector<double>{7, 8, 9}));
    EXPECT_EQ(s.vectors[1].t, 2u);
}

TEST(Ingest, HoldCarriesLastValueForward) {
    IngestOptions hold{InputFormat::Csv, AlignPolicy::LastValueHold, ErrorPolicy::Abort};
    const auto s = parse("a,b,c\n1,,3\n4,2,6\n,,9\n", abc(), hold);
    // The first tick has no b yet and is dropped.
    EXPECT_EQ(s.dropped_steps, 1u);
    ASSERT_EQ(s.vectors.size(), 2u);
    EXPECT_EQ(s.vectors[0].values, (std::vector<double>{4, 2, 6}));
    EXPECT_EQ(s.vectors[1].values, (std::vector<double>{4, 2, 9}));
}

TEST(Ingest, RecordsSharingATimestampMerge) {
    StreamSchema schema{{"a", "b"}, std::string("timestamp")};
    const auto s = parse("timestamp,a,b\n10,1,\n10,,2\n11,3,4\n", schema);
    ASSERT_EQ(s.vectors.size(), 2u);
    EXPECT_EQ(s.vectors[0].values, (std::vector<double>{1, 2}));
    EXPECT_EQ(s.timestamps, (std::vector<std::string>{"10", "11"}));
}

TEST(Ingest, NdjsonWithMissingKeysAndTimestamps) {
    StreamSchema schema{{"a", "b"}, std::string("timestamp")};
    IngestOptions opts{InputFormat::Ndjson, AlignPolicy::LastValueHold, ErrorPolicy::Skip};
    const std::string text =
        "{\"timestamp\":\"t1\",\"a\":1,\"b\":2}\n"
        "{\"timestamp\":\"t2\",\"a\":3}\n"
        "not json\n"
        "{\"timestamp\":\"t3\",\"a\":\"five\",\"b\":1}\n"
        "{\"timestamp\":\"t4\",\"b\":7,\"extra\":0}\n";
    const auto s = parse(text, schema, opts);
    EXPECT_EQ(s.skipped_rows, 2u);
    ASSERT_EQ(s.vectors.size(), 3u);
    EXPECT_EQ(s.vectors[1].values, (std::vector<double>{3, 2}));
    EXPECT_EQ(s.vectors[2].values, (std::vector<double>{3, 7}));
    EXPECT_EQ(s.timestamps.back(), "t4");
}

TEST(Ingest, InferSchemaFromHeaderOrFirstObject) {
    std::istringstream csv("timestamp,x,y\n1,2,3\n");
    const auto a = infer_schema(csv, InputFormat::Csv);
    EXPECT_EQ(a.stream_names, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(a.timestamp_column, "timestamp");
    std::istringstream nd("{\"q\":1,\"p\":2}\n");
    const auto b = infer_schema(nd, InputFormat::Ndjson);
    EXPECT_EQ(b.stream_names, (std::vector<std::string>{"q", "p"}));
    EXPECT_FALSE(b.timestamp_column);
    std::istringstream dup("x,x\n");
    EXPECT_THROW(infer_schema(dup, InputFormat::Csv), Error);
}

TEST(Ingest, CsvRoundTripIsExact) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z(0.0, 1e3);
    StreamSchema schema{{"u", "v"}, std::nullopt};
    std::vector<ContextVector> rows;
    for (std::uint64_t t = 1; t <= 50; ++t) rows.push_back({t, {z(rng), z(rng) * 1e-9}});
    std::ostringstream out;
    write_context_csv(out, schema, rows);
    const auto back = parse(out.str(), schema);
    EXPECT_EQ(back.vectors, rows);
}

TEST(Ingest, FormatAndParseDouble) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(-2.0), "-2");
    EXPECT_EQ(parse_double(" +1.5 "), 1.5);
    EXPECT_FALSE(parse_double("1.5x"));
    EXPECT_FALSE(parse_double(""));
}

TEST(Ingest, SchemaValidation) {
    EXPECT_THROW((StreamSchema{{}, std::nullopt}.validate()), Error);
    EXPECT_THROW((StreamSchema{{"a", ""}, std::nullopt}.validate()), Error);
    EXPECT_THROW((StreamSchema{{"a"}, std::string("a")}.validate()), Error);
    EXPECT_THROW(parse_align_policy("nearest"), Error);
}

TEST(EventStreamCsv, RoundTrip) {
    EventStream s;
    s.stream_names = {"a", "b", "c"};
    s.vectors = {{1, {0, 1, 0}}, {2, {1, 1, 0}}, {3, {0, 0, 0}}};
    s.timestamps = {"x", "y", "z"};
    std::ostringstream out;
    write_event_csv(out, s);
    EXPECT_EQ(out.str(), "t,timestamp,a,b,c\n1,x,0,1,0\n2,y,1,1,0\n3,z,0,0,0\n");
    std::istringstream in(out.str());
    const auto back = read_event_csv(in);
    EXPECT_EQ(back.stream_names, s.stream_names);
    EXPECT_EQ(back.timestamps, s.timestamps);
    ASSERT_EQ(back.states().size(), 3u);
    EXPECT_EQ(back.states()[1], (EventSet{1, 2}));
    std::istringstream bad("t,a\n1,2\n");
    EXPECT_THROW(read_event_csv(bad), Error);
}
