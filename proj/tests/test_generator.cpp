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
#include <stepcorr/generator.hpp>
#include <stepcorr/shewhart.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace stepcorr;

namespace {

GeneratorSpec white_spec(std::size_t n, std::uint64_t length, std::uint64_t seed) {
    return GeneratorSpec::from_json({{"n", n}, {"length", length}, {"seed", seed}});
}

}  // namespace

TEST(Generator, DefaultsToNamedWhiteNoiseStreams) {
    const auto spec = white_spec(3, 10, 1);
    ASSERT_EQ(spec.streams.size(), 3u);
    EXPECT_EQ(spec.streams[0].name, "s1");
    EXPECT_EQ(spec.streams[2].process, BaseProcess::WhiteNoise);
    const auto data = generate_stream(spec);
    ASSERT_EQ(data.vectors.size(), 10u);
    EXPECT_EQ(data.vectors[0].t, 1u);
    EXPECT_EQ(data.vectors[9].values.size(), 3u);
    EXPECT_TRUE(data.truth.empty());
}

TEST(Generator, SameSeedSameBytes) {
    nlohmann::json doc{{"n", 4},
                       {"length", 300},
                       {"seed", 21},
                       {"changes", {{{"step", 100}, {"streams", {1, 3}}, {"magnitude", 5.0}, {"duration", 3}}}},
                       {"pattern", {{2}, nlohmann::json::array(), {4}}},
                       {"pattern_noise", 0.2}};
    auto render = [&](const nlohmann::json& d) {
        const auto data = generate_stream(GeneratorSpec::from_json(d));
        std::ostringstream out;
        write_context_csv(out, data.schema, data.vectors);
        write_truth_csv(out, data.truth);
        return out.str();
    };
    EXPECT_EQ(render(doc), render(doc));
    auto other = doc;
    other["seed"] = 22;
    EXPECT_NE(render(doc), render(other));
}

TEST(Generator, ShiftsAreInSigmaUnitsAndLastForDuration) {
    nlohmann::json doc{{"n", 2},
                       {"length", 20},
                       {"process", {{"type", "constant"}, {"mu", 1.0}, {"sigma", 2.0}}},
                       {"changes", {{{"step", 5}, {"streams", {2}}, {"magnitude", 3.0}, {"duration", 2}}}}};
    const auto data = generate_stream(GeneratorSpec::from_json(doc));
    EXPECT_DOUBLE_EQ(data.vectors[3].values[1], 1.0);
    EXPECT_DOUBLE_EQ(data.vectors[4].values[1], 7.0);
    EXPECT_DOUBLE_EQ(data.vectors[5].values[1], 7.0);
    EXPECT_DOUBLE_EQ(data.vectors[6].values[1], 1.0);
    EXPECT_DOUBLE_EQ(data.vectors[4].values[0], 1.0);
    ASSERT_EQ(data.truth.size(), 1u);
    EXPECT_EQ(data.truth[0], (InjectedChange{5, 2, 3.0, "change"}));
}

TEST(Generator, PatternRepeatsWithoutNoise) {
    nlohmann::json doc{{"n", 3},
                       {"length", 12},
                       {"process", {{"type", "constant"}}},
                       {"repeat_period", 3},
                       {"pattern", {{1}, {2, 3}, nlohmann::json::array()}},
                       {"pattern_start", 4},
                       {"pattern_magnitude", 5.0}};
    const auto data = generate_stream(GeneratorSpec::from_json(doc));
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(data.vectors[t].values, (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(data.vectors[3].values, (std::vector<double>{5, 0, 0}));
    EXPECT_EQ(data.vectors[4].values, (std::vector<double>{0, 5, 5}));
    EXPECT_EQ(data.vectors[5].values, (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(data.vectors[6].values, (std::vector<double>{5, 0, 0}));
    EXPECT_EQ(data.truth.size(), 9u);
}

TEST(Generator, NoiseReplacesAboutTheRequestedShare) {
    nlohmann::json doc{{"n", 6},
                       {"length", 20000},
                       {"seed", 9},
                       {"process", {{"type", "constant"}}},
                       {"pattern", {nlohmann::json::array()}},
                       {"pattern_noise", 0.1}};
    const auto data = generate_stream(GeneratorSpec::from_json(doc));
    std::size_t touched = 0;
    for (const auto& cv : data.vectors) {
        bool any = false;
        for (double v : cv.values) any = any || v != 0.0;
        touched += any;
    }
    // Replacement subsets are uniform over 2^6, so 1/64 of them are empty.
    const double expected = 20000 * 0.1 * (63.0 / 64.0);
    EXPECT_NEAR(static_cast<double>(touched), expected, 4 * std::sqrt(expected));
}

TEST(Generator, DetectorRecoversLargeIsolatedShifts) {
    // Shifts of (k + 2) sigma against white noise, spaced far apart: the
    // before-update detector must flag at least 95% of them.
    const double k = 3.0;
    nlohmann::json changes = nlohmann::json::array();
    for (int step = 60; step < 20000; step += 50) {
        changes.push_back({{"step", step}, {"streams", {1 + (step / 50) % 10}}, {"magnitude", k + 2.0}});
    }
    nlohmann::json doc{{"n", 10}, {"length", 20000}, {"seed", 3}, {"changes", changes}};
    const auto data = generate_stream(GeneratorSpec::from_json(doc));
    DetectorBank bank(10, {k, 25, CompareMode::BeforeUpdate});
    std::vector<EventVector> events;
    for (const auto& cv : data.vectors) events.push_back(bank.detect(cv));
    std::size_t hit = 0;
    for (const auto& c : data.truth) hit += events[c.step - 1].bits[c.stream - 1];
    EXPECT_GE(static_cast<double>(hit) / data.truth.size(), 0.95);
}

TEST(Generator, ValidationListsEveryProblem) {
    nlohmann::json doc{{"n", 2},
                       {"length", 10},
                       {"streams", {{{"name", "a"}, {"type", "ar1"}, {"phi", 1.2}}, {{"name", "a"}}}},
                       {"changes", {{{"step", 50}, {"streams", {3}}, {"magnitude", 1.0}}}}};
    try {
        GeneratorSpec::from_json(doc);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("phi"), std::string::npos);
        EXPECT_NE(msg.find("outside [1, T]"), std::string::npos);
        EXPECT_NE(msg.find("above n"), std::string::npos);
        EXPECT_NE(msg.find("unique"), std::string::npos);
    }
    EXPECT_THROW(GeneratorSpec::from_json({{"n", 2}}), Error);
    EXPECT_THROW(GeneratorSpec::from_json({{"n", 1}, {"length", 5}, {"pattern", {{1}}}, {"repeat_period", 2}}),
                 Error);
}

TEST(Generator, SpecJsonRoundTrip) {
    nlohmann::json doc{{"n", 2},
                       {"length", 50},
                       {"seed", 4},
                       {"streams", {{{"name", "x"}, {"type", "ar1"}, {"phi", 0.5}}, {{"name", "y"}, {"type", "ramp"},
                                                                                      {"slope", 0.1}}}},
                       {"pattern", {{1}, {2}}},
                       {"pattern_noise", 0.05}};
    const auto spec = GeneratorSpec::from_json(doc);
    const auto again = GeneratorSpec::from_json(spec.to_json());
    EXPECT_EQ(again.to_json(), spec.to_json());
}
