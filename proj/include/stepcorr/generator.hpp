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
#include <stepcorr/ingest.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stepcorr {

enum class BaseProcess { Constant, WhiteNoise, Ar1, Ramp };

/// Base process of one stream. `sigma` is the noise scale of the stochastic
/// processes and the unit of every injected shift.
struct StreamProcess {
    std::string name;
    BaseProcess process = BaseProcess::WhiteNoise;
    double mu = 0.0;  // level, intercept for ramps
    double sigma = 1.0;
    double phi = 0.0;    // ar1 only
    double slope = 0.0;  // ramp only
};

/// A shift of `magnitude` sigma added to each listed stream for `duration`
/// steps starting at `step`.
struct ChangeEvent {
    std::uint64_t step = 1;
    EventSet streams;
    double magnitude = 0.0;
    std::uint64_t duration = 1;
};

/// Recurring injected pattern: at step t >= start, the streams of
/// pattern[(t - start) mod period] receive a one-step shift. With probability
/// `noise`, a step's entry is replaced by a uniformly random subset of streams.
struct RepeatPattern {
    std::vector<EventSet> pattern;
    double magnitude = 10.0;
    std::uint64_t start = 1;
    double noise = 0.0;
};

struct GeneratorSpec {
    std::size_t n = 1;
    std::uint64_t length = 0;
    std::uint64_t seed = 0;
    std::vector<StreamProcess> streams;
    std::vector<ChangeEvent> changes;
    std::optional<RepeatPattern> repeat;

    /// Throws InvalidArgument listing every violation.
    void validate() const;
    StreamSchema schema() const;

    static GeneratorSpec from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct InjectedChange {
    std::uint64_t step = 0;
    std::size_t stream = 0;  // 1-based
    double magnitude = 0.0;
    std::string source;      // "change" or "pattern"

    friend bool operator==(const InjectedChange&, const InjectedChange&) = default;
};

struct GeneratedData {
    StreamSchema schema;
    std::vector<ContextVector> vectors;
    std::vector<InjectedChange> truth;
};

GeneratedData generate_stream(const GeneratorSpec& spec);

void write_truth_csv(std::ostream& out, const std::vector<InjectedChange>& truth);

}  // namespace stepcorr
