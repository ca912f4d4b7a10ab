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
#include <stepcorr/generator.hpp>

#include <stepcorr/error.hpp>
#include "json_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <tuple>

namespace stepcorr {

using detail::non_negative_integer;

namespace {

std::string_view process_name(BaseProcess p) {
    switch (p) {
        case BaseProcess::Constant: return "constant";
        case BaseProcess::WhiteNoise: return "white-noise";
        case BaseProcess::Ar1: return "ar1";
        case BaseProcess::Ramp: return "ramp";
    }
    return "";
}

BaseProcess parse_process(const std::string& text) {
    if (text == "constant") return BaseProcess::Constant;
    if (text == "white-noise" || text == "white_noise") return BaseProcess::WhiteNoise;
    if (text == "ar1") return BaseProcess::Ar1;
    if (text == "ramp") return BaseProcess::Ramp;
    fail(ErrorCode::InvalidArgument, "unknown base process '" + text + "'");
}

StreamProcess process_from_json(const nlohmann::json& doc, StreamProcess base) {
    if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "stream process must be an object");
    if (doc.contains("type")) base.process = parse_process(doc["type"].get<std::string>());
    base.name = doc.value("name", base.name);
    base.mu = doc.value("mu", base.mu);
    base.sigma = doc.value("sigma", base.sigma);
    base.phi = doc.value("phi", base.phi);
    base.slope = doc.value("slope", base.slope);
    return base;
}

EventSet set_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) fail(ErrorCode::InvalidArgument, "stream subsets must be arrays of 1-based indices");
    std::vector<EventTypeIndex> members;
    for (const auto& m : doc) {
        if (!non_negative_integer(m) || m.get<std::uint64_t>() == 0 || m.get<std::uint64_t>() > kMaxStreams) {
            fail(ErrorCode::InvalidArgument, "stream indices must be integers in 1..1024");
        }
        members.push_back(static_cast<EventTypeIndex>(m.get<std::uint64_t>()));
    }
    return EventSet::from_members(std::move(members));
}

nlohmann::json set_to_json(const EventSet& s) {
    auto arr = nlohmann::json::array();
    for (auto m : s.members()) arr.push_back(m);
    return arr;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t lane) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (lane + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool within(const EventSet& s, std::size_t n) { return s.empty() || s.members().back() <= n; }

}  // namespace

void GeneratorSpec::validate() const {
    std::vector<std::string> problems;
    if (n < 1 || n > kMaxStreams) problems.push_back("n must be in 1..1024");
    if (length < 1) problems.push_back("length must be positive");
    if (streams.size() != n) problems.push_back("stream process count does not match n");
    for (const auto& s : streams) {
        const bool stochastic = s.process == BaseProcess::WhiteNoise || s.process == BaseProcess::Ar1;
        if (!(s.sigma > 0.0) && stochastic) problems.push_back("stream '" + s.name + "': sigma must be positive");
        if (!std::isfinite(s.sigma) || !std::isfinite(s.mu) || !std::isfinite(s.phi) || !std::isfinite(s.slope)) {
            problems.push_back("stream '" + s.name + "': parameters must be finite");
        }
        if (s.process == BaseProcess::Ar1 && !(std::abs(s.phi) < 1.0)) {
            problems.push_back("stream '" + s.name + "': ar1 needs |phi| < 1");
        }
    }
    for (const auto& c : changes) {
        if (c.step < 1 || c.step > length) problems.push_back("change step " + std::to_string(c.step) + " outside [1, T]");
        if (!within(c.streams, n)) problems.push_back("change at step " + std::to_string(c.step) + " names a stream above n");
        if (c.duration < 1) problems.push_back("change duration must be positive");
        if (!std::isfinite(c.magnitude)) problems.push_back("change magnitude must be finite");
    }
    if (repeat) {
        if (repeat->pattern.empty()) problems.push_back("repeat pattern must not be empty");
        for (const auto& s : repeat->pattern) {
            if (!within(s, n)) problems.push_back("repeat pattern names a stream above n");
        }
        if (repeat->start < 1 || repeat->start > length) problems.push_back("pattern start outside [1, T]");
        if (!(repeat->noise >= 0.0 && repeat->noise <= 1.0)) problems.push_back("pattern noise must lie in [0, 1]");
        if (!std::isfinite(repeat->magnitude)) problems.push_back("pattern magnitude must be finite");
    }
    std::vector<std::string_view> names;
    for (const auto& s : streams) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) problems.push_back("stream names must be unique");
    if (std::find(names.begin(), names.end(), "") != names.end()) problems.push_back("stream names must be non-empty");

    if (!problems.empty()) {
        std::string message = "invalid generator spec:";
        for (const auto& p : problems) message += "\n  - " + p;
        fail(ErrorCode::InvalidArgument, message);
    }
}

StreamSchema GeneratorSpec::schema() const {
    StreamSchema s;
    for (const auto& p : streams) s.stream_names.push_back(p.name);
    return s;
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "generator spec must be a JSON object");
    GeneratorSpec spec;
    try {
        spec.n = doc.at("n").get<std::size_t>();
        spec.length = doc.at("length").get<std::uint64_t>();
        spec.seed = doc.value("seed", std::uint64_t{0});
        StreamProcess base;
        if (doc.contains("process")) base = process_from_json(doc["process"], base);
        const auto* per_stream = doc.contains("streams") ? &doc["streams"] : nullptr;
        if (per_stream && (!per_stream->is_array() || per_stream->size() != spec.n)) {
            fail(ErrorCode::InvalidArgument, "'streams' must list exactly n processes");
        }
        for (std::size_t i = 0; i < spec.n && i < kMaxStreams; ++i) {
            StreamProcess p = base;
            p.name = "s" + std::to_string(i + 1);
            if (per_stream) p = process_from_json((*per_stream)[i], p);
            spec.streams.push_back(std::move(p));
        }
        for (const auto& c : doc.value("changes", nlohmann::json::array())) {
            spec.changes.push_back({c.at("step").get<std::uint64_t>(), set_from_json(c.at("streams")),
                                    c.at("magnitude").get<double>(), c.value("duration", std::uint64_t{1})});
        }
        if (doc.contains("repeat_period") || doc.contains("pattern")) {
            RepeatPattern repeat;
            for (const auto& s : doc.at("pattern")) repeat.pattern.push_back(set_from_json(s));
            if (doc.contains("repeat_period") && doc["repeat_period"].get<std::size_t>() != repeat.pattern.size()) {
                fail(ErrorCode::InvalidArgument, "repeat_period must equal the pattern length");
            }
            repeat.magnitude = doc.value("pattern_magnitude", repeat.magnitude);
            repeat.start = doc.value("pattern_start", repeat.start);
            repeat.noise = doc.value("pattern_noise", repeat.noise);
            spec.repeat = std::move(repeat);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed generator spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json GeneratorSpec::to_json() const {
    nlohmann::json doc;
    doc["n"] = n;
    doc["length"] = length;
    doc["seed"] = seed;
    auto arr = nlohmann::json::array();
    for (const auto& s : streams) {
        arr.push_back({{"name", s.name}, {"type", process_name(s.process)}, {"mu", s.mu}, {"sigma", s.sigma},
                       {"phi", s.phi}, {"slope", s.slope}});
    }
    doc["streams"] = std::move(arr);
    auto changes_json = nlohmann::json::array();
    for (const auto& c : changes) {
        changes_json.push_back({{"step", c.step}, {"streams", set_to_json(c.streams)}, {"magnitude", c.magnitude},
                                {"duration", c.duration}});
    }
    doc["changes"] = std::move(changes_json);
    if (repeat) {
        doc["repeat_period"] = repeat->pattern.size();
        auto pattern = nlohmann::json::array();
        for (const auto& s : repeat->pattern) pattern.push_back(set_to_json(s));
        doc["pattern"] = std::move(pattern);
        doc["pattern_magnitude"] = repeat->magnitude;
        doc["pattern_start"] = repeat->start;
        doc["pattern_noise"] = repeat->noise;
    }
    return doc;
}

GeneratedData generate_stream(const GeneratorSpec& spec) {
    spec.validate();
    GeneratedData out;
    out.schema = spec.schema();
    const std::size_t n = spec.n;
    const std::uint64_t T = spec.length;

    // Shift offsets per (step, stream), in stream units.
    std::vector<std::vector<double>> offsets(T, std::vector<double>(n, 0.0));
    for (const auto& c : spec.changes) {
        for (auto s : c.streams.members()) {
            for (std::uint64_t d = 0; d < c.duration && c.step + d <= T; ++d) {
                offsets[c.step - 1 + d][s - 1] += c.magnitude * spec.streams[s - 1].sigma;
            }
            out.truth.push_back({c.step, s, c.magnitude, "change"});
        }
    }
    if (spec.repeat) {
        const auto& rp = *spec.repeat;
        std::mt19937_64 noise_rng(mix(spec.seed, n));
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (std::uint64_t t = rp.start; t <= T; ++t) {
            EventSet active = rp.pattern[(t - rp.start) % rp.pattern.size()];
            if (rp.noise > 0.0 && coin(noise_rng) < rp.noise) {
                std::vector<EventTypeIndex> members;
                for (std::size_t s = 1; s <= n; ++s) {
                    if (coin(noise_rng) < 0.5) members.push_back(static_cast<EventTypeIndex>(s));
                }
                active = EventSet::from_members(std::move(members));
            }
            for (auto s : active.members()) {
                offsets[t - 1][s - 1] += rp.magnitude * spec.streams[s - 1].sigma;
                out.truth.push_back({t, s, rp.magnitude, "pattern"});
            }
        }
    }
    std::sort(out.truth.begin(), out.truth.end(), [](const InjectedChange& a, const InjectedChange& b) {
        return std::tie(a.step, a.stream, a.source) < std::tie(b.step, b.stream, b.source);
    });

    out.vectors.resize(T);
    for (std::uint64_t t = 0; t < T; ++t) out.vectors[t] = {t + 1, std::vector<double>(n, 0.0)};
    for (std::size_t s = 0; s < n; ++s) {
        const auto& p = spec.streams[s];
        std::mt19937_64 rng(mix(spec.seed, s));
        std::normal_distribution<double> normal(0.0, 1.0);
        double ar_state = 0.0;
        if (p.process == BaseProcess::Ar1) ar_state = normal(rng) * p.sigma / std::sqrt(1.0 - p.phi * p.phi);
        for (std::uint64_t t = 0; t < T; ++t) {
            double base = p.mu;
            switch (p.process) {
                case BaseProcess::Constant: break;
                case BaseProcess::WhiteNoise: base += p.sigma * normal(rng); break;
                case BaseProcess::Ar1:
                    if (t > 0) ar_state = p.phi * ar_state + p.sigma * normal(rng);
                    base += ar_state;
                    break;
                case BaseProcess::Ramp: base += p.slope * static_cast<double>(t + 1); break;
            }
            out.vectors[t].values[s] = base + offsets[t][s];
        }
    }
    return out;
}

void write_truth_csv(std::ostream& out, const std::vector<InjectedChange>& truth) {
    out << "step,stream,magnitude,source\n";
    for (const auto& c : truth) {
        out << c.step << ',' << c.stream << ',' << format_double(c.magnitude) << ',' << c.source << '\n';
    }
}

}  // namespace stepcorr
