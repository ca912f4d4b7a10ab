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
#include <stepcorr/shewhart.hpp>

#include <stepcorr/error.hpp>

#include <cmath>
#include <string>

namespace stepcorr {

void RunningStats::update(double x) {
    if (!std::isfinite(x)) {
        fail(ErrorCode::InvalidArgument, "running statistics received a non-finite sample");
    }
    ++count_;
    const double t = static_cast<double>(count_);
    const double prev_mean = mean_;
    mean_ = prev_mean + (x - prev_mean) / t;
    variance_ = ((t - 1.0) * variance_ + (x - mean_) * (x - prev_mean)) / t;
    // Rounding can push a zero variance slightly negative.
    if (variance_ < 0.0) {
        variance_ = 0.0;
    }
}

double RunningStats::stddev() const noexcept { return std::sqrt(variance_); }

std::string_view to_string(CompareMode mode) {
    return mode == CompareMode::BeforeUpdate ? "before" : "after";
}

CompareMode parse_compare_mode(std::string_view text) {
    if (text == "before" || text == "before-update") return CompareMode::BeforeUpdate;
    if (text == "after" || text == "literal" || text == "update-first") return CompareMode::UpdateFirst;
    fail(ErrorCode::InvalidArgument, "unknown compare mode '" + std::string(text) + "'");
}

ShewhartDetector::ShewhartDetector(ShewhartOptions options) : options_(options) {
    require(std::isfinite(options_.tightness) && options_.tightness > 0.0, "tightness must be positive");
    require(options_.warmup >= 1, "warmup must be at least 1");
}

bool ShewhartDetector::step(double x) {
    if (!std::isfinite(x)) {
        fail(ErrorCode::InvalidArgument, "detector received a non-finite sample");
    }
    bool out_of_control = false;
    if (options_.mode == CompareMode::BeforeUpdate) {
        out_of_control = x > ucl_ || x < lcl_;
        stats_.update(x);
        refresh_limits();
    } else {
        stats_.update(x);
        refresh_limits();
        out_of_control = x > ucl_ || x < lcl_;
    }
    return out_of_control && stats_.count() > options_.warmup;
}

void ShewhartDetector::refresh_limits() {
    const double spread = options_.tightness * stats_.stddev();
    ucl_ = stats_.mean() + spread;
    lcl_ = stats_.mean() - spread;
}

DetectorBank::DetectorBank(std::size_t n, const ShewhartOptions& options) {
    require(n >= 1 && n <= kMaxStreams, "stream count out of range");
    detectors_.assign(n, ShewhartDetector(options));
}

EventVector DetectorBank::detect(const ContextVector& cv) { return detect(cv.t, cv.values); }

EventVector DetectorBank::detect(std::uint64_t t, std::span<const double> values) {
    if (values.size() != detectors_.size()) {
        fail(ErrorCode::InvalidArgument, "context vector at step " + std::to_string(t) + " has " +
                                             std::to_string(values.size()) + " values, detector bank expects " +
                                             std::to_string(detectors_.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(ErrorCode::InvalidArgument,
                 "non-finite value at step " + std::to_string(t) + ", stream index " + std::to_string(i + 1));
        }
    }
    EventVector ev{t, std::vector<std::uint8_t>(values.size(), 0)};
    for (std::size_t i = 0; i < values.size(); ++i) {
        ev.bits[i] = detectors_[i].step(values[i]) ? 1 : 0;
    }
    return ev;
}

}  // namespace stepcorr
