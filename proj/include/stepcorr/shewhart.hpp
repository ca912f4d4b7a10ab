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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace stepcorr {

/// Running mean and population standard deviation, updated one sample at a
/// time with the recurrences of the Shewhart chart:
///
///   mean_t = mean_{t-1} + (x_t - mean_{t-1}) / t
///   var_t  = ((t-1) var_{t-1} + (x_t - mean_t)(x_t - mean_{t-1})) / t
class RunningStats {
  public:
    void update(double x);

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double stddev() const noexcept;

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

/// Order in which a sample is tested against the control limits.
enum class CompareMode {
    /// Test against the limits of the previous step, then absorb the sample.
    BeforeUpdate,
    /// Absorb the sample first, then test against the refreshed limits.
    UpdateFirst,
};

std::string_view to_string(CompareMode mode);
CompareMode parse_compare_mode(std::string_view text);

struct ShewhartOptions {
    double tightness = 3.0;
    std::uint64_t warmup = 25;
    CompareMode mode = CompareMode::BeforeUpdate;
};

class ShewhartDetector {
  public:
    explicit ShewhartDetector(ShewhartOptions options = {});

    /// Feeds one sample and returns the detection signal. Samples at
    /// t <= warmup never signal. Statistics absorb every sample, including
    /// out-of-control ones.
    bool step(double x);

    const RunningStats& stats() const noexcept { return stats_; }
    const ShewhartOptions& options() const noexcept { return options_; }
    double ucl() const noexcept { return ucl_; }
    double lcl() const noexcept { return lcl_; }

  private:
    void refresh_limits();

    ShewhartOptions options_;
    RunningStats stats_;
    double ucl_ = 0.0;
    double lcl_ = 0.0;
};

/// One detector per stream.
class DetectorBank {
  public:
    DetectorBank(std::size_t n, const ShewhartOptions& options);

    EventVector detect(const ContextVector& cv);
    EventVector detect(std::uint64_t t, std::span<const double> values);

    std::size_t size() const noexcept { return detectors_.size(); }
    const ShewhartDetector& detector(std::size_t i) const { return detectors_.at(i); }

  private:
    std::vector<ShewhartDetector> detectors_;
};

}  // namespace stepcorr
