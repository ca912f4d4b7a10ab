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
#include <span>
#include <vector>

namespace stepcorr {

struct HurstEstimate {
    double hurst = 0.0;
    /// Least-squares slope before clamping to [0, 1].
    double raw_slope = 0.0;
    bool clamped = false;
    std::vector<std::size_t> window_sizes;
    std::vector<double> mean_rescaled_range;
    /// Total number of windows that contributed an R/S value.
    std::size_t window_count = 0;
};

/// Rescaled-range Hurst estimate over non-overlapping windows of size
/// 8, 16, ... up to N/2. Needs at least 64 samples and a non-constant series.
HurstEstimate hurst_rs(std::span<const double> series);

/// Biased sample autocorrelation for lags 0..max_lag.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Partial autocorrelation for lags 1..max_lag by Durbin-Levinson.
std::vector<double> pacf(std::span<const double> series, std::size_t max_lag);

/// Durbin-Levinson on an autocorrelation sequence (acf[0] must be 1).
std::vector<double> pacf_from_acf(std::span<const double> acf_values);

struct SeriesDiagnostics {
    HurstEstimate hurst;
    std::vector<double> acf;
    std::vector<double> pacf;
};

SeriesDiagnostics diagnose_series(std::span<const double> series, std::size_t max_lag);

}  // namespace stepcorr
