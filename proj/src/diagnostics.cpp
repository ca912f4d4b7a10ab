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
#include <stepcorr/diagnostics.hpp>

#include <stepcorr/error.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace stepcorr {
namespace {

constexpr std::size_t kMinHurstLength = 64;
constexpr std::size_t kSmallestWindow = 8;

void require_finite(std::span<const double> series) {
    for (double x : series) {
        if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "series contains a non-finite value");
    }
}

double mean_of(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); }

// R/S of one window, or nothing when the window is flat.
std::optional<double> rescaled_range(std::span<const double> window) {
    const double mu = mean_of(window);
    double cumulative = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double d = window[i] - mu;
        cumulative += d;
        ss += d * d;
        if (i == 0) {
            lo = hi = cumulative;
        } else {
            lo = std::min(lo, cumulative);
            hi = std::max(hi, cumulative);
        }
    }
    const double s = std::sqrt(ss / window.size());
    if (s == 0.0) return std::nullopt;
    return (hi - lo) / s;
}

}  // namespace

HurstEstimate hurst_rs(std::span<const double> series) {
    if (series.size() < kMinHurstLength) {
        fail(ErrorCode::InvalidArgument, "Hurst estimation needs at least 64 samples, got " +
                                             std::to_string(series.size()));
    }
    require_finite(series);
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (*lo == *hi) {
        fail(ErrorCode::Numeric, "constant series has zero range; Hurst exponent undefined");
    }

    HurstEstimate out;
    std::vector<double> log_size;
    std::vector<double> log_rs;
    for (std::size_t size = kSmallestWindow; size <= series.size() / 2; size *= 2) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t start = 0; start + size <= series.size(); start += size) {
            if (auto rs = rescaled_range(series.subspan(start, size))) {
                sum += *rs;
                ++used;
            }
        }
        if (used == 0) continue;
        out.window_sizes.push_back(size);
        out.mean_rescaled_range.push_back(sum / used);
        out.window_count += used;
        log_size.push_back(std::log(static_cast<double>(size)));
        log_rs.push_back(std::log(sum / used));
    }
    if (log_size.size() < 2) {
        fail(ErrorCode::Numeric, "too few non-flat window sizes to fit a Hurst slope");
    }

    const double mx = mean_of(log_size);
    const double my = mean_of(log_rs);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < log_size.size(); ++i) {
        sxy += (log_size[i] - mx) * (log_rs[i] - my);
        sxx += (log_size[i] - mx) * (log_size[i] - mx);
    }
    out.raw_slope = sxy / sxx;
    out.hurst = std::clamp(out.raw_slope, 0.0, 1.0);
    out.clamped = out.hurst != out.raw_slope;
    return out;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
    require(series.size() > max_lag, "series must be longer than the maximum lag");
    require_finite(series);
    const double mu = mean_of(series);
    double denom = 0.0;
    for (double x : series) denom += (x - mu) * (x - mu);
    if (denom == 0.0) {
        fail(ErrorCode::Numeric, "constant series has zero variance; autocorrelation undefined");
    }
    std::vector<double> out(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < series.size(); ++t) num += (series[t] - mu) * (series[t + k] - mu);
        out[k] = num / denom;
    }
    out[0] = 1.0;
    return out;
}

std::vector<double> pacf_from_acf(std::span<const double> rho) {
    require(!rho.empty() && rho[0] == 1.0, "autocorrelation sequence must start with 1");
    const std::size_t max_lag = rho.size() - 1;
    std::vector<double> out;
    out.reserve(max_lag);
    std::vector<double> phi;  // AR coefficients of the current order
    double error = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = rho[k];
        for (std::size_t j = 1; j < k; ++j) num -= phi[j - 1] * rho[k - j];
        const double reflection = num / error;
        if (!std::isfinite(reflection) || std::abs(reflection) >= 1.0) {
            fail(ErrorCode::Numeric, "Durbin-Levinson recursion degenerated at lag " + std::to_string(k));
        }
        std::vector<double> next(k);
        for (std::size_t j = 1; j < k; ++j) next[j - 1] = phi[j - 1] - reflection * phi[k - j - 1];
        next[k - 1] = reflection;
        phi = std::move(next);
        error *= 1.0 - reflection * reflection;
        out.push_back(reflection);
    }
    return out;
}

std::vector<double> pacf(std::span<const double> series, std::size_t max_lag) {
    return pacf_from_acf(acf(series, max_lag));
}

SeriesDiagnostics diagnose_series(std::span<const double> series, std::size_t max_lag) {
    SeriesDiagnostics out;
    out.hurst = hurst_rs(series);
    out.acf = acf(series, max_lag);
    out.pacf = pacf_from_acf(out.acf);
    return out;
}

}  // namespace stepcorr
