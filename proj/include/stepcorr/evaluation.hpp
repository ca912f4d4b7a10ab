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

#include <stepcorr/correlation_graph.hpp>
#include <stepcorr/event_set.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace stepcorr {

enum class Resolution { Pending, TruePositive, FalsePositive };

struct PredictionRecord {
    std::uint64_t issued_at = 0;
    EventSet predicted;
    std::uint64_t horizon = 1;
    Resolution resolved = Resolution::Pending;
};

struct Tally {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    Tally& operator+=(const Tally& other) {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
    friend bool operator==(const Tally&, const Tally&) = default;
};

/// Empty members mean the ratio has a zero denominator.
struct PrecisionRecall {
    std::optional<double> precision;
    std::optional<double> recall;
};

PrecisionRecall precision_recall(const Tally& tally);

/// Scores the state observed at step `t` against the pending records.
///
/// A record whose window (issued_at, issued_at + horizon] covers `t` and whose
/// prediction equals `actual` exactly becomes a true positive; only the
/// earliest such record is credited. When no covering record matches and
/// `count_misses` is set, one false negative is counted. Records whose window
/// ends at `t` without a match become false positives. Resolved records are
/// removed from `pending`.
Tally validate_step(std::vector<PredictionRecord>& pending, const EventSet& actual, std::uint64_t t,
                    bool count_misses);

/// Keeps the pending records and running tally of one experiment.
class HorizonValidator {
  public:
    explicit HorizonValidator(std::uint64_t horizon);

    void issue(std::uint64_t t, const EventSet& predicted);
    /// Misses are counted only once a prediction has been issued at an earlier step.
    Tally validate(const EventSet& actual, std::uint64_t t);
    /// Drops records whose window runs past the end of the trace, unscored.
    std::size_t discard_pending();

    const Tally& tally() const noexcept { return tally_; }
    std::size_t pending() const noexcept { return pending_.size(); }
    std::uint64_t horizon() const noexcept { return horizon_; }

  private:
    std::uint64_t horizon_;
    std::optional<std::uint64_t> first_issue_;
    std::vector<PredictionRecord> pending_;
    Tally tally_;
};

enum class Engine { Stepwise, PartialMatching };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view text);

struct ExperimentConfig {
    Engine engine = Engine::Stepwise;
    std::vector<std::size_t> k_values{3};
    std::vector<std::uint64_t> h_values{1};
    std::vector<std::size_t> m_values{1};
    BoundPolicy bound = BoundPolicy::Random;
    ForecastMode forecast = ForecastMode::FromCurrent;
    std::size_t lookahead = 1;
    double p_thr = 0.0;
    std::uint64_t seed = 0;
    bool keep_traces = false;

    void validate() const;
};

struct ExperimentCell {
    Engine engine = Engine::Stepwise;
    std::size_t max_combo_k = 1;
    std::uint64_t horizon = 1;
    /// Partial-matching order; absent for the stepwise engine.
    std::optional<std::size_t> order;
};

struct TraceRow {
    std::uint64_t t = 0;
    EventSet actual;
    std::optional<EventSet> predicted;
    Tally tally;
};

struct CellResult {
    ExperimentCell cell;
    Tally tally;
    PrecisionRecall scores;
    std::uint64_t steps = 0;
    /// Steps where the engine had no defined recommendation.
    std::uint64_t skipped = 0;
    std::vector<TraceRow> trace;
};

/// Seed for the state-bounding draws of one k value. Shared by every horizon
/// and engine so all cells with the same k see the same bounded trace.
std::uint64_t bound_seed(std::uint64_t root_seed, std::size_t max_combo_k);

/// Streams `states` through one engine: bound, validate, observe, recommend.
CellResult run_cell(std::span<const EventSet> states, const ExperimentCell& cell, const ExperimentConfig& config);

/// Runs every (k, h[, m]) cell of the grid in a fixed order.
std::vector<CellResult> run_experiment(std::span<const EventSet> states, const ExperimentConfig& config);

/// One row per cell: engine,k,h,m,precision,recall,steps,skipped,tp,fp,fn.
void write_report_csv(std::ostream& out, std::span<const CellResult> results);
/// One row per (cell, step) for cells that kept traces.
void write_trace_csv(std::ostream& out, std::span<const CellResult> results);

}  // namespace stepcorr
