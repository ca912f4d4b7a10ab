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

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace stepcorr {

/// Sparse probability mass over event-set states.
struct StateDistribution {
    std::map<EventSet, double> probs;

    double probability(const EventSet& state) const;
    double total() const;
};

struct Forecast {
    StateDistribution distribution;
    /// Mass before renormalization. Falls below 1 when the state seen only at
    /// the last step carries prior weight but has no outgoing transitions yet.
    double unnormalized_mass = 0.0;
};

/// Where the next-step forecast starts from.
enum class ForecastMode {
    /// Prior-weighted mixture over every observed state.
    Marginal,
    /// The transition row of the state observed at the last step.
    FromCurrent,
};

std::string_view to_string(ForecastMode mode);
ForecastMode parse_forecast_mode(std::string_view text);

class TransitionSnapshot;

/// First-order Markov correlation graph over event-set states, updated one
/// observation at a time.
///
/// Node counts hold how often each state occurred in steps 1..t. Edge counts
/// hold how often a state was followed by another at the next step. All
/// probabilities are count ratios evaluated at query time. A conditional's
/// denominator is the number of occurrences with a successor, which excludes
/// the occurrence at the final step.
class CorrelationGraph {
  public:
    struct Node {
        std::uint64_t count = 0;
        std::uint64_t outgoing = 0;
        std::map<EventSet, std::uint64_t> successors;
    };

    /// `n` is the number of event types; 0 disables member range checks.
    explicit CorrelationGraph(std::size_t n = 0);

    void observe(const EventSet& state);

    std::size_t n() const noexcept { return n_; }
    std::uint64_t steps() const noexcept { return steps_; }
    const std::optional<EventSet>& current_state() const noexcept { return current_; }
    const std::map<EventSet, Node>& nodes() const noexcept { return nodes_; }

    std::uint64_t node_count(const EventSet& state) const;
    std::uint64_t edge_count(const EventSet& from, const EventSet& to) const;

    /// Fraction of steps whose state equals `state` exactly. Throws
    /// UndefinedModel before the first observation.
    double prior(const EventSet& state) const;

    /// P(next = to | previous = from). Empty when `from` has no observed
    /// successor, which is distinct from a probability of zero. Throws
    /// UndefinedModel before two observations.
    std::optional<double> conditional(const EventSet& from, const EventSet& to) const;

    /// Next-step distribution. Throws UndefinedModel without any transition.
    /// In FromCurrent mode, throws UndefinedConditional when the current
    /// state has no observed successor.
    Forecast predict_next(ForecastMode mode = ForecastMode::Marginal) const;

    /// Probability that every type in `types` occurs at the next step.
    double predict_event_set(const EventSet& types, ForecastMode mode = ForecastMode::Marginal) const;

    /// Chapman-Kolmogorov estimate on a frozen one-step matrix. Empty when
    /// `from` has no observed successor.
    std::optional<double> nstep_transition(const EventSet& from, const EventSet& to, std::uint64_t steps) const;

    /// Most probable next state, ties going to the smallest canonical state.
    /// Empty when the forecast is undefined.
    std::optional<EventSet> recommend(ForecastMode mode = ForecastMode::FromCurrent) const;

    TransitionSnapshot snapshot() const;

    nlohmann::json to_json() const;
    static CorrelationGraph from_json(const nlohmann::json& doc);

  private:
    void require_transitions() const;

    std::size_t n_ = 0;
    std::uint64_t steps_ = 0;
    std::optional<EventSet> current_;
    std::map<EventSet, Node> nodes_;
};

/// Immutable one-step transition matrix over the observed states. Rows of
/// states without successors are empty: their mass leaks to an implicit dead
/// state that never returns.
class TransitionSnapshot {
  public:
    explicit TransitionSnapshot(const CorrelationGraph& graph);

    const std::vector<EventSet>& states() const noexcept { return states_; }
    std::optional<std::size_t> index_of(const EventSet& state) const;
    bool row_defined(std::size_t row) const { return !rows_.at(row).empty(); }

    /// Distribution after `steps` transitions starting from `from`.
    std::vector<double> propagate(std::size_t from, std::uint64_t steps) const;
    /// One transition applied to an arbitrary row vector.
    std::vector<double> advance(const std::vector<double>& mass) const;

  private:
    std::vector<EventSet> states_;
    std::map<EventSet, std::size_t> index_;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

}  // namespace stepcorr
