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
#include <stepcorr/correlation_graph.hpp>

#include <stepcorr/error.hpp>
#include "json_util.hpp"

#include <nlohmann/json.hpp>

namespace stepcorr {

using detail::non_negative_integer;

namespace {

nlohmann::json state_to_json(const EventSet& state) {
    auto arr = nlohmann::json::array();
    for (auto m : state.members()) arr.push_back(m);
    return arr;
}

EventSet state_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) {
        fail(ErrorCode::Parse, "state must be an array of event type indices");
    }
    std::vector<EventTypeIndex> members;
    for (const auto& v : doc) {
        if (!non_negative_integer(v)) {
            fail(ErrorCode::Parse, "state members must be positive integers");
        }
        auto raw = v.get<std::uint64_t>();
        if (raw == 0 || raw > kMaxStreams) {
            fail(ErrorCode::Parse, "state member out of range");
        }
        members.push_back(static_cast<EventTypeIndex>(raw));
    }
    auto state = EventSet::from_members(members);
    if (state.size() != members.size()) {
        fail(ErrorCode::Parse, "state members must be unique");
    }
    return state;
}

std::uint64_t count_from_json(const nlohmann::json& doc) {
    if (!non_negative_integer(doc)) {
        fail(ErrorCode::Parse, "counts must be non-negative integers");
    }
    return doc.get<std::uint64_t>();
}

}  // namespace

double StateDistribution::probability(const EventSet& state) const {
    auto it = probs.find(state);
    return it == probs.end() ? 0.0 : it->second;
}

double StateDistribution::total() const {
    double sum = 0.0;
    for (const auto& [state, p] : probs) sum += p;
    return sum;
}

std::string_view to_string(ForecastMode mode) { return mode == ForecastMode::Marginal ? "marginal" : "from-current"; }

ForecastMode parse_forecast_mode(std::string_view text) {
    if (text == "marginal") return ForecastMode::Marginal;
    if (text == "from-current" || text == "current") return ForecastMode::FromCurrent;
    fail(ErrorCode::InvalidArgument, "unknown forecast mode '" + std::string(text) + "'");
}

CorrelationGraph::CorrelationGraph(std::size_t n) : n_(n) {
    require(n <= kMaxStreams, "event type count exceeds engine limit");
}

void CorrelationGraph::observe(const EventSet& state) {
    if (n_ != 0 && !state.empty()) {
        require(state.members().back() <= n_, "state " + state.to_string() + " references an unknown event type");
    }
    ++steps_;
    auto& node = nodes_[state];
    ++node.count;
    if (current_) {
        auto& prev = nodes_[*current_];
        ++prev.successors[state];
        ++prev.outgoing;
    }
    current_ = state;
}

std::uint64_t CorrelationGraph::node_count(const EventSet& state) const {
    auto it = nodes_.find(state);
    return it == nodes_.end() ? 0 : it->second.count;
}

std::uint64_t CorrelationGraph::edge_count(const EventSet& from, const EventSet& to) const {
    auto it = nodes_.find(from);
    if (it == nodes_.end()) return 0;
    auto e = it->second.successors.find(to);
    return e == it->second.successors.end() ? 0 : e->second;
}

double CorrelationGraph::prior(const EventSet& state) const {
    if (steps_ == 0) {
        fail(ErrorCode::UndefinedModel, "prior is undefined before the first observation");
    }
    return static_cast<double>(node_count(state)) / static_cast<double>(steps_);
}

std::optional<double> CorrelationGraph::conditional(const EventSet& from, const EventSet& to) const {
    require_transitions();
    auto it = nodes_.find(from);
    if (it == nodes_.end() || it->second.outgoing == 0) {
        return std::nullopt;
    }
    return static_cast<double>(edge_count(from, to)) / static_cast<double>(it->second.outgoing);
}

void CorrelationGraph::require_transitions() const {
    if (steps_ < 2) {
        fail(ErrorCode::UndefinedModel, "the model needs at least two observations");
    }
}

Forecast CorrelationGraph::predict_next(ForecastMode mode) const {
    require_transitions();
    Forecast out;
    if (mode == ForecastMode::FromCurrent) {
        const auto& node = nodes_.at(*current_);
        if (node.outgoing == 0) {
            fail(ErrorCode::UndefinedConditional,
                 "current state " + current_->to_string() + " has no observed successor yet");
        }
        for (const auto& [next, count] : node.successors) {
            out.distribution.probs[next] = static_cast<double>(count) / static_cast<double>(node.outgoing);
        }
        out.unnormalized_mass = 1.0;
        return out;
    }
    const double t = static_cast<double>(steps_);
    for (const auto& [state, node] : nodes_) {
        if (node.outgoing == 0) continue;
        const double weight = static_cast<double>(node.count) / t;
        out.unnormalized_mass += weight;
        for (const auto& [next, count] : node.successors) {
            out.distribution.probs[next] += weight * static_cast<double>(count) / static_cast<double>(node.outgoing);
        }
    }
    for (auto& [state, p] : out.distribution.probs) p /= out.unnormalized_mass;
    return out;
}

double CorrelationGraph::predict_event_set(const EventSet& types, ForecastMode mode) const {
    const auto forecast = predict_next(mode);
    double sum = 0.0;
    for (const auto& [state, p] : forecast.distribution.probs) {
        if (state.is_superset_of(types)) sum += p;
    }
    return sum;
}

std::optional<double> CorrelationGraph::nstep_transition(const EventSet& from, const EventSet& to,
                                                         std::uint64_t steps) const {
    require(steps >= 1, "step count must be positive");
    require_transitions();
    const TransitionSnapshot snap(*this);
    auto row = snap.index_of(from);
    if (!row || !snap.row_defined(*row)) {
        return std::nullopt;
    }
    auto col = snap.index_of(to);
    if (!col) return 0.0;
    return snap.propagate(*row, steps)[*col];
}

std::optional<EventSet> CorrelationGraph::recommend(ForecastMode mode) const {
    if (steps_ < 2) return std::nullopt;
    if (mode == ForecastMode::FromCurrent && nodes_.at(*current_).outgoing == 0) return std::nullopt;
    const auto forecast = predict_next(mode);
    std::optional<EventSet> best;
    double best_p = -1.0;
    // Ordered map iteration plus strict comparison keeps the smallest state on ties.
    for (const auto& [state, p] : forecast.distribution.probs) {
        if (p > best_p) {
            best = state;
            best_p = p;
        }
    }
    return best;
}

TransitionSnapshot CorrelationGraph::snapshot() const { return TransitionSnapshot(*this); }

nlohmann::json CorrelationGraph::to_json() const {
    nlohmann::json doc;
    doc["n"] = n_;
    doc["t"] = steps_;
    doc["prev_state"] = current_ ? state_to_json(*current_) : nlohmann::json(nullptr);
    auto nodes = nlohmann::json::array();
    auto edges = nlohmann::json::array();
    for (const auto& [state, node] : nodes_) {
        nodes.push_back({state_to_json(state), node.count});
        for (const auto& [next, count] : node.successors) {
            edges.push_back({state_to_json(state), state_to_json(next), count});
        }
    }
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    return doc;
}

CorrelationGraph CorrelationGraph::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("t") || !doc.contains("nodes") || !doc.contains("edges")) {
        fail(ErrorCode::Parse, "model document needs 't', 'nodes' and 'edges'");
    }
    CorrelationGraph graph(doc.contains("n") ? count_from_json(doc["n"]) : 0);
    graph.steps_ = count_from_json(doc["t"]);
    if (doc.contains("prev_state") && !doc["prev_state"].is_null()) {
        graph.current_ = state_from_json(doc["prev_state"]);
    }
    std::uint64_t total = 0;
    for (const auto& entry : doc["nodes"]) {
        if (!entry.is_array() || entry.size() != 2) fail(ErrorCode::Parse, "node entries are [state, count]");
        auto state = state_from_json(entry[0]);
        auto& node = graph.nodes_[state];
        if (node.count != 0) fail(ErrorCode::Parse, "duplicate node " + state.to_string());
        node.count = count_from_json(entry[1]);
        total += node.count;
    }
    for (const auto& entry : doc["edges"]) {
        if (!entry.is_array() || entry.size() != 3) fail(ErrorCode::Parse, "edge entries are [from, to, count]");
        auto from = state_from_json(entry[0]);
        auto to = state_from_json(entry[1]);
        auto it = graph.nodes_.find(from);
        if (it == graph.nodes_.end() || !graph.nodes_.contains(to)) {
            fail(ErrorCode::Parse, "edge " + from.to_string() + "->" + to.to_string() + " references unknown node");
        }
        const auto count = count_from_json(entry[2]);
        it->second.successors[to] += count;
        it->second.outgoing += count;
    }
    if (total != graph.steps_) {
        fail(ErrorCode::Parse, "node counts sum to " + std::to_string(total) + " but t is " +
                                   std::to_string(graph.steps_));
    }
    for (const auto& [state, node] : graph.nodes_) {
        if (node.outgoing > node.count) {
            fail(ErrorCode::Parse, "state " + state.to_string() + " has more transitions than occurrences");
        }
        if (graph.n_ != 0 && !state.empty() && state.members().back() > graph.n_) {
            fail(ErrorCode::Parse, "state " + state.to_string() + " exceeds n");
        }
    }
    if ((graph.steps_ == 0) != !graph.current_.has_value() ||
        (graph.current_ && !graph.nodes_.contains(*graph.current_))) {
        fail(ErrorCode::Parse, "prev_state is inconsistent with the node table");
    }
    return graph;
}

TransitionSnapshot::TransitionSnapshot(const CorrelationGraph& graph) {
    for (const auto& [state, node] : graph.nodes()) {
        index_.emplace(state, states_.size());
        states_.push_back(state);
    }
    rows_.resize(states_.size());
    std::size_t row = 0;
    for (const auto& [state, node] : graph.nodes()) {
        for (const auto& [next, count] : node.successors) {
            rows_[row].emplace_back(index_.at(next),
                                    static_cast<double>(count) / static_cast<double>(node.outgoing));
        }
        ++row;
    }
}

std::optional<std::size_t> TransitionSnapshot::index_of(const EventSet& state) const {
    auto it = index_.find(state);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<double> TransitionSnapshot::advance(const std::vector<double>& mass) const {
    require(mass.size() == states_.size(), "mass vector does not match snapshot size");
    std::vector<double> next(states_.size(), 0.0);
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] == 0.0) continue;
        for (const auto& [j, p] : rows_[i]) next[j] += mass[i] * p;
    }
    return next;
}

std::vector<double> TransitionSnapshot::propagate(std::size_t from, std::uint64_t steps) const {
    require(from < states_.size(), "snapshot row out of range");
    std::vector<double> mass(states_.size(), 0.0);
    mass[from] = 1.0;
    for (std::uint64_t s = 0; s < steps; ++s) mass = advance(mass);
    return mass;
}

}  // namespace stepcorr
