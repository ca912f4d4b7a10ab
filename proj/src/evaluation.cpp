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
#include <stepcorr/evaluation.hpp>

#include <stepcorr/error.hpp>
#include <stepcorr/ingest.hpp>
#include <stepcorr/partial_matching.hpp>

#include <algorithm>
#include <ostream>
#include <variant>

namespace stepcorr {
namespace {

std::string ratio_cell(const std::optional<double>& value) { return value ? format_double(*value) : std::string(); }

class Predictor {
  public:
    Predictor(const ExperimentCell& cell, const ExperimentConfig& config) : mode_(config.forecast) {
        if (cell.engine == Engine::Stepwise) {
            engine_.emplace<CorrelationGraph>();
        } else {
            engine_.emplace<PartialMatchTrie>(PMConfig{*cell.order, config.lookahead, config.p_thr});
        }
    }

    void observe(const EventSet& state) {
        std::visit([&](auto& e) { e.observe(state); }, engine_);
    }

    std::optional<EventSet> recommend() const {
        if (const auto* graph = std::get_if<CorrelationGraph>(&engine_)) return graph->recommend(mode_);
        return std::get<PartialMatchTrie>(engine_).recommend();
    }

  private:
    ForecastMode mode_;
    std::variant<CorrelationGraph, PartialMatchTrie> engine_;
};

}  // namespace

PrecisionRecall precision_recall(const Tally& tally) {
    PrecisionRecall out;
    if (tally.tp + tally.fp > 0) {
        out.precision = static_cast<double>(tally.tp) / static_cast<double>(tally.tp + tally.fp);
    }
    if (tally.tp + tally.fn > 0) {
        out.recall = static_cast<double>(tally.tp) / static_cast<double>(tally.tp + tally.fn);
    }
    return out;
}

Tally validate_step(std::vector<PredictionRecord>& pending, const EventSet& actual, std::uint64_t t,
                    bool count_misses) {
    Tally delta;
    auto covers = [t](const PredictionRecord& r) { return r.issued_at < t && t <= r.issued_at + r.horizon; };
    // Records are appended in issue order, so the first hit is the earliest.
    auto hit = std::find_if(pending.begin(), pending.end(), [&](const PredictionRecord& r) {
        return r.resolved == Resolution::Pending && covers(r) && r.predicted == actual;
    });
    if (hit != pending.end()) {
        hit->resolved = Resolution::TruePositive;
        ++delta.tp;
    } else if (count_misses) {
        ++delta.fn;
    }
    for (auto& r : pending) {
        if (r.resolved == Resolution::Pending && r.issued_at + r.horizon <= t) {
            r.resolved = Resolution::FalsePositive;
            ++delta.fp;
        }
    }
    std::erase_if(pending, [](const PredictionRecord& r) { return r.resolved != Resolution::Pending; });
    return delta;
}

HorizonValidator::HorizonValidator(std::uint64_t horizon) : horizon_(horizon) {
    require(horizon >= 1, "horizon must be at least 1");
}

void HorizonValidator::issue(std::uint64_t t, const EventSet& predicted) {
    if (!first_issue_) first_issue_ = t;
    pending_.push_back({t, predicted, horizon_, Resolution::Pending});
}

Tally HorizonValidator::validate(const EventSet& actual, std::uint64_t t) {
    const bool scoring = first_issue_ && *first_issue_ < t;
    auto delta = validate_step(pending_, actual, t, scoring);
    tally_ += delta;
    return delta;
}

std::size_t HorizonValidator::discard_pending() {
    const auto dropped = pending_.size();
    pending_.clear();
    return dropped;
}

std::string_view to_string(Engine engine) { return engine == Engine::Stepwise ? "stepwise" : "pm"; }

Engine parse_engine(std::string_view text) {
    if (text == "stepwise") return Engine::Stepwise;
    if (text == "pm" || text == "partial-matching") return Engine::PartialMatching;
    fail(ErrorCode::InvalidArgument, "unknown engine '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    require(!k_values.empty() && !h_values.empty(), "the grid needs at least one k and one h value");
    for (auto k : k_values) require(k >= 1, "max_combo_k values must be at least 1");
    for (auto h : h_values) require(h >= 1, "horizon values must be at least 1");
    if (engine == Engine::PartialMatching) {
        require(!m_values.empty(), "the partial-matching grid needs at least one m value");
        for (auto m : m_values) PMConfig{m, lookahead, p_thr}.validate();
    }
}

std::uint64_t bound_seed(std::uint64_t root_seed, std::size_t max_combo_k) {
    // splitmix64 finalizer over the pair.
    std::uint64_t z = root_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(max_combo_k) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CellResult run_cell(std::span<const EventSet> states, const ExperimentCell& cell, const ExperimentConfig& config) {
    require(!states.empty(), "event stream is empty");
    require(cell.engine == Engine::Stepwise || cell.order, "partial-matching cells need an order");
    const BoundOptions bound{cell.max_combo_k, config.bound, bound_seed(config.seed, cell.max_combo_k)};
    Predictor predictor(cell, config);
    HorizonValidator validator(cell.horizon);
    CellResult result;
    result.cell = cell;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::uint64_t t = i + 1;
        const auto state = bound_state(states[i], bound, t);
        validator.validate(state, t);
        predictor.observe(state);
        auto next = predictor.recommend();
        if (next) {
            validator.issue(t, *next);
        } else {
            ++result.skipped;
        }
        if (config.keep_traces) {
            result.trace.push_back({t, state, next, validator.tally()});
        }
    }
    validator.discard_pending();
    result.steps = states.size();
    result.tally = validator.tally();
    result.scores = precision_recall(result.tally);
    return result;
}

std::vector<CellResult> run_experiment(std::span<const EventSet> states, const ExperimentConfig& config) {
    config.validate();
    std::vector<CellResult> results;
    for (auto k : config.k_values) {
        for (auto h : config.h_values) {
            if (config.engine == Engine::Stepwise) {
                results.push_back(run_cell(states, {Engine::Stepwise, k, h, std::nullopt}, config));
                continue;
            }
            for (auto m : config.m_values) {
                results.push_back(run_cell(states, {Engine::PartialMatching, k, h, m}, config));
            }
        }
    }
    return results;
}

void write_report_csv(std::ostream& out, std::span<const CellResult> results) {
    out << "engine,k,h,m,precision,recall,steps,skipped,tp,fp,fn\n";
    for (const auto& r : results) {
        out << to_string(r.cell.engine) << ',' << r.cell.max_combo_k << ',' << r.cell.horizon << ','
            << (r.cell.order ? std::to_string(*r.cell.order) : std::string()) << ','
            << ratio_cell(r.scores.precision) << ',' << ratio_cell(r.scores.recall) << ',' << r.steps << ','
            << r.skipped << ',' << r.tally.tp << ',' << r.tally.fp << ',' << r.tally.fn << '\n';
    }
}

void write_trace_csv(std::ostream& out, std::span<const CellResult> results) {
    out << "engine,k,h,m,t,actual,predicted,tp,fp,fn,precision,recall\n";
    for (const auto& r : results) {
        const std::string prefix = std::string(to_string(r.cell.engine)) + ',' + std::to_string(r.cell.max_combo_k) +
                                   ',' + std::to_string(r.cell.horizon) + ',' +
                                   (r.cell.order ? std::to_string(*r.cell.order) : std::string()) + ',';
        for (const auto& row : r.trace) {
            const auto scores = precision_recall(row.tally);
            out << prefix << row.t << ",\"" << row.actual.to_string() << "\",\""
                << (row.predicted ? row.predicted->to_string() : std::string()) << "\"," << row.tally.tp << ','
                << row.tally.fp << ',' << row.tally.fn << ',' << ratio_cell(scores.precision) << ','
                << ratio_cell(scores.recall) << '\n';
        }
    }
}

}  // namespace stepcorr
