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

// Reference implementations the tests compare against. Everything here is
// deliberately naive: recount from the raw trace, build dense matrices,
// recompute statistics in batch.

#include <stepcorr/correlation_graph.hpp>
#include <stepcorr/event_set.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace stepcorr::testing {

/// Random event trace over n types. Draws from a small pool of states so that
/// states recur and transitions carry weight.
inline std::vector<EventSet> random_trace(std::mt19937_64& rng, std::size_t n, std::size_t length,
                                          std::size_t pool_size) {
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<EventSet> pool;
    for (std::size_t i = 0; i < pool_size; ++i) {
        std::vector<EventTypeIndex> members;
        for (std::size_t s = 1; s <= n; ++s) {
            if (bit(rng)) members.push_back(static_cast<EventTypeIndex>(s));
        }
        pool.push_back(EventSet::from_members(members));
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<EventSet> trace;
    for (std::size_t t = 0; t < length; ++t) trace.push_back(pool[pick(rng)]);
    return trace;
}

/// Trace from a random first-order chain: each pool state gets a skewed
/// successor distribution, so the process has learnable structure.
inline std::vector<EventSet> markov_trace(std::mt19937_64& rng, std::size_t n, std::size_t length,
                                          std::size_t pool_size) {
    auto pool = random_trace(rng, n, pool_size, pool_size);
    std::vector<std::discrete_distribution<std::size_t>> rows;
    std::gamma_distribution<double> weight(0.3, 1.0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::vector<double> w(pool.size());
        for (auto& x : w) x = weight(rng) + 1e-6;
        rows.emplace_back(w.begin(), w.end());
    }
    std::vector<EventSet> trace;
    std::size_t at = 0;
    for (std::size_t t = 0; t < length; ++t) {
        trace.push_back(pool[at]);
        at = rows[at](rng);
    }
    return trace;
}

struct Recount {
    std::map<EventSet, std::uint64_t> occurrences;
    std::map<std::pair<EventSet, EventSet>, std::uint64_t> transitions;
    std::map<EventSet, std::uint64_t> with_successor;
};

/// Counts over the first `steps` entries of `trace`, from scratch.
inline Recount recount(const std::vector<EventSet>& trace, std::size_t steps) {
    Recount r;
    for (std::size_t i = 0; i < steps; ++i) {
        ++r.occurrences[trace[i]];
        if (i + 1 < steps) {
            ++r.transitions[{trace[i], trace[i + 1]}];
            ++r.with_successor[trace[i]];
        }
    }
    return r;
}

/// Dense transition matrix over the observed states, in canonical order.
struct DenseModel {
    std::vector<EventSet> states;
    std::vector<std::vector<double>> P;  // row-stochastic where defined, zero rows otherwise
    std::vector<double> prior;
    std::size_t current = 0;

    std::size_t index(const EventSet& s) const {
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (states[i] == s) return i;
        }
        return states.size();
    }
};

inline DenseModel dense_model(const std::vector<EventSet>& trace, std::size_t steps) {
    const auto r = recount(trace, steps);
    DenseModel m;
    for (const auto& [s, c] : r.occurrences) m.states.push_back(s);
    const std::size_t k = m.states.size();
    m.P.assign(k, std::vector<double>(k, 0.0));
    m.prior.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        m.prior[i] = static_cast<double>(r.occurrences.at(m.states[i])) / static_cast<double>(steps);
        auto out = r.with_successor.find(m.states[i]);
        if (out == r.with_successor.end()) continue;
        for (std::size_t j = 0; j < k; ++j) {
            auto e = r.transitions.find({m.states[i], m.states[j]});
            if (e != r.transitions.end()) m.P[i][j] = static_cast<double>(e->second) / static_cast<double>(out->second);
        }
    }
    m.current = m.index(trace[steps - 1]);
    return m;
}

inline std::vector<std::vector<double>> matmul(const std::vector<std::vector<double>>& a,
                                               const std::vector<std::vector<double>>& b) {
    const std::size_t k = a.size();
    std::vector<std::vector<double>> c(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < k; ++j) c[i][j] += a[i][l] * b[l][j];
    return c;
}

inline std::vector<std::vector<double>> matpow(const std::vector<std::vector<double>>& P, std::uint64_t n) {
    auto out = P;
    for (std::uint64_t i = 1; i < n; ++i) out = matmul(out, P);
    return out;
}

/// Marginal next-step forecast: prior-weighted rows, undefined rows dropped,
/// then renormalized.
inline std::vector<double> dense_marginal(const DenseModel& m) {
    const std::size_t k = m.states.size();
    std::vector<double> out(k, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double row = 0.0;
        for (double p : m.P[i]) row += p;
        if (row == 0.0) continue;
        mass += m.prior[i];
        for (std::size_t j = 0; j < k; ++j) out[j] += m.prior[i] * m.P[i][j];
    }
    for (auto& p : out) p /= mass;
    return out;
}

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace stepcorr::testing
