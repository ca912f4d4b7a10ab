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
#include "support.hpp"

#include <stepcorr/correlation_graph.hpp>
#include <stepcorr/error.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace stepcorr;
using namespace stepcorr::testing;

namespace {

CorrelationGraph feed(const std::vector<EventSet>& trace, std::size_t n = 0) {
    CorrelationGraph g(n);
    for (const auto& s : trace) g.observe(s);
    return g;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(CorrelationGraph, WorkedExample) {
    // A B A B A: A occurs 3 times, 2 of them followed by B.
    const EventSet A{1}, B{2, 3};
    auto g = feed({A, B, A, B, A});
    EXPECT_EQ(g.steps(), 5u);
    EXPECT_DOUBLE_EQ(g.prior(A), 0.6);
    EXPECT_DOUBLE_EQ(g.prior(B), 0.4);
    EXPECT_DOUBLE_EQ(g.prior(EventSet{}), 0.0);
    EXPECT_DOUBLE_EQ(*g.conditional(A, B), 1.0);
    EXPECT_DOUBLE_EQ(*g.conditional(B, A), 1.0);
    EXPECT_DOUBLE_EQ(*g.conditional(A, A), 0.0);
    EXPECT_EQ(g.node_count(A), 3u);
    EXPECT_EQ(g.edge_count(A, B), 2u);
    EXPECT_EQ(*g.current_state(), A);
}

TEST(CorrelationGraph, UndefinedIsNotZero) {
    const EventSet A{1}, B{2};
    auto g = feed({A, A, B});
    // B has only ever been the last state: no successor yet.
    EXPECT_FALSE(g.conditional(B, A).has_value());
    // Never observed at all.
    EXPECT_FALSE(g.conditional(EventSet{7}, A).has_value());
    EXPECT_TRUE(g.conditional(A, B).has_value());
}

TEST(CorrelationGraph, ColdStartErrors) {
    CorrelationGraph g;
    EXPECT_EQ(code_of([&] { g.prior(EventSet{}); }), ErrorCode::UndefinedModel);
    g.observe(EventSet{1});
    EXPECT_NO_THROW(g.prior(EventSet{1}));
    EXPECT_EQ(code_of([&] { g.conditional(EventSet{1}, EventSet{1}); }), ErrorCode::UndefinedModel);
    EXPECT_EQ(code_of([&] { g.predict_next(); }), ErrorCode::UndefinedModel);
    EXPECT_FALSE(g.recommend().has_value());
}

TEST(CorrelationGraph, FromCurrentUndefinedWhenCurrentIsNew) {
    auto g = feed({EventSet{1}, EventSet{2}, EventSet{3}});
    EXPECT_EQ(code_of([&] { g.predict_next(ForecastMode::FromCurrent); }), ErrorCode::UndefinedConditional);
    EXPECT_FALSE(g.recommend(ForecastMode::FromCurrent).has_value());
    EXPECT_TRUE(g.recommend(ForecastMode::Marginal).has_value());
}

TEST(CorrelationGraph, RejectsTypesAboveN) {
    CorrelationGraph g(3);
    EXPECT_THROW(g.observe(EventSet{4}), Error);
    EXPECT_EQ(g.steps(), 0u);
}

TEST(CorrelationGraph, NormalizationHoldsAfterEveryStep) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto trace = random_trace(rng, 5, 120, 10);
        CorrelationGraph g;
        for (std::size_t t = 0; t < trace.size(); ++t) {
            g.observe(trace[t]);
            double prior_sum = 0.0;
            for (const auto& [s, node] : g.nodes()) prior_sum += g.prior(s);
            ASSERT_NEAR(prior_sum, 1.0, 1e-9);
            if (g.steps() < 2) continue;
            for (const auto& [from, node] : g.nodes()) {
                if (node.outgoing == 0) continue;
                double row = 0.0;
                for (const auto& [to, c] : node.successors) row += *g.conditional(from, to);
                ASSERT_NEAR(row, 1.0, 1e-9);
            }
        }
    }
}

TEST(CorrelationGraph, CountsMatchBruteForceRecount) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto trace = random_trace(rng, 4, 80, 6);
        CorrelationGraph g;
        for (std::size_t t = 1; t <= trace.size(); ++t) {
            g.observe(trace[t - 1]);
            const auto r = recount(trace, t);
            for (const auto& [s, c] : r.occurrences) ASSERT_EQ(g.node_count(s), c);
            for (const auto& [pair, c] : r.transitions) ASSERT_EQ(g.edge_count(pair.first, pair.second), c);
            for (const auto& [s, node] : g.nodes()) {
                const auto it = r.with_successor.find(s);
                ASSERT_EQ(node.outgoing, it == r.with_successor.end() ? 0u : it->second);
            }
        }
    }
}

TEST(CorrelationGraph, ForecastsMatchDenseMatrixOracle) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const auto trace = markov_trace(rng, 4, 150, 8);
        const auto g = feed(trace);
        const auto m = dense_model(trace, trace.size());
        const auto marginal = dense_marginal(m);
        const auto forecast = g.predict_next(ForecastMode::Marginal);
        for (std::size_t j = 0; j < m.states.size(); ++j) {
            ASSERT_NEAR(forecast.distribution.probability(m.states[j]), marginal[j], 1e-12);
        }
        // Event-set marginals sum over supersets.
        for (const auto& target : {EventSet{1}, EventSet{2, 3}, EventSet{}}) {
            double expected = 0.0;
            for (std::size_t j = 0; j < m.states.size(); ++j) {
                if (m.states[j].is_superset_of(target)) expected += marginal[j];
            }
            ASSERT_NEAR(g.predict_event_set(target), expected, 1e-12);
        }
        for (std::uint64_t steps = 1; steps <= 4; ++steps) {
            const auto Pn = matpow(m.P, steps);
            for (std::size_t i = 0; i < m.states.size(); ++i) {
                const auto got = g.nstep_transition(m.states[i], m.states[(i + 1) % m.states.size()], steps);
                double row = 0.0;
                for (double p : m.P[i]) row += p;
                if (row == 0.0) {
                    ASSERT_FALSE(got.has_value());
                } else {
                    ASSERT_NEAR(*got, Pn[i][(i + 1) % m.states.size()], 1e-12);
                }
            }
        }
    }
}

TEST(CorrelationGraph, MarginalReportsLeakedMass) {
    const EventSet A{1}, B{2};
    auto g = feed({A, A, A, B});
    const auto f = g.predict_next(ForecastMode::Marginal);
    EXPECT_DOUBLE_EQ(f.unnormalized_mass, 0.75);
    EXPECT_NEAR(f.distribution.total(), 1.0, 1e-12);
}

TEST(CorrelationGraph, RecommendBreaksTiesTowardSmallestState) {
    const EventSet A{1}, B{2}, C{1, 2};
    // From A: once to C, once to B. {1,2} < {2} lexicographically.
    auto g = feed({A, C, A, B, A});
    EXPECT_EQ(*g.recommend(ForecastMode::FromCurrent), C);
}

TEST(CorrelationGraph, NStepLeaksThroughUndefinedRows) {
    const EventSet A{1}, B{2}, C{3};
    // A -> B always; B -> C once; C never left.
    auto g = feed({A, B, A, B, C});
    EXPECT_DOUBLE_EQ(*g.nstep_transition(A, B, 1), 1.0);
    EXPECT_DOUBLE_EQ(*g.nstep_transition(A, C, 2), 0.5);
    EXPECT_DOUBLE_EQ(*g.nstep_transition(A, A, 2), 0.5);
    // After C the mass is gone.
    EXPECT_DOUBLE_EQ(*g.nstep_transition(A, C, 3), 0.0);
    EXPECT_FALSE(g.nstep_transition(C, A, 1).has_value());
    EXPECT_DOUBLE_EQ(*g.nstep_transition(A, EventSet{9}, 2), 0.0);
    EXPECT_THROW(g.nstep_transition(A, B, 0), Error);
}

TEST(CorrelationGraph, ScalingCountsLeavesProbabilitiesUnchanged) {
    const EventSet A{1}, B{2};
    auto g = feed({A, B, B, A, B});
    auto doc = g.to_json();
    for (auto& node : doc["nodes"]) node[1] = node[1].get<std::uint64_t>() * 3;
    for (auto& edge : doc["edges"]) edge[2] = edge[2].get<std::uint64_t>() * 3;
    doc["t"] = doc["t"].get<std::uint64_t>() * 3;
    // Scaled documents have more transitions than t - 1; still self-consistent per node.
    const auto scaled = CorrelationGraph::from_json(doc);
    EXPECT_DOUBLE_EQ(*scaled.conditional(A, B), *g.conditional(A, B));
    EXPECT_DOUBLE_EQ(*scaled.conditional(B, B), *g.conditional(B, B));
    EXPECT_DOUBLE_EQ(scaled.prior(B), g.prior(B));
}

TEST(CorrelationGraph, PredictionsDependOnlyOnCounts) {
    // Different orderings with the same node counts, edge counts and last state.
    const EventSet A{1}, B{2}, C{3};
    const auto g1 = feed({A, B, A, C, A});
    const auto g2 = feed({A, C, A, B, A});
    EXPECT_EQ(g1.to_json(), g2.to_json());
    for (auto mode : {ForecastMode::Marginal, ForecastMode::FromCurrent}) {
        EXPECT_EQ(g1.predict_next(mode).distribution.probs, g2.predict_next(mode).distribution.probs);
        EXPECT_EQ(g1.recommend(mode), g2.recommend(mode));
    }
    EXPECT_EQ(g1.nstep_transition(A, A, 3), g2.nstep_transition(A, A, 3));
}

TEST(CorrelationGraph, NStepComposes) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 20; ++round) {
        const auto trace = random_trace(rng, 4, 80, 7);
        const auto g = feed(trace);
        const auto snap = g.snapshot();
        const auto& states = snap.states();
        for (const auto& u : states) {
            if (!g.nstep_transition(u, u, 1)) continue;
            for (const auto& v : states) {
                for (std::uint64_t a = 1; a <= 2; ++a) {
                    for (std::uint64_t b = 1; b <= 2; ++b) {
                        double sum = 0.0;
                        for (const auto& k : states) {
                            const auto left = *g.nstep_transition(u, k, a);
                            // Mass parked on an undefined row leaks away.
                            const auto right = g.nstep_transition(k, v, b);
                            if (right) sum += left * *right;
                        }
                        EXPECT_NEAR(*g.nstep_transition(u, v, a + b), sum, 1e-9);
                    }
                }
            }
            EXPECT_EQ(*g.nstep_transition(u, states.front(), 1),
                      g.conditional(u, states.front()).value_or(0.0));
        }
    }
}

TEST(CorrelationGraph, JsonRoundTripPreservesEverything) {
    std::mt19937_64 rng(3);
    const auto trace = random_trace(rng, 6, 60, 9);
    const auto g = feed(trace, 6);
    const auto back = CorrelationGraph::from_json(nlohmann::json::parse(g.to_json().dump()));
    EXPECT_EQ(back.to_json(), g.to_json());
    EXPECT_EQ(back.n(), 6u);
    EXPECT_EQ(*back.current_state(), trace.back());
    // Updating continues exactly as if never serialized.
    auto a = g;
    auto b = back;
    a.observe(trace.front());
    b.observe(trace.front());
    EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(CorrelationGraph, FromJsonRejectsInconsistentDocuments) {
    auto g = feed({EventSet{1}, EventSet{2}, EventSet{1}});
    auto doc = g.to_json();

    auto bad_total = doc;
    bad_total["t"] = 5;
    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(bad_total); }), ErrorCode::Parse);

    auto dangling = doc;
    dangling["edges"].push_back({{9}, {1}, 1});
    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(dangling); }), ErrorCode::Parse);

    auto too_many = doc;
    too_many["edges"].push_back({{2}, {2}, 5});
    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(too_many); }), ErrorCode::Parse);

    auto bad_member = doc;
    bad_member["nodes"][0][0] = nlohmann::json::array({0});
    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(bad_member); }), ErrorCode::Parse);

    auto bad_prev = doc;
    bad_prev["prev_state"] = nlohmann::json::array({3});
    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(bad_prev); }), ErrorCode::Parse);

    EXPECT_EQ(code_of([&] { CorrelationGraph::from_json(nlohmann::json::array()); }), ErrorCode::Parse);
}

TEST(TransitionSnapshot, RowsAreStochasticOrEmpty) {
    std::mt19937_64 rng(8);
    const auto g = feed(random_trace(rng, 3, 40, 5));
    const auto snap = g.snapshot();
    for (std::size_t i = 0; i < snap.states().size(); ++i) {
        const auto row = snap.propagate(i, 1);
        double sum = 0.0;
        for (double p : row) sum += p;
        if (snap.row_defined(i)) {
            EXPECT_NEAR(sum, 1.0, 1e-12);
        } else {
            EXPECT_EQ(sum, 0.0);
        }
    }
}
