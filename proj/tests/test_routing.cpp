#include "fixtures.hpp"

#include "hetnet/routing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace hetnet;
using hetnet::testing::random_topology;
using hetnet::testing::techs;

namespace {

Topology sized_topology(std::uint64_t seed, int n = 10) {
    std::mt19937_64 rng(seed);
    return random_topology(rng, n, techs({{400e6, 5}, {900e6, 5}, {2.4e9, 5}}));
}

} // namespace

TEST(LegalResources, ExcludesOnlyThePreviousHopResource) {
    const auto topo = sized_topology(1);
    RouteState state(topo);
    EXPECT_EQ(legal_resources(state).size(), 15u);
    state.apply({3, {1, 2}});
    const auto legal = legal_resources(state);
    EXPECT_EQ(legal.size(), 14u);
    EXPECT_EQ(std::count(legal.begin(), legal.end(), CommResource{1, 2}), 0);
}

TEST(LegalResources, EmptyWithSingleResourceAfterFirstHop) {
    std::mt19937_64 rng(2);
    const auto topo = random_topology(rng, 4, techs({{400e6, 1}}));
    RouteState state(topo);
    EXPECT_EQ(legal_resources(state).size(), 1u);
    state.apply({1, {0, 0}});
    EXPECT_TRUE(legal_resources(state).empty());
    const auto result = run_episode(topo, [](const RouteState& s) -> std::optional<Decision> {
        return Decision{s.hops() == 0 ? 1 : 3, {0, 0}};
    });
    EXPECT_EQ(result.status, RouteStatus::failed);
    EXPECT_EQ(result.rate, 0.0);
}

TEST(RouteState, DeliversOnReachingDestination) {
    const auto topo = sized_topology(3);
    RouteState state(topo);
    state.apply({4, {0, 0}});
    state.apply({topo.destination, {2, 1}});
    EXPECT_EQ(state.status(), RouteStatus::delivered);
    EXPECT_EQ(state.route().nodes, (std::vector<NodeId>{0, 4, topo.destination}));
    EXPECT_THROW(state.apply({5, {0, 0}}), ConstraintViolation);
}

TEST(RouteState, RejectsRevisitAndRepeatedResource) {
    const auto topo = sized_topology(4);
    RouteState state(topo);
    state.apply({2, {0, 0}});
    EXPECT_THROW(state.apply({0, {1, 0}}), ConstraintViolation);
    EXPECT_THROW(state.apply({2, {1, 0}}), ConstraintViolation);
    EXPECT_THROW(state.apply({3, {0, 0}}), ConstraintViolation);
    EXPECT_THROW(state.apply({3, {0, 7}}), ConstraintViolation);
    EXPECT_EQ(state.hops(), 1);
}

TEST(RouteState, FailsWhenHopBudgetRunsOut) {
    const auto topo = sized_topology(5);
    RouteState state(topo, 2);
    state.apply({1, {0, 0}});
    state.apply({2, {0, 1}});
    EXPECT_EQ(state.status(), RouteStatus::failed);
}

TEST(RouteState, InactiveNodesAreNotCandidates) {
    auto topo = sized_topology(6);
    topo.active_nodes = {0, 2, 5, 9};
    RouteState state(topo);
    EXPECT_EQ(state.candidates(), (std::vector<NodeId>{2, 5, 9}));
    EXPECT_THROW(state.apply({1, {0, 0}}), ConstraintViolation);
}

TEST(RunEpisode, NoActionFailsTheEpisode) {
    const auto topo = sized_topology(7);
    const auto result = run_episode(topo, [](const RouteState&) { return std::optional<Decision>{}; });
    EXPECT_EQ(result.status, RouteStatus::failed);
    EXPECT_TRUE(result.trace.empty());
}

TEST(RunEpisode, PolicyErrorsNameTheHop) {
    const auto topo = sized_topology(8);
    try {
        run_episode(topo, [](const RouteState& s) -> std::optional<Decision> {
            if (s.hops() == 1) throw std::runtime_error("boom");
            return Decision{1, {0, 0}};
        });
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("hop 1"), std::string::npos);
    }
}

TEST(RunEpisode, RandomLegalPoliciesKeepInvariants) {
    std::mt19937_64 rng(11);
    int steps = 0;
    for (int episode = 0; episode < 2000; ++episode) {
        const auto topo = sized_topology(rng(), 3 + static_cast<int>(rng() % 8));
        auto policy = [&](const RouteState& s) -> std::optional<Decision> {
            const auto cands = s.candidates();
            const auto legal = legal_resources(s);
            ++steps;
            return Decision{cands[rng() % cands.size()], legal[rng() % legal.size()]};
        };
        const auto result = run_episode(topo, policy);
        ASSERT_NE(result.status, RouteStatus::building);
        const auto& route = result.route;
        ASSERT_EQ(route.nodes.size(), route.resources.size() + 1);
        std::vector<NodeId> sorted = route.nodes;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
        for (std::size_t i = 1; i < route.resources.size(); ++i) EXPECT_NE(route.resources[i], route.resources[i - 1]);
        if (result.delivered()) {
            EXPECT_NO_THROW(validate_route(route, topo));
            EXPECT_GT(result.rate, 0.0);
            EXPECT_EQ(result.rate, end_to_end_rate(route, topo));
        }
    }
    EXPECT_GT(steps, 2000);
}

TEST(RouteState, TransmittersTrackHopsPerResource) {
    const auto topo = sized_topology(9);
    RouteState state(topo);
    state.apply({3, {0, 0}});
    state.apply({5, {1, 0}});
    state.apply({6, {0, 0}});
    const auto on00 = state.transmitters_on({0, 0});
    EXPECT_EQ(std::vector<NodeId>(on00.begin(), on00.end()), (std::vector<NodeId>{0, 5}));
    const auto on10 = state.transmitters_on({1, 0});
    EXPECT_EQ(std::vector<NodeId>(on10.begin(), on10.end()), (std::vector<NodeId>{3}));
    EXPECT_TRUE(state.transmitters_on({2, 4}).empty());
}
