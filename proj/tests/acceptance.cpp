// Full-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "fixtures.hpp"

#include "hetnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace hetnet;
using hetnet::testing::random_topology;
using hetnet::testing::techs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// ------------------------------------------------------------------ 1

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    int instances = 0, mismatches = 0;
    for (; instances < 240; ++instances) {
        const int n = 2 + instances % 5;
        const auto topo = random_topology(rng, n, techs({{400e6, 3}, {2.4e9, 3}}));
        const auto pruned = exhaustive_optimum(topo, {9, true});
        const auto full = exhaustive_optimum(topo, {9, false});
        if (pruned.rate != full.rate) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 120.0,
            fmt("%.0f instances (2-6 nodes), %.0f mismatches, %.1f s", instances, mismatches, secs)};
}

// ------------------------------------------------------------------ 2

struct BruteWidest {
    const Eigen::MatrixXd& w;
    int dst;
    std::vector<char> on;
    double best = 0.0;

    void dfs(int u, double width) {
        if (u == dst) {
            best = std::max(best, width);
            return;
        }
        for (int v = 0; v < w.rows(); ++v) {
            if (on[static_cast<std::size_t>(v)] || !(w(u, v) > 0.0)) continue;
            on[static_cast<std::size_t>(v)] = 1;
            dfs(v, std::min(width, w(u, v)));
            on[static_cast<std::size_t>(v)] = 0;
        }
    }
};

Outcome widest_path_correctness() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int graphs = 0, mismatches = 0, unreachable = 0;
    for (; graphs < 600; ++graphs) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const double density = 0.2 + 0.7 * u(rng);
        const bool integer_weights = graphs % 2 == 0; // forces ties
        LinkGraph g;
        g.weight = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b && u(rng) < density)
                    g.weight(a, b) = integer_weights ? static_cast<double>(1 + rng() % 5) : 1e6 * u(rng) + 1.0;
        BruteWidest brute{g.weight, n - 1, std::vector<char>(static_cast<std::size_t>(n), 0)};
        brute.on[0] = 1;
        brute.dfs(0, std::numeric_limits<double>::infinity());
        if (brute.best == 0.0) {
            ++unreachable;
            bool threw = false;
            try {
                widest_path(g, 0, n - 1);
            } catch (const Error&) {
                threw = true;
            }
            if (!threw) ++mismatches;
            continue;
        }
        const auto got = widest_path(g, 0, n - 1);
        double realized = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < got.path.size(); ++i)
            realized = std::min(realized, g.weight(got.path[i], got.path[i + 1]));
        if (got.bottleneck != brute.best || realized != brute.best) ++mismatches;
    }
    return {mismatches == 0,
            fmt("%.0f graphs (2-8 nodes, %.0f unreachable), %.0f mismatches", graphs, unreachable, mismatches)};
}

// ------------------------------------------------------------------ 3

Outcome interference_free_optimality() {
    std::mt19937_64 rng(303);
    RadioParams radio;
    radio.intra_flow_interference = false;
    int cases = 0, matches = 0, multi_hop = 0;
    for (; cases < 100; ++cases) {
        const int n = 3 + cases % 6;
        // Eight resources cover the longest loop-free route on eight nodes.
        const auto topo = random_topology(rng, n, techs({{400e6, 4}, {2.4e9, 4}}), true, radio);
        const auto planned = run_episode(topo, widest_path_policy);
        const auto best = exhaustive_optimum(topo, {9, true});
        if (planned.delivered() && planned.rate == best.rate) ++matches;
        if (planned.route.hops() > 1) ++multi_hop;
    }
    return {matches == cases,
            fmt("%.0f/%.0f equal to the exhaustive optimum (%.0f multi-hop routes)", matches, cases, multi_hop)};
}

// ------------------------------------------------------------------ 4

// ReLU on/off state of every hidden unit over the batch.
std::vector<bool> activation_pattern(const nn::QNetwork<double>& net, const nn::Batch<double>& b) {
    nn::ForwardCache<double> cache;
    nn::forward(net, b.states, &cache);
    std::vector<bool> on;
    for (std::size_t l = 1; l < cache.inputs.size(); ++l)
        for (Eigen::Index i = 0; i < cache.inputs[l].size(); ++i) on.push_back(cache.inputs[l].data()[i] > 0.0);
    return on;
}

double batch_loss(const nn::QNetwork<double>& net, const nn::Batch<double>& b) {
    const nn::Matrix<double> q = nn::forward(net, b.states);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        const double e = q(b.actions[static_cast<std::size_t>(i)], i) - b.targets[i];
        loss += e * e;
    }
    return loss / static_cast<double>(b.size());
}

Outcome gradient_fidelity() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int draws = 0, failed = 0;
    long coordinates = 0, straddled = 0;
    for (; draws < 50; ++draws) {
        nn::NetworkShape shape;
        const int neighbors = 1 + static_cast<int>(rng() % 5);
        shape.input = 4 * neighbors;
        shape.actions = neighbors;
        auto width = [&] { return 3 + static_cast<int>(rng() % 10); };
        shape.trunk = {width(), width(), width()};
        shape.head = {width(), width()};
        auto net = nn::QNetwork<double>::initialized(shape, rng());
        nn::Batch<double> batch;
        const int n = 1 + static_cast<int>(rng() % 8);
        batch.states = nn::Matrix<double>::NullaryExpr(shape.input, n, [&] { return u(rng); });
        batch.targets = nn::Vector<double>::NullaryExpr(n, [&] { return 2.0 * u(rng); });
        for (int i = 0; i < n; ++i) batch.actions.push_back(static_cast<int>(rng() % static_cast<unsigned>(neighbors)));

        const auto analytic = nn::loss_and_gradients(net, batch).gradients;
        const double h = 1e-5;
        const auto pattern = activation_pattern(net, batch);
        double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0;
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto check = [&](auto& param, const auto& grad) {
                for (Eigen::Index i = 0; i < param.size(); ++i) {
                    const double saved = param.data()[i];
                    ++coordinates;
                    param.data()[i] = saved + h;
                    const double up = batch_loss(net, batch);
                    const bool kink_up = activation_pattern(net, batch) != pattern;
                    param.data()[i] = saved - h;
                    const double down = batch_loss(net, batch);
                    const bool kink_down = activation_pattern(net, batch) != pattern;
                    param.data()[i] = saved;
                    // A step that flips a ReLU straddles a kink, where the
                    // difference quotient is not a derivative estimate.
                    if (kink_up || kink_down) {
                        ++straddled;
                        continue;
                    }
                    const double numeric = (up - down) / (2.0 * h);
                    diff_sq += (numeric - grad.data()[i]) * (numeric - grad.data()[i]);
                    a_sq += grad.data()[i] * grad.data()[i];
                    n_sq += numeric * numeric;
                }
            };
            check(net.layers()[l].weight, analytic.layers()[l].weight);
            check(net.layers()[l].bias, analytic.layers()[l].bias);
        }
        const double rel = std::sqrt(diff_sq) / std::max(std::sqrt(a_sq) + std::sqrt(n_sq), 1e-300);
        worst = std::max(worst, rel);
        if (!(rel < 1e-4)) ++failed;
    }
    const double straddled_share = static_cast<double>(straddled) / static_cast<double>(coordinates);
    return {failed == 0 && straddled_share <= 0.01,
            fmt("%.0f draws, worst relative error %.2e, %.0f of %.0f coordinates skipped at ReLU kinks", draws, worst,
                static_cast<double>(straddled), static_cast<double>(coordinates))};
}

// ------------------------------------------------------------------ 5, 6

struct TrainedAgent {
    NeighborStrategy strategy;
    EvalReport report;
    double seconds = 0.0;
};

TrainedAgent train_and_evaluate(ExperimentConfig config, NeighborStrategy strategy,
                                const std::vector<Topology>& held_out) {
    config.agent.strategy = strategy;
    const Scenario scenario(config);
    const auto t0 = Clock::now();
    const auto result = train_agent(scenario);
    TrainedAgent out{strategy, evaluate(result.net, held_out, resolved_agent_config(scenario), config.workers),
                     seconds_since(t0)};
    std::cout << "      trained " << to_string(strategy) << " agent: " << config.training.episodes << " episodes in "
              << fmt("%.0f s, mean %.3f Mbit/s, delivered %.3f", out.seconds, out.report.mean_rate / 1e6,
                     out.report.delivery_ratio)
              << std::endl;
    return out;
}

// ------------------------------------------------------------------ 7

Outcome invariant_suites() {
    std::vector<std::string> problems;
    std::mt19937_64 rng(707);

    // Route-constraint fuzzing: every policy, every decision checked before it is applied.
    std::int64_t steps = 0, illegal = 0;
    const auto fuzz_techs = techs({{400e6, 3}, {2.4e9, 3}});
    AgentConfig agent;
    agent.features.arena_diagonal = 350.0;
    const QNet random_net = QNet::initialized(agent.network_shape(), 77);
    std::mt19937_64 explore(78);
    std::vector<std::pair<std::string, Policy>> policies;
    for (PolicyKind k : all_policies())
        if (k != PolicyKind::dqn) policies.emplace_back(to_string(k), make_baseline_policy(k));
    policies.emplace_back("dqn", make_dqn_policy(random_net, agent));
    policies.emplace_back("dqn-explore", [&](const RouteState& s) -> std::optional<Decision> {
        auto c = choose_action(s, random_net, agent, 0.5, explore);
        if (!c) return std::nullopt;
        return c->decision;
    });
    policies.emplace_back("uniform", [&](const RouteState& s) -> std::optional<Decision> {
        const auto cands = s.candidates();
        const auto legal = legal_resources(s);
        return Decision{cands[rng() % cands.size()], legal[rng() % legal.size()]};
    });
    while (steps < 100000) {
        const auto topo = random_topology(rng, 2 + static_cast<int>(rng() % 12), fuzz_techs);
        for (auto& [name, policy] : policies) {
            const auto checked = [&](const RouteState& s) -> std::optional<Decision> {
                auto d = policy(s);
                if (!d) return d;
                ++steps;
                const auto last = s.last_resource();
                if (!s.topology().is_active(d->next_node) || s.is_visited(d->next_node) ||
                    !s.topology().resources.contains(d->resource) || (last && *last == d->resource))
                    ++illegal;
                return d;
            };
            try {
                const auto res = run_episode(topo, checked);
                if (res.delivered()) validate_route(res.route, topo);
            } catch (const ConstraintViolation&) {
                ++illegal;
            }
        }
    }
    if (illegal) problems.push_back(std::to_string(illegal) + " illegal decisions");

    // SINR monotonicity in interferers and in the signal gain.
    std::int64_t sinr_checks = 0, sinr_bad = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 8);
        const auto topo = random_topology(rng, n, fuzz_techs);
        const CommResource r = topo.resources[static_cast<int>(rng() % 6)];
        std::vector<NodeId> interferers;
        double previous = sinr(n - 1, 0, r, interferers, topo);
        for (NodeId k = 1; k < n - 1; ++k) {
            interferers.push_back(k);
            const double s = sinr(n - 1, 0, r, interferers, topo);
            ++sinr_checks;
            if (s > previous) ++sinr_bad;
            previous = s;
        }
        auto stronger = topo;
        auto table = std::make_shared<ChannelTable>(*topo.channels);
        table->set_gain(r.technology, 0, n - 1, 2.0 * topo.gain(r.technology, 0, n - 1));
        stronger.channels = table;
        ++sinr_checks;
        if (!(sinr(n - 1, 0, r, interferers, stronger) > sinr(n - 1, 0, r, interferers, topo))) ++sinr_bad;
    }
    if (sinr_bad) problems.push_back(std::to_string(sinr_bad) + " SINR monotonicity violations");

    // End-to-end rate is the minimum hop rate and never exceeds any hop alone.
    std::int64_t bound_checks = 0, bound_bad = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const auto topo = random_topology(rng, n, fuzz_techs);
        std::vector<NodeId> relays;
        for (NodeId k = 1; k < n - 1; ++k) relays.push_back(k);
        std::shuffle(relays.begin(), relays.end(), rng);
        Route route{{0}, {}};
        const auto len = relays.empty() ? 0 : rng() % (relays.size() + 1);
        route.nodes.insert(route.nodes.end(), relays.begin(), relays.begin() + static_cast<std::ptrdiff_t>(len));
        route.nodes.push_back(n - 1);
        for (int h = 0; h + 1 < static_cast<int>(route.nodes.size()); ++h) {
            CommResource r;
            do r = topo.resources[static_cast<int>(rng() % 6)];
            while (!route.resources.empty() && r == route.resources.back());
            route.resources.push_back(r);
        }
        const auto rates = hop_rates(route, topo);
        const double e2e = end_to_end_rate(route, topo);
        ++bound_checks;
        if (e2e != *std::min_element(rates.begin(), rates.end())) ++bound_bad;
        for (int h = 0; h < route.hops(); ++h)
            if (e2e > link_rate(route.nodes[h], route.nodes[h + 1], route.resources[h], {}, topo)) ++bound_bad;
    }
    if (bound_bad) problems.push_back(std::to_string(bound_bad) + " min-rate bound violations");

    // Determinism under a fixed seed: training log, weights and evaluation.
    ExperimentConfig small;
    small.training.episodes = 400;
    small.training.batch_size = 32;
    small.eval_topologies = 20;
    auto once = [&] {
        const Scenario s(small);
        auto result = train_agent(s);
        const auto rep = evaluate(result.net, s.eval_topologies(small.eval_topologies), resolved_agent_config(s));
        return std::make_tuple(std::move(result), rep);
    };
    const auto [ra, ea] = once();
    const auto [rb, eb] = once();
    bool same = ra.log.size() == rb.log.size() && ea.mean_rate == eb.mean_rate;
    for (std::size_t i = 0; same && i < ra.log.size(); ++i)
        same = ra.log[i].reward == rb.log[i].reward && ra.log[i].loss == rb.log[i].loss;
    for (std::size_t l = 0; same && l < ra.net.layers().size(); ++l)
        same = ra.net.layers()[l].weight == rb.net.layers()[l].weight;
    for (std::size_t i = 0; same && i < ea.episodes.size(); ++i) same = ea.episodes[i].route == eb.episodes[i].route;
    if (!same) problems.push_back("same seed produced different runs");

    std::ostringstream detail;
    detail << steps << " fuzzed decisions, " << sinr_checks << " SINR checks, " << bound_checks
           << " routes bound-checked, seeded rerun identical=" << (same ? "yes" : "no");
    for (const auto& p : problems) detail << "; " << p;
    return {problems.empty(), detail.str()};
}

// Criteria 5 and 6 share one held-out set and one set of trained agents.
void learning_criteria() {
    // Desk-scale learning: one held-out set shared by every policy.
    ExperimentConfig desk;
    desk.workers = 1;
    const Scenario scenario(desk);
    const auto held_out = scenario.eval_topologies(desk.eval_topologies);
    std::cout << "      desk config: " << desk.pool_size << "-node pool, " << desk.technologies.size()
              << " technologies, " << scenario.resources().size() << " resources, " << desk.training.episodes
              << " episodes, " << held_out.size() << " held-out topologies" << std::endl;

    double best_greedy = 0.0;
    std::string best_greedy_name;
    for (PolicyKind k : greedy_policies()) {
        const auto rep = evaluate_policy(make_baseline_policy(k), held_out);
        if (rep.mean_rate > best_greedy) {
            best_greedy = rep.mean_rate;
            best_greedy_name = to_string(k);
        }
    }
    const auto widest = evaluate_policy(widest_path_policy, held_out);
    double oracle_sum = 0.0;
    int feasible = 0;
    std::vector<char> is_feasible;
    for (const auto& topo : held_out) {
        is_feasible.push_back(topo.num_active() <= desk.oracle_max_nodes);
        if (!is_feasible.back()) continue;
        oracle_sum += exhaustive_optimum(topo, {desk.oracle_max_nodes, true}).rate;
        ++feasible;
    }
    const double oracle_mean = feasible ? oracle_sum / feasible : 0.0;
    std::cout << "      best greedy " << best_greedy_name << fmt(" %.3f Mbit/s, widest path %.3f, oracle %.3f", best_greedy / 1e6,
                                                             widest.mean_rate / 1e6, oracle_mean / 1e6)
              << " (" << feasible << " feasible)" << std::endl;

    std::vector<TrainedAgent> agents;
    for (auto s : {NeighborStrategy::rate, NeighborStrategy::channel, NeighborStrategy::distance})
        agents.push_back(train_and_evaluate(desk, s, held_out));
    const auto& rate_agent = agents[0];

    double dqn_feasible = 0.0;
    for (std::size_t i = 0; i < held_out.size(); ++i)
        if (is_feasible[i]) dqn_feasible += rate_agent.report.episodes[i].rate;
    dqn_feasible = feasible ? dqn_feasible / feasible : 0.0;
    const bool beats_greedy = rate_agent.report.mean_rate >= best_greedy;
    const bool near_oracle = feasible > 0 && dqn_feasible >= 0.85 * oracle_mean;
    report(5, "desk-scale learning",
           {beats_greedy && near_oracle,
            fmt("DQN %.3f Mbit/s vs best greedy %.3f; %.1f%% of oracle %.3f on the feasible subset",
                rate_agent.report.mean_rate / 1e6, best_greedy / 1e6, 100.0 * dqn_feasible / oracle_mean,
                oracle_mean / 1e6)});

    const double r = agents[0].report.mean_rate, c = agents[1].report.mean_rate, d = agents[2].report.mean_rate;
    report(6, "neighbor-strategy ordering",
           {r >= c && r >= d && c >= 0.98 * d,
            fmt("rate %.3f, channel %.3f, distance %.3f Mbit/s", r / 1e6, c / 1e6, d / 1e6)});
}

} // namespace

// Optional arguments pick criteria by id; none runs them all.
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

    std::cout << "acceptance: desk-scale criteria, full size" << std::endl;

    if (wanted(1)) report(1, "oracle pruning equivalence", oracle_equivalence());
    if (wanted(2)) report(2, "widest path vs brute force", widest_path_correctness());
    if (wanted(3)) report(3, "interference-free widest-path optimality", interference_free_optimality());
    if (wanted(4)) report(4, "gradient fidelity", gradient_fidelity());
    if (wanted(5) || wanted(6)) learning_criteria();
    if (wanted(7)) report(7, "invariant suites", invariant_suites());

    std::cout << (failures == 0 ? "acceptance: all criteria passed" : "acceptance: criteria failed: " +
                                                                          std::to_string(failures))
              << std::endl;
    return failures == 0 ? 0 : 1;
}
