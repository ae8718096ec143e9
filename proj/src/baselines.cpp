#include "hetnet/baselines.hpp"

#include "hetnet/agent.hpp"
#include "hetnet/neighbors.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace hetnet {

PolicyKind parse_policy(std::string_view name) {
    for (PolicyKind p : all_policies())
        if (to_string(p) == name) return p;
    throw Error("unknown policy '" + std::string(name) +
                "' (expected dqn, strongest, direction, closest, least_interf, max_rate, direct or widest)");
}

std::string to_string(PolicyKind p) {
    switch (p) {
    case PolicyKind::dqn: return "dqn";
    case PolicyKind::strongest: return "strongest";
    case PolicyKind::direction: return "direction";
    case PolicyKind::closest: return "closest";
    case PolicyKind::least_interf: return "least_interf";
    case PolicyKind::max_rate: return "max_rate";
    case PolicyKind::direct: return "direct";
    case PolicyKind::widest: return "widest";
    }
    return "?";
}

const std::vector<PolicyKind>& all_policies() {
    static const std::vector<PolicyKind> kinds{PolicyKind::dqn,          PolicyKind::strongest, PolicyKind::direction,
                                               PolicyKind::closest,      PolicyKind::least_interf,
                                               PolicyKind::max_rate,     PolicyKind::direct,    PolicyKind::widest};
    return kinds;
}

const std::vector<PolicyKind>& greedy_policies() {
    static const std::vector<PolicyKind> kinds{PolicyKind::strongest,    PolicyKind::direction, PolicyKind::closest,
                                               PolicyKind::least_interf, PolicyKind::max_rate,  PolicyKind::direct};
    return kinds;
}

namespace {

double hop_rate(const RouteState& state, NodeId from, NodeId to, const CommResource& r) {
    return link_rate(from, to, r, state.transmitters_on(r), state.topology());
}

// Candidate minimizing `cost`, lowest id on ties, then its best resource.
template <typename Cost>
std::optional<Decision> pick_node(const RouteState& state, Cost cost) {
    std::optional<NodeId> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (NodeId n : state.candidates()) {
        const double c = cost(n);
        if (!best || c < best_cost) {
            best = n;
            best_cost = c;
        }
    }
    if (!best) return std::nullopt;
    auto r = best_resource(state, *best);
    if (!r) return std::nullopt;
    return Decision{*best, *r};
}

} // namespace

std::optional<CommResource> best_resource(const RouteState& state, NodeId next) {
    std::optional<CommResource> best;
    double best_rate = -1.0;
    for (const auto& r : legal_resources(state)) {
        const double rate = hop_rate(state, state.frontier(), next, r);
        if (rate > best_rate) {
            best_rate = rate;
            best = r;
        }
    }
    return best;
}

std::optional<Decision> strongest_neighbor(const RouteState& state) {
    return pick_node(state, [&](NodeId n) { return -mean_amplitude_gain(state.frontier(), n, state.topology()); });
}

std::optional<Decision> best_direction(const RouteState& state) {
    return pick_node(state, [&](NodeId n) { return bearing_offset(state.topology(), state.frontier(), n); });
}

std::optional<Decision> closest_to_destination(const RouteState& state) {
    const auto& topo = state.topology();
    return pick_node(state, [&](NodeId n) { return topo.distance(n, topo.destination); });
}

std::optional<Decision> least_interfered(const RouteState& state) {
    const auto& topo = state.topology();
    std::optional<Decision> best;
    double best_interference = 0.0;
    double best_rate = 0.0;
    for (const auto& r : legal_resources(state)) {
        for (NodeId n : state.candidates()) {
            const double interference = interference_power(n, r, state.transmitters_on(r), topo);
            const double rate = hop_rate(state, state.frontier(), n, r);
            if (!best || interference < best_interference ||
                (interference == best_interference && rate > best_rate)) {
                best = Decision{n, r};
                best_interference = interference;
                best_rate = rate;
            }
        }
    }
    return best;
}

std::optional<Decision> largest_data_rate(const RouteState& state) {
    std::optional<Decision> best;
    double best_rate = -1.0;
    for (const auto& r : legal_resources(state)) {
        for (NodeId n : state.candidates()) {
            const double rate = hop_rate(state, state.frontier(), n, r);
            if (rate > best_rate) {
                best = Decision{n, r};
                best_rate = rate;
            }
        }
    }
    return best;
}

std::optional<Decision> destination_directly(const RouteState& state) {
    const NodeId dst = state.topology().destination;
    if (state.is_visited(dst)) return std::nullopt;
    auto r = best_resource(state, dst);
    if (!r) return std::nullopt;
    return Decision{dst, *r};
}

LinkGraph build_link_graph(const RouteState& state) {
    const auto& topo = state.topology();
    LinkGraph g;
    g.nodes.push_back(state.frontier());
    for (NodeId n : state.candidates()) g.nodes.push_back(n);
    g.weight = Eigen::MatrixXd::Zero(topo.pool_size(), topo.pool_size());
    const auto all = topo.resources.all();
    const auto frontier_resources = legal_resources(state);
    for (NodeId i : g.nodes) {
        if (i == topo.destination) continue;
        const auto& resources = i == state.frontier() ? frontier_resources : all;
        for (NodeId j : g.nodes) {
            if (j == i || j == state.frontier()) continue;
            double w = 0.0;
            for (const auto& r : resources) w = std::max(w, hop_rate(state, i, j, r));
            g.weight(i, j) = w;
        }
    }
    return g;
}

WidestPath widest_path(const LinkGraph& graph, NodeId src, NodeId dst) {
    const auto n = graph.weight.rows();
    if (src < 0 || dst < 0 || src >= n || dst >= n) throw Error("widest_path: endpoint out of range");
    if (src == dst) throw Error("widest_path: source equals destination");

    // Max-bottleneck label setting.
    std::vector<double> width(static_cast<std::size_t>(n), 0.0);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    width[static_cast<std::size_t>(src)] = std::numeric_limits<double>::infinity();
    for (Eigen::Index iter = 0; iter < n; ++iter) {
        Eigen::Index u = -1;
        for (Eigen::Index v = 0; v < n; ++v)
            if (!done[static_cast<std::size_t>(v)] && width[static_cast<std::size_t>(v)] > 0.0 &&
                (u < 0 || width[static_cast<std::size_t>(v)] > width[static_cast<std::size_t>(u)]))
                u = v;
        if (u < 0) break;
        done[static_cast<std::size_t>(u)] = 1;
        for (Eigen::Index v = 0; v < n; ++v) {
            const double w = graph.weight(u, v);
            if (w > 0.0 && !done[static_cast<std::size_t>(v)])
                width[static_cast<std::size_t>(v)] =
                    std::max(width[static_cast<std::size_t>(v)], std::min(width[static_cast<std::size_t>(u)], w));
        }
    }
    const double bottleneck = width[static_cast<std::size_t>(dst)];
    if (!(bottleneck > 0.0)) throw Error("widest_path: destination unreachable");

    // Among edges at least as wide as the optimum: hop distance to dst, then
    // walk forward choosing the smallest-id successor on a shortest path.
    std::vector<int> hops(static_cast<std::size_t>(n), -1);
    hops[static_cast<std::size_t>(dst)] = 0;
    std::deque<Eigen::Index> queue{dst};
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (Eigen::Index u = 0; u < n; ++u) {
            if (hops[static_cast<std::size_t>(u)] < 0 && graph.weight(u, v) >= bottleneck) {
                hops[static_cast<std::size_t>(u)] = hops[static_cast<std::size_t>(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    WidestPath out{{src}, bottleneck};
    Eigen::Index u = src;
    while (u != dst) {
        Eigen::Index next = -1;
        for (Eigen::Index v = 0; v < n && next < 0; ++v)
            if (graph.weight(u, v) >= bottleneck && hops[static_cast<std::size_t>(v)] == hops[static_cast<std::size_t>(u)] - 1)
                next = v;
        u = next;
        out.path.push_back(static_cast<NodeId>(u));
    }
    return out;
}

std::optional<Decision> widest_path_policy(const RouteState& state) {
    const auto graph = build_link_graph(state);
    WidestPath path;
    try {
        path = widest_path(graph, state.frontier(), state.topology().destination);
    } catch (const Error&) {
        return std::nullopt;
    }
    const NodeId next = path.path[1];
    auto r = best_resource(state, next);
    if (!r) return std::nullopt;
    return Decision{next, *r};
}

Policy make_baseline_policy(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::strongest: return strongest_neighbor;
    case PolicyKind::direction: return best_direction;
    case PolicyKind::closest: return closest_to_destination;
    case PolicyKind::least_interf: return least_interfered;
    case PolicyKind::max_rate: return largest_data_rate;
    case PolicyKind::direct: return destination_directly;
    case PolicyKind::widest: return widest_path_policy;
    case PolicyKind::dqn: break;
    }
    throw Error("dqn is not a baseline policy");
}

} // namespace hetnet
