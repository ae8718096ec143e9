#include "hetnet/neighbors.hpp"

#include <algorithm>
#include <cmath>

namespace hetnet {

NeighborStrategy parse_neighbor_strategy(std::string_view name) {
    if (name == "distance") return NeighborStrategy::distance;
    if (name == "channel") return NeighborStrategy::channel;
    if (name == "rate") return NeighborStrategy::rate;
    throw Error("unknown neighbor strategy '" + std::string(name) + "' (expected distance, channel or rate)");
}

std::string to_string(NeighborStrategy s) {
    switch (s) {
    case NeighborStrategy::distance: return "distance";
    case NeighborStrategy::channel: return "channel";
    case NeighborStrategy::rate: return "rate";
    }
    return "?";
}

double mean_amplitude_gain(NodeId frontier, NodeId candidate, const Topology& topo) {
    const int m = topo.resources.num_technologies();
    double sum = 0.0;
    for (int t = 0; t < m; ++t) sum += std::sqrt(topo.gain(t, frontier, candidate));
    return sum / m;
}

double mean_first_subband_rate(NodeId frontier, NodeId candidate, const RouteState& state) {
    const auto& topo = state.topology();
    const int m = topo.resources.num_technologies();
    double sum = 0.0;
    for (int t = 0; t < m; ++t) {
        const CommResource first{t, 0};
        sum += link_rate(frontier, candidate, first, state.transmitters_on(first), topo);
    }
    return sum / m;
}

namespace {

struct Scored {
    double score; // ranked descending
    NodeId node;
};

NeighborSet top_k(std::vector<Scored> scored, int capacity, NeighborStrategy strategy) {
    if (capacity < 1) throw Error("neighbor capacity must be >= 1");
    const auto k = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(capacity));
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const Scored& a, const Scored& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.node < b.node;
                      });
    NeighborSet out;
    out.capacity = capacity;
    out.strategy = strategy;
    for (std::size_t i = 0; i < k; ++i) out.nodes.push_back(scored[i].node);
    return out;
}

} // namespace

NeighborSet select_distance(NodeId frontier, std::span<const NodeId> candidates, const Topology& topo, int capacity) {
    std::vector<Scored> scored;
    for (NodeId c : candidates) scored.push_back({-topo.distance(frontier, c), c});
    return top_k(std::move(scored), capacity, NeighborStrategy::distance);
}

NeighborSet select_channel(NodeId frontier, std::span<const NodeId> candidates, const Topology& topo, int capacity) {
    std::vector<Scored> scored;
    for (NodeId c : candidates) scored.push_back({mean_amplitude_gain(frontier, c, topo), c});
    return top_k(std::move(scored), capacity, NeighborStrategy::channel);
}

NeighborSet select_rate(NodeId frontier, std::span<const NodeId> candidates, const RouteState& state, int capacity) {
    std::vector<Scored> scored;
    for (NodeId c : candidates) scored.push_back({mean_first_subband_rate(frontier, c, state), c});
    return top_k(std::move(scored), capacity, NeighborStrategy::rate);
}

NeighborSet select_neighbors(NeighborStrategy strategy, const RouteState& state, int capacity) {
    const auto candidates = state.candidates();
    switch (strategy) {
    case NeighborStrategy::distance: return select_distance(state.frontier(), candidates, state.topology(), capacity);
    case NeighborStrategy::channel: return select_channel(state.frontier(), candidates, state.topology(), capacity);
    case NeighborStrategy::rate: return select_rate(state.frontier(), candidates, state, capacity);
    }
    throw Error("unknown neighbor strategy");
}

} // namespace hetnet
