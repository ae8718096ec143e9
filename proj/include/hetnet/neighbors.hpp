#pragma once

#include "hetnet/routing.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet {

enum class NeighborStrategy { distance, channel, rate };

NeighborStrategy parse_neighbor_strategy(std::string_view name);
std::string to_string(NeighborStrategy s);

/// Up to `capacity` ranked candidate next hops. Slots past nodes.size() are
/// padding.
struct NeighborSet {
    std::vector<NodeId> nodes;
    int capacity = 0;
    NeighborStrategy strategy = NeighborStrategy::distance;

    int size() const { return static_cast<int>(nodes.size()); }
    bool empty() const { return nodes.empty(); }
    bool is_valid_slot(int slot) const { return slot >= 0 && slot < size(); }
};

// Ranking metrics. Larger is better for channel and rate.
double mean_amplitude_gain(NodeId frontier, NodeId candidate, const Topology& topo);
double mean_first_subband_rate(NodeId frontier, NodeId candidate, const RouteState& state);

NeighborSet select_distance(NodeId frontier, std::span<const NodeId> candidates, const Topology& topo, int capacity);
NeighborSet select_channel(NodeId frontier, std::span<const NodeId> candidates, const Topology& topo, int capacity);
/// Interference from the hops already in `state` is included.
NeighborSet select_rate(NodeId frontier, std::span<const NodeId> candidates, const RouteState& state, int capacity);

/// Neighbors of the state's frontier among its unvisited active nodes.
NeighborSet select_neighbors(NeighborStrategy strategy, const RouteState& state, int capacity);

} // namespace hetnet
