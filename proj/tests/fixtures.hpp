#pragma once

#include "hetnet/channel.hpp"
#include "hetnet/netmodel.hpp"

#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

namespace hetnet::testing {

/// Topology with hand-specified gains; every pool node is active.
inline Topology make_topology(std::vector<Vec3> positions, std::vector<Technology> techs,
                              const std::function<double(int, NodeId, NodeId)>& gain, NodeId source,
                              NodeId destination, RadioParams radio = {}) {
    Topology topo;
    const int n = static_cast<int>(positions.size());
    topo.positions = std::move(positions);
    topo.active_nodes.resize(static_cast<std::size_t>(n));
    std::iota(topo.active_nodes.begin(), topo.active_nodes.end(), 0);
    topo.source = source;
    topo.destination = destination;
    topo.resources = ResourceSet(std::move(techs));
    auto table = std::make_shared<ChannelTable>(n, topo.resources.num_technologies());
    for (int t = 0; t < topo.resources.num_technologies(); ++t)
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) table->set_gain(t, a, b, gain(t, a, b));
    topo.channels = table;
    topo.radio = radio;
    topo.validate();
    return topo;
}

/// Nodes on a line along x, `spacing` meters apart.
inline std::vector<Vec3> line_positions(int n, double spacing = 10.0) {
    std::vector<Vec3> p;
    for (int i = 0; i < n; ++i) p.emplace_back(spacing * i, 0.0, 0.0);
    return p;
}

/// Random positions in a 250 x 250 x 10 box with synthetic gains; node 0 is
/// the source and node n-1 the destination.
inline Topology random_topology(std::mt19937_64& rng, int n, std::vector<Technology> techs, bool fading = true,
                                RadioParams radio = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Topology topo;
    for (int i = 0; i < n; ++i) topo.positions.emplace_back(250.0 * u(rng), 250.0 * u(rng), 10.0 * u(rng));
    topo.active_nodes.resize(static_cast<std::size_t>(n));
    std::iota(topo.active_nodes.begin(), topo.active_nodes.end(), 0);
    topo.source = 0;
    topo.destination = n - 1;
    topo.resources = ResourceSet(std::move(techs));
    SyntheticChannelParams params;
    params.fading = fading;
    topo.channel_seed = rng();
    topo.channels = std::make_shared<const ChannelTable>(
        synthesize_channel_table(topo.positions, topo.resources, topo.channel_seed, params));
    topo.radio = radio;
    topo.validate();
    return topo;
}

inline std::vector<Technology> techs(std::initializer_list<std::pair<double, int>> spec) {
    std::vector<Technology> out;
    int id = 0;
    for (auto [fc, b] : spec) out.push_back(Technology::from_center_frequency(id++, fc, b));
    return out;
}

} // namespace hetnet::testing
