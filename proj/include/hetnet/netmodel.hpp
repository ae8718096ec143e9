#pragma once

#include "hetnet/channel.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace hetnet {

struct RadioParams {
    double transmit_power = 1.0;  // W, identical at every node
    double noise_density = 1e-17; // W/Hz
    // When false, SINR ignores other transmitters of the flow (SNR only).
    bool intra_flow_interference = true;

    void validate() const;
};

/// One flow's network: the node pool, which of its nodes are active, the
/// endpoints and the channel realization. Node ids index the pool.
struct Topology {
    std::vector<Vec3> positions;
    std::vector<NodeId> active_nodes; // ascending
    NodeId source = 0;
    NodeId destination = 0;
    std::shared_ptr<const ChannelTable> channels;
    ResourceSet resources;
    RadioParams radio;
    std::uint64_t channel_seed = 0; // shadowing realization, when synthetic

    int pool_size() const { return static_cast<int>(positions.size()); }
    int num_active() const { return static_cast<int>(active_nodes.size()); }
    bool is_active(NodeId n) const;
    const Vec3& position(NodeId n) const { return positions[static_cast<std::size_t>(n)]; }
    double gain(int technology, NodeId tx, NodeId rx) const { return channels->gain(technology, tx, rx); }
    double distance(NodeId a, NodeId b) const { return (position(a) - position(b)).norm(); }

    void validate() const;
};

/// A complete route: nodes[0] is the source, nodes.back() the destination,
/// and resources[i] carries the hop nodes[i] -> nodes[i+1].
struct Route {
    std::vector<NodeId> nodes;
    std::vector<CommResource> resources;

    int hops() const { return static_cast<int>(resources.size()); }
    friend bool operator==(const Route&, const Route&) = default;
};

double noise_power(const Technology& tech, const RadioParams& radio);

/// Received interference power at `receiver` from `transmitters` on the
/// technology of `resource`. Zero when intra-flow interference is disabled.
double interference_power(NodeId receiver, const CommResource& resource, std::span<const NodeId> transmitters,
                          const Topology& topo);

double sinr(NodeId receiver, NodeId signal_tx, const CommResource& resource, std::span<const NodeId> interferers,
            const Topology& topo);

/// Shannon rate of one hop in bits/s over the resource's subband.
double link_rate(NodeId tx, NodeId rx, const CommResource& resource, std::span<const NodeId> interferers,
                 const Topology& topo);

/// Throws ConstraintViolation naming the first violated route constraint.
void validate_route(const Route& route, const Topology& topo);

/// Per-hop rates with every other transmitter of the route on the same
/// resource counted as interference.
std::vector<double> hop_rates(const Route& route, const Topology& topo);

/// Bottleneck (minimum hop) rate of a valid route, bits/s.
double end_to_end_rate(const Route& route, const Topology& topo);

} // namespace hetnet
