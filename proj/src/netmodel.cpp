#include "hetnet/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetnet {

void RadioParams::validate() const {
    if (!(transmit_power > 0.0) || !std::isfinite(transmit_power)) throw Error("transmit power must be positive");
    if (!(noise_density > 0.0) || !std::isfinite(noise_density)) throw Error("noise density must be positive");
}

bool Topology::is_active(NodeId n) const {
    return std::binary_search(active_nodes.begin(), active_nodes.end(), n);
}

void Topology::validate() const {
    radio.validate();
    if (!channels) throw Error("topology has no channel table");
    if (channels->num_nodes() != pool_size())
        throw Error("channel table covers " + std::to_string(channels->num_nodes()) + " nodes, pool has " +
                    std::to_string(pool_size()));
    if (channels->num_technologies() != resources.num_technologies())
        throw Error("channel table technology count does not match the resource set");
    if (resources.size() < 1) throw Error("topology has no communication resources");
    if (!std::is_sorted(active_nodes.begin(), active_nodes.end()) ||
        std::adjacent_find(active_nodes.begin(), active_nodes.end()) != active_nodes.end())
        throw Error("active nodes must be strictly ascending");
    for (NodeId n : active_nodes)
        if (n < 0 || n >= pool_size()) throw Error("active node id " + std::to_string(n) + " out of range");
    if (source == destination) throw Error("source and destination must differ");
    if (!is_active(source) || !is_active(destination)) throw Error("source and destination must be active");
}

double noise_power(const Technology& tech, const RadioParams& radio) {
    return tech.total_bandwidth * radio.noise_density / tech.num_subbands;
}

double interference_power(NodeId receiver, const CommResource& resource, std::span<const NodeId> transmitters,
                          const Topology& topo) {
    if (!topo.radio.intra_flow_interference) return 0.0;
    double total = 0.0;
    for (NodeId k : transmitters) total += topo.radio.transmit_power * topo.gain(resource.technology, k, receiver);
    return total;
}

double sinr(NodeId receiver, NodeId signal_tx, const CommResource& resource, std::span<const NodeId> interferers,
            const Topology& topo) {
    if (receiver == signal_tx) throw Error("sinr: receiver equals transmitter (node " + std::to_string(receiver) + ")");
    const auto& tech = topo.resources.technology_of(resource);
    const double signal = topo.radio.transmit_power * topo.gain(resource.technology, signal_tx, receiver);
    return signal / (noise_power(tech, topo.radio) + interference_power(receiver, resource, interferers, topo));
}

double link_rate(NodeId tx, NodeId rx, const CommResource& resource, std::span<const NodeId> interferers,
                 const Topology& topo) {
    const auto& tech = topo.resources.technology_of(resource);
    return tech.subband_bandwidth() * std::log2(1.0 + sinr(rx, tx, resource, interferers, topo));
}

void validate_route(const Route& route, const Topology& topo) {
    if (route.nodes.size() < 2) throw ConstraintViolation("route must contain at least two nodes");
    if (route.resources.size() + 1 != route.nodes.size())
        throw ConstraintViolation("route must carry exactly one resource per hop");
    if (route.nodes.front() != topo.source) throw ConstraintViolation("route does not start at the source");
    if (route.nodes.back() != topo.destination) throw ConstraintViolation("route does not end at the destination");
    for (std::size_t i = 0; i < route.nodes.size(); ++i) {
        const NodeId n = route.nodes[i];
        if (!topo.is_active(n)) throw ConstraintViolation("route visits inactive node " + std::to_string(n));
        for (std::size_t j = 0; j < i; ++j)
            if (route.nodes[j] == n) throw ConstraintViolation("route visits node " + std::to_string(n) + " twice");
    }
    for (std::size_t i = 0; i < route.resources.size(); ++i) {
        if (!topo.resources.contains(route.resources[i]))
            throw ConstraintViolation("hop " + std::to_string(i) + " uses an unknown resource");
        if (i > 0 && route.resources[i] == route.resources[i - 1])
            throw ConstraintViolation("hops " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                      " use the same resource");
    }
}

std::vector<double> hop_rates(const Route& route, const Topology& topo) {
    validate_route(route, topo);
    std::vector<double> rates;
    rates.reserve(route.resources.size());
    std::vector<NodeId> interferers;
    for (std::size_t i = 0; i < route.resources.size(); ++i) {
        interferers.clear();
        for (std::size_t k = 0; k < route.resources.size(); ++k)
            if (k != i && route.resources[k] == route.resources[i]) interferers.push_back(route.nodes[k]);
        rates.push_back(link_rate(route.nodes[i], route.nodes[i + 1], route.resources[i], interferers, topo));
    }
    return rates;
}

double end_to_end_rate(const Route& route, const Topology& topo) {
    const auto rates = hop_rates(route, topo);
    return *std::min_element(rates.begin(), rates.end());
}

} // namespace hetnet
