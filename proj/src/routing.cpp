#include "hetnet/routing.hpp"

#include <string>

namespace hetnet {

RouteState::RouteState(const Topology& topo, int max_hops)
    : topo_(&topo), max_hops_(max_hops > 0 ? max_hops : topo.num_active()) {
    visited_.push_back(topo.source);
    visited_mask_.assign(static_cast<std::size_t>(topo.pool_size()), 0);
    visited_mask_[static_cast<std::size_t>(topo.source)] = 1;
    established_tx_.resize(static_cast<std::size_t>(topo.resources.size()));
}

bool RouteState::is_visited(NodeId n) const { return visited_mask_[static_cast<std::size_t>(n)] != 0; }

std::optional<CommResource> RouteState::last_resource() const {
    if (resources_.empty()) return std::nullopt;
    return resources_.back();
}

std::span<const NodeId> RouteState::transmitters_on(const CommResource& r) const {
    return established_tx_[static_cast<std::size_t>(topo_->resources.index_of(r))];
}

std::vector<NodeId> RouteState::candidates() const {
    std::vector<NodeId> out;
    for (NodeId n : topo_->active_nodes)
        if (!is_visited(n)) out.push_back(n);
    return out;
}

void RouteState::apply(const Decision& d) {
    if (status_ != RouteStatus::building) throw ConstraintViolation("route is no longer under construction");
    if (d.next_node < 0 || d.next_node >= topo_->pool_size() || !topo_->is_active(d.next_node))
        throw ConstraintViolation("decision targets inactive node " + std::to_string(d.next_node));
    if (is_visited(d.next_node))
        throw ConstraintViolation("decision revisits node " + std::to_string(d.next_node));
    if (!topo_->resources.contains(d.resource)) throw ConstraintViolation("decision uses an unknown resource");
    if (auto last = last_resource(); last && *last == d.resource)
        throw ConstraintViolation("decision repeats the previous hop's resource");

    established_tx_[static_cast<std::size_t>(topo_->resources.index_of(d.resource))].push_back(frontier());
    resources_.push_back(d.resource);
    visited_.push_back(d.next_node);
    visited_mask_[static_cast<std::size_t>(d.next_node)] = 1;

    if (d.next_node == topo_->destination)
        status_ = RouteStatus::delivered;
    else if (hops() >= max_hops_)
        status_ = RouteStatus::failed;
}

std::vector<CommResource> legal_resources(const RouteState& state) {
    const auto last = state.last_resource();
    std::vector<CommResource> out;
    for (const auto& r : state.topology().resources.all())
        if (!last || r != *last) out.push_back(r);
    return out;
}

void apply_decision(RouteState& state, const Decision& d) { state.apply(d); }

EpisodeResult run_episode(const Topology& topo, const Policy& policy, int max_hops) {
    RouteState state(topo, max_hops);
    EpisodeResult result;
    while (state.status() == RouteStatus::building) {
        if (state.candidates().empty() || legal_resources(state).empty()) {
            state.mark_failed();
            break;
        }
        std::optional<Decision> d;
        try {
            d = policy(state);
        } catch (const std::exception& e) {
            throw Error("policy failed at hop " + std::to_string(state.hops()) + ": " + e.what());
        }
        if (!d) {
            state.mark_failed();
            break;
        }
        const NodeId from = state.frontier();
        state.apply(*d);
        result.trace.push_back({from, d->next_node, d->resource});
    }
    result.status = state.status();
    result.route = state.route();
    if (result.delivered()) result.rate = end_to_end_rate(result.route, topo);
    return result;
}

} // namespace hetnet
