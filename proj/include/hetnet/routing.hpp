#pragma once

#include "hetnet/netmodel.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hetnet {

enum class RouteStatus { building, delivered, failed };

/// Next hop chosen at the frontier: relay node plus transmit resource.
struct Decision {
    NodeId next_node = 0;
    CommResource resource;
    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Partial route under hop-by-hop construction.
class RouteState {
public:
    /// `max_hops` <= 0 selects the active node count.
    explicit RouteState(const Topology& topo, int max_hops = 0);

    const Topology& topology() const { return *topo_; }
    const std::vector<NodeId>& visited() const { return visited_; }
    const std::vector<CommResource>& resources_used() const { return resources_; }
    NodeId frontier() const { return visited_.back(); }
    RouteStatus status() const { return status_; }
    int hops() const { return static_cast<int>(resources_.size()); }
    int max_hops() const { return max_hops_; }

    bool is_visited(NodeId n) const;
    std::optional<CommResource> last_resource() const;
    /// Transmitters of the hops recorded so far that used `r`, in hop order.
    std::span<const NodeId> transmitters_on(const CommResource& r) const;
    /// Active, unvisited nodes in ascending id order.
    std::vector<NodeId> candidates() const;

    void apply(const Decision& d);
    void mark_failed() { status_ = RouteStatus::failed; }

    /// The route built so far (complete once delivered).
    Route route() const { return {visited_, resources_}; }

private:
    const Topology* topo_;
    int max_hops_;
    std::vector<NodeId> visited_;
    std::vector<char> visited_mask_;
    std::vector<CommResource> resources_;
    std::vector<std::vector<NodeId>> established_tx_; // by flat resource index
    RouteStatus status_ = RouteStatus::building;
};

/// Every resource except the one used on the immediately preceding hop.
std::vector<CommResource> legal_resources(const RouteState& state);

/// Throws ConstraintViolation on a revisit, a repeated resource, an inactive
/// node or a state that is no longer building.
void apply_decision(RouteState& state, const Decision& d);

/// A routing policy; std::nullopt means "no action" and fails the episode.
using Policy = std::function<std::optional<Decision>(const RouteState&)>;

struct HopRecord {
    NodeId from = 0;
    NodeId to = 0;
    CommResource resource;
};

struct EpisodeResult {
    RouteStatus status = RouteStatus::failed;
    Route route;          // partial when failed
    double rate = 0.0;    // end-to-end bits/s, 0 when failed
    std::vector<HopRecord> trace;

    bool delivered() const { return status == RouteStatus::delivered; }
};

/// Drives `policy` from the source until delivery, an empty action set, a
/// no-action signal or hop-budget exhaustion.
EpisodeResult run_episode(const Topology& topo, const Policy& policy, int max_hops = 0);

} // namespace hetnet
