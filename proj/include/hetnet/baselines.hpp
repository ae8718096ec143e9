#pragma once

#include "hetnet/routing.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet {

enum class PolicyKind { dqn, strongest, direction, closest, least_interf, max_rate, direct, widest };

PolicyKind parse_policy(std::string_view name);
std::string to_string(PolicyKind p);
/// All policy kinds in benchmark order (dqn first).
const std::vector<PolicyKind>& all_policies();
/// The single-step rule policies (everything except dqn and widest).
const std::vector<PolicyKind>& greedy_policies();

// Baselines consider every unvisited active node, not a neighbor subset.

/// Legal resource with the highest interference-aware rate frontier -> next.
std::optional<CommResource> best_resource(const RouteState& state, NodeId next);

std::optional<Decision> strongest_neighbor(const RouteState& state);
std::optional<Decision> best_direction(const RouteState& state);
std::optional<Decision> closest_to_destination(const RouteState& state);
std::optional<Decision> least_interfered(const RouteState& state);
std::optional<Decision> largest_data_rate(const RouteState& state);
std::optional<Decision> destination_directly(const RouteState& state);

/// Directed graph over pool ids; weight(i, j) > 0 is an edge, 0 none.
struct LinkGraph {
    std::vector<NodeId> nodes;
    Eigen::MatrixXd weight;
};

/// Graph over the frontier and the unvisited nodes. Each edge carries the
/// best rate over resources given the hops already established; edges
/// leaving the frontier skip the previous hop's resource.
LinkGraph build_link_graph(const RouteState& state);

struct WidestPath {
    std::vector<NodeId> path;
    double bottleneck = 0.0;
};

/// Max-bottleneck path. Among equally wide paths the one with fewest hops
/// wins, then the lexicographically smallest node sequence. Throws if `dst`
/// is unreachable.
WidestPath widest_path(const LinkGraph& graph, NodeId src, NodeId dst);

/// One step of the widest-path routing algorithm: replan from the frontier,
/// take the first hop.
std::optional<Decision> widest_path_policy(const RouteState& state);

/// Policy callback for a baseline kind (throws for dqn).
Policy make_baseline_policy(PolicyKind kind);

} // namespace hetnet
