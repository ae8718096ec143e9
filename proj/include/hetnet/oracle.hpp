#pragma once

#include "hetnet/netmodel.hpp"

#include <cstdint>

namespace hetnet {

struct OracleOptions {
    int max_nodes = 9; // refuse larger instances; the search is factorial
    bool prune = true; // branch-and-bound on the partial bottleneck
};

struct OracleResult {
    Route route;
    double rate = 0.0;                  // bits/s, equals end_to_end_rate(route)
    std::int64_t routes_enumerated = 0; // complete routes evaluated
    std::int64_t partial_routes = 0;    // search tree nodes expanded
};

/// Best end-to-end rate over every loop-free route and every resource
/// assignment with no resource repeated on consecutive hops.
///
/// Pruning relies on the partial bottleneck never increasing as hops are
/// appended: a new hop adds one more min term and can only add interference
/// to the hops already placed. Branches are cut only when their bound falls
/// below the incumbent by a relative margin of 1e-9, so the pruned search
/// returns the same optimum as the full enumeration.
OracleResult exhaustive_optimum(const Topology& topo, const OracleOptions& options = {});

} // namespace hetnet
