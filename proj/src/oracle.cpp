#include "hetnet/oracle.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace hetnet {

namespace {

constexpr double kPruneMargin = 1e-9;

class Search {
public:
    Search(const Topology& topo, bool prune) : topo_(topo), prune_(prune) {
        visited_.assign(static_cast<std::size_t>(topo.pool_size()), 0);
    }

    OracleResult run() {
        route_.nodes = {topo_.source};
        visited_[static_cast<std::size_t>(topo_.source)] = 1;
        extend();
        return result_;
    }

private:
    // Bottleneck of the partial route held in route_, with full interference
    // among its hops.
    double partial_bottleneck() const {
        const auto& nodes = route_.nodes;
        const auto& res = route_.resources;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < res.size(); ++i) {
            const auto& tech = topo_.resources.technology_of(res[i]);
            double denom = noise_power(tech, topo_.radio);
            if (topo_.radio.intra_flow_interference)
                for (std::size_t k = 0; k < res.size(); ++k)
                    if (k != i && res[k] == res[i])
                        denom += topo_.radio.transmit_power * topo_.gain(res[i].technology, nodes[k], nodes[i + 1]);
            const double s = topo_.radio.transmit_power * topo_.gain(res[i].technology, nodes[i], nodes[i + 1]) / denom;
            worst = std::min(worst, tech.subband_bandwidth() * std::log2(1.0 + s));
        }
        return worst;
    }

    bool cut(double bound) const { return prune_ && have_best_ && bound * (1.0 + kPruneMargin) < result_.rate; }

    void push(NodeId n, const CommResource& r) {
        route_.nodes.push_back(n);
        route_.resources.push_back(r);
        visited_[static_cast<std::size_t>(n)] = 1;
    }

    void pop() {
        visited_[static_cast<std::size_t>(route_.nodes.back())] = 0;
        route_.nodes.pop_back();
        route_.resources.pop_back();
    }

    void extend() {
        ++result_.partial_routes;
        const bool has_last = !route_.resources.empty();
        const CommResource last = has_last ? route_.resources.back() : CommResource{};

        struct Child {
            NodeId node;
            CommResource resource;
            double bound;
        };
        std::vector<Child> children;
        for (NodeId n : topo_.active_nodes) {
            if (visited_[static_cast<std::size_t>(n)]) continue;
            for (const auto& r : topo_.resources.all()) {
                if (has_last && r == last) continue;
                push(n, r);
                const double bound = prune_ ? partial_bottleneck() : 0.0;
                pop();
                children.push_back({n, r, bound});
            }
        }
        if (prune_)
            std::stable_sort(children.begin(), children.end(),
                             [](const Child& a, const Child& b) { return a.bound > b.bound; });

        for (const auto& c : children) {
            if (cut(c.bound)) break; // sorted, so no later sibling is better
            push(c.node, c.resource);
            if (c.node == topo_.destination) {
                ++result_.routes_enumerated;
                const double rate = end_to_end_rate(route_, topo_);
                if (!have_best_ || rate > result_.rate) {
                    have_best_ = true;
                    result_.rate = rate;
                    result_.route = route_;
                }
            } else {
                extend();
            }
            pop();
        }
    }

    const Topology& topo_;
    bool prune_;
    Route route_;
    std::vector<char> visited_;
    OracleResult result_;
    bool have_best_ = false;
};

} // namespace

OracleResult exhaustive_optimum(const Topology& topo, const OracleOptions& options) {
    topo.validate();
    if (topo.num_active() > options.max_nodes)
        throw Error("instance too large: " + std::to_string(topo.num_active()) +
                    " active nodes exceeds the oracle guard of " + std::to_string(options.max_nodes));
    return Search(topo, options.prune).run();
}

} // namespace hetnet
