#pragma once

#include "hetnet/neighbors.hpp"
#include "hetnet/nn.hpp"
#include "hetnet/routing.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace hetnet {

using AgentScalar = float;
using QNet = nn::QNetwork<AgentScalar>;
using StateVector = nn::Vector<AgentScalar>;

/// Maps raw features into roughly [0, 1].
struct FeatureScaling {
    double arena_diagonal = 1.0; // m
    double power_db_min = -150.0;
    double power_db_max = -30.0;

    double squash_db(double db) const { return (db - power_db_min) / (power_db_max - power_db_min); }
};

struct AgentConfig {
    int neighbors = 5;
    NeighborStrategy strategy = NeighborStrategy::rate;
    FeatureScaling features;
    double reward_reference = 10e6; // bits/s mapped to a target of 1.0

    nn::NetworkShape network_shape() const { return nn::NetworkShape::for_neighbors(neighbors); }
};

/// Four features per neighbor slot: distance to destination, bearing offset
/// from the destination direction, frontier->neighbor gain on `resource`, and
/// interference at the neighbor on `resource` from the established hops.
/// Padding slots are zero.
StateVector featurize(const RouteState& state, const NeighborSet& neighbors, const CommResource& resource,
                      const FeatureScaling& scaling);

/// Angle in [0, pi] between frontier->destination and frontier->neighbor.
double bearing_offset(const Topology& topo, NodeId frontier, NodeId neighbor);

struct ActionChoice {
    Decision decision;
    int slot = 0;
    int valid_slots = 0;
    StateVector state; // features for the chosen resource
};

/// Epsilon-greedy joint (resource, neighbor) selection. The greedy branch
/// evaluates the network once per legal resource and takes the global
/// argmax over unmasked slots; ties go to the lowest (resource, slot).
/// Returns std::nullopt when no legal action exists.
std::optional<ActionChoice> choose_action(const RouteState& state, const QNet& net, const AgentConfig& config,
                                          double epsilon, std::mt19937_64& rng);

/// Greedy routing policy backed by `net`. The network must outlive the policy.
Policy make_dqn_policy(const QNet& net, const AgentConfig& config);

struct Experience {
    StateVector state;
    CommResource resource;
    int action = 0;
    int valid_slots = 0;
    AgentScalar reward = 0; // normalized
};

/// Fixed-capacity ring buffer with uniform sampling with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Experience e);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& operator[](std::size_t i) const { return items_[i]; }

    nn::Batch<AgentScalar> sample(std::size_t batch_size, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Experience> items_;
};

/// Linear decay from `start` to `end` over the first `explore_fraction` of
/// training, then exactly zero.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    double explore_fraction = 0.8;

    double at(std::int64_t episode, std::int64_t total_episodes) const;
};

struct TrainConfig {
    std::int64_t episodes = 50000;
    std::size_t replay_capacity = 100000;
    std::size_t batch_size = 256;
    int gradient_steps = 1; // per episode
    nn::AdamConfig optimizer;
    EpsilonSchedule epsilon;
    double gamma = 0.99; // carried for completeness; terminal-reward targets never bootstrap
    int max_hops = 0;    // 0: active node count
    std::uint64_t init_seed = 1;
    std::vector<int> trunk{300, 300, 300};
    std::vector<int> head{300, 150};
};

struct EpisodeLog {
    std::int64_t episode = 0;
    double epsilon = 0.0;
    double reward = 0.0; // bits/s
    double loss = 0.0;   // last gradient step, 0 before the first one
    int hops = 0;
    bool delivered = false;
};

struct TrainResult {
    QNet net;
    std::vector<EpisodeLog> log;
};

using TopologySource = std::function<Topology()>;

/// Monte Carlo training: every (state, action) of an episode regresses onto
/// that episode's end-to-end rate (zero when undelivered).
TrainResult train(const TrainConfig& train_config, const AgentConfig& agent_config, const TopologySource& topologies,
                  std::mt19937_64& rng, const std::function<void(const EpisodeLog&)>& on_episode = {});

struct EvalReport {
    std::vector<EpisodeResult> episodes;
    double mean_rate = 0.0;           // bits/s, undelivered counted as 0
    double mean_delivered_rate = 0.0; // bits/s over delivered episodes only
    double delivery_ratio = 0.0;
    double p10 = 0.0, p50 = 0.0, p90 = 0.0; // of per-topology rate

    static EvalReport summarize(std::vector<EpisodeResult> episodes);
};

/// Runs `policy` once per topology; `workers` > 1 splits topologies across
/// threads. The policy must be safe to call concurrently.
EvalReport evaluate_policy(const Policy& policy, const std::vector<Topology>& topologies, int workers = 1,
                           int max_hops = 0);

EvalReport evaluate(const QNet& net, const std::vector<Topology>& topologies, const AgentConfig& config,
                    int workers = 1);

} // namespace hetnet
