#include "hetnet/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace hetnet {

double bearing_offset(const Topology& topo, NodeId frontier, NodeId neighbor) {
    if (neighbor == topo.destination) return 0.0;
    const Vec3 to_dest = topo.position(topo.destination) - topo.position(frontier);
    const Vec3 to_neighbor = topo.position(neighbor) - topo.position(frontier);
    return std::atan2(to_dest.cross(to_neighbor).norm(), to_dest.dot(to_neighbor));
}

StateVector featurize(const RouteState& state, const NeighborSet& neighbors, const CommResource& resource,
                      const FeatureScaling& scaling) {
    const auto& topo = state.topology();
    const NodeId frontier = state.frontier();
    const auto transmitters = state.transmitters_on(resource);
    StateVector x = StateVector::Zero(4 * neighbors.capacity);
    for (int slot = 0; slot < neighbors.size(); ++slot) {
        const NodeId n = neighbors.nodes[static_cast<std::size_t>(slot)];
        const double interference = interference_power(n, resource, transmitters, topo);
        const double gain_db = to_db(topo.radio.transmit_power * topo.gain(resource.technology, frontier, n));
        x[4 * slot + 0] = static_cast<AgentScalar>(topo.distance(n, topo.destination) / scaling.arena_diagonal);
        x[4 * slot + 1] = static_cast<AgentScalar>(bearing_offset(topo, frontier, n) / kPi);
        x[4 * slot + 2] = static_cast<AgentScalar>(scaling.squash_db(gain_db));
        x[4 * slot + 3] =
            interference > 0.0 ? static_cast<AgentScalar>(std::max(0.0, scaling.squash_db(to_db(interference)))) : 0;
    }
    return x;
}

std::optional<ActionChoice> choose_action(const RouteState& state, const QNet& net, const AgentConfig& config,
                                          double epsilon, std::mt19937_64& rng) {
    const auto resources = legal_resources(state);
    const NeighborSet neighbors = select_neighbors(config.strategy, state, config.neighbors);
    if (resources.empty() || neighbors.empty()) return std::nullopt;

    const int valid = neighbors.size();
    auto make_choice = [&](std::size_t r, int slot, StateVector x) {
        return ActionChoice{{neighbors.nodes[static_cast<std::size_t>(slot)], resources[r]}, slot, valid, std::move(x)};
    };

    if (epsilon > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        const auto pairs = static_cast<std::int64_t>(resources.size()) * valid;
        const auto pick = std::uniform_int_distribution<std::int64_t>(0, pairs - 1)(rng);
        const auto r = static_cast<std::size_t>(pick / valid);
        const int slot = static_cast<int>(pick % valid);
        return make_choice(r, slot, featurize(state, neighbors, resources[r], config.features));
    }

    nn::Matrix<AgentScalar> states(net.input_size(), static_cast<Eigen::Index>(resources.size()));
    for (std::size_t r = 0; r < resources.size(); ++r)
        states.col(static_cast<Eigen::Index>(r)) = featurize(state, neighbors, resources[r], config.features);
    const nn::Matrix<AgentScalar> q = nn::forward(net, states);

    std::size_t best_r = 0;
    int best_slot = 0;
    AgentScalar best = -std::numeric_limits<AgentScalar>::infinity();
    for (std::size_t r = 0; r < resources.size(); ++r) {
        for (int slot = 0; slot < valid; ++slot) {
            const AgentScalar v = q(slot, static_cast<Eigen::Index>(r));
            if (v > best) {
                best = v;
                best_r = r;
                best_slot = slot;
            }
        }
    }
    return make_choice(best_r, best_slot, states.col(static_cast<Eigen::Index>(best_r)));
}

Policy make_dqn_policy(const QNet& net, const AgentConfig& config) {
    return [&net, config](const RouteState& state) -> std::optional<Decision> {
        std::mt19937_64 unused(0);
        auto choice = choose_action(state, net, config, 0.0, unused);
        if (!choice) return std::nullopt;
        return choice->decision;
    };
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(Experience e) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(e));
    } else {
        items_[next_] = std::move(e);
    }
    next_ = (next_ + 1) % capacity_;
}

nn::Batch<AgentScalar> ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
    if (items_.empty()) throw Error("cannot sample from an empty replay buffer");
    const auto width = items_.front().state.size();
    nn::Batch<AgentScalar> batch;
    batch.states.resize(width, static_cast<Eigen::Index>(batch_size));
    batch.targets.resize(static_cast<Eigen::Index>(batch_size));
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const auto& e = items_[pick(rng)];
        batch.states.col(static_cast<Eigen::Index>(i)) = e.state;
        batch.actions.push_back(e.action);
        batch.valid.push_back(e.valid_slots);
        batch.targets[static_cast<Eigen::Index>(i)] = e.reward;
    }
    return batch;
}

double EpsilonSchedule::at(std::int64_t episode, std::int64_t total_episodes) const {
    const auto cutoff = static_cast<std::int64_t>(std::floor(explore_fraction * static_cast<double>(total_episodes)));
    if (episode >= cutoff) return 0.0;
    if (cutoff <= 1) return start;
    const double frac = static_cast<double>(episode) / static_cast<double>(cutoff - 1);
    return (1.0 - frac) * start + frac * end;
}

TrainResult train(const TrainConfig& tc, const AgentConfig& ac, const TopologySource& topologies, std::mt19937_64& rng,
                  const std::function<void(const EpisodeLog&)>& on_episode) {
    if (tc.episodes < 0) throw Error("episode count must be non-negative");
    if (tc.batch_size == 0) throw Error("batch size must be positive");
    if (ac.neighbors < 1) throw Error("neighbor count must be >= 1");

    nn::NetworkShape shape = ac.network_shape();
    shape.trunk = tc.trunk;
    shape.head = tc.head;
    TrainResult result{QNet::initialized(shape, tc.init_seed), {}};
    nn::Adam<AgentScalar> optimizer(result.net, tc.optimizer);
    ReplayBuffer buffer(tc.replay_capacity);
    result.log.reserve(static_cast<std::size_t>(tc.episodes));

    double last_loss = 0.0;
    std::vector<ActionChoice> taken;
    for (std::int64_t ep = 0; ep < tc.episodes; ++ep) {
        const double eps = tc.epsilon.at(ep, tc.episodes);
        const Topology topo = topologies();
        taken.clear();
        const Policy policy = [&](const RouteState& state) -> std::optional<Decision> {
            auto choice = choose_action(state, result.net, ac, eps, rng);
            if (!choice) return std::nullopt;
            taken.push_back(*choice);
            return choice->decision;
        };
        const EpisodeResult episode = run_episode(topo, policy, tc.max_hops);

        const auto reward = static_cast<AgentScalar>(episode.rate / ac.reward_reference);
        for (auto& c : taken) buffer.push({std::move(c.state), c.decision.resource, c.slot, c.valid_slots, reward});

        if (buffer.size() >= tc.batch_size) {
            for (int g = 0; g < tc.gradient_steps; ++g) {
                const auto batch = buffer.sample(tc.batch_size, rng);
                auto lg = nn::loss_and_gradients(result.net, batch);
                if (!std::isfinite(static_cast<double>(lg.loss)))
                    throw Error("training diverged: non-finite loss at episode " + std::to_string(ep));
                optimizer.step(result.net, lg.gradients);
                last_loss = static_cast<double>(lg.loss);
            }
        }

        EpisodeLog entry{ep, eps, episode.rate, last_loss, episode.route.hops(), episode.delivered()};
        result.log.push_back(entry);
        if (on_episode) on_episode(entry);
    }
    return result;
}

namespace {

double percentile(std::vector<double> sorted, double p) {
    if (sorted.empty()) return 0.0;
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

} // namespace

EvalReport EvalReport::summarize(std::vector<EpisodeResult> episodes) {
    EvalReport r;
    r.episodes = std::move(episodes);
    if (r.episodes.empty()) return r;
    std::vector<double> rates;
    double delivered_sum = 0.0;
    int delivered = 0;
    for (const auto& e : r.episodes) {
        rates.push_back(e.rate);
        if (e.delivered()) {
            delivered_sum += e.rate;
            ++delivered;
        }
    }
    double total = 0.0;
    for (double v : rates) total += v;
    r.mean_rate = total / static_cast<double>(rates.size());
    r.mean_delivered_rate = delivered > 0 ? delivered_sum / delivered : 0.0;
    r.delivery_ratio = static_cast<double>(delivered) / static_cast<double>(rates.size());
    r.p10 = percentile(rates, 0.10);
    r.p50 = percentile(rates, 0.50);
    r.p90 = percentile(rates, 0.90);
    return r;
}

EvalReport evaluate_policy(const Policy& policy, const std::vector<Topology>& topologies, int workers, int max_hops) {
    std::vector<EpisodeResult> results(topologies.size());
    const auto n = topologies.size();
    const auto k = static_cast<std::size_t>(std::max(1, workers));
    if (k == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) results[i] = run_episode(topologies[i], policy, max_hops);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(k);
        for (std::size_t w = 0; w < k; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += k) results[i] = run_episode(topologies[i], policy, max_hops);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return EvalReport::summarize(std::move(results));
}

EvalReport evaluate(const QNet& net, const std::vector<Topology>& topologies, const AgentConfig& config, int workers) {
    return evaluate_policy(make_dqn_policy(net, config), topologies, workers);
}

} // namespace hetnet
