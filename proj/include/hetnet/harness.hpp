#pragma once

#include "hetnet/agent.hpp"
#include "hetnet/baselines.hpp"
#include "hetnet/oracle.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hetnet {

struct TechnologySpec {
    double center_frequency = 400e6;
    int subbands = 3;
    std::optional<double> total_bandwidth; // default: 1% of the center frequency
};

struct ChannelConfig {
    std::string source = "synthetic"; // or "grid"
    std::string grid_file;
    SyntheticChannelParams synthetic;
    bool fading_per_topology = true; // fresh shadowing draw for every sampled topology
};

/// Everything a run needs. Defaults are the desk-scale setting.
struct ExperimentConfig {
    Vec3 arena{250.0, 250.0, 9.5};
    int pool_size = 15;
    int relays_per_topology = 7;
    NodeId source_id = 0;
    NodeId destination_id = 14;
    std::vector<Vec3> positions; // explicit layout; generated from layout_seed when empty
    std::uint64_t layout_seed = 7;
    std::vector<TechnologySpec> technologies{{400e6, 3, {}}, {2.4e9, 3, {}}};
    RadioParams radio;
    ChannelConfig channel;
    AgentConfig agent;
    PolicyKind policy = PolicyKind::dqn;
    TrainConfig training;
    int eval_topologies = 200;
    std::uint64_t seed = 1;       // training topologies, exploration, replay sampling
    std::uint64_t eval_seed = 1001; // held-out evaluation topologies
    int oracle_max_nodes = 9;
    int oracle_topology = 0; // eval topology index used by the oracle mode
    bool bench_oracle = true;
    std::string output_dir = "out";
    std::string checkpoint; // eval/bench; defaults to <output_dir>/checkpoint.bin
    int workers = 1;

    /// Throws ConfigError listing every problem found.
    void validate() const;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies `dotted.key=value` to a config document. The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Node layout, resources and (when fixed) the channel table shared by every
/// topology drawn from one configuration.
class Scenario {
public:
    explicit Scenario(const ExperimentConfig& config);

    const ExperimentConfig& config() const { return config_; }
    const std::vector<Vec3>& positions() const { return positions_; }
    const ResourceSet& resources() const { return resources_; }
    std::vector<NodeId> relay_pool() const;

    /// Fixed endpoints plus a uniform random relay subset; a new channel
    /// realization when shadowing is redrawn per topology.
    Topology sample_topology(std::mt19937_64& rng) const;

    /// Topologies drawn from the held-out evaluation stream.
    std::vector<Topology> eval_topologies(int count) const;
    /// Endless training stream (independent of the evaluation stream).
    TopologySource training_source() const;

    FeatureScaling feature_scaling() const;

private:
    ExperimentConfig config_;
    std::vector<Vec3> positions_;
    ResourceSet resources_;
    std::shared_ptr<const ChannelTable> fixed_channels_;
};

Topology sample_topology(const ExperimentConfig& config, std::mt19937_64& rng);

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Agent configuration with feature scaling resolved from the arena.
AgentConfig resolved_agent_config(const Scenario& scenario);

/// Trains a DQN on the scenario's training stream.
TrainResult train_agent(const Scenario& scenario, const std::function<void(const EpisodeLog&)>& on_episode = {});

struct PolicyRow {
    std::string policy;
    EvalReport report;
};

enum class RunMode { train, eval, bench, oracle };
RunMode parse_mode(std::string_view name);
std::string to_string(RunMode m);

/// Executes a run and writes its bundle (summary.json, episodes.csv,
/// config.snapshot.json and, when training, checkpoint.bin) to the output
/// directory. Returns the summary document.
nlohmann::json run(const ExperimentConfig& config, RunMode mode, std::ostream& log);

/// Deterministic run identifier derived from the config snapshot and mode.
std::string run_id(const nlohmann::json& snapshot, RunMode mode);

std::string format_route(const Route& route);

} // namespace hetnet
