#include "hetnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace hetnet {

using nlohmann::json;

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) problems.push_back(msg);
    };
    check(arena.minCoeff() > 0.0, "arena dimensions must be positive");
    check(pool_size >= 2, "pool_size must be >= 2");
    check(source_id >= 0 && source_id < pool_size, "source_id must index the pool");
    check(destination_id >= 0 && destination_id < pool_size, "destination_id must index the pool");
    check(source_id != destination_id, "source_id and destination_id must differ");
    check(relays_per_topology >= 0 && relays_per_topology <= pool_size - 2,
          "relays_per_topology exceeds the relay pool (" + std::to_string(std::max(0, pool_size - 2)) + ")");
    check(positions.empty() || static_cast<int>(positions.size()) == pool_size,
          "positions must list exactly pool_size entries");
    check(!technologies.empty(), "at least one technology is required");
    for (std::size_t i = 0; i < technologies.size(); ++i) {
        const auto& t = technologies[i];
        const auto tag = "technologies[" + std::to_string(i) + "]";
        check(t.center_frequency > 0.0, tag + ".center_frequency must be positive");
        check(t.subbands >= 1, tag + ".subbands must be >= 1");
        check(!t.total_bandwidth || *t.total_bandwidth > 0.0, tag + ".total_bandwidth must be positive");
    }
    check(radio.transmit_power > 0.0, "radio.transmit_power must be positive");
    check(radio.noise_density > 0.0, "radio.noise_density must be positive");
    check(channel.source == "synthetic" || channel.source == "grid", "channel.source must be synthetic or grid");
    if (channel.source == "grid") {
        check(!channel.grid_file.empty(), "channel.grid_file is required for grid channels");
        check(channel.grid_file.empty() || std::filesystem::exists(channel.grid_file),
              "channel.grid_file does not exist: " + channel.grid_file);
    }
    check(channel.synthetic.reference_distance > 0.0, "channel.reference_distance must be positive");
    check(channel.synthetic.shadow_sigma_db >= 0.0, "channel.shadow_sigma_db must be non-negative");
    check(agent.neighbors >= 1, "neighbors must be >= 1");
    check(agent.reward_reference > 0.0, "agent.reward_reference_bps must be positive");
    check(agent.features.power_db_max > agent.features.power_db_min, "features: power_db_max must exceed power_db_min");
    check(training.episodes >= 0, "training.episodes must be non-negative");
    check(training.batch_size >= 1, "training.batch_size must be >= 1");
    check(training.replay_capacity >= 1, "training.replay_capacity must be >= 1");
    check(training.gradient_steps >= 0, "training.gradient_steps must be non-negative");
    check(training.optimizer.learning_rate > 0.0, "training.learning_rate must be positive");
    check(training.epsilon.explore_fraction >= 0.0 && training.epsilon.explore_fraction <= 1.0,
          "training.explore_fraction must lie in [0, 1]");
    check(!training.trunk.empty(), "training.trunk must list at least one layer");
    check(eval_topologies >= 1, "eval_topologies must be >= 1");
    check(oracle_max_nodes >= 2, "oracle_max_nodes must be >= 2");
    check(oracle_topology >= 0 && oracle_topology < eval_topologies, "oracle_topology must index the eval set");
    check(workers >= 1, "workers must be >= 1");
    if (!checkpoint.empty()) check(std::filesystem::exists(checkpoint), "checkpoint does not exist: " + checkpoint);

    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element coordinate array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Reads known keys from `obj` and rejects anything else.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    }
    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : obj_.items())
            if (!seen_.count(key)) throw ConfigError("unknown config key: " + where_ + key);
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config key " + where_ + key + ": " + e.what());
        }
    }
    const json* sub(const char* key) {
        seen_.insert(key);
        return obj_.contains(key) ? &obj_.at(key) : nullptr;
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

} // namespace

json to_json(const ExperimentConfig& c) {
    json techs = json::array();
    for (const auto& t : c.technologies) {
        json jt{{"center_frequency", t.center_frequency}, {"subbands", t.subbands}};
        if (t.total_bandwidth) jt["total_bandwidth"] = *t.total_bandwidth;
        techs.push_back(jt);
    }
    json positions = json::array();
    for (const auto& p : c.positions) positions.push_back(vec3_json(p));
    const auto& s = c.channel.synthetic;
    const auto& t = c.training;
    return json{
        {"arena", vec3_json(c.arena)},
        {"pool_size", c.pool_size},
        {"relays_per_topology", c.relays_per_topology},
        {"source_id", c.source_id},
        {"destination_id", c.destination_id},
        {"positions", positions},
        {"layout_seed", c.layout_seed},
        {"technologies", techs},
        {"radio",
         {{"transmit_power", c.radio.transmit_power},
          {"noise_density", c.radio.noise_density},
          {"intra_flow_interference", c.radio.intra_flow_interference}}},
        {"channel",
         {{"source", c.channel.source},
          {"grid_file", c.channel.grid_file},
          {"fading_per_topology", c.channel.fading_per_topology},
          {"reference_distance", s.reference_distance},
          {"shadow_sigma_db", s.shadow_sigma_db},
          {"alpha_intercept", s.alpha_intercept},
          {"alpha_slope", s.alpha_slope},
          {"alpha_reference_frequency", s.alpha_reference_frequency},
          {"fading", s.fading}}},
        {"neighbors", c.agent.neighbors},
        {"neighbor_strategy", to_string(c.agent.strategy)},
        {"features", {{"power_db_min", c.agent.features.power_db_min}, {"power_db_max", c.agent.features.power_db_max}}},
        {"reward_reference_bps", c.agent.reward_reference},
        {"policy", to_string(c.policy)},
        {"training",
         {{"episodes", t.episodes},
          {"replay_capacity", t.replay_capacity},
          {"batch_size", t.batch_size},
          {"gradient_steps", t.gradient_steps},
          {"learning_rate", t.optimizer.learning_rate},
          {"adam_beta1", t.optimizer.beta1},
          {"adam_beta2", t.optimizer.beta2},
          {"adam_epsilon", t.optimizer.epsilon},
          {"epsilon_start", t.epsilon.start},
          {"epsilon_end", t.epsilon.end},
          {"explore_fraction", t.epsilon.explore_fraction},
          {"gamma", t.gamma},
          {"max_hops", t.max_hops},
          {"init_seed", t.init_seed},
          {"trunk", t.trunk},
          {"head", t.head}}},
        {"eval_topologies", c.eval_topologies},
        {"seed", c.seed},
        {"eval_seed", c.eval_seed},
        {"oracle_max_nodes", c.oracle_max_nodes},
        {"oracle_topology", c.oracle_topology},
        {"bench_oracle", c.bench_oracle},
        {"output_dir", c.output_dir},
        {"checkpoint", c.checkpoint},
        {"workers", c.workers},
    };
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    Reader r(j, "");
    if (auto* a = r.sub("arena")) c.arena = vec3_from(*a);
    r.get("pool_size", c.pool_size);
    r.get("relays_per_topology", c.relays_per_topology);
    r.get("source_id", c.source_id);
    r.get("destination_id", c.destination_id);
    if (auto* p = r.sub("positions")) {
        c.positions.clear();
        for (const auto& e : *p) c.positions.push_back(vec3_from(e));
    }
    r.get("layout_seed", c.layout_seed);
    if (auto* ts = r.sub("technologies")) {
        if (!ts->is_array()) throw ConfigError("technologies must be an array");
        c.technologies.clear();
        for (std::size_t i = 0; i < ts->size(); ++i) {
            TechnologySpec spec;
            Reader tr((*ts)[i], "technologies[" + std::to_string(i) + "].");
            tr.get("center_frequency", spec.center_frequency);
            tr.get("subbands", spec.subbands);
            double bw = 0.0;
            tr.get("total_bandwidth", bw);
            if ((*ts)[i].contains("total_bandwidth")) spec.total_bandwidth = bw;
            c.technologies.push_back(spec);
        }
    }
    if (auto* rj = r.sub("radio")) {
        Reader rr(*rj, "radio.");
        rr.get("transmit_power", c.radio.transmit_power);
        rr.get("noise_density", c.radio.noise_density);
        rr.get("intra_flow_interference", c.radio.intra_flow_interference);
    }
    if (auto* cj = r.sub("channel")) {
        Reader cr(*cj, "channel.");
        auto& s = c.channel.synthetic;
        cr.get("source", c.channel.source);
        cr.get("grid_file", c.channel.grid_file);
        cr.get("fading_per_topology", c.channel.fading_per_topology);
        cr.get("reference_distance", s.reference_distance);
        cr.get("shadow_sigma_db", s.shadow_sigma_db);
        cr.get("alpha_intercept", s.alpha_intercept);
        cr.get("alpha_slope", s.alpha_slope);
        cr.get("alpha_reference_frequency", s.alpha_reference_frequency);
        cr.get("fading", s.fading);
    }
    r.get("neighbors", c.agent.neighbors);
    std::string strategy = to_string(c.agent.strategy);
    r.get("neighbor_strategy", strategy);
    try {
        c.agent.strategy = parse_neighbor_strategy(strategy);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (auto* fj = r.sub("features")) {
        Reader fr(*fj, "features.");
        fr.get("power_db_min", c.agent.features.power_db_min);
        fr.get("power_db_max", c.agent.features.power_db_max);
    }
    r.get("reward_reference_bps", c.agent.reward_reference);
    std::string policy = to_string(c.policy);
    r.get("policy", policy);
    try {
        c.policy = parse_policy(policy);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (auto* tj = r.sub("training")) {
        Reader tr(*tj, "training.");
        auto& t = c.training;
        tr.get("episodes", t.episodes);
        tr.get("replay_capacity", t.replay_capacity);
        tr.get("batch_size", t.batch_size);
        tr.get("gradient_steps", t.gradient_steps);
        tr.get("learning_rate", t.optimizer.learning_rate);
        tr.get("adam_beta1", t.optimizer.beta1);
        tr.get("adam_beta2", t.optimizer.beta2);
        tr.get("adam_epsilon", t.optimizer.epsilon);
        tr.get("epsilon_start", t.epsilon.start);
        tr.get("epsilon_end", t.epsilon.end);
        tr.get("explore_fraction", t.epsilon.explore_fraction);
        tr.get("gamma", t.gamma);
        tr.get("max_hops", t.max_hops);
        tr.get("init_seed", t.init_seed);
        tr.get("trunk", t.trunk);
        tr.get("head", t.head);
    }
    r.get("eval_topologies", c.eval_topologies);
    r.get("seed", c.seed);
    r.get("eval_seed", c.eval_seed);
    r.get("oracle_max_nodes", c.oracle_max_nodes);
    r.get("oracle_topology", c.oracle_topology);
    r.get("bench_oracle", c.bench_oracle);
    r.get("output_dir", c.output_dir);
    r.get("checkpoint", c.checkpoint);
    r.get("workers", c.workers);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = json::object();
    }
    (*node)[parts.back()] = value;
}

// ---------------------------------------------------------------- scenario

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x68657475u};
    return std::mt19937_64(seq);
}

namespace {

constexpr std::uint64_t kLayoutStream = 0;
constexpr std::uint64_t kTrainTopologyStream = 1;
constexpr std::uint64_t kExplorationStream = 2;
constexpr std::uint64_t kEvalTopologyStream = 3;

std::vector<Vec3> generate_layout(const ExperimentConfig& c) {
    auto rng = make_stream(c.layout_seed, kLayoutStream);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> pos;
    for (int i = 0; i < c.pool_size; ++i)
        pos.emplace_back(u(rng) * c.arena.x(), u(rng) * c.arena.y(), u(rng) * c.arena.z());
    // Endpoints sit near opposite corners of the arena.
    pos[static_cast<std::size_t>(c.source_id)] = Vec3(0.1 * c.arena.x(), 0.1 * c.arena.y(), 0.5 * c.arena.z());
    pos[static_cast<std::size_t>(c.destination_id)] = Vec3(0.9 * c.arena.x(), 0.9 * c.arena.y(), 0.5 * c.arena.z());
    return pos;
}

} // namespace

Scenario::Scenario(const ExperimentConfig& config) : config_(config) {
    config_.validate();
    positions_ = config_.positions.empty() ? generate_layout(config_) : config_.positions;
    for (std::size_t a = 0; a < positions_.size(); ++a)
        for (std::size_t b = a + 1; b < positions_.size(); ++b)
            if (positions_[a] == positions_[b])
                throw ConfigError("coincident nodes " + std::to_string(a) + " and " + std::to_string(b));

    std::vector<Technology> techs;
    for (std::size_t i = 0; i < config_.technologies.size(); ++i) {
        const auto& spec = config_.technologies[i];
        auto t = Technology::from_center_frequency(static_cast<int>(i), spec.center_frequency, spec.subbands);
        if (spec.total_bandwidth) t.total_bandwidth = *spec.total_bandwidth;
        techs.push_back(t);
    }
    resources_ = ResourceSet(std::move(techs));

    if (config_.channel.source == "grid") {
        auto table = load_gain_grid(config_.channel.grid_file, config_.pool_size);
        if (table.num_technologies() != resources_.num_technologies())
            throw ConfigError("gain grid has " + std::to_string(table.num_technologies()) +
                              " technologies, config declares " + std::to_string(resources_.num_technologies()));
        fixed_channels_ = std::make_shared<const ChannelTable>(std::move(table));
    } else if (!config_.channel.fading_per_topology) {
        fixed_channels_ = std::make_shared<const ChannelTable>(
            synthesize_channel_table(positions_, resources_, config_.layout_seed, config_.channel.synthetic));
    }
}

std::vector<NodeId> Scenario::relay_pool() const {
    std::vector<NodeId> pool;
    for (NodeId n = 0; n < config_.pool_size; ++n)
        if (n != config_.source_id && n != config_.destination_id) pool.push_back(n);
    return pool;
}

Topology Scenario::sample_topology(std::mt19937_64& rng) const {
    auto pool = relay_pool();
    const auto k = static_cast<std::size_t>(config_.relays_per_topology);
    if (k > pool.size()) throw Error("relay subset size exceeds the relay pool");
    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    Topology topo;
    topo.positions = positions_;
    topo.active_nodes.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    topo.active_nodes.push_back(config_.source_id);
    topo.active_nodes.push_back(config_.destination_id);
    std::sort(topo.active_nodes.begin(), topo.active_nodes.end());
    topo.source = config_.source_id;
    topo.destination = config_.destination_id;
    topo.resources = resources_;
    topo.radio = config_.radio;
    if (fixed_channels_) {
        topo.channels = fixed_channels_;
    } else {
        topo.channel_seed = rng();
        topo.channels = std::make_shared<const ChannelTable>(
            synthesize_channel_table(positions_, resources_, topo.channel_seed, config_.channel.synthetic));
    }
    return topo;
}

std::vector<Topology> Scenario::eval_topologies(int count) const {
    auto rng = make_stream(config_.eval_seed, kEvalTopologyStream);
    std::vector<Topology> out;
    for (int i = 0; i < count; ++i) out.push_back(sample_topology(rng));
    return out;
}

TopologySource Scenario::training_source() const {
    auto rng = std::make_shared<std::mt19937_64>(make_stream(config_.seed, kTrainTopologyStream));
    return [this, rng] { return sample_topology(*rng); };
}

FeatureScaling Scenario::feature_scaling() const {
    FeatureScaling s = config_.agent.features;
    s.arena_diagonal = config_.arena.norm();
    return s;
}

Topology sample_topology(const ExperimentConfig& config, std::mt19937_64& rng) {
    return Scenario(config).sample_topology(rng);
}

AgentConfig resolved_agent_config(const Scenario& scenario) {
    AgentConfig a = scenario.config().agent;
    a.features = scenario.feature_scaling();
    return a;
}

TrainResult train_agent(const Scenario& scenario, const std::function<void(const EpisodeLog&)>& on_episode) {
    auto rng = make_stream(scenario.config().seed, kExplorationStream);
    return train(scenario.config().training, resolved_agent_config(scenario), scenario.training_source(), rng,
                 on_episode);
}

// ---------------------------------------------------------------- runs

RunMode parse_mode(std::string_view name) {
    if (name == "train") return RunMode::train;
    if (name == "eval") return RunMode::eval;
    if (name == "bench") return RunMode::bench;
    if (name == "oracle") return RunMode::oracle;
    throw Error("unknown mode '" + std::string(name) + "' (expected train, eval, bench or oracle)");
}

std::string to_string(RunMode m) {
    switch (m) {
    case RunMode::train: return "train";
    case RunMode::eval: return "eval";
    case RunMode::bench: return "bench";
    case RunMode::oracle: return "oracle";
    }
    return "?";
}

std::string run_id(const json& snapshot, RunMode mode) {
    // FNV-1a over the canonical dump.
    const std::string text = snapshot.dump() + "|" + to_string(mode);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 12);
}

std::string format_route(const Route& route) {
    std::string s;
    for (std::size_t i = 0; i < route.nodes.size(); ++i) {
        if (i > 0) {
            const auto& r = route.resources[i - 1];
            s += " -[" + std::to_string(r.technology) + ":" + std::to_string(r.subband) + "]-> ";
        }
        s += std::to_string(route.nodes[i]);
    }
    return s;
}

namespace {

constexpr double kMbps = 1e6;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json report_json(const EvalReport& r) {
    return json{{"mean_rate_mbps", r.mean_rate / kMbps},
                {"mean_delivered_rate_mbps", r.mean_delivered_rate / kMbps},
                {"delivery_ratio", r.delivery_ratio},
                {"p10_mbps", r.p10 / kMbps},
                {"p50_mbps", r.p50 / kMbps},
                {"p90_mbps", r.p90 / kMbps},
                {"topologies", r.episodes.size()}};
}

void write_episode_rows(std::ostream& out, const std::string& policy, const EvalReport& r) {
    for (std::size_t i = 0; i < r.episodes.size(); ++i) {
        const auto& e = r.episodes[i];
        out << i << ',' << policy << ',' << (e.delivered() ? 1 : 0) << ',' << fmt(e.rate / kMbps) << ','
            << e.route.hops() << ",\"" << format_route(e.route) << "\"\n";
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::filesystem::path checkpoint_path(const ExperimentConfig& c) {
    return c.checkpoint.empty() ? std::filesystem::path(c.output_dir) / "checkpoint.bin"
                                : std::filesystem::path(c.checkpoint);
}

QNet load_or_train(const Scenario& scenario, std::ostream& log, bool& trained) {
    const auto path = checkpoint_path(scenario.config());
    const auto shape = [&] {
        auto s = scenario.config().agent.network_shape();
        s.trunk = scenario.config().training.trunk;
        s.head = scenario.config().training.head;
        return s;
    }();
    if (std::filesystem::exists(path)) {
        trained = false;
        log << "loading checkpoint " << path.string() << "\n";
        return nn::load_checkpoint<AgentScalar>(path, &shape);
    }
    trained = true;
    log << "no checkpoint at " << path.string() << "; training " << scenario.config().training.episodes
        << " episodes\n";
    auto result = train_agent(scenario);
    nn::save_checkpoint(result.net, std::filesystem::path(scenario.config().output_dir) / "checkpoint.bin");
    return std::move(result.net);
}

json oracle_json(const OracleResult& r) {
    json resources = json::array();
    for (const auto& res : r.route.resources) resources.push_back({res.technology, res.subband});
    return json{{"rate_bps", r.rate},
                {"rate_mbps", r.rate / kMbps},
                {"nodes", r.route.nodes},
                {"resources", resources},
                {"routes_enumerated", r.routes_enumerated},
                {"partial_routes", r.partial_routes}};
}

} // namespace

json run(const ExperimentConfig& config, RunMode mode, std::ostream& log) {
    const Scenario scenario(config);
    const json snapshot = to_json(config);
    const std::filesystem::path out_dir(config.output_dir);
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "config.snapshot.json", snapshot.dump(2) + "\n");

    json summary{{"mode", to_string(mode)}, {"run_id", run_id(snapshot, mode)}, {"seed", config.seed},
                 {"eval_seed", config.eval_seed}};
    const AgentConfig agent = resolved_agent_config(scenario);

    switch (mode) {
    case RunMode::train: {
        std::ofstream csv(out_dir / "episodes.csv", std::ios::binary);
        csv << "episode,epsilon,reward_mbps,loss,hops,delivered\n";
        const auto total = config.training.episodes;
        auto result = train_agent(scenario, [&](const EpisodeLog& e) {
            csv << e.episode << ',' << fmt(e.epsilon) << ',' << fmt(e.reward / kMbps) << ',' << fmt(e.loss) << ','
                << e.hops << ',' << (e.delivered ? 1 : 0) << '\n';
            if (total >= 10 && (e.episode + 1) % (total / 10) == 0)
                log << "episode " << e.episode + 1 << "/" << total << " eps=" << e.epsilon << " loss=" << e.loss
                    << "\n";
        });
        nn::save_checkpoint(result.net, out_dir / "checkpoint.bin");

        // Last 10% of episodes.
        const std::size_t n = result.log.size();
        const std::size_t tail = n == 0 ? 0 : std::max<std::size_t>(1, n / 10);
        double tail_reward = 0.0, tail_delivered = 0.0;
        for (std::size_t i = n - tail; i < n; ++i) {
            tail_reward += result.log[i].reward;
            tail_delivered += result.log[i].delivered ? 1.0 : 0.0;
        }
        const double denom = std::max<double>(1.0, static_cast<double>(tail));
        summary["training"] = {{"episodes", total},
                               {"final_loss", n == 0 ? 0.0 : result.log.back().loss},
                               {"tail_mean_reward_mbps", tail_reward / denom / kMbps},
                               {"tail_delivery_ratio", tail_delivered / denom}};
        const auto report = evaluate(result.net, scenario.eval_topologies(config.eval_topologies), agent, config.workers);
        summary["evaluation"] = report_json(report);
        break;
    }
    case RunMode::eval: {
        const auto topologies = scenario.eval_topologies(config.eval_topologies);
        EvalReport report;
        if (config.policy == PolicyKind::dqn) {
            bool trained = false;
            const QNet net = load_or_train(scenario, log, trained);
            report = evaluate(net, topologies, agent, config.workers);
        } else {
            report = evaluate_policy(make_baseline_policy(config.policy), topologies, config.workers,
                                     config.training.max_hops);
        }
        std::ofstream csv(out_dir / "episodes.csv", std::ios::binary);
        csv << "topology,policy,delivered,rate_mbps,hops,route\n";
        write_episode_rows(csv, to_string(config.policy), report);
        summary["policy"] = to_string(config.policy);
        summary["evaluation"] = report_json(report);
        break;
    }
    case RunMode::bench: {
        const auto topologies = scenario.eval_topologies(config.eval_topologies);
        bool trained = false;
        const QNet net = load_or_train(scenario, log, trained);
        std::ofstream csv(out_dir / "episodes.csv", std::ios::binary);
        csv << "topology,policy,delivered,rate_mbps,hops,route\n";
        json table = json::array();
        for (PolicyKind kind : all_policies()) {
            const auto report = kind == PolicyKind::dqn
                                    ? evaluate(net, topologies, agent, config.workers)
                                    : evaluate_policy(make_baseline_policy(kind), topologies, config.workers,
                                                      config.training.max_hops);
            write_episode_rows(csv, to_string(kind), report);
            json row = report_json(report);
            row["policy"] = to_string(kind);
            table.push_back(row);
            log << std::left << std::setw(14) << to_string(kind) << " mean " << report.mean_rate / kMbps
                << " Mbit/s, delivered " << report.delivery_ratio << "\n";
        }
        const bool oracle_feasible = std::all_of(topologies.begin(), topologies.end(), [&](const Topology& t) {
            return t.num_active() <= config.oracle_max_nodes;
        });
        if (config.bench_oracle && oracle_feasible) {
            std::vector<EpisodeResult> optimal;
            for (const auto& topo : topologies) {
                const auto o = exhaustive_optimum(topo, {config.oracle_max_nodes, true});
                optimal.push_back({RouteStatus::delivered, o.route, o.rate, {}});
            }
            const auto report = EvalReport::summarize(std::move(optimal));
            write_episode_rows(csv, "oracle", report);
            json row = report_json(report);
            row["policy"] = "oracle";
            table.push_back(row);
            log << std::left << std::setw(14) << "oracle" << " mean " << report.mean_rate / kMbps << " Mbit/s\n";
        }
        summary["policies"] = table;
        break;
    }
    case RunMode::oracle: {
        const auto topologies = scenario.eval_topologies(config.oracle_topology + 1);
        const auto& topo = topologies.back();
        const auto result = exhaustive_optimum(topo, {config.oracle_max_nodes, true});
        summary["topology"] = config.oracle_topology;
        summary["active_nodes"] = topo.active_nodes;
        summary["optimum"] = oracle_json(result);
        std::ofstream csv(out_dir / "episodes.csv", std::ios::binary);
        csv << "topology,policy,delivered,rate_mbps,hops,route\n";
        csv << config.oracle_topology << ",oracle,1," << fmt(result.rate / kMbps) << ',' << result.route.hops()
            << ",\"" << format_route(result.route) << "\"\n";
        break;
    }
    }

    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

} // namespace hetnet
