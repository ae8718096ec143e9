#include "hetnet/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <utility>

int main(int argc, char** argv) {
    CLI::App app{"Hop-by-hop routing simulator for heterogeneous multi-hop wireless networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<std::string> checkpoint;
    std::vector<std::string> overrides;

    const std::pair<const char*, const char*> modes[] = {
        {"train", "Train the DQN agent and write a checkpoint"},
        {"eval", "Evaluate the configured policy on held-out topologies"},
        {"bench", "Evaluate every policy and the oracle on held-out topologies"},
        {"oracle", "Brute-force optimum for one held-out topology"},
    };
    for (const auto& [mode, help] : modes) {
        auto* sub = app.add_subcommand(mode, help);
        sub->add_option("--config", config_path, "JSON experiment config (desk defaults when omitted)");
        sub->add_option("--seed", seed, "Training seed");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--workers", workers, "Evaluation worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--checkpoint", checkpoint, "Network checkpoint for eval/bench");
        sub->add_option("--set", overrides, "Override a config key, e.g. --set training.episodes=2000");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) doc = hetnet::to_json(hetnet::load_config(config_path));
        if (seed) doc["seed"] = *seed;
        if (out_dir) doc["output_dir"] = *out_dir;
        if (workers) doc["workers"] = *workers;
        if (checkpoint) doc["checkpoint"] = *checkpoint;
        for (const auto& o : overrides) hetnet::apply_override(doc, o);
        const auto config = hetnet::config_from_json(doc);

        const auto mode = hetnet::parse_mode(app.get_subcommands().front()->get_name());
        const auto summary = hetnet::run(config, mode, std::cerr);
        if (mode == hetnet::RunMode::oracle)
            std::cout << summary.at("optimum").dump(2) << "\n";
        else
            std::cout << summary.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "route-sim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
