#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddhinf/scenario.hpp"

using namespace ddhinf;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    bool minimize = false;
    std::optional<int> q;
    std::optional<int> T;
    std::optional<int> L;
    std::optional<int> steps;
    std::optional<double> noise_bound;
    std::optional<std::string> preset;
    std::optional<std::string> out_dir;
    std::optional<std::string> mode;
    std::optional<std::string> datasets_dir;
    bool grid = false;
};

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON scenario config; flags override its fields");
    cmd->add_option("--seed", ov.seed, "base seed for data collection and disturbances");
    cmd->add_option("--gamma", ov.gamma, "attenuation level");
    cmd->add_flag("--minimize-gamma", ov.minimize, "minimize the attenuation level per iteration");
    cmd->add_option("--q", ov.q, "number of datasets");
    cmd->add_option("--T", ov.T, "dataset length");
    cmd->add_option("--L", ov.L, "online window length");
    cmd->add_option("--steps", ov.steps, "rollout / online loop length");
    cmd->add_option("--noise-bound", ov.noise_bound, "disturbance bound: Upsilon = value * I");
    cmd->add_option("--preset", ov.preset, "plant preset (batch-reactor)");
    cmd->add_option("--out", ov.out_dir, "output directory");
}

scenario::ScenarioConfig build_config(const Overrides& ov, const std::string& default_mode) {
    scenario::ScenarioConfig config;
    if (!ov.config_path.empty()) config = scenario::load_config(ov.config_path);
    if (config.plant.preset.empty() && config.plant.a_file.empty()) config.plant.preset = "batch-reactor";
    config.mode = ov.mode.value_or(default_mode);
    if (ov.seed) config.seed = *ov.seed;
    if (ov.gamma) config.gamma = *ov.gamma;
    if (ov.minimize) config.minimize_gamma = true;
    if (ov.q) config.q = *ov.q;
    if (ov.T) config.T = *ov.T;
    if (ov.L) config.L = *ov.L;
    if (ov.steps) config.steps = *ov.steps;
    if (ov.noise_bound) config.plant.noise_bound = *ov.noise_bound;
    if (ov.preset) config.plant.preset = *ov.preset;
    if (ov.out_dir) config.out_dir = *ov.out_dir;
    if (ov.datasets_dir) config.datasets_dir = *ov.datasets_dir;
    if (ov.grid) config.ellipse.grid = true;
    config.validate();
    return config;
}

int run_guarded(const std::function<std::vector<std::string>()>& body) {
    try {
        const auto files = body();
        for (const auto& f : files) std::cout << f << "\n";
        return 0;
    } catch (const Error& e) {
        std::string tag = "error";
        if (dynamic_cast<const SynthesisInfeasible*>(&e)) tag = "synthesis-infeasible";
        else if (dynamic_cast<const InfeasibleSeed*>(&e)) tag = "infeasible-seed";
        else if (dynamic_cast<const ContractViolation*>(&e)) tag = "contract-violation";
        else if (dynamic_cast<const WindowUnderflow*>(&e)) tag = "window-underflow";
        else if (dynamic_cast<const NumericalFailure*>(&e)) tag = "numerical-failure";
        std::cerr << nlohmann::json{{"error", tag}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "unexpected"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven H-infinity state-feedback synthesis toolkit"};
    app.require_subcommand(1);

    Overrides ov;

    auto* ellipse = app.add_subcommand("ellipse", "Scalar consistency sets for the built-in example data");
    add_common(ellipse, ov);
    ellipse->add_flag("--grid", ov.grid, "also emit the intersection membership grid");

    auto* collect = app.add_subcommand("collect", "Generate experiment datasets as CSV files");
    add_common(collect, ov);

    auto* offline = app.add_subcommand("offline", "Offline synthesis from collected datasets");
    add_common(offline, ov);
    offline->add_option("--mode", ov.mode,
                        "offline-batch | offline-iter | offline-min-gamma (default offline-batch)");
    offline->add_option("--datasets", ov.datasets_dir, "directory with dataset_<i>.csv files to load");

    auto* online_cmd = app.add_subcommand("online", "Closed-loop run with per-step synthesis");
    add_common(online_cmd, ov);

    auto* baseline = app.add_subcommand("baseline", "Known-model synthesis for comparison");
    add_common(baseline, ov);

    auto* compare = app.add_subcommand("compare", "Run all controllers and emit comparison curves");
    add_common(compare, ov);

    CLI11_PARSE(app, argc, argv);

    if (ellipse->parsed())
        return run_guarded([&] { return scenario::cmd_ellipse(build_config(ov, "ellipse")); });
    if (collect->parsed())
        return run_guarded([&] { return scenario::cmd_collect(build_config(ov, "offline-batch")); });
    if (offline->parsed())
        return run_guarded([&] { return scenario::cmd_offline(build_config(ov, "offline-batch")); });
    if (online_cmd->parsed())
        return run_guarded([&] { return scenario::cmd_online(build_config(ov, "online")); });
    if (baseline->parsed())
        return run_guarded([&] { return scenario::cmd_baseline(build_config(ov, "baseline")); });
    if (compare->parsed())
        return run_guarded([&] { return scenario::cmd_compare(build_config(ov, "offline-batch")); });
    return 1;
}
