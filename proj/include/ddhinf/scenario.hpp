#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddhinf/datasets.hpp"
#include "ddhinf/hinf_offline.hpp"
#include "ddhinf/hinf_online.hpp"
#include "ddhinf/lmi.hpp"
#include "ddhinf/plant_sim.hpp"

#include "json.hpp"

namespace ddhinf {
namespace scenario {

struct PlantSpec {
    std::string preset;  // "batch-reactor", or empty when matrices come from files
    std::string a_file, b_file, c_file, d_file;
    std::vector<double> x0;               // required for file-based plants
    std::optional<double> noise_bound;    // Upsilon = value * I, overrides the preset bound
};

struct EllipseSpec {
    std::vector<int> lengths = {2, 3, 8};
    bool grid = false;  // emit the membership map over the intersection
};

struct ScenarioConfig {
    PlantSpec plant;
    // experiment protocol
    int q = 100;
    int T = 8;
    int L = 8;
    double input_lo = -0.1;
    double input_hi = 0.1;
    std::string x0_policy = "preset-first";  // preset-first | all-random | all-preset
    double x0_range = 0.5;
    std::uint64_t seed = 1;
    // run selection
    std::string mode = "offline-batch";  // offline-batch | offline-iter | offline-min-gamma |
                                         // online | ellipse | baseline
    double gamma = 10.0;
    bool minimize_gamma = false;  // serialized as "gamma": "minimize"
    int steps = 100;              // online / evaluation rollout length
    std::string ordering = "collection";      // collection | shuffled
    std::string window_policy = "fixed";      // fixed | buffer-random
    bool online_lmi_only = false;
    EllipseSpec ellipse;
    lmi::SolverOptions solver;
    std::string out_dir = "out";
    /// When set, offline synthesis reads dataset_<i>.csv files from here
    /// instead of collecting fresh trajectories.
    std::string datasets_dir;

    void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);

/// Resolved plant + bound + initial state for a config.
sim::PlantSetup resolve_plant(const ScenarioConfig& config);

sim::ExperimentProtocol resolve_protocol(const ScenarioConfig& config);

/// Datasets per the config protocol (collected in memory, deterministic).
std::vector<Trajectory> collect_trajectories(const ScenarioConfig& config);

// Runners. Each writes its files under config.out_dir and returns the paths.
std::vector<std::string> cmd_ellipse(const ScenarioConfig& config);
std::vector<std::string> cmd_collect(const ScenarioConfig& config);
std::vector<std::string> cmd_offline(const ScenarioConfig& config);
std::vector<std::string> cmd_online(const ScenarioConfig& config);
std::vector<std::string> cmd_baseline(const ScenarioConfig& config);
std::vector<std::string> cmd_compare(const ScenarioConfig& config);

/// Dispatch on config.mode (the `run` entry point used by tests).
std::vector<std::string> run_scenario(const ScenarioConfig& config);

nlohmann::json controller_result_to_json(const hinf::ControllerResult& result);

/// Verbosity from the DDC_LOG environment variable (0 = quiet).
int log_level();
void log_line(int level, const std::string& message);

}  // namespace scenario
}  // namespace ddhinf
