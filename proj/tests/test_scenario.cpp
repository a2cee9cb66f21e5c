#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ddhinf/scenario.hpp"

using namespace ddhinf;
using namespace ddhinf::scenario;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(bool(is));
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("ddhinf_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ScenarioConfig demo_config(const std::string& out_dir) {
    ScenarioConfig config;
    config.plant.preset = "batch-reactor";
    config.plant.noise_bound = 1e-6;
    config.q = 2;
    config.T = 8;
    config.seed = 11;
    config.steps = 20;
    config.gamma = 10.0;
    config.out_dir = out_dir;
    return config;
}

}  // namespace

TEST_CASE("config round trip is the identity") {
    ScenarioConfig config = demo_config("somewhere");
    config.mode = "offline-iter";
    config.minimize_gamma = false;
    config.ordering = "shuffled";
    config.ellipse.lengths = {2, 8};
    config.solver.feas_tol = 3e-8;
    config.datasets_dir = "data";

    const nlohmann::json once = config_to_json(config);
    const ScenarioConfig back = config_from_json(once);
    const nlohmann::json twice = config_to_json(back);
    CHECK(once == twice);

    SUBCASE("the minimize spelling survives") {
        config.minimize_gamma = true;
        const nlohmann::json j = config_to_json(config);
        CHECK(j.at("gamma") == "minimize");
        CHECK(config_from_json(j).minimize_gamma);
    }
}

TEST_CASE("config validation rejects bad fields") {
    ScenarioConfig config = demo_config("x");
    config.mode = "nonsense";
    CHECK_THROWS_AS(config.validate(), Error);
    config.mode = "offline-batch";
    config.q = 0;
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    const fs::path dir_a = temp_dir("repro_a");
    const fs::path dir_b = temp_dir("repro_b");

    ScenarioConfig a = demo_config(dir_a.string());
    ScenarioConfig b = demo_config(dir_b.string());
    const auto files_a = cmd_offline(a);
    const auto files_b = cmd_offline(b);
    REQUIRE(files_a.size() == files_b.size());
    for (std::size_t i = 0; i < files_a.size(); ++i) CHECK(slurp(files_a[i]) == slurp(files_b[i]));

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("collect writes the dataset layout and offline can read it back") {
    const fs::path data_dir = temp_dir("datasets");
    ScenarioConfig collect_cfg = demo_config(data_dir.string());
    const auto files = cmd_collect(collect_cfg);
    CHECK(fs::exists(data_dir / "dataset_1.csv"));
    CHECK(fs::exists(data_dir / "dataset_2.csv"));
    CHECK(fs::exists(data_dir / "datasets_meta.json"));
    CHECK(files.size() == 3);

    const fs::path out_dir = temp_dir("from_files");
    ScenarioConfig offline_cfg = demo_config(out_dir.string());
    offline_cfg.datasets_dir = data_dir.string();
    const auto out_files = cmd_offline(offline_cfg);
    CHECK(fs::exists(out_dir / "result.json"));

    // loading the persisted data gives the same gain as the in-memory path
    const fs::path out_dir2 = temp_dir("in_memory");
    ScenarioConfig mem_cfg = demo_config(out_dir2.string());
    const auto mem_files = cmd_offline(mem_cfg);
    CHECK(slurp((out_dir / "gain_F.csv").string()) == slurp((out_dir2 / "gain_F.csv").string()));

    fs::remove_all(data_dir);
    fs::remove_all(out_dir);
    fs::remove_all(out_dir2);
}

TEST_CASE("ellipse emission") {
    const fs::path dir = temp_dir("ellipse");
    ScenarioConfig config;
    config.mode = "ellipse";
    config.out_dir = dir.string();
    config.ellipse.grid = true;
    const auto files = cmd_ellipse(config);

    CHECK(fs::exists(dir / "ellipse_T2_boundary.csv"));
    CHECK(fs::exists(dir / "ellipse_T3_boundary.csv"));
    CHECK(fs::exists(dir / "ellipse_T8_boundary.csv"));
    CHECK(fs::exists(dir / "ellipse_sets.json"));
    CHECK(fs::exists(dir / "ellipse_grid.csv"));

    // 360 boundary samples plus the header
    const std::string boundary = slurp((dir / "ellipse_T8_boundary.csv").string());
    CHECK(std::count(boundary.begin(), boundary.end(), '\n') == 361);

    nlohmann::json sets;
    std::istringstream(slurp((dir / "ellipse_sets.json").string())) >> sets;
    REQUIRE(sets.size() == 3);
    double area3 = 0.0, area8 = 0.0;
    for (const auto& entry : sets) {
        if (entry.at("T") == 3) area3 = entry.at("area").get<double>();
        if (entry.at("T") == 8) area8 = entry.at("area").get<double>();
    }
    CHECK(area8 > area3);

    const std::string grid = slurp((dir / "ellipse_grid.csv").string());
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 400 * 400 + 1);

    fs::remove_all(dir);
}

TEST_CASE("online scenario emits trace, certificates and metrics") {
    const fs::path dir = temp_dir("online");
    ScenarioConfig config = demo_config(dir.string());
    config.mode = "online";
    config.steps = 5;
    const auto files = cmd_online(config);
    CHECK(fs::exists(dir / "online_trace.csv"));
    CHECK(fs::exists(dir / "online_certificates.json"));
    CHECK(fs::exists(dir / "metrics.json"));

    const std::string trace = slurp((dir / "online_trace.csv").string());
    CHECK(trace.rfind("k,eta,alpha,beta,status,solve_ms,x1", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 6);  // header + 5 steps

    fs::remove_all(dir);
}

TEST_CASE("run_scenario dispatches on the mode") {
    const fs::path dir = temp_dir("dispatch");
    ScenarioConfig config = demo_config(dir.string());
    config.mode = "baseline";
    const auto files = run_scenario(config);
    CHECK(fs::exists(dir / "result.json"));
    fs::remove_all(dir);
}
