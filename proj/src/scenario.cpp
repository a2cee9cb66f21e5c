#include "ddhinf/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace scenario {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("DDC_LOG");
        return env ? std::atoi(env) : 0;
    }();
    return level;
}

void log_line(int level, const std::string& message) {
    if (log_level() >= level) std::cerr << "[ddhinf] " << message << "\n";
}

namespace {

void write_text(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << content;
}

std::string json_dump(const json& j) { return j.dump(2) + "\n"; }

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string mat_to_csv(const Mat& m) {
    std::ostringstream os;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << format_double(m(i, j));
        }
        os << "\n";
    }
    return os.str();
}

Mat mat_from_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open matrix file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("empty matrix file " + path);
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(m.cols()))
            throw Error("ragged matrix file " + path);
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

std::string out_path(const ScenarioConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

double output_energy(const Trajectory& traj) {
    double e = 0.0;
    for (const auto& yk : traj.y)
        for (double v : yk) e += v * v;
    return e;
}

double state_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

void ScenarioConfig::validate() const {
    static const std::vector<std::string> modes = {"offline-batch", "offline-iter", "offline-min-gamma",
                                                   "online", "ellipse", "baseline"};
    bool mode_ok = false;
    for (const auto& m : modes) mode_ok = mode_ok || m == mode;
    if (!mode_ok) throw Error("unknown mode: " + mode);
    if (plant.preset.empty() && (plant.a_file.empty() || plant.b_file.empty() || plant.c_file.empty()))
        if (mode != "ellipse") throw Error("config needs a plant preset or matrix files");
    if (!plant.preset.empty() && plant.preset != "batch-reactor")
        throw Error("unknown preset: " + plant.preset);
    if (q < 1 || T < 1 || L < 1) throw Error("protocol needs q, T, L >= 1");
    if (input_hi < input_lo) throw Error("input range is inverted");
    if (!minimize_gamma && gamma <= 0.0) throw Error("gamma must be positive");
    if (x0_policy != "preset-first" && x0_policy != "all-random" && x0_policy != "all-preset")
        throw Error("unknown x0 policy: " + x0_policy);
    if (ordering != "collection" && ordering != "shuffled") throw Error("unknown ordering: " + ordering);
    if (window_policy != "fixed" && window_policy != "buffer-random")
        throw Error("unknown window policy: " + window_policy);
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        c.plant.preset = p.value("preset", "");
        c.plant.a_file = p.value("A", "");
        c.plant.b_file = p.value("B", "");
        c.plant.c_file = p.value("C", "");
        c.plant.d_file = p.value("D", "");
        if (p.contains("x0")) c.plant.x0 = p.at("x0").get<std::vector<double>>();
        if (p.contains("noise_bound")) c.plant.noise_bound = p.at("noise_bound").get<double>();
    }
    if (j.contains("protocol")) {
        const auto& p = j.at("protocol");
        c.q = p.value("q", c.q);
        c.T = p.value("T", c.T);
        c.L = p.value("L", c.L);
        if (p.contains("input_range")) {
            const auto r = p.at("input_range").get<std::vector<double>>();
            if (r.size() != 2) throw Error("input_range must hold two numbers");
            c.input_lo = r[0];
            c.input_hi = r[1];
        }
        c.x0_policy = p.value("x0_policy", c.x0_policy);
        c.x0_range = p.value("x0_range", c.x0_range);
        c.seed = p.value("seed", c.seed);
    }
    c.mode = j.value("mode", c.mode);
    if (j.contains("gamma")) {
        if (j.at("gamma").is_string()) {
            if (j.at("gamma").get<std::string>() != "minimize")
                throw Error("gamma must be a number or \"minimize\"");
            c.minimize_gamma = true;
        } else {
            c.gamma = j.at("gamma").get<double>();
        }
    }
    c.steps = j.value("steps", c.steps);
    c.ordering = j.value("ordering", c.ordering);
    c.window_policy = j.value("window_policy", c.window_policy);
    c.online_lmi_only = j.value("online_lmi_only", c.online_lmi_only);
    if (j.contains("ellipse")) {
        const auto& e = j.at("ellipse");
        if (e.contains("lengths")) c.ellipse.lengths = e.at("lengths").get<std::vector<int>>();
        c.ellipse.grid = e.value("grid", c.ellipse.grid);
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.feas_tol = s.value("feas_tol", c.solver.feas_tol);
        c.solver.margin_rel = s.value("margin", c.solver.margin_rel);
        c.solver.eps_pd = s.value("eps_pd", c.solver.eps_pd);
        c.solver.max_newton = s.value("max_newton", c.solver.max_newton);
        c.solver.bisection_steps = s.value("bisection_steps", c.solver.bisection_steps);
        c.solver.gap_tol = s.value("gap_tol", c.solver.gap_tol);
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    c.datasets_dir = j.value("datasets_dir", c.datasets_dir);
    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    json plant;
    if (!c.plant.preset.empty()) plant["preset"] = c.plant.preset;
    if (!c.plant.a_file.empty()) plant["A"] = c.plant.a_file;
    if (!c.plant.b_file.empty()) plant["B"] = c.plant.b_file;
    if (!c.plant.c_file.empty()) plant["C"] = c.plant.c_file;
    if (!c.plant.d_file.empty()) plant["D"] = c.plant.d_file;
    if (!c.plant.x0.empty()) plant["x0"] = c.plant.x0;
    if (c.plant.noise_bound) plant["noise_bound"] = *c.plant.noise_bound;
    j["plant"] = std::move(plant);
    j["protocol"] = {{"q", c.q},
                     {"T", c.T},
                     {"L", c.L},
                     {"input_range", {c.input_lo, c.input_hi}},
                     {"x0_policy", c.x0_policy},
                     {"x0_range", c.x0_range},
                     {"seed", c.seed}};
    j["mode"] = c.mode;
    if (c.minimize_gamma)
        j["gamma"] = "minimize";
    else
        j["gamma"] = c.gamma;
    j["steps"] = c.steps;
    j["ordering"] = c.ordering;
    j["window_policy"] = c.window_policy;
    j["online_lmi_only"] = c.online_lmi_only;
    j["ellipse"] = {{"lengths", c.ellipse.lengths}, {"grid", c.ellipse.grid}};
    j["solver"] = {{"feas_tol", c.solver.feas_tol},     {"margin", c.solver.margin_rel},
                   {"eps_pd", c.solver.eps_pd},         {"max_newton", c.solver.max_newton},
                   {"bisection_steps", c.solver.bisection_steps}, {"gap_tol", c.solver.gap_tol}};
    j["out_dir"] = c.out_dir;
    if (!c.datasets_dir.empty()) j["datasets_dir"] = c.datasets_dir;
    return j;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path);
    json j;
    is >> j;
    return config_from_json(j);
}

sim::PlantSetup resolve_plant(const ScenarioConfig& config) {
    sim::PlantSetup setup = [&] {
        if (config.plant.preset == "batch-reactor") return sim::batch_reactor();
        const Mat a = mat_from_csv_file(config.plant.a_file);
        const Mat b = mat_from_csv_file(config.plant.b_file);
        const Mat c = mat_from_csv_file(config.plant.c_file);
        const Mat d = config.plant.d_file.empty() ? Mat(c.rows(), b.cols())
                                                  : mat_from_csv_file(config.plant.d_file);
        LtiSystem sys(a, b, c, d);
        if (static_cast<int>(config.plant.x0.size()) != sys.n())
            throw Error("plant x0 must have n entries");
        if (!config.plant.noise_bound) throw Error("file-based plants need plant.noise_bound");
        return sim::PlantSetup{sys, DisturbanceBound(SymMat(*config.plant.noise_bound *
                                                            Mat::identity(sys.r()))),
                               config.plant.x0};
    }();
    if (config.plant.noise_bound && config.plant.preset == "batch-reactor")
        setup.bound = DisturbanceBound(SymMat(*config.plant.noise_bound * Mat::identity(setup.sys.r())));
    return setup;
}

sim::ExperimentProtocol resolve_protocol(const ScenarioConfig& config) {
    sim::ExperimentProtocol protocol;
    protocol.q = config.q;
    protocol.T = config.T;
    protocol.input_lo = config.input_lo;
    protocol.input_hi = config.input_hi;
    protocol.x0_range = config.x0_range;
    protocol.seed = config.seed;
    if (config.x0_policy == "all-random")
        protocol.x0_policy = sim::ExperimentProtocol::X0Policy::AllRandom;
    else if (config.x0_policy == "all-preset")
        protocol.x0_policy = sim::ExperimentProtocol::X0Policy::AllPreset;
    else
        protocol.x0_policy = sim::ExperimentProtocol::X0Policy::PresetFirstThenRandom;
    return protocol;
}

std::vector<Trajectory> collect_trajectories(const ScenarioConfig& config) {
    if (!config.datasets_dir.empty()) {
        std::vector<Trajectory> out;
        for (int i = 1; i <= config.q; ++i) {
            const fs::path path = fs::path(config.datasets_dir) / ("dataset_" + std::to_string(i) + ".csv");
            if (!fs::exists(path))
                throw Error("dataset file missing: " + path.string());
            out.push_back(read_trajectory_csv(path.string()));
        }
        return out;
    }
    const sim::PlantSetup plant = resolve_plant(config);
    return sim::collect_datasets(plant.sys, resolve_protocol(config), plant.bound, plant.x0);
}

json controller_result_to_json(const hinf::ControllerResult& result) {
    json iterations = json::array();
    for (const auto& it : result.iterations)
        iterations.push_back({{"i", it.i},
                              {"alpha", it.alpha},
                              {"beta", it.beta},
                              {"gamma_i", it.gamma_i},
                              {"fallback", it.fallback}});
    const char* status = result.solution.status == lmi::SolveStatus::Feasible ? "feasible"
                         : result.solution.status == lmi::SolveStatus::Infeasible ? "infeasible"
                                                                                   : "max-iterations";
    return json{{"F", mat_to_json(result.F)},
                {"Gamma", mat_to_json(result.Gamma.mat())},
                {"S", mat_to_json(result.S)},
                {"gamma", result.gamma_achieved},
                {"taus", result.taus},
                {"iterations", std::move(iterations)},
                {"solver",
                 {{"status", status},
                  {"phase1_slack", result.solution.phase1_slack},
                  {"newton_iterations", result.solution.newton_iterations},
                  {"barrier_stages", result.solution.barrier_stages},
                  {"note", result.solution.note}}}};
}

namespace {

std::vector<QmiBlock> blocks_from(const std::vector<Trajectory>& trajectories,
                                  const DisturbanceBound& bound) {
    std::vector<QmiBlock> qmis;
    qmis.reserve(trajectories.size());
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        QmiBlock q = build_qmi(build_data_matrices(trajectories[i]), bound);
        q.provenance = QmiProvenance::OfflineIndex;
        q.index = static_cast<int>(i) + 1;
        qmis.push_back(std::move(q));
    }
    return qmis;
}

/// Closed-loop evaluation from the preset initial state plus summary metrics.
json evaluate_gain(const ScenarioConfig& config, const sim::PlantSetup& plant, const Mat& gain,
                   double gamma, Trajectory* out_traj) {
    sim::DisturbanceSampler sampler(plant.bound, sim::DisturbanceMode::UniformBall,
                                    Rng::derive_seed(config.seed, 0xe7a1ULL));
    const Trajectory traj = sim::rollout_gain(plant.sys, gain, plant.x0, config.steps, sampler);
    json metrics;
    metrics["rho_closed_loop"] = spectral_radius(plant.sys.A + plant.sys.B * gain);
    metrics["output_energy"] = output_energy(traj);
    metrics["state_final_norm"] = state_norm(traj.x.back());
    metrics["state_initial_norm"] = state_norm(traj.x.front());
    metrics["gamma"] = gamma;
    if (out_traj) *out_traj = traj;
    return metrics;
}

std::string trace_csv(const std::vector<online::StepRecord>& records, int n, int m, int p, int r) {
    std::ostringstream os;
    os << "k,eta,alpha,beta,status,solve_ms";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= m; ++i) os << ",u" << i;
    for (int i = 1; i <= p; ++i) os << ",y" << i;
    for (int i = 1; i <= r; ++i) os << ",w" << i;
    os << "\n";
    for (const auto& rec : records) {
        os << rec.k << "," << format_double(rec.eta) << "," << format_double(rec.alpha) << ","
           << format_double(rec.beta) << "," << rec.status << "," << format_double(rec.solve_ms);
        for (double v : rec.x) os << "," << format_double(v);
        for (double v : rec.u) os << "," << format_double(v);
        for (double v : rec.y) os << "," << format_double(v);
        for (double v : rec.w) os << "," << format_double(v);
        os << "\n";
    }
    return os.str();
}

}  // namespace

std::vector<std::string> cmd_ellipse(const ScenarioConfig& config) {
    const auto& u = scalar_example_inputs();
    const auto& x = scalar_example_states();
    std::vector<std::string> files;

    json summary = json::array();
    std::vector<ConicSection> sections;
    for (int T : config.ellipse.lengths) {
        const ConicSection c = scalar_consistency_set(u, x, T, 0.5);
        sections.push_back(c);
        json entry{{"T", T},
                   {"coefficients",
                    {{"c0", c.c0}, {"ca", c.ca}, {"cb", c.cb}, {"caa", c.caa}, {"cab", c.cab}, {"cbb", c.cbb}}},
                   {"bounded", c.bounded()}};
        if (const auto area = c.area()) entry["area"] = *area;
        summary.push_back(std::move(entry));

        const auto pts = c.boundary_points(360);
        std::ostringstream os;
        os << "a,b\n";
        for (const auto& [a, b] : pts) os << format_double(a) << "," << format_double(b) << "\n";
        const std::string path = out_path(config, "ellipse_T" + std::to_string(T) + "_boundary.csv");
        write_text(path, os.str());
        files.push_back(path);
    }
    const std::string coeff_path = out_path(config, "ellipse_sets.json");
    write_text(coeff_path, json_dump(summary));
    files.push_back(coeff_path);

    if (config.ellipse.grid) {
        std::ostringstream os;
        os << "a,b";
        for (int T : config.ellipse.lengths) os << ",in_T" << T;
        os << ",in_all\n";
        const int cells = 400;
        for (int i = 0; i < cells; ++i) {
            for (int j = 0; j < cells; ++j) {
                const double a = -1.0 + 3.0 * (i + 0.5) / cells;
                const double b = -1.0 + 3.0 * (j + 0.5) / cells;
                os << format_double(a) << "," << format_double(b);
                bool all = true;
                for (const auto& c : sections) {
                    const bool inside = c.evaluate(a, b) <= 0.0;
                    os << "," << (inside ? 1 : 0);
                    all = all && inside;
                }
                os << "," << (all ? 1 : 0) << "\n";
            }
        }
        const std::string grid_path = out_path(config, "ellipse_grid.csv");
        write_text(grid_path, os.str());
        files.push_back(grid_path);
    }
    return files;
}

std::vector<std::string> cmd_collect(const ScenarioConfig& config) {
    const sim::PlantSetup plant = resolve_plant(config);
    const auto trajectories = collect_trajectories(config);
    log_line(1, "collected " + std::to_string(trajectories.size()) + " trajectories");
    std::vector<std::string> files;
    json meta;
    meta["protocol"] = config_to_json(config)["protocol"];
    meta["noise_bound_diag"] = plant.bound.Upsilon(0, 0);
    json x0s = json::array();
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const std::string path = out_path(config, "dataset_" + std::to_string(i + 1) + ".csv");
        write_text(path, trajectory_to_csv(trajectories[i], plant.sys.n(), plant.sys.m(), plant.sys.p()));
        files.push_back(path);
        x0s.push_back(trajectories[i].x.front());
    }
    meta["initial_states"] = std::move(x0s);
    const std::string meta_path = out_path(config, "datasets_meta.json");
    write_text(meta_path, json_dump(meta));
    files.push_back(meta_path);
    return files;
}

namespace {

std::vector<std::string> emit_controller(const ScenarioConfig& config, const sim::PlantSetup& plant,
                                         const hinf::ControllerResult& result) {
    std::vector<std::string> files;
    const std::string result_path = out_path(config, "result.json");
    write_text(result_path, json_dump(controller_result_to_json(result)));
    files.push_back(result_path);
    for (const auto& [name, mat] :
         {std::pair<std::string, const Mat&>{"gain_F.csv", result.F},
          std::pair<std::string, const Mat&>{"gain_S.csv", result.S},
          std::pair<std::string, const Mat&>{"gain_Gamma.csv", result.Gamma.mat()}}) {
        const std::string path = out_path(config, name);
        write_text(path, mat_to_csv(mat));
        files.push_back(path);
    }
    Trajectory eval;
    const json metrics = evaluate_gain(config, plant, result.F, result.gamma_achieved, &eval);
    const std::string metrics_path = out_path(config, "metrics.json");
    write_text(metrics_path, json_dump(metrics));
    files.push_back(metrics_path);
    const std::string eval_path = out_path(config, "eval_rollout.csv");
    write_text(eval_path, trajectory_to_csv(eval, plant.sys.n(), plant.sys.m(), plant.sys.p()));
    files.push_back(eval_path);
    return files;
}

}  // namespace

std::vector<std::string> cmd_offline(const ScenarioConfig& config) {
    const sim::PlantSetup plant = resolve_plant(config);
    const auto qmis = blocks_from(collect_trajectories(config), plant.bound);
    const hinf::PlantDims dims{plant.sys.n(), plant.sys.m(), plant.sys.p()};

    hinf::SynthesisConfig syn;
    syn.gamma = config.gamma;
    syn.minimize_gamma = config.minimize_gamma;
    syn.solver = config.solver;
    syn.ordering = config.ordering == "shuffled" ? hinf::DatasetOrdering::Shuffled
                                                 : hinf::DatasetOrdering::Collection;
    syn.shuffle_seed = config.seed;

    hinf::ControllerResult result;
    if (config.mode == "offline-min-gamma" || config.minimize_gamma) {
        syn.minimize_gamma = true;
        result = hinf::minimize_gamma_synthesize(dims, qmis, syn);
    } else if (config.mode == "offline-iter") {
        result = hinf::iterative_synthesize(dims, qmis, syn);
    } else {
        result = hinf::batch_synthesize(dims, qmis, syn);
    }
    log_line(1, "offline synthesis done, gamma " + std::to_string(result.gamma_achieved));

    std::vector<std::string> files = emit_controller(config, plant, result);
    if (config.minimize_gamma || config.mode == "offline-min-gamma") {
        std::ostringstream os;
        os << "i,gamma_i\n";
        for (const auto& it : result.iterations) os << it.i << "," << format_double(it.gamma_i) << "\n";
        const std::string path = out_path(config, "gamma_sequence.csv");
        write_text(path, os.str());
        files.push_back(path);
    }
    return files;
}

std::vector<std::string> cmd_online(const ScenarioConfig& config) {
    const sim::PlantSetup plant = resolve_plant(config);
    online::OnlineConfig oc;
    oc.gamma = config.gamma;
    oc.window_length = config.L;
    oc.solver = config.solver;
    oc.window_policy = config.window_policy == "buffer-random" ? online::WindowPolicy::BufferRandom
                                                               : online::WindowPolicy::Fixed;
    oc.window_seed = Rng::derive_seed(config.seed, 0x77ULL);
    oc.lmi_only_unsafe = config.online_lmi_only;

    const Trajectory pre = online::collect_pre_window(plant.sys, plant.bound, config.L, config.input_lo,
                                                      config.input_hi, plant.x0, config.seed);
    sim::DisturbanceSampler sampler(plant.bound, sim::DisturbanceMode::UniformBall,
                                    Rng::derive_seed(config.seed, 0x0d1eULL));
    const online::OnlineRun run = online::run_online(plant.sys, plant.bound, pre, config.steps, oc, sampler);
    log_line(1, "online run finished: " + std::to_string(run.records.size()) + " steps, " +
                    std::to_string(run.fallback_events) + " fallbacks");

    std::vector<std::string> files;
    const std::string trace_path = out_path(config, "online_trace.csv");
    write_text(trace_path,
               trace_csv(run.records, plant.sys.n(), plant.sys.m(), plant.sys.p(), plant.sys.r()));
    files.push_back(trace_path);

    json sidecar = json::array();
    for (const auto& rec : run.records)
        sidecar.push_back({{"k", rec.k},
                           {"F", mat_to_json(rec.F)},
                           {"Gamma", mat_to_json(rec.Gamma.mat())},
                           {"S", mat_to_json(rec.S)},
                           {"status", rec.status}});
    const std::string sidecar_path = out_path(config, "online_certificates.json");
    write_text(sidecar_path, json_dump(sidecar));
    files.push_back(sidecar_path);

    json metrics;
    metrics["steps"] = static_cast<int>(run.records.size());
    metrics["fallback_events"] = run.fallback_events;
    metrics["violation_events"] = run.violation_events;
    double energy = 0.0;
    for (const auto& rec : run.records)
        for (double v : rec.y) energy += v * v;
    metrics["output_energy"] = energy;
    metrics["state_final_norm"] = run.records.empty() ? 0.0 : state_norm(run.records.back().x);
    metrics["final_gain_rho"] = spectral_radius(plant.sys.A + plant.sys.B * run.final_gain);
    const std::string metrics_path = out_path(config, "metrics.json");
    write_text(metrics_path, json_dump(metrics));
    files.push_back(metrics_path);
    return files;
}

std::vector<std::string> cmd_baseline(const ScenarioConfig& config) {
    const sim::PlantSetup plant = resolve_plant(config);
    const hinf::ControllerResult result = sim::model_based_baseline(plant.sys, config.gamma, config.solver);
    return emit_controller(config, plant, result);
}

std::vector<std::string> cmd_compare(const ScenarioConfig& config) {
    const sim::PlantSetup plant = resolve_plant(config);
    const hinf::PlantDims dims{plant.sys.n(), plant.sys.m(), plant.sys.p()};
    const auto trajectories = collect_trajectories(config);
    const auto qmis = blocks_from(trajectories, plant.bound);

    hinf::SynthesisConfig syn;
    syn.gamma = config.gamma;
    syn.solver = config.solver;

    struct Entry {
        std::string label;
        Trajectory traj;
        json metrics;
    };
    std::vector<Entry> entries;

    const auto run_static = [&](const std::string& label, const Mat& gain) {
        Entry e;
        e.label = label;
        e.metrics = evaluate_gain(config, plant, gain, config.gamma, &e.traj);
        entries.push_back(std::move(e));
    };

    run_static("ddc_q1", hinf::batch_synthesize(dims, {qmis.front()}, syn).F);
    run_static("ddc_q" + std::to_string(config.q), hinf::batch_synthesize(dims, qmis, syn).F);
    run_static("offline_ddc", hinf::iterative_synthesize(dims, qmis, syn).F);
    run_static("mbc", sim::model_based_baseline(plant.sys, config.gamma, config.solver).F);

    // the online controller is its own rollout (time-varying gains)
    {
        online::OnlineConfig oc;
        oc.gamma = config.gamma;
        oc.window_length = config.L;
        oc.solver = config.solver;
        const Trajectory pre = online::collect_pre_window(plant.sys, plant.bound, config.L,
                                                          config.input_lo, config.input_hi, plant.x0,
                                                          config.seed);
        sim::DisturbanceSampler sampler(plant.bound, sim::DisturbanceMode::UniformBall,
                                        Rng::derive_seed(config.seed, 0xe7a1ULL));
        const online::OnlineRun run = online::run_online(plant.sys, plant.bound, pre, config.steps, oc, sampler);
        Entry e;
        e.label = "online_ddc";
        for (const auto& rec : run.records) {
            e.traj.u.push_back(rec.u);
            e.traj.x.push_back(rec.x);
            e.traj.y.push_back(rec.y);
        }
        e.traj.x.push_back(run.records.empty() ? plant.x0 : run.records.back().x);
        double energy = 0.0;
        for (const auto& rec : run.records)
            for (double v : rec.y) energy += v * v;
        e.metrics = {{"output_energy", energy},
                     {"fallback_events", run.fallback_events},
                     {"violation_events", run.violation_events},
                     {"final_gain_rho", spectral_radius(plant.sys.A + plant.sys.B * run.final_gain)},
                     {"gamma", config.gamma}};
        entries.push_back(std::move(e));
    }

    // curves: one column group per controller label
    std::ostringstream os;
    os << "k";
    for (const auto& e : entries)
        for (int i = 1; i <= plant.sys.p(); ++i) os << "," << e.label << "_y" << i;
    os << "\n";
    for (int k = 0; k < config.steps; ++k) {
        os << k;
        for (const auto& e : entries)
            for (int i = 0; i < plant.sys.p(); ++i)
                os << ","
                   << format_double(k < static_cast<int>(e.traj.y.size())
                                        ? e.traj.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]
                                        : 0.0);
        os << "\n";
    }

    std::vector<std::string> files;
    const std::string curves_path = out_path(config, "compare_curves.csv");
    write_text(curves_path, os.str());
    files.push_back(curves_path);

    json metrics;
    for (const auto& e : entries) metrics[e.label] = e.metrics;
    const std::string metrics_path = out_path(config, "compare_metrics.json");
    write_text(metrics_path, json_dump(metrics));
    files.push_back(metrics_path);
    return files;
}

std::vector<std::string> run_scenario(const ScenarioConfig& config) {
    config.validate();
    if (config.mode == "ellipse") return cmd_ellipse(config);
    if (config.mode == "online") return cmd_online(config);
    if (config.mode == "baseline") return cmd_baseline(config);
    return cmd_offline(config);
}

}  // namespace scenario
}  // namespace ddhinf
