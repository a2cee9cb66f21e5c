#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddhinf/datasets.hpp"
#include "ddhinf/hinf_offline.hpp"
#include "ddhinf/plant_sim.hpp"

namespace ddhinf {
namespace online {

enum class WindowPolicy { Fixed, BufferRandom };

struct OnlineConfig {
    double gamma = 10.0;
    int window_length = 8;
    lmi::SolverOptions solver;
    WindowPolicy window_policy = WindowPolicy::Fixed;
    std::uint64_t window_seed = 1;
    /// Unsafe: drop the state-bound constraint and the objective and solve the
    /// synthesis inequality alone. Exists to demonstrate why skipping them can
    /// destabilize the loop; never use for control.
    bool lmi_only_unsafe = false;
};

struct StepRecord {
    int k = 0;
    Mat F;         // gain applied at this step
    SymMat Gamma;  // accepted certificate matrix
    Mat S;
    double eta = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::string status;  // "ok" | "fallback" | "violation"
    double lambda_max_synthesis = 0.0;  // diagnostics at the accepted point
    double lambda_max_state_bound = 0.0;
    double x_quad = 0.0;  // x(k)^T Gamma_k^{-1} x(k)
    double solve_ms = 0.0;
    // filled by the closed-loop driver
    std::vector<double> x, u, y, w;
};

class OnlineState {
public:
    OnlineState(hinf::PlantDims dims, DisturbanceBound bound, OnlineConfig config,
                const Trajectory& pre_window);

    /// One controller update at the current time. `y_prev` is the output
    /// measured at the previous step (ignored at k=0, where the seeded window
    /// already ends at the current state).
    StepRecord step(const std::vector<double>& x_k, const std::vector<double>& y_prev);

    int time() const { return k_; }
    const Mat& last_gain() const { return f_prev_; }
    const SymMat& last_certificate() const { return gamma_prev_; }
    int fallback_events() const { return fallback_events_; }
    int violation_events() const { return violation_events_; }
    const std::vector<std::pair<double, double>>& multiplier_history() const { return history_; }

private:
    hinf::PlantDims dims_;
    DisturbanceBound bound_;
    OnlineConfig config_;
    OnlineHistory window_;
    Rng window_rng_;
    int k_ = 0;
    SymMat nh_;
    SymMat gamma_prev_;
    Mat s_prev_;
    Mat f_prev_;
    std::vector<double> pending_u_;  // input applied at k-1, awaiting the push
    std::vector<std::pair<double, double>> history_;
    int fallback_events_ = 0;
    int violation_events_ = 0;
};

struct OnlineRun {
    std::vector<StepRecord> records;
    Mat final_gain;
    int fallback_events = 0;
    int violation_events = 0;
};

/// Full closed-loop run: pre-rolls an open-loop window of L steps so the
/// recorded history ends exactly at the control start state, then alternates
/// solve / apply / measure / append for `steps` steps.
OnlineRun run_online(const LtiSystem& sys, const DisturbanceBound& bound, const Trajectory& pre_window,
                     int steps, const OnlineConfig& config, sim::DisturbanceSampler& sampler);

/// Open-loop pre-collection for initializing the online loop: L steps with
/// protocol inputs from x_start; the final state becomes x(0).
Trajectory collect_pre_window(const LtiSystem& sys, const DisturbanceBound& bound, int L,
                              double input_lo, double input_hi, const std::vector<double>& x_start,
                              std::uint64_t seed);

}  // namespace online
}  // namespace ddhinf
