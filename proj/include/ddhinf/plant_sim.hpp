#pragma once

#include <cstdint>
#include <vector>

#include "ddhinf/datasets.hpp"
#include "ddhinf/hinf_offline.hpp"
#include "ddhinf/rng.hpp"

namespace ddhinf {
namespace sim {

enum class DisturbanceMode { UniformBall, Boundary, Zero };

/// Draws disturbance vectors admissible for the bound: every sample w
/// satisfies w^T Upsilon^{-1} w <= 1. Uniform over the solid ellipsoid by
/// default; `Boundary` pins the radius at 1 for stress runs.
class DisturbanceSampler {
public:
    DisturbanceSampler(DisturbanceBound bound, DisturbanceMode mode, std::uint64_t seed);

    std::vector<double> sample();
    const DisturbanceBound& bound() const { return bound_; }
    DisturbanceMode mode() const { return mode_; }

private:
    DisturbanceBound bound_;
    DisturbanceMode mode_;
    Rng rng_;
    Mat sqrt_upsilon_;
};

struct ExperimentProtocol {
    int q = 100;
    int T = 8;
    double input_lo = -0.1;
    double input_hi = 0.1;
    enum class X0Policy { PresetFirstThenRandom, AllRandom, AllPreset };
    X0Policy x0_policy = X0Policy::PresetFirstThenRandom;
    double x0_range = 0.5;  // uniform per-entry range for random initial states
    std::uint64_t seed = 1;
};

struct PlantSetup {
    LtiSystem sys;
    DisturbanceBound bound;
    std::vector<double> x0;
};

/// The discretized unstable batch reactor used throughout the experiments.
PlantSetup batch_reactor();

/// Closed-loop rollout under u = F x.
Trajectory rollout_gain(const LtiSystem& sys, const Mat& F, const std::vector<double>& x0, int steps,
                        DisturbanceSampler& sampler);

/// Open-loop rollout with a prescribed input sequence.
Trajectory rollout_inputs(const LtiSystem& sys, const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& x0, DisturbanceSampler& sampler);

/// Experiment-protocol data collection: q open-loop trajectories with
/// uniformly drawn inputs; trajectory seeds derive from the protocol seed so
/// trajectory i is identical regardless of q.
std::vector<Trajectory> collect_datasets(const LtiSystem& sys, const ExperimentProtocol& protocol,
                                         const DisturbanceBound& bound,
                                         const std::vector<double>& preset_x0);

/// sqrt(sum |y|^2 / sum |w|^2); the attenuation guarantee holds iff this is
/// below the certified level (zero initial state runs).
double hinf_energy_ratio(const Trajectory& traj);

/// Known-model state-feedback synthesis at a fixed level, solved through the
/// same certificate machinery as the data-driven paths.
hinf::ControllerResult model_based_baseline(const LtiSystem& sys, double gamma,
                                            const lmi::SolverOptions& solver = {});

/// Smallest feasible level for the known-model design, by bisection.
double model_based_minimal_gamma(const LtiSystem& sys, const lmi::SolverOptions& solver = {},
                                 double rel_tol = 1e-4);

}  // namespace sim
}  // namespace ddhinf
