#include "doctest.h"

#include <cmath>

#include "ddhinf/plant_sim.hpp"
#include "ddhinf/spectral.hpp"

using namespace ddhinf;
using namespace ddhinf::sim;

TEST_CASE("batch reactor preset matches the recorded plant") {
    const PlantSetup plant = batch_reactor();
    CHECK(plant.sys.n() == 4);
    CHECK(plant.sys.m() == 2);
    CHECK(plant.sys.p() == 2);
    CHECK(plant.sys.r() == 6);
    CHECK(plant.sys.A(0, 0) == 1.178);
    CHECK(plant.sys.A(3, 3) == 0.849);
    CHECK(plant.sys.B(1, 0) == 0.467);
    CHECK(plant.sys.C(0, 3) == -1.0);
    CHECK(plant.sys.C(1, 1) == 1.0);
    CHECK(plant.sys.D.max_abs() == 0.0);
    CHECK(plant.bound.Upsilon(0, 0) == doctest::Approx(0.0014).epsilon(1e-15));
    CHECK(plant.x0[0] == 0.51);

    // open loop is unstable
    CHECK(spectral_radius(plant.sys.A) > 1.0);

    // noise channels are the stacked identity
    const Mat gain = plant.sys.noise_gain();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(gain(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("rollouts follow the recursion") {
    const PlantSetup plant = batch_reactor();

    SUBCASE("zero everything stays at zero") {
        DisturbanceSampler zero(plant.bound, DisturbanceMode::Zero, 1);
        const Trajectory t = rollout_gain(plant.sys, Mat(2, 4), {0, 0, 0, 0}, 10, zero);
        for (const auto& xk : t.x)
            for (double v : xk) CHECK(v == 0.0);
    }

    SUBCASE("dynamics exactness") {
        DisturbanceSampler sampler(plant.bound, DisturbanceMode::UniformBall, 5);
        Rng rng(8);
        std::vector<std::vector<double>> inputs(12, std::vector<double>(2));
        for (auto& row : inputs)
            for (auto& v : row) v = rng.uniform(-0.1, 0.1);
        const Trajectory t = rollout_inputs(plant.sys, inputs, plant.x0, sampler);
        CHECK(t.dynamics_residual(plant.sys) <= 1e-12);
    }

    SUBCASE("stable gain decays geometrically") {
        // simple two-state plant with a contraction: A = 0.5 I, closed loop A+BF = 0.5 I
        LtiSystem sys(0.5 * Mat::identity(2), Mat::identity(2), Mat::identity(2), Mat(2, 2));
        DisturbanceBound bound(SymMat(1e-4 * Mat::identity(4)));
        DisturbanceSampler zero(bound, DisturbanceMode::Zero, 1);
        const Trajectory t = rollout_gain(sys, Mat(2, 2), {1.0, -1.0}, 20, zero);
        for (int k = 0; k <= 20; ++k) {
            const double expect = std::pow(0.5, k);
            CHECK(t.x[static_cast<std::size_t>(k)][0] == doctest::Approx(expect).epsilon(1e-12));
            CHECK(t.x[static_cast<std::size_t>(k)][1] == doctest::Approx(-expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("disturbance samples stay admissible") {
    const PlantSetup plant = batch_reactor();
    const Mat inv_upsilon = inverse(plant.bound.Upsilon.mat());
    for (DisturbanceMode mode : {DisturbanceMode::UniformBall, DisturbanceMode::Boundary}) {
        DisturbanceSampler sampler(plant.bound, mode, 99);
        const int count = mode == DisturbanceMode::UniformBall ? 1000000 : 10000;
        for (int i = 0; i < count; ++i) {
            const auto w = sampler.sample();
            const Mat wv = Mat::col_vec(w);
            const Mat quad = wv.transpose() * inv_upsilon * wv;
            CHECK(quad(0, 0) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("dataset collection is seed deterministic and prefix stable") {
    const PlantSetup plant = batch_reactor();
    ExperimentProtocol protocol;
    protocol.q = 3;
    protocol.T = 8;
    protocol.seed = 2718;

    const auto a = collect_datasets(plant.sys, protocol, plant.bound, plant.x0);
    const auto b = collect_datasets(plant.sys, protocol, plant.bound, plant.x0);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string ca = trajectory_to_csv(a[i], 4, 2, 2);
        const std::string cb = trajectory_to_csv(b[i], 4, 2, 2);
        CHECK(ca == cb);
    }

    // the first trajectory does not depend on q
    protocol.q = 1;
    const auto single = collect_datasets(plant.sys, protocol, plant.bound, plant.x0);
    CHECK(trajectory_to_csv(single[0], 4, 2, 2) == trajectory_to_csv(a[0], 4, 2, 2));

    // first trajectory starts from the preset state
    for (int i = 0; i < 4; ++i) CHECK(a[0].x[0][static_cast<std::size_t>(i)] == plant.x0[static_cast<std::size_t>(i)]);
}

TEST_CASE("energy ratio") {
    SUBCASE("zero output gives zero ratio") {
        Trajectory t;
        t.u = {{0.0}};
        t.x = {{0.0}, {0.0}};
        t.y = {{0.0}};
        t.w.emplace();
        t.w->push_back({0.5, 0.0});
        CHECK(hinf_energy_ratio(t) == 0.0);
    }

    SUBCASE("zero disturbance energy is undefined") {
        Trajectory t;
        t.u = {{0.0}};
        t.x = {{0.0}, {0.0}};
        t.y = {{1.0}};
        t.w.emplace();
        t.w->push_back({0.0, 0.0});
        CHECK_THROWS_AS(hinf_energy_ratio(t), UndefinedRatio);
    }

    SUBCASE("realized gain never beats the frequency-domain bound") {
        // one-state plant x+ = 0.5 x + [1 0] w, y = x + [0 1] w;
        // peak gain sqrt(1/(1-0.5)^2 + 1) = sqrt(5)
        LtiSystem sys(Mat{{0.5}}, Mat{{0.0}}, Mat{{1.0}}, Mat{{0.0}});
        DisturbanceBound bound(SymMat(0.01 * Mat::identity(2)));
        const double hinf_norm = std::sqrt(5.0);
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
            DisturbanceSampler sampler(bound, DisturbanceMode::UniformBall, seed);
            const Trajectory t = rollout_gain(sys, Mat(1, 1), {0.0}, 400, sampler);
            CHECK(hinf_energy_ratio(t) <= hinf_norm + 1e-9);
        }
    }
}

TEST_CASE("known-model design") {
    SUBCASE("stabilizes the batch reactor at the case-study level") {
        const PlantSetup plant = batch_reactor();
        const auto res = model_based_baseline(plant.sys, 10.0);
        CHECK(res.gain_residual() <= 1e-8);
        CHECK(spectral_radius(plant.sys.A + plant.sys.B * res.F) < 1.0);
    }

    SUBCASE("very large levels approach plain stabilizability") {
        const PlantSetup plant = batch_reactor();
        const auto res = model_based_baseline(plant.sys, 1e6);
        CHECK(spectral_radius(plant.sys.A + plant.sys.B * res.F) < 1.0);
    }

    SUBCASE("scalar closed form: minimal level is sqrt(1 + c^2)") {
        // x+ = 0.5 x + u + [1 0] w, y = x + [0 1] w; the best gain cancels the
        // pole and the floor is sqrt(2).
        LtiSystem sys(Mat{{0.5}}, Mat{{1.0}}, Mat{{1.0}}, Mat{{0.0}});
        const double gamma_min = model_based_minimal_gamma(sys);
        CHECK(gamma_min == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
    }

    SUBCASE("infeasible level raises") {
        LtiSystem sys(Mat{{0.5}}, Mat{{1.0}}, Mat{{1.0}}, Mat{{0.0}});
        CHECK_THROWS_AS(model_based_baseline(sys, 0.5), SynthesisInfeasible);
    }
}
