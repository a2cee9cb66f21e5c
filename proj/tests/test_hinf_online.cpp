#include "doctest.h"

#include <cmath>

#include "ddhinf/hinf_online.hpp"
#include "ddhinf/spectral.hpp"

using namespace ddhinf;
using namespace ddhinf::online;

namespace {

struct ReactorOnline {
    sim::PlantSetup plant = sim::batch_reactor();
    // run at a disturbance level where the data certifies a design (the
    // case-study bound is too large for this short window protocol)
    DisturbanceBound bound{SymMat(1e-6 * Mat::identity(6))};
    OnlineConfig config;
    Trajectory pre;

    explicit ReactorOnline(std::uint64_t seed) {
        config.gamma = 10.0;
        config.window_length = 8;
        pre = collect_pre_window(plant.sys, bound, config.window_length, -0.1, 0.1, plant.x0, seed);
    }
};

}  // namespace

TEST_CASE("zero state minimizes the bound to zero") {
    ReactorOnline setup(21);
    OnlineState state(hinf::PlantDims{4, 2, 2}, setup.bound, setup.config, setup.pre);
    const StepRecord rec = state.step({0.0, 0.0, 0.0, 0.0}, {});
    CHECK(rec.status == "ok");
    CHECK(rec.eta <= 1e-6);
    CHECK(rec.x_quad <= rec.eta + 1e-7);
    for (double v : rec.u) CHECK(v == 0.0);
}

TEST_CASE("a single driven step equals a one-step run") {
    ReactorOnline setup(22);
    sim::DisturbanceSampler sampler(setup.bound, sim::DisturbanceMode::UniformBall, 7);
    const OnlineRun one = run_online(setup.plant.sys, setup.bound, setup.pre, 1, setup.config, sampler);

    OnlineState state(hinf::PlantDims{4, 2, 2}, setup.bound, setup.config, setup.pre);
    const StepRecord rec = state.step(setup.pre.x.back(), {});
    REQUIRE(one.records.size() == 1);
    CHECK(one.records[0].eta == rec.eta);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) CHECK(one.records[0].F(i, j) == rec.F(i, j));
}

TEST_CASE("the carried certificate witnesses the next step") {
    ReactorOnline setup(23);
    sim::DisturbanceSampler sampler(setup.bound, sim::DisturbanceMode::UniformBall, 17);
    const OnlineRun run = run_online(setup.plant.sys, setup.bound, setup.pre, 2, setup.config, sampler);
    REQUIRE(run.records.size() == 2);
    const StepRecord& r0 = run.records[0];
    const StepRecord& r1 = run.records[1];

    // Substitute the step-0 certificate with (alpha, beta) = (0, 1) and the
    // matched state bound into the step-1 inequalities.
    const Mat x1 = Mat::col_vec(r1.x);
    const double eta_fb = quad_form_inv(r0.Gamma, x1);

    // state bound block
    Mat sb(5, 5);
    sb(0, 0) = -eta_fb;
    for (int i = 0; i < 4; ++i) {
        sb(0, 1 + i) = x1(i, 0);
        sb(1 + i, 0) = x1(i, 0);
    }
    sb.add_block(1, 1, r0.Gamma.mat(), -1.0);
    CHECK(max_eigenvalue(SymMat::symmetrize(sb)) <= 1e-9);

    // the synthesis block at (0,1) equals the accepted step-0 block, which was
    // strictly negative; recheck through the solved step-1 record's history:
    CHECK(r1.eta <= eta_fb + 1e-6);  // optimality beats the carried witness
}

TEST_CASE("short closed-loop run maintains the per-step guarantees") {
    ReactorOnline setup(24);
    sim::DisturbanceSampler sampler(setup.bound, sim::DisturbanceMode::UniformBall, 31);
    const int steps = 12;
    const OnlineRun run = run_online(setup.plant.sys, setup.bound, setup.pre, steps, setup.config, sampler);
    REQUIRE(run.records.size() == static_cast<std::size_t>(steps));
    CHECK(run.violation_events == 0);

    const double gamma2 = setup.config.gamma * setup.config.gamma;
    for (int k = 0; k < steps; ++k) {
        const StepRecord& rec = run.records[static_cast<std::size_t>(k)];
        CHECK(rec.x_quad <= rec.eta + 1e-7);
        CHECK(rec.lambda_max_synthesis < 0.0);

        if (k + 1 < steps) {
            const StepRecord& next = run.records[static_cast<std::size_t>(k + 1)];
            const Mat xn = Mat::col_vec(next.x);
            const double through_new = quad_form_inv(next.Gamma, xn);
            const double through_old = quad_form_inv(rec.Gamma, xn);
            CHECK(through_new <= through_old + 1e-6);

            // dissipation along the realized trajectory
            double wn = 0.0, yn = 0.0;
            for (double v : rec.w) wn += v * v;
            for (double v : rec.y) yn += v * v;
            const double v_now = quad_form_inv(rec.Gamma, Mat::col_vec(rec.x));
            CHECK(through_new - v_now < gamma2 * wn - yn + 1e-6);
        }
    }
}

TEST_CASE("without disturbances the certificate value strictly decreases") {
    ReactorOnline setup(25);
    sim::DisturbanceSampler zero(setup.bound, sim::DisturbanceMode::Zero, 1);
    const int steps = 10;
    const OnlineRun run = run_online(setup.plant.sys, setup.bound, setup.pre, steps, setup.config, zero);

    for (int k = 0; k + 1 < steps; ++k) {
        const StepRecord& rec = run.records[static_cast<std::size_t>(k)];
        const StepRecord& next = run.records[static_cast<std::size_t>(k + 1)];
        double xnorm = 0.0;
        for (double v : rec.x) xnorm += v * v;
        if (xnorm < 1e-16) continue;
        double yn = 0.0;
        for (double v : rec.y) yn += v * v;
        const double v_now = quad_form_inv(rec.Gamma, Mat::col_vec(rec.x));
        const double v_next = quad_form_inv(next.Gamma, Mat::col_vec(next.x));
        CHECK(v_next - v_now < -yn + 1e-6);
    }
}

TEST_CASE("window underflow and policy checks") {
    ReactorOnline setup(26);
    Trajectory tiny = setup.pre;
    tiny.u.resize(4);
    tiny.y.resize(4);
    tiny.x.resize(5);
    if (tiny.w) tiny.w->resize(4);
    CHECK_THROWS_AS(OnlineState(hinf::PlantDims{4, 2, 2}, setup.bound, setup.config, tiny),
                    WindowUnderflow);
}

TEST_CASE("buffer-random window policy stays feasible") {
    ReactorOnline setup(27);
    setup.config.window_policy = WindowPolicy::BufferRandom;
    setup.config.window_seed = 5;
    sim::DisturbanceSampler sampler(setup.bound, sim::DisturbanceMode::UniformBall, 41);
    const OnlineRun run = run_online(setup.plant.sys, setup.bound, setup.pre, 6, setup.config, sampler);
    CHECK(run.violation_events == 0);
    for (const auto& rec : run.records) CHECK(rec.lambda_max_synthesis < 0.0);
}

TEST_CASE("the unsafe single-inequality mode runs and is flagged by omission of the bound") {
    ReactorOnline setup(28);
    setup.config.lmi_only_unsafe = true;
    sim::DisturbanceSampler zero(setup.bound, sim::DisturbanceMode::Zero, 1);
    const OnlineRun run = run_online(setup.plant.sys, setup.bound, setup.pre, 3, setup.config, zero);
    CHECK(run.records.size() == 3);
    for (const auto& rec : run.records) CHECK(rec.lambda_max_synthesis < 0.0);
}
