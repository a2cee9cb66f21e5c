#include "ddhinf/plant_sim.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace sim {

DisturbanceSampler::DisturbanceSampler(DisturbanceBound bound, DisturbanceMode mode, std::uint64_t seed)
    : bound_(std::move(bound)), mode_(mode), rng_(seed), sqrt_upsilon_(sqrt_psd(bound_.Upsilon)) {}

std::vector<double> DisturbanceSampler::sample() {
    const int r = bound_.r();
    std::vector<double> w(static_cast<std::size_t>(r), 0.0);
    if (mode_ == DisturbanceMode::Zero) return w;

    // Direction uniform on the sphere, radius u^(1/r) for volume uniformity.
    Mat dir(r, 1);
    double norm = 0.0;
    do {
        for (int i = 0; i < r; ++i) dir(i, 0) = rng_.normal();
        norm = dir.norm_fro();
    } while (norm == 0.0);
    double radius = 1.0;
    if (mode_ == DisturbanceMode::UniformBall)
        radius = std::pow(rng_.uniform(), 1.0 / static_cast<double>(r));
    const Mat v = sqrt_upsilon_ * ((radius / norm) * dir);
    for (int i = 0; i < r; ++i) w[static_cast<std::size_t>(i)] = v(i, 0);
    return w;
}

PlantSetup batch_reactor() {
    Mat a{{1.178, 0.002, 0.512, -0.403},
          {-0.052, 0.662, -0.011, 0.061},
          {0.076, 0.335, 0.561, 0.382},
          {-0.001, 0.335, 0.089, 0.849}};
    Mat b{{0.005, -0.088}, {0.467, 0.001}, {0.213, -0.235}, {0.213, -0.016}};
    Mat c{{1.0, 0.0, 1.0, -1.0}, {0.0, 1.0, 0.0, 0.0}};
    Mat d(2, 2);
    PlantSetup setup{LtiSystem(std::move(a), std::move(b), std::move(c), std::move(d)),
                     DisturbanceBound(SymMat(0.0014 * Mat::identity(6))),
                     {0.51, 0.39, -0.30, -0.28}};
    return setup;
}

namespace {

std::vector<double> mat_col_to_vec(const Mat& m) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, 0);
    return v;
}

Trajectory simulate(const LtiSystem& sys, const std::vector<double>& x0, int steps,
                    DisturbanceSampler& sampler,
                    const std::function<std::vector<double>(int, const std::vector<double>&)>& input_at) {
    if (static_cast<int>(x0.size()) != sys.n()) throw DimensionMismatch("rollout: x0 dimension mismatch");
    Trajectory traj;
    traj.w.emplace();
    std::vector<double> x = x0;
    traj.x.push_back(x);
    for (int k = 0; k < steps; ++k) {
        const std::vector<double> u = input_at(k, x);
        if (static_cast<int>(u.size()) != sys.m()) throw DimensionMismatch("rollout: input dimension mismatch");
        const std::vector<double> w = sampler.sample();
        const Mat xk = Mat::col_vec(x);
        const Mat uk = Mat::col_vec(u);
        const Mat wk = Mat::col_vec(w);
        const Mat y = sys.C * xk + sys.D * uk + sys.G() * wk;
        const Mat xn = sys.A * xk + sys.B * uk + sys.E() * wk;
        traj.u.push_back(u);
        traj.y.push_back(mat_col_to_vec(y));
        traj.w->push_back(w);
        x = mat_col_to_vec(xn);
        traj.x.push_back(x);
    }
    traj.validate();
    return traj;
}

}  // namespace

Trajectory rollout_gain(const LtiSystem& sys, const Mat& F, const std::vector<double>& x0, int steps,
                        DisturbanceSampler& sampler) {
    if (F.rows() != sys.m() || F.cols() != sys.n()) throw DimensionMismatch("rollout: gain shape mismatch");
    return simulate(sys, x0, steps, sampler, [&](int, const std::vector<double>& x) {
        return mat_col_to_vec(F * Mat::col_vec(x));
    });
}

Trajectory rollout_inputs(const LtiSystem& sys, const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& x0, DisturbanceSampler& sampler) {
    return simulate(sys, x0, static_cast<int>(inputs.size()), sampler,
                    [&](int k, const std::vector<double>&) { return inputs[static_cast<std::size_t>(k)]; });
}

std::vector<Trajectory> collect_datasets(const LtiSystem& sys, const ExperimentProtocol& protocol,
                                         const DisturbanceBound& bound,
                                         const std::vector<double>& preset_x0) {
    if (protocol.q < 1 || protocol.T < 1) throw MalformedTrajectory("protocol needs q >= 1 and T >= 1");
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(protocol.q));
    for (int i = 1; i <= protocol.q; ++i) {
        Rng rng(Rng::derive_seed(protocol.seed, static_cast<std::uint64_t>(i)));
        DisturbanceSampler sampler(bound, DisturbanceMode::UniformBall,
                                   Rng::derive_seed(protocol.seed, 0x10000ULL + static_cast<std::uint64_t>(i)));
        std::vector<double> x0;
        const bool preset = protocol.x0_policy == ExperimentProtocol::X0Policy::AllPreset ||
                            (protocol.x0_policy == ExperimentProtocol::X0Policy::PresetFirstThenRandom && i == 1);
        if (preset) {
            x0 = preset_x0;
        } else {
            x0.resize(static_cast<std::size_t>(sys.n()));
            for (auto& v : x0) v = rng.uniform(-protocol.x0_range, protocol.x0_range);
        }
        std::vector<std::vector<double>> inputs(static_cast<std::size_t>(protocol.T),
                                                std::vector<double>(static_cast<std::size_t>(sys.m())));
        for (auto& row : inputs)
            for (auto& v : row) v = rng.uniform(protocol.input_lo, protocol.input_hi);
        out.push_back(rollout_inputs(sys, inputs, x0, sampler));
    }
    return out;
}

double hinf_energy_ratio(const Trajectory& traj) {
    traj.validate();
    if (!traj.w) throw UndefinedRatio("energy ratio needs the disturbance record");
    double ey = 0.0, ew = 0.0;
    for (const auto& yk : traj.y)
        for (double v : yk) ey += v * v;
    for (const auto& wk : *traj.w)
        for (double v : wk) ew += v * v;
    if (ew == 0.0) throw UndefinedRatio("zero disturbance energy");
    return std::sqrt(ey / ew);
}

namespace {

lmi::LmiProblem baseline_problem(const LtiSystem& sys, double gamma, double eps_pd) {
    const int n = sys.n(), m = sys.m(), p = sys.p(), r = sys.r();
    const int o1 = 0, o2 = n, o3 = n + r, o4 = 2 * n + r;
    const int total = 2 * n + r + p;

    lmi::LmiProblem prob;
    auto gb = lmi::VarBlock::sym_pd("Gamma", n, eps_pd);
    auto sb = lmi::VarBlock::free_rect("S", m, n);
    prob.add_variable(gb);
    prob.add_variable(sb);

    // The disturbance rows are scaled by 1/gamma (a congruence), turning the
    // -gamma^2 block into -I and keeping the constraint well conditioned for
    // large levels.
    lmi::AffineMatExpr expr(total);
    Mat c0(total, total);
    c0.add_block(o2, o2, Mat::identity(r), -1.0);
    c0.add_block(o3, o2, sys.E(), 1.0 / gamma);
    c0.add_block(o2, o3, sys.E().transpose(), 1.0 / gamma);
    c0.add_block(o4, o2, sys.G(), 1.0 / gamma);
    c0.add_block(o2, o4, sys.G().transpose(), 1.0 / gamma);
    c0.add_block(o4, o4, Mat::identity(p), -1.0);
    expr.set_constant(SymMat(c0));

    expr.add_diag_block(gb, o1, -1.0);
    expr.add_diag_block(gb, o3, -1.0);
    expr.add_block_term(gb, o3, o1, sys.A, Mat::identity(n), 1.0, /*mirror=*/true);
    expr.add_block_term(gb, o4, o1, sys.C, Mat::identity(n), 1.0, /*mirror=*/true);
    expr.add_block_term(sb, o3, o1, sys.B, Mat::identity(n), 1.0, /*mirror=*/true);
    expr.add_block_term(sb, o4, o1, sys.D, Mat::identity(n), 1.0, /*mirror=*/true);
    prob.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "closed-loop-level");
    return prob;
}

}  // namespace

hinf::ControllerResult model_based_baseline(const LtiSystem& sys, double gamma,
                                            const lmi::SolverOptions& solver) {
    if (gamma <= 0.0) throw InvalidMatrix("attenuation level must be positive");
    lmi::SolverOptions opts = solver;
    opts.center = true;
    const lmi::LmiSolution sol = lmi::solve(baseline_problem(sys, gamma, solver.eps_pd), opts);
    if (sol.status != lmi::SolveStatus::Feasible)
        throw SynthesisInfeasible("known-model synthesis infeasible at gamma " + std::to_string(gamma));
    hinf::ControllerResult res;
    res.Gamma = sol.sym("Gamma");
    res.S = sol.matrix("S");
    res.F = lu_solve(res.Gamma.mat(), res.S.transpose()).transpose();
    res.gamma_achieved = gamma;
    res.solution = sol;
    return res;
}

double model_based_minimal_gamma(const LtiSystem& sys, const lmi::SolverOptions& solver, double rel_tol) {
    lmi::SolverOptions opts = solver;
    opts.center = false;
    auto feasible = [&](double gamma) {
        return lmi::solve(baseline_problem(sys, gamma, solver.eps_pd), opts).status ==
               lmi::SolveStatus::Feasible;
    };
    double hi = 1.0;
    int guard = 0;
    while (!feasible(hi)) {
        hi *= 2.0;
        if (++guard > 40) throw SynthesisInfeasible("no feasible level found for the known-model design");
    }
    double lo = hi * 0.5;
    while (lo > 1e-6 && feasible(lo)) {
        hi = lo;
        lo *= 0.5;
    }
    for (int step = 0; step < 80 && hi - lo > rel_tol * hi; ++step) {
        const double mid = 0.5 * (hi + lo);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace sim
}  // namespace ddhinf
