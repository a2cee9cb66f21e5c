#include "ddhinf/hinf_online.hpp"

#include <chrono>
#include <cmath>

#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace online {

namespace {

std::vector<double> col_to_vec(const Mat& m) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, 0);
    return v;
}

/// State-bound block [[-eta, x^T], [x, -Gamma]] <= 0.
lmi::AffineMatExpr state_bound_expr(const std::vector<double>& x, const lmi::VarBlock& eta_block,
                                    const lmi::VarBlock& gamma_block) {
    const int n = static_cast<int>(x.size());
    lmi::AffineMatExpr expr(1 + n);
    Mat c0(1 + n, 1 + n);
    for (int i = 0; i < n; ++i) {
        c0(0, 1 + i) = x[static_cast<std::size_t>(i)];
        c0(1 + i, 0) = x[static_cast<std::size_t>(i)];
    }
    expr.set_constant(SymMat(c0));
    Mat neg_one(1 + n, 1 + n);
    neg_one(0, 0) = -1.0;
    expr.add_scalar_term(eta_block.label, SymMat(neg_one));
    expr.add_diag_block(gamma_block, 1, -1.0);
    return expr;
}

}  // namespace

OnlineState::OnlineState(hinf::PlantDims dims, DisturbanceBound bound, OnlineConfig config,
                         const Trajectory& pre_window)
    : dims_(dims),
      bound_(std::move(bound)),
      config_(std::move(config)),
      window_(dims.n, dims.m, dims.p),
      window_rng_(config_.window_seed),
      nh_(SymMat::zero(3 * dims.n + dims.m + dims.p)),
      gamma_prev_(SymMat::identity(dims.n)),
      s_prev_(Mat(dims.m, dims.n)),
      f_prev_(Mat(dims.m, dims.n)) {
    if (pre_window.length() < config_.window_length)
        throw WindowUnderflow("pre-collected window shorter than the configured length");
    window_.seed(pre_window);
}

StepRecord OnlineState::step(const std::vector<double>& x_k, const std::vector<double>& y_prev) {
    const auto t_start = std::chrono::steady_clock::now();
    if (k_ > 0) window_.push(pending_u_, y_prev, x_k);

    const int L = config_.window_length;
    int window_end = k_;
    if (config_.window_policy == WindowPolicy::BufferRandom && k_ > 0) {
        // Any contiguous stretch of recorded data is a genuine trajectory, so
        // a random window end in [earliest+L, k] keeps the set sound.
        const int lo = window_.earliest_time() + L;
        window_end = lo + static_cast<int>(window_rng_.next_u64() %
                                           static_cast<std::uint64_t>(k_ - lo + 1));
    }
    const DataMatrices dm = window_.window(window_end, L);
    const QmiBlock qmi = build_qmi(dm, bound_);
    const SymMat block = hinf::pad_qmi(qmi, dims_.n);

    const bool first = (k_ == 0);
    const double lambda = 1.0 / (config_.gamma * config_.gamma);

    auto gb = lmi::VarBlock::sym_pd("Gamma", dims_.n, config_.solver.eps_pd);
    auto sb = lmi::VarBlock::free_rect("S", dims_.m, dims_.n);
    auto eb = lmi::VarBlock::nonneg_scalar("eta");

    lmi::LmiProblem problem;
    problem.add_variable(gb);
    problem.add_variable(sb);
    problem.add_variable(lmi::VarBlock::nonneg_scalar("alpha"));
    if (!first) problem.add_variable(lmi::VarBlock::nonneg_scalar("beta"));

    lmi::AffineMatExpr synth = hinf::hinf_performance_expr(dims_, lambda, gb, sb);
    synth.add_scalar_term("alpha", -1.0 * block);
    if (!first) synth.add_scalar_term("beta", -1.0 * nh_);

    if (!config_.lmi_only_unsafe) {
        problem.add_variable(eb);
        problem.add_constraint(state_bound_expr(x_k, eb, gb), lmi::Sense::NonstrictNeg, "state-bound");
        problem.objective = {{"eta", 1.0}};
    }
    problem.add_constraint(std::move(synth), lmi::Sense::StrictNeg, "synthesis");

    lmi::SolverOptions opts = config_.solver;
    if (config_.lmi_only_unsafe) opts.center = true;

    StepRecord rec;
    rec.k = k_;
    rec.status = "ok";

    lmi::LmiSolution sol = lmi::solve(problem, opts);
    if (sol.status != lmi::SolveStatus::Feasible) {
        if (first)
            throw InfeasibleSeed("online start infeasible (phase-1 slack " +
                                 std::to_string(sol.phase1_slack) + ")");
        // Previous certificate with (alpha, beta) = (0, 1) reproduces the last
        // accepted inequality; keep flying on the previous gain.
        std::map<std::string, Mat> values;
        values["Gamma"] = gamma_prev_.mat();
        values["S"] = s_prev_;
        Mat zero(1, 1), one(1, 1);
        one(0, 0) = 1.0;
        values["alpha"] = zero;
        values["beta"] = one;
        if (!config_.lmi_only_unsafe) {
            Mat eta(1, 1);
            eta(0, 0) = quad_form_inv(gamma_prev_, Mat::col_vec(x_k));
            values["eta"] = eta;
        }
        lmi::LmiSolution fb;
        fb.status = lmi::SolveStatus::Feasible;
        fb.values = std::move(values);
        const lmi::VerificationReport rep = lmi::verify(problem, fb, config_.solver);
        if (rep.pass) {
            rec.status = "fallback";
            ++fallback_events_;
        } else {
            rec.status = "violation";
            ++violation_events_;
        }
        sol = std::move(fb);
    }

    const SymMat gamma_k = sol.sym("Gamma");
    const Mat s_k = sol.matrix("S");
    const Mat f_k = lu_solve(gamma_k.mat(), s_k.transpose()).transpose();
    const double alpha = sol.scalar("alpha");
    const double beta = first ? 0.0 : sol.scalar("beta");

    rec.F = f_k;
    rec.Gamma = gamma_k;
    rec.S = s_k;
    rec.alpha = alpha;
    rec.beta = beta;
    rec.x_quad = quad_form_inv(gamma_k, Mat::col_vec(x_k));
    rec.eta = config_.lmi_only_unsafe ? rec.x_quad : sol.scalar("eta");
    for (const auto& con : problem.constraints) {
        const double lam = max_eigenvalue(con.expr.evaluate(sol.values));
        if (con.name == "synthesis")
            rec.lambda_max_synthesis = lam;
        else
            rec.lambda_max_state_bound = lam;
    }

    nh_ = SymMat::symmetrize(alpha * block.mat() + beta * nh_.mat());
    history_.emplace_back(alpha, beta);
    gamma_prev_ = gamma_k;
    s_prev_ = s_k;
    f_prev_ = f_k;
    pending_u_ = col_to_vec(f_k * Mat::col_vec(x_k));
    rec.u = pending_u_;
    rec.x = x_k;
    k_ += 1;

    rec.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                       .count();
    return rec;
}

OnlineRun run_online(const LtiSystem& sys, const DisturbanceBound& bound, const Trajectory& pre_window,
                     int steps, const OnlineConfig& config, sim::DisturbanceSampler& sampler) {
    OnlineState state(hinf::PlantDims{sys.n(), sys.m(), sys.p()}, bound, config, pre_window);
    OnlineRun run;
    std::vector<double> x = pre_window.x.back();
    std::vector<double> y_prev;

    for (int k = 0; k < steps; ++k) {
        StepRecord rec = state.step(x, y_prev);
        const Mat xk = Mat::col_vec(x);
        const Mat uk = Mat::col_vec(rec.u);
        const std::vector<double> w = sampler.sample();
        const Mat wk = Mat::col_vec(w);
        const Mat y = sys.C * xk + sys.D * uk + sys.G() * wk;
        const Mat xn = sys.A * xk + sys.B * uk + sys.E() * wk;
        rec.y = col_to_vec(y);
        rec.w = w;
        y_prev = rec.y;
        x = col_to_vec(xn);
        run.records.push_back(std::move(rec));
    }
    run.final_gain = state.last_gain();
    run.fallback_events = state.fallback_events();
    run.violation_events = state.violation_events();
    return run;
}

Trajectory collect_pre_window(const LtiSystem& sys, const DisturbanceBound& bound, int L,
                              double input_lo, double input_hi, const std::vector<double>& x_start,
                              std::uint64_t seed) {
    Rng rng(Rng::derive_seed(seed, 0x5eedULL));
    sim::DisturbanceSampler sampler(bound, sim::DisturbanceMode::UniformBall,
                                    Rng::derive_seed(seed, 0xd157ULL));
    std::vector<std::vector<double>> inputs(static_cast<std::size_t>(L),
                                            std::vector<double>(static_cast<std::size_t>(sys.m())));
    for (auto& row : inputs)
        for (auto& v : row) v = rng.uniform(input_lo, input_hi);
    return sim::rollout_inputs(sys, inputs, x_start, sampler);
}

}  // namespace online
}  // namespace ddhinf
