#include "ddhinf/iter_core.hpp"

#include <cmath>

#include "ddhinf/rng.hpp"
#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace iter_core {

IterationState IterationState::initial(int dim) {
    IterationState s;
    s.Nh = SymMat::zero(dim);
    return s;
}

std::pair<lmi::LmiSolution, IterationState> iterate_step(const StepTemplate& tmpl, const SymMat& N_i,
                                                         IterationState state,
                                                         const lmi::SolverOptions& options) {
    if (N_i.dim() != state.Nh.dim()) throw DimensionMismatch("iterate_step: block dimension mismatch");
    const bool first = state.history.empty();
    lmi::LmiProblem problem = tmpl.build(N_i, state.Nh, state.i, first);

    // Pure-feasibility steps are centered (the margin is maximized) so the
    // accumulator the next step inherits sits well inside the cone.
    lmi::SolverOptions opts = options;
    if (!problem.has_objective()) opts.center = true;

    lmi::LmiSolution sol = lmi::solve(problem, opts);
    bool used_fallback = false;

    if (sol.status != lmi::SolveStatus::Feasible) {
        if (first)
            throw InfeasibleSeed("iteration 1 infeasible (phase-1 slack " +
                                 std::to_string(sol.phase1_slack) + ")");
        // Explicit fallback: alpha=0, beta=1 reproduces the previous step's
        // accepted inequality, so only solver-tolerance artifacts can reject it.
        std::map<std::string, Mat> values = state.last->values;
        Mat zero(1, 1);
        Mat one(1, 1);
        one(0, 0) = 1.0;
        values[tmpl.alpha_label] = zero;
        values[tmpl.beta_label] = one;
        if (tmpl.fallback_patch) tmpl.fallback_patch(values);

        lmi::LmiSolution fb;
        fb.status = lmi::SolveStatus::Feasible;
        fb.values = std::move(values);
        fb.note = "fallback assignment";
        const lmi::VerificationReport rep = lmi::verify(problem, fb, options);
        if (!rep.pass)
            throw ContractViolation("iteration " + std::to_string(state.i) +
                                    " infeasible and the fallback assignment failed verification "
                                    "(worst violation " +
                                    std::to_string(rep.worst_violation) + ")");
        sol = std::move(fb);
        used_fallback = true;
        ++state.fallback_events;
    }

    const double alpha = sol.scalar(tmpl.alpha_label);
    const double beta = first ? 0.0 : sol.scalar(tmpl.beta_label);
    state.Nh = SymMat::symmetrize(alpha * N_i.mat() + beta * state.Nh.mat());
    state.history.emplace_back(alpha, beta);
    state.last = sol;
    state.i += 1;
    if (used_fallback && sol.note.empty()) sol.note = "fallback assignment";
    return {std::move(sol), std::move(state)};
}

AggregateCertificate run_iteration(const StepTemplate& tmpl, const std::vector<SymMat>& blocks,
                                   const lmi::SolverOptions& options) {
    if (blocks.empty()) throw DimensionMismatch("run_iteration: empty block list");
    IterationState state = IterationState::initial(blocks.front().dim());
    lmi::LmiSolution last;
    for (const SymMat& n_i : blocks) {
        auto [sol, next] = iterate_step(tmpl, n_i, std::move(state), options);
        state = std::move(next);
        last = std::move(sol);
    }
    AggregateCertificate cert;
    cert.history = state.history;
    cert.taus = recover_taus(state.history);
    cert.final_solution = std::move(last);
    cert.fallback_events = state.fallback_events;
    return cert;
}

std::vector<double> recover_taus(const std::vector<std::pair<double, double>>& history) {
    const int q = static_cast<int>(history.size());
    std::vector<double> taus(static_cast<std::size_t>(q), 0.0);
    double prod = 1.0;  // prod_{j=i+1}^{q+1} beta_j with beta_{q+1} = 1
    for (int i = q - 1; i >= 0; --i) {
        taus[static_cast<std::size_t>(i)] = history[static_cast<std::size_t>(i)].first * prod;
        prod *= history[static_cast<std::size_t>(i)].second;
    }
    return taus;
}

SymMat aggregate_matrix(const SymMat& M, const std::vector<SymMat>& blocks,
                        const std::vector<double>& taus) {
    if (blocks.size() != taus.size()) throw DimensionMismatch("aggregate: tau count mismatch");
    Mat acc = M.mat();
    for (std::size_t i = 0; i < blocks.size(); ++i)
        acc -= taus[i] * blocks[i].mat();
    return SymMat::symmetrize(acc);
}

AggregateCertificate run_iteration_constant(const SymMat& M, const std::vector<SymMat>& blocks,
                                            const lmi::SolverOptions& options) {
    StepTemplate tmpl;
    tmpl.build = [&M](const SymMat& n_i, const SymMat& n_hist, int, bool first) {
        lmi::LmiProblem p;
        p.add_variable(lmi::VarBlock::nonneg_scalar("alpha"));
        if (!first) p.add_variable(lmi::VarBlock::nonneg_scalar("beta"));
        lmi::AffineMatExpr expr(M.dim());
        expr.set_constant(M);
        expr.add_scalar_term("alpha", -1.0 * n_i);
        if (!first) expr.add_scalar_term("beta", -1.0 * n_hist);
        p.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "step");
        return p;
    };
    AggregateCertificate cert = run_iteration(tmpl, blocks, options);
    const SymMat agg = aggregate_matrix(M, blocks, cert.taus);
    const double margin = options.margin_rel * std::max(1.0, agg.max_abs());
    if (!is_negative_definite(agg, 0.0))
        throw ContractViolation("aggregated inequality not negative definite (lambda_max " +
                                std::to_string(max_eigenvalue(agg)) + ", margin " +
                                std::to_string(margin) + ")");
    return cert;
}

CertReport check_s_lemma(const SymMat& M, const SymMat& N, double tau, int identity_block,
                         int samples, std::uint64_t seed) {
    if (tau < 0.0) throw InvalidCertificate("multiplier must be nonnegative");
    if (M.dim() != N.dim()) throw DimensionMismatch("check_s_lemma: dimension mismatch");
    const int d = M.dim();
    const int l = identity_block;
    if (l <= 0 || l >= d) throw DimensionMismatch("check_s_lemma: identity block out of range");
    const int s = d - l;

    CertReport rep;
    const SymMat delta = SymMat::symmetrize(M.mat() - tau * N.mat());
    rep.lambda_max_delta = max_eigenvalue(delta);
    const double tol = 1e-9 * std::max(1.0, std::max(M.max_abs(), N.max_abs()));
    rep.certificate_negative = rep.lambda_max_delta <= tol;

    Rng rng(seed);
    Mat iz(l, d);
    for (int i = 0; i < l; ++i) iz(i, i) = 1.0;
    for (int trial = 0; trial < samples; ++trial) {
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < s; ++j) iz(i, l + j) = rng.normal();
        const SymMat nq = SymMat::symmetrize(iz * N.mat() * iz.transpose());
        if (max_eigenvalue(nq) > tol) continue;
        ++rep.samples_accepted;
        const SymMat mq = SymMat::symmetrize(iz * M.mat() * iz.transpose());
        if (max_eigenvalue(mq) > tol) {
            ++rep.implication_failures;
            rep.found_counterexample = true;
        }
    }
    rep.inconclusive = !rep.certificate_negative && !rep.found_counterexample;
    return rep;
}

}  // namespace iter_core
}  // namespace ddhinf
