#include "ddhinf/hinf_offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddhinf/rng.hpp"
#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace hinf {

double ControllerResult::gain_residual() const {
    const Mat res = F * Gamma.mat() - S;
    return res.max_abs() / std::max(S.max_abs(), 1e-300);
}

lmi::AffineMatExpr hinf_performance_expr(const PlantDims& dims, double lambda,
                                         const lmi::VarBlock& gamma_block,
                                         const lmi::VarBlock& s_block) {
    const int n = dims.n, m = dims.m, p = dims.p, r = dims.r();
    if (gamma_block.rows != n || s_block.rows != m || s_block.cols != n)
        throw DimensionMismatch("performance expression: variable block shape mismatch");
    const int total = 3 * n + m + p;
    const int o1 = 0, o2 = n, o3 = n + p, o4 = 2 * n + p, o5 = 2 * n + p + m;

    // Noise channels of the plant model.
    Mat e(n, r), g(p, r);
    for (int i = 0; i < n; ++i) e(i, i) = 1.0;
    for (int i = 0; i < p; ++i) g(i, n + i) = 1.0;

    lmi::AffineMatExpr expr(total);
    Mat c0(total, total);
    c0.add_block(o1, o1, e * e.transpose(), lambda);
    c0.add_block(o1, o2, e * g.transpose(), lambda);
    c0.add_block(o2, o1, g * e.transpose(), lambda);
    c0.add_block(o2, o2, g * g.transpose(), lambda);
    c0.add_block(o2, o2, Mat::identity(p), -1.0);
    expr.set_constant(SymMat(c0));

    expr.add_diag_block(gamma_block, o1, -1.0);
    expr.add_diag_block(gamma_block, o3, +1.0);
    expr.add_diag_block(gamma_block, o5, -1.0);
    expr.add_block_term(s_block, o4, o3, Mat::identity(m), Mat::identity(n), 1.0, /*mirror=*/true);
    expr.add_block_term(s_block, o4, o5, Mat::identity(m), Mat::identity(n), 1.0, /*mirror=*/true);
    return expr;
}

SymMat pad_qmi(const QmiBlock& qmi, int n) {
    const int d = qmi.dim();
    Mat padded(d + n, d + n);
    padded.set_block(0, 0, qmi.N.mat());
    return SymMat::symmetrize(padded);
}

namespace {

std::vector<QmiBlock> apply_ordering(std::vector<QmiBlock> qmis, const SynthesisConfig& config) {
    if (config.ordering == DatasetOrdering::Shuffled) {
        Rng rng(config.shuffle_seed);
        for (std::size_t i = qmis.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(qmis[i - 1], qmis[j]);
        }
    }
    return qmis;
}

void check_inputs(const PlantDims& dims, const std::vector<QmiBlock>& qmis, double gamma) {
    if (qmis.empty()) throw DimensionMismatch("synthesis requires at least one dataset");
    const int expect = 2 * dims.n + dims.m + dims.p;
    for (const auto& q : qmis)
        if (q.dim() != expect) throw DimensionMismatch("dataset block dimension mismatch");
    if (gamma <= 0.0) throw InvalidMatrix("attenuation level must be positive");
}

Mat gain_from(const SymMat& gamma_mat, const Mat& s) {
    // F = S * Gamma^{-1}  via  Gamma F^T = S^T.
    return lu_solve(gamma_mat.mat(), s.transpose()).transpose();
}

/// Coarse doubling search for a feasible level, reported when a fixed-gamma
/// synthesis fails. Diagnostic only.
double probe_feasible_gamma(const PlantDims& dims, const std::vector<QmiBlock>& qmis,
                            const SynthesisConfig& config, double gamma_start) {
    double gamma = gamma_start;
    for (int k = 0; k < 12; ++k) {
        gamma *= 2.0;
        lmi::LmiProblem p;
        auto gb = lmi::VarBlock::sym_pd("Gamma", dims.n, config.solver.eps_pd);
        auto sb = lmi::VarBlock::free_rect("S", dims.m, dims.n);
        p.add_variable(gb);
        p.add_variable(sb);
        lmi::AffineMatExpr expr = hinf_performance_expr(dims, 1.0 / (gamma * gamma), gb, sb);
        for (std::size_t i = 0; i < qmis.size(); ++i) {
            const std::string label = "tau" + std::to_string(i + 1);
            p.add_variable(lmi::VarBlock::nonneg_scalar(label));
            expr.add_scalar_term(label, -1.0 * pad_qmi(qmis[i], dims.n));
        }
        p.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "synthesis");
        lmi::SolverOptions probe = config.solver;
        probe.center = false;
        if (lmi::solve(p, probe).status == lmi::SolveStatus::Feasible) return gamma;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ControllerResult batch_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis,
                                  const SynthesisConfig& config) {
    check_inputs(dims, qmis, config.gamma);

    lmi::LmiProblem p;
    auto gb = lmi::VarBlock::sym_pd("Gamma", dims.n, config.solver.eps_pd);
    auto sb = lmi::VarBlock::free_rect("S", dims.m, dims.n);
    p.add_variable(gb);
    p.add_variable(sb);
    lmi::AffineMatExpr expr = hinf_performance_expr(dims, 1.0 / (config.gamma * config.gamma), gb, sb);
    for (std::size_t i = 0; i < qmis.size(); ++i) {
        const std::string label = "tau" + std::to_string(i + 1);
        p.add_variable(lmi::VarBlock::nonneg_scalar(label));
        expr.add_scalar_term(label, -1.0 * pad_qmi(qmis[i], dims.n));
    }
    p.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "synthesis");

    lmi::SolverOptions opts = config.solver;
    opts.center = true;
    const lmi::LmiSolution sol = lmi::solve(p, opts);
    if (sol.status != lmi::SolveStatus::Feasible) {
        const double hint = probe_feasible_gamma(dims, qmis, config, config.gamma);
        throw SynthesisInfeasible("synthesis infeasible at gamma " + std::to_string(config.gamma) +
                                  (std::isnan(hint) ? " (no feasible level found by doubling search)"
                                                    : " (smallest feasible level found: " +
                                                          std::to_string(hint) + ")"));
    }

    ControllerResult res;
    res.Gamma = sol.sym("Gamma");
    res.S = sol.matrix("S");
    res.F = gain_from(res.Gamma, res.S);
    res.gamma_achieved = config.gamma;
    for (std::size_t i = 0; i < qmis.size(); ++i)
        res.taus.push_back(sol.scalar("tau" + std::to_string(i + 1)));
    res.solution = sol;
    return res;
}

namespace {

iter_core::StepTemplate offline_template(const PlantDims& dims, double lambda, double eps_pd) {
    iter_core::StepTemplate tmpl;
    tmpl.build = [dims, lambda, eps_pd](const SymMat& n_i, const SymMat& n_hist, int, bool first) {
        lmi::LmiProblem p;
        auto gb = lmi::VarBlock::sym_pd("Gamma", dims.n, eps_pd);
        auto sb = lmi::VarBlock::free_rect("S", dims.m, dims.n);
        p.add_variable(gb);
        p.add_variable(sb);
        p.add_variable(lmi::VarBlock::nonneg_scalar("alpha"));
        if (!first) p.add_variable(lmi::VarBlock::nonneg_scalar("beta"));
        lmi::AffineMatExpr expr = hinf_performance_expr(dims, lambda, gb, sb);
        expr.add_scalar_term("alpha", -1.0 * n_i);
        if (!first) expr.add_scalar_term("beta", -1.0 * n_hist);
        p.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "step");
        return p;
    };
    return tmpl;
}

}  // namespace

ControllerResult iterative_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis_in,
                                      const SynthesisConfig& config) {
    check_inputs(dims, qmis_in, config.gamma);
    const std::vector<QmiBlock> qmis = apply_ordering(qmis_in, config);
    const double lambda = 1.0 / (config.gamma * config.gamma);

    std::vector<SymMat> blocks;
    blocks.reserve(qmis.size());
    for (const auto& q : qmis) blocks.push_back(pad_qmi(q, dims.n));

    iter_core::AggregateCertificate cert;
    try {
        cert = iter_core::run_iteration(offline_template(dims, lambda, config.solver.eps_pd), blocks,
                                        config.solver);
    } catch (const InfeasibleSeed&) {
        const double hint = probe_feasible_gamma(dims, {qmis.front()}, config, config.gamma);
        throw InfeasibleSeed("first dataset infeasible at gamma " + std::to_string(config.gamma) +
                             (std::isnan(hint) ? ""
                                               : " (smallest feasible level found: " +
                                                     std::to_string(hint) + ")"));
    }

    ControllerResult res;
    res.Gamma = cert.final_solution.sym("Gamma");
    res.S = cert.final_solution.matrix("S");
    res.F = gain_from(res.Gamma, res.S);
    res.gamma_achieved = config.gamma;
    res.taus = cert.taus;
    for (std::size_t i = 0; i < cert.history.size(); ++i) {
        IterLogEntry e;
        e.i = static_cast<int>(i) + 1;
        e.alpha = cert.history[i].first;
        e.beta = cert.history[i].second;
        e.gamma_i = config.gamma;
        res.iterations.push_back(e);
    }
    res.solution = cert.final_solution;
    return res;
}

namespace {

struct LevelProbe {
    bool feasible = false;
    lmi::LmiSolution solution;
};

LevelProbe probe_level(const PlantDims& dims, double lambda, const SymMat& n_i, const SymMat* n_hist,
                       const lmi::SolverOptions& solver, double eps_pd, bool center) {
    lmi::LmiProblem p;
    auto gb = lmi::VarBlock::sym_pd("Gamma", dims.n, eps_pd);
    auto sb = lmi::VarBlock::free_rect("S", dims.m, dims.n);
    p.add_variable(gb);
    p.add_variable(sb);
    p.add_variable(lmi::VarBlock::nonneg_scalar("alpha"));
    if (n_hist) p.add_variable(lmi::VarBlock::nonneg_scalar("beta"));
    lmi::AffineMatExpr expr = hinf_performance_expr(dims, lambda, gb, sb);
    expr.add_scalar_term("alpha", -1.0 * n_i);
    if (n_hist) expr.add_scalar_term("beta", -1.0 * (*n_hist));
    p.add_constraint(std::move(expr), lmi::Sense::StrictNeg, "step");
    lmi::SolverOptions opts = solver;
    opts.center = center;
    LevelProbe out;
    out.solution = lmi::solve(p, opts);
    out.feasible = out.solution.status == lmi::SolveStatus::Feasible;
    return out;
}

}  // namespace

ControllerResult minimize_gamma_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis_in,
                                           const SynthesisConfig& config) {
    check_inputs(dims, qmis_in, 1.0);
    const std::vector<QmiBlock> qmis = apply_ordering(qmis_in, config);

    const int total = 3 * dims.n + dims.m + dims.p;
    SymMat n_hist = SymMat::zero(total);
    std::vector<std::pair<double, double>> history;
    lmi::LmiSolution accepted;
    double lambda_lo = 0.0;  // grows monotonically across iterations

    ControllerResult res;
    for (std::size_t i = 0; i < qmis.size(); ++i) {
        const bool first = (i == 0);
        const SymMat block = pad_qmi(qmis[i], dims.n);
        const SymMat* hist_ptr = first ? nullptr : &n_hist;

        // Establish a feasible lower level for this iteration.
        lmi::LmiSolution lo_solution;
        if (first) {
            const double lambda_seed = 1e-12;
            LevelProbe probe = probe_level(dims, lambda_seed, block, hist_ptr, config.solver,
                                           config.solver.eps_pd, false);
            if (!probe.feasible)
                throw InfeasibleSeed("level minimization infeasible on the first dataset");
            lambda_lo = lambda_seed;
            lo_solution = std::move(probe.solution);
        } else {
            LevelProbe probe = probe_level(dims, lambda_lo, block, hist_ptr, config.solver,
                                           config.solver.eps_pd, false);
            if (!probe.feasible) {
                // The carried level is feasible up to solver tolerance; nudge
                // down a hair rather than give ground on monotonicity.
                bool ok = false;
                double lam = lambda_lo;
                for (int back = 0; back < 4 && !ok; ++back) {
                    lam *= 1.0 - 1e-9;
                    probe = probe_level(dims, lam, block, hist_ptr, config.solver,
                                        config.solver.eps_pd, false);
                    ok = probe.feasible;
                }
                if (!ok)
                    throw ContractViolation("carried level infeasible at iteration " +
                                            std::to_string(i + 1));
                lambda_lo = lam;
            }
            lo_solution = std::move(probe.solution);
        }

        // Bracket from above by doubling, then bisect (relative tolerance on
        // the level parameter).
        double hi = std::max(lambda_lo * 2.0, 1e-9);
        while (hi < 1e15) {
            LevelProbe probe = probe_level(dims, hi, block, hist_ptr, config.solver,
                                           config.solver.eps_pd, false);
            if (!probe.feasible) break;
            lambda_lo = hi;
            lo_solution = std::move(probe.solution);
            hi *= 2.0;
        }
        for (int step = 0; step < config.solver.bisection_steps; ++step) {
            if (hi - lambda_lo <= 1e-6 * hi) break;
            const double mid = 0.5 * (hi + lambda_lo);
            LevelProbe probe = probe_level(dims, mid, block, hist_ptr, config.solver,
                                           config.solver.eps_pd, false);
            if (probe.feasible) {
                lambda_lo = mid;
                lo_solution = std::move(probe.solution);
            } else {
                hi = mid;
            }
        }

        // Re-solve the accepted level centered so the accumulator the next
        // iteration inherits has slack.
        LevelProbe centered = probe_level(dims, lambda_lo, block, hist_ptr, config.solver,
                                          config.solver.eps_pd, true);
        if (centered.feasible) lo_solution = std::move(centered.solution);

        const double alpha = lo_solution.scalar("alpha");
        const double beta = first ? 0.0 : lo_solution.scalar("beta");
        n_hist = SymMat::symmetrize(alpha * block.mat() + beta * n_hist.mat());
        history.emplace_back(alpha, beta);
        accepted = lo_solution;

        IterLogEntry e;
        e.i = static_cast<int>(i) + 1;
        e.alpha = alpha;
        e.beta = beta;
        e.gamma_i = 1.0 / std::sqrt(lambda_lo);
        res.iterations.push_back(e);
    }

    res.Gamma = accepted.sym("Gamma");
    res.S = accepted.matrix("S");
    res.F = gain_from(res.Gamma, res.S);
    res.gamma_achieved = res.iterations.back().gamma_i;
    res.taus = iter_core::recover_taus(history);
    res.solution = accepted;
    return res;
}

}  // namespace hinf
}  // namespace ddhinf
