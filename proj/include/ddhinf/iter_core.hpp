#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddhinf/lmi.hpp"
#include "ddhinf/matrix.hpp"

namespace ddhinf {
namespace iter_core {

/// Per-iteration problem factory. The engine drives the loop; the template
/// owns the constraint shape (which may contain its own matrix variables and
/// objective). On the first iteration the historical accumulator is zero and
/// the template must omit the beta variable.
struct StepTemplate {
    std::function<lmi::LmiProblem(const SymMat& N_i, const SymMat& N_hist, int iteration, bool first)>
        build;
    std::string alpha_label = "alpha";
    std::string beta_label = "beta";
    /// Extra values for the fallback assignment (alpha=0, beta=1, previous
    /// auxiliaries); lets callers recompute state-dependent scalars.
    std::function<void(std::map<std::string, Mat>& values)> fallback_patch;
};

struct IterationState {
    int i = 1;  // next iteration index (1-based)
    SymMat Nh;  // historical accumulator
    std::vector<std::pair<double, double>> history;  // (alpha_i, beta_i)
    std::optional<lmi::LmiSolution> last;
    int fallback_events = 0;

    static IterationState initial(int dim);
};

/// One iteration: solve, on success update the accumulator with
/// alpha*N_i + beta*N_hist and append to the history. An infeasible first
/// step raises InfeasibleSeed; later steps retry the explicit fallback
/// (alpha=0, beta=1, previous auxiliaries) and raise ContractViolation only
/// if even that fails verification.
std::pair<lmi::LmiSolution, IterationState> iterate_step(const StepTemplate& tmpl, const SymMat& N_i,
                                                         IterationState state,
                                                         const lmi::SolverOptions& options);

struct AggregateCertificate {
    std::vector<double> taus;  // tau_i = alpha_i * prod_{j>i} beta_j
    std::vector<std::pair<double, double>> history;
    lmi::LmiSolution final_solution;
    int fallback_events = 0;
};

AggregateCertificate run_iteration(const StepTemplate& tmpl, const std::vector<SymMat>& blocks,
                                   const lmi::SolverOptions& options);

/// tau recovery from the recorded (alpha, beta) history, backward product.
std::vector<double> recover_taus(const std::vector<std::pair<double, double>>& history);

/// M - sum tau_i N_i, the aggregated single-inequality matrix.
SymMat aggregate_matrix(const SymMat& M, const std::vector<SymMat>& blocks,
                        const std::vector<double>& taus);

/// Convenience driver for a constant target matrix M: iterates over the
/// blocks with (alpha, beta) unknowns only and post-checks the aggregate.
AggregateCertificate run_iteration_constant(const SymMat& M, const std::vector<SymMat>& blocks,
                                            const lmi::SolverOptions& options);

struct CertReport {
    double lambda_max_delta = 0.0;  // lambda_max(M - tau N)
    bool certificate_negative = false;
    int samples_accepted = 0;
    int implication_failures = 0;
    bool found_counterexample = false;
    bool inconclusive = false;  // positive delta but no sampled counterexample
};

/// Multiplier certificate check: reports lambda_max(M - tau N) and samples
/// random Z in the N-compatible set, confirming each also satisfies the
/// M-inequality. Probabilistic, not exhaustive.
CertReport check_s_lemma(const SymMat& M, const SymMat& N, double tau, int identity_block,
                         int samples = 10000, std::uint64_t seed = 12345);

}  // namespace iter_core
}  // namespace ddhinf
