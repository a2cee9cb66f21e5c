#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddhinf/datasets.hpp"
#include "ddhinf/iter_core.hpp"
#include "ddhinf/lmi.hpp"

namespace ddhinf {
namespace hinf {

struct PlantDims {
    int n = 0, m = 0, p = 0;
    int r() const { return n + p; }
};

enum class DatasetOrdering { Collection, Shuffled };

struct SynthesisConfig {
    double gamma = 10.0;  // attenuation level when fixed
    bool minimize_gamma = false;
    lmi::SolverOptions solver;
    DatasetOrdering ordering = DatasetOrdering::Collection;
    std::uint64_t shuffle_seed = 1;
};

struct IterLogEntry {
    int i = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma_i = 0.0;  // per-iteration level (minimize mode), else the fixed level
    bool fallback = false;
};

struct ControllerResult {
    Mat F;         // m x n state feedback gain
    SymMat Gamma;  // n x n certificate matrix, positive definite
    Mat S;         // m x n, F * Gamma = S
    double gamma_achieved = 0.0;
    std::vector<double> taus;  // aggregated certificate multipliers
    std::vector<IterLogEntry> iterations;
    lmi::LmiSolution solution;  // final solve, for diagnostics

    /// max |F*Gamma - S| relative to max |S|.
    double gain_residual() const;
};

/// The closed-loop performance inequality template: a symmetric block matrix
/// with row/col sizes (n, p, n, m, n), affine in the certificate matrix and
/// the gain surrogate, parameterized by lambda = 1/gamma^2. The variable
/// block labels are read from gamma_block / s_block.
lmi::AffineMatExpr hinf_performance_expr(const PlantDims& dims, double lambda,
                                         const lmi::VarBlock& gamma_block,
                                         const lmi::VarBlock& s_block);

/// Zero-pad a data-consistency block to the performance-expression dimension.
SymMat pad_qmi(const QmiBlock& qmi, int n);

/// One-shot synthesis over all datasets with per-dataset multipliers.
ControllerResult batch_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis,
                                  const SynthesisConfig& config);

/// Iterative synthesis, one dataset per step, two multipliers total.
ControllerResult iterative_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis,
                                      const SynthesisConfig& config);

/// Iterative synthesis that minimizes the attenuation level at each step;
/// the per-iteration levels are nonincreasing.
ControllerResult minimize_gamma_synthesize(const PlantDims& dims, const std::vector<QmiBlock>& qmis,
                                           const SynthesisConfig& config);

}  // namespace hinf
}  // namespace ddhinf
