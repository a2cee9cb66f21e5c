#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddhinf/matrix.hpp"

namespace ddhinf {
namespace lmi {

enum class VarKind {
    NonnegScalar,  // v >= 0
    FreeScalar,
    FreeRect,  // rows x cols, unconstrained
    SymPd,     // symmetric, >= pd_floor * I
};

struct VarBlock {
    VarKind kind = VarKind::FreeScalar;
    std::string label;
    int rows = 1;
    int cols = 1;
    double pd_floor = 1e-6;  // SymPd only

    static VarBlock nonneg_scalar(std::string label);
    static VarBlock free_scalar(std::string label);
    static VarBlock free_rect(std::string label, int rows, int cols);
    static VarBlock sym_pd(std::string label, int dim, double pd_floor = 1e-6);

    bool is_scalar() const { return kind == VarKind::NonnegScalar || kind == VarKind::FreeScalar; }
    /// Number of independent scalar entries (upper triangle for SymPd).
    int num_entries() const;
};

/// Symmetric-matrix-valued function affine in the entries of the variable
/// blocks: F(v) = constant + sum_e v_e * coeff_e. Built by placing variable
/// blocks (optionally pre/post multiplied by constant matrices) into a block
/// layout; placements accumulate.
class AffineMatExpr {
public:
    AffineMatExpr() = default;
    explicit AffineMatExpr(int dim) : dim_(dim), constant_(SymMat::zero(dim)) {}

    int dim() const { return dim_; }
    const SymMat& constant() const { return constant_; }
    void set_constant(const SymMat& c);
    void add_constant(const SymMat& c);

    /// coeff * v for a scalar block: contributes v * coeff.
    void add_scalar_term(const std::string& label, const SymMat& coeff);

    /// Places sign * left * V * right with top-left corner (row0, col0).
    /// With `mirror`, the transposed image lands at (col0, row0) as well,
    /// which is how off-diagonal blocks keep F symmetric. V is addressed via
    /// its owning VarBlock so entry indexing matches the block kind.
    void add_block_term(const VarBlock& var, int row0, int col0, const Mat& left, const Mat& right,
                        double sign, bool mirror);

    /// Shorthand: sign * V placed as a diagonal block at offset.
    void add_diag_block(const VarBlock& var, int offset, double sign);

    SymMat evaluate(const std::map<std::string, Mat>& values) const;

    struct Term {
        std::string label;
        int entry;  // canonical entry index within the block
        int erow = 0, ecol = 0;  // the entry's position inside the block
        SymMat coeff;
    };
    const std::vector<Term>& terms() const { return terms_; }

private:
    int dim_ = 0;
    SymMat constant_;
    std::vector<Term> terms_;
};

enum class Sense { StrictNeg, NonstrictNeg };

struct Constraint {
    AffineMatExpr expr;
    Sense sense = Sense::NonstrictNeg;
    std::string name;
};

struct LmiProblem {
    std::vector<VarBlock> variables;
    std::vector<Constraint> constraints;
    /// Linear objective over scalar blocks (to minimize); empty = feasibility.
    std::vector<std::pair<std::string, double>> objective;

    void add_variable(VarBlock v) { variables.push_back(std::move(v)); }
    void add_constraint(AffineMatExpr expr, Sense sense, std::string name = "");
    const VarBlock& variable(const std::string& label) const;
    bool has_objective() const { return !objective.empty(); }
    void validate() const;
};

struct SolverOptions {
    double feas_tol = 1e-7;    // nonstrict violation allowance (relative to constraint scale)
    double margin_rel = 1e-8;  // strict constraints shifted to <= -margin*I, margin = margin_rel*scale
    double eps_pd = 1e-6;      // default floor handed to SymPd blocks built by callers
    int max_newton = 200;      // Newton iterations per centering stage
    int bisection_steps = 60;  // used by level-search callers, carried here for CLI exposure
    double gap_tol = 1e-9;     // barrier duality-gap target on the (normalized) objective
    int max_stages = 40;
    /// Run the feasibility phase to optimality (maximize the uniform margin,
    /// capped) instead of stopping at the first comfortably interior point.
    bool center = false;
    /// Cap on the maximized margin in centering mode; keeps the phase-1
    /// objective bounded when the feasible set allows arbitrarily deep points.
    double center_cap = 1.0;
    /// Box bound |entry| <= var_cap on every scalar unknown. The barrier
    /// needs a bounded domain (certificate families scale freely, so without
    /// a box the analytic center runs away); solutions needing larger entries
    /// are out of scope.
    double var_cap = 1e9;
};

enum class SolveStatus { Feasible, Infeasible, MaxIterations };

struct LmiSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::map<std::string, Mat> values;  // scalars as 1x1
    std::optional<double> objective_value;
    // diagnostics
    double phase1_slack = 0.0;  // optimal (normalized) uniform slack from phase 1
    int newton_iterations = 0;
    int barrier_stages = 0;
    std::string note;

    double scalar(const std::string& label) const;
    const Mat& matrix(const std::string& label) const;
    SymMat sym(const std::string& label) const;
};

struct ConstraintCheck {
    std::string name;
    double lambda_max = 0.0;
    double allowed = 0.0;  // pass iff lambda_max <= allowed
    bool ok = false;
};

struct BlockCheck {
    std::string label;
    double value = 0.0;    // lambda_min for SymPd, value for NonnegScalar
    double required = 0.0; // pass iff value >= required
    bool ok = false;
};

struct VerificationReport {
    bool pass = false;
    std::vector<ConstraintCheck> constraints;
    std::vector<BlockCheck> blocks;
    double worst_violation = 0.0;  // max(0, worst margin shortfall)
};

/// Solve the problem with a primal log-det barrier method. Returns
/// status Feasible only when the assignment re-checks against the original
/// constraints (same test as verify()).
LmiSolution solve(const LmiProblem& problem, const SolverOptions& options = {});

/// Independent certificate check: re-evaluates every constraint and block
/// bound with eigenvalue computations only.
VerificationReport verify(const LmiProblem& problem, const LmiSolution& solution,
                          const SolverOptions& options = {});

}  // namespace lmi
}  // namespace ddhinf
