#include "ddhinf/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddhinf/spectral.hpp"

namespace ddhinf {
namespace lmi {

VarBlock VarBlock::nonneg_scalar(std::string label) {
    VarBlock v;
    v.kind = VarKind::NonnegScalar;
    v.label = std::move(label);
    return v;
}

VarBlock VarBlock::free_scalar(std::string label) {
    VarBlock v;
    v.kind = VarKind::FreeScalar;
    v.label = std::move(label);
    return v;
}

VarBlock VarBlock::free_rect(std::string label, int rows, int cols) {
    VarBlock v;
    v.kind = VarKind::FreeRect;
    v.label = std::move(label);
    v.rows = rows;
    v.cols = cols;
    return v;
}

VarBlock VarBlock::sym_pd(std::string label, int dim, double pd_floor) {
    VarBlock v;
    v.kind = VarKind::SymPd;
    v.label = std::move(label);
    v.rows = dim;
    v.cols = dim;
    v.pd_floor = pd_floor;
    return v;
}

int VarBlock::num_entries() const {
    switch (kind) {
        case VarKind::NonnegScalar:
        case VarKind::FreeScalar:
            return 1;
        case VarKind::FreeRect:
            return rows * cols;
        case VarKind::SymPd:
            return rows * (rows + 1) / 2;
    }
    return 0;
}

namespace {

// Canonical (row, col) pairs for a block's scalar entries.
std::vector<std::pair<int, int>> entry_positions(const VarBlock& v) {
    std::vector<std::pair<int, int>> pos;
    if (v.is_scalar()) {
        pos.emplace_back(0, 0);
    } else if (v.kind == VarKind::FreeRect) {
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) pos.emplace_back(i, j);
    } else {
        for (int i = 0; i < v.rows; ++i)
            for (int j = i; j < v.rows; ++j) pos.emplace_back(i, j);
    }
    return pos;
}

Mat entry_unit(const VarBlock& v, int row, int col) {
    Mat u(v.rows, v.cols);
    u(row, col) = 1.0;
    if (v.kind == VarKind::SymPd && row != col) u(col, row) = 1.0;
    return u;
}

}  // namespace

void AffineMatExpr::set_constant(const SymMat& c) {
    if (c.dim() != dim_) throw DimensionMismatch("AffineMatExpr constant dimension mismatch");
    constant_ = c;
}

void AffineMatExpr::add_constant(const SymMat& c) {
    if (c.dim() != dim_) throw DimensionMismatch("AffineMatExpr constant dimension mismatch");
    constant_ = constant_ + c;
}

void AffineMatExpr::add_scalar_term(const std::string& label, const SymMat& coeff) {
    if (coeff.dim() != dim_) throw DimensionMismatch("scalar term coefficient dimension mismatch");
    Term t;
    t.label = label;
    t.entry = 0;
    t.coeff = coeff;
    terms_.push_back(std::move(t));
}

void AffineMatExpr::add_block_term(const VarBlock& var, int row0, int col0, const Mat& left,
                                   const Mat& right, double sign, bool mirror) {
    if (left.cols() != var.rows || right.rows() != var.cols)
        throw DimensionMismatch("add_block_term multiplier shape mismatch");
    if (row0 + left.rows() > dim_ || col0 + right.cols() > dim_)
        throw DimensionMismatch("add_block_term placement out of range");
    const auto positions = entry_positions(var);
    for (int e = 0; e < static_cast<int>(positions.size()); ++e) {
        const auto [ri, ci] = positions[static_cast<std::size_t>(e)];
        const Mat img = sign * (left * entry_unit(var, ri, ci) * right);
        Mat full(dim_, dim_);
        full.add_block(row0, col0, img);
        if (mirror) full.add_block(col0, row0, img.transpose());
        Term t;
        t.label = var.label;
        t.entry = e;
        t.erow = ri;
        t.ecol = ci;
        t.coeff = SymMat(full);  // throws if a placement breaks symmetry
        terms_.push_back(std::move(t));
    }
}

void AffineMatExpr::add_diag_block(const VarBlock& var, int offset, double sign) {
    if (var.rows != var.cols) throw DimensionMismatch("diag block requires a square variable");
    add_block_term(var, offset, offset, Mat::identity(var.rows), Mat::identity(var.cols), sign, false);
}

SymMat AffineMatExpr::evaluate(const std::map<std::string, Mat>& values) const {
    Mat acc = constant_.mat();
    for (const auto& t : terms_) {
        const auto it = values.find(t.label);
        if (it == values.end()) throw InvalidCertificate("missing value for variable " + t.label);
        const Mat& v = it->second;
        if (t.erow >= v.rows() || t.ecol >= v.cols())
            throw InvalidCertificate("value shape mismatch for variable " + t.label);
        acc += t.coeff.mat() * v(t.erow, t.ecol);
    }
    return SymMat::symmetrize(acc);
}

void LmiProblem::add_constraint(AffineMatExpr expr, Sense sense, std::string name) {
    Constraint c;
    c.expr = std::move(expr);
    c.sense = sense;
    c.name = name.empty() ? ("c" + std::to_string(constraints.size())) : std::move(name);
    constraints.push_back(std::move(c));
}

const VarBlock& LmiProblem::variable(const std::string& label) const {
    for (const auto& v : variables)
        if (v.label == label) return v;
    throw InvalidCertificate("unknown variable " + label);
}

void LmiProblem::validate() const {
    for (const auto& v : variables) {
        if (v.rows <= 0 || v.cols <= 0) throw DimensionMismatch("variable block with empty shape");
        if (v.kind == VarKind::SymPd && v.pd_floor <= 0.0)
            throw InvalidMatrix("SymPd block requires a positive floor");
        int count = 0;
        for (const auto& w : variables)
            if (w.label == v.label) ++count;
        if (count != 1) throw InvalidCertificate("duplicate variable label " + v.label);
    }
    for (const auto& c : constraints) {
        if (c.expr.dim() <= 0 || c.expr.dim() > 64)
            throw DimensionMismatch("constraint dimension out of supported range");
        for (const auto& t : c.expr.terms()) {
            const VarBlock& v = variable(t.label);
            if (t.entry < 0 || t.entry >= v.num_entries())
                throw DimensionMismatch("term entry index out of range for " + t.label);
            if (t.coeff.dim() != c.expr.dim())
                throw DimensionMismatch("term coefficient dimension mismatch in " + c.name);
        }
    }
    for (const auto& [label, coef] : objective) {
        (void)coef;
        if (!variable(label).is_scalar()) throw InvalidCertificate("objective must reference scalar blocks");
    }
}

double LmiSolution::scalar(const std::string& label) const {
    const auto it = values.find(label);
    if (it == values.end()) throw InvalidCertificate("missing scalar " + label);
    return it->second(0, 0);
}

const Mat& LmiSolution::matrix(const std::string& label) const {
    const auto it = values.find(label);
    if (it == values.end()) throw InvalidCertificate("missing matrix " + label);
    return it->second;
}

SymMat LmiSolution::sym(const std::string& label) const { return SymMat(matrix(label)); }

// ---------------------------------------------------------------------------
// Solver internals
// ---------------------------------------------------------------------------

namespace {

struct VarLayout {
    std::vector<VarBlock> blocks;
    std::vector<int> offsets;
    int total = 0;

    explicit VarLayout(const std::vector<VarBlock>& vars) : blocks(vars) {
        offsets.reserve(vars.size());
        for (const auto& v : vars) {
            offsets.push_back(total);
            total += v.num_entries();
        }
    }

    int offset_of(const std::string& label) const {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (blocks[i].label == label) return offsets[i];
        throw InvalidCertificate("unknown variable " + label);
    }

    std::map<std::string, Mat> decode(const std::vector<double>& x) const {
        std::map<std::string, Mat> out;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const VarBlock& v = blocks[b];
            const int off = offsets[b];
            Mat m(v.rows, v.cols);
            const auto positions = entry_positions(v);
            for (int e = 0; e < static_cast<int>(positions.size()); ++e) {
                const auto [i, j] = positions[static_cast<std::size_t>(e)];
                m(i, j) = x[static_cast<std::size_t>(off + e)];
                if (v.kind == VarKind::SymPd && i != j) m(j, i) = m(i, j);
            }
            out.emplace(v.label, std::move(m));
        }
        return out;
    }
};

// One matrix-cone block in solver form: C + sum_j x_j A_j <= 0 (already
// margin-shifted and normalized).
struct ConeBlock {
    int dim = 0;
    Mat constant;
    std::vector<std::pair<int, Mat>> coeffs;  // (variable index, coefficient)

    Mat value(const std::vector<double>& x) const {
        Mat g = constant;
        for (const auto& [j, a] : coeffs) g.add_block(0, 0, a, x[static_cast<std::size_t>(j)]);
        return g;
    }
};

std::optional<Mat> chol_lower(const Mat& spd) {
    const int n = spd.rows();
    Mat l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = spd(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        const double lj = std::sqrt(d);
        l(j, j) = lj;
        for (int i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / lj;
        }
    }
    return l;
}

// Solve L Y = B (L lower triangular).
Mat forward_subst(const Mat& l, const Mat& b) {
    Mat y = b;
    const int n = l.rows();
    for (int j = 0; j < y.cols(); ++j) {
        for (int i = 0; i < n; ++i) {
            double s = y(i, j);
            for (int k = 0; k < i; ++k) s -= l(i, k) * y(k, j);
            y(i, j) = s / l(i, i);
        }
    }
    return y;
}

double log_det_from_chol(const Mat& l) {
    double s = 0.0;
    for (int i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

struct BarrierOutcome {
    std::vector<double> x;
    bool converged = false;
    bool early_exit = false;
    int newton_iterations = 0;
    int stages = 0;
};

// Minimize c^T x over the strict interior of the cone blocks with a log-det
// barrier. `x` must be strictly interior on entry. When watch_idx >= 0 the
// loop stops as soon as x[watch_idx] < watch_threshold.
BarrierOutcome barrier_minimize(const std::vector<ConeBlock>& cones, const std::vector<double>& c,
                                std::vector<double> x, const SolverOptions& opt, double gap_target,
                                int watch_idx, double watch_threshold, double t0 = 1.0) {
    const int nv = static_cast<int>(x.size());
    double m_total = 0.0;
    for (const auto& cb : cones) m_total += cb.dim;

    BarrierOutcome out;

    auto factorize_all = [&](const std::vector<double>& pt, std::vector<Mat>& ls) -> bool {
        ls.clear();
        ls.reserve(cones.size());
        for (const auto& cb : cones) {
            Mat g = cb.value(pt);
            g *= -1.0;
            auto l = chol_lower(g);
            if (!l) return false;
            ls.push_back(std::move(*l));
        }
        return true;
    };

    auto objective = [&](const std::vector<double>& pt) {
        double s = 0.0;
        for (int j = 0; j < nv; ++j) s += c[static_cast<std::size_t>(j)] * pt[static_cast<std::size_t>(j)];
        return s;
    };

    std::vector<Mat> chols;
    if (!factorize_all(x, chols)) throw NumericalFailure("barrier start point is not strictly interior");

    double t = t0;
    for (int stage = 0; stage < opt.max_stages; ++stage) {
        ++out.stages;
        for (int it = 0; it < opt.max_newton; ++it) {
            // Gradient and Hessian of t*c^T x - sum log det(-G_l(x)).
            std::vector<double> grad(static_cast<std::size_t>(nv), 0.0);
            Mat hess(nv, nv);
            for (std::size_t l = 0; l < cones.size(); ++l) {
                const ConeBlock& cb = cones[l];
                const Mat& low = chols[l];
                const int nc = static_cast<int>(cb.coeffs.size());
                std::vector<Mat> w(static_cast<std::size_t>(nc));
                for (int a = 0; a < nc; ++a) {
                    const Mat y = forward_subst(low, cb.coeffs[static_cast<std::size_t>(a)].second);
                    w[static_cast<std::size_t>(a)] = forward_subst(low, y.transpose());
                }
                for (int a = 0; a < nc; ++a) {
                    const int ja = cb.coeffs[static_cast<std::size_t>(a)].first;
                    double tr = 0.0;
                    for (int i = 0; i < cb.dim; ++i) tr += w[static_cast<std::size_t>(a)](i, i);
                    grad[static_cast<std::size_t>(ja)] += tr;
                    for (int b = a; b < nc; ++b) {
                        const int jb = cb.coeffs[static_cast<std::size_t>(b)].first;
                        double dot = 0.0;
                        const auto& wa = w[static_cast<std::size_t>(a)].data();
                        const auto& wb = w[static_cast<std::size_t>(b)].data();
                        for (std::size_t k = 0; k < wa.size(); ++k) dot += wa[k] * wb[k];
                        hess(ja, jb) += dot;
                        if (ja != jb) hess(jb, ja) += dot;
                    }
                }
            }
            for (int j = 0; j < nv; ++j) grad[static_cast<std::size_t>(j)] += t * c[static_cast<std::size_t>(j)];

            // Newton direction with adaptive ridge.
            Mat rhs(nv, 1);
            for (int j = 0; j < nv; ++j) rhs(j, 0) = -grad[static_cast<std::size_t>(j)];
            double ridge = 0.0;
            double htrace = 0.0;
            for (int j = 0; j < nv; ++j) htrace += hess(j, j);
            std::optional<Mat> hl;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Mat h = hess;
                if (ridge > 0.0)
                    for (int j = 0; j < nv; ++j) h(j, j) += ridge;
                hl = chol_lower(h);
                if (hl) break;
                ridge = (ridge == 0.0) ? std::max(1e-14 * htrace / std::max(nv, 1), 1e-300) : ridge * 100.0;
            }
            if (!hl) throw NumericalFailure("barrier Hessian factorization failed");
            Mat d = forward_subst(*hl, rhs);
            // back substitution with L^T
            for (int i = nv - 1; i >= 0; --i) {
                double s = d(i, 0);
                for (int k = i + 1; k < nv; ++k) s -= (*hl)(k, i) * d(k, 0);
                d(i, 0) = s / (*hl)(i, i);
            }

            double slope = 0.0;
            for (int j = 0; j < nv; ++j) slope += grad[static_cast<std::size_t>(j)] * d(j, 0);
            const double decrement2 = -slope;
            ++out.newton_iterations;
            if (decrement2 <= 2e-10) break;

            double fx = t * objective(x);
            for (const auto& lmat : chols) fx -= log_det_from_chol(lmat);

            double alpha = 1.0;
            bool stepped = false;
            std::vector<double> cand(x.size());
            std::vector<Mat> cand_chols;
            for (int bt = 0; bt < 60; ++bt) {
                for (int j = 0; j < nv; ++j)
                    cand[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] + alpha * d(j, 0);
                if (factorize_all(cand, cand_chols)) {
                    double fc = t * objective(cand);
                    for (const auto& lmat : cand_chols) fc -= log_det_from_chol(lmat);
                    if (fc <= fx + 0.01 * alpha * slope) {
                        x = cand;
                        chols = std::move(cand_chols);
                        stepped = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!stepped) break;  // stalled; stage result is the best we have
            if (watch_idx >= 0 && x[static_cast<std::size_t>(watch_idx)] < watch_threshold) {
                out.early_exit = true;
                out.x = std::move(x);
                return out;
            }
        }
        if (m_total / t <= gap_target) {
            out.converged = true;
            break;
        }
        if (objective(x) < -1e15) throw Unbounded("objective is unbounded below");
        t *= 5.0;
    }
    out.x = std::move(x);
    return out;
}

struct Compiled {
    VarLayout layout;
    std::vector<ConeBlock> cones;        // normalized + margin-shifted (solver view)
    std::vector<double> scales;          // per cone, normalization factor
    std::vector<double> margins;         // per original constraint, absolute strict margin
    int num_problem_constraints = 0;     // cones[0..n) map to problem constraints
    std::vector<std::string> bound_labels;  // cones[n..] labels (nonneg / pd floors)
};

Compiled compile(const LmiProblem& p, const SolverOptions& opt) {
    Compiled comp{VarLayout(p.variables), {}, {}, {}, 0, {}};
    comp.num_problem_constraints = static_cast<int>(p.constraints.size());

    for (const auto& con : p.constraints) {
        const double scale = std::max(1.0, con.expr.constant().max_abs());
        const double margin = (con.sense == Sense::StrictNeg) ? opt.margin_rel * scale : 0.0;
        ConeBlock cb;
        cb.dim = con.expr.dim();
        Mat c0 = con.expr.constant().mat();
        if (margin > 0.0)
            for (int i = 0; i < cb.dim; ++i) c0(i, i) += margin;
        cb.constant = (1.0 / scale) * c0;

        std::map<int, Mat> acc;
        for (const auto& term : con.expr.terms()) {
            const int j = comp.layout.offset_of(term.label) + term.entry;
            auto it = acc.find(j);
            if (it == acc.end())
                acc.emplace(j, (1.0 / scale) * term.coeff.mat());
            else
                it->second += (1.0 / scale) * term.coeff.mat();
        }
        for (auto& [j, a] : acc) cb.coeffs.emplace_back(j, std::move(a));
        comp.cones.push_back(std::move(cb));
        comp.scales.push_back(scale);
        comp.margins.push_back(margin);
    }

    // Variable bound blocks: v >= 0 as [-v] <= 0, and Gamma >= floor*I as
    // floor*I - Gamma <= 0.
    for (std::size_t b = 0; b < comp.layout.blocks.size(); ++b) {
        const VarBlock& v = comp.layout.blocks[b];
        const int off = comp.layout.offsets[b];
        if (v.kind == VarKind::NonnegScalar) {
            ConeBlock cb;
            cb.dim = 1;
            cb.constant = Mat(1, 1);
            Mat a(1, 1);
            a(0, 0) = -1.0;
            cb.coeffs.emplace_back(off, std::move(a));
            comp.cones.push_back(std::move(cb));
            comp.scales.push_back(1.0);
            comp.bound_labels.push_back(v.label);
        } else if (v.kind == VarKind::SymPd) {
            ConeBlock cb;
            cb.dim = v.rows;
            cb.constant = v.pd_floor * Mat::identity(v.rows);
            const auto positions = entry_positions(v);
            for (int e = 0; e < static_cast<int>(positions.size()); ++e) {
                const auto [i, j] = positions[static_cast<std::size_t>(e)];
                Mat a(v.rows, v.rows);
                a(i, j) = -1.0;
                if (i != j) a(j, i) = -1.0;
                cb.coeffs.emplace_back(off + e, std::move(a));
            }
            comp.cones.push_back(std::move(cb));
            comp.scales.push_back(1.0);
            comp.bound_labels.push_back(v.label);
        }
    }
    return comp;
}

std::vector<double> initial_point(const VarLayout& layout) {
    std::vector<double> x(static_cast<std::size_t>(layout.total), 0.0);
    for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
        const VarBlock& v = layout.blocks[b];
        const int off = layout.offsets[b];
        if (v.kind == VarKind::NonnegScalar) {
            x[static_cast<std::size_t>(off)] = 1.0;
        } else if (v.kind == VarKind::SymPd) {
            const auto positions = entry_positions(v);
            for (int e = 0; e < static_cast<int>(positions.size()); ++e) {
                const auto [i, j] = positions[static_cast<std::size_t>(e)];
                if (i == j) x[static_cast<std::size_t>(off + e)] = 1.0;
            }
        }
    }
    return x;
}

struct CheckOutcome {
    bool pass = false;
    VerificationReport report;
};

CheckOutcome check_assignment(const LmiProblem& p, const std::map<std::string, Mat>& values,
                              const SolverOptions& opt) {
    CheckOutcome out;
    out.report.pass = true;
    for (const auto& con : p.constraints) {
        const double scale = std::max(1.0, con.expr.constant().max_abs());
        ConstraintCheck cc;
        cc.name = con.name;
        const SymMat evaluated = con.expr.evaluate(values);
        cc.lambda_max = max_eigenvalue(evaluated);
        // Eigenvalues of the evaluated matrix carry rounding proportional to
        // its own magnitude (multipliers can be large), so the comparison
        // must allow for that floor.
        const double arith = 1e-12 * std::max(1.0, evaluated.max_abs());
        cc.allowed = (con.sense == Sense::StrictNeg) ? -opt.margin_rel * scale + arith
                                                     : opt.feas_tol * scale + arith;
        cc.ok = cc.lambda_max <= cc.allowed;
        if (!cc.ok) {
            out.report.pass = false;
            out.report.worst_violation = std::max(out.report.worst_violation, cc.lambda_max - cc.allowed);
        }
        out.report.constraints.push_back(std::move(cc));
    }
    for (const auto& v : p.variables) {
        if (v.kind == VarKind::FreeScalar || v.kind == VarKind::FreeRect) continue;
        const auto it = values.find(v.label);
        if (it == values.end()) throw InvalidCertificate("missing value for " + v.label);
        BlockCheck bc;
        bc.label = v.label;
        if (v.kind == VarKind::NonnegScalar) {
            bc.value = it->second(0, 0);
            bc.required = -opt.feas_tol;
        } else {
            bc.value = min_eigenvalue(SymMat(it->second));
            bc.required = v.pd_floor - opt.feas_tol - 1e-12 * std::max(1.0, it->second.max_abs());
        }
        bc.ok = bc.value >= bc.required;
        if (!bc.ok) {
            out.report.pass = false;
            out.report.worst_violation = std::max(out.report.worst_violation, bc.required - bc.value);
        }
        out.report.blocks.push_back(std::move(bc));
    }
    out.pass = out.report.pass;
    return out;
}

}  // namespace

LmiSolution solve(const LmiProblem& problem, const SolverOptions& options) {
    problem.validate();
    Compiled comp = compile(problem, options);
    const int nv = comp.layout.total;

    // Box every unknown: the certificate families scale freely, so the
    // log-det barrier has no minimizer on the raw cone; the box restores one.
    for (int j = 0; j < nv; ++j) {
        for (double sign : {1.0, -1.0}) {
            ConeBlock box;
            box.dim = 1;
            box.constant = Mat(1, 1);
            box.constant(0, 0) = -options.var_cap;
            Mat a(1, 1);
            a(0, 0) = sign;
            box.coeffs.emplace_back(j, std::move(a));
            comp.cones.push_back(std::move(box));
            comp.scales.push_back(1.0);
        }
    }

    LmiSolution sol;

    // Phase 1: minimize a uniform slack s over G_l(x) - s*I <= 0, bounded
    // below by the centering cap so the problem cannot run away. The box
    // blocks are left unslacked (the start point already satisfies them).
    std::vector<ConeBlock> ph1;
    ph1.reserve(comp.cones.size() + 1);
    for (std::size_t l = 0; l < comp.cones.size(); ++l) {
        ConeBlock c2 = comp.cones[l];
        const bool is_box = l >= comp.cones.size() - static_cast<std::size_t>(2 * nv);
        if (!is_box) {
            Mat a = -1.0 * Mat::identity(c2.dim);
            c2.coeffs.emplace_back(nv, std::move(a));
        }
        ph1.push_back(std::move(c2));
    }
    {
        ConeBlock cap;
        cap.dim = 1;
        cap.constant = Mat(1, 1);
        cap.constant(0, 0) = -options.center_cap;
        Mat a(1, 1);
        a(0, 0) = -1.0;
        cap.coeffs.emplace_back(nv, std::move(a));
        ph1.push_back(std::move(cap));
    }

    std::vector<double> x0 = initial_point(comp.layout);
    double worst = -1e300;
    for (const auto& cb : comp.cones) worst = std::max(worst, max_eigenvalue(SymMat::symmetrize(cb.value(x0))));
    std::vector<double> xs = x0;
    xs.push_back(std::max(worst + std::max(1.0, 0.1 * std::fabs(worst)), -0.9 * options.center_cap));

    std::vector<double> c1(static_cast<std::size_t>(nv + 1), 0.0);
    c1[static_cast<std::size_t>(nv)] = 1.0;

    // Feasibility-only solves stop at a comfortable interior point; centering
    // digs a few orders deeper before stopping so downstream carried
    // assignments keep ample slack. Both targets must stay reachable for
    // constraints whose entries mix scales, hence the modest values.
    const double exit_threshold = options.center ? -std::max(1e-4, 1e3 * options.feas_tol)
                                                 : -std::max(1e-6, 10.0 * options.feas_tol);
    const double phase1_gap = std::min(options.gap_tol, 0.1 * options.feas_tol);

    // Aggressive initial weight: the slack should fall before the free
    // certificate directions wander toward the box.
    double m_total = 1.0;
    for (const auto& cb : ph1) m_total += cb.dim;

    BarrierOutcome ph1_out;
    try {
        ph1_out = barrier_minimize(ph1, c1, xs, options, phase1_gap, nv, exit_threshold, m_total);
    } catch (const Unbounded&) {
        throw NumericalFailure("phase 1 slack minimization diverged");
    }
    sol.newton_iterations += ph1_out.newton_iterations;
    sol.barrier_stages += ph1_out.stages;
    const double slack = ph1_out.x[static_cast<std::size_t>(nv)];
    sol.phase1_slack = slack;

    std::vector<double> x(ph1_out.x.begin(), ph1_out.x.end() - 1);

    if (!ph1_out.early_exit && !ph1_out.converged && slack > options.feas_tol) {
        sol.status = SolveStatus::MaxIterations;
        sol.note = "phase 1 did not converge";
        sol.values = comp.layout.decode(x);
        return sol;
    }
    if (slack > options.feas_tol) {
        sol.status = SolveStatus::Infeasible;
        sol.note = "phase 1 optimal slack " + std::to_string(slack);
        sol.values = comp.layout.decode(x);
        return sol;
    }

    bool phase2_converged = true;
    if (problem.has_objective() && slack < 0.0) {
        std::vector<double> c(static_cast<std::size_t>(nv), 0.0);
        double cmax = 0.0;
        for (const auto& [label, coef] : problem.objective) {
            c[static_cast<std::size_t>(comp.layout.offset_of(label))] += coef;
            cmax = std::max(cmax, std::fabs(coef));
        }
        if (cmax > 0.0)
            for (double& v : c) v /= cmax;
        const BarrierOutcome ph2 = barrier_minimize(comp.cones, c, x, options, options.gap_tol, -1, 0.0);
        sol.newton_iterations += ph2.newton_iterations;
        sol.barrier_stages += ph2.stages;
        phase2_converged = ph2.converged;
        x = ph2.x;
        // A minimizer pinned against the variable box means the objective
        // keeps improving beyond any representable certificate.
        for (int j = 0; j < nv; ++j) {
            if (c[static_cast<std::size_t>(j)] != 0.0 &&
                std::fabs(x[static_cast<std::size_t>(j)]) >= 0.9 * options.var_cap)
                throw Unbounded("objective unbounded below (variable cap reached)");
        }
    }

    sol.values = comp.layout.decode(x);
    if (problem.has_objective()) {
        double obj = 0.0;
        for (const auto& [label, coef] : problem.objective) obj += coef * sol.values.at(label)(0, 0);
        sol.objective_value = obj;
    }

    const CheckOutcome check = check_assignment(problem, sol.values, options);
    if (check.pass) {
        sol.status = phase2_converged ? SolveStatus::Feasible : SolveStatus::MaxIterations;
        if (!phase2_converged) sol.note = "phase 2 gap target not reached";
    } else {
        sol.status = SolveStatus::MaxIterations;
        sol.note = "assignment failed re-check; worst violation " +
                   std::to_string(check.report.worst_violation);
    }
    return sol;
}

VerificationReport verify(const LmiProblem& problem, const LmiSolution& solution,
                          const SolverOptions& options) {
    if (solution.status != SolveStatus::Feasible)
        throw InvalidCertificate("verify requires a feasible solution");
    problem.validate();
    for (const auto& v : problem.variables) {
        const auto it = solution.values.find(v.label);
        if (it == solution.values.end()) throw InvalidCertificate("solution missing " + v.label);
        if (it->second.rows() != v.rows || it->second.cols() != v.cols)
            throw InvalidCertificate("solution shape mismatch for " + v.label);
    }
    return check_assignment(problem, solution.values, options).report;
}

}  // namespace lmi
}  // namespace ddhinf
