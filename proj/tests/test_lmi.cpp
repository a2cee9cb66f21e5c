#include "doctest.h"

#include <array>
#include <cmath>

#include "ddhinf/lmi.hpp"
#include "ddhinf/rng.hpp"
#include "ddhinf/spectral.hpp"

using namespace ddhinf;
using namespace ddhinf::lmi;

namespace {

// min t subject to 1 - t <= 0, as a 1x1 matrix inequality.
LmiProblem scalar_lp() {
    LmiProblem p;
    p.add_variable(VarBlock::free_scalar("t"));
    AffineMatExpr expr(1);
    Mat c0(1, 1);
    c0(0, 0) = 1.0;
    expr.set_constant(SymMat(c0));
    Mat coef(1, 1);
    coef(0, 0) = -1.0;
    expr.add_scalar_term("t", SymMat(coef));
    p.add_constraint(std::move(expr), Sense::NonstrictNeg, "lower-bound");
    p.objective = {{"t", 1.0}};
    return p;
}

LmiProblem multiplier_feasibility(const SymMat& m, const SymMat& n) {
    LmiProblem p;
    p.add_variable(VarBlock::nonneg_scalar("tau"));
    AffineMatExpr expr(m.dim());
    expr.set_constant(m);
    expr.add_scalar_term("tau", -1.0 * n);
    p.add_constraint(std::move(expr), Sense::StrictNeg, "shifted");
    return p;
}

}  // namespace

TEST_CASE("scalar LP as a 1x1 inequality") {
    const LmiSolution sol = solve(scalar_lp());
    REQUIRE(sol.status == SolveStatus::Feasible);
    CHECK(sol.scalar("t") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(*sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(verify(scalar_lp(), sol).pass);
}

TEST_CASE("multiplier feasibility, hand-analyzed") {
    const SymMat m(Mat::diag({1.0, -1.0}));

    SUBCASE("feasible: any tau > 1 separates") {
        const SymMat n(Mat::diag({1.0, 1.0}));
        const LmiProblem p = multiplier_feasibility(m, n);
        const LmiSolution sol = solve(p);
        REQUIRE(sol.status == SolveStatus::Feasible);
        const double tau = sol.scalar("tau");
        CHECK(tau > 1.0);
        CHECK(max_eigenvalue(SymMat::symmetrize(m.mat() - tau * n.mat())) < 0.0);
        CHECK(verify(p, sol).pass);
    }

    SUBCASE("infeasible: the (1,1) entry stays positive for every tau >= 0") {
        const SymMat n(Mat::diag({-1.0, 1.0}));
        const LmiSolution sol = solve(multiplier_feasibility(m, n));
        CHECK(sol.status == SolveStatus::Infeasible);
    }
}

TEST_CASE("verify flags a seeded violation") {
    const SymMat m(Mat::diag({1.0, -1.0}));
    const SymMat n(Mat::diag({1.0, 1.0}));
    const LmiProblem p = multiplier_feasibility(m, n);
    LmiSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Feasible);

    // push tau back to an infeasible value: tau = 0.9 leaves lambda_max = 0.1
    sol.values["tau"](0, 0) = 0.9;
    const VerificationReport rep = verify(p, sol);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.constraints.size() == 1);
    CHECK_FALSE(rep.constraints[0].ok);
    CHECK(rep.constraints[0].lambda_max == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(rep.worst_violation > 0.05);
}

TEST_CASE("positive definite block floor is honored") {
    // minimize t with Gamma's smallest eigenvalue pushed to the floor:
    // Gamma - t*I <= 0 forces t >= lambda_max(Gamma) >= floor.
    LmiProblem p;
    auto gb = VarBlock::sym_pd("Gamma", 3, 1e-6);
    p.add_variable(gb);
    p.add_variable(VarBlock::free_scalar("t"));
    AffineMatExpr expr(3);
    expr.add_diag_block(gb, 0, 1.0);
    Mat ct(3, 3);
    ct(0, 0) = ct(1, 1) = ct(2, 2) = -1.0;
    expr.add_scalar_term("t", SymMat(ct));
    p.add_constraint(std::move(expr), Sense::NonstrictNeg, "cap");
    p.objective = {{"t", 1.0}};

    const LmiSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Feasible);
    CHECK(min_eigenvalue(sol.sym("Gamma")) >= 1e-6 - 1e-7);
    const VerificationReport rep = verify(p, sol);
    CHECK(rep.pass);
}

TEST_CASE("monotone objective under added constraints") {
    Rng rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        const int d = 3 + static_cast<int>(rng.next_u64() % 3);
        const int nx = 2;
        auto rand_sym = [&](double scale) {
            Mat m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j) {
                    m(i, j) = scale * rng.normal();
                    m(j, i) = m(i, j);
                }
            return SymMat(m);
        };

        // min t s.t. M0 + x1*M1 + x2*M2 - t*I <= 0 (+ one more block for the
        // nested problem)
        auto build = [&](const std::vector<std::array<SymMat, 3>>& blocks) {
            LmiProblem p;
            for (int j = 0; j < nx; ++j) p.add_variable(VarBlock::free_scalar("x" + std::to_string(j)));
            p.add_variable(VarBlock::free_scalar("t"));
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                AffineMatExpr expr(d);
                expr.set_constant(blocks[b][0]);
                for (int j = 0; j < nx; ++j)
                    expr.add_scalar_term("x" + std::to_string(j), blocks[b][static_cast<std::size_t>(j) + 1]);
                expr.add_scalar_term("t", SymMat(-1.0 * Mat::identity(d)));
                p.add_constraint(std::move(expr), Sense::NonstrictNeg, "b" + std::to_string(b));
            }
            p.objective = {{"t", 1.0}};
            return p;
        };

        std::vector<std::array<SymMat, 3>> blocks;
        blocks.push_back({rand_sym(1.0), rand_sym(0.5), rand_sym(0.5)});
        const LmiSolution base = solve(build(blocks));
        REQUIRE(base.status == SolveStatus::Feasible);

        blocks.push_back({rand_sym(1.0), rand_sym(0.5), rand_sym(0.5)});
        const LmiSolution tighter = solve(build(blocks));
        REQUIRE(tighter.status == SolveStatus::Feasible);

        CHECK(*tighter.objective_value >= *base.objective_value - 1e-6);
    }
}

TEST_CASE("feasibility verdict is scale robust") {
    const SymMat m(Mat::diag({1.0, -1.0}));
    const SymMat n_feas(Mat::diag({1.0, 1.0}));
    const SymMat n_infeas(Mat::diag({-1.0, 1.0}));

    for (double scale : {1.0, 1e3}) {
        const SymMat ms = scale * m;
        CHECK(solve(multiplier_feasibility(ms, scale * n_feas)).status == SolveStatus::Feasible);
        CHECK(solve(multiplier_feasibility(ms, scale * n_infeas)).status == SolveStatus::Infeasible);
    }
}

TEST_CASE("centering returns a point with ample margin") {
    const SymMat m(Mat::diag({1.0, -1.0}));
    const SymMat n(Mat::diag({1.0, 1.0}));
    SolverOptions opts;
    opts.center = true;
    const LmiSolution sol = solve(multiplier_feasibility(m, n), opts);
    REQUIRE(sol.status == SolveStatus::Feasible);
    // Orders of magnitude deeper than the strict-margin threshold, so a
    // carried assignment re-verifies comfortably downstream.
    const double tau = sol.scalar("tau");
    const double lam = max_eigenvalue(SymMat::symmetrize(m.mat() - tau * n.mat()));
    CHECK(lam < -0.9e-4);
}

TEST_CASE("solver is deterministic") {
    const SymMat m(Mat::diag({1.0, -1.0}));
    const SymMat n(Mat::diag({1.0, 1.0}));
    const LmiSolution a = solve(multiplier_feasibility(m, n));
    const LmiSolution b = solve(multiplier_feasibility(m, n));
    CHECK(a.scalar("tau") == b.scalar("tau"));
    CHECK(a.newton_iterations == b.newton_iterations);
}

TEST_CASE("rejects unknown labels and bad shapes") {
    LmiProblem p;
    AffineMatExpr expr(2);
    Mat coef(2, 2);
    coef(0, 0) = 1.0;
    expr.add_scalar_term("ghost", SymMat(coef));
    p.add_constraint(std::move(expr), Sense::NonstrictNeg);
    CHECK_THROWS_AS(solve(p), InvalidCertificate);
}

TEST_CASE("verify rejects mismatched certificates") {
    const SymMat m(Mat::diag({1.0, -1.0}));
    const SymMat n(Mat::diag({1.0, 1.0}));
    const LmiProblem p = multiplier_feasibility(m, n);
    LmiSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Feasible);

    SUBCASE("non-feasible status") {
        sol.status = SolveStatus::Infeasible;
        CHECK_THROWS_AS(verify(p, sol), InvalidCertificate);
    }
    SUBCASE("wrong value shape") {
        sol.values["tau"] = Mat(2, 2);
        CHECK_THROWS_AS(verify(p, sol), InvalidCertificate);
    }
    SUBCASE("missing value") {
        sol.values.erase("tau");
        CHECK_THROWS_AS(verify(p, sol), InvalidCertificate);
    }
}

TEST_CASE("an unbounded objective is reported") {
    // minimize t with only an upper bound on -t: t can fall forever
    LmiProblem p;
    p.add_variable(VarBlock::free_scalar("t"));
    AffineMatExpr expr(1);
    Mat c0(1, 1);
    c0(0, 0) = -1.0;
    expr.set_constant(SymMat(c0));
    Mat coef(1, 1);
    coef(0, 0) = 1.0;
    expr.add_scalar_term("t", SymMat(coef));  // t - 1 <= 0
    p.add_constraint(std::move(expr), Sense::NonstrictNeg);
    p.objective = {{"t", 1.0}};
    CHECK_THROWS_AS(solve(p), Unbounded);
}
