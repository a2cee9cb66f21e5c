#include "doctest.h"

#include <cmath>
#include <limits>

#include "ddhinf/matrix.hpp"
#include "ddhinf/rng.hpp"
#include "ddhinf/spectral.hpp"

using namespace ddhinf;

namespace {

SymMat random_sym(Rng& rng, int n, double scale = 1.0) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            m(i, j) = scale * rng.normal();
            m(j, i) = m(i, j);
        }
    return SymMat(m);
}

}  // namespace

TEST_CASE("min_eigenvalue on closed-form cases") {
    CHECK(min_eigenvalue(SymMat::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_eigenvalue(SymMat(Mat::diag({2.0, -5.0}))) == doctest::Approx(-5.0).epsilon(1e-12));
    // eigenvalues of [[2,1],[1,2]] are 1 and 3
    CHECK(min_eigenvalue(SymMat(Mat{{2, 1}, {1, 2}})) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_eigenvalue(SymMat(Mat{{2, 1}, {1, 2}})) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("min_eigenvalue rejects non-finite input") {
    Mat bad(2, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(SymMat{bad}, InvalidMatrix);
}

TEST_CASE("is_negative_definite") {
    CHECK(is_negative_definite(SymMat(-1.0 * Mat::identity(2)), 0.0));
    CHECK_FALSE(is_negative_definite(SymMat::zero(2), 0.0));
    // eigenvalues -0.5 and -1.5
    CHECK(is_negative_definite(SymMat(Mat{{-1.0, 0.5}, {0.5, -1.0}}), 0.0));
    CHECK_THROWS_AS(is_negative_definite(SymMat::identity(2), -1.0), InvalidMatrix);
}

TEST_CASE("schur_complement closed forms") {
    const double a = 3.7;
    const SymMat dec(Mat{{a, 0.0}, {0.0, -1.0}});
    const SymMat sc1 = schur_complement(dec, 1);
    CHECK(sc1.dim() == 1);
    CHECK(sc1(0, 0) == doctest::Approx(a).epsilon(1e-14));

    // [[-eta, x],[x, -g]] -> -eta + x^2/g, the scalar state-bound reduction
    const double eta = 2.0, x = 1.0, g = 4.0;
    const SymMat bound(Mat{{-eta, x}, {x, -g}});
    CHECK(schur_complement(bound, 1)(0, 0) == doctest::Approx(-eta + x * x / g).epsilon(1e-14));

    CHECK(schur_complement(SymMat(Mat{{0.0, 1.0}, {1.0, -1.0}}), 1)(0, 0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(schur_complement(SymMat(Mat{{1.0, 1.0}, {1.0, 0.0}}), 1), SingularBlock);
}

TEST_CASE("spectral_radius closed forms") {
    CHECK(spectral_radius(Mat::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_radius(Mat::diag({0.5, -0.9})) == doctest::Approx(0.9).epsilon(1e-12));
    // eigenvalues +-0.5i
    CHECK(spectral_radius(Mat{{0.0, 1.0}, {-0.25, 0.0}}) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_THROWS_AS(spectral_radius(Mat(2, 3)), DimensionMismatch);

    Mat bad(2, 2);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(spectral_radius(bad), InvalidMatrix);
}

TEST_CASE("schur_complement rejects out-of-range splits") {
    const SymMat m = SymMat::identity(3);
    CHECK_THROWS_AS(schur_complement(m, 0), DimensionMismatch);
    CHECK_THROWS_AS(schur_complement(m, 3), DimensionMismatch);
}

TEST_CASE("spectral_radius matches known spectra of similarity transforms") {
    Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 7);
        Mat t(n, n);
        double rho = 0.0;
        for (int i = 0; i < n; ++i) {
            t(i, i) = rng.uniform(-2.0, 2.0);
            rho = std::max(rho, std::fabs(t(i, i)));
            for (int j = i + 1; j < n; ++j) t(i, j) = rng.normal();
        }
        Mat s = Mat::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(i, j) += 0.2 * rng.normal();
        const Mat a = s * t * inverse(s);
        CHECK(spectral_radius(a) == doctest::Approx(rho).epsilon(1e-7));
    }
}

TEST_CASE("Rayleigh quotient bounded by extreme eigenvalues") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 9);
        const SymMat m = random_sym(rng, n, 2.0);
        const double lo = min_eigenvalue(m);
        const double hi = max_eigenvalue(m);
        Mat v(n, 1);
        for (int i = 0; i < n; ++i) v(i, 0) = rng.normal();
        double num = 0.0, den = 0.0;
        const Mat mv = m.mat() * v;
        for (int i = 0; i < n; ++i) {
            num += v(i, 0) * mv(i, 0);
            den += v(i, 0) * v(i, 0);
        }
        const double q = num / den;
        const double tol = 1e-9 * std::max(1.0, std::fabs(hi) + std::fabs(lo));
        CHECK(q >= lo - tol);
        CHECK(q <= hi + tol);
    }
}

TEST_CASE("schur complement sign agrees with the full matrix when the tail is negative") {
    Rng rng(11);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 6);
        const int split = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - 1));
        const int tail = n - split;
        Mat full = random_sym(rng, n, 1.0).mat();
        // force the trailing block well negative definite
        Mat r(tail, tail);
        for (int i = 0; i < tail; ++i)
            for (int j = 0; j < tail; ++j) r(i, j) = rng.normal();
        const Mat tail_block = -1.0 * (r * r.transpose()) - 0.1 * Mat::identity(tail);
        full.set_block(split, split, tail_block);
        const SymMat m = SymMat::symmetrize(full);

        const double lam_full = max_eigenvalue(m);
        const double lam_comp = max_eigenvalue(schur_complement(m, split));
        if (std::fabs(lam_full) < 1e-12 || std::fabs(lam_comp) < 1e-12) continue;
        CHECK((lam_full < 0.0) == (lam_comp < 0.0));
        ++checked;
    }
    CHECK(checked > 40);
}

TEST_CASE("symmetrization is idempotent bit for bit") {
    Rng rng(3);
    Mat m(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = rng.normal();
    const SymMat once = SymMat::symmetrize(m);
    const SymMat twice = SymMat::symmetrize(once.mat());
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(once(i, j) == twice(i, j));
}

TEST_CASE("lu_solve and inverse round trip") {
    Rng rng(99);
    const int n = 6;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    const Mat id = a * inverse(a);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
}
