#include "ddhinf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace ddhinf {

namespace {

double off_diag_fro(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

EigenSym eigen_sym(const SymMat& m) {
    if (!m.mat().all_finite()) throw InvalidMatrix("eigen_sym: non-finite entries");
    const int n = m.dim();
    Mat a = m.mat();
    Mat v = Mat::identity(n);
    const double norm = std::max(a.norm_fro(), 1e-300);
    const double thresh = 1e-12 * norm;

    for (int sweep = 0; sweep < 100 && off_diag_fro(a) > thresh; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= 1e-16 * norm) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenSym out;
    out.values.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
    out.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

double min_eigenvalue(const SymMat& m) {
    if (m.dim() == 0) throw InvalidMatrix("min_eigenvalue: empty matrix");
    return eigen_sym(m).values.front();
}

double max_eigenvalue(const SymMat& m) {
    if (m.dim() == 0) throw InvalidMatrix("max_eigenvalue: empty matrix");
    return eigen_sym(m).values.back();
}

bool is_negative_definite(const SymMat& m, double margin) {
    if (margin < 0.0) throw InvalidMatrix("is_negative_definite: margin must be >= 0");
    return max_eigenvalue(m) < -margin;
}

SymMat schur_complement(const SymMat& m, int block_split) {
    const int n = m.dim();
    if (block_split <= 0 || block_split >= n) throw DimensionMismatch("schur_complement: split out of range");
    const int k = n - block_split;
    const Mat m11 = m.mat().block(0, 0, block_split, block_split);
    const Mat m12 = m.mat().block(0, block_split, block_split, k);
    const Mat m21 = m.mat().block(block_split, 0, k, block_split);
    const Mat m22 = m.mat().block(block_split, block_split, k, k);
    const Mat x = lu_solve(m22, m21);  // throws SingularBlock
    return SymMat::symmetrize(m11 - m12 * x);
}

Mat sqrt_psd(const SymMat& m) {
    const EigenSym es = eigen_sym(m);
    const int n = m.dim();
    Mat root(n, n);
    for (int j = 0; j < n; ++j) {
        const double lam = std::max(es.values[j], 0.0);
        const double s = std::sqrt(lam);
        for (int i = 0; i < n; ++i) root(i, j) = es.vectors(i, j) * s;
    }
    return root * es.vectors.transpose();
}

namespace {

// Householder reduction to upper Hessenberg form (in place).
void to_hessenberg(Mat& a) {
    const int n = a.rows();
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale = std::max(scale, std::fabs(a(i, k)));
        if (scale == 0.0) continue;
        double alpha = 0.0;
        std::vector<double> vv(n, 0.0);
        for (int i = k + 1; i < n; ++i) {
            vv[i] = a(i, k) / scale;
            alpha += vv[i] * vv[i];
        }
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (vv[k + 1] < 0.0) alpha = -alpha;
        vv[k + 1] += alpha;
        const double beta = 1.0 / (alpha * vv[k + 1]);
        // A <- (I - beta v v^T) A (I - beta v v^T)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = k + 1; i < n; ++i) s += vv[i] * a(i, j);
            s *= beta;
            for (int i = k + 1; i < n; ++i) a(i, j) -= s * vv[i];
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += a(i, j) * vv[j];
            s *= beta;
            for (int j = k + 1; j < n; ++j) a(i, j) -= s * vv[j];
        }
        for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

using Cx = std::complex<double>;

std::vector<Cx> hessenberg_eigenvalues(const Mat& h0) {
    const int n = h0.rows();
    std::vector<std::vector<Cx>> h(n, std::vector<Cx>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h[i][j] = Cx(h0(i, j), 0.0);

    std::vector<Cx> eig(n);
    int hi = n - 1;
    int iters = 0;
    const int max_iters = 30 * std::max(n, 1);
    const double eps = 1e-15;

    while (hi >= 0) {
        // Deflate tiny subdiagonals.
        int lo = hi;
        while (lo > 0) {
            const double sub = std::abs(h[lo][lo - 1]);
            const double diag = std::abs(h[lo - 1][lo - 1]) + std::abs(h[lo][lo]);
            if (sub <= eps * std::max(diag, 1e-300)) {
                h[lo][lo - 1] = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = h[hi][hi];
            --hi;
            continue;
        }
        if (++iters > max_iters) throw NumericalFailure("spectral_radius: QR iteration did not converge");

        // Wilkinson shift: eigenvalue of the trailing 2x2 closest to h[hi][hi].
        const Cx a = h[hi - 1][hi - 1];
        const Cx b = h[hi - 1][hi];
        const Cx c = h[hi][hi - 1];
        const Cx d = h[hi][hi];
        const Cx tr = a + d;
        const Cx det = a * d - b * c;
        const Cx disc = std::sqrt(tr * tr - 4.0 * det);
        const Cx r1 = 0.5 * (tr + disc);
        const Cx r2 = 0.5 * (tr - disc);
        const Cx shift = (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;

        // One shifted QR step via complex Givens rotations on rows lo..hi.
        for (int i = lo; i <= hi; ++i) h[i][i] -= shift;
        std::vector<Cx> cs(hi), sn(hi);
        for (int k = lo; k < hi; ++k) {
            const Cx x = h[k][k];
            const Cx y = h[k + 1][k];
            const double nrm = std::sqrt(std::norm(x) + std::norm(y));
            if (nrm == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
                continue;
            }
            cs[k] = x / nrm;
            sn[k] = y / nrm;
            for (int j = k; j <= hi; ++j) {
                const Cx t1 = h[k][j];
                const Cx t2 = h[k + 1][j];
                h[k][j] = std::conj(cs[k]) * t1 + std::conj(sn[k]) * t2;
                h[k + 1][j] = -sn[k] * t1 + cs[k] * t2;
            }
        }
        for (int k = lo; k < hi; ++k) {
            for (int i = lo; i <= std::min(k + 1, hi); ++i) {
                const Cx t1 = h[i][k];
                const Cx t2 = h[i][k + 1];
                h[i][k] = t1 * cs[k] + t2 * sn[k];
                h[i][k + 1] = -t1 * std::conj(sn[k]) + t2 * std::conj(cs[k]);
            }
        }
        for (int i = lo; i <= hi; ++i) h[i][i] += shift;
    }
    return eig;
}

}  // namespace

double spectral_radius(const Mat& m) {
    if (!m.square()) throw DimensionMismatch("spectral_radius: matrix must be square");
    if (!m.all_finite()) throw InvalidMatrix("spectral_radius: non-finite entries");
    const int n = m.rows();
    if (n == 0) return 0.0;
    if (n == 1) return std::fabs(m(0, 0));

    Mat h = m;
    to_hessenberg(h);
    const auto eig = hessenberg_eigenvalues(h);
    double rho = 0.0;
    for (const auto& e : eig) rho = std::max(rho, std::abs(e));
    return rho;
}

}  // namespace ddhinf
