#include "ddhinf/matrix.hpp"

#include <cmath>
#include <cstdlib>

namespace ddhinf {

Mat::Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw InvalidMatrix("negative matrix dimension");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_) throw InvalidMatrix("ragged initializer rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::zero(int rows, int cols) { return Mat(rows, cols); }

Mat Mat::diag(std::initializer_list<double> d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    int i = 0;
    for (double v : d) {
        m(i, i) = v;
        ++i;
    }
    return m;
}

Mat Mat::col_vec(const std::vector<double>& v) {
    Mat m(static_cast<int>(v.size()), 1);
    for (int i = 0; i < m.rows(); ++i) m(i, 0) = v[static_cast<std::size_t>(i)];
    return m;
}

Mat& Mat::operator+=(const Mat& rhs) {
    if (!same_shape(rhs)) throw DimensionMismatch("matrix add shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& rhs) {
    if (!same_shape(rhs)) throw DimensionMismatch("matrix sub shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::block(int row0, int col0, int nrows, int ncols) const {
    if (row0 < 0 || col0 < 0 || row0 + nrows > rows_ || col0 + ncols > cols_)
        throw DimensionMismatch("block out of range");
    Mat b(nrows, ncols);
    for (int i = 0; i < nrows; ++i)
        for (int j = 0; j < ncols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
    return b;
}

void Mat::set_block(int row0, int col0, const Mat& m) {
    if (row0 < 0 || col0 < 0 || row0 + m.rows() > rows_ || col0 + m.cols() > cols_)
        throw DimensionMismatch("set_block out of range");
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) (*this)(row0 + i, col0 + j) = m(i, j);
}

void Mat::add_block(int row0, int col0, const Mat& m, double scale) {
    if (row0 < 0 || col0 < 0 || row0 + m.rows() > rows_ || col0 + m.cols() > cols_)
        throw DimensionMismatch("add_block out of range");
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) (*this)(row0 + i, col0 + j) += scale * m(i, j);
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Mat::norm_fro() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

bool Mat::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat operator+(Mat lhs, const Mat& rhs) {
    lhs += rhs;
    return lhs;
}

Mat operator-(Mat lhs, const Mat& rhs) {
    lhs -= rhs;
    return lhs;
}

Mat operator*(double s, Mat m) {
    m *= s;
    return m;
}

Mat operator*(Mat m, double s) {
    m *= s;
    return m;
}

Mat operator-(Mat m) {
    m *= -1.0;
    return m;
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matrix product shape mismatch");
    Mat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

SymMat::SymMat(const Mat& m) {
    if (!m.square()) throw InvalidMatrix("SymMat requires a square matrix");
    if (!m.all_finite()) throw InvalidMatrix("SymMat entries must be finite");
    const double tol = 1e-12 * std::max(1.0, m.max_abs());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j)
            if (std::fabs(m(i, j) - m(j, i)) > tol) throw InvalidMatrix("matrix is not symmetric within tolerance");
    mat_ = m;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            mat_(i, j) = v;
            mat_(j, i) = v;
        }
}

SymMat SymMat::symmetrize(const Mat& m) {
    if (!m.square()) throw InvalidMatrix("symmetrize requires a square matrix");
    Mat s(m.rows(), m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        s(i, i) = m(i, i);
        for (int j = i + 1; j < m.cols(); ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    SymMat out;
    out.mat_ = std::move(s);
    return out;
}

SymMat operator+(const SymMat& a, const SymMat& b) { return SymMat::symmetrize(a.mat() + b.mat()); }
SymMat operator-(const SymMat& a, const SymMat& b) { return SymMat::symmetrize(a.mat() - b.mat()); }
SymMat operator*(double s, const SymMat& m) { return SymMat::symmetrize(s * m.mat()); }

Mat lu_solve(const Mat& a, const Mat& b) {
    if (!a.square()) throw DimensionMismatch("lu_solve needs a square matrix");
    if (a.rows() != b.rows()) throw DimensionMismatch("lu_solve rhs row mismatch");
    const int n = a.rows();
    Mat lu = a;
    Mat x = b;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;

    const double scale = std::max(1.0, a.max_abs());
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best <= 1e-14 * scale) throw SingularBlock("singular matrix in lu_solve");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            for (int j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(p, j));
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            lu(i, k) = f;
            for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (int j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < x.cols(); ++j) {
            double s = x(k, j);
            for (int i = k + 1; i < n; ++i) s -= lu(k, i) * x(i, j);
            x(k, j) = s / lu(k, k);
        }
    }
    return x;
}

Mat inverse(const Mat& a) { return lu_solve(a, Mat::identity(a.rows())); }

std::optional<Mat> cholesky(const SymMat& m) {
    const int n = m.dim();
    Mat l(n, n);
    const double floor = 1e-300;
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > floor)) return std::nullopt;
        const double lj = std::sqrt(d);
        l(j, j) = lj;
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / lj;
        }
    }
    return l;
}

double quad_form_inv(const SymMat& m, const Mat& x) {
    if (x.cols() != 1 || x.rows() != m.dim()) throw DimensionMismatch("quad_form_inv shape mismatch");
    const Mat y = lu_solve(m.mat(), x);
    double s = 0.0;
    for (int i = 0; i < x.rows(); ++i) s += x(i, 0) * y(i, 0);
    return s;
}

}  // namespace ddhinf
