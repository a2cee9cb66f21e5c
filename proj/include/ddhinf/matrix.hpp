#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "ddhinf/errors.hpp"

namespace ddhinf {

/// Dense real matrix, row-major storage. Small-scale workhorse for the
/// whole library; no view semantics, copies are cheap at these sizes.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols);  // zero-filled
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(int n);
    static Mat zero(int rows, int cols);
    static Mat diag(std::initializer_list<double> d);
    static Mat col_vec(const std::vector<double>& v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Mat& operator+=(const Mat& rhs);
    Mat& operator-=(const Mat& rhs);
    Mat& operator*=(double s);

    Mat transpose() const;
    Mat block(int row0, int col0, int nrows, int ncols) const;
    void set_block(int row0, int col0, const Mat& m);
    void add_block(int row0, int col0, const Mat& m, double scale = 1.0);

    double max_abs() const;   // max |entry|
    double norm_fro() const;  // Frobenius norm
    bool all_finite() const;
    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(Mat lhs, const Mat& rhs);
Mat operator-(Mat lhs, const Mat& rhs);
Mat operator*(double s, Mat m);
Mat operator*(Mat m, double s);
Mat operator*(const Mat& a, const Mat& b);
Mat operator-(Mat m);

/// Symmetric matrix with canonically symmetrized storage. Construction from
/// a general Mat checks |M(i,j)-M(j,i)| <= 1e-12 * max(1, max_abs) and then
/// stores (M + M^T)/2, which is idempotent bit-for-bit.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(const Mat& m);
    explicit SymMat(int dim) : mat_(dim, dim) {}

    static SymMat identity(int n) { return SymMat(Mat::identity(n)); }
    static SymMat zero(int n) { return SymMat(Mat::zero(n, n)); }

    /// Symmetrize without the near-symmetry check, for products like H*H^T
    /// whose asymmetry is pure roundoff of unknown scale.
    static SymMat symmetrize(const Mat& m);

    int dim() const { return mat_.rows(); }
    const Mat& mat() const { return mat_; }
    double operator()(int i, int j) const { return mat_(i, j); }

    double max_abs() const { return mat_.max_abs(); }
    double norm_fro() const { return mat_.norm_fro(); }

private:
    Mat mat_;
};

SymMat operator+(const SymMat& a, const SymMat& b);
SymMat operator-(const SymMat& a, const SymMat& b);
SymMat operator*(double s, const SymMat& m);

/// Solve A X = B by LU with partial pivoting. Throws SingularBlock when a
/// pivot falls below a relative threshold.
Mat lu_solve(const Mat& a, const Mat& b);

/// Inverse via lu_solve against the identity.
Mat inverse(const Mat& a);

/// Cholesky factor L (lower) of a symmetric positive definite matrix;
/// nullopt when the matrix is not (numerically) positive definite.
std::optional<Mat> cholesky(const SymMat& m);

/// x^T M^{-1} x for symmetric positive definite M.
double quad_form_inv(const SymMat& m, const Mat& x);

}  // namespace ddhinf
