#pragma once

#include <Eigen/Dense>
#include <span>

namespace pxy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD `a = U * diag(sigma) * Vt` with numerically-zero singular values removed.
///
/// Columns of U are sign-normalised so that the largest-magnitude entry of each
/// column is nonnegative; the matching row of Vt is flipped with it.
struct SvdFactors {
    Matrix u;      // rows(a) x r
    Vector sigma;  // r, non-increasing, all > 0
    Matrix vt;     // r x cols(a)

    Eigen::Index rank() const { return sigma.size(); }
    Matrix reconstruct() const { return u * sigma.asDiagonal() * vt; }
};

/// Throws InvalidMatrix when any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what = "matrix");

SvdFactors svd_thin(const Matrix& a);

/// Minimum-norm solution of argmin ||a x - b||_F^2 + ridge ||x||_F^2, via the SVD
/// pseudo-inverse. Requires a.rows() == b.rows() and ridge >= 0.
Matrix solve_least_squares(const Matrix& a, const Matrix& b, double ridge = 0.0);

/// Sample Pearson correlation. Throws DegenerateInput for constant input or length < 2.
double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace pxy
