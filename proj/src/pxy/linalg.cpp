#include "pxy/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pxy/errors.hpp"

namespace pxy {

void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) throw InvalidMatrix(std::string(what) + " has non-finite entries");
}

SvdFactors svd_thin(const Matrix& a) {
    require_finite(a);
    if (a.rows() < 1 || a.cols() < 1) throw InvalidMatrix("svd of an empty matrix");

    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();

    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * eps * (s.size() ? s(0) : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > tol) ++r;

    SvdFactors f;
    f.sigma = s.head(r);
    f.u = svd.matrixU().leftCols(r);
    f.vt = svd.matrixV().leftCols(r).transpose();

    for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::Index imax = 0;
        f.u.col(j).cwiseAbs().maxCoeff(&imax);
        if (f.u(imax, j) < 0.0) {
            f.u.col(j) *= -1.0;
            f.vt.row(j) *= -1.0;
        }
    }
    return f;
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b, double ridge) {
    if (a.rows() != b.rows())
        throw ShapeError("least squares: a has " + std::to_string(a.rows()) + " rows, b has " +
                         std::to_string(b.rows()));
    if (!(ridge >= 0.0)) throw InvalidConfig("least squares: ridge must be nonnegative");
    require_finite(b, "right-hand side");

    const SvdFactors f = svd_thin(a);
    // x = V diag(s / (s^2 + ridge)) U^t b
    Vector scale = f.sigma.array() / (f.sigma.array().square() + ridge);
    return f.vt.transpose() * (scale.asDiagonal() * (f.u.transpose() * b));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("pearson_r: length mismatch");
    if (x.size() < 2) throw DegenerateInput("pearson_r: need at least two points");

    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson_r: constant sequence");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace pxy
