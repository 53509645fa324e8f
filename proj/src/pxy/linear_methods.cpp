#include "pxy/linear_methods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pxy/errors.hpp"

namespace pxy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Matrix gather_columns(const Matrix& x, const std::vector<Eigen::Index>& cols) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(cols[i]);
    return out;
}

// True when column j of x lies (numerically) in the span of the active columns.
bool dependent_on(const Matrix& x, const std::vector<Eigen::Index>& active, Eigen::Index j) {
    const double norm2 = x.col(j).squaredNorm();
    if (norm2 == 0.0) return true;
    if (active.empty()) return false;
    const Matrix xa = gather_columns(x, active);
    const Vector coef = xa.colPivHouseholderQr().solve(x.col(j));
    return (x.col(j) - xa * coef).squaredNorm() <= 1e-10 * norm2;
}

Matrix spd_inverse(const Matrix& a, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    const Vector& ev = eig.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (!(top > 0.0) || ev.minCoeff() <= 1e-12 * top)
        throw SingularError(std::string(what) + " is singular; use a regularisation lambda > 0");
    return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Vector lars_lasso(const Matrix& x, const Vector& y, double lambda) {
    if (x.rows() != y.size()) throw ShapeError("lars: design has " + std::to_string(x.rows()) +
                                               " rows but target has " + std::to_string(y.size()));
    if (!(lambda >= 0.0)) throw InvalidConfig("lars: lambda must be nonnegative");
    require_finite(x, "design matrix");
    if (!y.allFinite()) throw InvalidMatrix("lars: target has non-finite entries");

    const Eigen::Index p = x.cols();
    Vector beta = Vector::Zero(p);
    Vector corr = x.transpose() * y;
    if (p == 0 || corr.cwiseAbs().maxCoeff() <= lambda) return beta;

    std::vector<Eigen::Index> active;
    std::vector<char> is_active(static_cast<std::size_t>(p), 0), ignored(static_cast<std::size_t>(p), 0);
    Vector signs = Vector::Zero(p);

    auto admit_best = [&](Eigen::Index skip) {
        // Largest |correlation| among admissible inactive columns.
        for (;;) {
            Eigen::Index best = -1;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (is_active[j] || ignored[j] || j == skip) continue;
                if (best < 0 || std::abs(corr(j)) > std::abs(corr(best))) best = j;
            }
            if (best < 0) return;
            if (dependent_on(x, active, best)) {
                ignored[best] = 1;
                continue;
            }
            active.push_back(best);
            is_active[best] = 1;
            signs(best) = sign_of(corr(best));
            return;
        }
    };

    double level = corr.cwiseAbs().maxCoeff();  // current lambda on the path
    admit_best(-1);

    Eigen::Index just_dropped = -1;
    const int max_iter = 8 * static_cast<int>(p + x.rows()) + 64;
    for (int iter = 0; iter < max_iter && !active.empty(); ++iter) {
        const Matrix xa = gather_columns(x, active);
        Vector sa(static_cast<Eigen::Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) sa(static_cast<Eigen::Index>(i)) = signs(active[i]);

        // Along the path beta_A(level - t) = beta_A + t w with w = (X_A^t X_A)^-1 s_A.
        const Vector w = (xa.transpose() * xa).ldlt().solve(sa);
        const Vector a = x.transpose() * (xa * w);

        double step = level - lambda;
        Eigen::Index join = -1, drop = -1;

        for (Eigen::Index j = 0; j < p; ++j) {
            if (is_active[j] || ignored[j] || j == just_dropped) continue;
            for (const double s : {1.0, -1.0}) {
                const double denom = 1.0 - s * a(j);
                if (denom <= 1e-12) continue;
                const double t = (level - s * corr(j)) / denom;
                if (t > 1e-12 && t < step) {
                    step = t;
                    join = j;
                    drop = -1;
                }
            }
        }
        for (std::size_t i = 0; i < active.size(); ++i) {
            const double wi = w(static_cast<Eigen::Index>(i));
            if (wi == 0.0) continue;
            const double t = -beta(active[i]) / wi;
            if (t > 1e-12 && t < step) {
                step = t;
                drop = static_cast<Eigen::Index>(i);
                join = -1;
            }
        }

        for (std::size_t i = 0; i < active.size(); ++i) beta(active[i]) += step * w(static_cast<Eigen::Index>(i));
        level -= step;
        corr = x.transpose() * (y - x * beta);

        if (join < 0 && drop < 0) break;  // reached the requested lambda
        just_dropped = -1;

        if (drop >= 0) {
            const Eigen::Index j = active[static_cast<std::size_t>(drop)];
            beta(j) = 0.0;
            is_active[j] = 0;
            signs(j) = 0.0;
            active.erase(active.begin() + drop);
            just_dropped = j;
            if (active.empty()) admit_best(j);
        } else if (dependent_on(x, active, join)) {
            ignored[join] = 1;
        } else {
            active.push_back(join);
            is_active[join] = 1;
            signs(join) = sign_of(corr(join));
        }
    }
    return beta;
}

Vector sparse_code_attributes(const Vector& style_scores, const Matrix& g, double lambda_s) {
    if (style_scores.size() != g.cols())
        throw ShapeError("sparse coding: " + std::to_string(style_scores.size()) + " style scores for G with " +
                         std::to_string(g.cols()) + " styles");
    return lars_lasso(g.transpose(), style_scores, lambda_s);
}

// ---------------------------------------------------------------------------

Matrix one_vs_rest_labels(const std::vector<std::size_t>& labels, std::size_t n) {
    Matrix y = Matrix::Constant(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(n), -1.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n) throw IndexError("label index out of range");
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }
    return y;
}

EszslModel fit_eszsl(const FeatureDataset& data, const Matrix& g, double lambda1, double lambda2) {
    if (data.size() == 0) throw DataError("ESZSL needs at least one training sample");
    if (static_cast<std::size_t>(g.cols()) != data.styles.size())
        throw ShapeError("ESZSL: G has " + std::to_string(g.cols()) + " styles, dataset has " +
                         std::to_string(data.styles.size()));
    if (lambda1 < 0.0 || lambda2 < 0.0) throw InvalidConfig("ESZSL lambdas must be nonnegative");
    require_finite(g, "G");

    const Matrix e = data.features.transpose();  // d x k
    const Matrix y = one_vs_rest_labels(data.labels, data.styles.size());
    const auto d = e.rows();
    const auto m = g.rows();

    const Matrix left = spd_inverse(e * e.transpose() + lambda1 * Matrix::Identity(d, d), "E E^t + lambda1 I");
    const Matrix right = spd_inverse(g * g.transpose() + lambda2 * Matrix::Identity(m, m), "G G^t + lambda2 I");

    EszslModel model;
    model.q = left * (e * y * g.transpose()) * right;
    model.lambda1 = lambda1;
    model.lambda2 = lambda2;
    return model;
}

Vector predict_eszsl(const EszslModel& model, const Vector& feature) {
    if (feature.size() != model.q.rows())
        throw ShapeError("ESZSL: feature has dimension " + std::to_string(feature.size()) + ", model expects " +
                         std::to_string(model.q.rows()));
    return model.q.transpose() * feature;
}

Matrix predict_eszsl(const EszslModel& model, const Matrix& features) {
    if (features.cols() != model.q.rows())
        throw ShapeError("ESZSL: features have dimension " + std::to_string(features.cols()) + ", model expects " +
                         std::to_string(model.q.rows()));
    return features * model.q;
}

// ---------------------------------------------------------------------------

PcaProxyModel fit_pca_proxy(const FeatureDataset& data, double variance_target) {
    if (!(variance_target > 0.0 && variance_target <= 1.0))
        throw InvalidConfig("variance target must lie in (0, 1]");
    if (data.size() < 2) throw DataError("PCA proxy needs at least two samples");

    PcaProxyModel model;
    model.mean = data.features.colwise().mean().transpose();
    const Matrix centred = data.features.rowwise() - model.mean.transpose();  // k x d

    if (centred.cwiseAbs().maxCoeff() == 0.0) throw DataError("PCA proxy: all samples are identical");
    const SvdFactors f = svd_thin(centred.transpose());  // U: principal axes (d x r)

    const Vector var = f.sigma.array().square();
    const double total = var.sum();
    Eigen::Index p = 0;
    double covered = 0.0;
    while (p < var.size()) {
        covered += var(p++);
        if (covered >= variance_target * total * (1.0 - 1e-12)) break;
    }
    model.retained_variance = covered / total;
    model.projection = f.u.leftCols(p).transpose();

    const Matrix v = model.projection * centred.transpose();  // p x k
    const std::size_t n = data.styles.size();
    Matrix ht = Matrix::Zero(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < data.size(); ++i)
        ht(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(data.labels[i])) = 1.0;
    model.style_encoder = solve_least_squares(v.transpose(), ht, 0.0);
    return model;
}

Vector predict_pca_proxy(const PcaProxyModel& model, const Matrix& g, const Vector& feature) {
    if (feature.size() != model.mean.size())
        throw ShapeError("PCA proxy: feature has dimension " + std::to_string(feature.size()) + ", model expects " +
                         std::to_string(model.mean.size()));
    if (g.cols() != model.style_encoder.cols())
        throw ShapeError("PCA proxy: G has " + std::to_string(g.cols()) + " styles, model encodes " +
                         std::to_string(model.style_encoder.cols()));
    const Vector v = model.projection * (feature - model.mean);
    return g * (model.style_encoder.transpose() * v);
}

Matrix predict_pca_proxy(const PcaProxyModel& model, const Matrix& g, const Matrix& features) {
    if (features.cols() != model.mean.size())
        throw ShapeError("PCA proxy: features have dimension " + std::to_string(features.cols()) +
                         ", model expects " + std::to_string(model.mean.size()));
    if (g.cols() != model.style_encoder.cols()) throw ShapeError("PCA proxy: G style count does not match model");
    const Matrix v = (features.rowwise() - model.mean.transpose()) * model.projection.transpose();  // k x p
    return v * model.style_encoder * g.transpose();
}

}  // namespace pxy
