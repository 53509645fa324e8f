#pragma once

#include "pxy/domain.hpp"
#include "pxy/linalg.hpp"

namespace pxy {

// ---------------------------------------------------------------------------
// Sparse coding

/// Lasso path solution of argmin 1/2 ||y - X b||^2 + lambda ||b||_1 computed by
/// LARS with the lasso modification (variables leave the active set when their
/// coefficient crosses zero). Columns linearly dependent on the active set are
/// never admitted. At lambda = 0 the path is followed to its end, which is a
/// least-squares solution.
Vector lars_lasso(const Matrix& x, const Vector& y, double lambda);

/// Attribute vector i_a minimising 1/2 ||f_S - G^t i_a||^2 + lambda_s ||i_a||_1.
Vector sparse_code_attributes(const Vector& style_scores, const Matrix& g, double lambda_s);

// ---------------------------------------------------------------------------
// ESZSL

struct EszslModel {
    Matrix q;  // d x m
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

/// Q = (E E^t + l1 I)^-1 E Y G^t (G G^t + l2 I)^-1 with E = features^t and
/// Y in {-1,+1}^{k x n} the one-vs-rest label matrix. The dataset's styles must
/// match G's columns. SingularError if a bracketed matrix cannot be inverted.
EszslModel fit_eszsl(const FeatureDataset& data, const Matrix& g, double lambda1, double lambda2);

/// One-vs-rest {-1,+1} label matrix, k x n.
Matrix one_vs_rest_labels(const std::vector<std::size_t>& labels, std::size_t n);

Vector predict_eszsl(const EszslModel& model, const Vector& feature);
/// Row-wise prediction for a k x d batch.
Matrix predict_eszsl(const EszslModel& model, const Matrix& features);

// ---------------------------------------------------------------------------
// PCA proxy

struct PcaProxyModel {
    Vector mean;             // d
    Matrix projection;       // p x d, orthonormal rows
    Matrix style_encoder;    // p x n
    double retained_variance = 0.0;
};

/// Projects centred features onto the fewest principal axes covering
/// `variance_target` of the variance (no whitening) and regresses one-hot style
/// labels on the projected samples. DataError when fewer than two samples.
PcaProxyModel fit_pca_proxy(const FeatureDataset& data, double variance_target);

Vector predict_pca_proxy(const PcaProxyModel& model, const Matrix& g, const Vector& feature);
Matrix predict_pca_proxy(const PcaProxyModel& model, const Matrix& g, const Matrix& features);

}  // namespace pxy
