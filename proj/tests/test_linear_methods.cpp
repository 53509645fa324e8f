#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pxy/errors.hpp"
#include "pxy/linear_methods.hpp"
#include "support.hpp"

using namespace pxy;

namespace {

StyleVocabulary styles_of(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
    return StyleVocabulary(names);
}

FeatureDataset random_dataset(std::size_t k, std::size_t d, std::size_t n, std::mt19937_64& rng) {
    FeatureDataset ds;
    ds.features = test::random_matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d), rng);
    for (std::size_t i = 0; i < k; ++i) ds.labels.push_back(i % n);
    ds.styles = styles_of(n);
    return ds;
}

void check_kkt(const Matrix& g, const Vector& f, double lambda, const Vector& b) {
    const Vector corr = g * (f - g.transpose() * b);  // g_j^t residual for each element j
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        CHECK(std::abs(corr(j)) <= lambda + 1e-6);
        if (b(j) != 0.0) CHECK(std::abs(corr(j) - lambda * (b(j) > 0 ? 1.0 : -1.0)) <= 1e-6);
    }
}

double eszsl_objective(const Matrix& e, const Matrix& q, const Matrix& g, const Matrix& y, double l1, double l2) {
    return (e.transpose() * q * g - y).squaredNorm() + l1 * (q * g).squaredNorm() +
           l2 * (e.transpose() * q).squaredNorm() + l1 * l2 * q.squaredNorm();
}

}  // namespace

TEST_SUITE("linear_methods") {

TEST_CASE("sparse coding: orthonormal rows of G^t at lambda 0 give G f") {
    std::mt19937_64 rng(1);
    // G is m x n with orthonormal columns, so G^t has orthonormal rows.
    const Matrix g = Eigen::HouseholderQR<Matrix>(test::random_matrix(5, 5, rng)).householderQ();
    const Vector f = test::random_vector(5, rng);
    CHECK(test::max_abs(sparse_code_attributes(f, g, 0.0) - g * f) <= 1e-8);
}

TEST_CASE("sparse coding: full shrinkage threshold") {
    std::mt19937_64 rng(2);
    const Matrix g = test::random_matrix(15, 6, rng);
    const Vector f = test::random_vector(6, rng);
    const double thr = (g * f).cwiseAbs().maxCoeff();
    CHECK(sparse_code_attributes(f, g, thr).isZero(0.0));
    CHECK(sparse_code_attributes(f, g, 2 * thr).isZero(0.0));
    CHECK_FALSE(sparse_code_attributes(f, g, 0.9 * thr).isZero(0.0));
}

TEST_CASE("sparse coding: KKT conditions on random instances") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix g = test::random_matrix(15, 6, rng);
        const Vector f = test::random_vector(6, rng);
        for (double lambda : {0.1, 0.01, 0.5}) check_kkt(g, f, lambda, sparse_code_attributes(f, g, lambda));
    }
}

TEST_CASE("sparse coding: l1 norm shrinks as lambda grows") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix g = test::random_matrix(12, 5, rng);
        const Vector f = test::random_vector(5, rng);
        double prev = INFINITY;
        for (double lambda : {1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0, 3.0}) {
            const double l1 = sparse_code_attributes(f, g, lambda).lpNorm<1>();
            CHECK(l1 <= prev + 1e-9);
            prev = l1;
        }
    }
}

TEST_CASE("sparse coding: lambda 0 reaches a least-squares solution") {
    std::mt19937_64 rng(5);
    const Matrix g = test::random_matrix(12, 5, rng);
    const Vector f = test::random_vector(5, rng);
    const Vector b = sparse_code_attributes(f, g, 0.0);
    CHECK((g.transpose() * b - f).norm() <= 1e-8);
}

TEST_CASE("sparse coding: shape errors") {
    CHECK_THROWS_AS(sparse_code_attributes(Vector::Ones(3), Matrix::Ones(4, 2), 0.1), ShapeError);
    CHECK_THROWS_AS(lars_lasso(Matrix::Ones(3, 2), Vector::Ones(3), -1.0), InvalidConfig);
}

TEST_CASE("ESZSL: identity features and orthonormal rows of G") {
    std::mt19937_64 rng(6);
    const std::size_t d = 6, n = 3, m = 2;
    FeatureDataset ds;
    ds.features = Matrix::Identity(d, d);
    ds.labels = {0, 1, 2, 0, 1, 2};
    ds.styles = styles_of(n);
    const Matrix q3 = Eigen::HouseholderQR<Matrix>(test::random_matrix(n, n, rng)).householderQ();
    const Matrix g = q3.topRows(m);  // orthonormal rows
    const EszslModel model = fit_eszsl(ds, g, 0.0, 0.0);
    const Matrix y = one_vs_rest_labels(ds.labels, n);
    CHECK(test::max_abs(model.q - y * g.transpose()) <= 1e-10);
}

TEST_CASE("ESZSL: closed form is a stationary point of the composite objective") {
    std::mt19937_64 rng(7);
    const FeatureDataset ds = random_dataset(12, 10, 4, rng);
    const Matrix g = test::random_matrix(8, 4, rng);
    const double l1 = 0.5, l2 = 2.0;
    const EszslModel model = fit_eszsl(ds, g, l1, l2);
    const Matrix e = ds.features.transpose();
    const Matrix y = one_vs_rest_labels(ds.labels, 4);
    const double h = 1e-5;
    double worst = 0;
    for (Eigen::Index i = 0; i < model.q.rows(); ++i)
        for (Eigen::Index j = 0; j < model.q.cols(); ++j) {
            Matrix up = model.q, down = model.q;
            up(i, j) += h;
            down(i, j) -= h;
            const double grad = (eszsl_objective(e, up, g, y, l1, l2) - eszsl_objective(e, down, g, y, l1, l2)) / (2 * h);
            worst = std::max(worst, std::abs(grad));
        }
    CHECK(worst <= 1e-4);
}

TEST_CASE("ESZSL: heavy regularisation shrinks Q") {
    std::mt19937_64 rng(8);
    const FeatureDataset ds = random_dataset(12, 10, 4, rng);
    const Matrix g = test::random_matrix(8, 4, rng);
    CHECK(fit_eszsl(ds, g, 1e3, 1e3).q.norm() < fit_eszsl(ds, g, 1e-3, 1e-3).q.norm());
}

TEST_CASE("ESZSL: invariant under sample permutation") {
    std::mt19937_64 rng(9);
    FeatureDataset ds = random_dataset(12, 5, 3, rng);
    const Matrix g = test::random_matrix(6, 3, rng);
    const Matrix q = fit_eszsl(ds, g, 0.1, 0.1).q;
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    FeatureDataset p = ds;
    for (std::size_t i = 0; i < 12; ++i) {
        p.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(perm[i]));
        p.labels[i] = ds.labels[perm[i]];
    }
    CHECK(test::max_abs(fit_eszsl(p, g, 0.1, 0.1).q - q) <= 1e-10);
}

TEST_CASE("ESZSL: unregularised singular system") {
    std::mt19937_64 rng(10);
    const FeatureDataset ds = random_dataset(3, 6, 3, rng);  // E E^t has rank 3 < 6
    CHECK_THROWS_AS(fit_eszsl(ds, test::random_matrix(4, 3, rng), 0.0, 1.0), SingularError);
    CHECK_NOTHROW(fit_eszsl(ds, test::random_matrix(4, 3, rng), 1.0, 1.0));
}

TEST_CASE("ESZSL prediction") {
    std::mt19937_64 rng(11);
    EszslModel zero;
    zero.q = Matrix::Zero(4, 3);
    CHECK(predict_eszsl(zero, test::random_vector(4, rng)).isZero(0.0));

    EszslModel model;
    model.q = test::random_matrix(4, 3, rng);
    for (Eigen::Index j = 0; j < 4; ++j)
        CHECK(predict_eszsl(model, Vector(Vector::Unit(4, j))) == model.q.row(j).transpose());

    const Vector e = test::random_vector(4, rng);
    const Vector got = predict_eszsl(model, e);
    for (Eigen::Index a = 0; a < 3; ++a) {
        double sum = 0;
        for (Eigen::Index r = 0; r < 4; ++r) sum += model.q(r, a) * e(r);
        CHECK(got(a) == doctest::Approx(sum).epsilon(1e-12));
    }
    CHECK_THROWS_AS(predict_eszsl(model, Vector(Vector::Ones(5))), ShapeError);
}

TEST_CASE("PCA proxy: planted dominant axis") {
    std::mt19937_64 rng(12);
    Vector axis = test::random_vector(8, rng);
    axis.normalize();
    FeatureDataset ds = random_dataset(200, 8, 2, rng);
    std::normal_distribution<double> big(0.0, 10.0);
    for (Eigen::Index i = 0; i < 200; ++i) ds.features.row(i) = 0.05 * ds.features.row(i) + big(rng) * axis.transpose();
    const PcaProxyModel model = fit_pca_proxy(ds, 0.5);
    CHECK(std::abs(model.projection.row(0).dot(axis)) >= 0.999);
    CHECK(test::max_abs(model.projection * model.projection.transpose() -
                        Matrix::Identity(model.projection.rows(), model.projection.rows())) <= 1e-8);
}

TEST_CASE("PCA proxy: full retention keeps min(k-1, d) axes") {
    std::mt19937_64 rng(13);
    CHECK(fit_pca_proxy(random_dataset(20, 6, 3, rng), 1.0).projection.rows() == 6);
    CHECK(fit_pca_proxy(random_dataset(5, 9, 2, rng), 1.0).projection.rows() == 4);
}

TEST_CASE("PCA proxy: two samples reproduce the centred one-hot targets") {
    FeatureDataset ds;
    ds.features.resize(2, 2);
    ds.features << 1.0, 2.0, -0.5, 3.0;
    ds.labels = {0, 1};
    ds.styles = styles_of(2);
    const PcaProxyModel model = fit_pca_proxy(ds, 1.0);
    const Matrix scores = predict_pca_proxy(model, Matrix::Identity(2, 2), ds.features);
    Matrix centred(2, 2);
    centred << 0.5, -0.5, -0.5, 0.5;
    CHECK(test::max_abs(scores - centred) <= 1e-8);
}

TEST_CASE("PCA proxy: mean feature maps to zero and identity G gives style scores") {
    std::mt19937_64 rng(14);
    const FeatureDataset ds = random_dataset(30, 5, 3, rng);
    const PcaProxyModel model = fit_pca_proxy(ds, 0.95);
    const Matrix g = test::random_matrix(7, 3, rng);
    CHECK(predict_pca_proxy(model, g, model.mean).cwiseAbs().maxCoeff() <= 1e-12);

    const Vector x = test::random_vector(5, rng);
    const Vector v = model.projection * (x - model.mean);
    const Vector styles = model.style_encoder.transpose() * v;
    CHECK(test::max_abs(predict_pca_proxy(model, Matrix::Identity(3, 3), x) - styles) <= 1e-12);
}

TEST_CASE("PCA proxy: independent evaluation of the projection chain") {
    std::mt19937_64 rng(15);
    const FeatureDataset ds = random_dataset(25, 6, 3, rng);
    const Matrix g = test::random_matrix(4, 3, rng);
    const double target = 0.9;
    const PcaProxyModel model = fit_pca_proxy(ds, target);

    // Straight-line oracle: covariance eigendecomposition, then least squares by normal equations.
    Vector mean = ds.features.colwise().mean().transpose();
    const Matrix c = ds.features.rowwise() - mean.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.transpose() * c);
    const Vector ev = eig.eigenvalues().reverse();
    const Matrix axes = eig.eigenvectors().rowwise().reverse();
    Eigen::Index p = 0;
    double covered = 0;
    while (covered < target * ev.sum()) covered += ev(p++);
    REQUIRE(p == model.projection.rows());
    const Matrix proj = axes.leftCols(p).transpose();
    const Matrix v = c * proj.transpose();
    Matrix h = Matrix::Zero(25, 3);
    for (std::size_t i = 0; i < 25; ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ds.labels[i])) = 1;
    const Matrix z = (v.transpose() * v).ldlt().solve(v.transpose() * h);

    const Vector x = test::random_vector(6, rng);
    const Vector want = g * (z.transpose() * (proj * (x - mean)));
    CHECK(test::max_abs(predict_pca_proxy(model, g, x) - want) <= 1e-8);
}

TEST_CASE("PCA proxy: null-space directions of P do not change the output") {
    std::mt19937_64 rng(16);
    const FeatureDataset ds = random_dataset(40, 6, 3, rng);
    const PcaProxyModel model = fit_pca_proxy(ds, 0.6);
    REQUIRE(model.projection.rows() < 6);
    const Matrix g = test::random_matrix(5, 3, rng);
    Vector w = test::random_vector(6, rng);
    w -= model.projection.transpose() * (model.projection * w);
    const Vector x = test::random_vector(6, rng);
    CHECK(test::max_abs(predict_pca_proxy(model, g, Vector(x + w)) - predict_pca_proxy(model, g, x)) <= 1e-10);
}

TEST_CASE("PCA proxy: errors") {
    std::mt19937_64 rng(17);
    CHECK_THROWS_AS(fit_pca_proxy(random_dataset(1, 3, 2, rng), 0.9), DataError);
    CHECK_THROWS_AS(fit_pca_proxy(random_dataset(5, 3, 2, rng), 0.0), InvalidConfig);
    const PcaProxyModel model = fit_pca_proxy(random_dataset(5, 3, 2, rng), 0.9);
    CHECK_THROWS_AS(predict_pca_proxy(model, Matrix::Ones(4, 2), Vector(Vector::Ones(4))), ShapeError);
    CHECK_THROWS_AS(predict_pca_proxy(model, Matrix::Ones(4, 3), Vector(Vector::Ones(3))), ShapeError);
}

}
