#include <numeric>

#include "doctest.h"
#include "pxy/errors.hpp"
#include "pxy/linear_methods.hpp"
#include "pxy/neural.hpp"
#include "pxy/synth.hpp"
#include "support.hpp"

using namespace pxy;

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("identity world without noise exposes the attributes") {
    WorldConfig c;
    c.m = c.d = 8;
    c.n = 3;
    c.k = 100;
    c.noise = 0.0;
    c.map = FeatureMap::identity;
    const SyntheticWorld w = generate_world(c);
    CHECK(w.features == w.attributes);
    for (double a : recovery_score(w, w.features)) CHECK(a == 1.0);
}

TEST_CASE("generation is deterministic per seed") {
    const SyntheticWorld a = generate_world(12, 6, 300, 20, 0.1, 5);
    const SyntheticWorld b = generate_world(12, 6, 300, 20, 0.1, 5);
    const SyntheticWorld c = generate_world(12, 6, 300, 20, 0.1, 6);
    CHECK(a.features == b.features);
    CHECK(a.g_true == b.g_true);
    CHECK(a.labels == b.labels);
    CHECK(a.features != c.features);
}

TEST_CASE("labels match a brute-force argmax over styles") {
    const SyntheticWorld w = generate_world(10, 5, 500, 16, 0.2, 8);
    for (std::size_t i = 0; i < 500; ++i) {
        std::size_t best = 0;
        double best_v = -INFINITY;
        for (std::size_t s = 0; s < 5; ++s) {
            double v = 0;
            for (std::size_t j = 0; j < 10; ++j)
                v += w.attributes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                     w.g_true(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(s));
            if (v > best_v) {
                best_v = v;
                best = s;
            }
        }
        CHECK(w.labels[i] == best);
    }
}

TEST_CASE("world configuration errors") {
    CHECK_THROWS_AS(generate_world(3, 4, 10, 5, 0.1, 0), InvalidConfig);
    CHECK_THROWS_AS(generate_world(3, 1, 10, 5, 0.1, 0), InvalidConfig);
    WorldConfig c;
    c.map = FeatureMap::identity;
    c.d = c.m + 1;
    CHECK_THROWS_AS(generate_world(c), InvalidConfig);
    c = WorldConfig{};
    c.g_true = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(generate_world(c), ShapeError);
}

TEST_CASE("recovery score of oracle, anti-oracle and random predictions") {
    const SyntheticWorld w = generate_world(12, 6, 400, 16, 0.1, 9);
    for (double a : recovery_score(w, w.attributes)) CHECK(a == 1.0);
    for (double a : recovery_score(w, -w.attributes)) CHECK(a == 0.0);
    std::mt19937_64 rng(10);
    double total = 0;
    for (int rep = 0; rep < 10; ++rep) total += mean_of(recovery_score(w, test::random_matrix(400, 12, rng)));
    CHECK(std::abs(total / 10 - 0.5) <= 0.02);
    CHECK_THROWS_AS(recovery_score(w, Matrix::Zero(400, 11)), ShapeError);

    const TernaryMatrix lab = latent_labels(w);
    for (Eigen::Index j = 0; j < lab.cols(); ++j) CHECK(lab.col(j).sum() == 200);
}

TEST_CASE("perturbation norm") {
    std::mt19937_64 rng(11);
    const Matrix g = test::random_matrix(12, 6, rng);
    CHECK(perturb_g(g, 0.0, 1) == g);
    const Matrix a = perturb_g(g, 0.5, 1), b = perturb_g(g, 0.5, 2);
    CHECK(std::abs((a - g).norm() / g.norm() - 0.5) <= 1e-10);
    CHECK(std::abs((b - g).norm() / g.norm() - 0.5) <= 1e-10);
    CHECK(test::max_abs(a - b) > 1e-3);
    CHECK_THROWS_AS(perturb_g(g, -0.1, 1), InvalidConfig);
}

TEST_CASE("sparse coding inverts the linear style relation in a noiseless world") {
    WorldConfig c;
    c.m = 6;
    c.n = 6;
    c.noise = 0.0;
    c.map = FeatureMap::linear;
    c.k = 1000;
    c.seed = 12;
    const SyntheticWorld w = generate_world(c);
    const Matrix logits = w.attributes * w.g_true;
    Matrix pred(w.attributes.rows(), w.attributes.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
        pred.row(i) = sparse_code_attributes(logits.row(i).transpose(), w.g_true, 0.0).transpose();
    CHECK(mean_of(recovery_score(w, pred)) >= 0.9);
}

TEST_CASE("sparse coding on softmax style scores beats chance") {
    WorldConfig c;
    c.noise = 0.0;
    c.map = FeatureMap::linear;
    c.k = 1000;
    c.seed = 12;
    const SyntheticWorld w = generate_world(c);
    const Matrix f = softmax_rows(w.attributes * w.g_true);
    Matrix pred(w.attributes.rows(), w.attributes.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        pred.row(i) = sparse_code_attributes(f.row(i).transpose(), w.g_true, 1e-6).transpose();
    CHECK(mean_of(recovery_score(w, pred)) >= 0.6);
}

TEST_CASE("dataset, G and ground truth views of a world") {
    const SyntheticWorld w = generate_world(6, 3, 50, 8, 0.1, 13);
    const FeatureDataset ds = world_dataset(w);
    CHECK(ds.size() == 50);
    CHECK(ds.styles.size() == 3);
    const CategoryAttributeMatrix g = world_g(w);
    CHECK(g.provenance == Provenance::synthetic);
    CHECK(g.elements.name(0) == "element-1");
    const GroundTruthSet gt = world_ground_truth(w);
    CHECK(gt.binary() == latent_labels(w));
}

}
