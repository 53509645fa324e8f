#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "pxy/errors.hpp"
#include "pxy/gmatrix.hpp"
#include "support.hpp"

using namespace pxy;

namespace {

EmbeddingTable table_from(const std::vector<std::string>& tokens, const Matrix& columns) {
    EmbeddingTable t(static_cast<std::size_t>(columns.rows()));
    for (std::size_t i = 0; i < tokens.size(); ++i) t.add(tokens[i], columns.col(static_cast<Eigen::Index>(i)));
    return t;
}

GroundTruthSet fixture_gt(std::size_t per_style, std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cell(-1, 1);
    GroundTruthSet gt;
    std::vector<std::string> styles, elements;
    for (std::size_t s = 0; s < n; ++s) styles.push_back("style-" + std::to_string(s));
    for (std::size_t j = 0; j < m; ++j) elements.push_back("element-" + std::to_string(j));
    gt.style_vocab = StyleVocabulary(styles);
    gt.elements = ElementVocabulary(elements);
    const std::size_t k = per_style * n;
    gt.ternary.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < k; ++i) {
        gt.ids.push_back("p" + std::to_string(i));
        gt.styles.push_back(i % n);
        for (std::size_t j = 0; j < m; ++j) gt.ternary(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cell(rng);
    }
    return gt;
}

}  // namespace

TEST_SUITE("gmatrix") {

TEST_CASE("embeddings: one-hot element vectors return the style vectors") {
    std::mt19937_64 rng(1);
    const Matrix ws = test::random_matrix(4, 3, rng);
    Matrix cols(4, 7);
    cols << Matrix::Identity(4, 4), ws;
    const auto t = table_from({"line", "color", "shape", "space", "cubism", "baroque", "rococo"}, cols);
    const auto g = estimate_g_from_embeddings(t, ElementVocabulary({"line", "color", "shape", "space"}),
                                              StyleVocabulary({"cubism", "baroque", "rococo"}));
    CHECK(test::max_abs(g.g - ws) <= 1e-12);
    CHECK(g.provenance == Provenance::embedding);
}

TEST_CASE("embeddings: a consistent mixture is recovered exactly") {
    std::mt19937_64 rng(2);
    const Matrix q = Eigen::HouseholderQR<Matrix>(test::random_matrix(10, 3, rng)).householderQ() * Matrix::Identity(10, 3);
    Matrix cols(10, 5);
    cols.leftCols(3) = q;
    cols.col(3) = 0.3 * q.col(0) + 0.7 * q.col(1);
    cols.col(4) = q.col(2);
    const auto t = table_from({"abstract", "gestural", "flat", "expressionism", "minimalism"}, cols);
    const auto g = estimate_g_from_embeddings(t, ElementVocabulary({"abstract", "gestural", "flat"}),
                                              StyleVocabulary({"expressionism", "minimalism"}));
    CHECK(g.g(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(g.g(1, 0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::abs(g.g(2, 0)) <= 1e-12);
}

TEST_CASE("embeddings: missing tokens are all listed") {
    const auto t = table_from({"line", "cubism"}, Matrix::Identity(2, 2));
    try {
        estimate_g_from_embeddings(t, ElementVocabulary({"line"}), StyleVocabulary({"cubism", "Ukiyo-e"}));
        FAIL("expected VocabularyError");
    } catch (const VocabularyError& e) {
        CHECK(e.terms() == std::vector<std::string>{"ukiyo-e"});
    }
}

TEST_CASE("embeddings: style permutation permutes columns") {
    std::mt19937_64 rng(3);
    const Matrix cols = test::random_matrix(6, 7, rng);
    const auto t = table_from({"a", "b", "c", "d", "s1", "s2", "s3"}, cols);
    const ElementVocabulary el({"a", "b", "c", "d"});
    const auto g1 = estimate_g_from_embeddings(t, el, StyleVocabulary({"s1", "s2", "s3"}));
    const auto g2 = estimate_g_from_embeddings(t, el, StyleVocabulary({"s3", "s1", "s2"}));
    CHECK(test::max_abs(g2.g.col(0) - g1.g.col(2)) <= 1e-12);
    CHECK(test::max_abs(g2.g.col(1) - g1.g.col(0)) <= 1e-12);
    CHECK(test::max_abs(g2.g.col(2) - g1.g.col(1)) <= 1e-12);
}

TEST_CASE("ground truth: mean of one painting") {
    const auto gt = fixture_gt(1, 3, 4, 5);
    const auto est = estimate_g_from_ground_truth(gt, 1, 0);
    for (std::size_t i = 0; i < gt.size(); ++i)
        CHECK(est.g.g.col(static_cast<Eigen::Index>(gt.styles[i])) ==
              gt.ternary.row(static_cast<Eigen::Index>(i)).transpose().cast<double>());
}

TEST_CASE("ground truth: symmetric answers average to zero") {
    GroundTruthSet gt = fixture_gt(3, 2, 1, 6);
    for (Eigen::Index i = 0; i < 6; ++i) gt.ternary(i, 0) = (i / 2 == 0) ? 1 : (i / 2 == 1 ? 0 : -1);
    const auto est = estimate_g_from_ground_truth(gt, 3, 1);
    CHECK(est.g.g(0, 0) == 0.0);
    CHECK(est.g.g(0, 1) == 0.0);
}

TEST_CASE("ground truth: seeded selection equals a brute-force mean") {
    const auto gt = fixture_gt(6, 4, 9, 7);
    const auto est = estimate_g_from_ground_truth(gt, 3, 42);
    REQUIRE(est.selected.size() == 12);
    for (std::size_t s = 0; s < 4; ++s) {
        std::set<std::size_t> rows(est.selected.begin() + static_cast<long>(3 * s),
                                   est.selected.begin() + static_cast<long>(3 * s + 3));
        REQUIRE(rows.size() == 3);
        for (std::size_t j = 0; j < 9; ++j) {
            double sum = 0;
            for (auto r : rows) {
                CHECK(gt.styles[r] == s);
                sum += gt.ternary(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
            }
            CHECK(est.g.g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(s)) == doctest::Approx(sum / 3.0));
        }
    }
    CHECK(estimate_g_from_ground_truth(gt, 3, 42).g.g == est.g.g);
}

TEST_CASE("ground truth: too few paintings names the style") {
    const auto gt = fixture_gt(2, 2, 3, 8);
    try {
        estimate_g_from_ground_truth(gt, 3, 0);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("style-0") != std::string::npos);
    }
}

TEST_CASE("G*: plain is G") {
    std::mt19937_64 rng(9);
    const Matrix g = test::random_matrix(5, 3, rng);
    CHECK(GStar::build(g, GStarVariant::plain).matrix() == g);
}

TEST_CASE("G*: identity is a fixed point of the svd map") {
    const auto s = GStar::build(Matrix::Identity(4, 4), GStarVariant::svd);
    CHECK(test::max_abs(s.matrix() - Matrix::Identity(4, 4)) <= 1e-12);
}

TEST_CASE("G*: rows of T G are orthonormal and the factorization holds") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix g = test::random_matrix(10, 4, rng);
        const auto s = GStar::build(g, GStarVariant::svd);
        const Matrix tg = s.transform() * g;
        CHECK(test::max_abs(tg * tg.transpose() - Matrix::Identity(4, 4)) <= 1e-8);
        const Matrix f = test::random_matrix(3, 10, rng);
        CHECK(test::max_abs(f * s.matrix() - (f * s.transform().transpose()) * tg) <= 1e-10);
    }
}

TEST_CASE("G*: offset with o = shift reduces to svd") {
    std::mt19937_64 rng(11);
    const Matrix g = test::random_matrix(8, 3, rng);
    const auto off = GStar::build(g, GStarVariant::offset, 1.0);
    CHECK(off.offset() == Vector::Constant(8, 1.0));
    CHECK(test::max_abs(off.matrix() - GStar::build(g, GStarVariant::svd).matrix()) <= 1e-10);
}

TEST_CASE("G*: offset is clamped at zero") {
    std::mt19937_64 rng(12);
    auto s = GStar::build(test::random_matrix(6, 2, rng), GStarVariant::offset);
    Vector o = Vector::Constant(6, 0.5);
    o(2) = -3.0;
    s.set_offset(o);
    CHECK(s.offset()(2) == 0.0);
    CHECK(s.offset()(0) == 0.5);
}

TEST_CASE("G*: offset gradient matches finite differences with frozen factors") {
    std::mt19937_64 rng(13);
    const Matrix g = test::random_matrix(7, 3, rng);
    auto s = GStar::build(g, GStarVariant::offset, 1.0);
    s.set_offset(Vector::Constant(7, 0.3) + 0.1 * test::random_vector(7, rng).cwiseAbs());
    const Matrix d = test::random_matrix(7, 3, rng);

    const SvdFactors f = svd_thin(s.shifted_source());
    const Matrix proj = f.u * f.sigma.array().pow(-2.0).matrix().asDiagonal() * f.u.transpose();
    auto loss = [&](const Vector& o) {
        Matrix shifted = g.array() + 1.0;
        shifted.colwise() -= o;
        return (d.array() * (proj * shifted).array()).sum();
    };
    const Vector grad = s.offset_gradient(d);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 7; ++j) {
        Vector up = s.offset(), down = s.offset();
        up(j) += h;
        down(j) -= h;
        CHECK(std::abs((loss(up) - loss(down)) / (2 * h) - grad(j)) <= 1e-4);
    }
}

TEST_CASE("G*: rank deficiency raises RankError") {
    Matrix g(4, 2);
    g << 1, 2, 2, 4, 3, 6, 4, 8;
    CHECK_THROWS_AS(GStar::build(g, GStarVariant::svd), RankError);
    CHECK_THROWS_AS(GStar::build(Matrix::Ones(2, 3), GStarVariant::svd), RankError);
    CHECK_NOTHROW(GStar::build(g, GStarVariant::plain));
}

TEST_CASE("G* variant names") {
    for (auto v : {GStarVariant::plain, GStarVariant::svd, GStarVariant::offset})
        CHECK(parse_gstar_variant(to_string(v)) == v);
    CHECK_THROWS_AS(parse_gstar_variant("qr"), InvalidConfig);
}

}
