#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pxy/errors.hpp"
#include "pxy/evaluation.hpp"
#include "support.hpp"

using namespace pxy;

namespace {

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double hits = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                ++pairs;
                hits += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return hits / pairs;
}

GroundTruthSet two_style_gt(const TernaryMatrix& t, const std::vector<std::size_t>& styles) {
    GroundTruthSet gt;
    gt.style_vocab = StyleVocabulary({"a", "b"});
    std::vector<std::string> el;
    for (Eigen::Index j = 0; j < t.cols(); ++j) el.push_back("e" + std::to_string(j));
    gt.elements = ElementVocabulary(el);
    gt.ternary = t;
    gt.styles = styles;
    for (Eigen::Index i = 0; i < t.rows(); ++i) gt.ids.push_back("p" + std::to_string(i));
    return gt;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("auc worked examples") {
    const std::vector<double> s1 = {0.9, 0.1}, s2 = {0.8, 0.6, 0.4, 0.2}, s3 = {0.3, 0.3, 0.3, 0.3};
    const std::vector<int> y1 = {1, 0}, y2 = {1, 0, 1, 0};
    CHECK(auc(s1, y1) == 1.0);
    CHECK(auc(s2, y2) == 0.75);
    CHECK(auc(s3, y2) == 0.5);
}

TEST_CASE("auc single class is degenerate") {
    const std::vector<double> s = {1, 2, 3};
    const std::vector<int> y = {1, 1, 1};
    CHECK_THROWS_AS(auc(s, y), DegenerateInput);
}

TEST_CASE("auc equals the pair-count oracle on small random inputs") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(2, 12), coarse(0, 4), bit(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = len(rng);
        std::vector<double> s(static_cast<std::size_t>(n));
        std::vector<int> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] = coarse(rng) * 0.25;  // plenty of ties
            y[static_cast<std::size_t>(i)] = bit(rng);
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(auc(s, y) == pair_count_auc(s, y));
    }
}

TEST_CASE("auc is a rank statistic and flips with negated scores") {
    std::mt19937_64 rng(2);
    const Vector v = test::random_vector(15, rng);
    std::vector<double> s(v.data(), v.data() + 15), t, neg;
    std::vector<int> y;
    for (int i = 0; i < 15; ++i) y.push_back(i % 3 == 0);
    for (double x : s) {
        t.push_back(std::exp(3 * x) + 7);
        neg.push_back(-x);
    }
    CHECK(auc(t, y) == auc(s, y));
    CHECK(auc(s, y) + auc(neg, y) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("auc@k curve") {
    const std::vector<double> six = {1, 2, 3, 4, 5, 6};
    CHECK(auc_at_k_curve(six, 2) == std::vector<double>{5.5, 3.5, 1.5});
    const std::vector<double> flat(58, 0.7);
    const auto curve = auc_at_k_curve(flat, 3);
    CHECK(curve.size() == 19);
    for (double c : curve) CHECK(c == doctest::Approx(0.7));
    CHECK_THROWS_AS(auc_at_k_curve(six, 7), DegenerateInput);

    std::mt19937_64 rng(3);
    const Vector v = test::random_vector(20, rng);
    std::vector<double> a(v.data(), v.data() + 20), b = a;
    std::shuffle(b.begin(), b.end(), rng);
    CHECK(auc_at_k_curve(a, 3) == auc_at_k_curve(b, 3));
    const auto c = auc_at_k_curve(a, 3);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] <= c[i - 1]);
}

TEST_CASE("average precision") {
    const std::vector<double> s = {0.9, 0.8, 0.7, 0.6};
    const std::vector<int> first = {1, 0, 0, 0}, ranks13 = {1, 0, 1, 0}, all = {1, 1, 1, 1}, none = {0, 0, 0, 0};
    CHECK(mean_average_precision(s, first) == 1.0);
    CHECK(mean_average_precision(s, ranks13) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
    CHECK(mean_average_precision(s, all) == 1.0);
    CHECK_THROWS_AS(mean_average_precision(s, none), DegenerateInput);
    const std::vector<double> tied = {0.5, 0.5};
    const std::vector<int> second = {0, 1};
    CHECK(mean_average_precision(tied, second) == 0.5);  // stable input order
}

TEST_CASE("random baseline") {
    std::vector<int> balanced(120, 0), skewed(120, 0);
    std::fill(balanced.begin(), balanced.begin() + 60, 1);
    std::fill(skewed.begin(), skewed.begin() + 6, 1);
    const auto b = random_baseline(balanced, 10000, 7);
    CHECK(std::abs(b.mean - 0.5) <= 0.02);
    const auto s = random_baseline(skewed, 10000, 7);
    CHECK(std::abs(s.mean - 0.5) <= 0.02);
    CHECK(s.std > 0.08);
    CHECK(s.std > b.std);
    const auto one = random_baseline(skewed, 1, 99);
    CHECK(one.mean == random_baseline(skewed, 1, 99).mean);
    CHECK(one.std == 0.0);
}

TEST_CASE("intra-class statistics") {
    TernaryMatrix t(4, 3);
    t << 1, 1, 1,
         1, 1, -1,
         1, -1, 0,
         1, -1, 0;
    const auto st = intra_class_stats(two_style_gt(t, {0, 0, 1, 1}));
    CHECK(st.sigma(0) == 0.0);
    CHECK(st.mu(0) == 1.0);
    CHECK(st.mu(1) == 0.0);
    CHECK(st.sigma(1) == 0.0);
    CHECK(st.sigma(2) == doctest::Approx(0.5));  // style a: {1,-1} -> 1; style b: {0,0} -> 0

    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> cell(-1, 1);
    TernaryMatrix r(10, 5);
    std::vector<std::size_t> styles;
    for (Eigen::Index i = 0; i < 10; ++i) {
        styles.push_back(static_cast<std::size_t>(i % 2));
        for (Eigen::Index j = 0; j < 5; ++j) r(i, j) = cell(rng);
    }
    const auto got = intra_class_stats(two_style_gt(r, styles));
    for (Eigen::Index j = 0; j < 5; ++j) {
        double mu = 0, sd = 0;
        for (std::size_t s = 0; s < 2; ++s) {
            double sum = 0, sq = 0;
            int count = 0;
            for (Eigen::Index i = 0; i < 10; ++i)
                if (styles[static_cast<std::size_t>(i)] == s) {
                    sum += r(i, j);
                    ++count;
                }
            const double mean = sum / count;
            for (Eigen::Index i = 0; i < 10; ++i)
                if (styles[static_cast<std::size_t>(i)] == s) sq += (r(i, j) - mean) * (r(i, j) - mean);
            mu += mean / 2;
            sd += std::sqrt(sq / count) / 2;
        }
        CHECK(got.mu(j) == doctest::Approx(mu).epsilon(1e-12));
        CHECK(got.sigma(j) == doctest::Approx(sd).epsilon(1e-12));
    }

    TernaryMatrix lone(3, 1);
    lone << 1, 0, 1;
    CHECK_THROWS_AS(intra_class_stats(two_style_gt(lone, {0, 0, 1})), DataError);
}

TEST_CASE("rank tables") {
    Matrix inc(6, 1);
    inc << 1, 2, 3, 4, 5, 6;
    const std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f"};
    const RankLists r = rank_table(inc, ids, 0, 2);
    CHECK(r.top == std::vector<std::string>{"f", "e"});
    CHECK(r.bottom == std::vector<std::string>{"b", "a"});

    const RankLists eq = rank_table(Matrix::Zero(6, 1), ids, 0, 3);
    CHECK(eq.top == std::vector<std::string>{"a", "b", "c"});
    CHECK(eq.bottom == std::vector<std::string>{"d", "e", "f"});

    CHECK_THROWS_AS(rank_table(inc, ids, 1, 2), IndexError);

    std::mt19937_64 rng(5);
    const Matrix s = test::random_matrix(10, 4, rng);
    std::vector<std::string> names;
    for (int i = 0; i < 10; ++i) names.push_back("i" + std::to_string(i));
    for (std::size_t e = 0; e < 4; ++e) {
        std::vector<int> order(10);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return s(a, static_cast<Eigen::Index>(e)) > s(b, static_cast<Eigen::Index>(e));
        });
        const RankLists got = rank_table(s, names, e, 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(got.top[static_cast<std::size_t>(i)] == names[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
            CHECK(got.bottom[static_cast<std::size_t>(i)] == names[static_cast<std::size_t>(order[static_cast<std::size_t>(7 + i)])]);
        }
    }
    const RankLists el = rank_elements(s, {"w", "x", "y", "z"}, 0, 2);
    CHECK(el.top.size() == 2);
    CHECK(el.bottom.size() == 2);
}

TEST_CASE("evaluate marks single-class elements and writes NA") {
    TernaryMatrix t(4, 2);
    t << 1, 1,
         -1, 0,
         1, 1,
         -1, 1;  // element 1 is relevant everywhere in the binary view
    const GroundTruthSet gt = two_style_gt(t, {0, 1, 0, 1});
    Matrix scores(4, 2);
    scores << 0.9, 0.1, 0.2, 0.2, 0.8, 0.3, 0.1, 0.4;
    EvalOptions opts;
    opts.k_group = 1;
    opts.trials = 10;
    opts.method = "svd";
    const EvalReport rep = evaluate(scores, gt, opts);
    CHECK(rep.evaluable == std::vector<bool>{true, false});
    CHECK(rep.auc[0] == 1.0);
    CHECK(std::isnan(rep.auc[1]));
    CHECK(rep.mean_auc() == 1.0);
    CHECK(rep.curve == std::vector<double>{1.0});

    std::ostringstream out;
    write_report_csv(out, rep);
    const std::string csv = out.str();
    CHECK(csv.rfind("element,auc,ap,random_mean,random_std\n", 0) == 0);
    CHECK(csv.find("e1,NA,") != std::string::npos);
    std::ostringstream curve;
    write_curve_csv(curve, rep);
    CHECK(curve.str() == "group_index,auc_at_k\n1,1\n");

    CHECK_THROWS_AS(evaluate(Matrix::Zero(3, 2), gt, opts), ShapeError);
}

}
