#include "pxy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "pxy/errors.hpp"

namespace pxy {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_pair(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw ShapeError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                         std::to_string(labels.size()) + ")");
    for (const int l : labels)
        if (l != 0 && l != 1) throw DataError("binary labels must be 0 or 1");
    for (const double s : scores)
        if (std::isnan(s)) throw InvalidMatrix("scores contain NaN");
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

std::string cell(double v) { return std::isnan(v) ? "NA" : format_real(v); }

RankLists split_ranking(const std::vector<std::size_t>& order, const std::vector<std::string>& names, std::size_t top) {
    if (top > order.size() / 2)
        throw InvalidConfig("cannot list " + std::to_string(top) + " top and bottom entries out of " +
                            std::to_string(order.size()));
    RankLists lists;
    for (std::size_t i = 0; i < top; ++i) lists.top.push_back(names[order[i]]);
    for (std::size_t i = order.size() - top; i < order.size(); ++i) lists.bottom.push_back(names[order[i]]);
    return lists;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_pair(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the rank sum of the positives, with tied blocks sharing their mean rank.
    double twice_rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        std::size_t block_pos = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) block_pos += static_cast<std::size_t>(labels[order[j++]]);
        // ranks i+1 .. j, mean (i + 1 + j) / 2
        twice_rank_sum += static_cast<double>(block_pos) * static_cast<double>(i + 1 + j);
        pos += block_pos;
        i = j;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) throw DegenerateInput("AUC needs both positive and negative labels");
    const double twice_u = twice_rank_sum - static_cast<double>(pos) * static_cast<double>(pos + 1);
    return twice_u / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<double> auc_at_k_curve(std::span<const double> per_element_auc, std::size_t k) {
    if (k == 0) throw InvalidConfig("group size must be at least 1");
    if (per_element_auc.size() < k)
        throw DegenerateInput("need at least " + std::to_string(k) + " AUC values, got " +
                              std::to_string(per_element_auc.size()));
    std::vector<double> sorted(per_element_auc.begin(), per_element_auc.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::vector<double> points;
    for (std::size_t g = 0; g + k <= sorted.size(); g += k)
        points.push_back(std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(g),
                                         sorted.begin() + static_cast<std::ptrdiff_t>(g + k), 0.0) /
                         static_cast<double>(k));
    return points;
}

double mean_average_precision(std::span<const double> scores, std::span<const int> labels) {
    check_pair(scores, labels);
    const auto order = descending_order(scores);
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]] != 1) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    if (hits == 0) throw DegenerateInput("average precision needs at least one positive");
    return sum / static_cast<double>(hits);
}

BaselineSummary random_baseline(std::span<const int> labels, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw InvalidConfig("random baseline needs at least one trial");
    std::vector<double> scores(labels.size());
    std::vector<double> draws;
    draws.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed + t);
        std::iota(scores.begin(), scores.end(), 0.0);
        std::shuffle(scores.begin(), scores.end(), rng);
        draws.push_back(auc(scores, labels));
    }
    BaselineSummary s;
    s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(trials);
    if (trials > 1) {
        double ss = 0.0;
        for (const double d : draws) ss += (d - s.mean) * (d - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    return s;
}

IntraClassStats intra_class_stats(const GroundTruthSet& gt) {
    validate(gt);
    const auto m = gt.ternary.cols();
    const std::size_t n = gt.style_vocab.size();
    std::vector<std::vector<Eigen::Index>> members(n);
    for (std::size_t i = 0; i < gt.size(); ++i) members[gt.styles[i]].push_back(static_cast<Eigen::Index>(i));

    IntraClassStats stats{Vector::Zero(m), Vector::Zero(m)};
    std::size_t used = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto& rows = members[s];
        if (rows.empty()) continue;
        if (rows.size() < 2) throw DataError("style '" + gt.style_vocab.name(s) + "' has fewer than two paintings");
        Matrix block(static_cast<Eigen::Index>(rows.size()), m);
        for (std::size_t r = 0; r < rows.size(); ++r) block.row(static_cast<Eigen::Index>(r)) = gt.ternary.row(rows[r]).cast<double>();
        const Vector mean = block.colwise().mean().transpose();
        const Vector var = (block.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
        stats.mu += mean;
        stats.sigma += var.cwiseSqrt();
        ++used;
    }
    if (used == 0) throw DataError("ground truth has no paintings");
    stats.mu /= static_cast<double>(used);
    stats.sigma /= static_cast<double>(used);
    return stats;
}

RankLists rank_table(const Matrix& scores, const std::vector<std::string>& ids, std::size_t element, std::size_t top) {
    if (static_cast<std::size_t>(scores.rows()) != ids.size()) throw ShapeError("score rows and ids differ in count");
    if (element >= static_cast<std::size_t>(scores.cols()))
        throw IndexError("element index " + std::to_string(element) + " out of range");
    const Vector col = scores.col(static_cast<Eigen::Index>(element));
    return split_ranking(descending_order({col.data(), static_cast<std::size_t>(col.size())}), ids, top);
}

RankLists rank_elements(const Matrix& scores, const std::vector<std::string>& element_names, std::size_t item,
                        std::size_t top) {
    if (static_cast<std::size_t>(scores.cols()) != element_names.size())
        throw ShapeError("score columns and element names differ in count");
    if (item >= static_cast<std::size_t>(scores.rows()))
        throw IndexError("item index " + std::to_string(item) + " out of range");
    const Vector row = scores.row(static_cast<Eigen::Index>(item)).transpose();
    return split_ranking(descending_order({row.data(), static_cast<std::size_t>(row.size())}), element_names, top);
}

double EvalReport::mean_auc() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < auc.size(); ++j)
        if (evaluable[j]) {
            sum += auc[j];
            ++count;
        }
    return count ? sum / static_cast<double>(count) : nan;
}

EvalReport evaluate(const Matrix& scores, const GroundTruthSet& gt, const EvalOptions& options) {
    validate(gt);
    return evaluate(scores, gt.binary(), gt.elements.names(), options);
}

EvalReport evaluate(const Matrix& scores, const TernaryMatrix& binary_labels, const std::vector<std::string>& elements,
                    const EvalOptions& options) {
    if (scores.rows() != binary_labels.rows() || scores.cols() != binary_labels.cols())
        throw ShapeError("scores are " + std::to_string(scores.rows()) + "x" + std::to_string(scores.cols()) +
                         ", ground truth is " + std::to_string(binary_labels.rows()) + "x" +
                         std::to_string(binary_labels.cols()));
    if (static_cast<std::size_t>(scores.cols()) != elements.size())
        throw ShapeError("element names do not match score columns");
    require_finite(scores, "scores");

    EvalReport rep;
    rep.elements = elements;
    rep.k_group = options.k_group;
    rep.method = options.method;
    rep.provenance = options.provenance;
    rep.split = options.split;
    std::vector<double> evaluable_aucs;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const Vector s = scores.col(j);
        const std::vector<int> l(binary_labels.col(j).data(), binary_labels.col(j).data() + binary_labels.rows());
        const std::span<const double> sv(s.data(), static_cast<std::size_t>(s.size()));
        const auto positives = std::count(l.begin(), l.end(), 1);
        const bool ok = positives > 0 && positives < static_cast<std::ptrdiff_t>(l.size());
        rep.evaluable.push_back(ok);
        rep.auc.push_back(ok ? auc(sv, l) : nan);
        rep.ap.push_back(positives > 0 ? mean_average_precision(sv, l) : nan);
        if (options.trials > 0)
            rep.random.push_back(ok ? random_baseline(l, options.trials, options.seed) : BaselineSummary{nan, nan});
        if (ok) evaluable_aucs.push_back(rep.auc.back());
    }
    if (evaluable_aucs.size() >= options.k_group) rep.curve = auc_at_k_curve(evaluable_aucs, options.k_group);
    return rep;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "element,auc,ap,random_mean,random_std\n";
    for (std::size_t j = 0; j < report.elements.size(); ++j) {
        out << report.elements[j] << ',' << cell(report.auc[j]) << ',' << cell(report.ap[j]) << ',';
        if (report.random.empty()) out << "NA,NA\n";
        else out << cell(report.random[j].mean) << ',' << cell(report.random[j].std) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const EvalReport& report) {
    out << "group_index,auc_at_k\n";
    for (std::size_t i = 0; i < report.curve.size(); ++i) out << (i + 1) << ',' << format_real(report.curve[i]) << '\n';
}

}  // namespace pxy
