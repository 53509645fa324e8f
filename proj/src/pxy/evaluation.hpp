#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pxy/domain.hpp"
#include "pxy/linalg.hpp"

namespace pxy {

/// Mann-Whitney AUC with ties scored 1/2. Labels are 0/1.
/// DegenerateInput if either class is missing.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Sorts descending, averages consecutive groups of `k`, drops the remainder.
std::vector<double> auc_at_k_curve(std::span<const double> per_element_auc, std::size_t k);

/// Mean precision at the rank of each positive; descending scores, ties in input order.
double mean_average_precision(std::span<const double> scores, std::span<const int> labels);

struct BaselineSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single trial
};

/// AUC of uniformly random orderings; trial t draws from a generator seeded with seed + t.
BaselineSummary random_baseline(std::span<const int> labels, std::size_t trials, std::uint64_t seed);

struct IntraClassStats {
    Vector mu;     // m
    Vector sigma;  // m, population standard deviation
};

/// Per-style mean and standard deviation of each element, averaged over styles.
IntraClassStats intra_class_stats(const GroundTruthSet& gt);

struct RankLists {
    std::vector<std::string> top;     // highest first
    std::vector<std::string> bottom;  // continues the descending order
};

/// Items ranked by column `element` of a k x m score matrix.
RankLists rank_table(const Matrix& scores, const std::vector<std::string>& ids, std::size_t element, std::size_t top);
/// Elements ranked by row `item`.
RankLists rank_elements(const Matrix& scores, const std::vector<std::string>& element_names, std::size_t item,
                        std::size_t top);

struct EvalReport {
    std::vector<std::string> elements;
    std::vector<bool> evaluable;   // false when the ground truth holds a single class
    std::vector<double> auc;       // NaN where not evaluable
    std::vector<double> ap;        // NaN where no positives
    std::vector<BaselineSummary> random;  // empty when no trials were run
    std::vector<double> curve;
    std::size_t k_group = 3;
    std::string method;
    std::string provenance;
    std::string split;

    /// Mean over evaluable elements; NaN if none.
    double mean_auc() const;
};

struct EvalOptions {
    std::size_t k_group = 3;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::string provenance;
    std::string split;
};

/// Scores (k x m) against the binary view of `gt`.
EvalReport evaluate(const Matrix& scores, const GroundTruthSet& gt, const EvalOptions& options);
/// Same, with labels given directly as a k x m 0/1 matrix.
EvalReport evaluate(const Matrix& scores, const TernaryMatrix& binary_labels, const std::vector<std::string>& elements,
                    const EvalOptions& options);

/// `element,auc,ap,random_mean,random_std`; unavailable cells read NA.
void write_report_csv(std::ostream& out, const EvalReport& report);
/// `group_index,auc_at_k`, 1-based groups.
void write_curve_csv(std::ostream& out, const EvalReport& report);

}  // namespace pxy
