#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/data_ingest.hpp"
#include "ecmc/money_index.hpp"

namespace ecmc {

// Pooled ROC over every valid cell of the matrix.
RocCurve global_roc(const Eigen::MatrixXd& mean_scores, const Eigen::MatrixXi& truth,
                    const BoolMask& valid, const std::vector<double>& thresholds,
                    WarningList* warnings = nullptr);

// Mean of the true-positive and true-negative rates over valid cells; NaN
// when the truth has a single class.
double balanced_accuracy(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth,
                         const BoolMask& valid);

// Kendall rank correlation with tie correction (the tau-b form) and a
// two-sided normal-approximation p-value. Pairs with a non-finite value in
// either vector are removed first; at least three pairs must remain. A
// constant vector leaves tau undefined (NaN).
struct RankCorrelation {
    double tau = 0.0;
    double p_value = 0.0;
    std::size_t pairs_used = 0;
};

RankCorrelation kendall_tau(const std::vector<double>& first, const std::vector<double>& second);

// Cross-tabulation of two scores binned into octiles after min-max rescaling
// to [0, 1]. Only pairs finite in both inputs participate. Duplicate edges
// (fewer than eight distinct values) merge bins downward with a warning.
struct PercentileConfusion {
    Eigen::MatrixXi counts;           // 8 x 8, first score indexes rows
    std::vector<double> first_edges;  // interior octile edges, rescaled space
    std::vector<double> second_edges;
};

PercentileConfusion percentile_confusion(const std::vector<double>& first,
                                         const std::vector<double>& second,
                                         WarningList* warnings = nullptr);

// Share of a reference group found among the x best-ranked labels.
// `ascending` ranks smaller scores first. Non-finite scores are left out of
// the ranking; ranking ties break by label so the result is reproducible.
double top_group_ratio(const std::vector<std::string>& labels,
                       const std::vector<double>& scores,
                       const std::set<std::string>& group, std::size_t x, bool ascending);

}  // namespace ecmc
