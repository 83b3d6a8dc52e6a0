#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/data_ingest.hpp"

namespace ecmc {

// Classification sweep over a fixed threshold grid with the rule
// "predict positive when score >= threshold".
struct RocCurve {
    std::vector<double> thresholds;       // ascending
    std::vector<double> false_positive;   // aligned with thresholds
    std::vector<double> true_positive;
    double auc = 0.0;                     // NaN when either class is absent
};

// 0.00, 0.01, ..., 1.00.
std::vector<double> default_threshold_grid();

// Sweeps the grid over scores with boolean truth labels. The area is the
// trapezoid integral of the curve anchored at (0, 0), the empty-prediction
// limit. When truth has a single class the curve keeps the grid but carries
// no points and a NaN area.
RocCurve binary_roc(const std::vector<double>& scores, const std::vector<bool>& labels,
                    const std::vector<double>& thresholds, WarningList* warnings = nullptr);

// Per-row ROC over the valid cells of each row of `mean_scores` against the
// incidence truth.
struct RowRocSet {
    std::vector<RocCurve> curves;  // one per row; degenerate rows have NaN auc
    std::vector<double> auc;       // NaN where undefined
};

RowRocSet row_rocs(const Eigen::MatrixXd& mean_scores, const Eigen::MatrixXi& truth,
                   const BoolMask& valid, const std::vector<double>& thresholds,
                   WarningList* warnings = nullptr);

// Incidence prediction at one threshold.
Eigen::MatrixXi threshold_incidence(const Eigen::MatrixXd& mean_scores, double threshold);

// Product-side false-positive mass. For product p at threshold t,
// ftot = fpr * N / (P + N) over the valid cells of the product's row; the
// weight source is its mean over the grid. Products with no true negatives
// contribute zero with a warning.
struct ProductWeightTable {
    Eigen::MatrixXd ftot;           // products x thresholds
    std::vector<double> ftot_mean;  // per product
    std::vector<int> positives;     // valid true-positive cells per product
    std::vector<int> negatives;     // valid true-negative cells per product
};

ProductWeightTable product_weight_table(const Eigen::MatrixXd& mean_scores_t,
                                        const Eigen::MatrixXi& truth_t,
                                        const BoolMask& valid_t,
                                        const std::vector<double>& thresholds,
                                        WarningList* warnings = nullptr);

// w_c: ftot-mean of the products the majority surrogate assigns to country c,
// averaged over those products. Countries with no predicted products get NaN
// with a warning.
std::vector<double> country_weights(const Eigen::MatrixXi& majority_t,
                                    const std::vector<double>& ftot_mean,
                                    WarningList* warnings = nullptr);

// MONEY = 1 - w * AUC, lower values meaning more reliable specialisation
// signals. NaN inputs propagate.
std::vector<double> money_scores(const std::vector<double>& auc,
                                 const std::vector<double>& weights);

}  // namespace ecmc
