#include "ecmc/money_index.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ecmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    grid.reserve(101);
    for (int i = 0; i <= 100; ++i) {
        grid.push_back(static_cast<double>(i) / 100.0);
    }
    return grid;
}

RocCurve binary_roc(const std::vector<double>& scores, const std::vector<bool>& labels,
                    const std::vector<double>& thresholds, WarningList* warnings) {
    if (scores.size() != labels.size()) {
        throw ContractViolation("binary_roc: scores and labels differ in length");
    }
    if (thresholds.empty()) {
        throw ContractViolation("binary_roc: empty threshold grid");
    }
    std::size_t positives = 0;
    for (bool label : labels) {
        if (label) ++positives;
    }
    const std::size_t negatives = labels.size() - positives;

    RocCurve curve;
    curve.thresholds = thresholds;
    if (positives == 0 || negatives == 0) {
        warn(warnings, "roc undefined: truth contains a single class");
        curve.auc = kNaN;
        return curve;
    }

    curve.false_positive.reserve(thresholds.size());
    curve.true_positive.reserve(thresholds.size());
    for (double t : thresholds) {
        std::size_t false_pos = 0;
        std::size_t true_pos = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i]) {
                    ++true_pos;
                } else {
                    ++false_pos;
                }
            }
        }
        curve.false_positive.push_back(static_cast<double>(false_pos) /
                                       static_cast<double>(negatives));
        curve.true_positive.push_back(static_cast<double>(true_pos) /
                                      static_cast<double>(positives));
    }

    // Integrate from the strictest threshold, anchored at the empty
    // prediction (0, 0); the false positive rate grows as t falls.
    double area = 0.0;
    double prev_fpr = 0.0;
    double prev_tpr = 0.0;
    for (std::size_t i = thresholds.size(); i-- > 0;) {
        const double fpr = curve.false_positive[i];
        const double tpr = curve.true_positive[i];
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = area;
    return curve;
}

RowRocSet row_rocs(const Eigen::MatrixXd& mean_scores, const Eigen::MatrixXi& truth,
                   const BoolMask& valid, const std::vector<double>& thresholds,
                   WarningList* warnings) {
    if (mean_scores.rows() != truth.rows() || mean_scores.cols() != truth.cols() ||
        mean_scores.rows() != valid.rows() || mean_scores.cols() != valid.cols()) {
        throw ContractViolation("row_rocs: shape mismatch");
    }
    RowRocSet set;
    set.curves.reserve(static_cast<std::size_t>(mean_scores.rows()));
    for (Eigen::Index r = 0; r < mean_scores.rows(); ++r) {
        std::vector<double> scores;
        std::vector<bool> labels;
        for (Eigen::Index c = 0; c < mean_scores.cols(); ++c) {
            if (!valid(r, c)) continue;
            scores.push_back(mean_scores(r, c));
            labels.push_back(truth(r, c) != 0);
        }
        WarningList local;
        RocCurve curve = scores.empty()
                             ? RocCurve{thresholds, {}, {}, kNaN}
                             : binary_roc(scores, labels, thresholds, &local);
        if (!local.empty() || scores.empty()) {
            warn(warnings, "row " + std::to_string(r) + ": roc undefined, auc set to NA");
        }
        set.auc.push_back(curve.auc);
        set.curves.push_back(std::move(curve));
    }
    return set;
}

Eigen::MatrixXi threshold_incidence(const Eigen::MatrixXd& mean_scores, double threshold) {
    return (mean_scores.array() >= threshold).cast<int>();
}

ProductWeightTable product_weight_table(const Eigen::MatrixXd& mean_scores_t,
                                        const Eigen::MatrixXi& truth_t,
                                        const BoolMask& valid_t,
                                        const std::vector<double>& thresholds,
                                        WarningList* warnings) {
    if (mean_scores_t.rows() != truth_t.rows() || mean_scores_t.cols() != truth_t.cols() ||
        mean_scores_t.rows() != valid_t.rows() || mean_scores_t.cols() != valid_t.cols()) {
        throw ContractViolation("product_weight_table: shape mismatch");
    }
    if (thresholds.empty()) {
        throw ContractViolation("product_weight_table: empty threshold grid");
    }
    const Eigen::Index products = mean_scores_t.rows();
    const auto grid = static_cast<Eigen::Index>(thresholds.size());

    ProductWeightTable table;
    table.ftot = Eigen::MatrixXd::Zero(products, grid);
    table.ftot_mean.assign(static_cast<std::size_t>(products), 0.0);
    table.positives.assign(static_cast<std::size_t>(products), 0);
    table.negatives.assign(static_cast<std::size_t>(products), 0);

    for (Eigen::Index p = 0; p < products; ++p) {
        int positives = 0;
        int negatives = 0;
        for (Eigen::Index c = 0; c < mean_scores_t.cols(); ++c) {
            if (!valid_t(p, c)) continue;
            (truth_t(p, c) != 0 ? positives : negatives) += 1;
        }
        table.positives[static_cast<std::size_t>(p)] = positives;
        table.negatives[static_cast<std::size_t>(p)] = negatives;
        if (negatives == 0) {
            warn(warnings, "product row " + std::to_string(p) +
                               ": no true negatives, ftot forced to 0");
            continue;  // ftot stays 0 across the grid
        }
        const double class_share = static_cast<double>(negatives) /
                                   static_cast<double>(positives + negatives);
        double sum = 0.0;
        for (Eigen::Index t = 0; t < grid; ++t) {
            int false_pos = 0;
            for (Eigen::Index c = 0; c < mean_scores_t.cols(); ++c) {
                if (!valid_t(p, c) || truth_t(p, c) != 0) continue;
                if (mean_scores_t(p, c) >= thresholds[static_cast<std::size_t>(t)]) {
                    ++false_pos;
                }
            }
            const double fpr = static_cast<double>(false_pos) / static_cast<double>(negatives);
            table.ftot(p, t) = fpr * class_share;
            sum += table.ftot(p, t);
        }
        table.ftot_mean[static_cast<std::size_t>(p)] = sum / static_cast<double>(grid);
    }
    return table;
}

std::vector<double> country_weights(const Eigen::MatrixXi& majority_t,
                                    const std::vector<double>& ftot_mean,
                                    WarningList* warnings) {
    if (majority_t.rows() != static_cast<Eigen::Index>(ftot_mean.size())) {
        throw ContractViolation("country_weights: ftot length does not match product count");
    }
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(majority_t.cols()));
    for (Eigen::Index c = 0; c < majority_t.cols(); ++c) {
        double numerator = 0.0;
        double denominator = 0.0;
        for (Eigen::Index p = 0; p < majority_t.rows(); ++p) {
            if (majority_t(p, c) != 0) {
                numerator += ftot_mean[static_cast<std::size_t>(p)];
                denominator += 1.0;
            }
        }
        if (denominator == 0.0) {
            warn(warnings, "column " + std::to_string(c) +
                               ": no predicted products, weight set to NA");
            weights.push_back(kNaN);
        } else {
            weights.push_back(numerator / denominator);
        }
    }
    return weights;
}

std::vector<double> money_scores(const std::vector<double>& auc,
                                 const std::vector<double>& weights) {
    if (auc.size() != weights.size()) {
        throw ContractViolation("money_scores: input lengths differ");
    }
    std::vector<double> money;
    money.reserve(auc.size());
    for (std::size_t i = 0; i < auc.size(); ++i) {
        money.push_back(1.0 - weights[i] * auc[i]);  // NaN inputs propagate
    }
    return money;
}

}  // namespace ecmc
