#include "ecmc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecmc/stats.hpp"

namespace ecmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sizes of maximal runs of equal values.
std::vector<std::size_t> tie_group_sizes(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::size_t> sizes;
    std::size_t run = 1;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] == values[i - 1]) {
            ++run;
        } else {
            if (run > 1) sizes.push_back(run);
            run = 1;
        }
    }
    if (run > 1) sizes.push_back(run);
    return sizes;
}

}  // namespace

RocCurve global_roc(const Eigen::MatrixXd& mean_scores, const Eigen::MatrixXi& truth,
                    const BoolMask& valid, const std::vector<double>& thresholds,
                    WarningList* warnings) {
    if (mean_scores.rows() != truth.rows() || mean_scores.cols() != truth.cols() ||
        mean_scores.rows() != valid.rows() || mean_scores.cols() != valid.cols()) {
        throw ContractViolation("global_roc: shape mismatch");
    }
    std::vector<double> scores;
    std::vector<bool> labels;
    for (Eigen::Index r = 0; r < mean_scores.rows(); ++r) {
        for (Eigen::Index c = 0; c < mean_scores.cols(); ++c) {
            if (!valid(r, c)) continue;
            scores.push_back(mean_scores(r, c));
            labels.push_back(truth(r, c) != 0);
        }
    }
    if (scores.empty()) {
        throw EmptyInputError("global_roc: no valid cells");
    }
    return binary_roc(scores, labels, thresholds, warnings);
}

double balanced_accuracy(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth,
                         const BoolMask& valid) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols() ||
        predicted.rows() != valid.rows() || predicted.cols() != valid.cols()) {
        throw ContractViolation("balanced_accuracy: shape mismatch");
    }
    long long true_pos = 0, false_neg = 0, true_neg = 0, false_pos = 0;
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
        for (Eigen::Index c = 0; c < truth.cols(); ++c) {
            if (!valid(r, c)) continue;
            const bool actual = truth(r, c) != 0;
            const bool guess = predicted(r, c) != 0;
            if (actual) {
                (guess ? true_pos : false_neg) += 1;
            } else {
                (guess ? false_pos : true_neg) += 1;
            }
        }
    }
    const long long positives = true_pos + false_neg;
    const long long negatives = true_neg + false_pos;
    if (positives == 0 || negatives == 0) {
        return kNaN;
    }
    const double sensitivity = static_cast<double>(true_pos) / static_cast<double>(positives);
    const double specificity = static_cast<double>(true_neg) / static_cast<double>(negatives);
    return (sensitivity + specificity) / 2.0;
}

RankCorrelation kendall_tau(const std::vector<double>& first,
                            const std::vector<double>& second) {
    if (first.size() != second.size()) {
        throw ContractViolation("kendall_tau: input lengths differ");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (std::isfinite(first[i]) && std::isfinite(second[i])) {
            x.push_back(first[i]);
            y.push_back(second[i]);
        }
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw ContractViolation("kendall_tau: fewer than three complete pairs");
    }

    long long concordant = 0, discordant = 0, tied_x = 0, tied_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0) ++tied_x;
            if (dy == 0.0) ++tied_y;
            if (dx == 0.0 || dy == 0.0) continue;
            ((dx > 0.0) == (dy > 0.0) ? concordant : discordant) += 1;
        }
    }

    RankCorrelation result;
    result.pairs_used = n;
    const auto total = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
    const double denom = std::sqrt(static_cast<double>(total - tied_x)) *
                         std::sqrt(static_cast<double>(total - tied_y));
    if (denom == 0.0) {
        result.tau = kNaN;
        result.p_value = kNaN;
        return result;
    }
    result.tau = static_cast<double>(concordant - discordant) / denom;

    // Normal approximation of the null distribution of C - D with tie terms.
    const double nd = static_cast<double>(n);
    const auto groups_x = tie_group_sizes(x);
    const auto groups_y = tie_group_sizes(y);
    auto sum_over = [](const std::vector<std::size_t>& groups, auto term) {
        double total_term = 0.0;
        for (std::size_t size : groups) {
            total_term += term(static_cast<double>(size));
        }
        return total_term;
    };
    const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
    const double vt = sum_over(groups_x, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
    const double vu = sum_over(groups_y, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
    const double t1x = sum_over(groups_x, [](double t) { return t * (t - 1.0); });
    const double t1y = sum_over(groups_y, [](double t) { return t * (t - 1.0); });
    const double t2x = sum_over(groups_x, [](double t) { return t * (t - 1.0) * (t - 2.0); });
    const double t2y = sum_over(groups_y, [](double t) { return t * (t - 1.0) * (t - 2.0); });
    const double variance = (v0 - vt - vu) / 18.0 + t1x * t1y / (2.0 * nd * (nd - 1.0)) +
                            t2x * t2y / (9.0 * nd * (nd - 1.0) * (nd - 2.0));
    if (variance <= 0.0) {
        result.p_value = kNaN;
        return result;
    }
    const double z = static_cast<double>(concordant - discordant) / std::sqrt(variance);
    result.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
    return result;
}

PercentileConfusion percentile_confusion(const std::vector<double>& first,
                                         const std::vector<double>& second,
                                         WarningList* warnings) {
    if (first.size() != second.size()) {
        throw ContractViolation("percentile_confusion: input lengths differ");
    }
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (std::isfinite(first[i]) && std::isfinite(second[i])) {
            a.push_back(first[i]);
            b.push_back(second[i]);
        }
    }
    if (a.size() < 2) {
        throw ContractViolation("percentile_confusion: fewer than two complete pairs");
    }

    auto rescale = [warnings](std::vector<double>& values, const char* which) {
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        if (hi == lo) {
            warn(warnings, std::string("confusion: ") + which +
                               " score is constant, all mass in the lowest bin");
            std::fill(values.begin(), values.end(), 0.0);
            return;
        }
        for (double& v : values) {
            v = (v - lo) / (hi - lo);
        }
    };
    rescale(a, "first");
    rescale(b, "second");

    auto octile_edges = [warnings](const std::vector<double>& values, const char* which) {
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const auto distinct =
            static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
        if (distinct < 8) {
            warn(warnings, std::string("confusion: ") + which + " score has only " +
                               std::to_string(distinct) + " distinct values, bins merge");
        }
        sorted = values;
        std::sort(sorted.begin(), sorted.end());
        return interior_percentile_edges(sorted, 7);
    };

    PercentileConfusion confusion;
    confusion.first_edges = octile_edges(a, "first");
    confusion.second_edges = octile_edges(b, "second");
    confusion.counts = Eigen::MatrixXi::Zero(8, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int row = bin_by_edges(a[i], confusion.first_edges);
        const int col = bin_by_edges(b[i], confusion.second_edges);
        confusion.counts(row, col) += 1;
    }
    return confusion;
}

double top_group_ratio(const std::vector<std::string>& labels,
                       const std::vector<double>& scores,
                       const std::set<std::string>& group, std::size_t x, bool ascending) {
    if (labels.size() != scores.size()) {
        throw ContractViolation("top_group_ratio: input lengths differ");
    }
    if (group.empty()) {
        throw ConfigError("top_group_ratio: empty reference group");
    }
    std::vector<std::size_t> ranked;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isfinite(scores[i])) {
            ranked.push_back(i);
        }
    }
    if (x == 0 || x > ranked.size()) {
        throw ContractViolation("top_group_ratio: rank depth outside the scored range");
    }
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t lhs, std::size_t rhs) {
        if (scores[lhs] != scores[rhs]) {
            return ascending ? scores[lhs] < scores[rhs] : scores[lhs] > scores[rhs];
        }
        return labels[lhs] < labels[rhs];
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x; ++i) {
        if (group.count(labels[ranked[i]]) > 0) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(group.size());
}

}  // namespace ecmc
