#include <doctest.h>

#include <cmath>
#include <limits>

#include "ecmc/evaluation.hpp"

using namespace ecmc;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("the pooled sweep equals a flat per-cell sweep") {
    Eigen::MatrixXd scores(2, 3);
    scores << 0.9, 0.1, 0.7,
              0.3, 0.8, 0.2;
    Eigen::MatrixXi truth(2, 3);
    truth << 1, 0, 1,
             0, 1, 0;
    BoolMask valid = BoolMask::Constant(2, 3, true);
    valid(1, 2) = false;

    const RocCurve pooled = global_roc(scores, truth, valid, default_threshold_grid());
    const std::vector<double> flat_scores = {0.9, 0.1, 0.7, 0.3, 0.8};
    const std::vector<bool> flat_labels = {true, false, true, false, true};
    const RocCurve direct = binary_roc(flat_scores, flat_labels, default_threshold_grid());
    CHECK(pooled.auc == doctest::Approx(direct.auc).epsilon(1e-15));
    CHECK(pooled.auc == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(global_roc(scores, truth, BoolMask::Constant(2, 3, false),
                               default_threshold_grid()),
                    EmptyInputError);
}

TEST_CASE("balanced accuracy averages the class recalls") {
    Eigen::MatrixXi predicted(2, 3);
    predicted << 1, 0, 0,
                 0, 1, 1;
    Eigen::MatrixXi truth(2, 3);
    truth << 1, 0, 1,
             0, 1, 0;
    const BoolMask valid = BoolMask::Constant(2, 3, true);
    // positives: 3 seen, 2 hit; negatives: 3 seen, 2 hit
    CHECK(balanced_accuracy(predicted, truth, valid) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    Eigen::MatrixXi ones = Eigen::MatrixXi::Ones(2, 3);
    CHECK(std::isnan(balanced_accuracy(predicted, ones, valid)));
}

TEST_CASE("a strictly monotone pair has unit rank correlation") {
    const RankCorrelation result =
        kendall_tau({1.0, 2.0, 3.0, 4.0, 5.0}, {2.0, 4.0, 6.0, 8.0, 10.0});
    CHECK(result.tau == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(result.pairs_used == 5);
    // z = 10 / sqrt(50/3) for n = 5 without ties
    CHECK(result.p_value == doctest::Approx(0.014305878435429655).epsilon(1e-12));

    const RankCorrelation reversed =
        kendall_tau({1.0, 2.0, 3.0, 4.0, 5.0}, {10.0, 8.0, 6.0, 4.0, 2.0});
    CHECK(reversed.tau == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(reversed.p_value == doctest::Approx(0.014305878435429655).epsilon(1e-12));
}

TEST_CASE("ties shrink the denominator and feed the variance correction") {
    // C = 4, D = 0, one tie on each side: tau-b = 4 / sqrt(5 * 5) = 0.8
    const RankCorrelation result = kendall_tau({1.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 2.0, 3.0});
    CHECK(result.tau == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(result.p_value == doctest::Approx(0.1259711630772311).epsilon(1e-12));
    CHECK(result.pairs_used == 4);
}

TEST_CASE("rank correlation drops incomplete pairs and rejects tiny samples") {
    const RankCorrelation result =
        kendall_tau({1.0, kNan, 2.0, 3.0, 4.0, 5.0}, {2.0, 7.0, 4.0, 6.0, 8.0, kNan});
    CHECK(result.pairs_used == 4);
    CHECK(result.tau == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(std::isnan(kendall_tau({1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}).tau));
    CHECK_THROWS_AS(kendall_tau({1.0, 2.0}, {2.0, 1.0}), ContractViolation);
    CHECK_THROWS_AS(kendall_tau({1.0, kNan, 2.0}, {1.0, 2.0, kNan}), ContractViolation);
    CHECK_THROWS_AS(kendall_tau({1.0, 2.0, 3.0}, {1.0, 2.0}), ContractViolation);
}

TEST_CASE("octile cross-tabulation spreads even samples uniformly") {
    std::vector<double> first;
    std::vector<double> second;
    for (int i = 0; i < 16; ++i) {
        first.push_back(static_cast<double>(i));
        second.push_back(static_cast<double>(i));
    }
    const PercentileConfusion table = percentile_confusion(first, second);
    REQUIRE(table.counts.rows() == 8);
    REQUIRE(table.counts.cols() == 8);
    CHECK(table.counts.sum() == 16);
    CHECK(table.first_edges.size() == 7);
    // identical rankings land on the diagonal, two per octile
    for (int b = 0; b < 8; ++b) {
        CHECK(table.counts(b, b) == 2);
    }
    CHECK(table.counts.diagonal().sum() == 16);
}

TEST_CASE("octile cross-tabulation handles disagreement and gaps") {
    std::vector<double> first;
    std::vector<double> reversed;
    for (int i = 0; i < 32; ++i) {
        first.push_back(static_cast<double>(i));
        reversed.push_back(static_cast<double>(31 - i));
    }
    const PercentileConfusion table = percentile_confusion(first, reversed);
    CHECK(table.counts.sum() == 32);
    // perfect anti-alignment fills the anti-diagonal
    for (int b = 0; b < 8; ++b) {
        CHECK(table.counts(b, 7 - b) == 4);
    }

    // non-finite pairs are dropped before binning
    std::vector<double> with_gap = first;
    with_gap[3] = kNan;
    const PercentileConfusion partial = percentile_confusion(with_gap, reversed);
    CHECK(partial.counts.sum() == 31);

    WarningList warnings;
    const PercentileConfusion flat =
        percentile_confusion({1.0, 1.0, 1.0, 1.0}, {1.0, 2.0, 3.0, 4.0}, &warnings);
    CHECK(flat.counts.sum() == 4);
    CHECK(flat.counts.row(0).sum() == 4);  // constant score collapses to bin 0
    CHECK(!warnings.empty());

    CHECK_THROWS_AS(percentile_confusion({1.0, kNan}, {1.0, 2.0}), ContractViolation);
}

TEST_CASE("reference-group hit rates rank deterministically") {
    const std::vector<std::string> labels = {"AAA", "BBB", "CCC", "DDD", "EEE"};
    const std::vector<double> scores = {0.9, 0.8, 0.1, 0.7, 0.2};
    const std::set<std::string> group = {"AAA", "BBB", "EEE"};

    // descending: top 2 are AAA, BBB; both in the group
    CHECK(top_group_ratio(labels, scores, group, 2, false) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // ascending: top 2 are CCC, EEE; one hit
    CHECK(top_group_ratio(labels, scores, group, 2, true) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // score ties break by label: with x = 1 the tie at 0.9 goes to AAA
    const std::vector<double> tied = {0.9, 0.9, 0.1, 0.7, 0.2};
    CHECK(top_group_ratio(labels, tied, group, 1, false) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // non-finite scores leave the ranking entirely
    const std::vector<double> gappy = {kNan, 0.8, 0.1, 0.7, 0.2};
    CHECK(top_group_ratio(labels, gappy, group, 2, false) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));  // BBB, DDD ranked first

    CHECK_THROWS_AS(top_group_ratio(labels, scores, {}, 2, false), ConfigError);
    CHECK_THROWS_AS(top_group_ratio(labels, scores, group, 0, false), ContractViolation);
    CHECK_THROWS_AS(top_group_ratio(labels, scores, group, 6, false), ContractViolation);
    CHECK_THROWS_AS(top_group_ratio(labels, {0.9, 0.8}, group, 1, false),
                    ContractViolation);
}
