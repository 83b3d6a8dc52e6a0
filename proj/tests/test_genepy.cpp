#include <doctest.h>

#include <cmath>
#include <limits>

#include "ecmc/genepy.hpp"

using namespace ecmc;

namespace {

// Three-country fixture whose spectrum is solvable by hand. With
// a = 0.140625 and b = 0.33375 the proximity matrix is
//   [0 a b; a 0 b; b b 0]
// and the eigenvalues are (a + sqrt(a^2 + 8 b^2)) / 2, -a, and
// (a - sqrt(a^2 + 8 b^2)) / 2.
IncidenceMatrix hand_fixture() {
    IncidenceMatrix incidence;
    incidence.row_labels = {"AAA", "BBB", "CCC"};
    incidence.col_labels = {"01", "02", "03"};
    incidence.entries = Eigen::MatrixXi(3, 3);
    incidence.entries << 1, 1, 0,
                         1, 0, 1,
                         1, 1, 1;
    return incidence;
}

constexpr double kA = 0.140625;
constexpr double kB = 0.33375;

}  // namespace

TEST_CASE("incidence thresholds the ratio at one and zeroes missing cells") {
    RcaMatrix rca;
    rca.countries = {"AAA", "BBB"};
    rca.products = {"01", "02"};
    rca.values = Eigen::MatrixXd(2, 2);
    rca.values << 1.0, 0.99, std::numeric_limits<double>::quiet_NaN(), 2.5;
    rca.missing = BoolMask::Constant(2, 2, false);
    rca.missing(1, 0) = true;

    const IncidenceMatrix incidence = incidence_from_rca(rca);
    CHECK(incidence.entries(0, 0) == 1);
    CHECK(incidence.entries(0, 1) == 0);
    CHECK(incidence.entries(1, 0) == 0);
    CHECK(incidence.entries(1, 1) == 1);

    const IncidenceMatrix flipped = incidence_transposed(incidence);
    CHECK(flipped.row_labels == incidence.col_labels);
    CHECK(flipped.entries(1, 0) == 0);
}

TEST_CASE("zero-degree rows and columns are pruned with warnings") {
    IncidenceMatrix incidence;
    incidence.row_labels = {"AAA", "BBB", "CCC"};
    incidence.col_labels = {"01", "02", "03"};
    incidence.entries = Eigen::MatrixXi(3, 3);
    incidence.entries << 1, 0, 1,
                         0, 0, 0,
                         1, 0, 1;

    WarningList warnings;
    const PrunedIncidence pruned = drop_zero_degree(incidence, &warnings);
    CHECK(pruned.kept.row_labels == std::vector<std::string>{"AAA", "CCC"});
    CHECK(pruned.kept.col_labels == std::vector<std::string>{"01", "03"});
    CHECK(pruned.dropped_rows == std::vector<std::string>{"BBB"});
    CHECK(pruned.dropped_cols == std::vector<std::string>{"02"});
    CHECK(pruned.kept_row_indices == std::vector<Eigen::Index>{0, 2});
    CHECK(pruned.kept.entries.sum() == 4);
    CHECK(warnings.size() == 2);
}

TEST_CASE("the weighted incidence divides by row degree and corrected column weight") {
    const IncidenceMatrix incidence = hand_fixture();
    const Eigen::MatrixXd weighted = weighted_incidence(incidence.entries);
    // k_c = (2, 2, 3); k'_p = (4/3, 5/6, 5/6)
    CHECK(weighted(0, 0) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK(weighted(0, 1) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
    CHECK(weighted(0, 2) == 0.0);
    CHECK(weighted(1, 0) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK(weighted(1, 2) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
    CHECK(weighted(2, 0) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));
    CHECK(weighted(2, 1) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));

    Eigen::MatrixXi degenerate(2, 2);
    degenerate << 1, 0, 0, 0;
    CHECK_THROWS_AS(weighted_incidence(degenerate), ContractViolation);
}

TEST_CASE("proximity is the symmetric product with a hollow diagonal") {
    const Eigen::MatrixXd weighted = weighted_incidence(hand_fixture().entries);
    const Eigen::MatrixXd prox = proximity(weighted);
    CHECK(prox(0, 0) == 0.0);
    CHECK(prox(1, 1) == 0.0);
    CHECK(prox(0, 1) == doctest::Approx(kA).epsilon(1e-15));
    CHECK(prox(0, 2) == doctest::Approx(kB).epsilon(1e-15));
    CHECK(prox(1, 2) == doctest::Approx(kB).epsilon(1e-15));
    CHECK((prox - prox.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the spectral summary matches the closed-form eigensystem") {
    const Eigen::MatrixXd prox =
        proximity(weighted_incidence(hand_fixture().entries));
    WarningList warnings;
    const GenepyScores scores = genepy_scores(prox, &warnings);

    const double root = std::sqrt(kA * kA + 8.0 * kB * kB);
    const double lambda1 = (kA + root) / 2.0;
    const double lambda2 = -kA;
    CHECK(scores.lambda1 == doctest::Approx(lambda1).epsilon(1e-12));
    CHECK(scores.lambda2 == doctest::Approx(lambda2).epsilon(1e-12));
    // second eigenvector is (1, -1, 0) / sqrt(2) up to sign; orientation makes
    // the largest-magnitude entry positive
    CHECK(scores.vector2(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(scores.vector2(1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(scores.vector2(2) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(scores.vector1(0) == doctest::Approx(scores.vector1(1)).epsilon(1e-10));
    CHECK(scores.vector1(0) > 0.0);

    for (int i = 0; i < 3; ++i) {
        const double x1 = scores.vector1(i);
        const double x2 = scores.vector2(i);
        const double linear = lambda1 * x1 * x1 + lambda2 * x2 * x2;
        const double expected = linear * linear +
            2.0 * (lambda1 * lambda1 * x1 * x1 + lambda2 * lambda2 * x2 * x2);
        CHECK(scores.scores[i] == doctest::Approx(expected).epsilon(1e-12));
    }
    // a negative second eigenvalue is reported
    REQUIRE(warnings.size() == 1);
}

TEST_CASE("scores are invariant under eigenvector sign flips") {
    const Eigen::MatrixXd prox =
        proximity(weighted_incidence(hand_fixture().entries));
    const GenepyScores once = genepy_scores(prox);
    const GenepyScores twice = genepy_scores(prox);
    CHECK(once.vector1 == twice.vector1);
    CHECK(once.vector2 == twice.vector2);
    for (int i = 0; i < 3; ++i) {
        // the score formula only sees squared entries, so orientation cannot
        // change it
        CHECK(once.scores[i] >= 0.0);
    }
}

TEST_CASE("the spectral summary rejects malformed inputs") {
    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(genepy_scores(rect), ContractViolation);

    Eigen::MatrixXd tiny(2, 2);
    tiny << 0, 1, 1, 0;
    CHECK_THROWS_AS(genepy_scores(tiny), ContractViolation);

    Eigen::MatrixXd skew(3, 3);
    skew << 0, 1, 0,
            2, 0, 0,
            0, 0, 0;
    CHECK_THROWS_AS(genepy_scores(skew), ContractViolation);
}

TEST_CASE("the end-to-end pipeline prunes and keeps reporting metadata") {
    IncidenceMatrix incidence = hand_fixture();
    incidence.row_labels.push_back("DDD");
    incidence.entries.conservativeResize(4, 3);
    incidence.entries.row(3).setZero();

    const GenepyResult result = genepy_from_incidence(incidence);
    CHECK(result.entities == std::vector<std::string>{"AAA", "BBB", "CCC"});
    CHECK(result.dropped_entities == std::vector<std::string>{"DDD"});
    CHECK(result.dropped_features.empty());
    CHECK(result.degrees(0) == 2.0);
    CHECK(result.degrees(2) == 3.0);
    CHECK(result.scores.scores.size() == 3);

    IncidenceMatrix too_small;
    too_small.row_labels = {"AAA", "BBB"};
    too_small.col_labels = {"01"};
    too_small.entries = Eigen::MatrixXi::Ones(2, 1);
    CHECK_THROWS_AS(genepy_from_incidence(too_small), ContractViolation);
}

TEST_CASE("variant constructions share structure with the main proximity") {
    const IncidenceMatrix incidence = hand_fixture();
    const VariantDirections variants = variant_directions(incidence.entries);

    // keeping the diagonal is the only difference from the hollow proximity
    const Eigen::MatrixXd prox =
        proximity(weighted_incidence(incidence.entries));
    Eigen::MatrixXd hollowed = variants.fitness_proximity;
    hollowed.diagonal().setZero();
    CHECK((hollowed - prox).cwiseAbs().maxCoeff() == 0.0);
    CHECK(variants.fitness_proximity(0, 0) > 0.0);

    // degree-normalised variant: W_eci = M / (k_c k_p) with k_p = (3, 2, 2);
    // rows 0 and 1 only share product 0, so their inner product is (1/6)^2
    CHECK(variants.eci_proximity(0, 1) == doctest::Approx(1.0 / 36.0).epsilon(1e-12));
    CHECK(variants.eci_proximity(0, 0) ==
          doctest::Approx(1.0 / 36.0 + 1.0 / 16.0).epsilon(1e-12));

    CHECK(variants.fitness_direction.size() == 3);
    CHECK(variants.eci_direction.size() == 3);
    // orientation rule applies to the variants too
    double max_abs = 0.0;
    double max_entry = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(variants.eci_direction(i)) > max_abs) {
            max_abs = std::abs(variants.eci_direction(i));
            max_entry = variants.eci_direction(i);
        }
    }
    CHECK(max_entry > 0.0);
}
