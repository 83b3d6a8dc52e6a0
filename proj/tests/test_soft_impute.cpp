#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "ecmc/data_ingest.hpp"
#include "ecmc/rng.hpp"
#include "ecmc/soft_impute.hpp"

using namespace ecmc;

namespace {

IndexSet all_cells(Eigen::Index rows, Eigen::Index cols) {
    IndexSet cells;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            cells.emplace_back(r, c);
        }
    }
    return cells;
}

MaskedMatrix random_masked(RandomStream& stream, Eigen::Index rows, Eigen::Index cols,
                           double keep_probability) {
    MaskedMatrix masked;
    masked.values = Eigen::MatrixXd(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            masked.values(r, c) = stream.gaussian();
            if (stream.bernoulli(keep_probability)) {
                masked.observed.emplace_back(r, c);
            }
        }
    }
    if (masked.observed.empty()) {
        masked.observed.emplace_back(0, 0);
    }
    return masked;
}

}  // namespace

TEST_CASE("fully observed input converges to its shrunk decomposition") {
    RandomStream stream({21});
    Eigen::MatrixXd values(6, 5);
    for (Eigen::Index r = 0; r < 6; ++r) {
        for (Eigen::Index c = 0; c < 5; ++c) {
            values(r, c) = stream.gaussian();
        }
    }
    const MaskedMatrix observed{values, all_cells(6, 5)};

    SolverConfig config;
    config.lambda = 0.8;
    const CompletionResult result = solve(observed, config);

    CHECK(result.converged);
    // with no hidden cells the iteration is stationary after one step
    CHECK(result.iterations_used == 2);
    CHECK((result.completed - soft_threshold_svd(values, 0.8)).norm() < 1e-12);
}

TEST_CASE("a dominating penalty collapses the solution to zero") {
    Eigen::MatrixXd values(3, 3);
    values << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    SolverConfig config;
    config.lambda = 50.0;
    const CompletionResult result = solve({values, all_cells(3, 3)}, config);
    CHECK(result.converged);
    CHECK(result.iterations_used == 1);  // zero-to-zero step
    CHECK(result.completed.norm() == 0.0);
}

TEST_CASE("masked rank-1 structure is recovered on hidden cells") {
    RandomStream stream({22});
    Eigen::VectorXd u(10), v(8);
    for (Eigen::Index i = 0; i < 10; ++i) u(i) = 1.0 + stream.uniform01();
    for (Eigen::Index i = 0; i < 8; ++i) v(i) = 1.0 + stream.uniform01();
    const Eigen::MatrixXd truth = u * v.transpose();

    MaskedMatrix observed;
    observed.values = truth;
    BoolMask hidden = BoolMask::Constant(10, 8, false);
    for (Eigen::Index r = 0; r < 10; ++r) {
        for (Eigen::Index c = 0; c < 8; ++c) {
            if (stream.bernoulli(0.3)) {
                hidden(r, c) = true;
            } else {
                observed.observed.emplace_back(r, c);
            }
        }
    }

    SolverConfig config;
    config.lambda = 0.05;
    config.max_iterations = 3000;
    const CompletionResult result = solve(observed, config);
    REQUIRE(result.converged);

    double err = 0.0, norm = 0.0;
    for (Eigen::Index r = 0; r < 10; ++r) {
        for (Eigen::Index c = 0; c < 8; ++c) {
            if (!hidden(r, c)) continue;
            err += std::pow(result.completed(r, c) - truth(r, c), 2);
            norm += std::pow(truth(r, c), 2);
        }
    }
    CHECK(std::sqrt(err / norm) < 0.05);
}

TEST_CASE("objective decreases monotonically along the iteration") {
    RandomStream stream({23});
    for (int trial = 0; trial < 5; ++trial) {
        const MaskedMatrix observed = random_masked(stream, 12, 10, 0.6);
        SolverConfig config;
        config.lambda = 0.1 + 2.0 * stream.uniform01();
        config.record_objective = true;
        config.max_iterations = 200;
        const CompletionResult result = solve(observed, config);
        REQUIRE(result.objective_trace.size() ==
                static_cast<std::size_t>(result.iterations_used));
        for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
            CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-8);
        }
    }
}

TEST_CASE("converged iterates are fixed points of the update") {
    RandomStream stream({24});
    const MaskedMatrix observed = random_masked(stream, 14, 11, 0.5);
    SolverConfig config;
    config.lambda = 1.0;
    config.tolerance = 1e-12;
    config.max_iterations = 5000;
    const CompletionResult result = solve(observed, config);
    REQUIRE(result.converged);

    const Eigen::MatrixXd reapplied = soft_threshold_svd(
        project(observed.values, observed.observed) +
            project_complement(result.completed, observed.observed),
        config.lambda);
    CHECK((reapplied - result.completed).norm() <
          1e-4 * std::max(1.0, result.completed.norm()));
}

TEST_CASE("objective evaluates the masked error plus the spectral penalty") {
    Eigen::MatrixXd values(2, 2);
    values << 2, 0, 0, 2;
    const MaskedMatrix observed{values, {{0, 0}, {1, 1}}};
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    CHECK(objective(observed, zero, 1.0) == doctest::Approx(4.0));  // 0.5 * 8
    CHECK(objective(observed, values, 1.0) == doctest::Approx(4.0));  // penalty only
    CHECK_THROWS_AS(objective(observed, Eigen::MatrixXd::Zero(3, 2), 1.0),
                    ContractViolation);
}

TEST_CASE("warm starts accept only matching shapes") {
    Eigen::MatrixXd values(3, 3);
    values.setOnes();
    SolverConfig config;
    config.lambda = 0.5;
    config.warm_start = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(solve({values, all_cells(3, 3)}, config), ContractViolation);

    config.warm_start = soft_threshold_svd(values, 0.5);
    const CompletionResult warmed = solve({values, all_cells(3, 3)}, config);
    CHECK(warmed.converged);
    CHECK(warmed.iterations_used == 1);  // started at the fixed point
}

TEST_CASE("solver validates its inputs") {
    Eigen::MatrixXd values(2, 2);
    values.setOnes();
    SolverConfig config;
    config.lambda = -1.0;
    CHECK_THROWS_AS(solve({values, all_cells(2, 2)}, config), ConfigError);
    config.lambda = 1.0;
    config.tolerance = 0.0;
    CHECK_THROWS_AS(solve({values, all_cells(2, 2)}, config), ConfigError);
    config.tolerance = 1e-9;
    config.max_iterations = 0;
    CHECK_THROWS_AS(solve({values, all_cells(2, 2)}, config), ConfigError);
    config.max_iterations = 10;
    CHECK_THROWS_AS(solve({values, {}}, config), ContractViolation);
}

TEST_CASE("iteration budget is honoured when convergence is slow") {
    RandomStream stream({25});
    const MaskedMatrix observed = random_masked(stream, 10, 9, 0.5);
    SolverConfig config;
    config.lambda = 0.01;
    config.tolerance = 1e-16;  // unreachable
    config.max_iterations = 7;
    const CompletionResult result = solve(observed, config);
    CHECK_FALSE(result.converged);
    CHECK(result.iterations_used == 7);
    CHECK(result.completed.allFinite());
}
