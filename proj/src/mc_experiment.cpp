#include "ecmc/mc_experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "ecmc/rng.hpp"

namespace ecmc {

namespace {

constexpr std::uint64_t kPartitionTag = 1;
constexpr std::uint64_t kTieTag = 3;

}  // namespace

std::vector<double> step_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(30);
    for (int k = 1; k <= 30; ++k) {
        grid.push_back(std::pow(2.0, (k - 1) / 2.0));
    }
    return grid;
}

std::vector<double> spread_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(30);
    for (int i = 0; i < 30; ++i) {
        const double exponent = -1.0 + 16.0 * static_cast<double>(i) / 29.0;
        grid.push_back(std::pow(2.0, exponent));
    }
    return grid;
}

void ProtocolConfig::validate() const {
    if (repetitions < 1) {
        throw ConfigError("protocol needs at least one repetition");
    }
    if (!(row_fraction > 0.0 && row_fraction <= 1.0)) {
        throw ConfigError("row fraction must be in (0, 1]");
    }
    if (!(missing_probability > 0.0 && missing_probability < 1.0)) {
        throw ConfigError("missing probability must be in (0, 1)");
    }
    if (lambda_grid.empty()) {
        throw ConfigError("penalty grid is empty");
    }
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0)) {
            throw ConfigError("penalty grid entries must be positive");
        }
        if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) {
            throw ConfigError("penalty grid must be strictly increasing");
        }
    }
    if (clip && !(clip_low < clip_high)) {
        throw ConfigError("clip bounds are inverted");
    }
    if (!(solver_tolerance > 0.0)) {
        throw ConfigError("solver tolerance must be positive");
    }
    if (solver_max_iterations < 1) {
        throw ConfigError("solver iteration budget must be positive");
    }
    if (threads < 1) {
        throw ConfigError("thread count must be positive");
    }
}

Eigen::Index ProtocolConfig::selected_row_count(Eigen::Index rows) const {
    return static_cast<Eigen::Index>(
               std::floor(row_fraction * static_cast<double>(rows))) + 1;
}

ExperimentInput transposed(const ExperimentInput& input) {
    return {input.values.transpose(), input.eligible.transpose()};
}

MaskPartition build_partition(const BoolMask& eligible, int repetition,
                              const ProtocolConfig& config, ExperimentSide side) {
    const Eigen::Index rows = eligible.rows();
    const Eigen::Index cols = eligible.cols();
    const Eigen::Index target = config.selected_row_count(rows);
    if (target > rows) {
        throw ContractViolation("selected row count exceeds the matrix height");
    }

    RandomStream stream({config.base_seed, static_cast<std::uint64_t>(side), kPartitionTag,
                         static_cast<std::uint64_t>(repetition)});

    std::vector<Eigen::Index> permutation(static_cast<std::size_t>(rows));
    std::iota(permutation.begin(), permutation.end(), Eigen::Index{0});
    stream.shuffle(permutation);

    MaskPartition partition;
    partition.repetition = repetition;
    std::vector<bool> selected(static_cast<std::size_t>(rows), false);
    for (Eigen::Index row : permutation) {
        if (static_cast<Eigen::Index>(partition.selected_rows.size()) == target) {
            break;
        }
        const bool has_eligible_cell = eligible.row(row).any();
        if (!has_eligible_cell) {
            warn(&partition.warnings, "repetition " + std::to_string(repetition) + ": row " +
                                          std::to_string(row) +
                                          " has no obscurable cells, passed over");
            continue;
        }
        partition.selected_rows.push_back(row);
        selected[static_cast<std::size_t>(row)] = true;
    }
    if (static_cast<Eigen::Index>(partition.selected_rows.size()) < target) {
        throw ContractViolation("not enough rows with obscurable cells: need " +
                                std::to_string(target) + ", found " +
                                std::to_string(partition.selected_rows.size()));
    }

    std::vector<std::size_t> slot_of_row(static_cast<std::size_t>(rows), 0);
    for (std::size_t s = 0; s < partition.selected_rows.size(); ++s) {
        slot_of_row[static_cast<std::size_t>(partition.selected_rows[s])] = s;
    }
    partition.obscured_by_row.resize(partition.selected_rows.size());

    // Obscuring draws walk the matrix row-major so the stream consumption is
    // independent of the selection order.
    for (Eigen::Index r = 0; r < rows; ++r) {
        const bool in_selection = selected[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!eligible(r, c)) {
                continue;
            }
            if (in_selection && stream.bernoulli(config.missing_probability)) {
                partition.obscured_by_row[slot_of_row[static_cast<std::size_t>(r)]]
                    .emplace_back(r, c);
            } else {
                partition.training.emplace_back(r, c);
            }
        }
    }
    return partition;
}

RepetitionOutcome run_repetition(const ExperimentInput& input, const MaskPartition& partition,
                                 const ProtocolConfig& config) {
    RepetitionOutcome outcome;
    outcome.repetition = partition.repetition;

    const std::size_t grid_size = config.lambda_grid.size();
    std::vector<Eigen::MatrixXd> completions(grid_size);
    const MaskedMatrix training{input.values, partition.training};
    try {
        Eigen::MatrixXd previous;
        for (std::size_t step = 0; step < grid_size; ++step) {
            // Warm starts walk the grid from the largest penalty down, where
            // consecutive solutions stay close.
            const std::size_t i = config.warm_start_path ? grid_size - 1 - step : step;
            SolverConfig solver;
            solver.lambda = config.lambda_grid[i];
            solver.tolerance = config.solver_tolerance;
            solver.max_iterations = config.solver_max_iterations;
            solver.svd_method = config.svd_method;
            if (config.warm_start_path && step > 0) {
                solver.warm_start = previous;
            }
            CompletionResult solved = solve(training, solver);
            if (config.warm_start_path) {
                previous = solved.completed;
            }
            if (config.clip) {
                solved.completed = solved.completed.cwiseMax(config.clip_low)
                                       .cwiseMin(config.clip_high);
            }
            completions[i] = std::move(solved.completed);
        }
    } catch (const NumericalError& error) {
        outcome.failed = true;
        outcome.failure_reason = error.what();
        return outcome;
    }

    // Squared error of each penalty on each selected row's obscured cells.
    const std::size_t row_slots = partition.selected_rows.size();
    std::vector<std::vector<double>> row_sse(grid_size, std::vector<double>(row_slots, 0.0));
    std::vector<double> total_sse(grid_size, 0.0);
    std::size_t total_count = 0;
    for (std::size_t j = 0; j < row_slots; ++j) {
        total_count += partition.obscured_by_row[j].size();
        for (std::size_t i = 0; i < grid_size; ++i) {
            double sse = 0.0;
            for (const auto& [r, c] : partition.obscured_by_row[j]) {
                const double gap = input.values(r, c) - completions[i](r, c);
                sse += gap * gap;
            }
            row_sse[i][j] = sse;
            total_sse[i] += sse;
        }
    }

    for (std::size_t j = 0; j < row_slots; ++j) {
        const IndexSet& test_cells = partition.obscured_by_row[j];
        if (test_cells.empty()) {
            continue;  // nothing was obscured in this row this time
        }
        const std::size_t validation_count = total_count - test_cells.size();
        if (validation_count == 0) {
            warn(&outcome.warnings,
                 "repetition " + std::to_string(partition.repetition) + ": row " +
                     std::to_string(partition.selected_rows[j]) +
                     " has no validation cells, skipped");
            continue;
        }
        std::size_t best = 0;
        double best_rmse = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid_size; ++i) {
            const double rmse = std::sqrt((total_sse[i] - row_sse[i][j]) /
                                          static_cast<double>(validation_count));
            if (rmse < best_rmse) {
                best_rmse = rmse;
                best = i;
            }
        }
        RmseRecord record;
        record.repetition = partition.repetition;
        record.row = partition.selected_rows[j];
        record.lambda = config.lambda_grid[best];
        record.validation_rmse = best_rmse;
        record.test_rmse =
            std::sqrt(row_sse[best][j] / static_cast<double>(test_cells.size()));
        outcome.records.push_back(record);

        for (const auto& [r, c] : test_cells) {
            CellVote vote;
            vote.row = r;
            vote.col = c;
            vote.predicted_positive = completions[best](r, c) >= 0.0;
            vote.truth_positive = input.values(r, c) >= 0.0;
            outcome.votes.push_back(vote);
        }
    }
    return outcome;
}

AggregatedPredictions aggregate(const ExperimentInput& input,
                                const std::vector<RepetitionOutcome>& outcomes,
                                const ProtocolConfig& config, ExperimentSide side) {
    const Eigen::Index rows = input.values.rows();
    const Eigen::Index cols = input.values.cols();

    AggregatedPredictions agg;
    agg.test_appearances = Eigen::MatrixXi::Zero(rows, cols);
    agg.positive_votes = Eigen::MatrixXi::Zero(rows, cols);
    agg.negatives_seen = Eigen::VectorXi::Zero(rows);
    agg.negative_errors = Eigen::VectorXi::Zero(rows);
    agg.positives_seen = Eigen::VectorXi::Zero(rows);
    agg.positive_errors = Eigen::VectorXi::Zero(rows);
    agg.total_repetitions = static_cast<int>(outcomes.size());

    for (const auto& outcome : outcomes) {
        if (outcome.failed) {
            ++agg.failed_repetitions;
            continue;
        }
        for (const auto& vote : outcome.votes) {
            agg.test_appearances(vote.row, vote.col) += 1;
            if (vote.predicted_positive) {
                agg.positive_votes(vote.row, vote.col) += 1;
            }
            if (vote.truth_positive) {
                agg.positives_seen(vote.row) += 1;
                if (!vote.predicted_positive) {
                    agg.positive_errors(vote.row) += 1;
                }
            } else {
                agg.negatives_seen(vote.row) += 1;
                if (vote.predicted_positive) {
                    agg.negative_errors(vote.row) += 1;
                }
            }
        }
        agg.rmse_records.insert(agg.rmse_records.end(), outcome.records.begin(),
                                outcome.records.end());
    }
    if (agg.failed_repetitions == agg.total_repetitions) {
        throw NumericalError("every repetition failed");
    }

    agg.mean_positive = Eigen::MatrixXd::Zero(rows, cols);
    agg.majority_positive = Eigen::MatrixXi::Zero(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const int appearances = agg.test_appearances(r, c);
            if (appearances == 0) {
                continue;  // never tested: both summaries stay 0
            }
            const int positives = agg.positive_votes(r, c);
            agg.mean_positive(r, c) =
                static_cast<double>(positives) / static_cast<double>(appearances);
            if (2 * positives > appearances) {
                agg.majority_positive(r, c) = 1;
            } else if (2 * positives == appearances) {
                RandomStream coin({config.base_seed, static_cast<std::uint64_t>(side), kTieTag,
                                   static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(c)});
                agg.majority_positive(r, c) = coin.bernoulli(0.5) ? 1 : 0;
            }
        }
    }
    return agg;
}

RowErrorRates row_error_rates(const AggregatedPredictions& predictions) {
    const auto rows = predictions.negatives_seen.size();
    RowErrorRates rates;
    rates.false_positive_rate.resize(static_cast<std::size_t>(rows));
    rates.false_negative_rate.resize(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
        rates.false_positive_rate[static_cast<std::size_t>(r)] =
            predictions.negatives_seen(r) > 0
                ? static_cast<double>(predictions.negative_errors(r)) /
                      static_cast<double>(predictions.negatives_seen(r))
                : std::numeric_limits<double>::quiet_NaN();
        rates.false_negative_rate[static_cast<std::size_t>(r)] =
            predictions.positives_seen(r) > 0
                ? static_cast<double>(predictions.positive_errors(r)) /
                      static_cast<double>(predictions.positives_seen(r))
                : std::numeric_limits<double>::quiet_NaN();
    }
    return rates;
}

Eigen::MatrixXd surrogate_mean(const AggregatedPredictions& predictions,
                               const BoolMask& eligible) {
    if (predictions.mean_positive.rows() != eligible.rows() ||
        predictions.mean_positive.cols() != eligible.cols()) {
        throw ContractViolation("surrogate: mask shape mismatch");
    }
    return eligible.select(predictions.mean_positive,
                           Eigen::MatrixXd::Zero(eligible.rows(), eligible.cols()));
}

Eigen::MatrixXi surrogate_majority(const AggregatedPredictions& predictions,
                                   const BoolMask& eligible) {
    if (predictions.majority_positive.rows() != eligible.rows() ||
        predictions.majority_positive.cols() != eligible.cols()) {
        throw ContractViolation("surrogate: mask shape mismatch");
    }
    return eligible.select(predictions.majority_positive,
                           Eigen::MatrixXi::Zero(eligible.rows(), eligible.cols()));
}

AggregatedPredictions run_experiment(const ExperimentInput& input, const ProtocolConfig& config,
                                     ExperimentSide side, WarningList* warnings) {
    config.validate();
    if (input.values.rows() != input.eligible.rows() ||
        input.values.cols() != input.eligible.cols()) {
        throw ContractViolation("experiment input: mask shape mismatch");
    }
    Eigen::Index usable_rows = 0;
    for (Eigen::Index r = 0; r < input.eligible.rows(); ++r) {
        if (input.eligible.row(r).any()) {
            ++usable_rows;
        }
    }
    const Eigen::Index target = config.selected_row_count(input.values.rows());
    if (usable_rows < target) {
        throw ContractViolation("not enough rows with obscurable cells: need " +
                                std::to_string(target) + ", found " +
                                std::to_string(usable_rows));
    }

    std::vector<RepetitionOutcome> outcomes(static_cast<std::size_t>(config.repetitions));
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int n = next.fetch_add(1);
            if (n >= config.repetitions) {
                return;
            }
            const MaskPartition partition =
                build_partition(input.eligible, n + 1, config, side);
            RepetitionOutcome outcome = run_repetition(input, partition, config);
            outcome.warnings.insert(outcome.warnings.begin(), partition.warnings.begin(),
                                    partition.warnings.end());
            outcomes[static_cast<std::size_t>(n)] = std::move(outcome);
        }
    };
    const int thread_count = std::min(config.threads, config.repetitions);
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }

    for (const auto& outcome : outcomes) {
        for (const auto& message : outcome.warnings) {
            warn(warnings, message);
        }
        if (outcome.failed) {
            warn(warnings, "repetition " + std::to_string(outcome.repetition) +
                               " failed: " + outcome.failure_reason);
        }
    }
    return aggregate(input, outcomes, config, side);
}

AggregatedPredictions run_product_side(const ExperimentInput& input,
                                       const ProtocolConfig& config,
                                       WarningList* warnings) {
    return run_experiment(transposed(input), config, ExperimentSide::product, warnings);
}

}  // namespace ecmc
