#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/data_ingest.hpp"
#include "ecmc/soft_impute.hpp"
#include "ecmc/svt_core.hpp"

namespace ecmc {

// Which orientation of the matrix is being tested; also separates the seed
// domains so the two sides draw independent masks.
enum class ExperimentSide : std::uint64_t { country = 1, product = 2 };

// Penalty grid 2^((k-1)/2) for k = 1..30.
std::vector<double> step_lambda_grid();

// Alternative grid: 30 penalties with exponents evenly spaced on [-1, 15].
std::vector<double> spread_lambda_grid();

struct ProtocolConfig {
    int repetitions = 50;
    double row_fraction = 0.25;        // share of rows tested per repetition
    double missing_probability = 0.3;  // per-cell obscuring probability
    std::vector<double> lambda_grid = step_lambda_grid();
    bool clip = true;                  // clip completions to the group range
    double clip_low = -4.0;
    double clip_high = 4.0;
    std::uint64_t base_seed = 0;
    double solver_tolerance = 1e-9;
    int solver_max_iterations = 1500;
    SvdMethod svd_method = SvdMethod::automatic;
    bool warm_start_path = false;      // reuse solutions along descending lambda
    int threads = 1;

    void validate() const;

    // floor(row_fraction * rows) + 1
    Eigen::Index selected_row_count(Eigen::Index rows) const;
};

// Values to reconstruct plus the cells that participate in the protocol.
// For discretized input the values are the group codes and `eligible` marks
// non-zero groups; for log input it marks observed cells.
struct ExperimentInput {
    Eigen::MatrixXd values;
    BoolMask eligible;
};

ExperimentInput transposed(const ExperimentInput& input);

// One repetition's split. Training, and the obscured cells of every selected
// row, partition the eligible cells; ineligible rows encountered in the
// permutation are passed over (with a warning) in favour of later rows.
struct MaskPartition {
    int repetition = 0;  // 1-based
    std::vector<Eigen::Index> selected_rows;
    IndexSet training;
    std::vector<IndexSet> obscured_by_row;  // parallel to selected_rows
    WarningList warnings;
};

MaskPartition build_partition(const BoolMask& eligible, int repetition,
                              const ProtocolConfig& config, ExperimentSide side);

struct RmseRecord {
    int repetition = 0;
    Eigen::Index row = 0;  // matrix row index of the tested row
    double lambda = 0.0;
    double validation_rmse = 0.0;
    double test_rmse = 0.0;
};

struct CellVote {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    bool predicted_positive = false;
    bool truth_positive = false;
};

struct RepetitionOutcome {
    int repetition = 0;
    bool failed = false;
    std::string failure_reason;
    std::vector<RmseRecord> records;
    std::vector<CellVote> votes;
    WarningList warnings;
};

// Solves the grid once on the training cells, then scores each selected row
// with the penalty that minimises RMSE on the other selected rows' obscured
// cells (ties go to the smaller penalty). Solver failure aborts the
// repetition; the outcome reports the reason instead of throwing.
RepetitionOutcome run_repetition(const ExperimentInput& input, const MaskPartition& partition,
                                 const ProtocolConfig& config);

struct AggregatedPredictions {
    Eigen::MatrixXd mean_positive;      // share of positive votes, 0 if never tested
    Eigen::MatrixXi majority_positive;  // 0/1; exact vote ties resolved by a seeded coin
    Eigen::MatrixXi test_appearances;
    Eigen::MatrixXi positive_votes;
    Eigen::VectorXi negatives_seen;
    Eigen::VectorXi negative_errors;   // false positives per row
    Eigen::VectorXi positives_seen;
    Eigen::VectorXi positive_errors;   // false negatives per row
    std::vector<RmseRecord> rmse_records;
    int failed_repetitions = 0;
    int total_repetitions = 0;
};

// Pools votes across repetitions with integer counters, so the result does
// not depend on scheduling order. Throws NumericalError if every repetition
// failed.
AggregatedPredictions aggregate(const ExperimentInput& input,
                                const std::vector<RepetitionOutcome>& outcomes,
                                const ProtocolConfig& config, ExperimentSide side);

struct RowErrorRates {
    std::vector<double> false_positive_rate;  // NaN when no true negatives seen
    std::vector<double> false_negative_rate;  // NaN when no true positives seen
};

RowErrorRates row_error_rates(const AggregatedPredictions& predictions);

// Incidence surrogates: aggregated class shares with ineligible cells forced
// to zero.
Eigen::MatrixXd surrogate_mean(const AggregatedPredictions& predictions,
                               const BoolMask& eligible);
Eigen::MatrixXi surrogate_majority(const AggregatedPredictions& predictions,
                                   const BoolMask& eligible);

// Full protocol: per-repetition partitions, grid solves, selection, and
// aggregation. Repetitions run on `config.threads` workers; outputs are
// identical for any thread count.
AggregatedPredictions run_experiment(const ExperimentInput& input, const ProtocolConfig& config,
                                     ExperimentSide side, WarningList* warnings = nullptr);

// Same protocol on the transposed matrix with an independent seed domain.
AggregatedPredictions run_product_side(const ExperimentInput& input,
                                       const ProtocolConfig& config,
                                       WarningList* warnings = nullptr);

}  // namespace ecmc
