#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/data_ingest.hpp"

namespace ecmc {

// Binary specialisation matrix: rows are countries unless transposed.
struct IncidenceMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXi entries;  // 0/1
};

// 1 where the ratio is observed and at least 1, otherwise 0 (missing counts
// as not specialised).
IncidenceMatrix incidence_from_rca(const RcaMatrix& rca);

IncidenceMatrix incidence_transposed(const IncidenceMatrix& incidence);

// Removes rows and columns whose degree is zero; they carry no network
// information and would break the degree normalisation. Zero rows hold no
// ones, so a single simultaneous pass is exact.
struct PrunedIncidence {
    IncidenceMatrix kept;
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_cols;
    std::vector<Eigen::Index> kept_row_indices;
    std::vector<Eigen::Index> kept_col_indices;
};

PrunedIncidence drop_zero_degree(const IncidenceMatrix& incidence,
                                 WarningList* warnings = nullptr);

// W = M / (k_c * k'_p) where k_c is the row degree and k'_p the
// degree-corrected column weight sum_c M / k_c. Throws ContractViolation if
// any degree is zero.
Eigen::MatrixXd weighted_incidence(const Eigen::MatrixXi& entries);

// N = W W^T with the diagonal zeroed.
Eigen::MatrixXd proximity(const Eigen::MatrixXd& weighted);

// Top-2 spectral summary of the proximity matrix. Eigenvectors are oriented
// so their largest-magnitude entry is positive. The score combines both
// contributions: (sum_i l_i x_i^2)^2 + 2 sum_i l_i^2 x_i^2.
struct GenepyScores {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Eigen::VectorXd vector1;
    Eigen::VectorXd vector2;
    std::vector<double> scores;
};

GenepyScores genepy_scores(const Eigen::MatrixXd& proximity_matrix,
                           WarningList* warnings = nullptr);

// Prune, weight, and score in one step; labels and degrees for the kept rows
// come along for reporting.
struct GenepyResult {
    std::vector<std::string> entities;
    std::vector<std::string> dropped_entities;
    std::vector<std::string> dropped_features;
    Eigen::VectorXd degrees;  // diversification of the kept rows
    GenepyScores scores;
};

GenepyResult genepy_from_incidence(const IncidenceMatrix& incidence,
                                   WarningList* warnings = nullptr);

// Related constructions on the same incidence: the fitness-style proximity
// keeps the diagonal of W W^T and uses the leading eigenvector; the ECI-style
// proximity normalises by raw degrees on both sides and uses the second
// eigenvector.
struct VariantDirections {
    Eigen::MatrixXd fitness_proximity;
    Eigen::MatrixXd eci_proximity;
    Eigen::VectorXd fitness_direction;
    Eigen::VectorXd eci_direction;
};

VariantDirections variant_directions(const Eigen::MatrixXi& entries,
                                     WarningList* warnings = nullptr);

}  // namespace ecmc
