#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ecmc/common.hpp"

namespace ecmc {

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;
using IndexSet = std::vector<IndexPair>;

// A matrix together with the set of positions that carry data.
struct MaskedMatrix {
    Eigen::MatrixXd values;
    IndexSet observed;
};

// Truncated factors U diag(s) V^T covering exactly the singular values above
// a floor, ordered weakly decreasing.
struct SvdFactors {
    Eigen::MatrixXd left_vectors;     // rows x rank
    Eigen::VectorXd singular_values;  // rank
    Eigen::MatrixXd right_vectors;    // cols x rank

    Eigen::Index rank() const { return singular_values.size(); }
};

enum class SvdMethod {
    automatic,  // subspace iteration for large inputs, full otherwise
    full,       // always a full decomposition
    partial,    // always subspace iteration (still falls back when the
                // needed rank grows past half the smaller dimension)
};

// Copies the observed entries onto a zero matrix.
Eigen::MatrixXd project(const Eigen::MatrixXd& values, const IndexSet& observed);

// Zeroes the observed entries, keeping the rest.
Eigen::MatrixXd project_complement(const Eigen::MatrixXd& values, const IndexSet& observed);

// All singular triplets with value strictly above `floor`. A negative floor
// returns the complete decomposition. Throws ContractViolation on non-finite
// input, NumericalError if the iterative path cannot be completed and the
// full decomposition also fails.
SvdFactors svd_exceeding(const Eigen::MatrixXd& matrix, double floor,
                         SvdMethod method = SvdMethod::automatic);

// Soft singular value thresholding: shrinks every singular value by lambda
// and drops the ones that do not stay positive.
Eigen::MatrixXd soft_threshold_svd(const Eigen::MatrixXd& matrix, double lambda,
                                   SvdMethod method = SvdMethod::automatic);

// Sum of all singular values.
double nuclear_norm(const Eigen::MatrixXd& matrix);

}  // namespace ecmc
