#include "ecmc/genepy.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace ecmc {

namespace {

// First strict maximum of |v| decides the orientation.
Eigen::VectorXd oriented(const Eigen::VectorXd& vector) {
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < vector.size(); ++i) {
        if (std::abs(vector(i)) > std::abs(vector(lead))) {
            lead = i;
        }
    }
    return vector(lead) < 0.0 ? Eigen::VectorXd(-vector) : vector;
}

}  // namespace

IncidenceMatrix incidence_from_rca(const RcaMatrix& rca) {
    IncidenceMatrix incidence;
    incidence.row_labels = rca.countries;
    incidence.col_labels = rca.products;
    incidence.entries = Eigen::MatrixXi::Zero(rca.values.rows(), rca.values.cols());
    for (Eigen::Index r = 0; r < rca.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < rca.values.cols(); ++c) {
            if (!rca.missing(r, c) && rca.values(r, c) >= 1.0) {
                incidence.entries(r, c) = 1;
            }
        }
    }
    return incidence;
}

IncidenceMatrix incidence_transposed(const IncidenceMatrix& incidence) {
    return {incidence.col_labels, incidence.row_labels, incidence.entries.transpose()};
}

PrunedIncidence drop_zero_degree(const IncidenceMatrix& incidence, WarningList* warnings) {
    const Eigen::VectorXi row_degrees = incidence.entries.rowwise().sum();
    const Eigen::VectorXi col_degrees = incidence.entries.colwise().sum();

    PrunedIncidence pruned;
    for (Eigen::Index r = 0; r < row_degrees.size(); ++r) {
        if (row_degrees(r) > 0) {
            pruned.kept_row_indices.push_back(r);
        } else {
            pruned.dropped_rows.push_back(incidence.row_labels[static_cast<std::size_t>(r)]);
            warn(warnings, "row '" + incidence.row_labels[static_cast<std::size_t>(r)] +
                               "' has no specialisations, dropped");
        }
    }
    for (Eigen::Index c = 0; c < col_degrees.size(); ++c) {
        if (col_degrees(c) > 0) {
            pruned.kept_col_indices.push_back(c);
        } else {
            pruned.dropped_cols.push_back(incidence.col_labels[static_cast<std::size_t>(c)]);
            warn(warnings, "column '" + incidence.col_labels[static_cast<std::size_t>(c)] +
                               "' appears in no specialisation, dropped");
        }
    }

    const auto kept_rows = static_cast<Eigen::Index>(pruned.kept_row_indices.size());
    const auto kept_cols = static_cast<Eigen::Index>(pruned.kept_col_indices.size());
    pruned.kept.entries = Eigen::MatrixXi::Zero(kept_rows, kept_cols);
    for (Eigen::Index r = 0; r < kept_rows; ++r) {
        pruned.kept.row_labels.push_back(
            incidence.row_labels[static_cast<std::size_t>(pruned.kept_row_indices[r])]);
        for (Eigen::Index c = 0; c < kept_cols; ++c) {
            pruned.kept.entries(r, c) =
                incidence.entries(pruned.kept_row_indices[r], pruned.kept_col_indices[c]);
        }
    }
    for (Eigen::Index c = 0; c < kept_cols; ++c) {
        pruned.kept.col_labels.push_back(
            incidence.col_labels[static_cast<std::size_t>(pruned.kept_col_indices[c])]);
    }
    return pruned;
}

Eigen::MatrixXd weighted_incidence(const Eigen::MatrixXi& entries) {
    const Eigen::VectorXd degrees = entries.cast<double>().rowwise().sum();
    if ((degrees.array() <= 0.0).any()) {
        throw ContractViolation("weighted_incidence: zero-degree row");
    }
    // Corrected column weight: each country contributes 1/k_c of itself.
    Eigen::VectorXd corrected = Eigen::VectorXd::Zero(entries.cols());
    for (Eigen::Index c = 0; c < entries.rows(); ++c) {
        for (Eigen::Index p = 0; p < entries.cols(); ++p) {
            if (entries(c, p) != 0) {
                corrected(p) += 1.0 / degrees(c);
            }
        }
    }
    if ((corrected.array() <= 0.0).any()) {
        throw ContractViolation("weighted_incidence: zero-degree column");
    }
    Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(entries.rows(), entries.cols());
    for (Eigen::Index c = 0; c < entries.rows(); ++c) {
        for (Eigen::Index p = 0; p < entries.cols(); ++p) {
            if (entries(c, p) != 0) {
                weighted(c, p) = 1.0 / (degrees(c) * corrected(p));
            }
        }
    }
    return weighted;
}

Eigen::MatrixXd proximity(const Eigen::MatrixXd& weighted) {
    Eigen::MatrixXd product = weighted * weighted.transpose();
    product.diagonal().setZero();
    return product;
}

GenepyScores genepy_scores(const Eigen::MatrixXd& proximity_matrix, WarningList* warnings) {
    if (proximity_matrix.rows() != proximity_matrix.cols()) {
        throw ContractViolation("genepy_scores: matrix is not square");
    }
    if (proximity_matrix.rows() < 3) {
        throw ContractViolation("genepy_scores: need at least three entities");
    }
    if (!proximity_matrix.isApprox(proximity_matrix.transpose(), 1e-12)) {
        throw ContractViolation("genepy_scores: matrix is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(proximity_matrix);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("genepy_scores: eigendecomposition failed");
    }
    const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
    const Eigen::Index last = values.size() - 1;

    GenepyScores result;
    result.lambda1 = values(last);
    result.lambda2 = values(last - 1);
    result.vector1 = oriented(solver.eigenvectors().col(last));
    result.vector2 = oriented(solver.eigenvectors().col(last - 1));

    const double scale = std::max(1.0, std::abs(result.lambda1));
    if (result.lambda1 - result.lambda2 <= 1e-12 * scale ||
        (values.size() > 2 && result.lambda2 - values(last - 2) <= 1e-12 * scale)) {
        warn(warnings, "nearly degenerate top eigenvalues; directions are unstable");
    }
    if (result.lambda2 < 0.0) {
        warn(warnings, "second eigenvalue is negative");
    }

    result.scores.reserve(static_cast<std::size_t>(proximity_matrix.rows()));
    for (Eigen::Index c = 0; c < proximity_matrix.rows(); ++c) {
        const double x1 = result.vector1(c);
        const double x2 = result.vector2(c);
        const double weighted_square =
            result.lambda1 * x1 * x1 + result.lambda2 * x2 * x2;
        const double spread = result.lambda1 * result.lambda1 * x1 * x1 +
                              result.lambda2 * result.lambda2 * x2 * x2;
        result.scores.push_back(weighted_square * weighted_square + 2.0 * spread);
    }
    return result;
}

GenepyResult genepy_from_incidence(const IncidenceMatrix& incidence, WarningList* warnings) {
    const PrunedIncidence pruned = drop_zero_degree(incidence, warnings);
    if (pruned.kept.entries.rows() < 3) {
        throw ContractViolation("genepy: fewer than three entities after pruning");
    }
    const Eigen::MatrixXd weighted = weighted_incidence(pruned.kept.entries);

    GenepyResult result;
    result.entities = pruned.kept.row_labels;
    result.dropped_entities = pruned.dropped_rows;
    result.dropped_features = pruned.dropped_cols;
    result.degrees = pruned.kept.entries.cast<double>().rowwise().sum();
    result.scores = genepy_scores(proximity(weighted), warnings);
    return result;
}

VariantDirections variant_directions(const Eigen::MatrixXi& entries, WarningList* warnings) {
    const Eigen::MatrixXd weighted = weighted_incidence(entries);

    VariantDirections variants;
    variants.fitness_proximity = weighted * weighted.transpose();

    const Eigen::VectorXd row_degrees = entries.cast<double>().rowwise().sum();
    const Eigen::VectorXd col_degrees = entries.cast<double>().colwise().sum();
    if ((col_degrees.array() <= 0.0).any()) {
        throw ContractViolation("variant_directions: zero-degree column");
    }
    Eigen::MatrixXd eci_weighted = Eigen::MatrixXd::Zero(entries.rows(), entries.cols());
    for (Eigen::Index c = 0; c < entries.rows(); ++c) {
        for (Eigen::Index p = 0; p < entries.cols(); ++p) {
            if (entries(c, p) != 0) {
                eci_weighted(c, p) = 1.0 / (row_degrees(c) * col_degrees(p));
            }
        }
    }
    variants.eci_proximity = eci_weighted * eci_weighted.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fitness_solver(variants.fitness_proximity);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eci_solver(variants.eci_proximity);
    if (fitness_solver.info() != Eigen::Success || eci_solver.info() != Eigen::Success) {
        throw NumericalError("variant_directions: eigendecomposition failed");
    }
    const Eigen::Index last = entries.rows() - 1;
    variants.fitness_direction = oriented(fitness_solver.eigenvectors().col(last));
    variants.eci_direction = oriented(eci_solver.eigenvectors().col(last - 1));

    const Eigen::VectorXd& eci_values = eci_solver.eigenvalues();
    const double scale = std::max(1.0, std::abs(eci_values(last)));
    if (eci_values(last) - eci_values(last - 1) <= 1e-12 * scale ||
        (entries.rows() > 2 &&
         eci_values(last - 1) - eci_values(last - 2) <= 1e-12 * scale)) {
        warn(warnings, "nearly degenerate spectrum; second direction is unstable");
    }
    return variants;
}

}  // namespace ecmc
