#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/svt_core.hpp"

namespace ecmc {

struct SolverConfig {
    double lambda = 0.0;
    double tolerance = 1e-9;    // relative squared-change stopping rule
    int max_iterations = 1500;
    SvdMethod svd_method = SvdMethod::automatic;
    std::optional<Eigen::MatrixXd> warm_start;
    bool record_objective = false;  // per-iteration objective, debug only

    void validate() const;
};

struct CompletionResult {
    Eigen::MatrixXd completed;
    int iterations_used = 0;
    bool converged = false;
    double final_relative_change = 0.0;
    std::vector<double> objective_trace;  // filled when record_objective is set
};

// Iterates Z <- S_lambda(P(A) + P_comp(Z)) from Z = 0 (or the warm start)
// until the relative squared Frobenius change drops below the tolerance or
// the iteration budget runs out. A zero-to-zero step counts as converged.
// Throws NumericalError naming the iteration if an iterate turns non-finite.
CompletionResult solve(const MaskedMatrix& observed, const SolverConfig& config);

// Regularized objective: half the squared error on the observed set plus
// lambda times the nuclear norm.
double objective(const MaskedMatrix& observed, const Eigen::MatrixXd& candidate, double lambda);

}  // namespace ecmc
