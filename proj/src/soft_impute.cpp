#include "ecmc/soft_impute.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ecmc {

void SolverConfig::validate() const {
    if (lambda < 0.0) {
        throw ConfigError("solver lambda must be non-negative");
    }
    if (!(tolerance > 0.0)) {
        throw ConfigError("solver tolerance must be positive");
    }
    if (max_iterations < 1) {
        throw ConfigError("solver needs at least one iteration");
    }
}

CompletionResult solve(const MaskedMatrix& observed, const SolverConfig& config) {
    config.validate();
    if (observed.observed.empty()) {
        throw ContractViolation("solve: no observed entries");
    }
    const Eigen::MatrixXd kept = project(observed.values, observed.observed);

    Eigen::MatrixXd current;
    if (config.warm_start.has_value()) {
        if (config.warm_start->rows() != observed.values.rows() ||
            config.warm_start->cols() != observed.values.cols()) {
            throw ContractViolation("solve: warm start shape mismatch");
        }
        current = *config.warm_start;
    } else {
        current = Eigen::MatrixXd::Zero(observed.values.rows(), observed.values.cols());
    }

    CompletionResult result;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        const Eigen::MatrixXd filled = kept + project_complement(current, observed.observed);
        Eigen::MatrixXd next = soft_threshold_svd(filled, config.lambda, config.svd_method);
        if (!next.allFinite()) {
            throw NumericalError("solve: non-finite iterate at iteration " +
                                 std::to_string(iteration));
        }
        const double change = (next - current).squaredNorm();
        const double base = current.squaredNorm();
        double relative;
        if (base > 0.0) {
            relative = change / base;
        } else {
            relative = change == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        current = std::move(next);
        result.iterations_used = iteration;
        result.final_relative_change = relative;
        if (config.record_objective) {
            result.objective_trace.push_back(objective(observed, current, config.lambda));
        }
        if (relative < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.completed = std::move(current);
    return result;
}

double objective(const MaskedMatrix& observed, const Eigen::MatrixXd& candidate, double lambda) {
    if (candidate.rows() != observed.values.rows() ||
        candidate.cols() != observed.values.cols()) {
        throw ContractViolation("objective: candidate shape mismatch");
    }
    double squared_error = 0.0;
    for (const auto& [r, c] : observed.observed) {
        const double gap = observed.values(r, c) - candidate(r, c);
        squared_error += gap * gap;
    }
    return 0.5 * squared_error + lambda * nuclear_norm(candidate);
}

}  // namespace ecmc
