#include "ecmc/svt_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "ecmc/rng.hpp"

namespace ecmc {

namespace {

constexpr double kSweepTolerance = 1e-10;
constexpr int kMaxSweeps = 300;
constexpr int kSafetySweeps = 2;
constexpr Eigen::Index kInitialBlock = 14;
constexpr std::uint64_t kSubspaceSeedTag = 0x53565431;  // stream domain tag

void require_finite(const Eigen::MatrixXd& matrix, const char* who) {
    if (!matrix.allFinite()) {
        throw ContractViolation(std::string(who) + ": input has non-finite entries");
    }
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& block) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
    return qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), block.cols());
}

SvdFactors full_svd_exceeding(const Eigen::MatrixXd& matrix, double floor) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > floor) {
        ++rank;
    }
    SvdFactors factors;
    factors.left_vectors = svd.matrixU().leftCols(rank);
    factors.singular_values = sigma.head(rank);
    factors.right_vectors = svd.matrixV().leftCols(rank);
    return factors;
}

struct SubspaceSweepResult {
    bool converged = false;
    Eigen::MatrixXd basis;        // rows x k, orthonormal columns
    Eigen::VectorXd estimates;    // k Ritz values, descending
};

// Block power iteration on Y Y^T restricted to k directions. Requires
// rows(Y) <= cols(Y) so the iterated basis lives on the smaller side.
SubspaceSweepResult iterate_subspace(const Eigen::MatrixXd& matrix, Eigen::Index k) {
    const Eigen::Index rows = matrix.rows();
    const Eigen::Index cols = matrix.cols();

    RandomStream stream({kSubspaceSeedTag, static_cast<std::uint64_t>(rows),
                         static_cast<std::uint64_t>(cols), static_cast<std::uint64_t>(k)});
    Eigen::MatrixXd start(cols, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index r = 0; r < cols; ++r) {
            start(r, c) = stream.gaussian();
        }
    }

    SubspaceSweepResult result;
    result.basis = orthonormalize(matrix * start);
    Eigen::VectorXd previous = Eigen::VectorXd::Constant(k, -1.0);
    int stable_sweeps = 0;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const Eigen::MatrixXd projected = matrix.transpose() * result.basis;  // cols x k
        const Eigen::MatrixXd gram = projected.transpose() * projected;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
        if (eigen.info() != Eigen::Success) {
            return result;  // not converged, caller falls back
        }
        Eigen::VectorXd estimates(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            estimates(i) = std::sqrt(std::max(0.0, eigen.eigenvalues()(k - 1 - i)));
        }
        const double scale = std::max(1.0, estimates(0));
        const double drift = (estimates - previous).cwiseAbs().maxCoeff();
        previous = estimates;
        result.estimates = estimates;
        if (drift <= kSweepTolerance * scale) {
            ++stable_sweeps;
            if (stable_sweeps > kSafetySweeps) {
                result.converged = true;
                return result;
            }
        } else {
            stable_sweeps = 0;
        }
        result.basis = orthonormalize(matrix * projected);
    }
    return result;
}

SvdFactors partial_svd_exceeding(const Eigen::MatrixXd& matrix, double floor) {
    if (matrix.rows() > matrix.cols()) {
        SvdFactors swapped = partial_svd_exceeding(matrix.transpose(), floor);
        std::swap(swapped.left_vectors, swapped.right_vectors);
        return swapped;
    }

    const Eigen::Index min_dim = matrix.rows();
    const Eigen::Index cutoff = min_dim / 2;
    if (cutoff < 1 || floor < 0.0) {
        return full_svd_exceeding(matrix, floor);
    }

    for (Eigen::Index k = std::min(kInitialBlock, min_dim);; k = std::min(2 * k, min_dim)) {
        const SubspaceSweepResult sweep = iterate_subspace(matrix, k);
        if (!sweep.converged) {
            return full_svd_exceeding(matrix, floor);
        }
        // The Ritz values under-estimate true singular values, so growth only
        // stops once the smallest estimate sits clearly below the floor.
        const double guard = 1e-9 * std::max(1.0, sweep.estimates(0));
        const bool tail_captured = sweep.estimates(k - 1) < floor - guard;
        if (!tail_captured && k < min_dim) {
            continue;
        }

        const Eigen::MatrixXd small = sweep.basis.transpose() * matrix;  // k x cols
        Eigen::BDCSVD<Eigen::MatrixXd> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sigma = svd.singularValues();
        Eigen::Index rank = 0;
        while (rank < sigma.size() && sigma(rank) > floor) {
            ++rank;
        }
        if (rank > cutoff) {
            return full_svd_exceeding(matrix, floor);
        }
        SvdFactors factors;
        factors.left_vectors = sweep.basis * svd.matrixU().leftCols(rank);
        factors.singular_values = sigma.head(rank);
        factors.right_vectors = svd.matrixV().leftCols(rank);
        return factors;
    }
}

}  // namespace

Eigen::MatrixXd project(const Eigen::MatrixXd& values, const IndexSet& observed) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(values.rows(), values.cols());
    for (const auto& [r, c] : observed) {
        if (r < 0 || r >= values.rows() || c < 0 || c >= values.cols()) {
            throw ContractViolation("observed index outside the matrix");
        }
        result(r, c) = values(r, c);
    }
    return result;
}

Eigen::MatrixXd project_complement(const Eigen::MatrixXd& values, const IndexSet& observed) {
    Eigen::MatrixXd result = values;
    for (const auto& [r, c] : observed) {
        if (r < 0 || r >= values.rows() || c < 0 || c >= values.cols()) {
            throw ContractViolation("observed index outside the matrix");
        }
        result(r, c) = 0.0;
    }
    return result;
}

SvdFactors svd_exceeding(const Eigen::MatrixXd& matrix, double floor, SvdMethod method) {
    require_finite(matrix, "svd_exceeding");
    if (matrix.rows() == 0 || matrix.cols() == 0) {
        throw ContractViolation("svd_exceeding: empty matrix");
    }
    switch (method) {
        case SvdMethod::full:
            return full_svd_exceeding(matrix, floor);
        case SvdMethod::partial:
            return partial_svd_exceeding(matrix, floor);
        case SvdMethod::automatic:
        default: {
            const Eigen::Index min_dim = std::min(matrix.rows(), matrix.cols());
            if (min_dim >= 64 && floor > 0.0) {
                return partial_svd_exceeding(matrix, floor);
            }
            return full_svd_exceeding(matrix, floor);
        }
    }
}

Eigen::MatrixXd soft_threshold_svd(const Eigen::MatrixXd& matrix, double lambda,
                                   SvdMethod method) {
    if (lambda < 0.0) {
        throw ContractViolation("soft_threshold_svd: negative threshold");
    }
    const SvdFactors factors = svd_exceeding(matrix, lambda, method);
    if (factors.rank() == 0) {
        return Eigen::MatrixXd::Zero(matrix.rows(), matrix.cols());
    }
    const Eigen::VectorXd shrunk = factors.singular_values.array() - lambda;
    return factors.left_vectors * shrunk.asDiagonal() * factors.right_vectors.transpose();
}

double nuclear_norm(const Eigen::MatrixXd& matrix) {
    require_finite(matrix, "nuclear_norm");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
    return svd.singularValues().sum();
}

}  // namespace ecmc
