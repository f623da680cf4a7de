#include "smpc/synthesis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

constexpr double kStabilityMargin = 1e-9;

void check_weights(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R)
{
    const auto n = A.rows();
    const auto m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
        R.cols() != m) {
        throw ConfigError("Riccati data has inconsistent dimensions");
    }
    if (min_symmetric_eigenvalue(Q) < -1e-10) {
        throw ConfigError("Q must be positive semidefinite");
    }
    if (min_symmetric_eigenvalue(R) <= 0.0) {
        throw ConfigError("R must be positive definite");
    }
}

Matrix symmetrized(const Matrix& M)
{
    return 0.5 * (M + M.transpose());
}

Matrix riccati_map(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                   const Matrix& P)
{
    const Matrix PB = P * B;
    const Matrix S = R + B.transpose() * PB;
    const Matrix inner = P - PB * S.ldlt().solve(PB.transpose());
    return symmetrized(Q + A.transpose() * inner * A);
}

}  // namespace

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P)
{
    return (riccati_map(A, B, Q, R, P) - P).norm();
}

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const DareOptions& options)
{
    check_weights(A, B, Q, R);
    Matrix P = symmetrized(Q);
    double step = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
        Matrix next = riccati_map(A, B, Q, R, P);
        step = (next - P).norm();
        P = std::move(next);
        const double scale = P.norm();
        if (!std::isfinite(scale) || !std::isfinite(step)) {
            break;
        }
        if (step <= options.tolerance * (1.0 + scale)) {
            const double residual = dare_residual(A, B, Q, R, P);
            if (residual > 1e-9 * (1.0 + scale)) {
                throw SynthesisError("DARE iteration stalled with residual " +
                                         std::to_string(residual),
                                     residual);
            }
            return P;
        }
    }
    const double residual = std::isfinite(P.norm()) ? dare_residual(A, B, Q, R, P)
                                          : std::numeric_limits<double>::infinity();
    throw SynthesisError("DARE iteration did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         residual);
}

double spectral_radius(const Matrix& M)
{
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Matrix> eig(M, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

FeedbackSynthesis lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R)
{
    FeedbackSynthesis out;
    out.P = solve_dare(A, B, Q, R);
    const Matrix S = R + B.transpose() * out.P * B;
    out.K = S.ldlt().solve(B.transpose() * out.P * A);
    out.Phi = A - B * out.K;
    out.Q = Q;
    out.R = R;
    const double rho = spectral_radius(out.Phi);
    if (rho >= 1.0 - kStabilityMargin) {
        throw SynthesisError("LQR closed loop is not stable (spectral radius " +
                                 std::to_string(rho) + ")",
                             rho);
    }
    return out;
}

FeedbackSynthesis zero_feedback(const Matrix& A, const Matrix& B)
{
    FeedbackSynthesis out;
    out.K = Matrix::Zero(B.cols(), A.rows());
    out.Phi = A;
    out.Q = Matrix::Zero(A.rows(), A.rows());
    out.R = Matrix::Identity(B.cols(), B.cols());
    out.P = Matrix::Zero(A.rows(), A.rows());
    return out;
}

CovarianceSchedule propagate_covariance(const Matrix& Phi, const Matrix& D, const Matrix& sigma_w,
                                        int horizon)
{
    if (horizon < 1) {
        throw ConfigError("covariance horizon must be at least 1");
    }
    const auto n = Phi.rows();
    if (Phi.cols() != n || D.rows() != n || sigma_w.rows() != D.cols() ||
        sigma_w.cols() != D.cols()) {
        throw ConfigError("propagate_covariance: dimension mismatch");
    }
    const Matrix injected = symmetrized(D * sigma_w * D.transpose());
    CovarianceSchedule out;
    out.sigmas.reserve(static_cast<std::size_t>(horizon) + 1);
    out.sigmas.push_back(Matrix::Zero(n, n));
    for (int k = 0; k < horizon; ++k) {
        out.sigmas.push_back(symmetrized(Phi * out.sigmas.back() * Phi.transpose() + injected));
    }
    return out;
}

std::vector<Vector> propagate_error_mean(const Matrix& Phi, const Matrix& D, const Vector& mean_w,
                                         int horizon)
{
    if (horizon < 1) {
        throw ConfigError("mean horizon must be at least 1");
    }
    if (D.cols() != mean_w.size() || D.rows() != Phi.rows()) {
        throw ConfigError("propagate_error_mean: dimension mismatch");
    }
    const Vector injected = D * mean_w;
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(horizon) + 1);
    out.push_back(Vector::Zero(Phi.rows()));
    for (int k = 0; k < horizon; ++k) {
        out.push_back(Phi * out.back() + injected);
    }
    return out;
}

}  // namespace smpc
