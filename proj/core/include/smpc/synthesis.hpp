#pragma once

#include <vector>

#include "smpc/model.hpp"

namespace smpc {

struct DareOptions {
    int max_iterations = 100000;
    /// Stop when ||P_{j+1} - P_j||_F <= tolerance * (1 + ||P_{j+1}||_F).
    double tolerance = 1e-12;
};

/**
 * @brief Stabilizing solution of the discrete algebraic Riccati equation
 *
 *   P = A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A + Q
 *
 * by fixed-point iteration from P_0 = Q. Throws SynthesisError when the
 * iteration does not converge or the fixed-point residual exceeds
 * 1e-9 * (1 + ||P||_F).
 */
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const DareOptions& options = {});

/// Frobenius norm of the DARE fixed-point residual at P.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& M);

/**
 * @brief LQR feedback for u = -K x + v.
 *
 * K is the gain in the artifact-wide convention (applied input -K x), so the
 * closed loop is Phi = A - B K. A gain written for u = K' x + v is K' = -K.
 */
struct FeedbackSynthesis {
    Matrix K;
    Matrix Phi;
    Matrix Q;
    Matrix R;
    Matrix P;
};

/// Throws SynthesisError if the closed loop is not Schur stable.
FeedbackSynthesis lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// Zero feedback (nominal MPC): K = 0 and Phi = A.
FeedbackSynthesis zero_feedback(const Matrix& A, const Matrix& B);

/// Predicted error covariances Sigma^e_0 ... Sigma^e_N, with Sigma^e_0 = 0.
struct CovarianceSchedule {
    std::vector<Matrix> sigmas;

    int horizon() const { return static_cast<int>(sigmas.size()) - 1; }
};

/// Sigma_{k+1} = Phi Sigma_k Phi^T + D Sigma_w D^T, symmetrized at every step.
CovarianceSchedule propagate_covariance(const Matrix& Phi, const Matrix& D, const Matrix& sigma_w,
                                        int horizon);

/// Predicted error means mu_0 ... mu_N with mu_0 = 0 and mu_{k+1} = Phi mu_k + D mean_w.
std::vector<Vector> propagate_error_mean(const Matrix& Phi, const Matrix& D, const Vector& mean_w,
                                         int horizon);

}  // namespace smpc
