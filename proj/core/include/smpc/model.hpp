#pragma once

#include <Eigen/Dense>
#include <vector>

#include "smpc/rng.hpp"

namespace smpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// x+ = A x + B u + D w with w of mean mean_w and covariance sigma_w.
struct LinearStochasticSystem {
    Matrix A;
    Matrix B;
    Matrix D;
    Matrix sigma_w;
    Vector mean_w;

    int state_dim() const { return static_cast<int>(A.rows()); }
    int input_dim() const { return static_cast<int>(B.cols()); }
    int disturbance_dim() const { return static_cast<int>(D.cols()); }

    /// Throws ConfigError on inconsistent dimensions or a non-PSD covariance.
    void validate() const;
};

/// Single half-space g^T x <= h.
struct HalfSpace {
    Vector g;
    double h = 0.0;
};

struct ConstraintSet {
    Vector u_min;
    Vector u_max;
    std::vector<HalfSpace> state_halfspaces;

    void validate(int state_dim, int input_dim) const;
};

enum class DisturbanceKind { GaussianZeroMean, GaussianWithMean, GeneralZeroMean };

/**
 * @brief Distribution family of the additive disturbance.
 *
 * GeneralZeroMean shapes unit-variance uniform components with the covariance
 * factor, so draws have covariance sigma_w. variance_w is the scalar variance of
 * the univariate case; configs require sigma_w = variance_w * I for this kind.
 */
struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::GaussianZeroMean;
    Vector mean;
    double variance_w = 0.0;

    void validate() const;
};

/// Returns A x + B u + D w.
Vector step_true_plant(const LinearStochasticSystem& sys, const Vector& x, const Vector& u,
                       const Vector& w);

/**
 * @brief Lower-triangular L with L L^T = sigma.
 *
 * Works for singular PSD matrices: pivots below 1e-12 give zero columns.
 * Throws ConfigError if sigma is not symmetric PSD.
 */
Matrix covariance_factor(const Matrix& sigma);

/// One disturbance draw; advances rng in place.
Vector sample_disturbance(const DisturbanceModel& model, const Matrix& sigma_w, RngState& rng);

/// Same draw with a precomputed factor from covariance_factor().
Vector sample_disturbance_factored(const DisturbanceModel& model, const Matrix& factor,
                                   RngState& rng);

/// One flag per half-space; true iff g^T x > h.
std::vector<bool> check_violation(const ConstraintSet& cs, const Vector& x);

/// Smallest eigenvalue of the symmetric part of M.
double min_symmetric_eigenvalue(const Matrix& M);

}  // namespace smpc
