#include "smpc/model.hpp"

#include <cmath>
#include <string>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kPivotTolerance = 1e-12;

std::string dims(const Matrix& M)
{
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

double min_symmetric_eigenvalue(const Matrix& M)
{
    if (M.size() == 0) {
        return 0.0;
    }
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

void LinearStochasticSystem::validate() const
{
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) {
        throw ConfigError("A must be square and non-empty, got " + dims(A));
    }
    if (B.rows() != n || B.cols() == 0) {
        throw ConfigError("B must have " + std::to_string(n) + " rows, got " + dims(B));
    }
    if (D.rows() != n || D.cols() == 0) {
        throw ConfigError("D must have " + std::to_string(n) + " rows, got " + dims(D));
    }
    const auto q = D.cols();
    if (sigma_w.rows() != q || sigma_w.cols() != q) {
        throw ConfigError("sigma_w must be " + std::to_string(q) + "x" + std::to_string(q) +
                          ", got " + dims(sigma_w));
    }
    if (mean_w.size() != q) {
        throw ConfigError("mean_w must have " + std::to_string(q) + " entries");
    }
    if (!A.allFinite() || !B.allFinite() || !D.allFinite() || !sigma_w.allFinite() ||
        !mean_w.allFinite()) {
        throw ConfigError("system matrices must be finite");
    }
    if ((sigma_w - sigma_w.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance) {
        throw ConfigError("sigma_w must be symmetric");
    }
    if (min_symmetric_eigenvalue(sigma_w) < -kPsdTolerance) {
        throw ConfigError("sigma_w must be positive semidefinite");
    }
}

void ConstraintSet::validate(int state_dim, int input_dim) const
{
    if (u_min.size() != input_dim || u_max.size() != input_dim) {
        throw ConfigError("input bounds must have " + std::to_string(input_dim) + " entries");
    }
    if ((u_min.array() > u_max.array()).any()) {
        throw ConfigError("u_min must not exceed u_max");
    }
    for (const auto& hs : state_halfspaces) {
        if (hs.g.size() != state_dim) {
            throw ConfigError("half-space normal must have " + std::to_string(state_dim) +
                              " entries");
        }
        if (hs.g.isZero(0.0)) {
            throw ConfigError("half-space normal must be nonzero");
        }
        if (!std::isfinite(hs.h) || !hs.g.allFinite()) {
            throw ConfigError("half-space data must be finite");
        }
    }
}

void DisturbanceModel::validate() const
{
    if (kind == DisturbanceKind::GeneralZeroMean && !(variance_w > 0.0)) {
        throw ConfigError("general zero-mean disturbance requires variance_w > 0");
    }
}

Vector step_true_plant(const LinearStochasticSystem& sys, const Vector& x, const Vector& u,
                       const Vector& w)
{
    if (x.size() != sys.A.cols() || u.size() != sys.B.cols() || w.size() != sys.D.cols()) {
        throw ConfigError("step_true_plant: dimension mismatch");
    }
    return sys.A * x + sys.B * u + sys.D * w;
}

Matrix covariance_factor(const Matrix& sigma)
{
    const auto q = sigma.rows();
    if (sigma.cols() != q) {
        throw ConfigError("covariance must be square, got " + dims(sigma));
    }
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance) {
        throw ConfigError("covariance must be symmetric");
    }
    // Cholesky-Banachiewicz with zero columns for vanishing pivots.
    Matrix L = Matrix::Zero(q, q);
    for (Eigen::Index j = 0; j < q; ++j) {
        double pivot = sigma(j, j) - L.row(j).head(j).squaredNorm();
        if (pivot < -kPsdTolerance) {
            throw ConfigError("covariance must be positive semidefinite");
        }
        if (pivot <= kPivotTolerance) {
            continue;
        }
        const double ljj = std::sqrt(pivot);
        L(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < q; ++i) {
            L(i, j) = (sigma(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / ljj;
        }
    }
    if (q > 0 && ((L * L.transpose() - sigma).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + sigma.cwiseAbs().maxCoeff()))) {
        throw ConfigError("covariance must be positive semidefinite");
    }
    return L;
}

Vector sample_disturbance_factored(const DisturbanceModel& model, const Matrix& factor,
                                   RngState& rng)
{
    const auto q = factor.rows();
    Vector w(q);
    switch (model.kind) {
    case DisturbanceKind::GaussianZeroMean:
    case DisturbanceKind::GaussianWithMean: {
        Vector n(q);
        for (Eigen::Index i = 0; i < q; ++i) {
            n(i) = rng.standard_normal();
        }
        w = factor * n;
        if (model.kind == DisturbanceKind::GaussianWithMean) {
            if (model.mean.size() != q) {
                throw ConfigError("disturbance mean has wrong dimension");
            }
            w += model.mean;
        }
        break;
    }
    case DisturbanceKind::GeneralZeroMean: {
        // Uniform on [-sqrt(3), sqrt(3)] has unit variance.
        const double half_width = std::sqrt(3.0);
        Vector n(q);
        for (Eigen::Index i = 0; i < q; ++i) {
            n(i) = half_width * (2.0 * rng.uniform() - 1.0);
        }
        w = factor * n;
        break;
    }
    }
    return w;
}

Vector sample_disturbance(const DisturbanceModel& model, const Matrix& sigma_w, RngState& rng)
{
    return sample_disturbance_factored(model, covariance_factor(sigma_w), rng);
}

std::vector<bool> check_violation(const ConstraintSet& cs, const Vector& x)
{
    std::vector<bool> flags;
    flags.reserve(cs.state_halfspaces.size());
    for (const auto& hs : cs.state_halfspaces) {
        flags.push_back(hs.g.dot(x) > hs.h);
    }
    return flags;
}

}  // namespace smpc
