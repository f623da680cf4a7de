#pragma once

#include <vector>

#include "smpc/model.hpp"
#include "smpc/synthesis.hpp"

namespace smpc {

/// Error function (odd, range (-1, 1)).
double erf(double x);

/// Inverse error function on (-1, 1); throws DomainError for |y| >= 1 or NaN.
double erf_inv(double y);

/// Normal CDF 1/2 + 1/2 erf((x - mu) / (sigma sqrt 2)); throws DomainError if sigma <= 0.
double normal_cdf(double x, double mu, double sigma);

/// Pr(-x <= X <= x) for X ~ N(0, sigma^2), as a difference of CDF values.
double two_sided_probability(double x, double sigma);

/// Chebyshev bound on Pr(|X - mu| >= c), clamped to 1. mu does not enter the bound.
double chebyshev_bound(double c, double sigma2, double mu = 0.0);

/// Cantelli (one-sided) bound on Pr(X - mu >= c): sigma2 / (sigma2 + c^2).
double cantelli_bound(double c, double sigma2);

/**
 * @brief Satisfaction probability p of a chance constraint Pr(g^T x <= h) >= p.
 *
 * Accepts 0 <= p < 1. The complementary convention p_tilde = 1 - p (larger
 * means more allowed risk) is converted on construction.
 */
class RiskParameter {
public:
    static RiskParameter from_p(double p);
    static RiskParameter from_p_tilde(double p_tilde);

    double p() const noexcept { return p_; }
    double p_tilde() const noexcept { return 1.0 - p_; }

    friend bool operator==(const RiskParameter&, const RiskParameter&) = default;

private:
    explicit RiskParameter(double p) : p_(p) {}
    double p_;
};

enum class TighteningLaw { GaussianExact, CantelliRobust };

/// Unit-variance Gaussian tightening sqrt(2) erf_inv(2p - 1); requires 0.5 <= p < 1.
double gaussian_factor(double p);

/// Unit-variance Cantelli tightening sqrt(p / (1 - p)); requires 0 <= p < 1.
double cantelli_factor(double p);

/// sqrt(2 g^T Sigma g) erf_inv(2p - 1). Refuses p < 0.5 (that would loosen the constraint).
double gaussian_gamma(const Vector& g, const Matrix& sigma_e, RiskParameter risk);

/// sigma sqrt(p / (1 - p)) for a scalar standard deviation sigma >= 0.
double cantelli_gamma(double sigma, RiskParameter risk);

/// E[g^T e] = g^T mean_e, the extra tightening for a non-zero error mean.
double mean_shift_adjustment(const Vector& g, const Vector& mean_e);

/// Tightening margins gamma_1 ... gamma_N for one half-space.
struct TighteningSchedule {
    std::vector<double> gammas;
    TighteningLaw law = TighteningLaw::GaussianExact;
    RiskParameter risk = RiskParameter::from_p(0.5);
};

/**
 * Margins from Sigma^e_1 ... Sigma^e_N (Sigma^e_0 is excluded). The Cantelli
 * law applies to the scalar projection g^T e with variance g^T Sigma^e_k g.
 */
TighteningSchedule build_tightening_schedule(const Vector& g, const CovarianceSchedule& cov,
                                             RiskParameter risk, TighteningLaw law);

}  // namespace smpc
