#include "smpc/chance.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

// Initial estimate of erf^-1 (Giles, "Approximating the erfinv function",
// single-precision branch); relative error around 1e-7.
double erf_inv_estimate(double y)
{
    double w = -std::log((1.0 - y) * (1.0 + y));
    double p = 0.0;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    return p * y;
}

double projected_variance(const Vector& g, const Matrix& sigma_e)
{
    if (g.size() != sigma_e.rows() || sigma_e.cols() != sigma_e.rows()) {
        throw ConfigError("tightening: g and covariance dimensions differ");
    }
    const double var = g.dot(sigma_e * g);
    if (var < -1e-12 * (1.0 + sigma_e.norm() * g.squaredNorm())) {
        throw DomainError("tightening: covariance is not positive semidefinite");
    }
    return var > 0.0 ? var : 0.0;
}

}  // namespace

double erf(double x)
{
    return std::erf(x);
}

double erf_inv(double y)
{
    if (!(y > -1.0 && y < 1.0)) {
        throw DomainError("erf_inv: argument must lie in (-1, 1), got " + std::to_string(y));
    }
    if (y == 0.0) {
        return y;
    }
    constexpr double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;
    double x = erf_inv_estimate(y);
    // Halley refinement: f = erf(x) - y, f' = 2/sqrt(pi) e^{-x^2}, f'' = -2 x f'.
    for (int i = 0; i < 3; ++i) {
        const double f = std::erf(x) - y;
        const double fp = two_over_sqrt_pi * std::exp(-x * x);
        if (f == 0.0 || fp == 0.0) {
            break;
        }
        x -= f / (fp * (1.0 + x * f));
    }
    return x;
}

double normal_cdf(double x, double mu, double sigma)
{
    if (!(sigma > 0.0)) {
        throw DomainError("normal_cdf: sigma must be positive");
    }
    return 0.5 + 0.5 * erf((x - mu) / (sigma * std::numbers::sqrt2));
}

double two_sided_probability(double x, double sigma)
{
    return normal_cdf(x, 0.0, sigma) - normal_cdf(-x, 0.0, sigma);
}

double chebyshev_bound(double c, double sigma2, double /*mu*/)
{
    if (!(c > 0.0)) {
        throw DomainError("chebyshev_bound: c must be positive");
    }
    if (sigma2 < 0.0) {
        throw DomainError("chebyshev_bound: variance must be non-negative");
    }
    const double bound = sigma2 / (c * c);
    return bound < 1.0 ? bound : 1.0;
}

double cantelli_bound(double c, double sigma2)
{
    if (!(c > 0.0)) {
        throw DomainError("cantelli_bound: c must be positive");
    }
    if (sigma2 < 0.0) {
        throw DomainError("cantelli_bound: variance must be non-negative");
    }
    return sigma2 / (sigma2 + c * c);
}

RiskParameter RiskParameter::from_p(double p)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("risk parameter p must lie in [0, 1), got " + std::to_string(p));
    }
    return RiskParameter(p);
}

RiskParameter RiskParameter::from_p_tilde(double p_tilde)
{
    if (!(p_tilde > 0.0 && p_tilde <= 1.0)) {
        throw DomainError("risk parameter p_tilde must lie in (0, 1], got " +
                          std::to_string(p_tilde));
    }
    return from_p(1.0 - p_tilde);
}

double gaussian_factor(double p)
{
    if (!(p >= 0.5 && p < 1.0)) {
        throw DomainError("Gaussian tightening requires 0.5 <= p < 1, got " + std::to_string(p));
    }
    return std::numbers::sqrt2 * erf_inv(2.0 * p - 1.0);
}

double cantelli_factor(double p)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("Cantelli tightening requires 0 <= p < 1, got " + std::to_string(p));
    }
    return std::sqrt(p / (1.0 - p));
}

double gaussian_gamma(const Vector& g, const Matrix& sigma_e, RiskParameter risk)
{
    const double p = risk.p();
    if (p < 0.5) {
        throw DomainError("Gaussian tightening requires p >= 0.5 (p < 0.5 loosens the constraint)");
    }
    const double var = projected_variance(g, sigma_e);
    return std::sqrt(2.0 * var) * erf_inv(2.0 * p - 1.0);
}

double cantelli_gamma(double sigma, RiskParameter risk)
{
    if (!(sigma >= 0.0)) {
        throw DomainError("cantelli_gamma: sigma must be non-negative");
    }
    return sigma * cantelli_factor(risk.p());
}

double mean_shift_adjustment(const Vector& g, const Vector& mean_e)
{
    if (g.size() != mean_e.size()) {
        throw ConfigError("mean_shift_adjustment: dimension mismatch");
    }
    return g.dot(mean_e);
}

TighteningSchedule build_tightening_schedule(const Vector& g, const CovarianceSchedule& cov,
                                             RiskParameter risk, TighteningLaw law)
{
    TighteningSchedule out;
    out.law = law;
    out.risk = risk;
    const int horizon = cov.horizon();
    out.gammas.reserve(static_cast<std::size_t>(horizon > 0 ? horizon : 0));
    for (int k = 1; k <= horizon; ++k) {
        const Matrix& sigma = cov.sigmas[static_cast<std::size_t>(k)];
        switch (law) {
        case TighteningLaw::GaussianExact:
            out.gammas.push_back(gaussian_gamma(g, sigma, risk));
            break;
        case TighteningLaw::CantelliRobust:
            out.gammas.push_back(cantelli_gamma(std::sqrt(projected_variance(g, sigma)), risk));
            break;
        }
    }
    return out;
}

}  // namespace smpc
