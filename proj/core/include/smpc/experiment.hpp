#pragma once

#include <cstdint>
#include <vector>

#include "smpc/config.hpp"
#include "smpc/controller.hpp"

namespace smpc {

struct CampaignOptions {
    int trials = 1000;
    std::uint64_t base_seed = 1;
    int steps = 100;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

/// Per-trial statistics on the first state half-space.
struct TrialSummary {
    std::uint64_t seed = 0;
    int violations = 0;
    int at_risk_steps = 0;
    int at_risk_violations = 0;
    int slack_steps = 0;
    /// max_t g^T x_t over x_0 ... x_T.
    double max_constraint_value = 0.0;
};

/**
 * @brief Aggregated Monte Carlo result.
 *
 * Violations are counted on x_1 ... x_T against the first half-space. A step is
 * at risk when the nominal one-step prediction lies within 2 gamma_1 of the
 * boundary, g^T (A x_t + B u_t) >= h - 2 gamma_1.
 */
struct CampaignResult {
    ControllerMode mode = ControllerMode::SmpcGaussian;
    double p = 0.0;
    int trials = 0;
    int steps = 0;
    /// Reference gamma_1 defining the at-risk band.
    double gamma_1 = 0.0;
    /// Fraction of trials violating at x_t, t = 1..T.
    std::vector<double> per_step_frequency;
    long long violations = 0;
    double rate = 0.0;
    double se = 0.0;
    long long at_risk_steps = 0;
    long long at_risk_violations = 0;
    double rate_at_risk = 0.0;
    double se_at_risk = 0.0;
    long long slack_steps = 0;
    double max_x1 = 0.0;
    /// Componentwise mean and max of x_t over trials, t = 0..T.
    std::vector<Vector> mean_trajectory;
    std::vector<Vector> max_trajectory;
    std::vector<TrialSummary> trial_summaries;
};

/// sqrt(r (1 - r) / n); zero when n == 0.
double binomial_standard_error(double rate, long long samples);

/**
 * Trial i uses RngState(base_seed + i). Trials run on worker threads and are
 * reduced in trial order, so results do not depend on scheduling.
 */
CampaignResult run_campaign(const ControllerSetup& setup, const DisturbanceModel& disturbance,
                            const Vector& x0, const CampaignOptions& options);

CampaignResult run_campaign(ControllerMode mode, const RunConfig& config, int trials,
                            std::uint64_t base_seed, unsigned threads = 0);

struct TighteningRow {
    double p = 0.0;
    double gaussian_factor = 0.0;
    double cantelli_factor = 0.0;
};

/// Unit-variance tightening factors of both laws per grid point.
std::vector<TighteningRow> tightening_comparison(const std::vector<double>& p_grid);

/// `points` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int points);

}  // namespace smpc
