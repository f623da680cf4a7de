#include "smpc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

struct TrialData {
    TrialSummary summary;
    std::vector<char> violated;  // x_1 ... x_T
    std::vector<Vector> states;
};

double reference_gamma(const Controller& controller)
{
    const double own = controller.first_margin();
    if (own > 0.0) {
        return own;
    }
    // Nominal modes: Gaussian gamma_1 of the configured risk, Sigma^e_1 = D Sigma_w D^T.
    const auto& s = controller.setup();
    if (s.cs.state_halfspaces.empty() || s.risk.p() < 0.5) {
        return 0.0;
    }
    const Matrix sigma1 = s.sys.D * s.sys.sigma_w * s.sys.D.transpose();
    return gaussian_gamma(s.cs.state_halfspaces.front().g, sigma1, s.risk);
}

TrialData run_trial(Controller& controller, const DisturbanceModel& disturbance, const Vector& x0,
                    int steps, std::uint64_t seed, double band)
{
    RngState rng(seed);
    const ClosedLoopRecord rec = run_closed_loop(controller, disturbance, x0, steps, rng);
    const auto& cs = controller.setup().cs;
    TrialData out;
    out.summary.seed = seed;
    out.states = rec.states;
    out.violated.assign(static_cast<std::size_t>(steps), 0);
    if (cs.state_halfspaces.empty()) {
        return out;
    }
    const HalfSpace& hs = cs.state_halfspaces.front();
    out.summary.max_constraint_value = hs.g.dot(rec.states.front());
    for (int t = 0; t < steps; ++t) {
        const auto idx = static_cast<std::size_t>(t);
        const Vector& next = rec.states[idx + 1];
        const bool violated = rec.violations[idx + 1].front();
        const bool at_risk = hs.g.dot(rec.predictions[idx]) >= hs.h - band;
        out.violated[idx] = violated ? 1 : 0;
        out.summary.violations += violated ? 1 : 0;
        out.summary.slack_steps += rec.slack_used[idx] ? 1 : 0;
        if (at_risk) {
            ++out.summary.at_risk_steps;
            out.summary.at_risk_violations += violated ? 1 : 0;
        }
        out.summary.max_constraint_value = std::max(out.summary.max_constraint_value, hs.g.dot(next));
    }
    return out;
}

}  // namespace

double binomial_standard_error(double rate, long long samples)
{
    if (samples <= 0) {
        return 0.0;
    }
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(samples));
}

CampaignResult run_campaign(const ControllerSetup& setup, const DisturbanceModel& disturbance,
                            const Vector& x0, const CampaignOptions& options)
{
    if (options.trials < 1) {
        throw ConfigError("campaign needs at least one trial");
    }
    if (options.steps < 1) {
        throw ConfigError("campaign needs at least one step");
    }
    const Controller prototype(setup);
    const double gamma_1 = reference_gamma(prototype);
    const double band = 2.0 * gamma_1;

    const auto trials = static_cast<std::size_t>(options.trials);
    std::vector<TrialData> data(trials);
    unsigned workers = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trials)));

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](unsigned worker) {
        try {
            Controller controller = prototype;
            for (std::size_t i = worker; i < trials; i += workers) {
                data[i] = run_trial(controller, disturbance, x0, options.steps,
                                    options.base_seed + i, band);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    CampaignResult out;
    out.mode = setup.mode;
    out.p = setup.risk.p();
    out.trials = options.trials;
    out.steps = options.steps;
    out.gamma_1 = gamma_1;
    const auto T = static_cast<std::size_t>(options.steps);
    out.per_step_frequency.assign(T, 0.0);
    const auto n = x0.size();
    out.mean_trajectory.assign(T + 1, Vector::Zero(n));
    out.max_trajectory.assign(T + 1, Vector::Constant(n, -std::numeric_limits<double>::infinity()));
    out.max_x1 = -std::numeric_limits<double>::infinity();
    out.trial_summaries.reserve(trials);
    for (const auto& trial : data) {
        const auto& s = trial.summary;
        out.violations += s.violations;
        out.at_risk_steps += s.at_risk_steps;
        out.at_risk_violations += s.at_risk_violations;
        out.slack_steps += s.slack_steps;
        out.max_x1 = std::max(out.max_x1, s.max_constraint_value);
        for (std::size_t t = 0; t < T; ++t) {
            out.per_step_frequency[t] += trial.violated[t];
        }
        for (std::size_t t = 0; t <= T; ++t) {
            out.mean_trajectory[t] += trial.states[t];
            out.max_trajectory[t] = out.max_trajectory[t].cwiseMax(trial.states[t]);
        }
        out.trial_summaries.push_back(s);
    }
    const double count = static_cast<double>(trials);
    for (auto& f : out.per_step_frequency) {
        f /= count;
    }
    for (auto& m : out.mean_trajectory) {
        m /= count;
    }
    const long long samples = static_cast<long long>(trials) * options.steps;
    out.rate = static_cast<double>(out.violations) / static_cast<double>(samples);
    out.se = binomial_standard_error(out.rate, samples);
    out.rate_at_risk = out.at_risk_steps > 0 ? static_cast<double>(out.at_risk_violations) /
                                                   static_cast<double>(out.at_risk_steps)
                                             : 0.0;
    out.se_at_risk = binomial_standard_error(out.rate_at_risk, out.at_risk_steps);
    return out;
}

CampaignResult run_campaign(ControllerMode mode, const RunConfig& config, int trials,
                            std::uint64_t base_seed, unsigned threads)
{
    CampaignOptions options;
    options.trials = trials;
    options.base_seed = base_seed;
    options.steps = config.mpc.steps;
    options.threads = threads;
    return run_campaign(make_controller_setup(config, mode), config.disturbance, config.mpc.x0,
                        options);
}

std::vector<TighteningRow> tightening_comparison(const std::vector<double>& p_grid)
{
    std::vector<TighteningRow> rows;
    rows.reserve(p_grid.size());
    for (double p : p_grid) {
        rows.push_back({p, gaussian_factor(p), cantelli_factor(p)});
    }
    return rows;
}

std::vector<double> linspace(double lo, double hi, int points)
{
    if (points < 1) {
        throw ConfigError("linspace needs at least one point");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    if (points == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = lo + step * i;
    }
    out.back() = hi;
    return out;
}

}  // namespace smpc
