#include "smpc/controller.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

ControllerSetup validated(ControllerSetup s)
{
    s.sys.validate();
    s.cs.validate(s.sys.state_dim(), s.sys.input_dim());
    if (s.horizon < 1) {
        throw ConfigError("horizon must be at least 1");
    }
    return s;
}

OcpSpec make_ocp_spec(const ControllerSetup& s, const Matrix& K,
                      const std::vector<std::vector<double>>& margins)
{
    OcpSpec spec;
    spec.horizon = s.horizon;
    spec.A = s.sys.A;
    spec.B = s.sys.B;
    spec.Q = s.Q;
    spec.R = s.R;
    spec.u_min = s.cs.u_min;
    spec.u_max = s.cs.u_max;
    if (s.mode != ControllerMode::NominalNoStateConstraint) {
        spec.halfspaces = s.cs.state_halfspaces;
        for (auto& hs : spec.halfspaces) {
            hs.h -= kStateBackoff;
        }
    }
    spec.margins = margins;
    spec.K = K;
    spec.x0 = Vector::Zero(s.sys.state_dim());
    return spec;
}

Matrix feedback_for(const ControllerSetup& s)
{
    if (is_stochastic(s.mode)) {
        if (s.synth.K.rows() != s.sys.input_dim() || s.synth.K.cols() != s.sys.state_dim()) {
            throw ConfigError("stochastic modes need a feedback gain of matching dimension");
        }
        return s.synth.K;
    }
    return Matrix::Zero(s.sys.input_dim(), s.sys.state_dim());
}

std::vector<std::vector<double>> margins_for(const ControllerSetup& s, const Matrix& K,
                                             const CovarianceSchedule& cov)
{
    std::vector<std::vector<double>> out;
    if (s.mode == ControllerMode::NominalNoStateConstraint) {
        return out;
    }
    const auto N = static_cast<std::size_t>(s.horizon);
    if (!is_stochastic(s.mode)) {
        out.assign(s.cs.state_halfspaces.size(), std::vector<double>(N, 0.0));
        return out;
    }
    const TighteningLaw law = s.mode == ControllerMode::SmpcGaussian
                                  ? TighteningLaw::GaussianExact
                                  : TighteningLaw::CantelliRobust;
    const Matrix Phi = s.sys.A - s.sys.B * K;
    const auto means = propagate_error_mean(Phi, s.sys.D, s.sys.mean_w, s.horizon);
    for (const auto& hs : s.cs.state_halfspaces) {
        const TighteningSchedule schedule = build_tightening_schedule(hs.g, cov, s.risk, law);
        std::vector<double> m(N);
        for (std::size_t k = 0; k < N; ++k) {
            m[k] = schedule.gammas[k] + mean_shift_adjustment(hs.g, means[k + 1]);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

std::string_view to_string(ControllerMode mode)
{
    switch (mode) {
    case ControllerMode::NominalNoStateConstraint:
        return "nominal-free";
    case ControllerMode::NominalWithStateConstraint:
        return "nominal-constrained";
    case ControllerMode::SmpcGaussian:
        return "smpc-gaussian";
    case ControllerMode::SmpcCantelli:
        return "smpc-cantelli";
    }
    return "unknown";
}

std::optional<ControllerMode> parse_controller_mode(std::string_view name)
{
    for (auto mode : {ControllerMode::NominalNoStateConstraint,
                      ControllerMode::NominalWithStateConstraint, ControllerMode::SmpcGaussian,
                      ControllerMode::SmpcCantelli}) {
        if (to_string(mode) == name) {
            return mode;
        }
    }
    return std::nullopt;
}

bool is_stochastic(ControllerMode mode)
{
    return mode == ControllerMode::SmpcGaussian || mode == ControllerMode::SmpcCantelli;
}

Controller::Controller(ControllerSetup setup)
    : setup_(validated(std::move(setup))),
      K_(feedback_for(setup_)),
      covariances_(propagate_covariance(setup_.sys.A - setup_.sys.B * K_, setup_.sys.D,
                                        setup_.sys.sigma_w, setup_.horizon)),
      margins_(margins_for(setup_, K_, covariances_)),
      condenser_(make_ocp_spec(setup_, K_, margins_)),
      solver_(condenser_.hessian())
{
}

void Controller::reset()
{
    warm_start_.clear();
}

double Controller::first_margin() const
{
    return margins_.empty() ? 0.0 : margins_.front().front();
}

StepResult Controller::control_step(const Vector& x)
{
    if (x.size() != setup_.sys.state_dim() || !x.allFinite()) {
        throw ConfigError("control_step: state must be finite with dimension " +
                          std::to_string(setup_.sys.state_dim()));
    }
    const auto start = std::chrono::steady_clock::now();
    const Vector f = condenser_.linear_term(x);
    const Vector h = condenser_.rhs(x);
    const double c = condenser_.constant(x);

    QpSolution sol = solver_.solve(f, condenser_.constraints(), h, c, warm_start_);
    StepResult out;
    out.iterations = sol.iterations;
    Vector z = sol.z_star;
    if (sol.status == QpStatus::Infeasible && condenser_.num_state_rows() > 0) {
        QuadraticProgram relaxed = add_state_slack(condenser_.build(x), condenser_.first_state_row(),
                                                   kSlackPenalty);
        sol = solve_qp(relaxed);
        out.iterations += sol.iterations;
        out.slack_used = true;
        z = sol.z_star.head(condenser_.num_variables());
        // Slack-relaxed active sets index a different row layout.
        sol.active_set.erase(std::remove_if(sol.active_set.begin(), sol.active_set.end(),
                                            [&](int i) { return i >= condenser_.constraints().rows(); }),
                             sol.active_set.end());
    }
    if (sol.status != QpStatus::Optimal) {
        throw SolverError(std::string("QP solve failed: ") + to_string(sol.status) +
                          (sol.message.empty() ? "" : " (" + sol.message + ")"));
    }
    out.status = sol.status;

    const auto m = setup_.sys.input_dim();
    out.v0 = z.head(m);
    out.u = condenser_.applied_inputs(x, z).head(m);

    // Shift the active set one step forward for the next solve.
    const int N = condenser_.horizon();
    warm_start_.clear();
    for (int row : sol.active_set) {
        if (row < condenser_.first_state_row()) {
            const int k = row / (2 * condenser_.input_dim());
            if (k > 0) {
                warm_start_.push_back(row - 2 * condenser_.input_dim());
            }
        } else {
            const int offset = row - condenser_.first_state_row();
            const int k = offset / condenser_.num_halfspaces() + 1;
            if (k > 1 && k <= N) {
                warm_start_.push_back(row - condenser_.num_halfspaces());
            }
        }
    }
    out.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

ClosedLoopRecord run_closed_loop(Controller& controller, const DisturbanceModel& disturbance,
                                 const Vector& x0, int steps, RngState& rng, PlantOptions plant)
{
    if (steps < 1) {
        throw ConfigError("closed loop needs at least one step");
    }
    const auto& sys = controller.setup().sys;
    const auto& cs = controller.setup().cs;
    if (x0.size() != sys.state_dim()) {
        throw ConfigError("initial state has wrong dimension");
    }
    disturbance.validate();
    const Matrix factor = covariance_factor(sys.sigma_w);
    controller.reset();

    ClosedLoopRecord rec;
    const auto T = static_cast<std::size_t>(steps);
    rec.states.reserve(T + 1);
    rec.inputs.reserve(T);
    rec.disturbances.reserve(T);
    rec.predictions.reserve(T);
    rec.violations.reserve(T + 1);
    rec.statuses.reserve(T);
    rec.slack_used.reserve(T);
    rec.gamma_1.reserve(T);
    rec.solve_seconds.reserve(T);

    Vector x = x0;
    rec.states.push_back(x);
    rec.violations.push_back(check_violation(cs, x));
    const Vector zero_w = Vector::Zero(sys.disturbance_dim());
    for (int t = 0; t < steps; ++t) {
        StepResult step = controller.control_step(x);
        Vector w = sample_disturbance_factored(disturbance, factor, rng);
        if (plant.noiseless) {
            w = zero_w;
        }
        Vector prediction = step_true_plant(sys, x, step.u, zero_w);
        x = step_true_plant(sys, x, step.u, w);

        rec.inputs.push_back(step.u);
        rec.disturbances.push_back(w);
        rec.predictions.push_back(std::move(prediction));
        rec.statuses.push_back(step.status);
        rec.slack_used.push_back(step.slack_used);
        rec.gamma_1.push_back(controller.first_margin());
        rec.solve_seconds.push_back(step.solve_seconds);
        rec.states.push_back(x);
        rec.violations.push_back(check_violation(cs, x));
    }
    return rec;
}

}  // namespace smpc
