#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "smpc/chance.hpp"
#include "smpc/model.hpp"
#include "smpc/ocp.hpp"
#include "smpc/qp.hpp"
#include "smpc/rng.hpp"
#include "smpc/synthesis.hpp"

namespace smpc {

enum class ControllerMode { NominalNoStateConstraint, NominalWithStateConstraint, SmpcGaussian, SmpcCantelli };

/// CLI spelling: nominal-free, nominal-constrained, smpc-gaussian, smpc-cantelli.
std::string_view to_string(ControllerMode mode);
std::optional<ControllerMode> parse_controller_mode(std::string_view name);

bool is_stochastic(ControllerMode mode);

/// Penalty on the squared state-constraint slack used when the tightened QP is infeasible.
inline constexpr double kSlackPenalty = 1e6;

/// Subtracted from every state bound in the QP so rounding in the plant update cannot cross it.
inline constexpr double kStateBackoff = 1e-9;

struct ControllerSetup {
    ControllerMode mode = ControllerMode::SmpcGaussian;
    LinearStochasticSystem sys;
    ConstraintSet cs;
    /// Pre-stabilizing feedback for the stochastic modes; ignored by nominal modes.
    FeedbackSynthesis synth;
    RiskParameter risk = RiskParameter::from_p(0.8);
    int horizon = 11;
    Matrix Q;
    Matrix R;
};

struct StepResult {
    Vector u;
    /// First decision v_0 (equals u for nominal modes).
    Vector v0;
    QpStatus status = QpStatus::Optimal;
    bool slack_used = false;
    int iterations = 0;
    double solve_seconds = 0.0;
};

/**
 * @brief Receding-horizon controller for one of the four modes.
 *
 * Covariances, tightening margins and the condensed Hessian depend only on the
 * setup and are computed once. The measured state seeds every prediction with
 * zero error, so Sigma^e_0 = 0 at each step. The instance keeps the last active
 * set as a warm start and is therefore not thread-safe.
 */
class Controller {
public:
    explicit Controller(ControllerSetup setup);

    /// Throws SolverError when neither the QP nor its slack relaxation is solvable.
    StepResult control_step(const Vector& x);

    /// Drops the warm-start cache.
    void reset();

    const ControllerSetup& setup() const { return setup_; }
    const Matrix& feedback() const { return K_; }
    const CovarianceSchedule& covariances() const { return covariances_; }
    /// Total margin (tightening plus mean shift) per half-space and step k = 1..N.
    const std::vector<std::vector<double>>& margins() const { return margins_; }
    /// gamma_1 of the first half-space (0 without state constraints).
    double first_margin() const;
    const OcpCondenser& condenser() const { return condenser_; }

private:
    ControllerSetup setup_;
    Matrix K_;
    CovarianceSchedule covariances_;
    std::vector<std::vector<double>> margins_;
    OcpCondenser condenser_;
    DualActiveSetSolver solver_;
    std::vector<int> warm_start_;
};

struct ClosedLoopRecord {
    /// x_0 ... x_T
    std::vector<Vector> states;
    /// u_0 ... u_{T-1}
    std::vector<Vector> inputs;
    /// w_0 ... w_{T-1}
    std::vector<Vector> disturbances;
    /// Nominal one-step predictions A x_t + B u_t (the state without w_t).
    std::vector<Vector> predictions;
    /// Per state x_t, one flag per half-space.
    std::vector<std::vector<bool>> violations;
    std::vector<QpStatus> statuses;
    std::vector<bool> slack_used;
    /// gamma_1 applied at each step.
    std::vector<double> gamma_1;
    std::vector<double> solve_seconds;

    int steps() const { return static_cast<int>(inputs.size()); }
};

struct PlantOptions {
    /// Run the true plant without disturbances while the controller still tightens.
    bool noiseless = false;
};

/**
 * measure -> control_step -> sample_disturbance -> step_true_plant, repeated
 * `steps` times. Reproducible from (setup, disturbance, x0, rng).
 */
ClosedLoopRecord run_closed_loop(Controller& controller, const DisturbanceModel& disturbance,
                                 const Vector& x0, int steps, RngState& rng,
                                 PlantOptions plant = {});

}  // namespace smpc
