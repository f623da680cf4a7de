#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "smpc/chance.hpp"
#include "smpc/controller.hpp"
#include "smpc/model.hpp"
#include "smpc/synthesis.hpp"

namespace smpc {

/**
 * @brief Everything needed to run a scenario, loaded from a JSON file.
 *
 * Blocks: system, constraints, mpc, risk, experiment, output. Matrices are
 * nested arrays in row-major order. Keys left out of a file keep the values of
 * default_config(), which is the Buck-Boost example scenario.
 */
struct RunConfig {
    LinearStochasticSystem system;
    DisturbanceModel disturbance;
    ConstraintSet constraints;

    struct Mpc {
        int horizon = 11;
        double dt = 0.1;
        Matrix Q;
        Matrix R;
        int steps = 100;
        Vector x0;
        /// LQR weights; the MPC weights are used when absent.
        std::optional<Matrix> lqr_Q;
        std::optional<Matrix> lqr_R;
    } mpc;

    struct Risk {
        RiskParameter risk = RiskParameter::from_p(0.8);
        TighteningLaw law = TighteningLaw::GaussianExact;
    } risk;

    struct Experiment {
        int trials = 1000;
        std::uint64_t base_seed = 1;
    } experiment;

    struct Output {
        std::string directory = "out";
        std::string prefix = "smpc_";
    } output;

    /// Throws ConfigError on any inconsistency.
    void validate() const;
};

RunConfig default_config();

/// Parses JSON text on top of the defaults. Throws ConfigError.
RunConfig parse_config(std::string_view text);

/// Reads and parses a config file. Throws ConfigError (including for a missing file).
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

/// LQR gain from the configured (or MPC) weights. Throws SynthesisError.
FeedbackSynthesis synthesize(const RunConfig& config);

ControllerSetup make_controller_setup(const RunConfig& config, ControllerMode mode);

std::string_view to_string(TighteningLaw law);

}  // namespace smpc
