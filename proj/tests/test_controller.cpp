#include <doctest.h>

#include <smpc/config.hpp>
#include <smpc/controller.hpp>
#include <smpc/errors.hpp>

using namespace smpc;

namespace {

constexpr ControllerMode kModes[] = {ControllerMode::NominalNoStateConstraint,
                                     ControllerMode::NominalWithStateConstraint,
                                     ControllerMode::SmpcGaussian, ControllerMode::SmpcCantelli};

RunConfig noiseless_config()
{
    auto cfg = default_config();
    cfg.system.sigma_w = Matrix::Zero(2, 2);
    return cfg;
}

double max_x1(const ClosedLoopRecord& rec)
{
    double out = -1e300;
    for (const auto& x : rec.states) out = std::max(out, x(0));
    return out;
}

}  // namespace

TEST_CASE("mode names round trip")
{
    for (auto mode : kModes) {
        CHECK(parse_controller_mode(to_string(mode)) == mode);
    }
    CHECK_FALSE(parse_controller_mode("smpc").has_value());
    CHECK(is_stochastic(ControllerMode::SmpcCantelli));
    CHECK_FALSE(is_stochastic(ControllerMode::NominalWithStateConstraint));
}

TEST_CASE("origin maps to zero input")
{
    const auto cfg = default_config();
    for (auto mode : kModes) {
        Controller c(make_controller_setup(cfg, mode));
        const auto step = c.control_step(Vector::Zero(2));
        CHECK(step.status == QpStatus::Optimal);
        CHECK(std::abs(step.u(0)) <= 1e-12);
        CHECK_FALSE(step.slack_used);
    }
}

TEST_CASE("margins per mode")
{
    const auto cfg = default_config();
    Controller free(make_controller_setup(cfg, ControllerMode::NominalNoStateConstraint));
    Controller nominal(make_controller_setup(cfg, ControllerMode::NominalWithStateConstraint));
    Controller gauss(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    Controller cant(make_controller_setup(cfg, ControllerMode::SmpcCantelli));

    CHECK(free.margins().empty());
    CHECK(free.condenser().num_state_rows() == 0);
    CHECK(nominal.first_margin() == 0.0);
    CHECK(std::abs(gauss.first_margin() - 0.238046) <= 1e-6);
    CHECK(cant.first_margin() == doctest::Approx(2.0 * std::sqrt(0.08)));
    CHECK(nominal.feedback().isZero());
    CHECK_FALSE(gauss.feedback().isZero());

    const auto& m = gauss.margins().front();
    REQUIRE(m.size() == 11);
    for (std::size_t k = 1; k < m.size(); ++k) {
        CHECK(m[k] >= m[k - 1]);
        CHECK(cant.margins().front()[k] >= m[k]);
    }
}

TEST_CASE("SMPC with zero noise and zero feedback equals nominal-constrained")
{
    const auto cfg = noiseless_config();
    auto setup = make_controller_setup(cfg, ControllerMode::SmpcGaussian);
    setup.synth.K = Matrix::Zero(1, 2);
    Controller smpc(setup);
    Controller nominal(make_controller_setup(cfg, ControllerMode::NominalWithStateConstraint));
    for (double a : {-1.0, 0.0, 1.3, 2.5}) {
        for (double b : {-3.0, 0.5, 4.8}) {
            Vector x(2);
            x << a, b;
            const auto s = smpc.control_step(x);
            const auto n = nominal.control_step(x);
            CHECK(std::abs(s.u(0) - n.u(0)) <= 1e-9);
        }
    }
}

TEST_CASE("noiseless regulation in all modes")
{
    const auto cfg = noiseless_config();
    for (auto mode : kModes) {
        CAPTURE(to_string(mode));
        Controller c(make_controller_setup(cfg, mode));
        RngState rng(1);
        const auto rec = run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 200, rng);
        CHECK(rec.states.back().norm() <= 1e-6);
        for (const auto& u : rec.inputs) {
            CHECK(u(0) <= 0.2 + 1e-9);
            CHECK(u(0) >= -0.2 - 1e-9);
        }
        for (const auto& w : rec.disturbances) CHECK(w.isZero());
        if (mode != ControllerMode::NominalNoStateConstraint) {
            CHECK(max_x1(rec) <= 2.8 - c.first_margin() + 1e-7);
        }
    }
}

TEST_CASE("unconstrained nominal run exceeds the state limit")
{
    const auto cfg = noiseless_config();
    Controller c(make_controller_setup(cfg, ControllerMode::NominalNoStateConstraint));
    RngState rng(1);
    const auto rec = run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 100, rng);
    CHECK(max_x1(rec) > 2.8);
}

TEST_CASE("noiseless plant option keeps the tightened controller")
{
    const auto cfg = default_config();
    Controller c(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    RngState rng(4);
    const auto rec = run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 100, rng, {.noiseless = true});
    CHECK(std::abs(max_x1(rec) - (2.8 - 0.238046)) <= 1e-5);
    for (double g : rec.gamma_1) CHECK(g == c.first_margin());
}

TEST_CASE("closed loop is reproducible from the seed")
{
    const auto cfg = default_config();
    for (auto mode : kModes) {
        Controller a(make_controller_setup(cfg, mode));
        Controller b(make_controller_setup(cfg, mode));
        RngState ra(42);
        RngState rb(42);
        const auto x = run_closed_loop(a, cfg.disturbance, cfg.mpc.x0, 60, ra);
        const auto y = run_closed_loop(b, cfg.disturbance, cfg.mpc.x0, 60, rb);
        REQUIRE(x.steps() == 60);
        for (std::size_t t = 0; t < x.states.size(); ++t) CHECK(x.states[t] == y.states[t]);
        for (std::size_t t = 0; t < x.inputs.size(); ++t) CHECK(x.inputs[t] == y.inputs[t]);
        CHECK(x.violations == y.violations);
        // Rerunning on the same instance resets the warm start.
        RngState rc(42);
        const auto z = run_closed_loop(a, cfg.disturbance, cfg.mpc.x0, 60, rc);
        for (std::size_t t = 0; t < x.states.size(); ++t) CHECK(x.states[t] == z.states[t]);
    }
}

TEST_CASE("closed loop records")
{
    const auto cfg = default_config();
    Controller c(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    RngState rng(3);
    const auto rec = run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 25, rng);
    CHECK(rec.states.size() == 26);
    CHECK(rec.violations.size() == 26);
    CHECK(rec.predictions.size() == 25);
    for (int t = 0; t < 25; ++t) {
        const auto i = static_cast<std::size_t>(t);
        CHECK((rec.states[i + 1] - rec.predictions[i] - rec.disturbances[i]).norm() <= 1e-14);
        CHECK(rec.violations[i + 1][0] == (rec.states[i + 1](0) > 2.8));
        CHECK(std::abs(rec.inputs[i](0)) <= 0.2 + 1e-9);
    }
}

TEST_CASE("invalid inputs")
{
    const auto cfg = default_config();
    Controller c(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    RngState rng(1);
    CHECK_THROWS_AS(run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 0, rng), ConfigError);
    CHECK_THROWS_AS(c.control_step(Vector::Zero(3)), ConfigError);
    Vector bad(2);
    bad << std::nan(""), 0.0;
    CHECK_THROWS_AS(c.control_step(bad), ConfigError);

    auto setup = make_controller_setup(cfg, ControllerMode::SmpcGaussian);
    setup.horizon = 0;
    CHECK_THROWS_AS(Controller{setup}, ConfigError);
    setup = make_controller_setup(cfg, ControllerMode::SmpcGaussian);
    setup.synth.K = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(Controller{setup}, ConfigError);
    setup = make_controller_setup(cfg, ControllerMode::SmpcGaussian);
    setup.risk = RiskParameter::from_p(0.3);
    CHECK_THROWS_AS(Controller{setup}, DomainError);
}

TEST_CASE("infeasible state falls back to the slack relaxation")
{
    const auto cfg = default_config();
    Controller c(make_controller_setup(cfg, ControllerMode::NominalWithStateConstraint));
    Vector x(2);
    x << 4.5, 5.0;
    const auto step = c.control_step(x);
    CHECK(step.slack_used);
    CHECK(step.status == QpStatus::Optimal);
    CHECK(std::abs(step.u(0)) <= 0.2 + 1e-9);
}
