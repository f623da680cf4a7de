#include <benchmark/benchmark.h>

#include <smpc/chance.hpp>
#include <smpc/config.hpp>
#include <smpc/controller.hpp>
#include <smpc/experiment.hpp>
#include <smpc/ocp.hpp>
#include <smpc/synthesis.hpp>

namespace {

using namespace smpc;

static void BM_erf_inv(benchmark::State& state)
{
    double y = -0.999;
    for (auto _ : state) {
        benchmark::DoNotOptimize(erf_inv(y));
        y += 1e-4;
        if (y >= 0.999) y = -0.999;
    }
}
BENCHMARK(BM_erf_inv);

static void BM_solve_dare(benchmark::State& state)
{
    const auto cfg = default_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_dare(cfg.system.A, cfg.system.B, cfg.mpc.Q, cfg.mpc.R));
    }
}
BENCHMARK(BM_solve_dare);

static void BM_condense(benchmark::State& state)
{
    const auto cfg = default_config();
    Controller controller(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    OcpSpec spec;
    spec.horizon = static_cast<int>(state.range(0));
    spec.A = cfg.system.A;
    spec.B = cfg.system.B;
    spec.Q = cfg.mpc.Q;
    spec.R = cfg.mpc.R;
    spec.u_min = cfg.constraints.u_min;
    spec.u_max = cfg.constraints.u_max;
    spec.halfspaces = cfg.constraints.state_halfspaces;
    spec.margins.assign(1, std::vector<double>(static_cast<std::size_t>(spec.horizon), 0.1));
    spec.K = controller.feedback();
    spec.x0 = cfg.mpc.x0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(condense(spec));
    }
}
BENCHMARK(BM_condense)->Arg(11)->Arg(30);

static void BM_control_step(benchmark::State& state)
{
    const auto cfg = default_config();
    const auto mode = static_cast<ControllerMode>(state.range(0));
    Controller controller(make_controller_setup(cfg, mode));
    for (auto _ : state) {
        benchmark::DoNotOptimize(controller.control_step(cfg.mpc.x0));
    }
}
BENCHMARK(BM_control_step)
    ->Arg(static_cast<int>(ControllerMode::NominalNoStateConstraint))
    ->Arg(static_cast<int>(ControllerMode::NominalWithStateConstraint))
    ->Arg(static_cast<int>(ControllerMode::SmpcGaussian))
    ->Arg(static_cast<int>(ControllerMode::SmpcCantelli));

static void BM_campaign(benchmark::State& state)
{
    const auto cfg = default_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            run_campaign(ControllerMode::SmpcGaussian, cfg, static_cast<int>(state.range(0)), 1, 1));
    }
}
BENCHMARK(BM_campaign)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
