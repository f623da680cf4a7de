#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include <smpc/config.hpp>
#include <smpc/errors.hpp>
#include <smpc/experiment.hpp>

#include "csv.hpp"

#ifndef SMPC_VERSION
#define SMPC_VERSION "0.0.0"
#endif

namespace smpc::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::string out;
};

RunConfig load(const std::string& path)
{
    return path.empty() ? default_config() : load_config(path);
}

ControllerMode resolve_mode(const std::optional<std::string>& name, const RunConfig& config)
{
    if (!name) {
        return config.risk.law == TighteningLaw::GaussianExact ? ControllerMode::SmpcGaussian
                                                               : ControllerMode::SmpcCantelli;
    }
    auto mode = parse_controller_mode(*name);
    if (!mode) {
        throw ConfigError("unknown mode '" + *name +
                          "' (expected nominal-free, nominal-constrained, smpc-gaussian or "
                          "smpc-cantelli)");
    }
    return *mode;
}

std::string metadata(const std::string& hash, const std::string& seed, std::string_view extra)
{
    std::string line = "smpc " SMPC_VERSION " config_hash=" + hash + " seed=" + seed +
                       " prng=" + std::string(kPrngName);
    if (!extra.empty()) {
        line += " ";
        line += extra;
    }
    return line;
}

std::vector<std::string> indexed(const char* stem, Eigen::Index count)
{
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < count; ++i) {
        names.push_back(std::string(stem) + std::to_string(i + 1));
    }
    return names;
}

fs::path output_file(const std::string& out, const RunConfig& config, const char* name)
{
    if (!out.empty()) {
        return fs::path(out);
    }
    return fs::path(config.output.directory) / (config.output.prefix + name);
}

int simulate(const CommonOptions& opt, bool noiseless, std::ostream& out)
{
    const RunConfig config = load(opt.config_path);
    const ControllerMode mode = resolve_mode(opt.mode, config);
    const std::uint64_t seed = opt.seed.value_or(config.experiment.base_seed);
    const fs::path path = output_file(opt.out, config, "trajectory.csv");

    Controller controller(make_controller_setup(config, mode));
    RngState rng(seed);
    const ClosedLoopRecord rec = run_closed_loop(controller, config.disturbance, config.mpc.x0,
                                                 config.mpc.steps, rng, {noiseless});

    const auto n = config.system.state_dim();
    const auto m = config.system.input_dim();
    const auto q = config.system.disturbance_dim();
    std::vector<std::string> header{"t"};
    for (auto& s : indexed("x", n)) header.push_back(s);
    if (m == 1) {
        header.push_back("u");
    } else {
        for (auto& s : indexed("u", m)) header.push_back(s);
    }
    for (auto& s : indexed("w", q)) header.push_back(s);
    header.insert(header.end(), {"violated", "qp_status", "gamma_1_used"});

    std::string extra = "command=simulate mode=" + std::string(to_string(mode));
    if (noiseless) {
        extra += " plant=noiseless";
    }
    CsvWriter csv(path, metadata(config_hash(config), std::to_string(seed), extra), header);
    for (int t = 0; t <= rec.steps(); ++t) {
        const auto idx = static_cast<std::size_t>(t);
        csv.field(config.mpc.dt * t);
        for (Eigen::Index i = 0; i < n; ++i) csv.field(rec.states[idx](i));
        const bool has_step = t < rec.steps();
        for (Eigen::Index i = 0; i < m; ++i) {
            has_step ? csv.field(rec.inputs[idx](i)) : csv.empty();
        }
        for (Eigen::Index i = 0; i < q; ++i) {
            has_step ? csv.field(rec.disturbances[idx](i)) : csv.empty();
        }
        bool violated = false;
        for (bool v : rec.violations[idx]) violated = violated || v;
        csv.field(static_cast<long long>(violated));
        if (has_step) {
            csv.field(rec.slack_used[idx] ? std::string_view("optimal_slack")
                                          : std::string_view(to_string(rec.statuses[idx])));
            csv.field(rec.gamma_1[idx]);
        } else {
            csv.empty().empty();
        }
        csv.end_row();
    }
    out << "wrote " << path.string() << "\n";
    return kExitOk;
}

int montecarlo(const CommonOptions& opt, std::optional<int> trials_flag, unsigned threads,
               std::ostream& out)
{
    const RunConfig config = load(opt.config_path);
    const ControllerMode mode = resolve_mode(opt.mode, config);
    const std::uint64_t seed = opt.seed.value_or(config.experiment.base_seed);
    const int trials = trials_flag.value_or(config.experiment.trials);
    if (trials < 1) {
        throw ConfigError("--trials must be at least 1");
    }
    const fs::path dir = opt.out.empty() ? fs::path(config.output.directory) : fs::path(opt.out);
    const std::string& prefix = config.output.prefix;

    const CampaignResult result = run_campaign(mode, config, trials, seed, threads);

    const std::string meta =
        metadata(config_hash(config), std::to_string(seed),
                 "command=montecarlo mode=" + std::string(to_string(mode)) +
                     " trials=" + std::to_string(trials));
    {
        CsvWriter csv(dir / (prefix + "summary.csv"), meta,
                      {"mode", "p", "trials", "steps", "rate", "rate_at_risk", "se", "max_x1",
                       "se_at_risk", "at_risk_steps", "gamma_1", "slack_steps"});
        csv.field(to_string(mode))
            .field(result.p)
            .field(static_cast<long long>(result.trials))
            .field(static_cast<long long>(result.steps))
            .field(result.rate)
            .field(result.rate_at_risk)
            .field(result.se)
            .field(result.max_x1)
            .field(result.se_at_risk)
            .field(result.at_risk_steps)
            .field(result.gamma_1)
            .field(result.slack_steps);
        csv.end_row();
    }
    {
        CsvWriter csv(dir / (prefix + "trials.csv"), meta,
                      {"trial", "seed", "violations", "at_risk_steps", "at_risk_violations",
                       "slack_steps", "max_x1"});
        long long i = 0;
        for (const auto& s : result.trial_summaries) {
            csv.field(i++)
                .field(std::to_string(s.seed))
                .field(static_cast<long long>(s.violations))
                .field(static_cast<long long>(s.at_risk_steps))
                .field(static_cast<long long>(s.at_risk_violations))
                .field(static_cast<long long>(s.slack_steps))
                .field(s.max_constraint_value);
            csv.end_row();
        }
    }
    {
        const auto n = config.system.state_dim();
        std::vector<std::string> header{"t", "violation_frequency"};
        for (auto& s : indexed("mean_x", n)) header.push_back(s);
        for (auto& s : indexed("max_x", n)) header.push_back(s);
        CsvWriter csv(dir / (prefix + "per_step.csv"), meta, header);
        for (int t = 0; t <= result.steps; ++t) {
            const auto idx = static_cast<std::size_t>(t);
            csv.field(config.mpc.dt * t);
            t == 0 ? csv.empty() : csv.field(result.per_step_frequency[idx - 1]);
            for (Eigen::Index i = 0; i < n; ++i) csv.field(result.mean_trajectory[idx](i));
            for (Eigen::Index i = 0; i < n; ++i) csv.field(result.max_trajectory[idx](i));
            csv.end_row();
        }
    }
    out << to_string(mode) << " p=" << format_number(result.p) << " trials=" << trials
        << " rate=" << format_number(result.rate) << " (se " << format_number(result.se)
        << ") rate_at_risk=" << format_number(result.rate_at_risk) << " (se "
        << format_number(result.se_at_risk) << ")\n";
    out << "wrote " << (dir / (prefix + "summary.csv")).string() << "\n";
    return kExitOk;
}

int tightening_compare(double pmin, double pmax, int points, const std::string& out_path,
                       std::ostream& out)
{
    if (!(pmin >= 0.5 && pmin < 1.0) || !(pmax >= pmin && pmax < 1.0)) {
        throw ConfigError("grid must satisfy 0.5 <= pmin <= pmax < 1");
    }
    if (points < 1 || (points > 1 && pmax == pmin)) {
        throw ConfigError("--points must be at least 1 and the grid non-degenerate");
    }
    const auto rows = tightening_comparison(linspace(pmin, pmax, points));
    const fs::path path = out_path.empty() ? fs::path("tightening.csv") : fs::path(out_path);
    CsvWriter csv(path, metadata("none", "none", "command=tightening-compare"),
                  {"p", "gaussian_factor", "cantelli_factor"});
    for (const auto& row : rows) {
        csv.field(row.p).field(row.gaussian_factor).field(row.cantelli_factor);
        csv.end_row();
    }
    out << "wrote " << path.string() << "\n";
    return kExitOk;
}

int gains(const std::string& config_path, std::ostream& out)
{
    const RunConfig config = load(config_path);
    const FeedbackSynthesis synth = synthesize(config);
    const CovarianceSchedule cov = propagate_covariance(synth.Phi, config.system.D,
                                                        config.system.sigma_w, config.mpc.horizon);
    const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
    out << "K (u = -K x + v):\n" << synth.K.format(fmt) << "\n";
    out << "Phi = A - B K:\n" << synth.Phi.format(fmt) << "\n";
    out << "spectral_radius(Phi) = " << format_number(spectral_radius(synth.Phi)) << "\n";
    out << "law = " << to_string(config.risk.law) << ", p = " << format_number(config.risk.risk.p())
        << "\n";
    if (config.constraints.state_halfspaces.empty()) {
        out << "no state constraints: no tightening schedule\n";
        return kExitOk;
    }
    const Vector& g = config.constraints.state_halfspaces.front().g;
    const TighteningSchedule schedule =
        build_tightening_schedule(g, cov, config.risk.risk, config.risk.law);
    out << "k, gT_Sigma_g, trace_Sigma, gamma_k, Sigma (row-major)\n";
    for (int k = 0; k <= cov.horizon(); ++k) {
        const Matrix& S = cov.sigmas[static_cast<std::size_t>(k)];
        out << k << ", " << format_number(g.dot(S * g)) << ", " << format_number(S.trace())
            << ", "
            << (k == 0 ? std::string("-")
                       : format_number(schedule.gammas[static_cast<std::size_t>(k - 1)]));
        for (Eigen::Index i = 0; i < S.rows(); ++i) {
            for (Eigen::Index j = 0; j < S.cols(); ++j) {
                out << ", " << format_number(S(i, j));
            }
        }
        out << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stochastic MPC toolkit: chance-constraint tightening and Monte Carlo validation",
                 "smpc"};
    app.set_version_flag("--version", SMPC_VERSION);
    app.require_subcommand(1);

    CommonOptions sim_opt;
    bool noiseless = false;
    auto* sim = app.add_subcommand("simulate", "Run one closed loop and write a trajectory CSV");
    sim->add_option("--mode", sim_opt.mode, "nominal-free | nominal-constrained | smpc-gaussian | smpc-cantelli");
    sim->add_option("--config", sim_opt.config_path, "JSON config (defaults to the built-in scenario)");
    sim->add_option("--seed", sim_opt.seed, "PRNG seed (defaults to experiment.base_seed)");
    sim->add_option("--out", sim_opt.out, "Trajectory CSV path");
    sim->add_flag("--noiseless", noiseless, "Apply no disturbance to the plant");

    CommonOptions mc_opt;
    std::optional<int> trials;
    unsigned threads = 0;
    auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo campaign");
    mc->add_option("--mode", mc_opt.mode, "Controller mode");
    mc->add_option("--config", mc_opt.config_path, "JSON config");
    mc->add_option("--trials", trials, "Number of trials (defaults to experiment.trials)");
    mc->add_option("--seed", mc_opt.seed, "Base seed; trial i uses seed + i");
    mc->add_option("--out", mc_opt.out, "Output directory");
    mc->add_option("--threads", threads, "Worker threads (0 = all cores)");

    double pmin = 0.5;
    double pmax = 0.99;
    int points = 100;
    std::string tc_out;
    auto* tc = app.add_subcommand("tightening-compare",
                                  "Unit-variance Gaussian vs Cantelli tightening factors");
    tc->add_option("--pmin", pmin, "Smallest p (>= 0.5)");
    tc->add_option("--pmax", pmax, "Largest p (< 1)");
    tc->add_option("--points", points, "Number of grid points");
    tc->add_option("--out", tc_out, "Output CSV path");

    std::string gains_config;
    auto* gn = app.add_subcommand("gains", "Print LQR gain, closed loop and tightening schedule");
    gn->add_option("--config", gains_config, "JSON config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) return simulate(sim_opt, noiseless, out);
        if (*mc) return montecarlo(mc_opt, trials, threads, out);
        if (*tc) return tightening_compare(pmin, pmax, points, tc_out, out);
        if (*gn) return gains(gains_config, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SynthesisError& e) {
        err << "synthesis error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitConfig;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"smpc"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace smpc::cli
