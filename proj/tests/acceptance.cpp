// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <smpc/chance.hpp>
#include <smpc/config.hpp>
#include <smpc/controller.hpp>
#include <smpc/experiment.hpp>
#include <smpc/ocp.hpp>
#include <smpc/qp.hpp>
#include <smpc/synthesis.hpp>

#include <unistd.h>

#include "cli.hpp"
#include "oracles.hpp"

using namespace smpc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            failures.push_back(what);
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunConfig noiseless()
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

ClosedLoopRecord closed_loop(const RunConfig& cfg, ControllerMode mode, int steps, bool plant_noiseless = false)
{
    Controller c(make_controller_setup(cfg, mode));
    RngState rng(1);
    return run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, steps, rng, {plant_noiseless});
}

void criterion_scenario(Outcome& o)
{
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = noiseless();
    const auto constrained = closed_loop(cfg, ControllerMode::NominalWithStateConstraint, 200);
    const auto free = closed_loop(cfg, ControllerMode::NominalNoStateConstraint, 200);
    const double elapsed = seconds_since(start);
    const double mc = max_x1(constrained);
    const double mf = max_x1(free);
    const double final_norm = constrained.states.back().norm();
    o.detail << "constrained max x1=" << mc << " final |x|=" << final_norm << ", free max x1=" << mf
             << ", " << elapsed << " s";
    o.require(mc <= 2.8 + 1e-6, "constrained max x1 <= 2.8");
    o.require(final_norm <= 1e-2, "final |x| <= 1e-2");
    o.require(mf > 2.8, "free max x1 > 2.8");
    o.require(elapsed < 5.0, "runtime < 5 s");
}

void criterion_margin(Outcome& o)
{
    const double gamma_oracle = std::sqrt(2.0 * 0.08) * oracle::erf_inv_bisection(2 * 0.8 - 1);
    auto cfg = default_config();
    Controller c(make_controller_setup(cfg, ControllerMode::SmpcGaussian));
    const double gamma_1 = c.first_margin();
    const double m80 = max_x1(closed_loop(cfg, ControllerMode::SmpcGaussian, 200, true));
    cfg.risk.risk = RiskParameter::from_p(0.95);
    const double m95 = max_x1(closed_loop(cfg, ControllerMode::SmpcGaussian, 200, true));
    o.detail << "gamma_1=" << gamma_1 << " max x1(p=0.8)=" << m80 << " margin(0.8)=" << 2.8 - m80
             << " margin(0.95)=" << 2.8 - m95;
    o.require(std::abs(gamma_1 - gamma_oracle) <= 1e-9, "gamma_1 matches oracle");
    o.require(std::abs(gamma_1 - 0.238046) <= 1e-6, "gamma_1 ~ 0.238046");
    o.require(m80 <= 2.8 - gamma_1 + 1e-6, "max x1 <= 2.8 - gamma_1");
    o.require(2.8 - m95 > 2.8 - m80, "margin grows with p");
}

void criterion_calibration(Outcome& o)
{
    const auto start = std::chrono::steady_clock::now();
    o.detail.precision(4);
    for (double p : {0.6, 0.8, 0.9}) {
        auto cfg = default_config();
        cfg.risk.risk = RiskParameter::from_p(p);
        const auto g = run_campaign(ControllerMode::SmpcGaussian, cfg, 1000, 1, 0);
        const auto c = run_campaign(ControllerMode::SmpcCantelli, cfg, 1000, 1, 0);
        const double bound_risk = (1 - p) + 3 * g.se_at_risk;
        const double bound = (1 - p) + 3 * g.se;
        o.detail << "p=" << p << ": at-risk " << g.rate_at_risk << "<=" << bound_risk << " (n=" << g.at_risk_steps
                 << "), all " << g.rate << ", cantelli " << c.rate << "; ";
        o.require(g.at_risk_steps > 0, "at-risk steps exist");
        o.require(g.rate_at_risk <= bound_risk, "at-risk rate bound at p=" + std::to_string(p));
        o.require(g.rate <= bound, "unconditional rate bound at p=" + std::to_string(p));
        o.require(c.rate <= g.rate, "cantelli rate <= gaussian rate at p=" + std::to_string(p));
    }
    const double elapsed = seconds_since(start);
    o.detail << elapsed << " s";
    o.require(elapsed < 120.0, "runtime < 2 min");
}

void criterion_dominance(Outcome& o)
{
    const auto rows = tightening_comparison(linspace(0.5, 0.99, 100));
    double min_gap = 1e300;
    double worst_oracle = 0.0;
    for (const auto& r : rows) {
        const double cant = std::sqrt(r.p / (1 - r.p));
        const double gauss = std::sqrt(2.0) * oracle::erf_inv_bisection(2 * r.p - 1);
        worst_oracle = std::max({worst_oracle, std::abs(cant - r.cantelli_factor), std::abs(gauss - r.gaussian_factor)});
        min_gap = std::min(min_gap, r.cantelli_factor - r.gaussian_factor);
    }
    o.detail << rows.size() << " points, min gap=" << min_gap << ", max oracle deviation=" << worst_oracle;
    o.require(rows.size() == 100, "100 points");
    o.require(min_gap > 0.0, "strict dominance");
    o.require(worst_oracle <= 1e-10, "factors match oracles");
}

void criterion_kernel(Outcome& o)
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> dist(-0.999, 0.999);
    double round_trip = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = dist(gen);
        round_trip = std::max(round_trip, std::abs(smpc::erf(erf_inv(y)) - y));
    }
    double cdf_mid = 0.0;
    for (double mu : {-3.0, 0.0, 0.7, 12.5}) {
        for (double sigma : {0.1, 1.0, 4.0}) cdf_mid = std::max(cdf_mid, std::abs(normal_cdf(mu, mu, sigma) - 0.5));
    }
    double two_sided = 0.0;
    for (double sigma : {0.3, 1.0, 2.5}) {
        for (double x = 0.0; x <= 5.0; x += 0.1) {
            two_sided = std::max(two_sided, std::abs(two_sided_probability(x, sigma) - smpc::erf(x / (sigma * std::sqrt(2.0)))));
        }
    }
    o.detail << "round trip " << round_trip << ", cdf(mu) " << cdf_mid << ", two-sided " << two_sided;
    o.require(round_trip <= 1e-10, "erf round trip <= 1e-10");
    o.require(cdf_mid <= 1e-15, "normal_cdf(mu) = 0.5");
    o.require(two_sided <= 1e-12, "two-sided identity");

    // Empirical tails against both bounds, 1e6 draws per distribution.
    const int n = 1000000;
    RngState rng(99);
    std::vector<double> gauss(n);
    std::vector<double> unif(n);
    for (int i = 0; i < n; ++i) gauss[i] = rng.standard_normal();
    for (int i = 0; i < n; ++i) unif[i] = std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    int checks = 0;
    double worst = -1e300;
    for (const auto* draws : {&gauss, &unif}) {
        for (double c : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
            long long one = 0;
            long long two = 0;
            for (double x : *draws) {
                one += x >= c;
                two += std::abs(x) >= c;
            }
            const double f1 = static_cast<double>(one) / n;
            const double f2 = static_cast<double>(two) / n;
            const double cb = cantelli_bound(c, 1.0);
            const double kb = chebyshev_bound(c, 1.0);
            const double s1 = binomial_standard_error(cb, n);
            const double s2 = binomial_standard_error(kb, n);
            worst = std::max({worst, f1 - cb - 3 * s1, f2 - kb - 3 * s2});
            o.require(f1 <= cb + 3 * s1, "cantelli bound at c=" + std::to_string(c));
            o.require(f2 <= kb + 3 * s2, "chebyshev bound at c=" + std::to_string(c));
            checks += 2;
        }
    }
    o.detail << ", " << checks << " tail checks, worst excess " << worst;
}

void criterion_synthesis(Outcome& o)
{
    std::mt19937_64 gen(4242);
    std::uniform_int_distribution<int> dim(1, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = dim(gen);
        const int m = dim(gen);
        Matrix A, B;
        oracle::random_controllable(gen, n, m, A, B);
        const Matrix Q = oracle::random_spd(gen, n, 0.5);
        const Matrix R = oracle::random_spd(gen, m, 0.5);
        const Matrix P = solve_dare(A, B, Q, R);
        worst = std::max(worst, dare_residual(A, B, Q, R, P));
    }
    const Matrix one = Matrix::Identity(1, 1);
    const double golden = solve_dare(one, one, one, one)(0, 0);
    const double golden_err = std::abs(golden - (1.0 + std::sqrt(5.0)) / 2.0);
    const auto cov = propagate_covariance(0.5 * one, one, one, 3);
    const double hand[] = {0.0, 1.0, 1.25, 1.3125};
    double cov_err = 0.0;
    for (int k = 0; k <= 3; ++k) cov_err = std::max(cov_err, std::abs(cov.sigmas[static_cast<std::size_t>(k)](0, 0) - hand[k]));
    o.detail << "worst DARE residual " << worst << ", golden error " << golden_err << ", covariance error " << cov_err;
    o.require(worst <= 1e-8, "DARE residual <= 1e-8");
    o.require(golden_err <= 1e-9, "golden case");
    o.require(cov_err <= 1e-15, "covariance hand values");
}

double kkt_max(const QuadraticProgram& qp, const QpSolution& sol)
{
    const auto r = kkt_residuals(qp, sol);
    return std::max({r.stationarity, r.primal, r.dual, r.complementarity});
}

void criterion_qp(Outcome& o)
{
    std::mt19937_64 gen(7);
    int solved = 0;
    double worst_kkt = 0.0;

    // Grid-oracle agreement.
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_int_distribution<int> nrows(1, 5);
    double worst_grid = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = dim(gen);
        const int r = nrows(gen);
        QuadraticProgram qp;
        qp.H = oracle::random_spd(gen, d, 0.5);
        qp.f = oracle::random_matrix(gen, d, 1, 3.0);
        const Matrix G = oracle::random_matrix(gen, r, d);
        const Vector slack = (oracle::random_matrix(gen, r, 1, 0.5).array().abs() + 0.1).matrix();
        qp.G.resize(r + 2 * d, d);
        qp.G << G, Matrix::Identity(d, d), -Matrix::Identity(d, d);
        qp.h.resize(r + 2 * d);
        qp.h << slack, Vector::Constant(2 * d, 2.0);
        const auto sol = solve_qp(qp);
        o.require(sol.status == QpStatus::Optimal, "random QP solved");
        const auto grid = oracle::qp_grid_search(qp, 2.0, d == 3 ? 1e-4 : 1e-5);
        worst_grid = std::max(worst_grid, std::abs(grid.objective - sol.objective));
        worst_kkt = std::max(worst_kkt, kkt_max(qp, sol));
        ++solved;
    }

    // Condensation against rollout.
    double worst_rollout = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 4;
        const int m = 1 + trial % 2;
        OcpSpec s;
        s.horizon = 1 + trial % 9;
        s.A = oracle::random_matrix(gen, n, n, 0.9);
        s.B = oracle::random_matrix(gen, n, m);
        s.Q = oracle::random_spd(gen, n);
        s.R = oracle::random_spd(gen, m);
        s.u_min = Vector::Constant(m, -1.0);
        s.u_max = Vector::Constant(m, 1.0);
        s.K = oracle::random_matrix(gen, m, n, 0.3);
        s.x0 = oracle::random_matrix(gen, n, 1, 2.0);
        s.halfspaces.push_back({oracle::random_matrix(gen, n, 1), 1.5});
        s.margins.push_back(std::vector<double>(static_cast<std::size_t>(s.horizon), 0.1));
        const auto qp = condense(s);
        const Vector z = oracle::random_matrix(gen, qp.num_variables(), 1);
        const double ref = oracle::rollout_cost(s, z);
        worst_rollout = std::max(worst_rollout, std::abs(qp.objective(z) - ref) / (1.0 + std::abs(ref)));
        const Vector rows = oracle::rollout_constraint_values(s, z);
        worst_rollout = std::max(worst_rollout, (qp.G * z - qp.h - rows).lpNorm<Eigen::Infinity>() /
                                                    (1.0 + rows.lpNorm<Eigen::Infinity>()));
        const auto sol = solve_qp(qp);
        if (sol.status == QpStatus::Optimal) {
            worst_kkt = std::max(worst_kkt, kkt_max(qp, sol));
            ++solved;
        }
    }

    // Every QP of a closed-loop run in each mode.
    const auto cfg = default_config();
    for (auto mode : {ControllerMode::NominalNoStateConstraint, ControllerMode::NominalWithStateConstraint,
                      ControllerMode::SmpcGaussian, ControllerMode::SmpcCantelli}) {
        Controller c(make_controller_setup(cfg, mode));
        RngState rng(3);
        const auto rec = run_closed_loop(c, cfg.disturbance, cfg.mpc.x0, 100, rng);
        for (int t = 0; t < rec.steps(); ++t) {
            auto qp = c.condenser().build(rec.states[static_cast<std::size_t>(t)]);
            if (rec.slack_used[static_cast<std::size_t>(t)]) {
                qp = add_state_slack(qp, c.condenser().first_state_row(), kSlackPenalty);
            }
            const auto sol = solve_qp(qp);
            o.require(sol.status == QpStatus::Optimal, "closed-loop QP solved");
            worst_kkt = std::max(worst_kkt, kkt_max(qp, sol));
            ++solved;
        }
    }

    o.detail << solved << " QPs, worst KKT " << worst_kkt << ", worst grid gap " << worst_grid
             << ", worst rollout mismatch " << worst_rollout;
    o.require(worst_kkt <= 1e-6, "KKT residuals <= 1e-6");
    o.require(worst_grid <= 1e-3, "grid agreement 1e-3");
    o.require(worst_rollout <= 1e-9, "rollout equivalence 1e-9");
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion_reproducibility(Outcome& o)
{
    const fs::path root = fs::temp_directory_path() / ("smpc_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    auto run_into = [&](const std::string& tag) {
        const fs::path dir = root / tag;
        fs::create_directories(dir);
        std::ostringstream out;
        std::ostringstream err;
        int codes = 0;
        for (const char* mode : {"nominal-free", "nominal-constrained", "smpc-gaussian", "smpc-cantelli"}) {
            codes += cli::run({"simulate", "--mode", mode, "--seed", "11", "--out", (dir / (std::string(mode) + ".csv")).string()}, out, err);
        }
        codes += cli::run({"montecarlo", "--mode", "smpc-gaussian", "--trials", "50", "--seed", "3", "--out", dir.string()}, out, err);
        codes += cli::run({"montecarlo", "--mode", "smpc-cantelli", "--trials", "50", "--seed", "3", "--threads", tag == "a" ? "1" : "3",
                           "--out", (dir / "cantelli").string()}, out, err);
        codes += cli::run({"tightening-compare", "--out", (dir / "tightening.csv").string()}, out, err);
        std::ostringstream gains_out;
        codes += cli::run({"gains"}, gains_out, err);
        std::ofstream(dir / "gains.txt", std::ios::binary) << gains_out.str();
        return codes;
    };
    const int codes = run_into("a") + run_into("b");
    o.require(codes == 0, "all commands exit 0");
    int files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
        o.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
                  "identical " + fs::relative(entry.path(), root / "a").string());
        ++files;
    }
    o.detail << files << " files compared byte for byte";
    o.require(files == 12, "12 output files");
    fs::remove_all(root);
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"scenario reproduction", criterion_scenario},
        {"margin establishment", criterion_margin},
        {"violation calibration", criterion_calibration},
        {"tightening dominance", criterion_dominance},
        {"probability kernel", criterion_kernel},
        {"synthesis", criterion_synthesis},
        {"QP and condensation", criterion_qp},
        {"reproducibility", criterion_reproducibility},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            check(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index++ << "] " << name << ": " << o.detail.str();
        for (const auto& f : o.failures) std::cout << " | failed: " << f;
        std::cout << std::endl;
        failures += o.pass ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
