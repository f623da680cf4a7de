#include "smpc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "smpc/errors.hpp"

namespace smpc {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& j, const char* name)
{
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string(name) + ": expected a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix M;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) {
            throw ConfigError(std::string(name) + ": every row must be an array");
        }
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            if (cols == 0) {
                throw ConfigError(std::string(name) + ": rows must not be empty");
            }
            M.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(std::string(name) + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ConfigError(std::string(name) + ": entries must be numbers");
            }
            M(i, c) = v.get<double>();
        }
    }
    return M;
}

Vector vector_from_json(const json& j, const char* name)
{
    if (!j.is_array()) {
        throw ConfigError(std::string(name) + ": expected an array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw ConfigError(std::string(name) + ": entries must be numbers");
        }
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json to_json(const Matrix& M)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            row.push_back(M(i, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

json to_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

void reject_unknown_keys(const json& block, const char* name,
                         std::initializer_list<std::string_view> known)
{
    if (!block.is_object()) {
        throw ConfigError(std::string(name) + ": expected an object");
    }
    for (const auto& item : block.items()) {
        bool ok = false;
        for (auto k : known) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            throw ConfigError(std::string(name) + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
T number(const json& j, const char* name)
{
    if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) {
            throw ConfigError(std::string(name) + ": expected an integer");
        }
    } else if (!j.is_number()) {
        throw ConfigError(std::string(name) + ": expected a number");
    }
    return j.get<T>();
}

std::string_view disturbance_name(DisturbanceKind kind)
{
    switch (kind) {
    case DisturbanceKind::GaussianZeroMean:
        return "gaussian";
    case DisturbanceKind::GaussianWithMean:
        return "gaussian-mean";
    case DisturbanceKind::GeneralZeroMean:
        return "general";
    }
    return "unknown";
}

void apply_json(RunConfig& c, const json& root)
{
    reject_unknown_keys(root, "config",
                        {"system", "constraints", "mpc", "risk", "experiment", "output"});

    if (root.contains("system")) {
        const json& s = root["system"];
        reject_unknown_keys(s, "system",
                            {"A", "B", "D", "sigma_w", "mean_w", "disturbance", "variance_w"});
        if (s.contains("A")) c.system.A = matrix_from_json(s["A"], "system.A");
        if (s.contains("B")) c.system.B = matrix_from_json(s["B"], "system.B");
        if (s.contains("D")) c.system.D = matrix_from_json(s["D"], "system.D");
        if (s.contains("sigma_w")) c.system.sigma_w = matrix_from_json(s["sigma_w"], "system.sigma_w");
        if (s.contains("mean_w")) c.system.mean_w = vector_from_json(s["mean_w"], "system.mean_w");
        if (s.contains("variance_w")) {
            c.disturbance.variance_w = number<double>(s["variance_w"], "system.variance_w");
        }
        if (s.contains("disturbance")) {
            if (!s["disturbance"].is_string()) {
                throw ConfigError("system.disturbance: expected a string");
            }
            const auto name = s["disturbance"].get<std::string>();
            bool found = false;
            for (auto kind : {DisturbanceKind::GaussianZeroMean, DisturbanceKind::GaussianWithMean,
                              DisturbanceKind::GeneralZeroMean}) {
                if (disturbance_name(kind) == name) {
                    c.disturbance.kind = kind;
                    found = true;
                }
            }
            if (!found) {
                throw ConfigError("system.disturbance: unknown kind '" + name + "'");
            }
        }
        if (c.disturbance.kind == DisturbanceKind::GeneralZeroMean && !s.contains("sigma_w") &&
            c.disturbance.variance_w > 0.0) {
            c.system.sigma_w = c.disturbance.variance_w *
                               Matrix::Identity(c.system.D.cols(), c.system.D.cols());
        }
        if (!s.contains("mean_w") && c.system.mean_w.size() != c.system.D.cols()) {
            c.system.mean_w = Vector::Zero(c.system.D.cols());
        }
    }

    if (root.contains("constraints")) {
        const json& s = root["constraints"];
        reject_unknown_keys(s, "constraints", {"u_min", "u_max", "state_halfspaces"});
        if (s.contains("u_min")) c.constraints.u_min = vector_from_json(s["u_min"], "constraints.u_min");
        if (s.contains("u_max")) c.constraints.u_max = vector_from_json(s["u_max"], "constraints.u_max");
        if (s.contains("state_halfspaces")) {
            const json& list = s["state_halfspaces"];
            if (!list.is_array()) {
                throw ConfigError("constraints.state_halfspaces: expected an array");
            }
            c.constraints.state_halfspaces.clear();
            for (const json& item : list) {
                reject_unknown_keys(item, "constraints.state_halfspaces[]", {"g", "h"});
                if (!item.contains("g") || !item.contains("h")) {
                    throw ConfigError("constraints.state_halfspaces[]: needs g and h");
                }
                c.constraints.state_halfspaces.push_back(
                    {vector_from_json(item["g"], "g"), number<double>(item["h"], "h")});
            }
        }
    }

    if (root.contains("mpc")) {
        const json& s = root["mpc"];
        reject_unknown_keys(s, "mpc", {"N", "dt", "Q", "R", "steps", "x0", "lqr_Q", "lqr_R"});
        if (s.contains("N")) c.mpc.horizon = number<int>(s["N"], "mpc.N");
        if (s.contains("dt")) c.mpc.dt = number<double>(s["dt"], "mpc.dt");
        if (s.contains("Q")) c.mpc.Q = matrix_from_json(s["Q"], "mpc.Q");
        if (s.contains("R")) c.mpc.R = matrix_from_json(s["R"], "mpc.R");
        if (s.contains("steps")) c.mpc.steps = number<int>(s["steps"], "mpc.steps");
        if (s.contains("x0")) c.mpc.x0 = vector_from_json(s["x0"], "mpc.x0");
        if (s.contains("lqr_Q")) c.mpc.lqr_Q = matrix_from_json(s["lqr_Q"], "mpc.lqr_Q");
        if (s.contains("lqr_R")) c.mpc.lqr_R = matrix_from_json(s["lqr_R"], "mpc.lqr_R");
    }

    if (root.contains("risk")) {
        const json& s = root["risk"];
        reject_unknown_keys(s, "risk", {"p", "p_tilde", "law"});
        const bool has_p = s.contains("p");
        const bool has_tilde = s.contains("p_tilde");
        if (has_p == has_tilde) {
            throw ConfigError("risk: exactly one of p and p_tilde must be given");
        }
        try {
            c.risk.risk = has_p ? RiskParameter::from_p(number<double>(s["p"], "risk.p"))
                                : RiskParameter::from_p_tilde(number<double>(s["p_tilde"], "risk.p_tilde"));
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        if (s.contains("law")) {
            if (!s["law"].is_string()) {
                throw ConfigError("risk.law: expected a string");
            }
            const auto law = s["law"].get<std::string>();
            if (law == "gaussian") {
                c.risk.law = TighteningLaw::GaussianExact;
            } else if (law == "cantelli") {
                c.risk.law = TighteningLaw::CantelliRobust;
            } else {
                throw ConfigError("risk.law: expected 'gaussian' or 'cantelli'");
            }
        }
    }

    if (root.contains("experiment")) {
        const json& s = root["experiment"];
        reject_unknown_keys(s, "experiment", {"trials", "base_seed"});
        if (s.contains("trials")) c.experiment.trials = number<int>(s["trials"], "experiment.trials");
        if (s.contains("base_seed")) {
            if (!s["base_seed"].is_number_unsigned()) {
                throw ConfigError("experiment.base_seed: expected a non-negative integer");
            }
            c.experiment.base_seed = s["base_seed"].get<std::uint64_t>();
        }
    }

    if (root.contains("output")) {
        const json& s = root["output"];
        reject_unknown_keys(s, "output", {"directory", "prefix"});
        if (s.contains("directory")) {
            if (!s["directory"].is_string()) throw ConfigError("output.directory: expected a string");
            c.output.directory = s["directory"].get<std::string>();
        }
        if (s.contains("prefix")) {
            if (!s["prefix"].is_string()) throw ConfigError("output.prefix: expected a string");
            c.output.prefix = s["prefix"].get<std::string>();
        }
    }
}

bool same(const Matrix& a, const Matrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same(const Vector& a, const Vector& b)
{
    return a.size() == b.size() && a == b;
}

bool same(const std::optional<Matrix>& a, const std::optional<Matrix>& b)
{
    return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

}  // namespace

std::string_view to_string(TighteningLaw law)
{
    return law == TighteningLaw::GaussianExact ? "gaussian" : "cantelli";
}

RunConfig default_config()
{
    RunConfig c;
    c.system.A.resize(2, 2);
    c.system.A << 1.0, 0.0075, -0.143, 0.996;
    c.system.B.resize(2, 1);
    c.system.B << 4.798, 0.115;
    c.system.D = Matrix::Identity(2, 2);
    c.system.sigma_w = 0.08 * Matrix::Identity(2, 2);
    c.system.mean_w = Vector::Zero(2);
    c.disturbance.kind = DisturbanceKind::GaussianZeroMean;
    c.disturbance.mean = Vector::Zero(2);
    c.constraints.u_min = Vector::Constant(1, -0.2);
    c.constraints.u_max = Vector::Constant(1, 0.2);
    Vector g(2);
    g << 1.0, 0.0;
    c.constraints.state_halfspaces.push_back({g, 2.8});
    c.mpc.Q = Vector(Eigen::Vector2d(1.0, 10.0)).asDiagonal();
    c.mpc.R = Matrix::Identity(1, 1);
    c.mpc.x0.resize(2);
    c.mpc.x0 << 2.5, 4.8;
    return c;
}

void RunConfig::validate() const
{
    system.validate();
    disturbance.validate();
    const int n = system.state_dim();
    const int m = system.input_dim();
    constraints.validate(n, m);
    if (mpc.horizon < 1) throw ConfigError("mpc.N must be at least 1");
    if (mpc.steps < 1) throw ConfigError("mpc.steps must be at least 1");
    if (!(mpc.dt > 0.0)) throw ConfigError("mpc.dt must be positive");
    if (mpc.Q.rows() != n || mpc.Q.cols() != n) throw ConfigError("mpc.Q must be n x n");
    if (mpc.R.rows() != m || mpc.R.cols() != m) throw ConfigError("mpc.R must be m x m");
    if (mpc.x0.size() != n) throw ConfigError("mpc.x0 must have n entries");
    if (min_symmetric_eigenvalue(mpc.Q) < -1e-10) throw ConfigError("mpc.Q must be PSD");
    if (min_symmetric_eigenvalue(mpc.R) <= 0.0) throw ConfigError("mpc.R must be positive definite");
    if (mpc.lqr_Q && (mpc.lqr_Q->rows() != n || mpc.lqr_Q->cols() != n)) {
        throw ConfigError("mpc.lqr_Q must be n x n");
    }
    if (mpc.lqr_R && (mpc.lqr_R->rows() != m || mpc.lqr_R->cols() != m)) {
        throw ConfigError("mpc.lqr_R must be m x m");
    }
    if (experiment.trials < 1) throw ConfigError("experiment.trials must be at least 1");
    const bool zero_mean = system.mean_w.isZero(0.0);
    if (disturbance.kind != DisturbanceKind::GaussianWithMean && !zero_mean) {
        throw ConfigError("system.mean_w must be zero unless disturbance is 'gaussian-mean'");
    }
    if (disturbance.kind == DisturbanceKind::GeneralZeroMean) {
        const auto q = system.disturbance_dim();
        const Matrix expected = disturbance.variance_w * Matrix::Identity(q, q);
        if ((system.sigma_w - expected).cwiseAbs().maxCoeff() > 1e-12) {
            throw ConfigError("general disturbance requires sigma_w = variance_w * I");
        }
    }
}

RunConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = default_config();
    try {
        apply_json(c, root);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has an invalid value: ") + e.what());
    }
    c.disturbance.mean = c.system.mean_w;
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string dump_config(const RunConfig& c)
{
    json root;
    json& s = root["system"];
    s["A"] = to_json(c.system.A);
    s["B"] = to_json(c.system.B);
    s["D"] = to_json(c.system.D);
    s["sigma_w"] = to_json(c.system.sigma_w);
    s["mean_w"] = to_json(c.system.mean_w);
    s["disturbance"] = std::string(disturbance_name(c.disturbance.kind));
    if (c.disturbance.kind == DisturbanceKind::GeneralZeroMean) {
        s["variance_w"] = c.disturbance.variance_w;
    }

    json& k = root["constraints"];
    k["u_min"] = to_json(c.constraints.u_min);
    k["u_max"] = to_json(c.constraints.u_max);
    k["state_halfspaces"] = json::array();
    for (const auto& hs : c.constraints.state_halfspaces) {
        k["state_halfspaces"].push_back({{"g", to_json(hs.g)}, {"h", hs.h}});
    }

    json& m = root["mpc"];
    m["N"] = c.mpc.horizon;
    m["dt"] = c.mpc.dt;
    m["Q"] = to_json(c.mpc.Q);
    m["R"] = to_json(c.mpc.R);
    m["steps"] = c.mpc.steps;
    m["x0"] = to_json(c.mpc.x0);
    if (c.mpc.lqr_Q) m["lqr_Q"] = to_json(*c.mpc.lqr_Q);
    if (c.mpc.lqr_R) m["lqr_R"] = to_json(*c.mpc.lqr_R);

    root["risk"] = {{"p", c.risk.risk.p()}, {"law", std::string(to_string(c.risk.law))}};
    root["experiment"] = {{"trials", c.experiment.trials}, {"base_seed", c.experiment.base_seed}};
    root["output"] = {{"directory", c.output.directory}, {"prefix", c.output.prefix}};
    return root.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(config)) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

bool operator==(const RunConfig& a, const RunConfig& b)
{
    if (a.constraints.state_halfspaces.size() != b.constraints.state_halfspaces.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.constraints.state_halfspaces.size(); ++i) {
        const auto& x = a.constraints.state_halfspaces[i];
        const auto& y = b.constraints.state_halfspaces[i];
        if (!same(x.g, y.g) || x.h != y.h) {
            return false;
        }
    }
    return same(a.system.A, b.system.A) && same(a.system.B, b.system.B) &&
           same(a.system.D, b.system.D) && same(a.system.sigma_w, b.system.sigma_w) &&
           same(a.system.mean_w, b.system.mean_w) && a.disturbance.kind == b.disturbance.kind &&
           same(a.disturbance.mean, b.disturbance.mean) &&
           a.disturbance.variance_w == b.disturbance.variance_w &&
           same(a.constraints.u_min, b.constraints.u_min) &&
           same(a.constraints.u_max, b.constraints.u_max) && a.mpc.horizon == b.mpc.horizon &&
           a.mpc.dt == b.mpc.dt && same(a.mpc.Q, b.mpc.Q) && same(a.mpc.R, b.mpc.R) &&
           a.mpc.steps == b.mpc.steps && same(a.mpc.x0, b.mpc.x0) &&
           same(a.mpc.lqr_Q, b.mpc.lqr_Q) && same(a.mpc.lqr_R, b.mpc.lqr_R) &&
           a.risk.risk == b.risk.risk && a.risk.law == b.risk.law &&
           a.experiment.trials == b.experiment.trials &&
           a.experiment.base_seed == b.experiment.base_seed &&
           a.output.directory == b.output.directory && a.output.prefix == b.output.prefix;
}

FeedbackSynthesis synthesize(const RunConfig& config)
{
    const Matrix& Q = config.mpc.lqr_Q ? *config.mpc.lqr_Q : config.mpc.Q;
    const Matrix& R = config.mpc.lqr_R ? *config.mpc.lqr_R : config.mpc.R;
    return lqr_gain(config.system.A, config.system.B, Q, R);
}

ControllerSetup make_controller_setup(const RunConfig& config, ControllerMode mode)
{
    ControllerSetup s;
    s.mode = mode;
    s.sys = config.system;
    s.cs = config.constraints;
    s.synth = is_stochastic(mode) ? synthesize(config)
                                  : zero_feedback(config.system.A, config.system.B);
    s.risk = config.risk.risk;
    s.horizon = config.mpc.horizon;
    s.Q = config.mpc.Q;
    s.R = config.mpc.R;
    return s;
}

}  // namespace smpc
