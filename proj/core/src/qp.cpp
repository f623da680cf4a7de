#include "smpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

constexpr double kRegularization = 1e-9;
constexpr double kFeasibilityTolerance = 1e-11;
constexpr double kStepTolerance = 1e-13;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double QuadraticProgram::objective(const Vector& z) const
{
    return 0.5 * z.dot(H * z) + f.dot(z) + constant;
}

const char* to_string(QpStatus status)
{
    switch (status) {
    case QpStatus::Optimal:
        return "optimal";
    case QpStatus::Infeasible:
        return "infeasible";
    case QpStatus::MaxIter:
        return "max_iter";
    }
    return "unknown";
}

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol)
{
    KktResiduals out;
    const Vector& z = sol.z_star;
    Vector lambda = sol.multipliers.size() == qp.num_rows()
                        ? sol.multipliers
                        : Vector::Zero(qp.num_rows()).eval();
    Vector grad = qp.H * z + qp.f;
    if (qp.num_rows() > 0) {
        grad += qp.G.transpose() * lambda;
        const Vector slack = qp.G * z - qp.h;
        out.primal = std::max(0.0, slack.maxCoeff());
        out.dual = std::max(0.0, (-lambda).maxCoeff());
        out.complementarity = lambda.cwiseProduct(slack).cwiseAbs().maxCoeff();
    }
    out.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

DualActiveSetSolver::DualActiveSetSolver(const Matrix& H) : H_(H)
{
    const auto d = H.rows();
    if (H.cols() != d) {
        throw ConfigError("QP Hessian must be square");
    }
    if (d > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff())) {
        throw ConfigError("QP Hessian must be symmetric");
    }
    Matrix Hs = 0.5 * (H + H.transpose());
    const double min_eig = min_symmetric_eigenvalue(Hs);
    if (min_eig < -1e-8) {
        throw ConfigError("QP Hessian must be positive semidefinite");
    }
    if (min_eig < kRegularization) {
        Hs += kRegularization * Matrix::Identity(d, d);
    }
    Eigen::LLT<Matrix> llt(Hs);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("QP Hessian factorization failed");
    }
    L_inv_ = llt.matrixL().solve(Matrix::Identity(d, d));
}

QpSolution DualActiveSetSolver::solve(const Vector& f, const Matrix& G, const Vector& h,
                                      double constant, std::span<const int> warm_start) const
{
    const auto d = H_.rows();
    const auto r = G.rows();
    if (f.size() != d || G.cols() != d || h.size() != r) {
        throw ConfigError("QP data has inconsistent dimensions");
    }

    QpSolution sol;
    sol.multipliers = Vector::Zero(r);

    auto finish = [&](Vector z, QpStatus status, std::vector<int> active, const Vector& u) {
        for (std::size_t j = 0; j < active.size(); ++j) {
            sol.multipliers(active[j]) = u(static_cast<Eigen::Index>(j));
        }
        sol.objective = 0.5 * z.dot(H_ * z) + f.dot(z) + constant;
        sol.z_star = std::move(z);
        sol.status = status;
        sol.active_set = std::move(active);
        return sol;
    };

    // Presolve: a zero row with negative bound can never be satisfied.
    for (Eigen::Index i = 0; i < r; ++i) {
        if (G.row(i).isZero(0.0) && h(i) < -kFeasibilityTolerance) {
            sol.message = "row " + std::to_string(i) + " reads 0 <= " + std::to_string(h(i));
            return finish(Vector::Zero(d), QpStatus::Infeasible, {}, Vector());
        }
    }

    // Unconstrained minimizer: z = -H^{-1} f = -L^{-T} L^{-1} f.
    Vector z = -(L_inv_.transpose() * (L_inv_ * f));
    std::vector<int> active;
    Vector u(0);
    std::vector<char> in_active(static_cast<std::size_t>(r), 0);
    std::vector<char> hinted(static_cast<std::size_t>(r), 0);
    for (int idx : warm_start) {
        if (idx >= 0 && idx < r) {
            hinted[static_cast<std::size_t>(idx)] = 1;
        }
    }
    Vector row_scale(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        row_scale(i) = 1.0 + G.row(i).norm() + std::abs(h(i));
    }

    const int max_iterations = 50 * static_cast<int>(d + r) + 100;
    int iterations = 0;

    while (true) {
        // Pick the most violated inactive row, hinted rows first.
        int p = -1;
        double worst = 0.0;
        bool worst_hinted = false;
        for (Eigen::Index i = 0; i < r; ++i) {
            if (in_active[static_cast<std::size_t>(i)]) {
                continue;
            }
            const double violation = (G.row(i).dot(z) - h(i)) / row_scale(i);
            if (violation <= kFeasibilityTolerance) {
                continue;
            }
            const bool is_hinted = hinted[static_cast<std::size_t>(i)] != 0;
            if (p < 0 || (is_hinted && !worst_hinted) ||
                (is_hinted == worst_hinted && violation > worst)) {
                p = static_cast<int>(i);
                worst = violation;
                worst_hinted = is_hinted;
            }
        }
        if (p < 0) {
            sol.iterations = iterations;
            return finish(std::move(z), QpStatus::Optimal, std::move(active), u);
        }

        // Constraint p in >= form: n_p^T z >= b_p with n_p = -G_p^T, b_p = -h_p.
        const Vector n_p = -G.row(p).transpose();
        Vector u_plus(u.size() + 1);
        u_plus.head(u.size()) = u;
        u_plus(u.size()) = 0.0;

        while (true) {
            if (++iterations > max_iterations) {
                sol.iterations = iterations;
                sol.message = "iteration limit reached";
                return finish(std::move(z), QpStatus::MaxIter, std::move(active),
                              u_plus.head(static_cast<Eigen::Index>(active.size())));
            }
            const auto q = static_cast<Eigen::Index>(active.size());
            Matrix N(d, q);
            for (Eigen::Index j = 0; j < q; ++j) {
                N.col(j) = -G.row(active[static_cast<std::size_t>(j)]).transpose();
            }
            // L^{-1} N = Q [R; 0]  and  J = L^{-T} Q.
            Matrix J;
            Matrix R;
            if (q > 0) {
                Eigen::HouseholderQR<Matrix> qr(L_inv_ * N);
                J = L_inv_.transpose() * qr.householderQ();
                R = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
            } else {
                J = L_inv_.transpose();
            }
            const Vector dvec = J.transpose() * n_p;
            const Vector step = J.rightCols(d - q) * dvec.tail(d - q);
            Vector dual_step = Vector::Zero(q);
            if (q > 0) {
                dual_step = R.triangularView<Eigen::Upper>().solve(dvec.head(q));
            }

            const double slack_p = n_p.dot(z) + h(p);
            const double curvature = step.dot(n_p);
            double t2 = kInf;
            if (step.norm() > kStepTolerance * (1.0 + n_p.norm()) && curvature > 0.0) {
                t2 = -slack_p / curvature;
            }
            double t1 = kInf;
            Eigen::Index drop = -1;
            for (Eigen::Index j = 0; j < q; ++j) {
                if (dual_step(j) > kStepTolerance) {
                    const double ratio = u_plus(j) / dual_step(j);
                    if (ratio < t1) {
                        t1 = ratio;
                        drop = j;
                    }
                }
            }

            if (t1 == kInf && t2 == kInf) {
                sol.iterations = iterations;
                sol.message = "constraint " + std::to_string(p) +
                              " cannot be satisfied together with the active set";
                return finish(std::move(z), QpStatus::Infeasible, std::move(active),
                              u_plus.head(q));
            }

            const double t = std::min(t1, t2);
            if (t2 < kInf) {
                z += t * step;
            }
            u_plus.head(q) -= t * dual_step;
            u_plus(q) += t;

            if (t2 <= t1) {
                active.push_back(p);
                in_active[static_cast<std::size_t>(p)] = 1;
                u = u_plus;
                break;
            }
            in_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
            active.erase(active.begin() + drop);
            Vector shrunk(u_plus.size() - 1);
            shrunk << u_plus.head(drop), u_plus.tail(u_plus.size() - drop - 1);
            u_plus = std::move(shrunk);
        }
    }
}

QpSolution solve_qp(const QuadraticProgram& qp, std::span<const int> warm_start)
{
    DualActiveSetSolver solver(qp.H);
    QpSolution sol = solver.solve(qp.f, qp.G, qp.h, qp.constant, warm_start);
    sol.objective = qp.objective(sol.z_star);
    return sol;
}

}  // namespace smpc
