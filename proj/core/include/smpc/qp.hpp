#pragma once

#include <span>
#include <string>
#include <vector>

#include "smpc/model.hpp"

namespace smpc {

/// minimize 1/2 z^T H z + f^T z + constant  subject to  G z <= h.
struct QuadraticProgram {
    Matrix H;
    Vector f;
    Matrix G;
    Vector h;
    double constant = 0.0;

    int num_variables() const { return static_cast<int>(H.rows()); }
    int num_rows() const { return static_cast<int>(G.rows()); }
    double objective(const Vector& z) const;
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

const char* to_string(QpStatus status);

struct QpSolution {
    Vector z_star;
    double objective = 0.0;
    /// Rows of G held with equality at z_star, in the order they entered.
    std::vector<int> active_set;
    /// One multiplier per row of G; zero for inactive rows.
    Vector multipliers;
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
    std::string message;
};

struct KktResiduals {
    double stationarity = 0.0;    ///< ||H z + f + G^T lambda||_inf
    double primal = 0.0;          ///< max(G z - h, 0)
    double dual = 0.0;            ///< max(-lambda, 0)
    double complementarity = 0.0; ///< max |lambda_i (G_i z - h_i)|
};

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol);

/**
 * @brief Dense dual active-set solver (Goldfarb-Idnani) for strictly convex QPs.
 *
 * The Hessian is factorized once at construction so a controller can reuse it
 * across receding-horizon steps where only f and h change. H is regularized by
 * 1e-9 I when its smallest eigenvalue is below 1e-9.
 */
class DualActiveSetSolver {
public:
    explicit DualActiveSetSolver(const Matrix& H);

    /**
     * Rows listed in warm_start are preferred when choosing the next violated
     * constraint to add, which reproduces a previous active set in few steps.
     * Results depend only on the inputs.
     */
    QpSolution solve(const Vector& f, const Matrix& G, const Vector& h, double constant = 0.0,
                     std::span<const int> warm_start = {}) const;

    const Matrix& hessian() const { return H_; }

private:
    Matrix H_;
    Matrix L_inv_;  // inverse of the lower Cholesky factor of the (regularized) Hessian
};

QpSolution solve_qp(const QuadraticProgram& qp, std::span<const int> warm_start = {});

}  // namespace smpc
