#pragma once

#include <vector>

#include "smpc/model.hpp"
#include "smpc/qp.hpp"

namespace smpc {

/**
 * @brief Finite-horizon OCP in the decision sequence z = [v_0; ...; v_{N-1}].
 *
 * Predictions follow x_{k+1} = (A - B K) x_k + B v_k from x_0 = x0 and the
 * applied input is u_k = -K x_k + v_k. K = 0 gives the nominal problem in U.
 * Cost: sum_{k=0}^{N-1} x_k^T Q x_k + u_k^T R u_k, no terminal term.
 * Rows: u_min <= u_k <= u_max for k = 0..N-1 and
 * g_i^T x_k <= h_i - margins[i][k-1] for k = 1..N.
 */
struct OcpSpec {
    int horizon = 1;
    Matrix A;
    Matrix B;
    Matrix Q;
    Matrix R;
    Vector u_min;
    Vector u_max;
    std::vector<HalfSpace> halfspaces;
    /// margins[i] has one entry per prediction step k = 1..N.
    std::vector<std::vector<double>> margins;
    Matrix K;
    Vector x0;

    void validate() const;
};

/**
 * @brief Precomputed condensation of an OcpSpec for repeated initial states.
 *
 * The Hessian and constraint matrix do not depend on x0; the linear term,
 * constant and right-hand side are affine in x0.
 */
class OcpCondenser {
public:
    explicit OcpCondenser(const OcpSpec& spec);

    QuadraticProgram build(const Vector& x0) const;

    Vector linear_term(const Vector& x0) const { return F_ * x0; }
    Vector rhs(const Vector& x0) const { return h0_ + W_ * x0; }
    double constant(const Vector& x0) const { return x0.dot(C_ * x0); }

    const Matrix& hessian() const { return H_; }
    const Matrix& constraints() const { return G_; }

    int num_variables() const { return static_cast<int>(H_.rows()); }
    int first_state_row() const { return first_state_row_; }
    int num_state_rows() const { return static_cast<int>(G_.rows()) - first_state_row_; }

    /// Row index of the upper (upper = true) or lower bound on input j at step k.
    int input_row(int k, int j, bool upper) const;
    /// Row index of half-space i at prediction step k (1-based, k = 1..N).
    int state_row(int k, int i) const;

    /// Applied inputs u_0 ... u_{N-1} stacked, for decision z from x0.
    Vector applied_inputs(const Vector& x0, const Vector& z) const;

    int horizon() const { return horizon_; }
    int input_dim() const { return input_dim_; }
    int num_halfspaces() const { return num_halfspaces_; }

private:
    int horizon_;
    int input_dim_;
    int num_halfspaces_;
    int first_state_row_;
    Matrix H_;
    Matrix F_;
    Matrix C_;
    Matrix G_;
    Vector h0_;
    Matrix W_;
    Matrix input_map_x0_;  // stacked u = input_map_x0_ x0 + input_map_z_ z
    Matrix input_map_z_;
};

/// Dense QP for spec.x0.
QuadraticProgram condense(const OcpSpec& spec);

/**
 * Adds one slack s >= 0 to every state row (rows >= first_state_row) with
 * penalty weight * s^2. The slack is the last decision variable.
 */
QuadraticProgram add_state_slack(const QuadraticProgram& qp, int first_state_row, double weight);

}  // namespace smpc
