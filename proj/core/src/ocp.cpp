#include "smpc/ocp.hpp"

#include <string>

#include "smpc/errors.hpp"

namespace smpc {

void OcpSpec::validate() const
{
    if (horizon < 1) {
        throw ConfigError("OCP horizon must be at least 1");
    }
    const auto n = A.rows();
    const auto m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
        R.cols() != m) {
        throw ConfigError("OCP system or weight dimensions are inconsistent");
    }
    if (u_min.size() != m || u_max.size() != m) {
        throw ConfigError("OCP input bounds have wrong dimension");
    }
    if (K.rows() != m || K.cols() != n) {
        throw ConfigError("OCP feedback K must be " + std::to_string(m) + "x" + std::to_string(n));
    }
    if (x0.size() != n) {
        throw ConfigError("OCP initial state has wrong dimension");
    }
    if (margins.size() != halfspaces.size()) {
        throw ConfigError("OCP needs one margin list per half-space");
    }
    for (std::size_t i = 0; i < halfspaces.size(); ++i) {
        if (halfspaces[i].g.size() != n) {
            throw ConfigError("OCP half-space normal has wrong dimension");
        }
        if (margins[i].size() != static_cast<std::size_t>(horizon)) {
            throw ConfigError("OCP margins must cover steps 1..N");
        }
    }
}

OcpCondenser::OcpCondenser(const OcpSpec& spec)
{
    spec.validate();
    const int N = spec.horizon;
    const auto n = spec.A.rows();
    const auto m = spec.B.cols();
    const auto d = N * m;
    const auto nh = static_cast<Eigen::Index>(spec.halfspaces.size());
    horizon_ = N;
    input_dim_ = static_cast<int>(m);
    num_halfspaces_ = static_cast<int>(nh);

    const Matrix Phi = spec.A - spec.B * spec.K;

    // x_k = Sx * x0 + Sz * z,  u_k = Ux * x0 + Uz * z.
    Matrix Sx = Matrix::Identity(n, n);
    Matrix Sz = Matrix::Zero(n, d);
    H_ = Matrix::Zero(d, d);
    F_ = Matrix::Zero(d, n);
    C_ = Matrix::Zero(n, n);
    input_map_x0_.resize(d, n);
    input_map_z_.resize(d, d);
    std::vector<Matrix> state_x0;
    std::vector<Matrix> state_z;
    state_x0.reserve(static_cast<std::size_t>(N) + 1);
    state_z.reserve(static_cast<std::size_t>(N) + 1);

    for (int k = 0; k < N; ++k) {
        Matrix Ux = -spec.K * Sx;
        Matrix Uz = -spec.K * Sz;
        Uz.middleCols(k * m, m) += Matrix::Identity(m, m);
        input_map_x0_.middleRows(k * m, m) = Ux;
        input_map_z_.middleRows(k * m, m) = Uz;

        H_ += 2.0 * (Sz.transpose() * spec.Q * Sz + Uz.transpose() * spec.R * Uz);
        F_ += 2.0 * (Sz.transpose() * spec.Q * Sx + Uz.transpose() * spec.R * Ux);
        C_ += Sx.transpose() * spec.Q * Sx + Ux.transpose() * spec.R * Ux;

        state_x0.push_back(Sx);
        state_z.push_back(Sz);
        Sz = Phi * Sz;
        Sz.middleCols(k * m, m) += spec.B;
        Sx = Phi * Sx;
    }
    state_x0.push_back(Sx);
    state_z.push_back(Sz);
    H_ = 0.5 * (H_ + H_.transpose());
    C_ = 0.5 * (C_ + C_.transpose());

    first_state_row_ = static_cast<int>(2 * d);
    const auto rows = 2 * d + N * nh;
    G_ = Matrix::Zero(rows, d);
    h0_ = Vector::Zero(rows);
    W_ = Matrix::Zero(rows, n);
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < m; ++j) {
            const auto row = k * m + j;
            const int up = input_row(k, j, true);
            const int lo = input_row(k, j, false);
            G_.row(up) = input_map_z_.row(row);
            h0_(up) = spec.u_max(j);
            W_.row(up) = -input_map_x0_.row(row);
            G_.row(lo) = -input_map_z_.row(row);
            h0_(lo) = -spec.u_min(j);
            W_.row(lo) = input_map_x0_.row(row);
        }
    }
    for (int k = 1; k <= N; ++k) {
        for (Eigen::Index i = 0; i < nh; ++i) {
            const auto& hs = spec.halfspaces[static_cast<std::size_t>(i)];
            const int row = state_row(k, static_cast<int>(i));
            G_.row(row) = hs.g.transpose() * state_z[static_cast<std::size_t>(k)];
            h0_(row) = hs.h - spec.margins[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - 1)];
            W_.row(row) = -hs.g.transpose() * state_x0[static_cast<std::size_t>(k)];
        }
    }
}

int OcpCondenser::input_row(int k, int j, bool upper) const
{
    return 2 * (k * input_dim_ + j) + (upper ? 0 : 1);
}

int OcpCondenser::state_row(int k, int i) const
{
    return first_state_row_ + (k - 1) * num_halfspaces_ + i;
}

QuadraticProgram OcpCondenser::build(const Vector& x0) const
{
    if (x0.size() != F_.cols()) {
        throw ConfigError("initial state has wrong dimension");
    }
    QuadraticProgram qp;
    qp.H = H_;
    qp.f = linear_term(x0);
    qp.G = G_;
    qp.h = rhs(x0);
    qp.constant = constant(x0);
    return qp;
}

Vector OcpCondenser::applied_inputs(const Vector& x0, const Vector& z) const
{
    return input_map_x0_ * x0 + input_map_z_ * z;
}

QuadraticProgram condense(const OcpSpec& spec)
{
    return OcpCondenser(spec).build(spec.x0);
}

QuadraticProgram add_state_slack(const QuadraticProgram& qp, int first_state_row, double weight)
{
    const auto d = qp.H.rows();
    const auto r = qp.G.rows();
    QuadraticProgram out;
    out.H = Matrix::Zero(d + 1, d + 1);
    out.H.topLeftCorner(d, d) = qp.H;
    out.H(d, d) = 2.0 * weight;
    out.f = Vector::Zero(d + 1);
    out.f.head(d) = qp.f;
    out.G = Matrix::Zero(r + 1, d + 1);
    out.G.topLeftCorner(r, d) = qp.G;
    for (Eigen::Index i = first_state_row; i < r; ++i) {
        out.G(i, d) = -1.0;
    }
    out.G(r, d) = -1.0;
    out.h = Vector::Zero(r + 1);
    out.h.head(r) = qp.h;
    out.constant = qp.constant;
    return out;
}

}  // namespace smpc
