#include "qpf/hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace qpf {

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
    return s * h;
}

double QState::mass() const {
    double h = grid.spacing();
    return trapezoid(q_plus, h) + trapezoid(q_minus, h);
}

double QState::min_over_max() const {
    double mn = 0.0, mx = 0.0;
    for (double v : q_plus) { mn = std::min(mn, v); mx = std::max(mx, v); }
    for (double v : q_minus) { mn = std::min(mn, v); mx = std::max(mx, v); }
    return mx > 0.0 ? mn / mx : 0.0;
}

Operator build_annihilation(const HilbertDims& dims) {
    if (!dims.valid()) throw std::invalid_argument("build_annihilation: n_fock must be >= 2");
    Operator a = Operator::Zero(dims.n_fock, dims.n_fock);
    for (int n = 1; n < dims.n_fock; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

AtomicOps build_atomic_ops() {
    AtomicOps ops;
    ops.mu = Operator::Zero(2, 2);
    ops.mu(1, 0) = 1.0; // |-><+|
    ops.mu_dagger = ops.mu.adjoint();
    ops.mu_z = ops.mu_dagger * ops.mu - ops.mu * ops.mu_dagger;
    return ops;
}

Operator embed(const Operator& atom_op, const Operator& cavity_op) {
    if (atom_op.rows() != 2 || atom_op.cols() != 2)
        throw std::invalid_argument("embed: atom operator must be 2x2");
    if (cavity_op.rows() != cavity_op.cols())
        throw std::invalid_argument("embed: cavity operator must be square");
    const int nf = int(cavity_op.rows());
    Operator out = Operator::Zero(2 * nf, 2 * nf);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (atom_op(i, j) != complex(0.0, 0.0))
                out.block(i * nf, j * nf, nf, nf) = atom_op(i, j) * cavity_op;
    return out;
}

complex expectation(const State& psi, const Operator& op) {
    if (psi.size() != op.rows() || op.rows() != op.cols())
        throw std::invalid_argument("expectation: dimension mismatch");
    return psi.dot(op * psi); // Eigen's dot conjugates the left argument
}

complex expectation_density(const Operator& rho, const Operator& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols())
        throw std::invalid_argument("expectation_density: dimension mismatch");
    return (op * rho).trace();
}

CompositeOps build_composite_ops(const HilbertDims& dims) {
    if (!dims.valid()) throw std::invalid_argument("build_composite_ops: n_fock must be >= 2");
    CompositeOps c;
    c.dims = dims;
    const Operator a1 = build_annihilation(dims);
    const Operator id2 = Operator::Identity(2, 2);
    const Operator idc = Operator::Identity(dims.n_fock, dims.n_fock);
    const AtomicOps at = build_atomic_ops();
    c.a = embed(id2, a1);
    c.n_photon = embed(id2, a1.adjoint() * a1);
    c.x = embed(id2, a1.adjoint() + a1);
    c.y = embed(id2, complex(0, 1) * (a1.adjoint() - a1));
    c.mu = embed(at.mu, idc);
    c.mu_dagger = embed(at.mu_dagger, idc);
    c.mu_z = embed(at.mu_z, idc);
    c.mu_z_x = embed(at.mu_z, a1.adjoint() + a1);
    c.pop_plus = embed(at.mu_dagger * at.mu, idc);
    return c;
}

Eigen::VectorXcd coherent_vector(double y, int n_fock) {
    Eigen::VectorXcd v(n_fock);
    const complex alpha(0.0, y / 2.0);
    complex c = std::exp(-y * y / 8.0);
    v(0) = c;
    for (int n = 1; n < n_fock; ++n) {
        c *= alpha / std::sqrt(double(n));
        v(n) = c;
    }
    return v;
}

State basis_state(const HilbertDims& dims, int atom_sign, int fock_n) {
    if (fock_n < 0 || fock_n >= dims.n_fock)
        throw std::invalid_argument("basis_state: fock level outside truncation");
    State psi = State::Zero(dims.total());
    const int block = (atom_sign > 0) ? 0 : 1;
    psi(block * dims.n_fock + fock_n) = 1.0;
    return psi;
}

QState state_to_Q(const Operator& rho, const HilbertDims& dims, const QGrid& grid) {
    if (rho.rows() != dims.total() || rho.cols() != dims.total())
        throw std::invalid_argument("state_to_Q: dimension mismatch");
    if (!grid.valid()) throw std::invalid_argument("state_to_Q: invalid grid");
    QState out;
    out.grid = grid;
    out.q_plus.resize(grid.n_points);
    out.q_minus.resize(grid.n_points);
    const int nf = dims.n_fock;
    const double y_reliable = 2.0 * 0.9 * std::sqrt(double(nf));
    out.truncation_warning =
        std::max(std::abs(grid.y_min), std::abs(grid.y_max)) > y_reliable;
    for (int j = 0; j < grid.n_points; ++j) {
        const Eigen::VectorXcd v = coherent_vector(grid.point(j), nf);
        const complex qp = v.dot(rho.block(0, 0, nf, nf) * v);
        const complex qm = v.dot(rho.block(nf, nf, nf, nf) * v);
        out.q_plus[j] = qp.real();
        out.q_minus[j] = qm.real();
    }
    const double m = out.mass();
    if (m <= 0.0) throw std::runtime_error("state_to_Q: non-positive mass");
    for (double& v : out.q_plus) v /= m;
    for (double& v : out.q_minus) v /= m;
    return out;
}

} // namespace qpf
