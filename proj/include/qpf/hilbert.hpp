#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qpf/qstate.hpp"

namespace qpf {

using Operator = Eigen::MatrixXcd;
using State = Eigen::VectorXcd;
using complex = std::complex<double>;

// Truncated atom (x) cavity space. Basis ordering is atom-major:
// index = atom*n_fock + n with atom 0 = |+>, atom 1 = |->.
struct HilbertDims {
    int n_fock = 25;

    int total() const { return 2 * n_fock; }
    bool valid() const { return n_fock >= 2; }
};

// Cavity annihilation operator on the n_fock-dimensional factor:
// (n-1, n) entry = sqrt(n).
Operator build_annihilation(const HilbertDims& dims);

// Atomic operators in the ordered basis (|+>, |->):
// mu = |-><+|, mu_dagger = |+><-|, mu_z = [mu_dagger, mu] = diag(+1, -1).
struct AtomicOps {
    Operator mu;
    Operator mu_dagger;
    Operator mu_z;
};
AtomicOps build_atomic_ops();

// Kronecker product atom_op (x) cavity_op, consistent with atom-major ordering.
// Throws std::invalid_argument on dimension mismatch.
Operator embed(const Operator& atom_op, const Operator& cavity_op);

// <psi|A|psi> resp. Tr[A rho]. Throws std::invalid_argument on mismatch.
complex expectation(const State& psi, const Operator& op);
complex expectation_density(const Operator& rho, const Operator& op);

// All composite-space operators the simulator and filters need, built once.
struct CompositeOps {
    HilbertDims dims;
    Operator a;        // cavity annihilation, embedded
    Operator n_photon; // a^dag a
    Operator x;        // a^dag + a
    Operator y;        // i(a^dag - a)
    Operator mu;
    Operator mu_dagger;
    Operator mu_z;
    Operator mu_z_x;   // mu_z (x) (a^dag + a)
    Operator pop_plus; // mu_dagger mu = |+><+| (x) 1
};
CompositeOps build_composite_ops(const HilbertDims& dims);

// Truncated coherent-state vector |i y/2> on the cavity factor, amplitudes
// c_n = e^{-y^2/8} (iy/2)^n / sqrt(n!), via the stable multiplicative
// recurrence c_n = c_{n-1} * (iy/2)/sqrt(n).
Eigen::VectorXcd coherent_vector(double y, int n_fock);

// |atom> (x) |0>, atom in {+1 -> |+>, -1 -> |->}.
State basis_state(const HilbertDims& dims, int atom_sign, int fock_n = 0);

// Q_pm(y) = <pm, iy/2| rho |pm, iy/2> on the grid, rescaled to total mass 1.
// Sets truncation_warning when the grid reaches beyond |y|/2 <= 0.9 sqrt(n_fock).
QState state_to_Q(const Operator& rho, const HilbertDims& dims, const QGrid& grid);

} // namespace qpf
