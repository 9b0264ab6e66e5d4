#pragma once

#include <string>
#include <vector>

#include "qpf/hilbert.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// Per-step estimates of a filter run; arrays have length n_steps+1 so that
// entry k is the estimate before consuming increment k (entry 0 = initial).
struct FilterEstimates {
    double dt = 0.0;
    std::string backend;
    std::uint64_t record_seed = 0;
    std::vector<double> p_plus;
    std::vector<double> y_mean;
    std::vector<double> renorm_log; // per-step renormalization factors
};

struct QStepLog {
    double renorm = 1.0;       // mass before renormalization
    double min_over_max = 0.0; // after the step
};

// Ito-Euler step of the Q-function filter on the grid, second-order central
// differences for both derivatives and the measurement stencil, Dirichlet
// zero boundary, renormalized to unit mass each step. Throws on mass <= 0.
class QPdeStepper {
public:
    QPdeStepper(const ModelParams& params, const QGrid& grid, double dt,
                bool renormalize = true);

    QStepLog step(QState& state, double dY) const;

    // p_plus = integral Q+ / m, y_mean = integral y (Q+ + Q-) / m
    static std::pair<double, double> estimates(const QState& state);

private:
    ModelParams p_;
    QGrid grid_;
    double dt_;
    bool renormalize_;
    mutable std::vector<double> scratch_plus_, scratch_minus_;
};

// Ito-Euler step of the density-operator filter (normalized innovation form),
// re-Hermitized and trace-renormalized each step. Throws on trace <= 0.
class DensityStepper {
public:
    DensityStepper(const ModelParams& params, const HilbertDims& dims, double dt);

    QStepLog step(Operator& rho, double dY) const;

    std::pair<double, double> estimates(const Operator& rho) const;

    const CompositeOps& ops() const { return ops_; }

private:
    ModelParams p_;
    double dt_;
    CompositeOps ops_;
};

enum class QFilterBackend { pde, density };

struct QFilterRunResult {
    FilterEstimates estimates;
    std::int64_t negativity_steps = 0; // steps with min/max below -1e-6
    double worst_min_over_max = 0.0;
};

QFilterRunResult run_qfilter(const ObservationRecord& record, const QState& initial,
                             const QGrid& grid);
QFilterRunResult run_qfilter_density(const ObservationRecord& record,
                                     const Operator& initial_rho,
                                     const HilbertDims& dims);

} // namespace qpf
