#include "qpf/qfilter.hpp"

#include <cmath>
#include <stdexcept>

namespace qpf {

QPdeStepper::QPdeStepper(const ModelParams& params, const QGrid& grid, double dt,
                         bool renormalize)
    : p_(params), grid_(grid), dt_(dt), renormalize_(renormalize) {
    if (!params.valid()) throw std::invalid_argument("QPdeStepper: invalid params");
    if (!grid.valid()) throw std::invalid_argument("QPdeStepper: invalid grid");
    scratch_plus_.resize(grid.n_points);
    scratch_minus_.resize(grid.n_points);
}

QStepLog QPdeStepper::step(QState& state, double dY) const {
    const int n = grid_.n_points;
    const double h = grid_.spacing();
    const double gain = p_.obs_gain();
    const double half_gamma = p_.gamma / 2.0;
    const double two_kappa = 2.0 * p_.kappa;

    auto update = [&](const std::vector<double>& q, const std::vector<double>& q_other,
                      double sign, std::vector<double>& out) {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for (int j = 1; j + 1 < n; ++j) {
            const double y = grid_.point(j);
            const double yl = grid_.point(j - 1);
            const double yr = grid_.point(j + 1);
            const double adv =
                ((sign * p_.g + p_.kappa * yr) * q[j + 1] -
                 (sign * p_.g + p_.kappa * yl) * q[j - 1]) / (2.0 * h);
            const double diff = (q[j + 1] - 2.0 * q[j] + q[j - 1]) / (h * h);
            const double dq = (q[j + 1] - q[j - 1]) / (2.0 * h);
            out[j] = q[j] +
                     dt_ * (half_gamma * (q_other[j] - q[j]) + adv + two_kappa * diff) +
                     gain * (y * q[j] + 2.0 * dq) * dY;
        }
    };
    update(state.q_plus, state.q_minus, +1.0, scratch_plus_);
    update(state.q_minus, state.q_plus, -1.0, scratch_minus_);
    state.q_plus.swap(scratch_plus_);
    state.q_minus.swap(scratch_minus_);

    QStepLog log;
    log.renorm = state.mass();
    if (log.renorm <= 0.0)
        throw std::runtime_error("qfilter_step: mass <= 0 (grid too coarse or dt too large)");
    if (renormalize_) {
        for (double& v : state.q_plus) v /= log.renorm;
        for (double& v : state.q_minus) v /= log.renorm;
    }
    log.min_over_max = state.min_over_max();
    return log;
}

std::pair<double, double> QPdeStepper::estimates(const QState& state) {
    const double h = state.grid.spacing();
    const double m = state.mass();
    if (m <= 0.0) throw std::runtime_error("qfilter_estimates: non-positive mass");
    std::vector<double> y_weighted(state.grid.n_points);
    for (int j = 0; j < state.grid.n_points; ++j)
        y_weighted[j] = state.grid.point(j) * (state.q_plus[j] + state.q_minus[j]);
    const double p_plus = trapezoid(state.q_plus, h) / m;
    const double y_mean = trapezoid(y_weighted, h) / m;
    return {p_plus, y_mean};
}

DensityStepper::DensityStepper(const ModelParams& params, const HilbertDims& dims, double dt)
    : p_(params), dt_(dt), ops_(build_composite_ops(dims)) {
    if (!params.valid()) throw std::invalid_argument("DensityStepper: invalid params");
}

namespace {
// D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c)/2
Operator dissipator(const Operator& c, const Operator& cdag_c, const Operator& rho) {
    return c * rho * c.adjoint() - 0.5 * (cdag_c * rho + rho * cdag_c);
}
} // namespace

QStepLog DensityStepper::step(Operator& rho, double dY) const {
    const double gain = p_.obs_gain();
    const double y_mean = expectation_density(rho, ops_.y).real();
    const Operator id = Operator::Identity(rho.rows(), rho.cols());

    Operator drift = complex(0, -1) * (p_.g / 2.0) * (ops_.mu_z_x * rho - rho * ops_.mu_z_x);
    drift += 2.0 * p_.kappa * dissipator(ops_.a, ops_.n_photon, rho);
    drift += (p_.gamma / 2.0) *
             (dissipator(ops_.mu, ops_.pop_plus, rho) +
              (ops_.mu_z * rho * ops_.mu_z - rho) +
              dissipator(ops_.mu_dagger, id - ops_.pop_plus, rho));

    const Operator innovation_gain =
        complex(0, 1) * (rho * ops_.a.adjoint()) - complex(0, 1) * (ops_.a * rho) -
        y_mean * rho;

    rho += dt_ * drift + gain * (dY - gain * y_mean * dt_) * innovation_gain;
    rho = 0.5 * (rho + rho.adjoint()).eval();

    QStepLog log;
    log.renorm = rho.trace().real();
    if (log.renorm <= 0.0)
        throw std::runtime_error("density_filter_step: trace <= 0");
    rho /= log.renorm;
    return log;
}

std::pair<double, double> DensityStepper::estimates(const Operator& rho) const {
    return {expectation_density(rho, ops_.pop_plus).real(),
            expectation_density(rho, ops_.y).real()};
}

QFilterRunResult run_qfilter(const ObservationRecord& record, const QState& initial,
                             const QGrid& grid) {
    QPdeStepper stepper(record.params, grid, record.dt);
    QFilterRunResult out;
    out.estimates.dt = record.dt;
    out.estimates.backend = "qpde";
    out.estimates.record_seed = record.seed;
    out.estimates.p_plus.reserve(record.n_steps + 1);
    out.estimates.y_mean.reserve(record.n_steps + 1);
    out.estimates.renorm_log.reserve(record.n_steps);

    QState state = initial;
    auto [p0, y0] = QPdeStepper::estimates(state);
    out.estimates.p_plus.push_back(p0);
    out.estimates.y_mean.push_back(y0);
    for (std::int64_t k = 0; k < record.n_steps; ++k) {
        const QStepLog log = stepper.step(state, record.dY[k]);
        out.estimates.renorm_log.push_back(log.renorm);
        if (log.min_over_max < -1e-6) ++out.negativity_steps;
        out.worst_min_over_max = std::min(out.worst_min_over_max, log.min_over_max);
        auto [pp, ym] = QPdeStepper::estimates(state);
        out.estimates.p_plus.push_back(pp);
        out.estimates.y_mean.push_back(ym);
    }
    return out;
}

QFilterRunResult run_qfilter_density(const ObservationRecord& record,
                                     const Operator& initial_rho,
                                     const HilbertDims& dims) {
    DensityStepper stepper(record.params, dims, record.dt);
    QFilterRunResult out;
    out.estimates.dt = record.dt;
    out.estimates.backend = "density";
    out.estimates.record_seed = record.seed;
    out.estimates.p_plus.reserve(record.n_steps + 1);
    out.estimates.y_mean.reserve(record.n_steps + 1);
    out.estimates.renorm_log.reserve(record.n_steps);

    Operator rho = initial_rho;
    auto [p0, y0] = stepper.estimates(rho);
    out.estimates.p_plus.push_back(p0);
    out.estimates.y_mean.push_back(y0);
    for (std::int64_t k = 0; k < record.n_steps; ++k) {
        const QStepLog log = stepper.step(rho, record.dY[k]);
        out.estimates.renorm_log.push_back(log.renorm);
        auto [pp, ym] = stepper.estimates(rho);
        out.estimates.p_plus.push_back(pp);
        out.estimates.y_mean.push_back(ym);
    }
    return out;
}

} // namespace qpf
