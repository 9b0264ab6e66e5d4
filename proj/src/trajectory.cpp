#include "qpf/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace qpf {

double ModelParams::obs_gain() const { return std::sqrt(2.0 * kappa * eta); }

bool SimGrid::stability_warning(const ModelParams& p) const {
    const double fastest = std::max({2.0 * p.kappa, p.gamma, p.g});
    return dt * fastest >= 0.1;
}

char jump_symbol(JumpChannel c) {
    switch (c) {
        case JumpChannel::plus: return '+';
        case JumpChannel::z: return 'z';
        case JumpChannel::minus: return 'm';
    }
    return '?';
}

SsePropagator::SsePropagator(const ModelParams& params, const HilbertDims& dims, double dt)
    : p_(params), dt_(dt), ops_(build_composite_ops(dims)) {
    if (!params.valid()) throw std::invalid_argument("SsePropagator: invalid params");
    drift_const_ = complex(0, -1) * (p_.g / 2.0) * ops_.mu_z_x - p_.kappa * ops_.n_photon;
}

double SsePropagator::step(State& psi, double dW, std::optional<JumpChannel> jump) const {
    const double y_mean = expectation(psi, ops_.y).real();
    // drift: (-i(g/2) mu_z x - i kappa <y> a - kappa a^dag a - (kappa/4)<y>^2) psi
    // diffusion: -sqrt(2 kappa) (i a + <y>/2) psi dW
    const State a_psi = ops_.a * psi;
    State next = psi;
    next.noalias() += dt_ * (drift_const_ * psi);
    next += dt_ * (complex(0, -1) * p_.kappa * y_mean * a_psi
                   - (p_.kappa / 4.0) * y_mean * y_mean * psi);
    next += -std::sqrt(2.0 * p_.kappa) * dW * (complex(0, 1) * a_psi + 0.5 * y_mean * psi);
    if (jump) {
        switch (*jump) {
            case JumpChannel::plus: {
                if (expectation(next, ops_.pop_plus).real() <= 0.0)
                    throw std::runtime_error("sse_step: plus jump requested with <mu^dag mu> = 0");
                next = ops_.mu * next;
                break;
            }
            case JumpChannel::z:
                next = ops_.mu_z * next;
                break;
            case JumpChannel::minus: {
                if (1.0 - expectation(next, ops_.pop_plus).real() <= 0.0)
                    throw std::runtime_error("sse_step: minus jump requested with <mu mu^dag> = 0");
                next = ops_.mu_dagger * next;
                break;
            }
        }
    }
    const double norm = next.norm();
    if (!(norm > 0.0)) throw std::runtime_error("sse_step: state norm collapsed");
    psi = next / norm;
    return norm;
}

std::optional<JumpChannel> sample_jumps(const State& psi, const CompositeOps& ops,
                                        const ModelParams& params, double dt, Rng& rng) {
    const double p_up = expectation(psi, ops.pop_plus).real();
    const double half_gamma = params.gamma / 2.0;
    double probs[3] = {half_gamma * p_up * dt, half_gamma * dt,
                       half_gamma * (1.0 - p_up) * dt};
    for (double& p : probs) p = std::min(p, 0.1); // rate*dt cap
    const double u = rng.uniform();
    double acc = 0.0;
    static const JumpChannel channels[3] = {JumpChannel::plus, JumpChannel::z,
                                            JumpChannel::minus};
    for (int i = 0; i < 3; ++i) {
        acc += probs[i];
        if (u < acc) return channels[i];
    }
    return std::nullopt;
}

double synthesize_photocurrent(double y_mean, double dW, double dV,
                               const ModelParams& params, double dt) {
    return params.obs_gain() * y_mean * dt + std::sqrt(params.eta) * dW +
           std::sqrt(1.0 - params.eta) * dV;
}

TrajectoryResult run_trajectory(const ModelParams& params, const SimGrid& grid,
                                const HilbertDims& dims, const State& initial,
                                const std::string& initial_tag) {
    if (!params.valid() || !grid.valid())
        throw std::invalid_argument("run_trajectory: invalid configuration");
    if (std::abs(initial.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("run_trajectory: initial state not normalized");

    SsePropagator prop(params, dims, grid.dt);
    Rng rng(grid.seed);
    const double sqrt_dt = std::sqrt(grid.dt);

    TrajectoryResult out;
    out.record.params = params;
    out.record.dt = grid.dt;
    out.record.n_steps = grid.n_steps;
    out.record.seed = grid.seed;
    out.record.n_fock = dims.n_fock;
    out.record.initial = initial_tag;
    out.record.dY.resize(grid.n_steps);
    out.truth.dt = grid.dt;
    out.truth.p_plus_full.resize(grid.n_steps + 1);
    out.truth.y_mean_full.resize(grid.n_steps + 1);

    State psi = initial;
    out.truth.p_plus_full[0] = expectation(psi, prop.ops().pop_plus).real();
    out.truth.y_mean_full[0] = expectation(psi, prop.ops().y).real();

    double norm_drift_sum = 0.0;
    for (std::int64_t k = 0; k < grid.n_steps; ++k) {
        const double y_mean = out.truth.y_mean_full[k];
        const double dW = rng.gaussian(sqrt_dt);
        const double dV = params.eta < 1.0 ? rng.gaussian(sqrt_dt) : 0.0;
        out.record.dY[k] = synthesize_photocurrent(y_mean, dW, dV, params, grid.dt);
        const auto jump = sample_jumps(psi, prop.ops(), params, grid.dt, rng);
        if (jump) out.record.jumps.push_back({k, *jump});
        const double norm = prop.step(psi, dW, jump);
        norm_drift_sum += std::abs(norm - 1.0);
        out.truth.p_plus_full[k + 1] = expectation(psi, prop.ops().pop_plus).real();
        out.truth.y_mean_full[k + 1] = expectation(psi, prop.ops().y).real();
    }
    out.mean_abs_norm_drift = norm_drift_sum / double(grid.n_steps);
    return out;
}

} // namespace qpf
