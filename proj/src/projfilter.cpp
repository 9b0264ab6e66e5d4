#include "qpf/projfilter.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qpf {

namespace {
void check_finite(const ProjState& s) {
    if (std::isfinite(s.nu_tilde) && std::isfinite(s.mu_plus) && std::isfinite(s.mu_minus))
        return;
    std::ostringstream msg;
    msg << "proj_step: non-finite parameter (nu_tilde=" << s.nu_tilde
        << ", mu_plus=" << s.mu_plus << ", mu_minus=" << s.mu_minus << ")";
    throw std::runtime_error(msg.str());
}
} // namespace

ProjStepResult proj_step(const ProjState& state, double dY, const ModelParams& params,
                         double dt, const ProjStepOptions& opts) {
    check_finite(state);
    const double gain = params.obs_gain();
    const double nu = state.nu_tilde;
    const double mp = state.mu_plus;
    const double mm = state.mu_minus;

    const double y_hat = mp * nu + mm * (1.0 - nu);
    const double innovation = dY - gain * y_hat * dt;

    ProjState next = state;
    next.nu_tilde =
        nu + (-params.gamma * (nu - 0.5)) * dt + gain * nu * (1.0 - nu) * (mp - mm) * innovation;
    if (!opts.freeze_mu) {
        if (nu >= kMuFreezeEps)
            next.mu_plus = mp + (-params.g - params.kappa * mp +
                                 (params.gamma / 2.0) * ((1.0 - nu) / nu) * (mm - mp)) * dt;
        if (1.0 - nu >= kMuFreezeEps)
            next.mu_minus = mm + (params.g - params.kappa * mm +
                                  (params.gamma / 2.0) * (nu / (1.0 - nu)) * (mp - mm)) * dt;
    }

    ProjStepResult result;
    result.clamped = next.nu_tilde < kNuClamp || next.nu_tilde > 1.0 - kNuClamp;
    next.nu_tilde = std::min(std::max(next.nu_tilde, kNuClamp), 1.0 - kNuClamp);
    check_finite(next);
    result.state = next;
    return result;
}

std::pair<double, double> proj_estimates(const ProjState& state) {
    return {state.nu_tilde,
            state.nu_tilde * state.mu_plus + (1.0 - state.nu_tilde) * state.mu_minus};
}

std::array<double, 4> strat_to_ito_drift(const ThetaUnnorm& theta, const ModelParams& params) {
    // diffusion G = (0, gain mu+ nu+, 0, gain mu- nu-); correction_i = (1/2) dG_i/dth_j G_j
    const double ke = params.kappa * params.eta; // gain^2 / 2
    return {0.0, ke * theta.mu_plus * theta.mu_plus * theta.nu_plus, 0.0,
            ke * theta.mu_minus * theta.mu_minus * theta.nu_minus};
}

std::array<double, 3> strat_to_ito_drift(const ProjState& state, const ModelParams& params) {
    // G = (gain nu(1-nu)(mu+ - mu-), 0, 0) in the order (nu_tilde, mu+, mu-)
    const double nu = state.nu_tilde;
    const double d = state.mu_plus - state.mu_minus;
    const double ke = params.kappa * params.eta; // gain^2 / 2
    return {ke * nu * (1.0 - nu) * (1.0 - 2.0 * nu) * d * d, 0.0, 0.0};
}

UnnormCoefficients closed_form_coefficients(const ThetaUnnorm& theta, const ModelParams& params) {
    if (!(theta.nu_plus > 0.0) || !(theta.nu_minus > 0.0))
        throw std::invalid_argument("closed_form_coefficients: weights must be positive");
    const double gain = params.obs_gain();
    const double ke = params.kappa * params.eta;
    const double mp = theta.mu_plus, np = theta.nu_plus;
    const double mm = theta.mu_minus, nm = theta.nu_minus;
    UnnormCoefficients c;
    c.strat_drift = {
        -params.g - params.kappa * mp + (params.gamma / 2.0) * (nm / np) * (mm - mp),
        (params.gamma / 2.0) * (nm - np) - ke * mp * mp * np,
        +params.g - params.kappa * mm + (params.gamma / 2.0) * (np / nm) * (mp - mm),
        (params.gamma / 2.0) * (np - nm) - ke * mm * mm * nm};
    c.gain = {0.0, gain * mp * np, 0.0, gain * mm * nm};
    return c;
}

ThetaUnnorm theta_step_ito(const ThetaUnnorm& theta, double dY, const ModelParams& params,
                           double dt) {
    const double gain = params.obs_gain();
    ThetaUnnorm next = theta;
    next.mu_plus += (-params.g - params.kappa * theta.mu_plus +
                     (params.gamma / 2.0) * (theta.nu_minus / theta.nu_plus) *
                         (theta.mu_minus - theta.mu_plus)) * dt;
    next.nu_plus += (params.gamma / 2.0) * (theta.nu_minus - theta.nu_plus) * dt +
                    gain * theta.mu_plus * theta.nu_plus * dY;
    next.mu_minus += (params.g - params.kappa * theta.mu_minus +
                      (params.gamma / 2.0) * (theta.nu_plus / theta.nu_minus) *
                          (theta.mu_plus - theta.mu_minus)) * dt;
    next.nu_minus += (params.gamma / 2.0) * (theta.nu_plus - theta.nu_minus) * dt +
                     gain * theta.mu_minus * theta.nu_minus * dY;
    return next;
}

ProjRunResult run_projfilter(const ObservationRecord& record, const ProjState& initial,
                             const ProjStepOptions& opts) {
    ProjRunResult out;
    out.estimates.dt = record.dt;
    out.estimates.backend = opts.freeze_mu ? "projection-frozen" : "projection";
    out.estimates.record_seed = record.seed;
    const std::size_t len = std::size_t(record.n_steps) + 1;
    out.estimates.p_plus.reserve(len);
    out.estimates.y_mean.reserve(len);
    out.nu_tilde.reserve(len);
    out.mu_plus.reserve(len);
    out.mu_minus.reserve(len);

    ProjState state = initial;
    state.nu_tilde = std::min(std::max(state.nu_tilde, kNuClamp), 1.0 - kNuClamp);
    auto push = [&](const ProjState& s) {
        auto [pp, ym] = proj_estimates(s);
        out.estimates.p_plus.push_back(pp);
        out.estimates.y_mean.push_back(ym);
        out.nu_tilde.push_back(s.nu_tilde);
        out.mu_plus.push_back(s.mu_plus);
        out.mu_minus.push_back(s.mu_minus);
    };
    push(state);
    for (std::int64_t k = 0; k < record.n_steps; ++k) {
        const ProjStepResult r = proj_step(state, record.dY[k], record.params, record.dt, opts);
        state = r.state;
        if (r.clamped) ++out.clamp_count;
        push(state);
    }
    return out;
}

} // namespace qpf
