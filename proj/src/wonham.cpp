#include "qpf/wonham.hpp"

#include <cmath>
#include <stdexcept>

namespace qpf {

TelegraphPath simulate_telegraph(const TelegraphParams& params, double dt,
                                 std::int64_t n_steps, Rng& rng) {
    if (!params.valid()) throw std::invalid_argument("simulate_telegraph: invalid params");
    TelegraphPath path;
    path.dt = dt;
    path.x.resize(n_steps);
    path.dy.resize(n_steps);

    bool plus = rng.uniform() < 0.5; // stationary start
    double t_switch = rng.exponential(params.rate);
    const double T = dt * double(n_steps);
    while (t_switch < T) {
        path.switch_times.push_back(t_switch);
        t_switch += rng.exponential(params.rate);
    }

    const double sqrt_dt = std::sqrt(dt);
    std::size_t next_switch = 0;
    for (std::int64_t k = 0; k < n_steps; ++k) {
        const double t0 = dt * double(k);
        const double t1 = t0 + dt;
        path.x[k] = plus ? params.a_plus : params.a_minus;
        // exact integral of x over [t0, t1) across any switches inside the step
        double integral = 0.0;
        double t = t0;
        while (next_switch < path.switch_times.size() && path.switch_times[next_switch] < t1) {
            const double ts = path.switch_times[next_switch];
            integral += (plus ? params.a_plus : params.a_minus) * (ts - t);
            plus = !plus;
            t = ts;
            ++next_switch;
        }
        integral += (plus ? params.a_plus : params.a_minus) * (t1 - t);
        path.dy[k] = params.snr_gain * integral + rng.gaussian(sqrt_dt);
    }
    return path;
}

WonhamStepResult wonham_step(const WonhamState& state, double dy,
                             const TelegraphParams& params, double dt) {
    const double gamma = 2.0 * params.rate;
    const double gain = params.snr_gain;
    const double p = state.p_plus;
    const double y_hat = params.a_plus * p + params.a_minus * (1.0 - p);
    const double innovation = dy - gain * y_hat * dt;

    double next = p + (-gamma * (p - 0.5)) * dt +
                  gain * p * (1.0 - p) * (params.a_plus - params.a_minus) * innovation;

    WonhamStepResult result;
    // clamp just inside [0,1]; the endpoints are singular for the adaptive
    // variant and keeping both filters on identical bounds preserves the
    // step-for-step reduction identity
    const double eps = 1e-12;
    result.clamped = next < eps || next > 1.0 - eps;
    next = std::min(std::max(next, eps), 1.0 - eps);
    result.state.p_plus = next;
    return result;
}

} // namespace qpf
