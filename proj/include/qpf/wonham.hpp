#pragma once

#include <cstdint>
#include <vector>

#include "qpf/rng.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// Random telegraph signal observed in white noise: dy = snr_gain * x dt + dw.
struct TelegraphParams {
    double a_plus = -3.0;  // level while the hidden state is "plus"
    double a_minus = 3.0;
    double rate = 10.0;     // switching rate gamma/2
    double snr_gain = 0.0;  // sqrt(2 kappa eta)

    bool valid() const { return rate > 0 && a_plus != a_minus; }
};

struct WonhamState {
    double p_plus = 0.5;
};

struct TelegraphPath {
    double dt = 0.0;
    std::vector<double> x;   // level during step k, length n_steps
    std::vector<double> dy;  // observation increments, length n_steps
    std::vector<double> switch_times; // exact exponential-clock switch epochs
};

// Exact exponential-clock switching sampled onto the grid; dy uses the exact
// time average of x within each step so discretization adds no rate bias.
TelegraphPath simulate_telegraph(const TelegraphParams& params, double dt,
                                 std::int64_t n_steps, Rng& rng);

struct WonhamStepResult {
    WonhamState state;
    bool clamped = false;
};

// dp+ = -gamma (p+ - 1/2) dt
//       + G p+(1-p+)(a+ - a-) (dy - G [a+ p+ + a- (1-p+)] dt),  gamma = 2*rate
WonhamStepResult wonham_step(const WonhamState& state, double dy,
                             const TelegraphParams& params, double dt);

} // namespace qpf
