#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpf/hilbert.hpp"
#include "qpf/rng.hpp"

namespace qpf {

// Physical rates shared by every module. Units: 1/time; eta dimensionless.
struct ModelParams {
    double g = 120.0;     // atom-cavity coupling
    double kappa = 40.0;  // cavity decay
    double gamma = 20.0;  // spontaneous emission
    double eta = 1.0;     // detection efficiency, 0 < eta <= 1

    bool valid() const {
        return g > 0 && kappa > 0 && gamma > 0 && eta > 0 && eta <= 1;
    }
    double obs_gain() const; // sqrt(2 kappa eta)
};

struct SimGrid {
    double dt = 1e-5;
    std::int64_t n_steps = 25000;
    std::uint64_t seed = 0;

    bool valid() const { return dt > 0 && n_steps > 0; }
    // stability guard: warn when dt * max(2 kappa, gamma, g) >= 0.1
    bool stability_warning(const ModelParams& p) const;
    double horizon() const { return dt * double(n_steps); }
};

enum class JumpChannel { plus, z, minus };
char jump_symbol(JumpChannel c);

struct JumpEvent {
    std::int64_t step; // jump occurred during [step*dt, (step+1)*dt)
    JumpChannel channel;
};

// Contract between simulator and filters: the homodyne increments plus the
// side-channel detection events, with everything needed to re-run a filter.
struct ObservationRecord {
    ModelParams params;
    double dt = 0.0;
    std::int64_t n_steps = 0;
    std::uint64_t seed = 0;
    int n_fock = 25;
    std::string initial = "minus_vac";
    std::vector<double> dY;       // length n_steps
    std::vector<JumpEvent> jumps; // at most one per step

    double time(std::int64_t k) const { return dt * double(k); }
};

// Full-information estimates along the simulated trajectory, length n_steps+1.
struct TruthRecord {
    double dt = 0.0;
    std::vector<double> p_plus_full; // <mu^dag mu>_t
    std::vector<double> y_mean_full; // <y>_t
};

// One Euler step of the stochastic Schroedinger equation: diffusive update
// first, then the (at most one) jump, then renormalization.
// Returns the pre-renormalization norm of the updated state.
class SsePropagator {
public:
    SsePropagator(const ModelParams& params, const HilbertDims& dims, double dt);

    double step(State& psi, double dW, std::optional<JumpChannel> jump) const;

    const CompositeOps& ops() const { return ops_; }

private:
    ModelParams p_;
    double dt_;
    CompositeOps ops_;
    Operator drift_const_; // -i(g/2) mu_z x - kappa a^dag a
};

// Samples at most one side-channel jump with channel probabilities
// (gamma/2)<mu^dag mu> dt, (gamma/2) dt, (gamma/2)<mu mu^dag> dt.
// rate*dt is capped at 0.1 (with a warning flag on the propagator's owner).
std::optional<JumpChannel> sample_jumps(const State& psi, const CompositeOps& ops,
                                        const ModelParams& params, double dt, Rng& rng);

// dY = sqrt(2 kappa eta) <y> dt + sqrt(eta) dW + sqrt(1-eta) dV
double synthesize_photocurrent(double y_mean, double dW, double dV,
                               const ModelParams& params, double dt);

struct TrajectoryResult {
    ObservationRecord record;
    TruthRecord truth;
    double mean_abs_norm_drift = 0.0; // mean |pre-renorm norm - 1| per step
};

TrajectoryResult run_trajectory(const ModelParams& params, const SimGrid& grid,
                                const HilbertDims& dims, const State& initial,
                                const std::string& initial_tag = "minus_vac");

} // namespace qpf
