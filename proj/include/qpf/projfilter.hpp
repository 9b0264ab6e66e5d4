#pragma once

#include <array>
#include <vector>

#include "qpf/qfilter.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// Normalized projection-filter parameters: weight of the |+> Gaussian and the
// two Gaussian centers (quadrature units). nu_tilde is clamped to stay
// strictly inside (0,1); the family is singular at the endpoints.
struct ProjState {
    double nu_tilde = 0.5;
    double mu_plus = 0.0;
    double mu_minus = 0.0;
};

// Unnormalized bi-Gaussian parameters theta = (mu+, nu+, mu-, nu-).
struct ThetaUnnorm {
    double mu_plus = 0.0;
    double nu_plus = 1.0;
    double mu_minus = 0.0;
    double nu_minus = 1.0;

    std::array<double, 4> as_array() const { return {mu_plus, nu_plus, mu_minus, nu_minus}; }
    bool valid() const { return nu_plus >= 0 && nu_minus >= 0 && nu_plus + nu_minus > 0; }
};

inline constexpr double kNuClamp = 1e-12;      // endpoint clamp for nu_tilde
inline constexpr double kMuFreezeEps = 1e-6;   // freeze mu+ while nu_tilde below this

struct ProjStepOptions {
    bool freeze_mu = false; // hold both centers fixed (Wonham reduction)
};

struct ProjStepResult {
    ProjState state;
    bool clamped = false;
};

// One Euler step of the normalized projection filter. The center of a
// component whose weight is below kMuFreezeEps is frozen (the parameter is
// unidentifiable there); nu_tilde is clamped to [kNuClamp, 1-kNuClamp].
// Throws on non-finite parameters.
ProjStepResult proj_step(const ProjState& state, double dY, const ModelParams& params,
                         double dt, const ProjStepOptions& opts = {});

// p_plus = nu_tilde, y_mean = nu_tilde mu+ + (1-nu_tilde) mu-
std::pair<double, double> proj_estimates(const ProjState& state);

// Ito-minus-Stratonovich drift correction (1/2)(dG/dtheta) G for the
// parameter SDE's diffusion vector G.
std::array<double, 4> strat_to_ito_drift(const ThetaUnnorm& theta, const ModelParams& params);
std::array<double, 3> strat_to_ito_drift(const ProjState& state, const ModelParams& params);

// Stratonovich drift and dY-gain of the unnormalized system (closed forms).
struct UnnormCoefficients {
    std::array<double, 4> strat_drift;
    std::array<double, 4> gain;
};
UnnormCoefficients closed_form_coefficients(const ThetaUnnorm& theta, const ModelParams& params);

// One Euler step of the unnormalized Ito system for theta.
ThetaUnnorm theta_step_ito(const ThetaUnnorm& theta, double dY, const ModelParams& params,
                           double dt);

struct ProjRunResult {
    FilterEstimates estimates;
    std::vector<double> nu_tilde;  // length n_steps+1
    std::vector<double> mu_plus;
    std::vector<double> mu_minus;
    std::int64_t clamp_count = 0;
};

ProjRunResult run_projfilter(const ObservationRecord& record, const ProjState& initial,
                             const ProjStepOptions& opts = {});

} // namespace qpf
