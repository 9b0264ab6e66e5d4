#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qpf/projfilter.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// Uniform trapezoid rule for the L2 inner products, plus the relative step
// for parameter finite differences.
struct QuadratureSpec {
    double y_min = -21.0;
    double y_max = 21.0;
    int n_points = 1025;
    double fd_step = 1e-6;

    double spacing() const { return (y_max - y_min) / (n_points - 1); }
    double point(int j) const { return y_min + j * spacing(); }

    // range sized to cover both centers +- 15 (>10 standard deviations of the
    // variance-2 Gaussians)
    static QuadratureSpec auto_range(const ThetaUnnorm& theta, int n_points = 1025);
};

// Bi-Gaussian family q(y,s;theta) = (nu_s / 2 sqrt(pi)) exp(-(y-mu_s)^2/4),
// s in {+,-}, theta = (mu+, nu+, mu-, nu-). Derivatives are analytic.
struct FamilyDensity {
    ThetaUnnorm theta;

    double q(double y, int sign) const;
    double sqrt_q(double y, int sign) const;
    double dq_dy(double y, int sign) const;
    double d2q_dy2(double y, int sign) const;
    // j indexes (mu+, nu+, mu-, nu-)
    double dq_dtheta(double y, int sign, int j) const;
    double dlogq_dtheta(double y, int sign, int j) const;
    double dsqrtq_dtheta(double y, int sign, int j) const;
};

using Metric = Eigen::Matrix4d;

// g_ij = 4 <d_i sqrt q, d_j sqrt q> by central finite differences of sqrt q
// and trapezoid quadrature. Throws if the result is not positive definite.
Metric fisher_metric(const ThetaUnnorm& theta, const QuadratureSpec& quad);

// diag{nu+/2, 1/nu+, nu-/2, 1/nu-}
Metric fisher_metric_closed_form(const ThetaUnnorm& theta);

// Lambda^i(y,s) = sum_j g^{ij} dq/dtheta^j, discretized on the quadrature grid.
struct TangentVectors {
    std::array<std::vector<double>, 4> plus;
    std::array<std::vector<double>, 4> minus;
};
TangentVectors tangent_vectors(const ThetaUnnorm& theta, const QuadratureSpec& quad);

// Stratonovich-form drift A and gain B of the Q filter evaluated on the
// family by analytic differentiation (no grid FD):
//   A = (gamma/2)(q_mp - q_pm) + d_y[(+-g + kappa(1-4 eta) y) q] +
//       2 kappa (1-2 eta) d2_y q + kappa eta (2 - y^2) q
//   B = sqrt(2 kappa eta) (y + 2 d_y) q
struct StratField {
    std::vector<double> A_plus, A_minus, B_plus, B_minus;
};
StratField stratonovich_field(const FamilyDensity& family, const QuadratureSpec& quad,
                              const ModelParams& params);

// Projection of the Stratonovich field onto the tangent space:
// drift_i = <A/q, Lambda^i>, gain_i = <B/q, Lambda^i>, with the integrand
// assembled as A * sum_j g^{ij} dlog q/dtheta^j to avoid dividing by q.
// Throws if doubling n_points moves any coefficient by more than 1e-6 rel.
struct OracleCoefficients {
    std::array<double, 4> drift;
    std::array<double, 4> gain;
};
OracleCoefficients oracle_coefficients(const ThetaUnnorm& theta, const ModelParams& params,
                                       const QuadratureSpec& quad);

struct OracleReportRow {
    ThetaUnnorm theta;
    OracleCoefficients quadrature;
    UnnormCoefficients closed;
    double max_rel_err_drift = 0.0;
    double max_rel_err_gain = 0.0;
    double max_rel_err_metric = 0.0;
};
std::vector<OracleReportRow> oracle_report(const ModelParams& params, int n_samples,
                                           std::uint64_t seed);

} // namespace qpf
