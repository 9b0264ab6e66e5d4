#include "qpf/infogeo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qpf/rng.hpp"

namespace qpf {

namespace {
constexpr double kInvTwoSqrtPi = 0.28209479177387814; // 1 / (2 sqrt(pi))

double trapz(const std::vector<double>& f, double h) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
    return s * h;
}
} // namespace

QuadratureSpec QuadratureSpec::auto_range(const ThetaUnnorm& theta, int n_points) {
    QuadratureSpec q;
    q.y_min = std::min(theta.mu_plus, theta.mu_minus) - 15.0;
    q.y_max = std::max(theta.mu_plus, theta.mu_minus) + 15.0;
    q.n_points = n_points;
    return q;
}

double FamilyDensity::q(double y, int sign) const {
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    const double nu = sign > 0 ? theta.nu_plus : theta.nu_minus;
    const double d = y - mu;
    return nu * kInvTwoSqrtPi * std::exp(-d * d / 4.0);
}

double FamilyDensity::sqrt_q(double y, int sign) const {
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    const double nu = sign > 0 ? theta.nu_plus : theta.nu_minus;
    const double d = y - mu;
    return std::sqrt(nu * kInvTwoSqrtPi) * std::exp(-d * d / 8.0);
}

double FamilyDensity::dq_dy(double y, int sign) const {
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    return -(y - mu) / 2.0 * q(y, sign);
}

double FamilyDensity::d2q_dy2(double y, int sign) const {
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    const double d = y - mu;
    return (-0.5 + d * d / 4.0) * q(y, sign);
}

double FamilyDensity::dq_dtheta(double y, int sign, int j) const {
    const bool plus_param = j < 2;
    if ((sign > 0) != plus_param) return 0.0;
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    const double nu = sign > 0 ? theta.nu_plus : theta.nu_minus;
    if (j % 2 == 0) return (y - mu) / 2.0 * q(y, sign); // d/dmu
    return q(y, sign) / nu;                              // d/dnu
}

double FamilyDensity::dlogq_dtheta(double y, int sign, int j) const {
    const bool plus_param = j < 2;
    if ((sign > 0) != plus_param) return 0.0;
    const double mu = sign > 0 ? theta.mu_plus : theta.mu_minus;
    const double nu = sign > 0 ? theta.nu_plus : theta.nu_minus;
    if (j % 2 == 0) return (y - mu) / 2.0;
    return 1.0 / nu;
}

double FamilyDensity::dsqrtq_dtheta(double y, int sign, int j) const {
    return 0.5 * dlogq_dtheta(y, sign, j) * sqrt_q(y, sign);
}

Metric fisher_metric(const ThetaUnnorm& theta, const QuadratureSpec& quad) {
    if (!(theta.nu_plus > 0.0) || !(theta.nu_minus > 0.0))
        throw std::invalid_argument("fisher_metric: weights must be positive");
    const int n = quad.n_points;
    const double h = quad.spacing();
    std::array<double, 4> th = theta.as_array();

    // central finite differences of sqrt q in each parameter, on the grid
    std::array<std::vector<double>, 4> der_plus, der_minus;
    for (int j = 0; j < 4; ++j) {
        const double step = quad.fd_step * std::max(std::abs(th[j]), 1.0);
        auto thp = th, thm = th;
        thp[j] += step;
        thm[j] -= step;
        const FamilyDensity fp{{thp[0], thp[1], thp[2], thp[3]}};
        const FamilyDensity fm{{thm[0], thm[1], thm[2], thm[3]}};
        der_plus[j].resize(n);
        der_minus[j].resize(n);
        for (int k = 0; k < n; ++k) {
            const double y = quad.point(k);
            der_plus[j][k] = (fp.sqrt_q(y, +1) - fm.sqrt_q(y, +1)) / (2.0 * step);
            der_minus[j][k] = (fp.sqrt_q(y, -1) - fm.sqrt_q(y, -1)) / (2.0 * step);
        }
    }

    Metric g;
    std::vector<double> prod(n);
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            for (int k = 0; k < n; ++k)
                prod[k] = der_plus[i][k] * der_plus[j][k] + der_minus[i][k] * der_minus[j][k];
            g(i, j) = g(j, i) = 4.0 * trapz(prod, h);
        }
    }

    Eigen::SelfAdjointEigenSolver<Metric> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("fisher_metric: lost positive definiteness (quadrature range too small)");
    return g;
}

Metric fisher_metric_closed_form(const ThetaUnnorm& theta) {
    Metric g = Metric::Zero();
    g(0, 0) = theta.nu_plus / 2.0;
    g(1, 1) = 1.0 / theta.nu_plus;
    g(2, 2) = theta.nu_minus / 2.0;
    g(3, 3) = 1.0 / theta.nu_minus;
    return g;
}

TangentVectors tangent_vectors(const ThetaUnnorm& theta, const QuadratureSpec& quad) {
    const Metric g = fisher_metric(theta, quad);
    Eigen::FullPivLU<Metric> lu(g);
    if (!lu.isInvertible()) throw std::runtime_error("tangent_vectors: singular metric");
    const Metric ginv = lu.inverse();

    const FamilyDensity fam{theta};
    TangentVectors tv;
    const int n = quad.n_points;
    for (int i = 0; i < 4; ++i) {
        tv.plus[i].assign(n, 0.0);
        tv.minus[i].assign(n, 0.0);
        for (int k = 0; k < n; ++k) {
            const double y = quad.point(k);
            double vp = 0.0, vm = 0.0;
            for (int j = 0; j < 4; ++j) {
                vp += ginv(i, j) * fam.dq_dtheta(y, +1, j);
                vm += ginv(i, j) * fam.dq_dtheta(y, -1, j);
            }
            tv.plus[i][k] = vp;
            tv.minus[i][k] = vm;
        }
    }
    return tv;
}

StratField stratonovich_field(const FamilyDensity& family, const QuadratureSpec& quad,
                              const ModelParams& params) {
    const int n = quad.n_points;
    StratField f;
    f.A_plus.resize(n);
    f.A_minus.resize(n);
    f.B_plus.resize(n);
    f.B_minus.resize(n);
    const double gain = params.obs_gain();
    const double advect_slope = params.kappa * (1.0 - 4.0 * params.eta);
    const double diff_coef = 2.0 * params.kappa * (1.0 - 2.0 * params.eta);
    const double ke = params.kappa * params.eta;
    for (int k = 0; k < n; ++k) {
        const double y = quad.point(k);
        for (int sign : {+1, -1}) {
            const double sg = sign > 0 ? params.g : -params.g;
            const double qv = family.q(y, sign);
            const double qo = family.q(y, -sign);
            const double dq = family.dq_dy(y, sign);
            const double d2q = family.d2q_dy2(y, sign);
            const double A = (params.gamma / 2.0) * (qo - qv) +
                             (advect_slope * qv + (sg + advect_slope * y) * dq) +
                             diff_coef * d2q + ke * (2.0 - y * y) * qv;
            const double B = gain * (y * qv + 2.0 * dq);
            if (sign > 0) {
                f.A_plus[k] = A;
                f.B_plus[k] = B;
            } else {
                f.A_minus[k] = A;
                f.B_minus[k] = B;
            }
        }
    }
    return f;
}

namespace {
OracleCoefficients project_once(const ThetaUnnorm& theta, const ModelParams& params,
                                const QuadratureSpec& quad) {
    const Metric g = fisher_metric(theta, quad);
    Eigen::FullPivLU<Metric> lu(g);
    if (!lu.isInvertible()) throw std::runtime_error("oracle_coefficients: singular metric");
    const Metric ginv = lu.inverse();

    const FamilyDensity fam{theta};
    const StratField field = stratonovich_field(fam, quad, params);
    const int n = quad.n_points;
    const double h = quad.spacing();

    OracleCoefficients out;
    std::vector<double> integ(n);
    for (int i = 0; i < 4; ++i) {
        // Lambda^i / q = sum_j g^{ij} dlog q/dtheta^j, kept analytic so that
        // the integrand A * (Lambda^i/q) never divides by the Gaussian tails
        for (int k = 0; k < n; ++k) {
            const double y = quad.point(k);
            double lp = 0.0, lm = 0.0;
            for (int j = 0; j < 4; ++j) {
                lp += ginv(i, j) * fam.dlogq_dtheta(y, +1, j);
                lm += ginv(i, j) * fam.dlogq_dtheta(y, -1, j);
            }
            integ[k] = field.A_plus[k] * lp + field.A_minus[k] * lm;
        }
        out.drift[i] = trapz(integ, h);
        for (int k = 0; k < n; ++k) {
            const double y = quad.point(k);
            double lp = 0.0, lm = 0.0;
            for (int j = 0; j < 4; ++j) {
                lp += ginv(i, j) * fam.dlogq_dtheta(y, +1, j);
                lm += ginv(i, j) * fam.dlogq_dtheta(y, -1, j);
            }
            integ[k] = field.B_plus[k] * lp + field.B_minus[k] * lm;
        }
        out.gain[i] = trapz(integ, h);
    }
    return out;
}
} // namespace

OracleCoefficients oracle_coefficients(const ThetaUnnorm& theta, const ModelParams& params,
                                       const QuadratureSpec& quad) {
    const OracleCoefficients coarse = project_once(theta, params, quad);
    QuadratureSpec fine = quad;
    fine.n_points = 2 * quad.n_points - 1;
    const OracleCoefficients refined = project_once(theta, params, fine);
    for (int i = 0; i < 4; ++i) {
        const double scale_d = std::max(std::abs(refined.drift[i]), 1.0);
        const double scale_g = std::max(std::abs(refined.gain[i]), 1.0);
        if (std::abs(coarse.drift[i] - refined.drift[i]) > 1e-6 * scale_d ||
            std::abs(coarse.gain[i] - refined.gain[i]) > 1e-6 * scale_g)
            throw std::runtime_error("oracle_coefficients: quadrature not converged");
    }
    return refined;
}

std::vector<OracleReportRow> oracle_report(const ModelParams& params, int n_samples,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<OracleReportRow> rows;
    rows.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        ThetaUnnorm theta;
        theta.mu_plus = -6.0 + 12.0 * rng.uniform();
        theta.nu_plus = 0.1 + 9.9 * rng.uniform();
        theta.mu_minus = -6.0 + 12.0 * rng.uniform();
        theta.nu_minus = 0.1 + 9.9 * rng.uniform();

        OracleReportRow row;
        row.theta = theta;
        const QuadratureSpec quad = QuadratureSpec::auto_range(theta);
        row.quadrature = oracle_coefficients(theta, params, quad);
        row.closed = closed_form_coefficients(theta, params);

        const Metric g_quad = fisher_metric(theta, quad);
        const Metric g_ref = fisher_metric_closed_form(theta);
        row.max_rel_err_metric =
            (g_quad - g_ref).cwiseAbs().maxCoeff() / g_ref.cwiseAbs().maxCoeff();
        // zero closed-form entries (the mu gains) are measured against the
        // scale of their coefficient set, relative error being undefined there
        double drift_scale = 0.0, gain_scale = 0.0;
        for (int i = 0; i < 4; ++i) {
            drift_scale = std::max(drift_scale, std::abs(row.closed.strat_drift[i]));
            gain_scale = std::max(gain_scale, std::abs(row.closed.gain[i]));
        }
        for (int i = 0; i < 4; ++i) {
            const double dd = std::abs(row.quadrature.drift[i] - row.closed.strat_drift[i]);
            const double dg = std::abs(row.quadrature.gain[i] - row.closed.gain[i]);
            row.max_rel_err_drift = std::max(
                row.max_rel_err_drift,
                dd / std::max(std::abs(row.closed.strat_drift[i]), drift_scale));
            row.max_rel_err_gain = std::max(
                row.max_rel_err_gain, dg / std::max(std::abs(row.closed.gain[i]), gain_scale));
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace qpf
