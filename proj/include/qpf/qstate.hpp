#pragma once

#include <vector>

namespace qpf {

// Uniform spatial grid for the Q-function filter, y_j = y_min + j*h.
struct QGrid {
    double y_min = -18.0;
    double y_max = 18.0;
    int n_points = 128;

    double spacing() const { return (y_max - y_min) / (n_points - 1); }
    double point(int j) const { return y_min + j * spacing(); }
    bool valid() const { return y_min < y_max && n_points >= 16; }
};

// Pair of discretized Q-densities on a grid. Mass-normalized states have
// trapezoid mass 1; small negative undershoots from the finite-difference
// scheme are tolerated and flagged past -1e-6 * max entry.
struct QState {
    QGrid grid;
    std::vector<double> q_plus;
    std::vector<double> q_minus;
    bool truncation_warning = false; // grid reaches past the |y|/2 <= 0.9*sqrt(n_fock) band

    double mass() const;                 // trapezoid, both components
    double min_over_max() const;         // min entry / max entry, for negativity checks
    bool negativity_flagged() const { return min_over_max() < -1e-6; }
};

double trapezoid(const std::vector<double>& f, double h);

} // namespace qpf
