#include "qpf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpf {

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComparisonMetrics compare_estimates(const FilterEstimates& a, const FilterEstimates& b) {
    if (a.p_plus.size() != b.p_plus.size())
        throw std::runtime_error("compare_estimates: series lengths differ");
    if (std::abs(a.dt - b.dt) > 1e-15 * std::max(a.dt, b.dt))
        throw std::runtime_error("compare_estimates: time grids misaligned");
    ComparisonMetrics m;
    double sp = 0, sy = 0, ap = 0, ay = 0;
    const std::size_t n = a.p_plus.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double dp = a.p_plus[k] - b.p_plus[k];
        const double dy = a.y_mean[k] - b.y_mean[k];
        sp += dp * dp;
        sy += dy * dy;
        ap += std::abs(dp);
        ay += std::abs(dy);
    }
    m.rms_p = std::sqrt(sp / double(n));
    m.rms_y = std::sqrt(sy / double(n));
    m.mae_p = ap / double(n);
    m.mae_y = ay / double(n);
    return m;
}

std::vector<Crossing> half_crossings(const std::vector<double>& p_plus) {
    std::vector<Crossing> out;
    for (std::size_t k = 1; k < p_plus.size(); ++k) {
        if (p_plus[k - 1] < 0.5 && p_plus[k] >= 0.5) out.push_back({std::int64_t(k), true});
        if (p_plus[k - 1] >= 0.5 && p_plus[k] < 0.5) out.push_back({std::int64_t(k), false});
    }
    return out;
}

void match_delays(ComparisonMetrics& m, const ObservationRecord& record,
                  const std::vector<double>& p_plus, double window) {
    const auto crossings = half_crossings(p_plus);
    std::vector<bool> used(crossings.size(), false);

    for (const JumpEvent& jump : record.jumps) {
        if (jump.channel == JumpChannel::z) continue;
        ++m.n_side_jumps;
        // plus channel (mu): atom -> |->, p_plus drops; minus channel: rises
        const bool want_up = jump.channel == JumpChannel::minus;
        const double t_jump = record.time(jump.step);
        int best = -1;
        double best_abs = window;
        for (std::size_t c = 0; c < crossings.size(); ++c) {
            if (used[c] || crossings[c].upward != want_up) continue;
            const double delay = record.dt * double(crossings[c].step) - t_jump;
            if (std::abs(delay) <= best_abs) {
                best_abs = std::abs(delay);
                best = int(c);
            }
        }
        if (best >= 0) {
            used[best] = true;
            ++m.n_matched;
            m.delays.push_back(record.dt * double(crossings[best].step) - t_jump);
        } else {
            ++m.n_missed;
        }
    }
    for (std::size_t c = 0; c < crossings.size(); ++c)
        if (!used[c]) ++m.n_false;

    if (!m.delays.empty()) {
        m.median_delay = median(m.delays);
        double s = 0;
        for (double d : m.delays) s += d;
        m.mean_delay = s / double(m.delays.size());
    }
}

} // namespace qpf
