#pragma once

#include <optional>
#include <vector>

#include "qpf/qfilter.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// RMS / mean-absolute differences between two aligned estimate series, plus
// per-jump detection-delay statistics against side-channel events.
// Delay sign convention: crossing time minus jump time (negative = filter led).
struct ComparisonMetrics {
    double rms_p = 0.0;
    double rms_y = 0.0;
    double mae_p = 0.0;
    double mae_y = 0.0;
    std::int64_t n_side_jumps = 0;
    std::int64_t n_matched = 0;
    std::int64_t n_missed = 0;
    std::int64_t n_false = 0;
    std::optional<double> median_delay;
    std::optional<double> mean_delay;
    std::vector<double> delays;
};

// Series difference metrics; throws if the time grids are misaligned.
ComparisonMetrics compare_estimates(const FilterEstimates& a, const FilterEstimates& b);

// Half-crossing events of a p_plus series: (step index, direction up?).
struct Crossing {
    std::int64_t step;
    bool upward;
};
std::vector<Crossing> half_crossings(const std::vector<double>& p_plus);

// Matches side-channel jumps (plus -> downward crossing, minus -> upward) to
// the nearest same-direction crossing within |delay| <= window; unmatched
// jumps count as misses, unmatched crossings as false jumps.
void match_delays(ComparisonMetrics& m, const ObservationRecord& record,
                  const std::vector<double>& p_plus, double window);

double median(std::vector<double> v);

} // namespace qpf
