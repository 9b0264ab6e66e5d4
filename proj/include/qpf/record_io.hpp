#pragma once

#include <map>
#include <string>

#include "qpf/projfilter.hpp"
#include "qpf/qfilter.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// CSV conventions shared by every file format: a leading block of
// "# key=value" metadata lines, one header line, then data rows. Floats are
// written with 17 significant digits so records round-trip bit-exactly.

std::string format_double(double v);

void write_observation_record(const std::string& path, const ObservationRecord& rec);
ObservationRecord read_observation_record(const std::string& path);

void write_truth_record(const std::string& path, const TruthRecord& truth,
                        const ObservationRecord& rec);
TruthRecord read_truth_record(const std::string& path);

void write_filter_estimates(const std::string& path, const FilterEstimates& est,
                            const ModelParams& params);
FilterEstimates read_filter_estimates(const std::string& path);

void write_projection_trace(const std::string& path, const ProjRunResult& run,
                            const ObservationRecord& rec);

// flat key=value file (metrics, oracle summaries)
void write_kv(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_kv(const std::string& path);

} // namespace qpf
