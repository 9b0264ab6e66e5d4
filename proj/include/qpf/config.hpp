#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qpf/qstate.hpp"
#include "qpf/trajectory.hpp"

namespace qpf {

// Flat key = value experiment configuration; CLI flags override file values.
struct ExperimentConfig {
    ModelParams params;
    SimGrid grid;          // grid.seed unused; seeds below drive runs
    QGrid qgrid;
    int n_fock = 25;
    std::string initial = "minus_vac";
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "out";
    std::string backend = "qpde";

    void validate() const; // throws std::invalid_argument with a message
};

// Parses "key = value" lines ('#' comments). Unknown keys are an error.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

// "N" or "N..M" or "a,b,c"
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// Figure presets; strong coupling runs at finer dt (see README).
ExperimentConfig default_config();        // g=120, kappa=40, gamma=20, eta=1, 25k steps
ExperimentConfig strong_coupling_config(); // g=600, kappa=200, gamma=20, 100k steps

int thread_cap(); // QPF_THREADS, default hardware_concurrency

} // namespace qpf
