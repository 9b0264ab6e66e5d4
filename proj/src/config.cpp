#include "qpf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace qpf {

void ExperimentConfig::validate() const {
    if (!params.valid())
        throw std::invalid_argument("invalid model parameters (need g,kappa,gamma > 0, 0 < eta <= 1)");
    if (!grid.valid()) throw std::invalid_argument("invalid simulation grid (dt, n_steps > 0)");
    if (!qgrid.valid())
        throw std::invalid_argument("invalid q-grid (y_min < y_max, n_points >= 16)");
    if (n_fock < 2) throw std::invalid_argument("n_fock must be >= 2");
    if (seeds.empty()) throw std::invalid_argument("seed list must be non-empty");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j)
            if (seeds[i] == seeds[j]) throw std::invalid_argument("seeds must be distinct");
    if (initial != "minus_vac" && initial != "plus_vac")
        throw std::invalid_argument("unknown initial state tag: " + initial);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto range_pos = text.find("..");
    if (range_pos != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
        const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
        if (hi < lo) throw std::invalid_argument("seed range end before start");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok =
            comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return seeds;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "g") cfg.params.g = std::stod(value);
    else if (key == "kappa") cfg.params.kappa = std::stod(value);
    else if (key == "gamma") cfg.params.gamma = std::stod(value);
    else if (key == "eta") cfg.params.eta = std::stod(value);
    else if (key == "dt") cfg.grid.dt = std::stod(value);
    else if (key == "n_steps") cfg.grid.n_steps = std::stoll(value);
    else if (key == "n_fock") cfg.n_fock = std::stoi(value);
    else if (key == "qgrid_min") cfg.qgrid.y_min = std::stod(value);
    else if (key == "qgrid_max") cfg.qgrid.y_max = std::stod(value);
    else if (key == "qgrid_points") cfg.qgrid.n_points = std::stoi(value);
    else if (key == "initial") cfg.initial = value;
    else if (key == "seeds" || key == "seed") cfg.seeds = parse_seed_list(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "backend") cfg.backend = value;
    else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    ExperimentConfig cfg = default_config();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.params = {120.0, 40.0, 20.0, 1.0};
    cfg.grid.dt = 1e-5;
    cfg.grid.n_steps = 25000;
    cfg.qgrid = {-18.0, 18.0, 128};
    cfg.n_fock = 25;
    return cfg;
}

ExperimentConfig strong_coupling_config() {
    ExperimentConfig cfg = default_config();
    cfg.params.g = 600.0;
    cfg.params.kappa = 200.0;
    cfg.grid.dt = 5e-7;
    cfg.grid.n_steps = 100000;
    return cfg;
}

int thread_cap() {
    if (const char* env = std::getenv("QPF_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

} // namespace qpf
