#include "qpf/record_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpf {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

struct ParsedFile {
    std::map<std::string, std::string> meta;
    std::string header;
    std::vector<std::string> rows;
};

ParsedFile parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ParsedFile out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            out.meta[key] = line.substr(eq + 1);
        } else if (!header_seen) {
            out.header = line;
            header_seen = true;
        } else {
            out.rows.push_back(line);
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double meta_double(const ParsedFile& f, const std::string& key) {
    const auto it = f.meta.find(key);
    if (it == f.meta.end()) throw std::runtime_error("missing metadata key: " + key);
    return std::stod(it->second);
}

std::uint64_t meta_u64(const ParsedFile& f, const std::string& key) {
    const auto it = f.meta.find(key);
    if (it == f.meta.end()) throw std::runtime_error("missing metadata key: " + key);
    return std::stoull(it->second);
}

void write_params_meta(std::ofstream& out, const ModelParams& p) {
    out << "# g=" << format_double(p.g) << "\n";
    out << "# kappa=" << format_double(p.kappa) << "\n";
    out << "# gamma=" << format_double(p.gamma) << "\n";
    out << "# eta=" << format_double(p.eta) << "\n";
}

ModelParams read_params_meta(const ParsedFile& f) {
    ModelParams p;
    p.g = meta_double(f, "g");
    p.kappa = meta_double(f, "kappa");
    p.gamma = meta_double(f, "gamma");
    p.eta = meta_double(f, "eta");
    return p;
}

} // namespace

void write_observation_record(const std::string& path, const ObservationRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# format=observation_record\n";
    write_params_meta(out, rec.params);
    out << "# dt=" << format_double(rec.dt) << "\n";
    out << "# n_steps=" << rec.n_steps << "\n";
    out << "# seed=" << rec.seed << "\n";
    out << "# n_fock=" << rec.n_fock << "\n";
    out << "# initial=" << rec.initial << "\n";
    out << "t,dY,jump\n";
    std::size_t ji = 0;
    for (std::int64_t k = 0; k < rec.n_steps; ++k) {
        char jump = '-';
        if (ji < rec.jumps.size() && rec.jumps[ji].step == k) {
            jump = jump_symbol(rec.jumps[ji].channel);
            ++ji;
        }
        out << format_double(rec.time(k)) << ',' << format_double(rec.dY[k]) << ',' << jump
            << "\n";
    }
}

ObservationRecord read_observation_record(const std::string& path) {
    const ParsedFile f = parse_csv(path);
    if (f.meta.count("format") && f.meta.at("format") != "observation_record")
        throw std::runtime_error(path + ": not an observation record");
    ObservationRecord rec;
    rec.params = read_params_meta(f);
    rec.dt = meta_double(f, "dt");
    rec.n_steps = std::int64_t(meta_u64(f, "n_steps"));
    rec.seed = meta_u64(f, "seed");
    rec.n_fock = int(meta_u64(f, "n_fock"));
    if (f.meta.count("initial")) rec.initial = f.meta.at("initial");
    if (std::int64_t(f.rows.size()) != rec.n_steps)
        throw std::runtime_error(path + ": row count does not match n_steps");
    rec.dY.resize(rec.n_steps);
    for (std::int64_t k = 0; k < rec.n_steps; ++k) {
        const auto cols = split(f.rows[k], ',');
        if (cols.size() != 3) throw std::runtime_error(path + ": malformed row");
        rec.dY[k] = std::stod(cols[1]);
        const char j = cols[2].empty() ? '-' : cols[2][0];
        switch (j) {
            case '-': break;
            case '+': rec.jumps.push_back({k, JumpChannel::plus}); break;
            case 'z': rec.jumps.push_back({k, JumpChannel::z}); break;
            case 'm': rec.jumps.push_back({k, JumpChannel::minus}); break;
            default: throw std::runtime_error(path + ": unknown jump symbol");
        }
    }
    return rec;
}

void write_truth_record(const std::string& path, const TruthRecord& truth,
                        const ObservationRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# format=truth_record\n";
    write_params_meta(out, rec.params);
    out << "# dt=" << format_double(truth.dt) << "\n";
    out << "# n_steps=" << rec.n_steps << "\n";
    out << "# seed=" << rec.seed << "\n";
    out << "t,p_plus_full,y_mean_full\n";
    for (std::size_t k = 0; k < truth.p_plus_full.size(); ++k)
        out << format_double(truth.dt * double(k)) << ',' << format_double(truth.p_plus_full[k])
            << ',' << format_double(truth.y_mean_full[k]) << "\n";
}

TruthRecord read_truth_record(const std::string& path) {
    const ParsedFile f = parse_csv(path);
    TruthRecord t;
    t.dt = meta_double(f, "dt");
    t.p_plus_full.reserve(f.rows.size());
    t.y_mean_full.reserve(f.rows.size());
    for (const auto& row : f.rows) {
        const auto cols = split(row, ',');
        if (cols.size() != 3) throw std::runtime_error(path + ": malformed row");
        t.p_plus_full.push_back(std::stod(cols[1]));
        t.y_mean_full.push_back(std::stod(cols[2]));
    }
    return t;
}

void write_filter_estimates(const std::string& path, const FilterEstimates& est,
                            const ModelParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# format=filter_estimates\n";
    write_params_meta(out, params);
    out << "# dt=" << format_double(est.dt) << "\n";
    out << "# backend=" << est.backend << "\n";
    out << "# record_seed=" << est.record_seed << "\n";
    out << "t,p_plus,y_mean\n";
    for (std::size_t k = 0; k < est.p_plus.size(); ++k)
        out << format_double(est.dt * double(k)) << ',' << format_double(est.p_plus[k]) << ','
            << format_double(est.y_mean[k]) << "\n";
}

FilterEstimates read_filter_estimates(const std::string& path) {
    const ParsedFile f = parse_csv(path);
    FilterEstimates est;
    est.dt = meta_double(f, "dt");
    if (f.meta.count("backend")) est.backend = f.meta.at("backend");
    if (f.meta.count("record_seed")) est.record_seed = meta_u64(f, "record_seed");
    for (const auto& row : f.rows) {
        const auto cols = split(row, ',');
        if (cols.size() != 3) throw std::runtime_error(path + ": malformed row");
        est.p_plus.push_back(std::stod(cols[1]));
        est.y_mean.push_back(std::stod(cols[2]));
    }
    return est;
}

void write_projection_trace(const std::string& path, const ProjRunResult& run,
                            const ObservationRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# format=projection_trace\n";
    write_params_meta(out, rec.params);
    out << "# dt=" << format_double(rec.dt) << "\n";
    out << "# record_seed=" << rec.seed << "\n";
    out << "# clamp_count=" << run.clamp_count << "\n";
    out << "t,nu_tilde,mu_plus,mu_minus\n";
    for (std::size_t k = 0; k < run.nu_tilde.size(); ++k)
        out << format_double(rec.dt * double(k)) << ',' << format_double(run.nu_tilde[k]) << ','
            << format_double(run.mu_plus[k]) << ',' << format_double(run.mu_minus[k]) << "\n";
}

void write_kv(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

} // namespace qpf
