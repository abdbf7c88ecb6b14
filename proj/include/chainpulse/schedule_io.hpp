// Copyright 2026 The Chainpulse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

#include "chainpulse/device_model.hpp"
#include "chainpulse/gate_fidelity.hpp"
#include "chainpulse/propagator.hpp"
#include "chainpulse/synth.hpp"

namespace chainpulse {

inline constexpr int kScheduleFormatVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScheduleMetadata {
    std::uint64_t seed = 0;
    double achieved_fidelity = 0.0;
    double leakage = 0.0;
    std::string solver;
    double wall_seconds = 0.0;
    std::string created;
};

/// On-disk schedule: pulse values plus everything needed to re-evaluate them.
struct ScheduleFile {
    int format_version = kScheduleFormatVersion;
    PulseSchedule schedule;
    PhaseCompensation beta;
    DeviceParams device;
    std::string target_name;
    ScheduleMetadata metadata;

    int n() const { return schedule.n(); }
    double dt_ns() const { return schedule.dt; }
    double theta_ns() const { return schedule.theta(); }
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline ScheduleFile make_schedule_file(const SynthesisResult& res, const SynthesisConfig& cfg) {
    ScheduleFile f;
    f.schedule = res.schedule;
    f.beta = res.beta;
    f.device = cfg.device;
    f.target_name = gate_name_string(cfg.target.name);
    f.metadata.seed = cfg.seed;
    f.metadata.achieved_fidelity = res.report.fidelity;
    f.metadata.leakage = res.report.leakage;
    f.metadata.solver = res.solver;
    f.metadata.wall_seconds = res.wall_seconds;
    f.metadata.created = utc_timestamp();
    return f;
}

inline nlohmann::ordered_json to_json(const ScheduleFile& f) {
    using json = nlohmann::ordered_json;
    json values = json::array();
    for (int i = 0; i < f.schedule.num_steps(); ++i) {
        json row = json::array();
        for (int k = 0; k < f.schedule.n(); ++k) row.push_back(f.schedule.values(i, k));
        values.push_back(std::move(row));
    }
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
    return json{
        {"format_version", f.format_version},
        {"n", f.n()},
        {"dt_ns", f.dt_ns()},
        {"theta_ns", f.theta_ns()},
        {"target", f.target_name},
        {"device",
         {{"eta", f.device.eta},
          {"eta_prime", f.device.eta_prime},
          {"g", f.device.g},
          {"eps_min", f.device.eps_min},
          {"eps_max", f.device.eps_max}}},
        {"beta_left", vec(f.beta.left)},
        {"beta_right", vec(f.beta.right)},
        {"values", std::move(values)},
        {"metadata",
         {{"seed", f.metadata.seed},
          {"achieved_fidelity", f.metadata.achieved_fidelity},
          {"leakage", f.metadata.leakage},
          {"solver", f.metadata.solver},
          {"wall_seconds", f.metadata.wall_seconds},
          {"created", f.metadata.created}}},
    };
}

namespace detail {

inline const nlohmann::ordered_json& require(const nlohmann::ordered_json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
    return j.at(key);
}

template <typename T>
T field(const nlohmann::ordered_json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    try {
        return v.get<T>();
    } catch (const nlohmann::ordered_json::exception& e) {
        throw FormatError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

inline Eigen::VectorXd angle_field(const nlohmann::ordered_json& j, const char* key, int n) {
    const auto v = field<std::vector<double>>(j, key, "schedule");
    if (static_cast<int>(v.size()) != n)
        throw FormatError(std::string("schedule: field '") + key + "' must hold n = " + std::to_string(n) + " angles");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

}  // namespace detail

inline ScheduleFile schedule_from_json(const nlohmann::ordered_json& j) {
    ScheduleFile f;
    f.format_version = detail::field<int>(j, "format_version", "schedule");
    if (f.format_version != kScheduleFormatVersion)
        throw FormatError("schedule: unsupported format_version " + std::to_string(f.format_version) + " (expected " +
                          std::to_string(kScheduleFormatVersion) + ")");
    const int n = detail::field<int>(j, "n", "schedule");
    const double dt = detail::field<double>(j, "dt_ns", "schedule");
    const double theta = detail::field<double>(j, "theta_ns", "schedule");
    if (n < 1) throw FormatError("schedule: n must be positive");
    if (!(dt > 0.0)) throw FormatError("schedule: dt_ns must be positive");
    f.target_name = detail::field<std::string>(j, "target", "schedule");

    const auto& dev = detail::require(j, "device", "schedule");
    f.device.n = n;
    f.device.eta = detail::field<double>(dev, "eta", "schedule.device");
    f.device.eta_prime = detail::field<double>(dev, "eta_prime", "schedule.device");
    f.device.g = detail::field<double>(dev, "g", "schedule.device");
    f.device.eps_min = detail::field<double>(dev, "eps_min", "schedule.device");
    f.device.eps_max = detail::field<double>(dev, "eps_max", "schedule.device");
    try {
        f.device.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("schedule.device: ") + e.what());
    }

    const auto rows = detail::field<std::vector<std::vector<double>>>(j, "values", "schedule");
    if (rows.empty()) throw FormatError("schedule: 'values' is empty");
    const int m = static_cast<int>(rows.size());
    if (std::abs(theta - m * dt) > 1e-9 * std::max(1.0, theta))
        throw FormatError("schedule: theta_ns = " + std::to_string(theta) + " differs from steps * dt_ns = " +
                          std::to_string(m * dt));
    f.schedule = PulseSchedule(n, m, dt);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
            throw FormatError("schedule: values row " + std::to_string(i) + " has " +
                              std::to_string(rows[static_cast<std::size_t>(i)].size()) + " entries, expected " +
                              std::to_string(n));
        for (int k = 0; k < n; ++k) f.schedule.values(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    f.beta.left = detail::angle_field(j, "beta_left", n);
    f.beta.right = detail::angle_field(j, "beta_right", n);

    if (j.contains("metadata")) {
        const auto& md = j.at("metadata");
        if (md.contains("seed")) f.metadata.seed = detail::field<std::uint64_t>(md, "seed", "schedule.metadata");
        if (md.contains("achieved_fidelity"))
            f.metadata.achieved_fidelity = detail::field<double>(md, "achieved_fidelity", "schedule.metadata");
        if (md.contains("leakage")) f.metadata.leakage = detail::field<double>(md, "leakage", "schedule.metadata");
        if (md.contains("solver")) f.metadata.solver = detail::field<std::string>(md, "solver", "schedule.metadata");
        if (md.contains("wall_seconds"))
            f.metadata.wall_seconds = detail::field<double>(md, "wall_seconds", "schedule.metadata");
        if (md.contains("created")) f.metadata.created = detail::field<std::string>(md, "created", "schedule.metadata");
    }
    return f;
}

inline void write_schedule(std::ostream& os, const ScheduleFile& f) { os << to_json(f).dump(2) << '\n'; }

inline void write_schedule(const std::string& path, const ScheduleFile& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_schedule(os, f);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

inline ScheduleFile read_schedule(std::istream& is, const std::string& name = "<stream>") {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(is);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw FormatError(name + ": " + e.what());
    }
    try {
        return schedule_from_json(j);
    } catch (const FormatError& e) {
        throw FormatError(name + ": " + e.what());
    }
}

inline ScheduleFile read_schedule(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_schedule(is, path);
}

/// CSV export: header "step,eps_1,...,eps_n", one row per time step.
inline void write_schedule_csv(std::ostream& os, const PulseSchedule& s) {
    os << "step";
    for (int k = 0; k < s.n(); ++k) os << ",eps_" << (k + 1);
    os << '\n';
    const auto old = os.precision(17);
    for (int i = 0; i < s.num_steps(); ++i) {
        os << i;
        for (int k = 0; k < s.n(); ++k) os << ',' << s.values(i, k);
        os << '\n';
    }
    os.precision(old);
}

/// Staircase for plotting: every step contributes its start and end time with the same values.
inline void write_plot_data_csv(std::ostream& os, const PulseSchedule& s) {
    os << "step,time_ns";
    for (int k = 0; k < s.n(); ++k) os << ",eps_" << (k + 1);
    os << '\n';
    const auto old = os.precision(17);
    for (int i = 0; i < s.num_steps(); ++i) {
        for (double t : {i * s.dt, (i + 1) * s.dt}) {
            os << i << ',' << t;
            for (int k = 0; k < s.n(); ++k) os << ',' << s.values(i, k);
            os << '\n';
        }
    }
    os.precision(old);
}

/// Target gate named in a schedule file (sized to its n for built-ins).
inline GateTarget target_for(const std::string& name, int n) {
    const GateName g = parse_gate_name(name);
    if (g == GateName::Custom) throw std::invalid_argument("custom targets cannot be rebuilt from a name");
    if (gate_qubits(g) != n)
        throw std::invalid_argument("gate '" + name + "' acts on " + std::to_string(gate_qubits(g)) + " qubits, schedule has n = " +
                                    std::to_string(n));
    return make_target(g);
}

/// Evaluates a stored schedule against `target` at its stored compensation angles.
inline FidelityReport evaluate_schedule(const ScheduleFile& f, const GateTarget& target,
                                        double threshold = kDefaultFidelityThreshold) {
    const auto basis = build_basis(f.n(), 4, f.n());
    const auto ops = build_operators(basis, f.device);
    return fidelity(project(propagate(f.schedule, ops).unitary, basis), target, f.beta, threshold);
}

inline FidelityReport evaluate_schedule(const ScheduleFile& f, double threshold = kDefaultFidelityThreshold) {
    return evaluate_schedule(f, target_for(f.target_name, f.n()), threshold);
}

// ---------------------------------------------------------------------------
// Run configuration: flat "key = value" lines, '#' starts a comment.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& v, const std::string& key, int line) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (!is || !(is >> std::ws).eof())
        throw FormatError("config line " + std::to_string(line) + ": bad value '" + v + "' for '" + key + "'");
    return out;
}

}  // namespace detail

/// Parses a run configuration; unknown keys and malformed values are errors.
inline SynthesisConfig parse_run_config(std::istream& is) {
    SynthesisConfig cfg;
    std::map<std::string, std::string> kv;
    std::map<std::string, int> where;
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw FormatError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string val = detail::trim(text.substr(eq + 1));
        if (kv.count(key)) throw FormatError("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
        kv[key] = val;
        where[key] = line;
    }

    using Setter = std::function<void(const std::string&, int)>;
    auto real = [](double& dst) -> Setter {
        return [&dst](const std::string& v, int l) { dst = detail::parse_number<double>(v, "value", l); };
    };
    auto integer = [](int& dst) -> Setter {
        return [&dst](const std::string& v, int l) { dst = detail::parse_number<int>(v, "value", l); };
    };
    std::string gate = "ccz";
    int n = 0;
    const std::map<std::string, Setter> setters = {
        {"gate", [&](const std::string& v, int) { gate = v; }},
        {"n", integer(n)},
        {"theta_ns", real(cfg.theta)},
        {"dt_ns", real(cfg.dt)},
        {"fidelity_threshold", real(cfg.fidelity_threshold)},
        {"seed", [&](const std::string& v, int l) { cfg.seed = detail::parse_number<std::uint64_t>(v, "seed", l); }},
        {"max_local_searches", integer(cfg.max_local_searches)},
        {"time_budget_s", real(cfg.time_budget)},
        {"method", [&](const std::string& v, int) { cfg.method = parse_search_method(v); }},
        {"objective",
         [&](const std::string& v, int l) {
             if (v == "arccos") cfg.objective = ObjectiveKind::Arccos;
             else if (v == "infidelity") cfg.objective = ObjectiveKind::Infidelity;
             else throw FormatError("config line " + std::to_string(l) + ": objective must be arccos or infidelity");
         }},
        {"local_method",
         [&](const std::string& v, int l) {
             if (v == "quasi_newton") cfg.local_method = LocalMethod::QuasiNewton;
             else if (v == "pattern_search") cfg.local_method = LocalMethod::PatternSearch;
             else throw FormatError("config line " + std::to_string(l) + ": local_method must be quasi_newton or pattern_search");
         }},
        {"workers", integer(cfg.workers)},
        {"local_tolerance", real(cfg.local_tolerance)},
        {"local_max_iterations", integer(cfg.local_max_iterations)},
        {"local_stall_tolerance", real(cfg.local_stall_tolerance)},
        {"local_stall_window", integer(cfg.local_stall_window)},
        {"sample_halfwidth", real(cfg.sample_halfwidth)},
        {"refset_size", integer(cfg.refset_size)},
        {"initial_samples", integer(cfg.initial_samples)},
        {"trials_per_search", integer(cfg.trials_per_search)},
        {"uniform_share", real(cfg.uniform_share)},
        {"combine_share", real(cfg.combine_share)},
        {"perturb_sigma", real(cfg.perturb_sigma)},
        {"merit_wait_cycle", integer(cfg.merit_wait_cycle)},
        {"merit_relax", real(cfg.merit_relax)},
        {"population", integer(cfg.population)},
        {"max_generations", integer(cfg.max_generations)},
        {"eta", real(cfg.device.eta)},
        {"eta_prime", real(cfg.device.eta_prime)},
        {"g", real(cfg.device.g)},
        {"eps_min", real(cfg.device.eps_min)},
        {"eps_max", real(cfg.device.eps_max)},
    };
    for (const auto& [key, val] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw FormatError("config line " + std::to_string(where[key]) + ": unknown key '" + key + "'");
        try {
            it->second(val, where[key]);
        } catch (const std::invalid_argument& e) {
            throw FormatError("config line " + std::to_string(where[key]) + ": " + e.what());
        }
    }
    GateName g;
    try {
        g = parse_gate_name(gate);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    const int gate_n = gate_qubits(g);
    if (g == GateName::Custom) throw FormatError("config: custom gates are not configurable from a run file");
    if (n != 0 && n != gate_n) throw FormatError("config: n = " + std::to_string(n) + " does not match gate '" + gate + "'");
    cfg.device.n = gate_n;
    cfg.target = make_target(g);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline SynthesisConfig read_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return parse_run_config(is);
}

}  // namespace chainpulse
