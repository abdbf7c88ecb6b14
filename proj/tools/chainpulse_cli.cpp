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

// Command-line front end.
//
// Exit codes: 0 success, 1 no feasible schedule within the budget (the best
// schedule found is still written), 2 usage or input errors.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chainpulse/chainpulse.hpp"

namespace {

using namespace chainpulse;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int default_workers() {
    if (const char* env = std::getenv("CHAINPULSE_THREADS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
        throw UsageError("CHAINPULSE_THREADS must be a positive integer");
    }
    return 1;
}

// Streams to a file, or to stdout for "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw UsageError("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void print_report(const std::string& label, const FidelityReport& r, bool in_bounds) {
    std::printf("%sfidelity=%.10f infidelity=%.3e leakage=%.3e feasible=%s in_bounds=%s\n", label.c_str(), r.fidelity,
                1.0 - r.fidelity, r.leakage, r.feasible ? "yes" : "no", in_bounds ? "yes" : "no");
}

void print_result(const SynthesisResult& res, const DeviceParams& device) {
    std::printf("solver=%s local_searches=%d wall_s=%.2f\n", res.solver.c_str(), res.local_searches, res.wall_seconds);
    print_report("", res.report, res.schedule.within_bounds(device));
}

std::string theta_tag(double theta) {
    std::ostringstream os;
    os << theta;
    return os.str();
}

struct SynthOptions {
    std::string config;
    int n = 0;
    std::string gate = "ccz";
    double theta = 26.0;
    double dt = 1.0;
    std::uint64_t seed = 1;
    std::string method = "scatter";
    double budget = 600.0;
    int workers = 0;
    int max_searches = 0;
    double halfwidth = 0.0;
    double threshold = kDefaultFidelityThreshold;
    bool verbose = false;
};

// Options named on the command line override the config file, which overrides defaults.
SynthesisConfig build_config(const SynthOptions& o, const CLI::App& cmd) {
    SynthesisConfig cfg;
    if (!o.config.empty()) {
        try {
            cfg = read_run_config(o.config);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    const auto given = [&](const char* name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    try {
        if (given("--gate") || o.config.empty()) {
            const GateName g = parse_gate_name(o.gate);
            if (g == GateName::Custom) throw UsageError("unknown gate '" + o.gate + "'");
            cfg.target = make_target(g);
            cfg.device.n = gate_qubits(g);
        }
        if (given("--n") && o.n != cfg.device.n)
            throw UsageError("--n " + std::to_string(o.n) + " does not match gate " + gate_name_string(cfg.target.name));
        if (given("--theta-ns")) cfg.theta = o.theta;
        if (given("--dt-ns")) cfg.dt = o.dt;
        if (given("--seed")) cfg.seed = o.seed;
        if (given("--method")) cfg.method = parse_search_method(o.method);
        if (given("--budget-s")) cfg.time_budget = o.budget;
        if (given("--max-searches")) cfg.max_local_searches = o.max_searches;
        if (given("--sample-halfwidth")) cfg.sample_halfwidth = o.halfwidth;
        if (given("--threshold")) cfg.fidelity_threshold = o.threshold;
        cfg.workers = given("--workers") ? o.workers : (o.config.empty() ? default_workers() : cfg.workers);
        cfg.verbose = o.verbose;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void add_synth_options(CLI::App* cmd, SynthOptions& o) {
    cmd->add_option("--config", o.config, "Run configuration file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--n", o.n, "Number of qubits (must match the gate)");
    cmd->add_option("--gate", o.gate, "cz | ccz | toffoli | cccz")->default_val("ccz");
    cmd->add_option("--dt-ns", o.dt, "Time step (ns)")->default_val(1.0);
    cmd->add_option("--seed", o.seed, "Random seed")->default_val(1);
    cmd->add_option("--method", o.method, "scatter | multistart | de")->default_val("scatter");
    cmd->add_option("--workers", o.workers, "Concurrent local searches (default CHAINPULSE_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-searches", o.max_searches, "Cap on local searches")->check(CLI::PositiveNumber);
    cmd->add_option("--sample-halfwidth", o.halfwidth, "Half-width (GHz) of the start-point sampling box")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", o.threshold, "Fidelity at which the search stops");
    cmd->add_flag("-v,--verbose", o.verbose, "Progress on stderr");
}

int run_synthesize(const SynthOptions& o, const CLI::App& cmd, const std::string& out) {
    const SynthesisConfig cfg = build_config(o, cmd);
    const auto res = synthesize(cfg);
    write_schedule(out, make_schedule_file(res, cfg));
    print_result(res, cfg.device);
    std::printf("wrote %s\n", out.c_str());
    return res.succeeded ? kExitOk : kExitInfeasible;
}

int run_evaluate(const std::string& in, const std::string& gate, double threshold) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScheduleFile f = read_schedule(in);
    GateTarget target;
    try {
        target = target_for(gate.empty() ? f.target_name : gate, f.n());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto r = evaluate_schedule(f, target, threshold);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::printf("n=%d theta_ns=%g dt_ns=%g steps=%d target=%s\n", f.n(), f.theta_ns(), f.dt_ns(),
                f.schedule.num_steps(), gate_name_string(target.name).c_str());
    const bool in_bounds = f.schedule.within_bounds(f.device);
    print_report("", r, in_bounds);
    std::printf("elapsed_ms=%.2f\n", ms);
    return r.feasible && in_bounds ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse synthesis for fixed-coupling transmon chains"};
    app.require_subcommand(1);

    SynthOptions synth;
    std::string synth_out = "schedule.json";
    auto* cmd_synth = app.add_subcommand("synthesize", "Search for a schedule realizing a gate");
    add_synth_options(cmd_synth, synth);
    cmd_synth->add_option("--theta-ns", synth.theta, "Gate time (ns)")->default_val(26.0);
    cmd_synth->add_option("--budget-s", synth.budget, "Wall-clock budget (s)")->default_val(600.0);
    cmd_synth->add_option("--out", synth_out, "Output schedule JSON")->default_val("schedule.json");

    std::string eval_in, eval_gate;
    double eval_threshold = kDefaultFidelityThreshold;
    auto* cmd_eval = app.add_subcommand("evaluate", "Report fidelity and leakage of a stored schedule");
    cmd_eval->add_option("--in", eval_in, "Schedule JSON")->required()->check(CLI::ExistingFile);
    cmd_eval->add_option("--gate", eval_gate, "Override the stored target");
    cmd_eval->add_option("--threshold", eval_threshold, "Feasibility threshold")->default_val(kDefaultFidelityThreshold);

    SynthOptions cont;
    std::string cont_in, cont_out = "continued.json";
    bool cont_rescale_only = false;
    auto* cmd_cont = app.add_subcommand("continue", "Rescale a schedule to a shorter gate time and re-solve");
    cmd_cont->add_option("--in", cont_in, "Schedule JSON")->required()->check(CLI::ExistingFile);
    cmd_cont->add_option("--theta-ns", cont.theta, "New gate time (ns)")->required();
    cmd_cont->add_option("--budget-s", cont.budget, "Wall-clock budget (s)")->default_val(600.0);
    cmd_cont->add_option("--seed", cont.seed, "Random seed")->default_val(1);
    cmd_cont->add_option("--method", cont.method, "scatter | multistart | de")->default_val("scatter");
    cmd_cont->add_option("--workers", cont.workers, "Concurrent local searches")->check(CLI::PositiveNumber);
    cmd_cont->add_option("--threshold", cont.threshold, "Fidelity at which the search stops")
        ->default_val(kDefaultFidelityThreshold);
    cmd_cont->add_flag("--rescale-only", cont_rescale_only, "Write the rescaled schedule without re-solving");
    cmd_cont->add_flag("-v,--verbose", cont.verbose, "Progress on stderr");
    cmd_cont->add_option("--out", cont_out, "Output schedule JSON")->default_val("continued.json");

    SynthOptions sweep_opt;
    double sweep_start = 26.0, sweep_min = 20.0, sweep_budget = 600.0;
    std::string sweep_dir = ".";
    auto* cmd_sweep = app.add_subcommand("sweep-theta", "Shorten the gate time step by step by continuation");
    add_synth_options(cmd_sweep, sweep_opt);
    cmd_sweep->add_option("--theta-start", sweep_start, "First gate time (ns)")->default_val(26.0);
    cmd_sweep->add_option("--theta-min", sweep_min, "Last gate time tried (ns)")->default_val(20.0);
    cmd_sweep->add_option("--budget-s-per-theta", sweep_budget, "Budget per gate time (s)")->default_val(600.0);
    cmd_sweep->add_option("--out-dir", sweep_dir, "Directory for one schedule per gate time")->default_val(".");

    std::string spec_freqs = "4.8,sweep,6.8", spec_range = "4.5:7.5", spec_out = "-";
    int spec_points = 301;
    auto* cmd_spec = app.add_subcommand("spectrum", "Eigenvalues under a one-site frequency sweep");
    cmd_spec->add_option("--freqs", spec_freqs, "Site frequencies (GHz); one entry reads 'sweep'")
        ->default_val("4.8,sweep,6.8");
    cmd_spec->add_option("--range", spec_range, "lo:hi of the swept frequency (GHz)")->default_val("4.5:7.5");
    cmd_spec->add_option("--points", spec_points, "Sweep points")->default_val(301)->check(CLI::Range(2, 1000000));
    cmd_spec->add_option("--out", spec_out, "CSV output, '-' for stdout")->default_val("-");

    std::string plot_in, plot_out = "-";
    auto* cmd_plot = app.add_subcommand("plot-data", "Staircase CSV of a schedule for plotting");
    cmd_plot->add_option("--in", plot_in, "Schedule JSON")->required()->check(CLI::ExistingFile);
    cmd_plot->add_option("--out", plot_out, "CSV output, '-' for stdout")->default_val("-");

    std::string export_in, export_out = "-";
    auto* cmd_export = app.add_subcommand("export-csv", "Per-step CSV of a schedule");
    cmd_export->add_option("--in", export_in, "Schedule JSON")->required()->check(CLI::ExistingFile);
    cmd_export->add_option("--out", export_out, "CSV output, '-' for stdout")->default_val("-");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*cmd_synth) return run_synthesize(synth, *cmd_synth, synth_out);

        if (*cmd_eval) return run_evaluate(eval_in, eval_gate, eval_threshold);

        if (*cmd_cont) {
            const ScheduleFile in = read_schedule(cont_in);
            if (cont.theta > in.theta_ns()) throw UsageError("--theta-ns must not exceed the input gate time");
            PulseSchedule seed;
            try {
                seed = continue_schedule(in.schedule, cont.theta);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            SynthesisConfig cfg;
            cfg.device = in.device;
            cfg.target = target_for(in.target_name, in.n());
            cfg.theta = cont.theta;
            cfg.dt = in.dt_ns();
            cfg.seed = cont.seed;
            cfg.method = parse_search_method(cont.method);
            cfg.time_budget = cont.budget;
            cfg.fidelity_threshold = cont.threshold;
            cfg.workers = cmd_cont->count("--workers") ? cont.workers : default_workers();
            cfg.verbose = cont.verbose;
            const GateProblem problem = make_problem(cfg);
            SynthesisResult res;
            if (cont_rescale_only) {
                res = finalize_result(problem, cfg, problem.pack(seed, in.beta), "rescale");
            } else {
                cfg.initial_points = continuation_starts(problem, in.schedule, in.beta);
                res = synthesize(cfg);
            }
            write_schedule(cont_out, make_schedule_file(res, cfg));
            print_result(res, cfg.device);
            std::printf("wrote %s\n", cont_out.c_str());
            return res.succeeded ? kExitOk : kExitInfeasible;
        }

        if (*cmd_sweep) {
            SynthesisConfig cfg = build_config(sweep_opt, *cmd_sweep);
            cfg.time_budget = sweep_budget;
            std::filesystem::create_directories(sweep_dir);
            const auto runs = theta_sweep(cfg, sweep_start, sweep_min);
            const std::string gate = gate_name_string(cfg.target.name);
            for (const auto& r : runs) {
                SynthesisConfig at = cfg;
                at.theta = r.schedule.theta();
                const auto path = (std::filesystem::path(sweep_dir) / (gate + "_" + theta_tag(at.theta) + "ns.json")).string();
                write_schedule(path, make_schedule_file(r, at));
                std::printf("theta_ns=%g fidelity=%.10f %s -> %s\n", at.theta, r.report.fidelity,
                            r.succeeded ? "feasible" : "not found", path.c_str());
            }
            return !runs.empty() && runs.front().succeeded ? kExitOk : kExitInfeasible;
        }

        if (*cmd_spec) {
            SweepSpec spec;
            spec.num_points = spec_points;
            std::stringstream fs(spec_freqs);
            std::string tok;
            int swept = -1;
            while (std::getline(fs, tok, ',')) {
                if (tok == "sweep") {
                    if (swept >= 0) throw UsageError("--freqs may name only one swept site");
                    swept = static_cast<int>(spec.fixed.size());
                    spec.fixed.push_back(0.0);
                } else {
                    try {
                        spec.fixed.push_back(std::stod(tok));
                    } catch (const std::exception&) {
                        throw UsageError("bad frequency '" + tok + "' in --freqs");
                    }
                }
            }
            if (swept < 0) throw UsageError("--freqs needs one 'sweep' entry");
            spec.swept_site = swept;
            const auto colon = spec_range.find(':');
            if (colon == std::string::npos) throw UsageError("--range must read lo:hi");
            try {
                spec.lo = std::stod(spec_range.substr(0, colon));
                spec.hi = std::stod(spec_range.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("--range must read lo:hi");
            }
            DeviceParams dev = DeviceParams::for_sites(static_cast<int>(spec.fixed.size()));
            SpectrumTable table;
            try {
                table = sweep(spec, dev);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            Output out(spec_out);
            write_spectrum_csv(out.get(), table);
            return kExitOk;
        }

        if (*cmd_plot) {
            const ScheduleFile f = read_schedule(plot_in);
            Output out(plot_out);
            write_plot_data_csv(out.get(), f.schedule);
            return kExitOk;
        }

        if (*cmd_export) {
            const ScheduleFile f = read_schedule(export_in);
            Output out(export_out);
            write_schedule_csv(out.get(), f.schedule);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
