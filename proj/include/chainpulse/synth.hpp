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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "chainpulse/gate_fidelity.hpp"
#include "chainpulse/lbfgsb.hpp"
#include "chainpulse/objective.hpp"
#include "chainpulse/propagator.hpp"

namespace chainpulse {

enum class SearchMethod { Scatter, Multistart, DifferentialEvolution };
enum class LocalMethod { QuasiNewton, PatternSearch };

inline std::string to_string(SearchMethod m) {
    switch (m) {
        case SearchMethod::Scatter: return "scatter";
        case SearchMethod::Multistart: return "multistart";
        case SearchMethod::DifferentialEvolution: return "differential_evolution";
    }
    return "?";
}

inline SearchMethod parse_search_method(const std::string& s) {
    if (s == "scatter") return SearchMethod::Scatter;
    if (s == "multistart") return SearchMethod::Multistart;
    if (s == "differential_evolution" || s == "de") return SearchMethod::DifferentialEvolution;
    throw std::invalid_argument("unknown method '" + s + "'");
}

struct SynthesisConfig {
    DeviceParams device = DeviceParams::for_sites(3);
    GateTarget target = make_target(GateName::CCZ);
    double theta = 26.0;  // ns
    double dt = 1.0;      // ns
    double fidelity_threshold = kDefaultFidelityThreshold;
    std::uint64_t seed = 1;
    int max_local_searches = 100000;
    double time_budget = 600.0;  // wall-clock seconds
    SearchMethod method = SearchMethod::Scatter;
    ObjectiveKind objective = ObjectiveKind::Arccos;
    LocalMethod local_method = LocalMethod::QuasiNewton;
    int workers = 1;
    bool verbose = false;

    // Local search.
    double local_tolerance = 1e-9;
    int local_max_iterations = 10000;
    /// Relative objective decrease over `local_stall_window` accepted steps below which a search is abandoned.
    double local_stall_tolerance = 1e-7;
    int local_stall_window = 200;

    /// Half-width (GHz) of the centred sub-box that sampled pulse values are drawn from;
    /// values >= the box half-width sample the whole box.
    double sample_halfwidth = 0.5;

    // Scatter search.
    int refset_size = 10;
    int initial_samples = 50;
    /// Cheap trial points scored per launched local search.
    int trials_per_search = 20;
    /// Share of trial points drawn uniformly / by combining two reference points; the rest perturb an elite point.
    double uniform_share = 0.2;
    double combine_share = 0.3;
    /// Standard deviation (GHz) of elite perturbations.
    double perturb_sigma = 0.15;
    /// Rejections tolerated before the merit threshold relaxes.
    int merit_wait_cycle = 20;
    double merit_relax = 0.2;

    // Differential evolution.
    int population = 0;  // 0 selects max(20, dimension / 2)
    int max_generations = 1000000;

    /// Starting decision vectors tried before any sampled start (continuation seeds).
    std::vector<Eigen::VectorXd> initial_points;

    int num_steps() const { return steps_for(theta, dt); }

    void validate() const {
        device.validate();
        if (target.n() != device.n) throw std::invalid_argument("config: target qubit count differs from n");
        (void)num_steps();
        if (!(fidelity_threshold > 0.0 && fidelity_threshold < 1.0))
            throw std::invalid_argument("config: fidelity threshold must lie in (0, 1)");
        if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
        if (refset_size < 2) throw std::invalid_argument("config: refset_size must be >= 2");
    }
};

struct TraceEntry {
    int restart = 0;
    double best_objective = 0.0;
    double wall_seconds = 0.0;
};

struct SynthesisResult {
    PulseSchedule schedule;
    PhaseCompensation beta;
    FidelityReport report;
    std::vector<TraceEntry> trace;
    bool succeeded = false;
    int local_searches = 0;
    double wall_seconds = 0.0;
    std::string solver;
    /// Best decision vector (schedule + angles).
    Eigen::VectorXd x;
};

inline GateProblem make_problem(const SynthesisConfig& cfg) {
    cfg.validate();
    return GateProblem(cfg.device, cfg.target, cfg.num_steps(), cfg.dt, cfg.objective);
}

struct LocalSearchResult {
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::infinity();
    LocalStatus status = LocalStatus::IterationLimit;
    std::vector<double> history;
    int evaluations = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline double target_objective(const SynthesisConfig& cfg) {
    return objective_from_fidelity(cfg.fidelity_threshold, cfg.objective);
}

// Compass search on the box; gradient-free cross-check for the quasi-Newton search.
inline LocalSearchResult pattern_search(const GateProblem& problem, const Eigen::VectorXd& start,
                                        const SynthesisConfig& cfg, std::optional<Clock::time_point> deadline) {
    const Eigen::VectorXd lo = problem.lower_bounds(), hi = problem.upper_bounds();
    LocalSearchResult r;
    r.x = project_box(start, lo, hi);
    r.objective = problem.value(r.x);
    r.evaluations = 1;
    r.history.push_back(r.objective);
    const double goal = target_objective(cfg);
    double step = 0.25;
    for (int it = 0; it < cfg.local_max_iterations && step > cfg.local_tolerance; ++it) {
        if (r.objective <= goal) {
            r.status = LocalStatus::Target;
            return r;
        }
        if (deadline && Clock::now() >= *deadline) {
            r.status = LocalStatus::Deadline;
            return r;
        }
        bool improved = false;
        for (Eigen::Index i = 0; i < r.x.size(); ++i) {
            for (double sgn : {1.0, -1.0}) {
                Eigen::VectorXd y = r.x;
                y(i) = std::clamp(y(i) + sgn * step, lo(i), hi(i));
                if (y(i) == r.x(i)) continue;
                const double fy = problem.value(y);
                ++r.evaluations;
                if (fy < r.objective) {
                    r.x = std::move(y);
                    r.objective = fy;
                    r.history.push_back(fy);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    r.status = r.objective <= goal ? LocalStatus::Target : LocalStatus::Converged;
    return r;
}

}  // namespace detail

/**
 * One bound-constrained local descent of the configured objective from
 * `start` (projected onto the box first). Stops at the feasibility target,
 * a small projected gradient, stagnation, the iteration cap or `deadline`;
 * a failed line search returns the best point reached.
 */
inline LocalSearchResult local_search(const GateProblem& problem, const Eigen::VectorXd& start,
                                      const SynthesisConfig& cfg,
                                      std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt) {
    if (static_cast<std::size_t>(start.size()) != problem.dimension())
        throw std::invalid_argument("local_search: start has the wrong dimension");
    if (cfg.local_method == LocalMethod::PatternSearch) return detail::pattern_search(problem, start, cfg, deadline);

    BoxMinimizerOptions opt;
    opt.max_iterations = cfg.local_max_iterations;
    opt.pg_tolerance = cfg.local_tolerance;
    opt.f_target = detail::target_objective(cfg);
    opt.stall_tolerance = cfg.local_stall_tolerance;
    opt.stall_window = cfg.local_stall_window;
    opt.deadline = deadline;
    auto f = [&problem](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return problem.value_and_gradient(x, g); };
    auto res = minimize_box(f, start, problem.lower_bounds(), problem.upper_bounds(), opt);
    return {std::move(res.x), res.f, res.status, std::move(res.history), res.evaluations};
}

/// Fills a SynthesisResult from a decision vector with an independent dense propagation.
inline SynthesisResult finalize_result(const GateProblem& problem, const SynthesisConfig& cfg, const Eigen::VectorXd& x,
                                       std::string solver) {
    SynthesisResult out;
    out.x = x;
    out.schedule = problem.schedule_from(x);
    out.beta = problem.beta_from(x).wrapped();
    out.report = fidelity(project(propagate(out.schedule, problem.operators()).unitary, problem.basis()), cfg.target,
                          out.beta, cfg.fidelity_threshold);
    out.succeeded = out.report.feasible && out.schedule.within_bounds(cfg.device);
    out.solver = std::move(solver);
    return out;
}

namespace detail {

struct RefPoint {
    Eigen::VectorXd x;
    double f = 0.0;
};

// Tracks the best point and the per-search trace shared by all global methods.
class SearchLog {
public:
    SearchLog(const SynthesisConfig& cfg, Clock::time_point t0) : cfg_(cfg), t0_(t0) {}

    void record(const Eigen::VectorXd& x, double f) {
        ++count_;
        if (f < best_f_) {
            best_f_ = f;
            best_x_ = x;
        }
        trace_.push_back({count_, best_f_, seconds_since(t0_)});
        if (cfg_.verbose)
            std::fprintf(stderr, "[%s] restart %d best F=%.8f elapsed=%.1fs\n", to_string(cfg_.method).c_str(), count_,
                         fidelity_of(best_f_), trace_.back().wall_seconds);
    }

    double fidelity_of(double f) const {
        return cfg_.objective == ObjectiveKind::Arccos ? std::cos(f) : 1.0 - f;
    }

    bool done() const {
        return best_f_ <= target_objective(cfg_) || count_ >= cfg_.max_local_searches ||
               seconds_since(t0_) >= cfg_.time_budget;
    }

    int count() const { return count_; }
    double best_f() const { return best_f_; }
    const Eigen::VectorXd& best_x() const { return best_x_; }
    std::vector<TraceEntry>& trace() { return trace_; }

private:
    const SynthesisConfig& cfg_;
    Clock::time_point t0_;
    int count_ = 0;
    double best_f_ = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x_;
    std::vector<TraceEntry> trace_;
};

// Uniform point: pulse values in [-w, w] clipped to the box, angles in [-pi, pi].
// For diagonal targets the right angles are redundant with the left ones and start at zero.
inline Eigen::VectorXd sample_point(const GateProblem& problem, const SynthesisConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto pulse_dim = static_cast<Eigen::Index>(problem.pulse_dimension());
    const auto right_begin = pulse_dim + problem.n();
    const double lo = std::max(cfg.device.eps_min, -cfg.sample_halfwidth);
    const double hi = std::min(cfg.device.eps_max, cfg.sample_halfwidth);
    Eigen::VectorXd x(static_cast<Eigen::Index>(problem.dimension()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = u(rng);
        if (i < pulse_dim) x(i) = lo + (hi - lo) * r;
        else if (i >= right_begin && problem.target().is_diagonal) x(i) = 0.0;
        else x(i) = std::numbers::pi * (2.0 * r - 1.0);
    }
    return x;
}

// Runs local searches for a batch of starts, `workers` at a time; results keep input order.
inline std::vector<LocalSearchResult> run_batch(const GateProblem& problem, const std::vector<Eigen::VectorXd>& starts,
                                                const SynthesisConfig& cfg, Clock::time_point deadline) {
    std::vector<LocalSearchResult> out(starts.size());
    if (cfg.workers <= 1 || starts.size() <= 1) {
        for (std::size_t i = 0; i < starts.size(); ++i) out[i] = local_search(problem, starts[i], cfg, deadline);
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i)
        pool.emplace_back([&, i] { out[i] = local_search(problem, starts[i], cfg, deadline); });
    for (auto& t : pool) t.join();
    return out;
}

inline SynthesisResult wrap_up(const GateProblem& problem, const SynthesisConfig& cfg, SearchLog& log,
                               Clock::time_point t0, const std::string& solver) {
    auto res = finalize_result(problem, cfg, log.best_x(), solver);
    res.trace = std::move(log.trace());
    res.local_searches = log.count();
    res.wall_seconds = seconds_since(t0);
    return res;
}

}  // namespace detail

/**
 * Scatter-search global optimization over local quasi-Newton descents.
 *
 * A reference set keeps the best local solutions plus the ones farthest
 * (max-min distance) from the rest. Each round scores a pool of cheap trial
 * points drawn uniformly, by affine combination of two reference points, or
 * by perturbing an elite point; the best trials that pass the merit filter
 * (objective below an adaptive threshold) and the distance filter (outside
 * every known basin) seed the next batch of local searches. Stops at the
 * first feasible point, the time budget or the restart cap.
 */
inline SynthesisResult global_search(const SynthesisConfig& cfg) {
    const auto t0 = detail::Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<detail::Clock::duration>(std::chrono::duration<double>(cfg.time_budget));
    const GateProblem problem = make_problem(cfg);
    const Eigen::VectorXd lo = problem.lower_bounds(), hi = problem.upper_bounds();
    const auto pulse_dim = static_cast<Eigen::Index>(problem.pulse_dimension());
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    detail::SearchLog log(cfg, t0);

    std::vector<detail::RefPoint> refset;
    struct Basin {
        Eigen::VectorXd center;
        double radius;
        double f;
    };
    std::vector<Basin> basins;

    auto absorb = [&](const Eigen::VectorXd& start, const LocalSearchResult& r) {
        log.record(r.x, r.objective);
        const double radius = (r.x - start).head(pulse_dim).norm();
        bool merged = false;
        for (auto& b : basins)
            if ((b.center - r.x).head(pulse_dim).norm() < 1e-3) {
                b.radius = std::max(b.radius, radius);
                merged = true;
            }
        if (!merged) basins.push_back({r.x, radius, r.objective});

        for (const auto& p : refset)
            if ((p.x - r.x).head(pulse_dim).norm() < 1e-6) return;
        refset.push_back({r.x, r.objective});
        if (static_cast<int>(refset.size()) <= cfg.refset_size) return;
        // Keep the best half by quality, fill the rest by max-min distance.
        std::sort(refset.begin(), refset.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
        const std::size_t keep = static_cast<std::size_t>(cfg.refset_size);
        const std::size_t elite = std::max<std::size_t>(1, keep / 2);
        std::vector<detail::RefPoint> next(refset.begin(), refset.begin() + static_cast<long>(elite));
        std::vector<detail::RefPoint> pool(refset.begin() + static_cast<long>(elite), refset.end());
        while (next.size() < keep && !pool.empty()) {
            std::size_t pick = 0;
            double far = -1.0;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                double dmin = std::numeric_limits<double>::infinity();
                for (const auto& q : next) dmin = std::min(dmin, (q.x - pool[i].x).head(pulse_dim).norm());
                if (dmin > far) {
                    far = dmin;
                    pick = i;
                }
            }
            next.push_back(std::move(pool[pick]));
            pool.erase(pool.begin() + static_cast<long>(pick));
        }
        refset = std::move(next);
    };

    auto launch = [&](const std::vector<Eigen::VectorXd>& starts) {
        auto results = detail::run_batch(problem, starts, cfg, deadline);
        for (std::size_t i = 0; i < results.size(); ++i) absorb(starts[i], results[i]);
    };

    // Stage 1: caller seeds, then the best of a uniform sample.
    for (const auto& x : cfg.initial_points)
        if (static_cast<std::size_t>(x.size()) != problem.dimension())
            throw std::invalid_argument("global_search: initial point has the wrong dimension");
    for (std::size_t i = 0; i < cfg.initial_points.size() && !log.done(); i += static_cast<std::size_t>(cfg.workers)) {
        const auto end = std::min(cfg.initial_points.size(), i + static_cast<std::size_t>(cfg.workers));
        launch(std::vector<Eigen::VectorXd>(cfg.initial_points.begin() + static_cast<long>(i),
                                            cfg.initial_points.begin() + static_cast<long>(end)));
    }
    double merit_threshold = std::numeric_limits<double>::infinity();
    if (!log.done()) {
        std::vector<detail::RefPoint> sample;
        for (int i = 0; i < std::max(1, cfg.initial_samples); ++i) {
            auto x = detail::sample_point(problem, cfg, rng);
            const double f = problem.value(x);
            sample.push_back({std::move(x), f});
        }
        std::sort(sample.begin(), sample.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
        merit_threshold = sample.front().f;
        std::vector<Eigen::VectorXd> starts;
        for (int w = 0; w < cfg.workers && w < static_cast<int>(sample.size()); ++w) starts.push_back(sample[static_cast<std::size_t>(w)].x);
        launch(starts);
    }

    // Stage 2: adaptive restarts.
    int rejections = 0;
    while (!log.done()) {
        std::vector<detail::RefPoint> trials;
        const int pool_size = std::max(1, cfg.trials_per_search) * cfg.workers;
        for (int t = 0; t < pool_size; ++t) {
            Eigen::VectorXd x;
            const double u = unit(rng);
            if (refset.size() < 2 || u < cfg.uniform_share) {
                x = detail::sample_point(problem, cfg, rng);
            } else if (u < cfg.uniform_share + cfg.combine_share) {
                std::uniform_int_distribution<std::size_t> pick(0, refset.size() - 1);
                const std::size_t a = pick(rng);
                std::size_t b = pick(rng);
                while (b == a) b = pick(rng);
                const double w = -0.5 + 2.0 * unit(rng);
                x = refset[a].x + w * (refset[b].x - refset[a].x);
            } else {
                // Perturb an elite point, biased toward the best ones.
                std::size_t idx = 0;
                std::vector<std::size_t> order(refset.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                std::sort(order.begin(), order.end(), [&](auto i, auto j) { return refset[i].f < refset[j].f; });
                idx = order[static_cast<std::size_t>(std::floor(std::pow(unit(rng), 2.0) * static_cast<double>(order.size())))];
                x = refset[idx].x;
                for (Eigen::Index i = 0; i < pulse_dim; ++i) x(i) += cfg.perturb_sigma * gauss(rng);
            }
            x = project_box(x, lo, hi);
            const double f = problem.value(x);
            trials.push_back({std::move(x), f});
        }
        std::sort(trials.begin(), trials.end(), [](const auto& a, const auto& b) { return a.f < b.f; });

        std::vector<Eigen::VectorXd> starts;
        for (const auto& t : trials) {
            if (static_cast<int>(starts.size()) >= cfg.workers) break;
            bool inside = false;
            for (const auto& b : basins)
                if ((t.x - b.center).head(pulse_dim).norm() < b.radius && t.f >= b.f) inside = true;
            if (inside) continue;
            if (t.f < merit_threshold) {
                merit_threshold = t.f;
                rejections = 0;
                starts.push_back(t.x);
            } else if (++rejections >= cfg.merit_wait_cycle) {
                merit_threshold += cfg.merit_relax * (1.0 + std::abs(merit_threshold));
                rejections = 0;
                starts.push_back(t.x);
            }
        }
        // Always spend the round on the best trial so every cycle makes progress.
        if (starts.empty()) starts.push_back(trials.front().x);
        launch(starts);
    }
    return detail::wrap_up(problem, cfg, log, t0, "scatter");
}

/// Classical multistart: local searches from independent uniform points.
inline SynthesisResult multistart_search(const SynthesisConfig& cfg) {
    const auto t0 = detail::Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<detail::Clock::duration>(std::chrono::duration<double>(cfg.time_budget));
    const GateProblem problem = make_problem(cfg);
    std::mt19937_64 rng(cfg.seed);
    detail::SearchLog log(cfg, t0);
    std::size_t seeded = 0;
    while (!log.done()) {
        std::vector<Eigen::VectorXd> starts;
        for (int w = 0; w < cfg.workers; ++w)
            starts.push_back(seeded < cfg.initial_points.size() ? cfg.initial_points[seeded++] : detail::sample_point(problem, cfg, rng));
        auto results = detail::run_batch(problem, starts, cfg, deadline);
        for (const auto& r : results) log.record(r.x, r.objective);
    }
    return detail::wrap_up(problem, cfg, log, t0, "multistart");
}

/**
 * Self-adaptive differential evolution (rand/1/bin with per-individual F and
 * CR resampled with probability 0.1). Gradient-free; every random draw is
 * taken in a fixed order, so a seed fixes the whole trajectory.
 */
inline SynthesisResult differential_evolution(const SynthesisConfig& cfg) {
    const auto t0 = detail::Clock::now();
    const GateProblem problem = make_problem(cfg);
    const Eigen::VectorXd lo = problem.lower_bounds(), hi = problem.upper_bounds();
    const auto dim = static_cast<Eigen::Index>(problem.dimension());
    const int np = cfg.population > 0 ? cfg.population : std::max<int>(20, static_cast<int>(dim) / 2);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    detail::SearchLog log(cfg, t0);

    std::vector<Eigen::VectorXd> pop(static_cast<std::size_t>(np));
    std::vector<double> fit(static_cast<std::size_t>(np));
    std::vector<double> fw(static_cast<std::size_t>(np), 0.5), cr(static_cast<std::size_t>(np), 0.9);
    for (int i = 0; i < np; ++i) {
        pop[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i) < cfg.initial_points.size()
                                               ? project_box(cfg.initial_points[static_cast<std::size_t>(i)], lo, hi)
                                               : detail::sample_point(problem, cfg, rng);
    }
    auto evaluate_all = [&](const std::vector<Eigen::VectorXd>& xs, std::vector<double>& out) {
        out.resize(xs.size());
        if (cfg.workers <= 1) {
            for (std::size_t i = 0; i < xs.size(); ++i) out[i] = problem.value(xs[i]);
            return;
        }
        std::vector<std::thread> pool;
        const std::size_t w = static_cast<std::size_t>(cfg.workers);
        for (std::size_t t = 0; t < w; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < xs.size(); i += w) out[i] = problem.value(xs[i]);
            });
        for (auto& th : pool) th.join();
    };
    evaluate_all(pop, fit);

    std::uniform_int_distribution<int> pick(0, np - 1);
    std::uniform_int_distribution<Eigen::Index> pick_dim(0, dim - 1);
    std::vector<Eigen::VectorXd> trial(static_cast<std::size_t>(np));
    std::vector<double> trial_fw(static_cast<std::size_t>(np)), trial_cr(static_cast<std::size_t>(np)), trial_fit;
    for (int gen = 0; gen < cfg.max_generations; ++gen) {
        const auto best_it = std::min_element(fit.begin(), fit.end());
        log.record(pop[static_cast<std::size_t>(best_it - fit.begin())], *best_it);
        if (log.done()) break;
        for (int i = 0; i < np; ++i) {
            const auto si = static_cast<std::size_t>(i);
            trial_fw[si] = unit(rng) < 0.1 ? 0.1 + 0.9 * unit(rng) : fw[si];
            trial_cr[si] = unit(rng) < 0.1 ? unit(rng) : cr[si];
            int a, b, c;
            do a = pick(rng); while (a == i);
            do b = pick(rng); while (b == i || b == a);
            do c = pick(rng); while (c == i || c == a || c == b);
            const Eigen::Index jrand = pick_dim(rng);
            Eigen::VectorXd y = pop[si];
            for (Eigen::Index j = 0; j < dim; ++j) {
                if (j == jrand || unit(rng) < trial_cr[si]) {
                    double v = pop[static_cast<std::size_t>(a)](j) +
                               trial_fw[si] * (pop[static_cast<std::size_t>(b)](j) - pop[static_cast<std::size_t>(c)](j));
                    // Bounce back inside the box between the base vector and the violated bound.
                    if (v < lo(j)) v = lo(j) + unit(rng) * (pop[static_cast<std::size_t>(a)](j) - lo(j));
                    if (v > hi(j)) v = hi(j) - unit(rng) * (hi(j) - pop[static_cast<std::size_t>(a)](j));
                    y(j) = v;
                }
            }
            trial[si] = std::move(y);
        }
        evaluate_all(trial, trial_fit);
        for (std::size_t i = 0; i < pop.size(); ++i)
            if (trial_fit[i] <= fit[i]) {
                pop[i] = trial[i];
                fit[i] = trial_fit[i];
                fw[i] = trial_fw[i];
                cr[i] = trial_cr[i];
            }
    }
    return detail::wrap_up(problem, cfg, log, t0, "differential_evolution");
}

/// Dispatches on cfg.method.
inline SynthesisResult synthesize(const SynthesisConfig& cfg) {
    switch (cfg.method) {
        case SearchMethod::Scatter: return global_search(cfg);
        case SearchMethod::Multistart: return multistart_search(cfg);
        case SearchMethod::DifferentialEvolution: return differential_evolution(cfg);
    }
    throw std::invalid_argument("unknown search method");
}

/// Time-rescales a schedule to a shorter gate: new step i copies old step floor(i * m_old / m_new).
inline PulseSchedule continue_schedule(const PulseSchedule& solution, double theta_new) {
    const int m_new = steps_for(theta_new, solution.dt);
    const int m_old = solution.num_steps();
    if (m_new > m_old) throw std::invalid_argument("continue_schedule: new gate time must not exceed the old one");
    PulseSchedule out(solution.n(), m_new, solution.dt);
    for (int i = 0; i < m_new; ++i) {
        const int src = static_cast<int>((static_cast<long long>(i) * m_old) / m_new);
        out.values.row(i) = solution.values.row(src);
    }
    return out;
}

/**
 * Starting points for a shorter gate derived from a longer solution: the
 * index-rescaled schedule first, then (when exactly one step is removed)
 * every single-step deletion ordered by objective. Angles are carried over.
 */
inline std::vector<Eigen::VectorXd> continuation_starts(const GateProblem& problem, const PulseSchedule& solution,
                                                        const PhaseCompensation& beta) {
    const int m_new = problem.num_steps(), m_old = solution.num_steps();
    std::vector<Eigen::VectorXd> out{problem.pack(continue_schedule(solution, m_new * solution.dt), beta)};
    if (m_old != m_new + 1) return out;
    std::vector<std::pair<double, Eigen::VectorXd>> drops;
    for (int j = 0; j + 1 < m_old; ++j) {  // dropping the last step is the rescaled start
        PulseSchedule s(solution.n(), m_new, solution.dt);
        for (int i = 0, r = 0; i < m_old; ++i)
            if (i != j) s.values.row(r++) = solution.values.row(i);
        Eigen::VectorXd x = problem.pack(s, beta);
        drops.emplace_back(problem.value(x), std::move(x));
    }
    std::stable_sort(drops.begin(), drops.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& d : drops) out.push_back(std::move(d.second));
    return out;
}

/**
 * Gate-time continuation: solve at theta_start, then repeatedly shorten the
 * last feasible schedule to theta - dt and re-solve from its
 * continuation_starts. Stops after the first gate time that exhausts its budget (that
 * failed attempt is the last entry) or after theta_min.
 */
inline std::vector<SynthesisResult> theta_sweep(const SynthesisConfig& cfg, double theta_start, double theta_min) {
    if (theta_start < theta_min) throw std::invalid_argument("theta_sweep: theta_start must be >= theta_min");
    const int m_start = steps_for(theta_start, cfg.dt), m_min = steps_for(theta_min, cfg.dt);
    std::vector<SynthesisResult> out;
    SynthesisConfig step_cfg = cfg;
    step_cfg.theta = theta_start;
    for (int m = m_start; m >= m_min; --m) {
        step_cfg.theta = m * cfg.dt;
        if (!out.empty()) {
            const auto& prev = out.back();
            const GateProblem shape(step_cfg.device, step_cfg.target, m, cfg.dt, cfg.objective);
            step_cfg.initial_points = continuation_starts(shape, prev.schedule, prev.beta);
        }
        auto res = synthesize(step_cfg);
        if (cfg.verbose)
            std::fprintf(stderr, "[sweep] theta=%g ns F=%.8f %s\n", step_cfg.theta, res.report.fidelity,
                         res.succeeded ? "feasible" : "not found");
        const bool ok = res.succeeded;
        out.push_back(std::move(res));
        if (!ok) break;
    }
    return out;
}

}  // namespace chainpulse
