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
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace chainpulse {

/// f(x, grad) -> value; grad is resized and filled by the callee.
using ObjectiveWithGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class LocalStatus { Target, Converged, IterationLimit, LineSearchFailure, Deadline };

inline const char* to_string(LocalStatus s) {
    switch (s) {
        case LocalStatus::Target: return "target";
        case LocalStatus::Converged: return "converged";
        case LocalStatus::IterationLimit: return "iteration-limit";
        case LocalStatus::LineSearchFailure: return "line-search-failure";
        case LocalStatus::Deadline: return "deadline";
    }
    return "?";
}

struct BoxMinimizerOptions {
    int memory = 10;
    int max_iterations = 1000;
    /// Stop when the infinity norm of the projected gradient drops below this.
    double pg_tolerance = 1e-9;
    /// Stop as soon as f <= f_target.
    double f_target = -std::numeric_limits<double>::infinity();
    /// Stop when relative f decrease over `stall_window` iterations stays below this.
    double stall_tolerance = 0.0;
    int stall_window = 50;
    double armijo = 1e-4;
    int max_backtracks = 30;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct BoxMinimizerResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    LocalStatus status = LocalStatus::IterationLimit;
    /// Objective after each accepted step, starting with the initial point.
    std::vector<double> history;
};

inline Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

/**
 * Projected limited-memory BFGS for box constraints.
 *
 * Variables pinned at a bound with the gradient pushing outward are frozen
 * for the step; the two-loop recursion runs on the remaining free set, and an
 * Armijo backtracking search follows the projected path x(a) = P(x + a d).
 * Iterates never leave the box.
 */
inline BoxMinimizerResult minimize_box(const ObjectiveWithGradient& f, const Eigen::VectorXd& x0,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       const BoxMinimizerOptions& opt = {}) {
    BoxMinimizerResult res;
    Eigen::VectorXd x = project_box(x0, lo, hi);
    Eigen::VectorXd g;
    double fx = f(x, g);
    res.evaluations = 1;
    res.history.push_back(fx);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    const auto n = x.size();
    Eigen::VectorXd xn, gn, d;
    Eigen::Array<bool, Eigen::Dynamic, 1> free(n);

    auto finish = [&](LocalStatus st) {
        res.x = x;
        res.f = fx;
        res.status = st;
        return res;
    };

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it;
        if (fx <= opt.f_target) return finish(LocalStatus::Target);
        const Eigen::VectorXd pg = x - project_box(x - g, lo, hi);
        if (pg.lpNorm<Eigen::Infinity>() < opt.pg_tolerance) return finish(LocalStatus::Converged);
        if (opt.deadline && std::chrono::steady_clock::now() >= *opt.deadline) return finish(LocalStatus::Deadline);
        if (opt.stall_tolerance > 0.0 && static_cast<int>(res.history.size()) > opt.stall_window) {
            const double old = res.history[res.history.size() - 1 - static_cast<std::size_t>(opt.stall_window)];
            if (old - fx <= opt.stall_tolerance * std::max(std::abs(old), 1e-300)) return finish(LocalStatus::Converged);
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = x(i) <= lo(i) && g(i) > 0.0;
            const bool at_hi = x(i) >= hi(i) && g(i) < 0.0;
            free(i) = !(at_lo || at_hi);
        }

        // Two-loop recursion restricted to the free variables.
        d = free.select(-g, 0.0);
        std::vector<double> alpha(s_hist.size());
        for (int j = static_cast<int>(s_hist.size()) - 1; j >= 0; --j) {
            alpha[static_cast<std::size_t>(j)] = rho_hist[static_cast<std::size_t>(j)] *
                                                 free.select(s_hist[static_cast<std::size_t>(j)], 0.0).dot(d);
            d -= alpha[static_cast<std::size_t>(j)] * free.select(y_hist[static_cast<std::size_t>(j)], 0.0);
        }
        if (!s_hist.empty()) {
            const auto& sl = s_hist.back();
            const auto& yl = y_hist.back();
            d *= sl.dot(yl) / yl.squaredNorm();
        }
        for (std::size_t j = 0; j < s_hist.size(); ++j) {
            const double beta = rho_hist[j] * free.select(y_hist[j], 0.0).dot(d);
            d += (alpha[j] - beta) * free.select(s_hist[j], 0.0);
        }
        d = free.select(d, 0.0);

        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = free.select(-g, 0.0);
            slope = g.dot(d);
            if (!(slope < 0.0)) return finish(LocalStatus::Converged);
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300)) : 1.0;
        bool accepted = false;
        double fn = fx;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            xn = project_box(x + step * d, lo, hi);
            fn = f(xn, gn);
            ++res.evaluations;
            if (std::isfinite(fn) && fn <= fx + opt.armijo * std::min(0.0, g.dot(xn - x))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (s_hist.empty()) return finish(LocalStatus::LineSearchFailure);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            continue;
        }

        Eigen::VectorXd s = xn - x;
        Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(xn);
        g.swap(gn);
        fx = fn;
        res.history.push_back(fx);
    }
    res.iterations = opt.max_iterations;
    return finish(fx <= opt.f_target ? LocalStatus::Target : LocalStatus::IterationLimit);
}

}  // namespace chainpulse
