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
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "chainpulse/basis.hpp"
#include "chainpulse/device_model.hpp"

namespace chainpulse {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/**
 * Piecewise-constant shifted-frequency staircase. Row i of `values` holds
 * the n controls applied during [i*dt, (i+1)*dt) in GHz; dt is in ns.
 */
struct PulseSchedule {
    double dt = 1.0;
    Eigen::MatrixXd values;  // num_steps x n

    PulseSchedule() = default;
    PulseSchedule(int n, int num_steps, double dt_ns, double fill = 0.0)
        : dt(dt_ns), values(Eigen::MatrixXd::Constant(num_steps, n, fill)) {
        if (n < 1 || num_steps < 1 || !(dt_ns > 0.0))
            throw std::invalid_argument("schedule: n, num_steps and dt must be positive");
    }

    int n() const { return static_cast<int>(values.cols()); }
    int num_steps() const { return static_cast<int>(values.rows()); }
    double theta() const { return num_steps() * dt; }
    std::size_t degrees_of_freedom() const { return static_cast<std::size_t>(values.size()); }

    ControlVector step(int i) const { return values.row(i).transpose(); }

    bool within_bounds(const DeviceParams& p) const {
        return (values.array() >= p.eps_min).all() && (values.array() <= p.eps_max).all();
    }
};

/// Number of dt steps in theta; throws unless theta is a positive integer multiple of dt.
inline int steps_for(double theta_ns, double dt_ns) {
    if (!(dt_ns > 0.0) || !(theta_ns > 0.0)) throw std::invalid_argument("gate time and dt must be positive");
    const double m = theta_ns / dt_ns;
    const double r = std::round(m);
    if (r < 1.0 || std::abs(m - r) > 1e-9 * std::max(1.0, m))
        throw std::invalid_argument("gate time must be a positive integer multiple of dt");
    return static_cast<int>(r);
}

/// exp(-2 pi i x dt) for x in GHz and dt in ns.
inline cplx phase_factor(double x, double dt) { return std::polar(1.0, -kTwoPi * x * dt); }

/// Divided difference of f(x) = exp(-2 pi i x dt) between a and b, stable as a -> b.
inline cplx phase_divided_difference(double a, double b, double dt) {
    const double theta = kTwoPi * dt;
    const double half = 0.5 * theta * (a - b);
    const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
    return phase_factor(0.5 * (a + b), dt) * cplx(0.0, -theta) * sinc;
}

/// Spectral data of one real symmetric Hamiltonian block for one time step.
struct BlockSpectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // columns are eigenvectors
    Eigen::MatrixXcd unitary;

    /// Loewner matrix of the step exponential on this block's eigenvalues.
    Eigen::MatrixXcd loewner(double dt) const {
        const auto d = energies.size();
        Eigen::MatrixXcd l(d, d);
        for (Eigen::Index p = 0; p < d; ++p)
            for (Eigen::Index q = 0; q < d; ++q) l(p, q) = phase_divided_difference(energies(p), energies(q), dt);
        return l;
    }
};

inline BlockSpectrum block_spectrum(const Eigen::MatrixXd& h, double dt) {
    BlockSpectrum s;
    if (h.rows() == 1) {
        s.energies = h.diagonal();
        s.vectors = Eigen::MatrixXd::Identity(1, 1);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
        s.energies = es.eigenvalues();
        s.vectors = es.eigenvectors();
    }
    Eigen::VectorXcd ph(s.energies.size());
    for (Eigen::Index p = 0; p < ph.size(); ++p) ph(p) = phase_factor(s.energies(p), dt);
    s.unitary = s.vectors.cast<cplx>() * ph.asDiagonal() * s.vectors.transpose().cast<cplx>();
    return s;
}

/// exp(-2 pi i H dt) for a Hermitian H (GHz) and dt (ns), by spectral decomposition.
inline Eigen::MatrixXcd segment_unitary(const Eigen::MatrixXcd& h, double dt) {
    if (h.size() > 0 && (h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("segment_unitary: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    Eigen::VectorXcd ph(es.eigenvalues().size());
    for (Eigen::Index p = 0; p < ph.size(); ++p) ph(p) = phase_factor(es.eigenvalues()(p), dt);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::MatrixXcd segment_unitary(const Eigen::MatrixXd& h, double dt) {
    return segment_unitary(Eigen::MatrixXcd(h.cast<cplx>()), dt);
}

/// Per-step, per-excitation-block spectra of a whole schedule.
using ScheduleSpectra = std::vector<std::vector<BlockSpectrum>>;

inline ScheduleSpectra schedule_spectra(const PulseSchedule& schedule, const HamiltonianOperators& ops) {
    if (schedule.n() != ops.n()) throw std::invalid_argument("propagate: schedule and operator site counts differ");
    ScheduleSpectra out(static_cast<std::size_t>(schedule.num_steps()));
    Eigen::MatrixXd h;
    for (int i = 0; i < schedule.num_steps(); ++i) {
        assemble_into(ops, schedule.step(i), h);
        auto& row = out[static_cast<std::size_t>(i)];
        row.reserve(ops.blocks.size());
        for (const auto& r : ops.blocks) row.push_back(block_spectrum(block_of(h, r), schedule.dt));
    }
    return out;
}

struct PropagationResult {
    Eigen::MatrixXcd unitary;
    std::vector<Eigen::MatrixXcd> segment_unitaries;
    /// gradient[i * n + k] = dU / d eps_{i,k}; empty unless requested.
    std::vector<Eigen::MatrixXcd> gradient;
    bool out_of_bounds = false;

    const Eigen::MatrixXcd& derivative(int step, int site, int n) const {
        return gradient.at(static_cast<std::size_t>(step * n + site));
    }
};

/**
 * Time-ordered product U = U_m ... U_2 U_1 (latest step leftmost). Each step
 * is exponentiated block by block, so off-block entries are exactly zero.
 * With `want_gradient`, every dU/d eps_{i,k} is formed from the spectral
 * Frechet derivative of step i chained through the ordered product.
 */
inline PropagationResult propagate(const PulseSchedule& schedule, const HamiltonianOperators& ops,
                                   bool want_gradient = false, bool keep_segments = false) {
    const auto spectra = schedule_spectra(schedule, ops);
    const auto dim = static_cast<Eigen::Index>(ops.dim());
    const int m = schedule.num_steps(), n = schedule.n();

    PropagationResult res;
    res.out_of_bounds = !schedule.within_bounds(ops.params);

    std::vector<Eigen::MatrixXcd> seg(static_cast<std::size_t>(m), Eigen::MatrixXcd::Zero(dim, dim));
    for (int i = 0; i < m; ++i)
        for (std::size_t b = 0; b < ops.blocks.size(); ++b)
            block_of(seg[static_cast<std::size_t>(i)], ops.blocks[b]) = spectra[static_cast<std::size_t>(i)][b].unitary;

    // prefix[i] = U_i ... U_1 (prefix[0] = I)
    std::vector<Eigen::MatrixXcd> prefix;
    prefix.reserve(static_cast<std::size_t>(m) + 1);
    prefix.push_back(Eigen::MatrixXcd::Identity(dim, dim));
    for (int i = 0; i < m; ++i) prefix.push_back(seg[static_cast<std::size_t>(i)] * prefix.back());
    res.unitary = prefix.back();

    if (want_gradient) {
        res.gradient.resize(static_cast<std::size_t>(m * n));
        Eigen::MatrixXcd suffix = Eigen::MatrixXcd::Identity(dim, dim);  // U_m ... U_{i+1}
        for (int i = m - 1; i >= 0; --i) {
            for (int k = 0; k < n; ++k) {
                Eigen::MatrixXcd du = Eigen::MatrixXcd::Zero(dim, dim);
                const Eigen::VectorXd nk = ops.number_diagonal(k);
                for (std::size_t b = 0; b < ops.blocks.size(); ++b) {
                    const auto& sp = spectra[static_cast<std::size_t>(i)][b];
                    const auto& r = ops.blocks[b];
                    const Eigen::VectorXd nb = nk.segment(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size()));
                    const Eigen::MatrixXd rotated = sp.vectors.transpose() * nb.asDiagonal() * sp.vectors;
                    const Eigen::MatrixXcd inner = sp.loewner(schedule.dt).cwiseProduct(rotated.cast<cplx>());
                    block_of(du, r) = sp.vectors.cast<cplx>() * inner * sp.vectors.transpose().cast<cplx>();
                }
                res.gradient[static_cast<std::size_t>(i * n + k)] = suffix * du * prefix[static_cast<std::size_t>(i)];
            }
            suffix = suffix * seg[static_cast<std::size_t>(i)];
        }
    }
    if (keep_segments) res.segment_unitaries = std::move(seg);
    return res;
}

/**
 * Brute-force reference: propagates on the untruncated levels^n product
 * space with dense Pade exponentials, then restricts rows and columns to
 * the truncated basis. Limited to n <= 3.
 */
inline Eigen::MatrixXcd propagate_full_space_oracle(const PulseSchedule& schedule, const DeviceParams& params,
                                                    int levels_per_site = 4) {
    if (params.n > 3) throw std::invalid_argument("full-space oracle refuses n > 3");
    if (schedule.n() != params.n) throw std::invalid_argument("oracle: schedule and device site counts differ");
    const auto full = build_basis(params.n, levels_per_site, params.n * (levels_per_site - 1));
    const auto truncated = build_basis(params.n, levels_per_site, params.n);
    const auto ops = build_operators(full, params);
    const auto dim = static_cast<Eigen::Index>(full.dim());

    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (int i = 0; i < schedule.num_steps(); ++i) {
        const Eigen::MatrixXcd gen = cplx(0.0, -kTwoPi * schedule.dt) * assemble(ops, schedule.step(i)).cast<cplx>();
        u = Eigen::MatrixXcd(gen.exp()) * u;
    }

    const auto tdim = static_cast<Eigen::Index>(truncated.dim());
    std::vector<Eigen::Index> map(static_cast<std::size_t>(tdim));
    for (Eigen::Index r = 0; r < tdim; ++r)
        map[static_cast<std::size_t>(r)] = full.index_of(truncated.state(static_cast<std::size_t>(r)).levels);
    Eigen::MatrixXcd out(tdim, tdim);
    for (Eigen::Index r = 0; r < tdim; ++r)
        for (Eigen::Index c = 0; c < tdim; ++c) out(r, c) = u(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]);
    return out;
}

/// max |U^dagger U - I|
inline double unitarity_error(const Eigen::MatrixXcd& u) {
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace chainpulse
