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
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chainpulse/basis.hpp"
#include "chainpulse/device_model.hpp"

// Energy spectra of the truncated chain Hamiltonian under a one-site frequency sweep.
//
// Here the control entries are absolute transmon frequencies (GHz), the
// quantity on the horizontal axis of the usual avoided-crossing plots. The
// Hamiltonian is affine in them, so an absolute frequency f and a shifted
// frequency eps = f - f_ref differ only by the excitation-proportional
// offset f_ref * N_total, which moves every level of one excitation block
// together and leaves gaps within a block unchanged.

namespace chainpulse {

/// Imaginary parts up to this size are treated as round-off by `real_spectrum`.
inline constexpr double kSpectrumImagTolerance = 1e-12;

/// Real eigenvalues of a Hermitian matrix given in complex form; throws if the spectrum is not real.
inline Eigen::VectorXd real_spectrum(const Eigen::MatrixXcd& h) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
    Eigen::VectorXd out(h.rows());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (std::abs(es.eigenvalues()(i).imag()) > kSpectrumImagTolerance)
            throw std::runtime_error("spectrum: eigenvalue with non-negligible imaginary part");
        out(i) = es.eigenvalues()(i).real();
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Eigenvalues of each excitation block, ascending within each block.
inline std::vector<Eigen::VectorXd> block_eigenvalues(const ControlVector& freqs, const HamiltonianOperators& ops) {
    const Eigen::MatrixXd h = assemble(ops, freqs);
    std::vector<Eigen::VectorXd> out;
    out.reserve(ops.blocks.size());
    for (const auto& r : ops.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_of(h, r), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
        out.push_back(es.eigenvalues());
    }
    return out;
}

/// All dim eigenvalues (GHz), ascending.
inline std::vector<double> eigenvalues_at(const ControlVector& freqs, const HamiltonianOperators& ops,
                                          const TruncatedBasis& basis) {
    if (ops.dim() != basis.dim()) throw std::invalid_argument("eigenvalues_at: operator and basis dimensions differ");
    std::vector<double> all;
    all.reserve(basis.dim());
    for (const auto& blk : block_eigenvalues(freqs, ops)) all.insert(all.end(), blk.begin(), blk.end());
    std::sort(all.begin(), all.end());
    return all;
}

struct SweepSpec {
    /// Frequencies of the fixed sites (GHz); the entry at `swept_site` is ignored.
    std::vector<double> fixed;
    int swept_site = 1;
    double lo = 4.5;
    double hi = 7.5;
    int num_points = 301;

    void validate() const {
        if (fixed.empty()) throw std::invalid_argument("sweep: no sites");
        if (swept_site < 0 || swept_site >= static_cast<int>(fixed.size()))
            throw std::invalid_argument("sweep: swept site out of range");
        if (!(lo < hi)) throw std::invalid_argument("sweep: range must satisfy lo < hi");
        if (num_points < 2) throw std::invalid_argument("sweep: need at least two points");
    }

    double point(int i) const { return lo + (hi - lo) * static_cast<double>(i) / (num_points - 1); }

    ControlVector freqs_at(int i) const {
        ControlVector f = Eigen::Map<const Eigen::VectorXd>(fixed.data(), static_cast<Eigen::Index>(fixed.size()));
        f(swept_site) = point(i);
        return f;
    }
};

struct SpectrumTable {
    std::vector<double> sweep_values;
    /// eigenvalues[p] holds all dim levels at sweep point p, ascending.
    std::vector<std::vector<double>> eigenvalues;
    /// min over the sweep of the smallest adjacent gap inside each excitation block.
    std::vector<double> block_min_gap;

    std::size_t dim() const { return eigenvalues.empty() ? 0 : eigenvalues.front().size(); }
};

/// Three-site layout of the classic avoided-crossing picture: 4.8 GHz, swept 4.5..7.5 GHz, 6.8 GHz.
inline SweepSpec three_site_crossing_sweep(int num_points = 301) {
    return SweepSpec{{4.8, 0.0, 6.8}, 1, 4.5, 7.5, num_points};
}

inline SpectrumTable sweep(const SweepSpec& spec, const DeviceParams& params, int levels_per_site = 4) {
    spec.validate();
    if (static_cast<int>(spec.fixed.size()) != params.n) throw std::invalid_argument("sweep: site count differs from device");
    const auto basis = build_basis(params.n, levels_per_site, params.n);
    const auto ops = build_operators(basis, params);

    SpectrumTable t;
    t.block_min_gap.assign(ops.blocks.size(), std::numeric_limits<double>::infinity());
    for (int i = 0; i < spec.num_points; ++i) {
        const ControlVector f = spec.freqs_at(i);
        t.sweep_values.push_back(spec.point(i));
        const auto blocks = block_eigenvalues(f, ops);
        std::vector<double> row;
        row.reserve(basis.dim());
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            for (Eigen::Index j = 0; j + 1 < blocks[b].size(); ++j)
                t.block_min_gap[b] = std::min(t.block_min_gap[b], blocks[b](j + 1) - blocks[b](j));
            row.insert(row.end(), blocks[b].begin(), blocks[b].end());
        }
        std::sort(row.begin(), row.end());
        t.eigenvalues.push_back(std::move(row));
    }
    return t;
}

/// CSV with header "sweep_GHz,E0,...,E{dim-1}" and one row per sweep point.
inline void write_spectrum_csv(std::ostream& os, const SpectrumTable& t) {
    os << "sweep_GHz";
    for (std::size_t j = 0; j < t.dim(); ++j) os << ",E" << j;
    os << '\n';
    const auto old = os.precision(17);
    for (std::size_t p = 0; p < t.sweep_values.size(); ++p) {
        os << t.sweep_values[p];
        for (double e : t.eigenvalues[p]) os << ',' << e;
        os << '\n';
    }
    os.precision(old);
}

}  // namespace chainpulse
