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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chainpulse/basis.hpp"

namespace chainpulse {

/// Physical constants of a uniformly coupled transmon chain. Frequencies in GHz.
struct DeviceParams {
    int n = 3;
    double eta = 0.200;
    double eta_prime = 0.600;
    double g = 0.030;
    double eps_min = -2.5;
    double eps_max = 2.5;

    void validate() const {
        if (n < 1) throw std::invalid_argument("device: n must be >= 1");
        if (!(eta > 0.0)) throw std::invalid_argument("device: eta must be positive");
        if (!(g > 0.0)) throw std::invalid_argument("device: g must be positive");
        if (!(eps_min < eps_max)) throw std::invalid_argument("device: eps_min must be below eps_max");
    }

    static DeviceParams for_sites(int n) {
        DeviceParams p;
        p.n = n;
        return p;
    }
};

/// Instantaneous shifted frequencies, one per transmon (GHz).
using ControlVector = Eigen::VectorXd;

inline bool within_bounds(const DeviceParams& params, const ControlVector& eps) {
    return (eps.array() >= params.eps_min).all() && (eps.array() <= params.eps_max).all();
}

namespace detail {

// Four-level generalized Pauli operators of the coupling term.
inline Eigen::Matrix4cd pauli_x4() {
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    Eigen::Matrix4cd x;
    x << 0, 1, 0, 0,
         1, 0, s2, 0,
         0, s2, 0, s3,
         0, 0, s3, 0;
    return x;
}

inline Eigen::Matrix4cd pauli_y4() {
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    const std::complex<double> i(0.0, 1.0);
    Eigen::Matrix4cd y;
    y << 0, -1, 0, 0,
         1, 0, -s2, 0,
         0, s2, 0, -s3,
         0, 0, s3, 0;
    return i * y;
}

}  // namespace detail

/**
 * Cached affine form of the truncated chain Hamiltonian,
 *   H(eps) = h_static + sum_k eps_k N_k   (GHz, i.e. H/h),
 * where h_static holds the anharmonic shifts and the XY coupling and N_k is
 * the level-number operator of site k. The coupling matrix elements are
 * real, so every operator is stored as a real symmetric matrix.
 */
struct HamiltonianOperators {
    DeviceParams params;
    std::vector<IndexRange> blocks;
    Eigen::MatrixXd h_static;
    /// number_levels(r, k) = level of site k in basis state r (diagonal of N_k).
    Eigen::MatrixXi number_levels;

    std::size_t dim() const { return static_cast<std::size_t>(h_static.rows()); }
    int n() const { return params.n; }

    Eigen::VectorXd number_diagonal(int k) const { return number_levels.col(k).cast<double>(); }

    Eigen::MatrixXd number_op(int k) const { return number_diagonal(k).asDiagonal(); }
};

inline HamiltonianOperators build_operators(const TruncatedBasis& basis, const DeviceParams& params) {
    params.validate();
    if (basis.n() != params.n) throw std::invalid_argument("build_operators: basis and device site counts differ");

    const auto dim = static_cast<Eigen::Index>(basis.dim());
    const int n = params.n;
    HamiltonianOperators ops;
    ops.params = params;
    ops.blocks = basis.excitation_blocks();
    ops.h_static = Eigen::MatrixXd::Zero(dim, dim);
    ops.number_levels.resize(dim, n);

    const double anharm[4] = {0.0, 0.0, -params.eta, -params.eta_prime};
    for (Eigen::Index r = 0; r < dim; ++r) {
        const auto& lv = basis.state(static_cast<std::size_t>(r)).levels;
        double d = 0.0;
        for (int k = 0; k < n; ++k) {
            ops.number_levels(r, k) = lv[k];
            d += anharm[lv[k]];
        }
        ops.h_static(r, r) = d;
    }

    // (g/2)(X_k X_{k+1} + Y_k Y_{k+1}) evaluated directly between truncated states.
    const Eigen::Matrix4cd x = detail::pauli_x4();
    const Eigen::Matrix4cd y = detail::pauli_y4();
    const int top = basis.levels_per_site() - 1;
    for (Eigen::Index c = 0; c < dim; ++c) {
        const auto& ket = basis.state(static_cast<std::size_t>(c)).levels;
        for (int k = 0; k + 1 < n; ++k) {
            // XX + YY only moves one quantum between the pair.
            for (int dir : {-1, +1}) {
                LevelTuple bra = ket;
                bra[k] += dir;
                bra[k + 1] -= dir;
                if (bra[k] < 0 || bra[k] > top || bra[k + 1] < 0 || bra[k + 1] > top) continue;
                const long r = basis.index_of(bra);
                if (r < 0) continue;
                const std::complex<double> amp = x(bra[k], ket[k]) * x(bra[k + 1], ket[k + 1]) +
                                                 y(bra[k], ket[k]) * y(bra[k + 1], ket[k + 1]);
                ops.h_static(r, c) += 0.5 * params.g * amp.real();
            }
        }
    }
    return ops;
}

/// Writes H(eps) into `out` (resized as needed).
inline void assemble_into(const HamiltonianOperators& ops, const ControlVector& eps, Eigen::MatrixXd& out) {
    if (eps.size() != ops.n()) throw std::invalid_argument("assemble: control vector length differs from site count");
    out = ops.h_static;
    out.diagonal() += ops.number_levels.cast<double>() * eps;
}

inline Eigen::MatrixXd assemble(const HamiltonianOperators& ops, const ControlVector& eps) {
    Eigen::MatrixXd h;
    assemble_into(ops, eps, h);
    return h;
}

/// Diagonal block of a basis-ordered matrix for one excitation number.
template <typename Derived>
auto block_of(const Eigen::MatrixBase<Derived>& m, const IndexRange& r) {
    const auto b = static_cast<Eigen::Index>(r.begin), s = static_cast<Eigen::Index>(r.size());
    return m.block(b, b, s, s);
}

template <typename Derived>
auto block_of(Eigen::MatrixBase<Derived>& m, const IndexRange& r) {
    const auto b = static_cast<Eigen::Index>(r.begin), s = static_cast<Eigen::Index>(r.size());
    return m.block(b, b, s, s);
}

}  // namespace chainpulse
