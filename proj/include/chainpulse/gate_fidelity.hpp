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
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "chainpulse/basis.hpp"
#include "chainpulse/propagator.hpp"

namespace chainpulse {

enum class GateName { CZ, CCZ, TOFFOLI, CCCZ, Custom };

inline std::string gate_name_string(GateName g) {
    switch (g) {
        case GateName::CZ: return "cz";
        case GateName::CCZ: return "ccz";
        case GateName::TOFFOLI: return "toffoli";
        case GateName::CCCZ: return "cccz";
        case GateName::Custom: return "custom";
    }
    return "custom";
}

inline GateName parse_gate_name(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "cz") return GateName::CZ;
    if (s == "ccz") return GateName::CCZ;
    if (s == "toffoli" || s == "ccnot") return GateName::TOFFOLI;
    if (s == "cccz") return GateName::CCCZ;
    if (s == "custom") return GateName::Custom;
    throw std::invalid_argument("unknown gate '" + s + "'");
}

/**
 * Target gate on the 2^n qubit subspace.
 *
 * `matrix` is the literal logical gate. `frame` is a local (tensor-product)
 * unitary applied before and after the pulse, so the realized circuit is
 * frame * (compensated U_cs) * frame and the pulse itself must produce
 * `effective() = frame^dagger * matrix * frame^dagger`. The frame is the
 * identity except for TOFFOLI, where it is a Hadamard on the last qubit:
 * the XY chain conserves excitation number and cannot flip |110> <-> |111>,
 * so the pulse realizes the CCZ core and the Hadamards supply the rest.
 */
struct GateTarget {
    GateName name = GateName::Custom;
    Eigen::MatrixXcd matrix;
    Eigen::MatrixXcd frame;
    /// True when effective() is diagonal.
    bool is_diagonal = false;

    int n() const {
        int q = 0;
        while ((Eigen::Index{1} << q) < matrix.rows()) ++q;
        return q;
    }

    Eigen::MatrixXcd effective() const { return frame.adjoint() * matrix * frame.adjoint(); }
};

namespace detail {

inline Eigen::MatrixXcd controlled_phase_flip(int n) {
    const Eigen::Index q = Eigen::Index{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(q, q);
    m(q - 1, q - 1) = -1.0;
    return m;
}

inline bool is_diagonal_matrix(const Eigen::MatrixXcd& m, double tol = 1e-12) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (r != c && std::abs(m(r, c)) > tol) return false;
    return true;
}

}  // namespace detail

inline GateTarget make_custom_target(const Eigen::MatrixXcd& matrix, const Eigen::MatrixXcd& frame) {
    if (matrix.rows() != matrix.cols() || matrix.rows() < 2 || (matrix.rows() & (matrix.rows() - 1)) != 0)
        throw std::invalid_argument("target: matrix must be 2^n x 2^n");
    if (frame.rows() != matrix.rows() || frame.cols() != matrix.cols())
        throw std::invalid_argument("target: frame shape differs from matrix");
    if (unitarity_error(matrix) > 1e-12) throw std::invalid_argument("target: matrix is not unitary");
    if (unitarity_error(frame) > 1e-12) throw std::invalid_argument("target: frame is not unitary");
    GateTarget t;
    t.name = GateName::Custom;
    t.matrix = matrix;
    t.frame = frame;
    t.is_diagonal = detail::is_diagonal_matrix(t.effective());
    return t;
}

inline GateTarget make_custom_target(const Eigen::MatrixXcd& matrix) {
    return make_custom_target(matrix, Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols()));
}

inline GateTarget make_target(GateName name) {
    GateTarget t;
    switch (name) {
        case GateName::CZ: t.matrix = detail::controlled_phase_flip(2); break;
        case GateName::CCZ: t.matrix = detail::controlled_phase_flip(3); break;
        case GateName::CCCZ: t.matrix = detail::controlled_phase_flip(4); break;
        case GateName::TOFFOLI: {
            t.matrix = Eigen::MatrixXcd::Identity(8, 8);
            t.matrix(6, 6) = t.matrix(7, 7) = 0.0;
            t.matrix(6, 7) = t.matrix(7, 6) = 1.0;
            const double s = 1.0 / std::numbers::sqrt2;
            Eigen::Matrix2cd h;
            h << s, s, s, -s;
            t.frame = Eigen::MatrixXcd::Zero(8, 8);
            for (int blk = 0; blk < 4; ++blk) t.frame.block(2 * blk, 2 * blk, 2, 2) = h;
            break;
        }
        case GateName::Custom: throw std::invalid_argument("make_target: custom targets need a matrix");
    }
    if (t.frame.size() == 0) t.frame = Eigen::MatrixXcd::Identity(t.matrix.rows(), t.matrix.cols());
    t.name = name;
    t.is_diagonal = detail::is_diagonal_matrix(t.effective());
    return t;
}

/// Default qubit count of a built-in gate.
inline int gate_qubits(GateName name) {
    switch (name) {
        case GateName::CZ: return 2;
        case GateName::CCZ:
        case GateName::TOFFOLI: return 3;
        case GateName::CCCZ: return 4;
        default: return 0;
    }
}

/// Local-z compensation angles (radians) applied left and right of U_cs.
struct PhaseCompensation {
    Eigen::VectorXd left;
    Eigen::VectorXd right;

    static PhaseCompensation zeros(int n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)}; }

    /// Angles reduced to (-pi, pi].
    PhaseCompensation wrapped() const {
        auto wrap = [](Eigen::VectorXd v) {
            for (auto& a : v) {
                a = std::remainder(a, 2.0 * std::numbers::pi);
                if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
            }
            return v;
        };
        return {wrap(left), wrap(right)};
    }
};

/// Bit k (site k+1, big-endian) of computational index a.
inline int qubit_bit(std::size_t a, int k, int n) { return static_cast<int>((a >> (n - 1 - k)) & 1u); }

/// Diagonal of the tensor product of R_z(beta_k) = diag(1, exp(-i beta_k)).
inline Eigen::VectorXcd compensation_diagonal(const Eigen::VectorXd& beta) {
    const int n = static_cast<int>(beta.size());
    const std::size_t q = std::size_t{1} << n;
    Eigen::VectorXcd d(static_cast<Eigen::Index>(q));
    for (std::size_t a = 0; a < q; ++a) {
        double phase = 0.0;
        for (int k = 0; k < n; ++k) phase += qubit_bit(a, k, n) * beta(k);
        d(static_cast<Eigen::Index>(a)) = std::polar(1.0, -phase);
    }
    return d;
}

inline Eigen::MatrixXcd compensation_matrix(const Eigen::VectorXd& beta) {
    return compensation_diagonal(beta).asDiagonal();
}

/// Computational-subspace block P U P^dagger.
inline Eigen::MatrixXcd project(const Eigen::MatrixXcd& u, const TruncatedBasis& basis) {
    if (static_cast<std::size_t>(u.rows()) != basis.dim() || u.rows() != u.cols())
        throw std::invalid_argument("project: matrix shape differs from basis dimension");
    const auto& idx = basis.computational_indices();
    const auto q = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd out(q, q);
    for (Eigen::Index r = 0; r < q; ++r)
        for (Eigen::Index c = 0; c < q; ++c)
            out(r, c) = u(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    return out;
}

/// 1 - tr(U_cs^dagger U_cs) / 2^n, clamped to [0, 1].
inline double leakage(const Eigen::MatrixXcd& u_cs) {
    const double kept = u_cs.squaredNorm() / static_cast<double>(u_cs.rows());
    return std::clamp(1.0 - kept, 0.0, 1.0);
}

struct FidelityReport {
    double fidelity = 0.0;
    double objective = std::numbers::pi / 2;  // arccos(fidelity)
    PhaseCompensation beta;
    double leakage = 1.0;
    bool feasible = false;
};

inline constexpr double kDefaultFidelityThreshold = 0.9999;

/// F = |tr(T^dagger U_l U_cs U_r)| / 2^n with T the effective target.
inline FidelityReport fidelity(const Eigen::MatrixXcd& u_cs, const GateTarget& target, const PhaseCompensation& beta,
                               double threshold = kDefaultFidelityThreshold) {
    if (u_cs.rows() != target.matrix.rows() || u_cs.cols() != target.matrix.cols())
        throw std::invalid_argument("fidelity: U_cs and target shapes differ");
    if (beta.left.size() != target.n() || beta.right.size() != target.n())
        throw std::invalid_argument("fidelity: compensation angle count differs from qubit count");
    const Eigen::MatrixXcd realized =
        compensation_diagonal(beta.left).asDiagonal() * u_cs * compensation_diagonal(beta.right).asDiagonal();
    const cplx tr = (target.effective().adjoint() * realized).trace();
    FidelityReport rep;
    rep.fidelity = std::clamp(std::abs(tr) / static_cast<double>(u_cs.rows()), 0.0, 1.0);
    rep.objective = std::acos(rep.fidelity);
    rep.beta = beta;
    rep.leakage = leakage(u_cs);
    rep.feasible = rep.fidelity >= threshold;
    return rep;
}

}  // namespace chainpulse
