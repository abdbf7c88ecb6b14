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
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chainpulse/basis.hpp"
#include "chainpulse/device_model.hpp"
#include "chainpulse/gate_fidelity.hpp"
#include "chainpulse/propagator.hpp"

namespace chainpulse {

enum class ObjectiveKind { Arccos, Infidelity };

/// Below this distance from F = 1 the arccos slope factor 1/sqrt(1 - F^2) is held constant.
inline constexpr double kArccosClampGap = 1e-12;

inline double objective_from_fidelity(double f, ObjectiveKind kind) {
    f = std::clamp(f, 0.0, 1.0);
    return kind == ObjectiveKind::Arccos ? std::acos(f) : 1.0 - f;
}

/// d objective / d F.
inline double objective_slope(double f, ObjectiveKind kind) {
    if (kind == ObjectiveKind::Infidelity) return -1.0;
    f = std::clamp(f, 0.0, 1.0 - kArccosClampGap);
    return -1.0 / std::sqrt(1.0 - f * f);
}

/**
 * Pulse-to-fidelity map for one gate, with its analytic gradient.
 *
 * The decision vector is laid out as
 *   [ eps_{0,0} .. eps_{0,n-1}, eps_{1,0}, ..., eps_{m-1,n-1}, beta_left(n), beta_right(n) ]
 * so its length is n*m + 2n. Gradients are evaluated on the computational
 * columns only: a forward sweep carries U_i..U_1 P^dagger, a backward sweep
 * carries W P U_m..U_{i+1}, and each step's Frechet derivative is contracted
 * in its own eigenbasis. Every sweep runs block by block over excitation number.
 */
class GateProblem {
public:
    GateProblem(DeviceParams params, GateTarget target, int num_steps, double dt = 1.0,
                ObjectiveKind kind = ObjectiveKind::Arccos, int levels_per_site = 4)
        : basis_(build_basis(params.n, levels_per_site, params.n)),
          ops_(build_operators(basis_, params)),
          target_(std::move(target)),
          num_steps_(num_steps),
          dt_(dt),
          kind_(kind) {
        if (target_.n() != params.n) throw std::invalid_argument("problem: target qubit count differs from device");
        if (num_steps < 1 || !(dt > 0.0)) throw std::invalid_argument("problem: num_steps and dt must be positive");
        effective_ = target_.effective();
        index_blocks();
    }

    const TruncatedBasis& basis() const { return basis_; }
    const HamiltonianOperators& operators() const { return ops_; }
    const DeviceParams& params() const { return ops_.params; }
    const GateTarget& target() const { return target_; }
    int n() const { return ops_.n(); }
    int num_steps() const { return num_steps_; }
    double dt() const { return dt_; }
    double theta() const { return num_steps_ * dt_; }
    ObjectiveKind kind() const { return kind_; }

    std::size_t pulse_dimension() const { return static_cast<std::size_t>(n() * num_steps_); }
    std::size_t dimension() const { return pulse_dimension() + 2 * static_cast<std::size_t>(n()); }

    Eigen::VectorXd lower_bounds() const {
        Eigen::VectorXd lo(static_cast<Eigen::Index>(dimension()));
        lo.head(static_cast<Eigen::Index>(pulse_dimension())).setConstant(params().eps_min);
        lo.tail(2 * n()).setConstant(-2.0 * std::numbers::pi);
        return lo;
    }

    Eigen::VectorXd upper_bounds() const {
        Eigen::VectorXd hi(static_cast<Eigen::Index>(dimension()));
        hi.head(static_cast<Eigen::Index>(pulse_dimension())).setConstant(params().eps_max);
        hi.tail(2 * n()).setConstant(2.0 * std::numbers::pi);
        return hi;
    }

    PulseSchedule schedule_from(const Eigen::VectorXd& x) const {
        check_size(x);
        PulseSchedule s(n(), num_steps_, dt_);
        for (int i = 0; i < num_steps_; ++i)
            for (int k = 0; k < n(); ++k) s.values(i, k) = x(i * n() + k);
        return s;
    }

    PhaseCompensation beta_from(const Eigen::VectorXd& x) const {
        check_size(x);
        const auto p = static_cast<Eigen::Index>(pulse_dimension());
        return {x.segment(p, n()), x.segment(p + n(), n())};
    }

    Eigen::VectorXd pack(const PulseSchedule& s, const PhaseCompensation& beta) const {
        if (s.n() != n() || s.num_steps() != num_steps_) throw std::invalid_argument("pack: schedule shape differs from problem");
        if (beta.left.size() != n() || beta.right.size() != n()) throw std::invalid_argument("pack: angle count differs");
        Eigen::VectorXd x(static_cast<Eigen::Index>(dimension()));
        for (int i = 0; i < num_steps_; ++i)
            for (int k = 0; k < n(); ++k) x(i * n() + k) = s.values(i, k);
        const auto p = static_cast<Eigen::Index>(pulse_dimension());
        x.segment(p, n()) = beta.left;
        x.segment(p + n(), n()) = beta.right;
        return x;
    }

    /// Fidelity, leakage and objective at x, via the dense propagator.
    FidelityReport report(const Eigen::VectorXd& x, double threshold = kDefaultFidelityThreshold) const {
        const auto u = propagate(schedule_from(x), ops_).unitary;
        auto rep = fidelity(project(u, basis_), target_, beta_from(x), threshold);
        rep.objective = objective_from_fidelity(rep.fidelity, kind_);
        return rep;
    }

    double value(const Eigen::VectorXd& x) const { return evaluate(x, nullptr, nullptr); }

    double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
        return evaluate(x, &grad, nullptr);
    }

    /// Objective plus the fidelity it was computed from.
    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad, double* fidelity_out) const {
        check_size(x);
        const int n = this->n(), m = num_steps_;
        const auto q = static_cast<Eigen::Index>(basis_.computational_dim());
        const PhaseCompensation beta = beta_from(x);
        const Eigen::VectorXcd l = compensation_diagonal(beta.left);
        const Eigen::VectorXcd r = compensation_diagonal(beta.right);

        // Per-step spectra of the blocks that hold computational states.
        std::vector<std::vector<BlockSpectrum>> spectra(static_cast<std::size_t>(m));
        Eigen::MatrixXd h;
        ControlVector eps(n);
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < n; ++k) eps(k) = x(i * n + k);
            assemble_into(ops_, eps, h);
            auto& row = spectra[static_cast<std::size_t>(i)];
            row.reserve(comp_blocks_.size());
            for (const auto& cb : comp_blocks_) row.push_back(block_spectrum(block_of(h, ops_.blocks[cb.block]), dt_));
        }

        // Forward sweep: fwd[i][b] = (U_i .. U_1 P^dagger) restricted to block b.
        const std::size_t nb = comp_blocks_.size();
        std::vector<std::vector<Eigen::MatrixXcd>> fwd(static_cast<std::size_t>(m) + 1, std::vector<Eigen::MatrixXcd>(nb));
        for (std::size_t b = 0; b < nb; ++b) fwd[0][b] = comp_blocks_[b].selector;
        for (int i = 0; i < m; ++i)
            for (std::size_t b = 0; b < nb; ++b)
                fwd[static_cast<std::size_t>(i) + 1][b].noalias() =
                    spectra[static_cast<std::size_t>(i)][b].unitary * fwd[static_cast<std::size_t>(i)][b];

        Eigen::MatrixXcd ucs = Eigen::MatrixXcd::Zero(q, q);
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& cb = comp_blocks_[b];
            const auto& xm = fwd[static_cast<std::size_t>(m)][b];
            for (std::size_t a = 0; a < cb.comp.size(); ++a)
                for (std::size_t c = 0; c < cb.comp.size(); ++c)
                    ucs(cb.comp[a], cb.comp[c]) = xm(cb.local_rows[a], static_cast<Eigen::Index>(c));
        }

        // K_ac = l_a U_cs(a,c) r_c conj(T_ac); z = sum K = tr(T^dagger L U_cs R).
        Eigen::MatrixXcd kmat(q, q);
        for (Eigen::Index a = 0; a < q; ++a)
            for (Eigen::Index c = 0; c < q; ++c) kmat(a, c) = l(a) * ucs(a, c) * r(c) * std::conj(effective_(a, c));
        const cplx z = kmat.sum();
        const double fid = std::min(1.0, std::abs(z) / static_cast<double>(q));
        if (fidelity_out) *fidelity_out = fid;
        const double obj = objective_from_fidelity(fid, kind_);
        if (!grad) return obj;

        grad->setZero(static_cast<Eigen::Index>(dimension()));
        if (std::abs(z) == 0.0) return obj;
        // dObj = slope * Re(conj(z) dz) / (|z| q)
        const cplx zscale = std::conj(z) / (std::abs(z) * static_cast<double>(q)) * objective_slope(fid, kind_);

        // W = R T^dagger L, restricted to each block's computational rows/cols.
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& cb = comp_blocks_[b];
            const auto nbq = static_cast<Eigen::Index>(cb.comp.size());
            const auto d = static_cast<Eigen::Index>(ops_.blocks[cb.block].size());
            Eigen::MatrixXcd lambda = Eigen::MatrixXcd::Zero(nbq, d);
            for (Eigen::Index c = 0; c < nbq; ++c)
                for (Eigen::Index a = 0; a < nbq; ++a) {
                    const auto ca = cb.comp[static_cast<std::size_t>(a)], cc = cb.comp[static_cast<std::size_t>(c)];
                    lambda(c, cb.local_rows[static_cast<std::size_t>(a)]) = r(cc) * std::conj(effective_(ca, cc)) * l(ca);
                }
            for (int i = m - 1; i >= 0; --i) {
                const auto& sp = spectra[static_cast<std::size_t>(i)][b];
                const Eigen::MatrixXcd vc = sp.vectors.cast<cplx>();
                // V^T G V with G = fwd_i * lambda_i.
                const Eigen::MatrixXcd left = vc.transpose() * fwd[static_cast<std::size_t>(i)][b];
                const Eigen::MatrixXcd right = lambda * vc;
                const Eigen::MatrixXcd gt = left * right;
                const Eigen::MatrixXcd mm = gt.transpose().cwiseProduct(sp.loewner(dt_));
                const Eigen::MatrixXcd vm = vc * mm;
                const auto base = static_cast<Eigen::Index>(ops_.blocks[cb.block].begin);
                for (Eigen::Index row = 0; row < d; ++row) {
                    const cplx diag = vm.row(row).cwiseProduct(vc.row(row)).sum();
                    const double contrib = (zscale * diag).real();
                    if (contrib == 0.0) continue;
                    for (int k = 0; k < n; ++k) {
                        const int lv = ops_.number_levels(base + row, k);
                        if (lv) (*grad)(i * n + k) += lv * contrib;
                    }
                }
                lambda = lambda * sp.unitary;
            }
        }

        const auto p = static_cast<Eigen::Index>(pulse_dimension());
        for (int k = 0; k < n; ++k) {
            cplx dl = 0.0, dr = 0.0;
            for (Eigen::Index a = 0; a < q; ++a)
                for (Eigen::Index c = 0; c < q; ++c) {
                    if (qubit_bit(static_cast<std::size_t>(a), k, n)) dl += kmat(a, c);
                    if (qubit_bit(static_cast<std::size_t>(c), k, n)) dr += kmat(a, c);
                }
            const cplx mi(0.0, -1.0);
            (*grad)(p + k) = (zscale * mi * dl).real();
            (*grad)(p + n + k) = (zscale * mi * dr).real();
        }
        return obj;
    }

private:
    struct CompBlock {
        std::size_t block = 0;
        std::vector<Eigen::Index> local_rows;  // offsets inside the block
        std::vector<Eigen::Index> comp;        // computational index of each column
        Eigen::MatrixXcd selector;             // d_b x N_b
    };

    void check_size(const Eigen::VectorXd& x) const {
        if (static_cast<std::size_t>(x.size()) != dimension())
            throw std::invalid_argument("decision vector length differs from n*m + 2n");
    }

    void index_blocks() {
        const auto& idx = basis_.computational_indices();
        for (std::size_t b = 0; b < ops_.blocks.size(); ++b) {
            const auto& rg = ops_.blocks[b];
            CompBlock cb;
            cb.block = b;
            for (std::size_t a = 0; a < idx.size(); ++a)
                if (idx[a] >= rg.begin && idx[a] < rg.end) {
                    cb.local_rows.push_back(static_cast<Eigen::Index>(idx[a] - rg.begin));
                    cb.comp.push_back(static_cast<Eigen::Index>(a));
                }
            if (cb.comp.empty()) continue;
            cb.selector = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rg.size()), static_cast<Eigen::Index>(cb.comp.size()));
            for (std::size_t c = 0; c < cb.comp.size(); ++c) cb.selector(cb.local_rows[c], static_cast<Eigen::Index>(c)) = 1.0;
            comp_blocks_.push_back(std::move(cb));
        }
    }

    TruncatedBasis basis_;
    HamiltonianOperators ops_;
    GateTarget target_;
    Eigen::MatrixXcd effective_;
    int num_steps_;
    double dt_;
    ObjectiveKind kind_;
    std::vector<CompBlock> comp_blocks_;
};

/// Objective of one schedule/angle pair; fills `grad` (same layout as GateProblem) when given.
inline double objective(const PulseSchedule& schedule, const DeviceParams& params, const GateTarget& target,
                        const PhaseCompensation& beta, Eigen::VectorXd* grad = nullptr,
                        ObjectiveKind kind = ObjectiveKind::Arccos) {
    GateProblem problem(params, target, schedule.num_steps(), schedule.dt, kind);
    const Eigen::VectorXd x = problem.pack(schedule, beta);
    return problem.evaluate(x, grad, nullptr);
}

}  // namespace chainpulse
