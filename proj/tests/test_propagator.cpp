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


#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "chainpulse/propagator.hpp"
#include "test_support.hpp"

namespace chainpulse {
namespace {

using testing::random_schedule;

TEST(Propagator, DiagonalPhase) {
    Eigen::MatrixXd h = Eigen::Vector2d(0.0, 0.5).asDiagonal();
    const Eigen::MatrixXcd u = segment_unitary(h, 1.0);
    EXPECT_NEAR(std::abs(u(0, 0) - cplx(1.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u(1, 1) - cplx(-1.0, 0.0)), 0.0, 1e-15);
    EXPECT_EQ(std::abs(u(0, 1)), 0.0);
}

TEST(Propagator, ZeroHamiltonianIsIdentity) {
    const Eigen::MatrixXcd u = segment_unitary(Eigen::MatrixXd(Eigen::MatrixXd::Zero(5, 5)), 1.0);
    EXPECT_TRUE(u.isIdentity(1e-15));
}

TEST(Propagator, ExchangeRotation) {
    const double g = 0.030;
    Eigen::Matrix2d h;
    h << 0, g, g, 0;
    const Eigen::MatrixXcd u = segment_unitary(Eigen::MatrixXd(h), 1.0);
    const double a = 2.0 * std::numbers::pi * g;
    EXPECT_NEAR(a, 0.1885, 1e-4);
    Eigen::Matrix2cd expect;
    expect << std::cos(a), cplx(0, -std::sin(a)), cplx(0, -std::sin(a)), std::cos(a);
    EXPECT_LT((u - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Propagator, SegmentMatchesPadeExponential) {
    std::mt19937_64 rng(3);
    const auto ops = build_operators(build_basis(3), DeviceParams::for_sites(3));
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd h = assemble(ops, random_schedule(3, 1, rng).step(0));
        const Eigen::MatrixXcd gen = cplx(0.0, -kTwoPi * 0.7) * h.cast<cplx>();
        const Eigen::MatrixXcd pade = gen.exp();
        EXPECT_LT((segment_unitary(h, 0.7) - pade).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Propagator, RejectsNonHermitian) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(0, 1) = 1.0;
    EXPECT_THROW(segment_unitary(h, 1.0), std::invalid_argument);
}

TEST(Propagator, FreeEvolutionLeavesComputationalBlockIdentity) {
    for (int n = 2; n <= 3; ++n) {
        auto p = DeviceParams::for_sites(n);
        p.g = 1e-300;  // coupling switched off (validate() needs g > 0)
        const auto basis = build_basis(n);
        const auto ops = build_operators(basis, p);
        const PulseSchedule s(n, 7, 1.0, 0.0);
        const auto u = propagate(s, ops).unitary;
        EXPECT_TRUE(project(u, basis).isIdentity(1e-14));
        for (std::size_t r = 0; r < basis.dim(); ++r) {
            double e = 0.0;
            for (int lv : basis.state(r).levels) e += lv == 2 ? -p.eta : (lv == 3 ? -p.eta_prime : 0.0);
            const auto i = static_cast<Eigen::Index>(r);
            EXPECT_LT(std::abs(u(i, i) - std::polar(1.0, -kTwoPi * e * 7.0)), 1e-12);
        }
    }
}

TEST(Propagator, UnitarityRandomSchedules) {
    std::mt19937_64 rng(5);
    for (auto [n, m] : {std::pair{2, 20}, std::pair{3, 23}}) {
        const auto ops = build_operators(build_basis(n), DeviceParams::for_sites(n));
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial)
            worst = std::max(worst, unitarity_error(propagate(random_schedule(n, m, rng), ops).unitary));
        EXPECT_LT(worst, 1e-10) << "n=" << n;
    }
}

TEST(Propagator, OffBlockEntriesExactlyZero) {
    std::mt19937_64 rng(6);
    const auto basis = build_basis(3);
    const auto ops = build_operators(basis, DeviceParams::for_sites(3));
    const auto u = propagate(random_schedule(3, 10, rng), ops).unitary;
    for (std::size_t r = 0; r < basis.dim(); ++r)
        for (std::size_t c = 0; c < basis.dim(); ++c)
            if (basis.state(r).excitation != basis.state(c).excitation)
                EXPECT_EQ(std::abs(u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))), 0.0);
}

TEST(Propagator, Composition) {
    std::mt19937_64 rng(8);
    const auto ops = build_operators(build_basis(3), DeviceParams::for_sites(3));
    const auto s = random_schedule(3, 24, rng);
    PulseSchedule first(3, 12, 1.0), second(3, 12, 1.0);
    first.values = s.values.topRows(12);
    second.values = s.values.bottomRows(12);
    const Eigen::MatrixXcd whole = propagate(s, ops).unitary;
    const Eigen::MatrixXcd split = propagate(second, ops).unitary * propagate(first, ops).unitary;
    EXPECT_LT((whole - split).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Propagator, TimeOrderingLaterStepsLeft) {
    const auto ops = build_operators(build_basis(2), DeviceParams::for_sites(2));
    PulseSchedule s(2, 2, 1.0);
    s.values << 0.3, -0.2, 1.1, 0.4;
    const auto res = propagate(s, ops, false, true);
    ASSERT_EQ(res.segment_unitaries.size(), 2u);
    EXPECT_LT((res.unitary - res.segment_unitaries[1] * res.segment_unitaries[0]).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GT((res.unitary - res.segment_unitaries[0] * res.segment_unitaries[1]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Propagator, MatchesFullSpaceOracle) {
    std::mt19937_64 rng(9);
    for (auto [n, m] : {std::pair{1, 5}, std::pair{2, 10}, std::pair{3, 23}}) {
        const auto p = DeviceParams::for_sites(n);
        const auto ops = build_operators(build_basis(n), p);
        for (int trial = 0; trial < 3; ++trial) {
            const auto s = random_schedule(n, m, rng);
            const Eigen::MatrixXcd diff = propagate(s, ops).unitary - propagate_full_space_oracle(s, p);
            EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-10) << "n=" << n;
        }
    }
}

TEST(Propagator, OracleRefusesLargeChains) {
    EXPECT_THROW(propagate_full_space_oracle(PulseSchedule(4, 2, 1.0), DeviceParams::for_sites(4)), std::invalid_argument);
}

TEST(Propagator, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(10);
    const int n = 2, m = 6;
    const auto ops = build_operators(build_basis(n), DeviceParams::for_sites(n));
    const auto s = random_schedule(n, m, rng);
    const auto res = propagate(s, ops, true);
    const double h = 1e-6;
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k) {
            PulseSchedule up = s, dn = s;
            up.values(i, k) += h;
            dn.values(i, k) -= h;
            const Eigen::MatrixXcd fd = (propagate(up, ops).unitary - propagate(dn, ops).unitary) / (2.0 * h);
            const Eigen::MatrixXcd& an = res.derivative(i, k, n);
            EXPECT_LT((fd - an).cwiseAbs().maxCoeff() / an.cwiseAbs().maxCoeff(), 1e-6) << "step " << i << " site " << k;
        }
}

TEST(Propagator, DegenerateSpectrumGradient) {
    // Resonant controls make block eigenvalues (nearly) coincide; the divided differences must stay finite.
    const auto ops = build_operators(build_basis(2), DeviceParams::for_sites(2));
    PulseSchedule s(2, 3, 1.0, 0.0);
    const auto res = propagate(s, ops, true);
    for (const auto& d : res.gradient) EXPECT_TRUE(d.allFinite());
}

TEST(Propagator, FlagsOutOfBoundValues) {
    const auto ops = build_operators(build_basis(2), DeviceParams::for_sites(2));
    PulseSchedule s(2, 2, 1.0, 0.0);
    EXPECT_FALSE(propagate(s, ops).out_of_bounds);
    s.values(1, 0) = 2.6;
    const auto res = propagate(s, ops);
    EXPECT_TRUE(res.out_of_bounds);
    EXPECT_LT(unitarity_error(res.unitary), 1e-12);
}

TEST(Propagator, StepsForRequiresMultiple) {
    EXPECT_EQ(steps_for(23.0, 1.0), 23);
    EXPECT_EQ(steps_for(26.0, 0.5), 52);
    EXPECT_THROW(steps_for(23.5, 1.0), std::invalid_argument);
    EXPECT_THROW(steps_for(-1.0, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace chainpulse
