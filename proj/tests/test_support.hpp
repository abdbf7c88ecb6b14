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

#include <random>

#include <Eigen/Dense>

#include "chainpulse/chainpulse.hpp"

namespace chainpulse::testing {

inline PulseSchedule random_schedule(int n, int m, std::mt19937_64& rng, double lo = -2.5, double hi = 2.5, double dt = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    PulseSchedule s(n, m, dt);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k) s.values(i, k) = u(rng);
    return s;
}

inline Eigen::VectorXd random_angles(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    Eigen::VectorXd v(n);
    for (auto& a : v) a = u(rng);
    return v;
}

// Haar-ish random unitary from the QR factorization of a complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) a(r, c) = {g(rng), g(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < d; ++c) q.col(c) *= std::polar(1.0, std::arg(r(c, c)));
    return q;
}

inline Eigen::VectorXd random_decision(const GateProblem& p, std::mt19937_64& rng, double amp = 2.5) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(p.dimension()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = i < static_cast<Eigen::Index>(p.pulse_dimension()) ? amp * u(rng) : std::numbers::pi * u(rng);
    return x;
}

}  // namespace chainpulse::testing
