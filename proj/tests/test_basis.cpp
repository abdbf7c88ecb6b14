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


#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "chainpulse/basis.hpp"

namespace chainpulse {
namespace {

// Counts tuples in [0, levels)^n with sum <= max_exc by direct enumeration.
std::size_t brute_force_count(int n, int levels, int max_exc) {
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(levels);
    std::size_t count = 0;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        int sum = 0;
        for (int k = 0; k < n; ++k) {
            sum += static_cast<int>(c % static_cast<std::size_t>(levels));
            c /= static_cast<std::size_t>(levels);
        }
        if (sum <= max_exc) ++count;
    }
    return count;
}

std::vector<std::size_t> block_sizes(const TruncatedBasis& b) {
    std::vector<std::size_t> out;
    for (const auto& r : b.excitation_blocks()) out.push_back(r.size());
    return out;
}

TEST(Basis, ThreeSitesHasTwentyStates) { EXPECT_EQ(build_basis(3, 4, 3).dim(), 20u); }

TEST(Basis, FourSitesHasSixtySixStates) { EXPECT_EQ(build_basis(4, 4, 4).dim(), 66u); }

TEST(Basis, SingleSite) {
    const auto b = build_basis(1, 4, 1);
    ASSERT_EQ(b.dim(), 2u);
    EXPECT_EQ(b.state(0).levels, LevelTuple({0}));
    EXPECT_EQ(b.state(1).levels, LevelTuple({1}));
}

TEST(Basis, TwoSitesHasSixStates) { EXPECT_EQ(build_basis(2, 4, 2).dim(), 6u); }

TEST(Basis, DimensionMatchesBruteForce) {
    for (int n = 1; n <= 5; ++n)
        for (int levels = 2; levels <= 4; ++levels)
            for (int exc = 1; exc <= n * (levels - 1); ++exc)
                EXPECT_EQ(build_basis(n, levels, exc).dim(), brute_force_count(n, levels, exc))
                    << "n=" << n << " levels=" << levels << " exc=" << exc;
}

TEST(Basis, IndexMapIsBijection) {
    for (int n = 1; n <= 4; ++n) {
        const auto b = build_basis(n);
        std::set<LevelTuple> seen;
        for (std::size_t i = 0; i < b.dim(); ++i) {
            EXPECT_EQ(b.index_of(b.state(i).levels), static_cast<long>(i));
            EXPECT_TRUE(seen.insert(b.state(i).levels).second);
        }
    }
}

TEST(Basis, UnknownTupleIsAbsent) {
    const auto b = build_basis(3);
    EXPECT_EQ(b.index_of({3, 1, 0}), -1);
    EXPECT_EQ(b.index_of({0, 0}), -1);
}

TEST(Basis, BlockSizes) {
    EXPECT_EQ(block_sizes(build_basis(3)), (std::vector<std::size_t>{1, 3, 6, 10}));
    EXPECT_EQ(block_sizes(build_basis(4)), (std::vector<std::size_t>{1, 4, 10, 20, 31}));
    EXPECT_EQ(block_sizes(build_basis(1, 4, 1)), (std::vector<std::size_t>{1, 1}));
}

TEST(Basis, BlocksPartitionAndMatchExcitation) {
    for (int n = 1; n <= 5; ++n) {
        const auto b = build_basis(n);
        const auto blocks = excitation_blocks(b);
        ASSERT_EQ(blocks.size(), static_cast<std::size_t>(n + 1));
        std::size_t next = 0;
        for (std::size_t e = 0; e < blocks.size(); ++e) {
            EXPECT_EQ(blocks[e].begin, next);
            for (std::size_t i = blocks[e].begin; i < blocks[e].end; ++i) {
                const auto& lv = b.state(i).levels;
                EXPECT_EQ(std::accumulate(lv.begin(), lv.end(), 0), static_cast<int>(e));
                EXPECT_EQ(b.state(i).excitation, static_cast<int>(e));
            }
            next = blocks[e].end;
        }
        EXPECT_EQ(next, b.dim());
    }
}

TEST(Basis, ProjectorBinaryOrder) {
    const auto b = build_basis(2);
    const Eigen::MatrixXd p = computational_projector(b);
    ASSERT_EQ(p.rows(), 4);
    ASSERT_EQ(p.cols(), 6);
    const std::vector<LevelTuple> expect = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int a = 0; a < 4; ++a) {
        const long col = b.index_of(expect[static_cast<std::size_t>(a)]);
        ASSERT_GE(col, 0);
        EXPECT_EQ(p(a, col), 1.0);
        EXPECT_EQ(p.row(a).sum(), 1.0);
    }
}

TEST(Basis, ProjectorRowsOrthonormal) {
    for (int n = 1; n <= 4; ++n) {
        const Eigen::MatrixXd p = computational_projector(build_basis(n));
        EXPECT_EQ(p.rows(), 1 << n);
        EXPECT_TRUE((p * p.transpose()).isIdentity(0.0));
    }
    const auto b3 = build_basis(3);
    EXPECT_EQ(b3.computational_indices().size(), 8u);
    std::set<std::size_t> uniq(b3.computational_indices().begin(), b3.computational_indices().end());
    EXPECT_EQ(uniq.size(), 8u);
}

TEST(Basis, ProjectorRequiresAllOnesState) {
    EXPECT_THROW(computational_projector(build_basis(3, 4, 2)), std::invalid_argument);
}

TEST(Basis, RejectsBadArguments) {
    EXPECT_THROW(TruncatedBasis(0, 4, 1), std::invalid_argument);
    EXPECT_THROW(TruncatedBasis(2, 1, 1), std::invalid_argument);
    EXPECT_THROW(TruncatedBasis(2, 4, -1), std::invalid_argument);
}

}  // namespace
}  // namespace chainpulse
