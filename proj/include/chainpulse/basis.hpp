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

#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chainpulse {

/// Level tuple of an n-site product state; entry k is the excitation of site k.
using LevelTuple = std::vector<int>;

struct BasisState {
    LevelTuple levels;
    int excitation = 0;
};

/// Half-open index range [begin, end) in the truncated basis.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

/**
 * Excitation-limited product basis of an n-site transmon chain.
 *
 * States are ordered by total excitation first and lexicographically by
 * level tuple second, so any excitation-conserving operator is block
 * diagonal in this basis. `computational_indices()[i]` is the basis index of
 * the qubit state whose levels are the n-bit big-endian expansion of i
 * (site 1 is the most significant bit).
 */
class TruncatedBasis {
public:
    TruncatedBasis(int n, int levels_per_site, int max_excitations)
        : n_(n), levels_per_site_(levels_per_site), max_excitations_(max_excitations) {
        if (n < 1) throw std::invalid_argument("basis: n must be >= 1");
        if (levels_per_site < 2 || levels_per_site > 4)
            throw std::invalid_argument("basis: levels_per_site must be in [2, 4]");
        if (max_excitations < 1 || max_excitations > n * (levels_per_site - 1))
            throw std::invalid_argument("basis: max_excitations out of range [1, n*(levels_per_site-1)]");
        enumerate();
    }

    int n() const { return n_; }
    int levels_per_site() const { return levels_per_site_; }
    int max_excitations() const { return max_excitations_; }
    std::size_t dim() const { return states_.size(); }

    const std::vector<BasisState>& states() const { return states_; }
    const BasisState& state(std::size_t i) const { return states_.at(i); }

    /// Index of a level tuple, or -1 when it lies outside the truncation.
    long index_of(const LevelTuple& levels) const {
        auto it = index_map_.find(levels);
        return it == index_map_.end() ? -1 : static_cast<long>(it->second);
    }

    /// One contiguous range per excitation number 0..max_excitations.
    const std::vector<IndexRange>& excitation_blocks() const { return blocks_; }

    bool has_computational_subspace() const { return max_excitations_ >= n_; }

    const std::vector<std::size_t>& computational_indices() const {
        if (!has_computational_subspace())
            throw std::invalid_argument("basis: all-ones qubit state exceeds max_excitations");
        return computational_;
    }

    std::size_t computational_dim() const { return std::size_t{1} << n_; }

private:
    void enumerate() {
        std::vector<std::vector<LevelTuple>> by_excitation(max_excitations_ + 1);
        LevelTuple t(n_, 0);
        // Odometer over all levels_per_site^n tuples, lexicographic with site 1 slowest.
        while (true) {
            const int s = std::accumulate(t.begin(), t.end(), 0);
            if (s <= max_excitations_) by_excitation[s].push_back(t);
            int k = n_ - 1;
            while (k >= 0 && t[k] == levels_per_site_ - 1) t[k--] = 0;
            if (k < 0) break;
            ++t[k];
        }
        for (int s = 0; s <= max_excitations_; ++s) {
            IndexRange r{states_.size(), states_.size()};
            for (auto& lv : by_excitation[s]) {
                index_map_.emplace(lv, states_.size());
                states_.push_back(BasisState{std::move(lv), s});
            }
            r.end = states_.size();
            blocks_.push_back(r);
        }
        if (has_computational_subspace()) {
            const std::size_t q = computational_dim();
            computational_.reserve(q);
            for (std::size_t i = 0; i < q; ++i) {
                LevelTuple lv(n_);
                for (int k = 0; k < n_; ++k) lv[k] = static_cast<int>((i >> (n_ - 1 - k)) & 1u);
                computational_.push_back(index_map_.at(lv));
            }
        }
    }

    int n_;
    int levels_per_site_;
    int max_excitations_;
    std::vector<BasisState> states_;
    std::map<LevelTuple, std::size_t> index_map_;
    std::vector<IndexRange> blocks_;
    std::vector<std::size_t> computational_;
};

/// Builds the truncated basis; `max_excitations` defaults to n.
inline TruncatedBasis build_basis(int n, int levels_per_site = 4, int max_excitations = -1) {
    return TruncatedBasis(n, levels_per_site, max_excitations < 0 ? n : max_excitations);
}

inline std::vector<IndexRange> excitation_blocks(const TruncatedBasis& basis) {
    return basis.excitation_blocks();
}

/// Rectangular 2^n x dim selector; row i picks the qubit state with binary expansion i.
inline Eigen::MatrixXd computational_projector(const TruncatedBasis& basis) {
    const auto& idx = basis.computational_indices();
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()),
                                                static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < idx.size(); ++i) sel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx[i])) = 1.0;
    return sel;
}

inline std::string to_string(const LevelTuple& levels) {
    std::string s;
    for (int l : levels) s.push_back(static_cast<char>('0' + l));
    return s;
}

}  // namespace chainpulse
