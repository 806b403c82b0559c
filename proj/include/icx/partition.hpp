/*
   Copyright 2026 The icx Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icx/core.hpp"

namespace icx {

/// A partition of {0, ..., n-1} into non-empty blocks. Blocks are sorted by
/// their minimum element and each block is sorted ascending.
struct SetPartition {
    int n = 0;
    std::vector<std::vector<int>> blocks;

    int block_count() const { return static_cast<int>(blocks.size()); }
    std::string to_string() const;  // 1-based, e.g. {{1,3},{2}}
    friend bool operator==(const SetPartition&, const SetPartition&) = default;
};

struct PartitionLimits {
    int max_ground_set = 12;
};

/// Restricted-growth-string enumeration of the set partitions of an n-set,
/// optionally restricted to exactly k blocks.
///
/// Partitions come out in lexicographic RGS order, which is also the
/// canonical block order. n = 0 yields nothing.
class PartitionStream {
  public:
    PartitionStream(int n, std::optional<int> k = std::nullopt,
                    PartitionLimits limits = {});

    /// Next partition, or nullopt when the stream is exhausted.
    std::optional<SetPartition> next();

    /// Raw access: advance and expose the restricted growth string.
    bool advance();
    const std::vector<int>& growth_string() const { return rgs_; }
    int current_blocks() const { return blocks_; }

  private:
    bool step();

    int n_;
    std::optional<int> k_;
    std::vector<int> rgs_;
    std::vector<int> prefix_max_;
    int blocks_ = 0;
    bool started_ = false;
    bool done_ = false;
};

inline PartitionStream enumerate_partitions(int n, std::optional<int> k = std::nullopt,
                                            PartitionLimits limits = {})
{
    return PartitionStream(n, k, limits);
}

SetPartition partition_from_growth_string(const std::vector<int>& rgs);

/// Every partition of an m-set (m <= 10) as a list of block bitmasks over
/// local indices 0..m-1. Cached and safe to call concurrently.
const std::vector<std::vector<std::uint32_t>>& partition_block_masks(int m);

inline constexpr int kMaxSubsetTuple = 10;

namespace detail {

/// scatter[local] = the global mask made of the bits of `mask` selected by
/// the bits of `local`.
inline void scatter_table(std::uint32_t mask, std::vector<std::uint32_t>& scatter)
{
    int bits[32];
    int p = 0;
    for (int b = 0; b < 32; ++b)
        if (mask & (1u << b))
            bits[p++] = b;
    scatter.assign(std::size_t{1} << p, 0u);
    for (std::uint32_t local = 1; local < scatter.size(); ++local) {
        int low = std::countr_zero(local);
        scatter[local] = scatter[local & (local - 1)] | (1u << bits[low]);
    }
}

}  // namespace detail

/// Forward partition-lattice transform on the subsets of an m-tuple:
/// out[S] = sum over partitions pi of S of prod_{B in pi} in[B].
/// Both vectors are indexed by bitmask; index 0 (empty set) maps to 1.
/// Conditioning on the block that holds the lowest element of S gives
/// out[S] = sum_{T subset of S \ lo} in[lo + T] out[S \ lo \ T], O(3^m).
template <class Scalar>
std::vector<Scalar> partition_sums_on_subsets(int m, const std::vector<Scalar>& in)
{
    if (m > kMaxSubsetTuple)
        throw SizeLimitError("partition transform limited to 10-element tuples");
    const std::uint32_t full = (1u << m);
    std::vector<Scalar> out(full, Scalar(0));
    out[0] = Scalar(1);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        const std::uint32_t lo = mask & (~mask + 1);
        const std::uint32_t rest = mask ^ lo;
        Scalar total = in[mask];
        for (std::uint32_t t = (rest - 1) & rest; rest != 0; t = (t - 1) & rest) {
            total += in[lo | t] * out[rest ^ t];
            if (t == 0)
                break;
        }
        out[mask] = total;
    }
    return out;
}

/// Inverse transform: the same recursion solved for the block holding the
/// lowest element. Proper subsets have smaller bitmasks, so one increasing
/// sweep suffices.
template <class Scalar>
std::vector<Scalar> partition_inverse_on_subsets(int m, const std::vector<Scalar>& base)
{
    if (m > kMaxSubsetTuple)
        throw SizeLimitError("partition transform limited to 10-element tuples");
    const std::uint32_t full = (1u << m);
    std::vector<Scalar> out(full, Scalar(0));
    out[0] = Scalar(1);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        const std::uint32_t lo = mask & (~mask + 1);
        const std::uint32_t rest = mask ^ lo;
        Scalar total = base[mask];
        for (std::uint32_t t = (rest - 1) & rest; rest != 0; t = (t - 1) & rest) {
            total -= out[lo | t] * base[rest ^ t];
            if (t == 0)
                break;
        }
        out[mask] = total;
    }
    return out;
}

}  // namespace icx
