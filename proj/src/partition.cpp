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

#include "icx/partition.hpp"

#include <array>
#include <mutex>
#include <sstream>

namespace icx {

std::string SetPartition::to_string() const
{
    std::ostringstream os;
    os << '{';
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (b)
            os << ',';
        os << '{';
        for (std::size_t i = 0; i < blocks[b].size(); ++i) {
            if (i)
                os << ',';
            os << blocks[b][i] + 1;
        }
        os << '}';
    }
    os << '}';
    return os.str();
}

PartitionStream::PartitionStream(int n, std::optional<int> k, PartitionLimits limits)
    : n_(n), k_(k)
{
    if (n < 0)
        throw ValidationError("ground-set size must be non-negative");
    if (n > limits.max_ground_set)
        throw SizeLimitError("partition enumeration capped at n = "
                             + std::to_string(limits.max_ground_set));
    if (k && (*k < 1 || *k > std::max(n, 1)))
        throw ValidationError("block count must satisfy 1 <= k <= n");
    if (n == 0)
        done_ = true;
}

bool PartitionStream::step()
{
    for (int i = n_ - 1; i >= 1; --i) {
        if (rgs_[i] <= prefix_max_[i - 1]) {
            ++rgs_[i];
            prefix_max_[i] = std::max(prefix_max_[i - 1], rgs_[i]);
            for (int j = i + 1; j < n_; ++j) {
                rgs_[j] = 0;
                prefix_max_[j] = prefix_max_[i];
            }
            blocks_ = prefix_max_[n_ - 1] + 1;
            return true;
        }
    }
    return false;
}

bool PartitionStream::advance()
{
    if (done_)
        return false;
    bool ok;
    if (!started_) {
        started_ = true;
        rgs_.assign(n_, 0);
        prefix_max_.assign(n_, 0);
        blocks_ = 1;
        ok = true;
    } else {
        ok = step();
    }
    while (ok && k_ && blocks_ != *k_)
        ok = step();
    if (!ok)
        done_ = true;
    return ok;
}

std::optional<SetPartition> PartitionStream::next()
{
    if (!advance())
        return std::nullopt;
    return partition_from_growth_string(rgs_);
}

SetPartition partition_from_growth_string(const std::vector<int>& rgs)
{
    SetPartition p;
    p.n = static_cast<int>(rgs.size());
    for (int i = 0; i < p.n; ++i) {
        if (rgs[i] >= static_cast<int>(p.blocks.size()))
            p.blocks.resize(rgs[i] + 1);
        p.blocks[rgs[i]].push_back(i);
    }
    return p;
}

const std::vector<std::vector<std::uint32_t>>& partition_block_masks(int m)
{
    static std::array<std::vector<std::vector<std::uint32_t>>, kMaxSubsetTuple + 1> tables;
    static std::array<std::once_flag, kMaxSubsetTuple + 1> flags;
    if (m < 0 || m > kMaxSubsetTuple)
        throw SizeLimitError("partition tables limited to 10 elements");
    std::call_once(flags[m], [m] {
        auto& table = tables[m];
        if (m == 0) {
            table.push_back({});
            return;
        }
        PartitionStream stream(m, std::nullopt, PartitionLimits{kMaxSubsetTuple});
        while (stream.advance()) {
            std::vector<std::uint32_t> masks(stream.current_blocks(), 0u);
            const auto& rgs = stream.growth_string();
            for (int i = 0; i < m; ++i)
                masks[rgs[i]] |= (1u << i);
            table.push_back(std::move(masks));
        }
    });
    return tables[m];
}

}  // namespace icx
