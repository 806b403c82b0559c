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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "icx/combinatorics.hpp"
#include "icx/graded_series.hpp"
#include "icx/partition.hpp"
#include "icx/rng.hpp"

namespace icx {

/// A finite weighted set of sites standing in for a bounded window; the
/// weights play the role of the Lebesgue measure.
struct SiteSpace {
    static constexpr int kMaxSites = 6;

    std::vector<Point> sites;
    std::vector<double> weights;

    int size() const { return static_cast<int>(sites.size()); }
    double total_weight() const;
    void validate() const;

    /// Sites uniform in [0,1)^d with dyadic weights in [1/4, 3/2].
    static SiteSpace random(int n_sites, std::uint64_t seed, int d = 1);
};

/// F_n on n-tuples of site indices, symmetric under permutation; F_0 = 1.
template <class Scalar>
struct SiteKernelFamily {
    int order = 0;
    std::function<Scalar(std::span<const int>)> value;

    Scalar operator()(std::span<const int> sites) const
    {
        return sites.empty() ? Scalar(1) : value(sites);
    }
};

namespace detail {

inline std::uint64_t hash_multiset(std::uint64_t seed, std::span<const int> sites)
{
    int sorted[16];
    const auto n = std::min<std::size_t>(sites.size(), 16);
    std::copy_n(sites.begin(), n, sorted);
    std::sort(sorted, sorted + n);
    std::uint64_t h = mix64(seed ^ (0x51ed27ull * (n + 1)));
    for (std::size_t i = 0; i < n; ++i)
        h = mix64(h ^ static_cast<std::uint64_t>(sorted[i] + 1));
    return h;
}

template <class Scalar>
Scalar random_value(std::uint64_t h);

template <>
inline double random_value<double>(std::uint64_t h)
{
    return 2.0 * static_cast<double>(h >> 11) * 0x1.0p-53 - 1.0;
}

template <>
inline Rational random_value<Rational>(std::uint64_t h)
{
    const int num = static_cast<int>(h % 19) - 9;
    const int den = static_cast<int>((h >> 20) % 9) + 1;
    return Rational(num, den);
}

}  // namespace detail

/// A deterministic random symmetric family: the value of F_n depends only
/// on the multiset of sites and the seed.
template <class Scalar>
SiteKernelFamily<Scalar> random_site_family(int order, std::uint64_t seed)
{
    return {order, [seed](std::span<const int> s) {
                return detail::random_value<Scalar>(detail::hash_multiset(seed, s));
            }};
}

/// Phi(eta) = sum over set partitions pi of eta of prod_i F_{|pi_i|}(pi_i),
/// evaluated literally by enumerating the partitions.
template <class Scalar>
Scalar phi_from_family(const SiteKernelFamily<Scalar>& family, std::span<const int> eta,
                       PartitionLimits limits = {})
{
    if (eta.empty())
        throw ValidationError("phi_from_family needs a non-empty tuple");
    const int m = static_cast<int>(eta.size());
    auto stream = enumerate_partitions(m, std::nullopt, limits);
    Scalar total(0);
    std::vector<int> block;
    while (auto p = stream.next()) {
        Scalar term(1);
        for (const auto& b : p->blocks) {
            block.clear();
            for (int i : b)
                block.push_back(eta[i]);
            term *= family(block);
        }
        total += term;
    }
    return total;
}

/// Phi on every sub-tuple of eta (indexed by bitmask), by splitting off the
/// block that holds the lowest element:
/// Phi(S) = sum_{B ni min S} F(B) Phi(S \ B). Cost 3^m instead of Bell sums.
template <class Scalar>
std::vector<Scalar> phi_on_subsets(const SiteKernelFamily<Scalar>& family, std::span<const int> eta)
{
    const int m = static_cast<int>(eta.size());
    if (m > 16)
        throw SizeLimitError("phi_on_subsets limited to 16-element tuples");
    const std::uint32_t full = 1u << m;
    std::vector<Scalar> f(full, Scalar(0));
    std::vector<int> block;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        block.clear();
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i))
                block.push_back(eta[i]);
        f[mask] = family(block);
    }
    std::vector<Scalar> phi(full, Scalar(0));
    phi[0] = Scalar(1);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        const std::uint32_t low = mask & (0u - mask);
        const std::uint32_t rest = mask ^ low;
        Scalar acc(0);
        // Enumerate sub-blocks B = low | sub with sub a submask of rest.
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            acc += f[low | sub] * phi[rest & ~sub];
            if (sub == 0)
                break;
        }
        phi[mask] = acc;
    }
    return phi;
}

/// The unique family whose partition sums reproduce Phi: Moebius inversion
/// on the partition lattice, F(eta) = Phi(eta) - sum_{|pi| >= 2} prod F(pi_i).
template <class Scalar>
SiteKernelFamily<Scalar> family_from_phi(const SiteKernelFamily<Scalar>& phi)
{
    return {phi.order, [phi](std::span<const int> eta) {
                const int m = static_cast<int>(eta.size());
                const std::uint32_t full = 1u << m;
                std::vector<Scalar> base(full, Scalar(0));
                base[0] = Scalar(1);
                std::vector<int> block;
                for (std::uint32_t mask = 1; mask < full; ++mask) {
                    block.clear();
                    for (int i = 0; i < m; ++i)
                        if (mask & (1u << i))
                            block.push_back(eta[i]);
                    base[mask] = phi(block);
                }
                return partition_inverse_on_subsets(m, base)[full - 1];
            }};
}

namespace detail {

/// Calls visit(tuple, weight) once per multiset of size n drawn from the
/// sites, in lexicographic order, with weight = prod w / prod(multiplicity!).
/// Summing symmetric g over S^n equals n! * sum visit-weight * g(tuple).
template <class Scalar, class Visit>
void for_each_multiset(const SiteSpace& space, int n, Visit&& visit)
{
    const int s = space.size();
    std::vector<Scalar> w;
    for (double x : space.weights)
        w.emplace_back(x);
    std::vector<int> tuple(n, 0);
    std::vector<Scalar> prefix(n + 1, Scalar(1));
    std::vector<int> run(n + 1, 0);  // length of the run of equal indices ending at i
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == n) {
            visit(std::span<const int>(tuple), prefix[n]);
            return;
        }
        for (int site = start; site < s; ++site) {
            tuple[pos] = site;
            run[pos + 1] = (pos > 0 && tuple[pos - 1] == site) ? run[pos] + 1 : 1;
            prefix[pos + 1] = prefix[pos] * w[site] / Scalar(run[pos + 1]);
            rec(pos + 1, site);
        }
    };
    rec(0, 0);
}

}  // namespace detail

template <class Scalar>
struct GradedSides {
    GradedSeries<Scalar> lhs;  // sum_n 1/n! sum_{S^n} Phi
    GradedSeries<Scalar> rhs;  // exp(sum_n 1/n! sum_{S^n} F_n)
};

/// Both sides of the exponential representation as graded series, with
/// F_n carrying weight t^n.
template <class Scalar>
GradedSides<Scalar> exp_identity_sides(const SiteKernelFamily<Scalar>& family, const SiteSpace& space,
                                       int order)
{
    space.validate();
    if (order < 0 || order > 8)
        throw SizeLimitError("exponential identity check limited to order 8");
    GradedSeries<Scalar> lhs(order), log_rhs(order);
    lhs[0] = Scalar(1);
    for (int n = 1; n <= order; ++n) {
        Scalar lhs_n(0), log_n(0);
        detail::for_each_multiset<Scalar>(space, n, [&](std::span<const int> tuple, const Scalar& w) {
            lhs_n += w * phi_on_subsets(family, tuple).back();
            log_n += w * family(tuple);
        });
        lhs[n] = lhs_n;
        log_rhs[n] = log_n;
    }
    return {std::move(lhs), log_rhs.exp()};
}

template <class Scalar>
struct ExpIdentityReport {
    std::vector<Scalar> lhs;
    std::vector<Scalar> rhs;
    std::vector<double> residual;  // relative, per order
    double max_residual() const
    {
        return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
    }
};

template <class Scalar>
ExpIdentityReport<Scalar> verify_exp_identity(const SiteKernelFamily<Scalar>& family, const SiteSpace& space,
                                              int order)
{
    auto sides = exp_identity_sides(family, space, order);
    ExpIdentityReport<Scalar> report;
    report.lhs = sides.lhs.coefficients();
    report.rhs = sides.rhs.coefficients();
    for (int n = 0; n <= order; ++n) {
        const double l = static_cast<double>(report.lhs[n]);
        const double r = static_cast<double>(report.rhs[n]);
        if (report.lhs[n] == report.rhs[n]) {
            report.residual.push_back(0.0);
            continue;
        }
        const double scale = std::max({std::abs(l), std::abs(r), 1e-300});
        report.residual.push_back(std::abs(static_cast<double>(report.lhs[n] - report.rhs[n])) / scale);
    }
    return report;
}

struct ExpBoundFit {
    double D = 1.0;
    double c = 0.0;
    bool satisfied = true;
    std::vector<double> integrals;  // I_n = sum_{S^n} |F_n| prod w, n = 1..K
};

/// Fits int |F_n| <= |Lambda| n! D c^n: D from a least-squares line through
/// log(I_n / (|Lambda| n!)), then the smallest c valid at that D for every
/// order n <= K.
ExpBoundFit fit_expbound(const SiteKernelFamily<double>& family, const SiteSpace& space);

}  // namespace icx
