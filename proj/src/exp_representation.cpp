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

#include "icx/exp_representation.hpp"

#include <numeric>

#include <Eigen/Dense>

namespace icx {

double SiteSpace::total_weight() const
{
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void SiteSpace::validate() const
{
    if (sites.empty())
        throw ValidationError("site space is empty");
    if (sites.size() != weights.size())
        throw ValidationError("site space needs one weight per site");
    if (size() > kMaxSites)
        throw SizeLimitError("site spaces are capped at 6 sites");
    for (double w : weights)
        if (!(w > 0.0))
            throw ValidationError("site weights must be positive");
}

SiteSpace SiteSpace::random(int n_sites, std::uint64_t seed, int d)
{
    PhiloxStream rng(seed, 0x5173);
    SiteSpace s;
    for (int i = 0; i < n_sites; ++i) {
        Point p = Point::Zero();
        for (int a = 0; a < d; ++a)
            p[a] = rng.uniform();
        s.sites.push_back(p);
        s.weights.push_back(static_cast<double>(2 + rng.below(11)) / 8.0);
    }
    s.validate();
    return s;
}

ExpBoundFit fit_expbound(const SiteKernelFamily<double>& family, const SiteSpace& space)
{
    space.validate();
    if (family.order < 2)
        throw ValidationError("fit_expbound needs a family of order >= 2");
    ExpBoundFit fit;
    const double volume = space.total_weight();
    for (int n = 1; n <= family.order; ++n) {
        double total = 0.0;
        detail::for_each_multiset<double>(space, n, [&](std::span<const int> tuple, double w) {
            total += w * std::abs(family(tuple));
        });
        fit.integrals.push_back(total * std::tgamma(n + 1.0));
    }

    // log(I_n / (|Lambda| n!)) = log D + n log c on the orders with I_n > 0.
    std::vector<double> xs, ys;
    for (int n = 1; n <= family.order; ++n) {
        const double scaled = fit.integrals[n - 1] / (volume * std::tgamma(n + 1.0));
        if (scaled > 0.0) {
            xs.push_back(n);
            ys.push_back(std::log(scaled));
        }
    }
    if (xs.empty()) {
        fit.c = 0.0;
        fit.satisfied = true;
        return fit;
    }
    if (xs.size() >= 2) {
        Eigen::MatrixXd A(xs.size(), 2);
        Eigen::VectorXd b(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = xs[i];
            b[i] = ys[i];
        }
        const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
        fit.D = std::exp(coef[0]);
    }
    fit.c = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.c = std::max(fit.c, std::exp((ys[i] - std::log(fit.D)) / xs[i]));
    fit.satisfied = fit.c < 0.5;
    return fit;
}

}  // namespace icx
