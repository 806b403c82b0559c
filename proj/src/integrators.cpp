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

#include "icx/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "icx/rng.hpp"

namespace icx {

namespace {

/// Neumaier-compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

template <class Fn>
void run_workers(int workers, Fn&& fn)
{
    if (workers <= 1) {
        fn(0);
        return;
    }
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&fn, w] { fn(w); });
}

}  // namespace

Domain Domain::box(int d, double side, Point center)
{
    Domain dom{DomainKind::box, d, side, false, center};
    dom.validate();
    return dom;
}

Domain Domain::ball(int d, double radius, Point center)
{
    Domain dom{DomainKind::ball, d, radius, false, center};
    dom.validate();
    return dom;
}

Domain Domain::cube_of_radius(int d, double r, Point center)
{
    return box(d, 2.0 * r, center);
}

void Domain::validate() const
{
    if (dimension < 1 || dimension > 3)
        throw ValidationError("domain dimension must be 1, 2 or 3");
    if (!(extent > 0.0))
        throw ValidationError("domain extent must be positive");
}

double Domain::volume() const
{
    return kind == DomainKind::box ? std::pow(extent, dimension) : ball_volume(dimension, extent);
}

bool Domain::contains(const Point& p) const
{
    if (kind == DomainKind::ball)
        return (p - center).head(dimension).squaredNorm() <= extent * extent;
    for (int a = 0; a < dimension; ++a)
        if (std::abs(p[a] - center[a]) > extent / 2)
            return false;
    return true;
}

IntegralEstimate quad_k(const TupleFunction& f, int k, const Domain& domain, int nodes, int workers)
{
    domain.validate();
    const int d = domain.dimension;
    const int dims = d * k;
    if (k < 0)
        throw ValidationError("quad_k needs k >= 0");
    if (dims > 6)
        throw SizeLimitError("quadrature cost guard: d*k must be <= 6");
    if (nodes < 1)
        throw ValidationError("quad_k needs at least one node per axis");
    IntegralEstimate est;
    est.method = "quad";
    if (k == 0) {
        est.value = f({});
        est.n_evals = 1;
        return est;
    }
    if (std::pow(static_cast<double>(nodes), dims) > 2e10)
        throw SizeLimitError("quadrature cost guard: too many nodes");

    const double half = domain.half_width();
    const double h = 2.0 * half / nodes;
    std::vector<double> offsets(nodes);
    for (int i = 0; i < nodes; ++i)
        offsets[i] = -half + (i + 0.5) * h;
    const bool ball = domain.kind == DomainKind::ball;

    // One partial sum per node of the outermost axis, reduced in order.
    std::vector<Accumulator> slabs(nodes);
    std::vector<std::uint64_t> evals(nodes, 0);
    workers = std::max(1, std::min(workers, nodes));
    run_workers(workers, [&](int w) {
        std::vector<Point> pts(k, domain.center);
        std::vector<int> idx(dims, 0);
        for (int outer = w; outer < nodes; outer += workers) {
            idx.assign(dims, 0);
            idx[0] = outer;
            Accumulator acc;
            std::uint64_t count = 0;
            while (true) {
                for (int a = 0; a < dims; ++a)
                    pts[a / d][a % d] = domain.center[a % d] + offsets[idx[a]];
                bool inside = true;
                if (ball)
                    for (const auto& p : pts)
                        inside = inside && domain.contains(p);
                if (inside) {
                    acc.add(f(pts));
                    ++count;
                }
                int a = dims - 1;
                while (a >= 1 && ++idx[a] == nodes)
                    idx[a--] = 0;
                if (a < 1)
                    break;
            }
            slabs[outer] = acc;
            evals[outer] = count;
        }
    });
    Accumulator total;
    for (int i = 0; i < nodes; ++i) {
        total.add(slabs[i].value());
        est.n_evals += evals[i];
    }
    est.value = total.value() * std::pow(h, dims);
    return est;
}

IntegralEstimate mc_k(const TupleFunction& f, int k, const Domain& domain, std::uint64_t n_samples,
                      std::uint64_t seed, int workers)
{
    domain.validate();
    if (n_samples < 2)
        throw ValidationError("mc_k needs at least two samples");
    IntegralEstimate est;
    est.method = "mc";
    est.seed = seed;
    if (k == 0) {
        est.value = f({});
        est.n_evals = 1;
        return est;
    }
    const int d = domain.dimension;
    const double half = domain.half_width();
    workers = std::max(1, workers);
    struct Partial {
        double mean = 0.0;
        double m2 = 0.0;
        std::uint64_t n = 0;
    };
    std::vector<Partial> partials(workers);
    const PhiloxStream base(seed);
    run_workers(workers, [&](int w) {
        auto rng = base.split(static_cast<std::uint64_t>(w));
        const std::uint64_t begin = n_samples * w / workers;
        const std::uint64_t end = n_samples * (w + 1) / workers;
        std::vector<Point> pts(k, domain.center);
        Partial p;
        for (std::uint64_t s = begin; s < end; ++s) {
            for (auto& pt : pts) {
                do {
                    for (int a = 0; a < d; ++a)
                        pt[a] = domain.center[a] + rng.uniform(-half, half);
                } while (domain.kind == DomainKind::ball && !domain.contains(pt));
            }
            const double v = f(pts);
            ++p.n;
            const double delta = v - p.mean;
            p.mean += delta / static_cast<double>(p.n);
            p.m2 += delta * (v - p.mean);
        }
        partials[w] = p;
    });
    // Chan et al. pairwise combination, in worker order.
    Partial total;
    for (const auto& p : partials) {
        if (p.n == 0)
            continue;
        const double n = static_cast<double>(total.n + p.n);
        const double delta = p.mean - total.mean;
        total.m2 += p.m2 + delta * delta * static_cast<double>(total.n) * static_cast<double>(p.n) / n;
        total.mean += delta * static_cast<double>(p.n) / n;
        total.n += p.n;
    }
    const double scale = std::pow(domain.volume(), k);
    const double var = total.n > 1 ? total.m2 / static_cast<double>(total.n - 1) : 0.0;
    est.value = scale * total.mean;
    est.std_err = scale * std::sqrt(var / static_cast<double>(total.n));
    est.n_evals = total.n;
    return est;
}

IntegralEstimate site_sum_k(const TupleFunction& f, int k, const SiteSpace& space)
{
    space.validate();
    if (k > 8)
        throw SizeLimitError("site sums limited to k <= 8");
    IntegralEstimate est;
    est.method = "sites";
    const int s = space.size();
    std::vector<int> idx(k, 0);
    std::vector<Point> pts(k);
    Accumulator acc;
    while (true) {
        double w = 1.0;
        for (int i = 0; i < k; ++i) {
            pts[i] = space.sites[idx[i]];
            w *= space.weights[idx[i]];
        }
        acc.add(w * f(pts));
        ++est.n_evals;
        int a = k - 1;
        while (a >= 0 && ++idx[a] == s)
            idx[a--] = 0;
        if (a < 0)
            break;
    }
    est.value = acc.value();
    return est;
}

AlignedGrid hard_core_aligned_grid(double sigma, double min_half_width, int half_cells_per_sigma)
{
    if (!(sigma > 0.0) || !(min_half_width > 0.0) || half_cells_per_sigma < 1)
        throw ValidationError("aligned grid needs positive sigma, width and resolution");
    const double h = 2.0 * sigma / (2 * half_cells_per_sigma + 1);
    auto n = static_cast<int>(std::ceil(2.0 * min_half_width / h - 1e-9));
    if (n % 2 == 0)
        ++n;
    return {n * h / 2.0, n};
}

QuadratureIntegrator::QuadratureIntegrator(Domain domain, int nodes, std::uint64_t eval_budget, int workers)
    : domain_(domain), nodes_(nodes), budget_(eval_budget), workers_(workers)
{
    domain_.validate();
}

int QuadratureIntegrator::nodes_for(int k) const
{
    if (nodes_ > 0)
        return nodes_;
    const int dims = std::max(1, domain_.dimension * k);
    const double n = std::floor(std::pow(static_cast<double>(budget_), 1.0 / dims));
    return static_cast<int>(std::clamp(n, 2.0, static_cast<double>(kMaxNodesPerAxis)));
}

IntegralEstimate QuadratureIntegrator::integrate(const TupleFunction& f, int k) const
{
    return quad_k(f, k, domain_, nodes_for(k), workers_);
}

AlignedQuadratureIntegrator::AlignedQuadratureIntegrator(Domain domain, double sigma, int nodes,
                                                         std::uint64_t eval_budget, int workers)
    : domain_(domain), sigma_(sigma), nodes_(nodes), budget_(eval_budget), workers_(workers)
{
    domain_.validate();
    if (domain_.dimension != 1 || domain_.kind != DomainKind::box)
        throw ValidationError("aligned quadrature needs a 1D box");
    if (!(sigma_ > 0.0))
        throw ValidationError("aligned quadrature needs sigma > 0");
}

AlignedGrid AlignedQuadratureIntegrator::grid_for(int k) const
{
    const double target =
        nodes_ > 0 ? nodes_
                   : std::min(std::floor(std::pow(static_cast<double>(budget_), 1.0 / std::max(1, k))),
                              static_cast<double>(kMaxNodesPerAxis));
    const double hw = domain_.half_width();
    const int m = std::max(1, static_cast<int>(std::floor((target * sigma_ / (2.0 * hw) - 1.0) / 2.0)));
    return hard_core_aligned_grid(sigma_, hw, m);
}

IntegralEstimate AlignedQuadratureIntegrator::integrate(const TupleFunction& f, int k) const
{
    const auto grid = grid_for(k);
    return quad_k(f, k, Domain::cube_of_radius(1, grid.half_width, domain_.center), grid.nodes, workers_);
}

MonteCarloIntegrator::MonteCarloIntegrator(Domain domain, std::uint64_t samples, std::uint64_t seed, int workers)
    : domain_(domain), samples_(samples), seed_(seed), workers_(workers)
{
    domain_.validate();
}

IntegralEstimate MonteCarloIntegrator::integrate(const TupleFunction& f, int k) const
{
    // Separate orders draw from separate seeds so their errors are independent.
    return mc_k(f, k, domain_, samples_, mix64(seed_ + static_cast<std::uint64_t>(k)), workers_);
}

SiteSumIntegrator::SiteSumIntegrator(SiteSpace space) : space_(std::move(space))
{
    space_.validate();
}

IntegralEstimate SiteSumIntegrator::integrate(const TupleFunction& f, int k) const
{
    return site_sum_k(f, k, space_);
}

std::unique_ptr<Integrator> make_integrator(const IntegrationOptions& options, const Domain& domain)
{
    if (options.method == IntegrationMethod::mc)
        return std::make_unique<MonteCarloIntegrator>(domain, options.samples, options.seed, options.workers);
    if (options.aligned_sigma > 0.0 && domain.dimension == 1 && domain.kind == DomainKind::box)
        return std::make_unique<AlignedQuadratureIntegrator>(domain, options.aligned_sigma, options.nodes,
                                                             options.eval_budget, options.workers);
    return std::make_unique<QuadratureIntegrator>(domain, options.nodes, options.eval_budget, options.workers);
}

}  // namespace icx
