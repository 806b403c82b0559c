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

#include <cstdint>
#include <memory>
#include <string>

#include "icx/core.hpp"
#include "icx/exp_representation.hpp"

namespace icx {

enum class DomainKind { box, ball };

/// A box of side `extent` or a ball of radius `extent`, centred at `center`.
struct Domain {
    DomainKind kind = DomainKind::box;
    int dimension = 1;
    double extent = 1.0;
    bool periodic = false;
    Point center = Point::Zero();

    static Domain box(int d, double side, Point center = Point::Zero());
    static Domain ball(int d, double radius, Point center = Point::Zero());
    /// Box [center - r, center + r]^d.
    static Domain cube_of_radius(int d, double r, Point center = Point::Zero());

    void validate() const;
    double volume() const;
    double half_width() const { return kind == DomainKind::box ? extent / 2 : extent; }
    bool contains(const Point& p) const;
};

struct IntegralEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::uint64_t n_evals = 0;
    std::string method;
    std::uint64_t seed = 0;
};

/// Tensor-product midpoint rule over Lambda^k. Ball domains integrate the
/// indicator over the bounding box. Guard: d*k <= 6.
IntegralEstimate quad_k(const TupleFunction& f, int k, const Domain& domain, int nodes_per_axis,
                        int workers = 1);

/// Uniform Monte Carlo over Lambda^k. Worker w draws from stream w and owns a
/// contiguous share of the samples; partial sums are reduced in worker order,
/// so the result is fixed by (seed, workers).
IntegralEstimate mc_k(const TupleFunction& f, int k, const Domain& domain, std::uint64_t n_samples,
                      std::uint64_t seed, int workers = 1);

/// Exact weighted sum over S^k of a site space.
IntegralEstimate site_sum_k(const TupleFunction& f, int k, const SiteSpace& space);

/// Midpoint grid for 1D hard-core integrands of diameter sigma: returns a
/// half width R >= min_half_width and an odd node count such that +-sigma
/// fall on cell edges and sigma/h is a half integer. Pair differences of
/// nodes then never sit on the core boundary and the diagonal cut errors
/// cancel cell by cell.
struct AlignedGrid {
    double half_width = 0.0;
    int nodes = 0;
};
AlignedGrid hard_core_aligned_grid(double sigma, double min_half_width, int half_cells_per_sigma);

enum class IntegrationMethod { quad, mc };

/// Upper limit on nodes per axis when the count is derived from a budget.
inline constexpr int kMaxNodesPerAxis = 32768;

struct IntegrationOptions {
    IntegrationMethod method = IntegrationMethod::quad;
    int nodes = 0;  // 0: pick from an evaluation budget
    std::uint64_t samples = 200000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::uint64_t eval_budget = 4000000;
    /// Hard-core diameter for 1D quadrature on aligned grids; 0 disables.
    double aligned_sigma = 0.0;
};

/// Integrates symmetric functions of k points over Lambda^k.
class Integrator {
  public:
    virtual ~Integrator() = default;
    virtual IntegralEstimate integrate(const TupleFunction& f, int k) const = 0;
    /// |Lambda|.
    virtual double measure() const = 0;
};

class QuadratureIntegrator final : public Integrator {
  public:
    QuadratureIntegrator(Domain domain, int nodes, std::uint64_t eval_budget = 4000000, int workers = 1);
    IntegralEstimate integrate(const TupleFunction& f, int k) const override;
    double measure() const override { return domain_.volume(); }
    int nodes_for(int k) const;

  private:
    Domain domain_;
    int nodes_;
    std::uint64_t budget_;
    int workers_;
};

/// 1D midpoint quadrature whose grid is aligned to a hard core of diameter
/// sigma. The cube is widened to the nearest aligned half width.
class AlignedQuadratureIntegrator final : public Integrator {
  public:
    AlignedQuadratureIntegrator(Domain domain, double sigma, int nodes, std::uint64_t eval_budget = 4000000,
                                int workers = 1);
    IntegralEstimate integrate(const TupleFunction& f, int k) const override;
    double measure() const override { return domain_.volume(); }
    AlignedGrid grid_for(int k) const;

  private:
    Domain domain_;
    double sigma_;
    int nodes_;
    std::uint64_t budget_;
    int workers_;
};

class MonteCarloIntegrator final : public Integrator {
  public:
    MonteCarloIntegrator(Domain domain, std::uint64_t samples, std::uint64_t seed, int workers = 1);
    IntegralEstimate integrate(const TupleFunction& f, int k) const override;
    double measure() const override { return domain_.volume(); }

  private:
    Domain domain_;
    std::uint64_t samples_;
    std::uint64_t seed_;
    int workers_;
};

class SiteSumIntegrator final : public Integrator {
  public:
    explicit SiteSumIntegrator(SiteSpace space);
    IntegralEstimate integrate(const TupleFunction& f, int k) const override;
    double measure() const override { return space_.total_weight(); }

  private:
    SiteSpace space_;
};

std::unique_ptr<Integrator> make_integrator(const IntegrationOptions& options, const Domain& domain);

}  // namespace icx
