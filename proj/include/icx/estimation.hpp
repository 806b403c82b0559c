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
#include <optional>
#include <vector>

#include "icx/correlation.hpp"
#include "icx/kirkwood.hpp"
#include "icx/sampler.hpp"

namespace icx {

inline constexpr int kDefaultBatches = 20;

struct DensityEstimate {
    double rho = 0.0;
    double se = 0.0;
    std::size_t n_configs = 0;
    std::vector<double> batch_rho;
};

/// rho = mean(N)/|Lambda| with a batch-means standard error. Needs at least
/// two configurations.
DensityEstimate estimate_density(const std::vector<Configuration>& configs, int batches = kDefaultBatches);

struct PcfEstimate {
    std::vector<double> edges;  // bins + 1 edges on [0, r_max]
    std::vector<double> g;
    std::vector<double> counts;  // ordered pairs per bin, summed over configurations
    std::vector<double> se;
    std::vector<std::vector<double>> batch_g;
    double r_max = 0.0;
    double rho_hat = 0.0;
    int dimension = 1;
    std::size_t n_configs = 0;

    std::size_t bins() const { return g.size(); }
    double midpoint(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// g(bin) = ordered pair counts / (n_configs rho^2 |Lambda| shell volume)
/// under the minimum-image convention; needs r_max <= L/2.
PcfEstimate estimate_pcf(const std::vector<Configuration>& configs, int bins, double r_max,
                         int batches = kDefaultBatches);

/// Piecewise-linear g through bin midpoints, 1 at and beyond r_max. With a
/// declared hard core, 0 below the first non-empty bin and flat up to its
/// midpoint.
struct PcfInterpolant {
    std::vector<double> edges;
    std::vector<double> values;
    double r_max = 0.0;
    bool hard_core = false;
    std::size_t first_nonzero = 0;

    PcfInterpolant() = default;
    PcfInterpolant(std::vector<double> edges, std::vector<double> values, double r_max, bool hard_core);
    double operator()(double r) const;
};

struct EmpiricalFamily {
    double rho_hat = 0.0;
    double se_rho = 0.0;
    PcfEstimate pcf;
    PcfInterpolant g_hat;
    double hard_core = 0.0;
    int closure_order = 3;
    std::size_t n_configs = 0;
    std::vector<std::uint64_t> seeds;

    /// g-hat as a pair function (C_g by radial quadrature, b = max(1, sup g)).
    PairFunction pair_function() const;
    PairFunction batch_pair_function(std::size_t batch) const;
    /// Kirkwood closure rho^n prod g-hat.
    CorrelationFamily family() const;
};

EmpiricalFamily make_empirical_family(const DensityEstimate& density, const PcfEstimate& pcf, double hard_core,
                                      int closure_order = 3);

struct MuHatOptions {
    int K = 2;
    double R = 20.0;
    IntegrationOptions integration;
    /// Evaluation budget for the per-batch order-2 terms used for the error bar.
    std::uint64_t batch_budget = 250000;
    bool diagnostics = true;
    int diagnostic_orders = 2;
    int diagnostic_probes = 2;
};

struct MuHatReport {
    ExpansionReport expansion;
    double rho_hat = 0.0;
    double se_rho = 0.0;
    double mu_hat = 0.0;
    double se_mu = 0.0;
    double truncation_err = 0.0;
    double k1_direct = 0.0;  // -rho int (g - 1), computed without the closure
    std::optional<AssumptionBFit> diagnostics;
    double xi_hat = 0.0;
    bool cutoff_warning = false;
};

/// mu-hat = log rho-hat + sum_{k<=K} terms with K <= 2. The k = 1 term needs
/// only rho_T^(2) = rho^2 (g - 1); k = 2 uses the Kirkwood closure for rho^(3).
MuHatReport mu_hat(const EmpiricalFamily& fam, const MuHatOptions& options = {});

struct EmpiricalDiagnostics {
    AssumptionBFit fit;
    double xi_hat = 0.0;
};

/// Assumption-B fit on the closed family plus the Ruelle constant estimate.
/// Needs closure_order >= n_orders + 1.
EmpiricalDiagnostics diagnostics(const EmpiricalFamily& fam, int n_orders, double R,
                                 const IntegrationOptions& options, int n_probes = 2);

/// Independent Poisson configurations in [0, L)^d.
std::vector<Configuration> poisson_configurations(double rho, double L, int d, std::size_t n, std::uint64_t seed);

}  // namespace icx
