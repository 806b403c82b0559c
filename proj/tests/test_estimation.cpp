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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "icx/estimation.hpp"

using namespace icx;

namespace {

/// Exact 1D hard-rod pair correlation: the n-th neighbour sits at
/// n sigma + Gamma(n, lambda) with lambda = 1/rho - sigma.
double tonks_g(double r, double rho, double sigma)
{
    const double lambda = 1.0 / rho - sigma;
    double sum = 0.0;
    for (int n = 1; n * sigma < r; ++n) {
        const double s = r - n * sigma;
        sum += std::exp((n - 1) * std::log(s) - s / lambda - std::lgamma(n) - n * std::log(lambda));
    }
    return sum / rho;
}

const std::vector<Configuration>& tonks_configs()
{
    static const std::vector<Configuration> configs = [] {
        ChainSettings s;
        s.z = std::exp(tonks_mu_exact(0.05, 1.0));
        s.L = 200.0;
        s.potential = hard_core_potential(1.0);
        s.sweeps = 410000;
        s.burn_in = 10000;
        s.thin = 10;
        s.seed = 2024;
        std::vector<Configuration> out;
        run_chain(s, [&](const Configuration& c, std::int64_t) { out.push_back(c); });
        return out;
    }();
    return configs;
}

PcfEstimate tabulated(double rho, double r_max, int bins, const std::function<double(double)>& g)
{
    PcfEstimate p;
    p.r_max = r_max;
    p.rho_hat = rho;
    p.n_configs = 2;
    for (int b = 0; b <= bins; ++b)
        p.edges.push_back(r_max * b / bins);
    for (int b = 0; b < bins; ++b)
        p.g.push_back(g(p.midpoint(b)));
    p.se.assign(bins, 0.0);
    p.counts.assign(bins, 0.0);
    p.batch_g = {p.g, p.g};
    return p;
}

}  // namespace

TEST_CASE("density estimate")
{
    std::vector<Configuration> empty(5);
    for (auto& c : empty)
        c.L = 10.0;
    const auto zero = estimate_density(empty);
    CHECK(zero.rho == 0.0);
    CHECK(zero.se == 0.0);

    const auto configs = poisson_configurations(0.05, 200.0, 1, 500, 3);
    const auto est = estimate_density(configs);
    CHECK(est.n_configs == 500);
    CHECK(std::abs(est.rho - 0.05) < 3.0 * est.se);
    CHECK_THROWS_AS(estimate_density({configs.front()}), ValidationError);
}

TEST_CASE("pair correlation of Poisson configurations is flat")
{
    const auto configs = poisson_configurations(0.05, 200.0, 1, 4000, 4);
    const auto pcf = estimate_pcf(configs, 20, 10.0);
    CHECK(pcf.bins() == 20);
    for (std::size_t b = 0; b < pcf.bins(); ++b)
        CHECK(std::abs(pcf.g[b] - 1.0) < 3.0 * pcf.se[b]);
    CHECK_THROWS_AS(estimate_pcf(configs, 20, 150.0), ValidationError);

    // Configuration order only changes the batching, not the values.
    auto reversed = configs;
    std::reverse(reversed.begin(), reversed.end());
    const auto again = estimate_pcf(reversed, 20, 10.0);
    for (std::size_t b = 0; b < pcf.bins(); ++b)
        CHECK(again.g[b] == doctest::Approx(pcf.g[b]).epsilon(1e-12));

    const auto plane = estimate_pcf(poisson_configurations(0.5, 20.0, 2, 300, 5), 10, 5.0);
    for (std::size_t b = 0; b < plane.bins(); ++b)
        CHECK(std::abs(plane.g[b] - 1.0) < 4.0 * plane.se[b]);
}

TEST_CASE("pair correlation of hard rods")
{
    const auto& configs = tonks_configs();
    const auto pcf = estimate_pcf(configs, 200, 10.0);
    for (std::size_t b = 0; b < 20; ++b)
        CHECK(pcf.g[b] == 0.0);
    const double contact = 1.0 / (1.0 - 0.05);
    CHECK(std::abs(pcf.g[20] - contact) < 3.0 * pcf.se[20]);
}

TEST_CASE("interpolant")
{
    const PcfInterpolant g({0.0, 1.0, 2.0, 3.0, 4.0}, {0.0, 0.5, 1.5, 1.2}, 4.0, true);
    CHECK(g(0.9) == 0.0);
    CHECK(g(1.0) == 0.5);
    CHECK(g(1.5) == 0.5);
    CHECK(g(2.0) == doctest::Approx(1.0));
    CHECK(g(3.5) == doctest::Approx(1.2));
    CHECK(g(3.75) == doctest::Approx(1.1));
    CHECK(g(4.0) == 1.0);
    CHECK(g(50.0) == 1.0);
    const PcfInterpolant soft({0.0, 1.0, 2.0}, {0.0, 2.0}, 2.0, false);
    CHECK(soft(0.25) == 0.0);
    CHECK(soft(1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(PcfInterpolant({0.0, 1.0}, {-0.1}, 1.0, false), NumericalGuardError);
}

TEST_CASE("Poisson pipeline recovers log rho")
{
    const double rho = 0.05;
    const auto configs = poisson_configurations(rho, 200.0, 1, 3000, 6);
    const auto fam = make_empirical_family(estimate_density(configs), estimate_pcf(configs, 50, 10.0), 0.0);
    MuHatOptions opt;
    opt.R = 10.0;
    opt.diagnostics = false;
    const auto rep = mu_hat(fam, opt);
    CHECK(rep.se_mu > 0.0);
    CHECK(std::abs(rep.mu_hat - std::log(rho)) < 3.0 * rep.se_mu);
    CHECK(rep.truncation_err == std::abs(rep.expansion.terms.back()));
}

TEST_CASE("hard-rod inverse expansion")
{
    const auto& configs = tonks_configs();
    const auto fam = make_empirical_family(estimate_density(configs), estimate_pcf(configs, 200, 10.0), 1.0);
    MuHatOptions opt;
    opt.R = 20.0;
    const auto rep = mu_hat(fam, opt);
    CHECK(rep.cutoff_warning);
    // k = 1 from rho_T^(2) directly and through the tilde recursion.
    CHECK(std::abs(rep.k1_direct - rep.expansion.terms[0]) <= 1e-12 * std::abs(rep.k1_direct));
    CHECK(rep.expansion.terms[0] > 0.0);
    const double exact = tonks_mu_exact(0.05, 1.0);
    CHECK(std::abs(rep.mu_hat - exact) <= std::max(3.0 * rep.se_mu, 0.3 * rep.truncation_err));
    CHECK(std::abs((rep.mu_hat - std::log(rep.rho_hat)) / (exact - std::log(0.05)) - 1.0) < 0.15);
    REQUIRE(rep.diagnostics);
    CHECK(rep.xi_hat > 0.0);
}

TEST_CASE("pressure from the sampled pair correlation")
{
    const auto& configs = tonks_configs();
    const auto fam = make_empirical_family(estimate_density(configs), estimate_pcf(configs, 200, 10.0), 1.0);
    IntegrationOptions opts;
    const auto p = pressure_expansion(truncate(fam.family()), 1, 20.0, options_for(fam.pair_function(), opts));
    const double exact = 0.05 / (1.0 - 0.05);
    CHECK(std::abs(p.value() / exact - 1.0) < 0.05);
}

TEST_CASE("diagnostics")
{
    const double rho = 0.05;
    const auto ideal = make_empirical_family({rho, 0.0, 2, {}}, tabulated(rho, 10.0, 50, [](double) { return 1.0; }), 0.0);
    IntegrationOptions opts;
    opts.eval_budget = 200000;
    const auto flat = diagnostics(ideal, 2, 10.0, opts);
    CHECK(flat.fit.q == 0.0);
    CHECK(flat.fit.convergent);
    CHECK(flat.xi_hat == doctest::Approx(rho));

    const auto rods = make_empirical_family(
        {rho, 0.0, 2, {}}, tabulated(rho, 10.0, 200, [&](double r) { return tonks_g(r, rho, 1.0); }), 1.0);
    const auto fit = diagnostics(rods, 2, 10.0, opts);
    CHECK(fit.fit.q > 0.0);
    CHECK(fit.fit.convergent);

    auto low = rods;
    low.closure_order = 2;
    CHECK_THROWS_AS(diagnostics(low, 3, 10.0, opts), ValidationError);
}

TEST_CASE("exact Tonks pair correlation sanity")
{
    CHECK(tonks_g(0.5, 0.05, 1.0) == 0.0);
    CHECK(tonks_g(1.0 + 1e-12, 0.05, 1.0) == doctest::Approx(1.0 / 0.95).epsilon(1e-9));
    CHECK(tonks_g(60.0, 0.05, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
}
