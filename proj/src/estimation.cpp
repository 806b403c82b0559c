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

#include "icx/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace icx {

namespace {

int batch_count(std::size_t n, int batches)
{
    if (batches < 2)
        throw ValidationError("batch means need at least two batches");
    return static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(batches)));
}

std::size_t batch_of(std::size_t i, std::size_t n, int batches)
{
    return i * static_cast<std::size_t>(batches) / n;
}

double mean_se(const std::vector<double>& v)
{
    const auto n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= n;
    double var = 0.0;
    for (double x : v)
        var += (x - m) * (x - m);
    return std::sqrt(var / (n - 1.0) / n);
}

double shell_volume(int d, double r0, double r1)
{
    return ball_volume(d, r1) - ball_volume(d, r0);
}

double sphere_measure(int d, double r)
{
    switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi * r;
    default: return 4.0 * std::numbers::pi * r * r;
    }
}

}  // namespace

DensityEstimate estimate_density(const std::vector<Configuration>& configs, int batches)
{
    if (configs.size() < 2)
        throw ValidationError("density estimate needs at least two configurations");
    const int B = batch_count(configs.size(), batches);
    std::vector<double> sum(B, 0.0), count(B, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const double r = static_cast<double>(configs[i].size()) / configs[i].volume();
        const auto b = batch_of(i, configs.size(), B);
        sum[b] += r;
        count[b] += 1.0;
        total += r;
    }
    DensityEstimate est;
    est.n_configs = configs.size();
    est.rho = total / static_cast<double>(configs.size());
    for (int b = 0; b < B; ++b)
        est.batch_rho.push_back(sum[b] / count[b]);
    est.se = mean_se(est.batch_rho);
    return est;
}

PcfEstimate estimate_pcf(const std::vector<Configuration>& configs, int bins, double r_max, int batches)
{
    if (configs.size() < 2)
        throw ValidationError("pair-correlation estimate needs at least two configurations");
    if (bins < 1 || !(r_max > 0.0))
        throw ValidationError("pair-correlation estimate needs bins >= 1 and r_max > 0");
    const double L = configs.front().L;
    const int d = configs.front().d;
    for (const auto& c : configs)
        if (c.L != L || c.d != d)
            throw ValidationError("configurations must share the box");
    if (r_max > L / 2)
        throw ValidationError("r_max must not exceed L/2 under the minimum-image convention");
    const auto density = estimate_density(configs, batches);
    if (!(density.rho > 0.0))
        throw DegenerateDensityError("no points: the pair correlation is undefined");

    const int B = batch_count(configs.size(), batches);
    const double width = r_max / bins;
    PcfEstimate est;
    est.r_max = r_max;
    est.rho_hat = density.rho;
    est.dimension = d;
    est.n_configs = configs.size();
    for (int b = 0; b <= bins; ++b)
        est.edges.push_back(b * width);
    est.counts.assign(bins, 0.0);
    std::vector<std::vector<double>> batch_counts(B, std::vector<double>(bins, 0.0));
    std::vector<double> batch_n(B, 0.0);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& pts = configs[i].points;
        const auto b = batch_of(i, configs.size(), B);
        batch_n[b] += 1.0;
        for (std::size_t p = 0; p < pts.size(); ++p)
            for (std::size_t q = p + 1; q < pts.size(); ++q) {
                const double r = periodic_distance(pts[p], pts[q], L, d);
                if (r >= r_max)
                    continue;
                const auto bin = std::min(bins - 1, static_cast<int>(r / width));
                batch_counts[b][bin] += 2.0;
            }
    }
    const double V = configs.front().volume();
    const double norm = density.rho * density.rho * V;
    est.g.assign(bins, 0.0);
    est.batch_g.assign(B, std::vector<double>(bins, 0.0));
    for (int bin = 0; bin < bins; ++bin) {
        const double shell = shell_volume(d, est.edges[bin], est.edges[bin + 1]);
        for (int b = 0; b < B; ++b) {
            est.counts[bin] += batch_counts[b][bin];
            est.batch_g[b][bin] = batch_counts[b][bin] / (batch_n[b] * norm * shell);
        }
        est.g[bin] = est.counts[bin] / (static_cast<double>(configs.size()) * norm * shell);
    }
    est.se.assign(bins, 0.0);
    for (int bin = 0; bin < bins; ++bin) {
        std::vector<double> col;
        for (int b = 0; b < B; ++b)
            col.push_back(est.batch_g[b][bin]);
        est.se[bin] = mean_se(col);
    }
    return est;
}

PcfInterpolant::PcfInterpolant(std::vector<double> e, std::vector<double> v, double rm, bool hc)
    : edges(std::move(e)), values(std::move(v)), r_max(rm), hard_core(hc)
{
    if (values.empty() || edges.size() != values.size() + 1)
        throw ValidationError("interpolant needs bins + 1 edges");
    for (double g : values)
        if (g < 0.0 || !std::isfinite(g))
            throw NumericalGuardError("negative or non-finite pair-correlation estimate");
    first_nonzero = 0;
    if (hard_core)
        while (first_nonzero < values.size() && values[first_nonzero] == 0.0)
            ++first_nonzero;
}

double PcfInterpolant::operator()(double r) const
{
    if (r >= r_max)
        return 1.0;
    const std::size_t nb = values.size();
    const double width = edges[1] - edges[0];
    const double mid0 = 0.5 * width;
    std::size_t lo = 0;
    if (hard_core) {
        if (first_nonzero == nb || r < edges[first_nonzero])
            return first_nonzero == nb ? 1.0 : 0.0;
        lo = first_nonzero;
    }
    const double mid_lo = edges[lo] + mid0;
    if (r <= mid_lo)
        return values[lo];
    const double last_mid = edges[nb - 1] + mid0;
    if (r >= last_mid) {
        const double t = (r - last_mid) / (r_max - last_mid);
        return values[nb - 1] + t * (1.0 - values[nb - 1]);
    }
    const auto i = std::min(nb - 2, static_cast<std::size_t>((r - mid0) / width));
    const double t = (r - (edges[i] + mid0)) / width;
    return values[i] + t * (values[i + 1] - values[i]);
}

namespace {

PairFunction pair_from_interpolant(const PcfInterpolant& g, int d, double hard_core)
{
    PairFunction pf;
    pf.name = "empirical";
    pf.dimension = d;
    pf.radial = [g](double r) { return g(r); };
    pf.hard_core = hard_core;
    const int n = 20000;
    const double h = g.r_max / n;
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) * h;
        c += std::abs(g(r) - 1.0) * sphere_measure(d, r) * h;
    }
    pf.C_g = c;
    pf.b = std::max(1.0, *std::max_element(g.values.begin(), g.values.end()));
    return pf;
}

}  // namespace

PairFunction EmpiricalFamily::pair_function() const
{
    return pair_from_interpolant(g_hat, pcf.dimension, hard_core);
}

PairFunction EmpiricalFamily::batch_pair_function(std::size_t batch) const
{
    const PcfInterpolant gb(pcf.edges, pcf.batch_g.at(batch), pcf.r_max, hard_core > 0.0);
    return pair_from_interpolant(gb, pcf.dimension, hard_core);
}

CorrelationFamily EmpiricalFamily::family() const
{
    auto fam = kirkwood_family(rho_hat, pair_function(), closure_order);
    fam.label = "empirical";
    return fam;
}

EmpiricalFamily make_empirical_family(const DensityEstimate& density, const PcfEstimate& pcf, double hard_core,
                                      int closure_order)
{
    if (closure_order < 2)
        throw ValidationError("closure order must be at least 2");
    EmpiricalFamily fam;
    fam.rho_hat = density.rho;
    fam.se_rho = density.se;
    fam.pcf = pcf;
    fam.hard_core = hard_core;
    fam.closure_order = closure_order;
    fam.n_configs = density.n_configs;
    fam.g_hat = PcfInterpolant(pcf.edges, pcf.g, pcf.r_max, hard_core > 0.0);
    return fam;
}

EmpiricalDiagnostics diagnostics(const EmpiricalFamily& fam, int n_orders, double R, const IntegrationOptions& options,
                                 int n_probes)
{
    if (fam.closure_order < n_orders + 1)
        throw ValidationError("diagnostics need closure order >= N + 1");
    const auto pf = fam.pair_function();
    const auto closed = kirkwood_family(fam.rho_hat, pf, fam.closure_order);
    EmpiricalDiagnostics out;
    out.fit = assumption_b_diagnostic(truncate(closed), n_orders, R, options_for(pf, options), n_probes);
    out.xi_hat = ruelle_xi(closed, n_orders + 1, fam.pcf.r_max);
    return out;
}

MuHatReport mu_hat(const EmpiricalFamily& fam, const MuHatOptions& opt)
{
    if (opt.K < 0 || opt.K > 2)
        throw ValidationError("mu-hat supports K <= 2");
    if (!(fam.rho_hat > 0.0))
        throw DegenerateDensityError("rho-hat = 0: log rho is undefined");
    MuHatReport rep;
    rep.rho_hat = fam.rho_hat;
    rep.se_rho = fam.se_rho;
    if (opt.R > fam.pcf.r_max) {
        rep.cutoff_warning = true;
        std::ostringstream msg;
        msg << "g-hat is only estimated up to r_max = " << fam.pcf.r_max << "; taken as 1 out to R = " << opt.R;
        warn(msg.str());
    }
    const auto g = fam.pair_function();
    const auto integ_opts = options_for(g, opt.integration);
    const double rho = fam.rho_hat;
    const int d = fam.pcf.dimension;

    const auto tilde = tilde_family(truncate(kirkwood_family(rho, g, std::max(opt.K + 1, 2))));
    rep.expansion = mu_expansion(tilde, opt.K, opt.R, integ_opts);

    const auto integ = make_integrator(integ_opts, Domain::cube_of_radius(d, opt.R));
    auto k1_of = [&](const PairFunction& gf) {
        return -rho * integ->integrate([&](PointSpan y) { return gf.mayer(y[0]); }, 1).value;
    };
    if (opt.K >= 1)
        rep.k1_direct = k1_of(g);

    // Error bars from the spread of the terms over g-hat batches.
    IntegrationOptions coarse = integ_opts;
    coarse.eval_budget = std::min(coarse.eval_budget, opt.batch_budget);
    coarse.nodes = 0;
    const auto coarse_integ = make_integrator(coarse, Domain::cube_of_radius(d, opt.R));
    const std::size_t B = fam.pcf.batch_g.size();
    std::vector<std::vector<double>> batch_terms(opt.K, std::vector<double>(B, 0.0));
    std::vector<double> batch_sum(B, 0.0);
    for (std::size_t b = 0; b < B && opt.K >= 1; ++b) {
        const auto gb = fam.batch_pair_function(b);
        batch_terms[0][b] = k1_of(gb);
        if (opt.K >= 2) {
            const auto tb = tilde_closed_form(rho, gb, 3, false);
            batch_terms[1][b] =
                0.5 * coarse_integ->integrate([&](PointSpan y) { return tb(Point::Zero(), y); }, 2).value;
        }
        for (int k = 0; k < opt.K; ++k)
            batch_sum[b] += batch_terms[k][b];
    }
    double weighted = 1.0;
    for (int k = 0; k < opt.K; ++k) {
        rep.expansion.std_errs[k] = B >= 2 ? mean_se(batch_terms[k]) : 0.0;
        weighted += (k + 1) * rep.expansion.terms[k];
    }
    const double se_terms = (B >= 2 && opt.K >= 1) ? mean_se(batch_sum) : 0.0;
    const double dmu_drho = weighted / rho;
    rep.mu_hat = rep.expansion.value();
    rep.se_mu = std::hypot(dmu_drho * fam.se_rho, se_terms);
    rep.truncation_err = opt.K >= 1 ? std::abs(rep.expansion.terms.back()) : 0.0;

    if (opt.diagnostics && opt.K >= 1) {
        const auto diag = diagnostics(fam, opt.diagnostic_orders, opt.R, coarse, opt.diagnostic_probes);
        rep.diagnostics = diag.fit;
        rep.expansion.diagnostics = diag.fit;
        rep.xi_hat = diag.xi_hat;
    }
    return rep;
}

std::vector<Configuration> poisson_configurations(double rho, double L, int d, std::size_t n, std::uint64_t seed)
{
    if (!(rho >= 0.0) || !(L > 0.0) || d < 1 || d > 3)
        throw ValidationError("Poisson configurations need rho >= 0, L > 0, d in {1,2,3}");
    PhiloxStream rng(seed);
    std::vector<Configuration> out;
    const double mean = rho * std::pow(L, d);
    for (std::size_t i = 0; i < n; ++i) {
        Configuration c;
        c.L = L;
        c.d = d;
        std::poisson_distribution<int> count(mean);
        const int N = mean > 0.0 ? count(rng) : 0;
        for (int k = 0; k < N; ++k) {
            Point p = Point::Zero();
            for (int a = 0; a < d; ++a)
                p[a] = rng.uniform() * L;
            c.points.push_back(p);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace icx
