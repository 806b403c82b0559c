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

#include "icx/correlation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "icx/combinatorics.hpp"
#include "icx/partition.hpp"
#include "icx/rng.hpp"

namespace icx {

namespace {

void gather(PointSpan x, std::uint32_t mask, std::vector<Point>& out)
{
    out.clear();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (mask & (1u << i))
            out.push_back(x[i]);
}

void check_order(int n, int max_order)
{
    if (n > max_order)
        throw SizeLimitError("order " + std::to_string(n) + " exceeds the family's maximum order " +
                             std::to_string(max_order));
}

double inverse_factorial(int k)
{
    return 1.0 / std::tgamma(k + 1.0);
}

Point random_point(PhiloxStream& rng, int d, double half_width, const Point& center = Point::Zero())
{
    Point p = center;
    for (int a = 0; a < d; ++a)
        p[a] += rng.uniform(-half_width, half_width);
    return p;
}

}  // namespace

double CorrelationFamily::operator()(PointSpan x) const
{
    if (x.empty())
        return 1.0;
    check_order(static_cast<int>(x.size()), max_order);
    return kernel(x);
}

double CorrelationFamily::rho1(const Point& x) const
{
    return kernel(PointSpan(&x, 1));
}

void CorrelationFamily::validate() const
{
    if (max_order < 1)
        throw ValidationError("correlation family needs max_order >= 1");
    if (max_order > kMaxFamilyOrder)
        throw SizeLimitError("correlation family order exceeds the partition cap");
    if (dimension < 1 || dimension > 3)
        throw ValidationError("dimension must be 1, 2 or 3");
    if (!kernel)
        throw ValidationError("correlation family has no kernel");
}

CorrelationFamily poisson_family(double rho, int max_order, int d)
{
    if (!(rho >= 0.0))
        throw ValidationError("density must be non-negative");
    CorrelationFamily fam;
    fam.max_order = max_order;
    fam.dimension = d;
    fam.translation_invariant = true;
    fam.density = rho;
    fam.xi = rho;
    fam.label = "poisson";
    fam.kernel = [rho](PointSpan x) {
        double v = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            v *= rho;
        return v;
    };
    fam.validate();
    return fam;
}

CorrelationFamily random_smooth_family(int max_order, std::uint64_t seed, int d)
{
    PhiloxStream rng(seed, 0x5eed);
    const double a = rng.uniform(-0.5, 0.5);
    const double wave = rng.uniform(0.5, 1.5);
    std::vector<double> c(max_order + 1), b(max_order + 1);
    for (int n = 1; n <= max_order; ++n) {
        c[n] = rng.uniform(0.5, 1.5);
        b[n] = rng.uniform(-0.5, 0.5);
    }
    CorrelationFamily fam;
    fam.max_order = max_order;
    fam.dimension = d;
    fam.label = "random-smooth";
    fam.kernel = [a, wave, c, b](PointSpan x) {
        const std::size_t n = x.size();
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e += a * std::cos(wave * x[i].sum());
            for (std::size_t j = i + 1; j < n; ++j)
                e += b[n] * std::cos((x[i] - x[j]).norm());
        }
        return c[n] * std::exp(e);
    };
    fam.validate();
    return fam;
}

TruncatedFamily::TruncatedFamily(int max_order, int dimension, SubsetKernel subsets, bool translation_invariant,
                                 double density)
    : max_order_(max_order),
      dimension_(dimension),
      subsets_(std::move(subsets)),
      translation_invariant_(translation_invariant),
      density_(density)
{
    if (max_order_ < 1 || max_order_ > kMaxFamilyOrder)
        throw SizeLimitError("truncated family order outside [1, 8]");
}

TruncatedFamily TruncatedFamily::from_kernel(int max_order, int dimension, TupleFunction kernel,
                                             bool translation_invariant, double density)
{
    auto subsets = [kernel = std::move(kernel)](PointSpan x) {
        const std::uint32_t full = 1u << x.size();
        std::vector<double> out(full);
        out[0] = 1.0;
        std::vector<Point> sub;
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            gather(x, mask, sub);
            out[mask] = kernel(sub);
        }
        return out;
    };
    return TruncatedFamily(max_order, dimension, std::move(subsets), translation_invariant, density);
}

double TruncatedFamily::operator()(PointSpan x) const
{
    if (x.empty())
        return 1.0;
    return on_subsets(x).back();
}

std::vector<double> TruncatedFamily::on_subsets(PointSpan x) const
{
    check_order(static_cast<int>(x.size()), max_order_);
    return subsets_(x);
}

TruncatedFamily truncate(const CorrelationFamily& rho)
{
    rho.validate();
    auto subsets = [rho](PointSpan x) {
        const int m = static_cast<int>(x.size());
        const std::uint32_t full = 1u << m;
        std::vector<double> base(full);
        base[0] = 1.0;
        std::vector<Point> sub;
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            gather(x, mask, sub);
            base[mask] = rho.kernel(sub);
        }
        return partition_inverse_on_subsets<double>(m, base);
    };
    return TruncatedFamily(rho.max_order, rho.dimension, std::move(subsets), rho.translation_invariant,
                           rho.density);
}

CorrelationFamily untruncate(const TruncatedFamily& rhoT)
{
    CorrelationFamily fam;
    fam.max_order = rhoT.max_order();
    fam.dimension = rhoT.dimension();
    fam.translation_invariant = rhoT.translation_invariant();
    fam.density = rhoT.density();
    fam.label = "untruncated";
    fam.kernel = [rhoT](PointSpan x) {
        const int m = static_cast<int>(x.size());
        return partition_sums_on_subsets<double>(m, rhoT.on_subsets(x)).back();
    };
    fam.validate();
    return fam;
}

RootedFamily::RootedFamily(int max_order, int dimension, RootedKernel subsets, bool translation_invariant,
                           double density)
    : max_order_(max_order),
      dimension_(dimension),
      subsets_(std::move(subsets)),
      translation_invariant_(translation_invariant),
      density_(density)
{
}

double RootedFamily::operator()(const Point& x, PointSpan y) const
{
    return on_subsets(x, y).back();
}

std::vector<double> RootedFamily::on_subsets(const Point& x, PointSpan y) const
{
    check_order(static_cast<int>(y.size()), max_order_);
    return subsets_(x, y);
}

RootedFamily f_family(const CorrelationFamily& rho)
{
    rho.validate();
    if (rho.max_order < 2)
        throw ValidationError("the F family needs max_order >= 2");
    auto subsets = [rho](const Point& x, PointSpan y) {
        const int m = static_cast<int>(y.size());
        const double r1 = rho.rho1(x);
        if (r1 == 0.0)
            throw DegenerateDensityError("rho(x) = 0: the F family is undefined");
        const std::uint32_t full = 1u << m;
        std::vector<double> base(full);
        base[0] = 1.0;
        std::vector<Point> sub;
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            gather(y, mask, sub);
            sub.insert(sub.begin(), x);
            base[mask] = rho.kernel(sub) / r1;
        }
        return partition_inverse_on_subsets<double>(m, base);
    };
    return RootedFamily(rho.max_order - 1, rho.dimension, std::move(subsets), rho.translation_invariant, rho.density);
}

RootedFamily tilde_family(const TruncatedFamily& rhoT)
{
    if (rhoT.max_order() < 2)
        throw ValidationError("the tilde family needs max_order >= 2");
    auto subsets = [rhoT](const Point& x, PointSpan y) {
        const int m = static_cast<int>(y.size());
        std::vector<Point> tuple;
        tuple.reserve(m + 1);
        tuple.push_back(x);
        tuple.insert(tuple.end(), y.begin(), y.end());
        const auto vals = rhoT.on_subsets(tuple);
        const double r1 = vals[1];
        if (r1 == 0.0)
            throw DegenerateDensityError("rho(x) = 0: the tilde family is undefined");
        const std::uint32_t full = 1u << m;
        std::vector<double> base(full);
        base[0] = 1.0;
        for (std::uint32_t mask = 1; mask < full; ++mask)
            base[mask] = vals[(mask << 1) | 1u] / r1;
        return partition_inverse_on_subsets<double>(m, base);
    };
    return RootedFamily(rhoT.max_order() - 1, rhoT.dimension(), std::move(subsets), rhoT.translation_invariant(),
                        rhoT.density());
}

double SplitReport::worst() const
{
    return max_residual.empty() ? 0.0 : *std::max_element(max_residual.begin(), max_residual.end());
}

SplitReport split_check(const CorrelationFamily& rho, int n_probes, std::uint64_t seed, double half_width)
{
    const auto F = f_family(rho);
    const auto rhoT = truncate(rho);
    const auto tilde = tilde_family(rhoT);
    SplitReport report;
    PhiloxStream rng(seed, 0x5b11);
    for (int k = 1; k < rho.max_order; ++k) {
        double worst = 0.0;
        for (int p = 0; p < n_probes; ++p) {
            const Point x = random_point(rng, rho.dimension, half_width);
            std::vector<Point> y(k);
            for (auto& yi : y)
                yi = random_point(rng, rho.dimension, half_width);
            const double f = F(x, y);
            const double t = rhoT(y);
            const double r = tilde(x, y);
            const double scale = std::max({std::abs(f), std::abs(t), std::abs(r), 1e-300});
            worst = std::max(worst, std::abs(f - t - r) / scale);
        }
        report.max_residual.push_back(worst);
    }
    return report;
}

void ExpansionReport::push(double term, double std_err)
{
    terms.push_back(term);
    std_errs.push_back(std_err);
    partial_sums.push_back((partial_sums.empty() ? base : partial_sums.back()) + term);
}

ExpansionReport janossy(const CorrelationFamily& rho, const Integrator& integrator, PointSpan x, int K)
{
    const int n = static_cast<int>(x.size());
    if (K < 0)
        throw ValidationError("truncation order must be non-negative");
    check_order(n + K, rho.max_order);
    ExpansionReport report;
    report.base = rho(x);
    const std::vector<Point> fixed(x.begin(), x.end());
    for (int k = 1; k <= K; ++k) {
        auto f = [&](PointSpan y) {
            std::vector<Point> all(fixed);
            all.insert(all.end(), y.begin(), y.end());
            return rho.kernel(all);
        };
        const auto est = integrator.integrate(f, k);
        const double c = (k % 2 ? -1.0 : 1.0) * inverse_factorial(k);
        report.push(c * est.value, std::abs(c) * est.std_err);
    }
    return report;
}

ExpansionReport log_j0(const TruncatedFamily& rhoT, const Integrator& integrator, int K)
{
    if (K < 0)
        throw ValidationError("truncation order must be non-negative");
    check_order(K, rhoT.max_order());
    ExpansionReport report;
    for (int k = 1; k <= K; ++k) {
        const auto est = integrator.integrate([&](PointSpan y) { return rhoT(y); }, k);
        const double c = (k % 2 ? -1.0 : 1.0) * inverse_factorial(k);
        report.push(c * est.value, std::abs(c) * est.std_err);
    }
    return report;
}

namespace {

bool radius_converged(double at_r, double at_half)
{
    return std::abs(at_r - at_half) <= kRadiusTolerance * std::abs(at_r) + 1e-300;
}

}  // namespace

ExpansionReport mu_expansion(const RootedFamily& tilde, int K, double R, const IntegrationOptions& options,
                             const Point& probe)
{
    if (!tilde.translation_invariant())
        throw UnsupportedError("the mu expansion is only defined for translation-invariant families");
    if (K < 0)
        throw ValidationError("truncation order must be non-negative");
    if (!(R > 0.0))
        throw ValidationError("cutoff radius must be positive");
    check_order(K, tilde.max_order());
    if (!(tilde.density() > 0.0))
        throw DegenerateDensityError("rho = 0: log rho is undefined");
    ExpansionReport report;
    report.base = std::log(tilde.density());
    report.radius = R;
    const int d = tilde.dimension();
    const auto full = make_integrator(options, Domain::cube_of_radius(d, R, probe));
    const auto half = make_integrator(options, Domain::cube_of_radius(d, R / 2, probe));
    for (int k = 1; k <= K; ++k) {
        auto f = [&](PointSpan y) { return tilde(probe, y); };
        const auto est = full->integrate(f, k);
        const auto est_half = half->integrate(f, k);
        const double c = (k % 2 ? -1.0 : 1.0) * inverse_factorial(k);
        report.push(c * est.value, std::abs(c) * est.std_err);
        report.r_halved_terms.push_back(c * est_half.value);
        report.r_converged.push_back(radius_converged(report.terms.back(), report.r_halved_terms.back()));
    }
    return report;
}

ExpansionReport pressure_expansion(const TruncatedFamily& rhoT, int K, double R, const IntegrationOptions& options)
{
    if (!rhoT.translation_invariant())
        throw UnsupportedError("the pressure formula needs a translation-invariant family");
    if (K < 0)
        throw ValidationError("truncation order must be non-negative");
    check_order(K + 1, rhoT.max_order());
    ExpansionReport report;
    report.base = rhoT.density();
    report.radius = R;
    const Point origin = Point::Zero();
    const int d = rhoT.dimension();
    const auto full = make_integrator(options, Domain::cube_of_radius(d, R));
    const auto half = make_integrator(options, Domain::cube_of_radius(d, R / 2));
    for (int k = 1; k <= K; ++k) {
        auto f = [&](PointSpan y) {
            std::vector<Point> all{origin};
            all.insert(all.end(), y.begin(), y.end());
            return rhoT(all);
        };
        const auto est = full->integrate(f, k);
        const auto est_half = half->integrate(f, k);
        const double c = (k % 2 ? 1.0 : -1.0) * -inverse_factorial(k + 1);
        report.push(c * est.value, std::abs(c) * est.std_err);
        report.r_halved_terms.push_back(c * est_half.value);
        report.r_converged.push_back(radius_converged(report.terms.back(), report.r_halved_terms.back()));
    }
    return report;
}

AssumptionBFit fit_assumption_b(const std::vector<double>& integrals)
{
    std::vector<int> usable;
    for (std::size_t i = 0; i < integrals.size(); ++i) {
        if (!std::isfinite(integrals[i]) || integrals[i] < 0.0)
            throw NumericalGuardError("Assumption-B integrals must be finite and non-negative");
        if (integrals[i] > 0.0)
            usable.push_back(static_cast<int>(i) + 1);
    }
    AssumptionBFit fit;
    fit.integrals = integrals;
    if (usable.empty()) {
        fit.D = 0.0;
        fit.q = 0.0;
        fit.q0 = ConvergenceConstants::q0_for(0.0);
        fit.convergent = true;
        return fit;
    }
    if (usable.size() < 2)
        throw ValidationError("Assumption-B fit undetermined: fewer than two non-zero orders");
    Eigen::MatrixXd A(usable.size(), 2);
    Eigen::VectorXd b(usable.size());
    for (std::size_t r = 0; r < usable.size(); ++r) {
        const int n = usable[r];
        A(r, 0) = 1.0;
        A(r, 1) = n;
        b(r) = std::log(integrals[n - 1]) - std::lgamma(n + 1.0);
    }
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
    fit.D = std::exp(coef(0));
    fit.q = std::exp(coef(1));
    fit.q0 = ConvergenceConstants::q0_for(fit.D);
    fit.convergent = fit.q < fit.q0;
    return fit;
}

AssumptionBFit assumption_b_diagnostic(const TruncatedFamily& rhoT, int N, double R, const IntegrationOptions& options,
                                       int n_probes, std::uint64_t seed)
{
    if (N < 1)
        throw ValidationError("Assumption-B diagnostic needs N >= 1");
    if (N > rhoT.max_order() - 1)
        throw ValidationError("Assumption-B diagnostic needs N <= K - 1");
    const int d = rhoT.dimension();
    std::vector<Point> probes{Point::Zero()};
    PhiloxStream rng(seed, 0xd1a6);
    for (int p = 0; p < n_probes; ++p)
        probes.push_back(random_point(rng, d, R / 4));
    std::vector<double> integrals(N, 0.0);
    for (const auto& x : probes) {
        const double r1 = rhoT(PointSpan(&x, 1));
        if (r1 == 0.0)
            throw DegenerateDensityError("rho(x) = 0 at a probe point");
        const auto integ = make_integrator(options, Domain::cube_of_radius(d, R, x));
        for (int n = 1; n <= N; ++n) {
            auto f = [&](PointSpan y) {
                std::vector<Point> all{x};
                all.insert(all.end(), y.begin(), y.end());
                return std::abs(rhoT(all)) / r1;
            };
            integrals[n - 1] = std::max(integrals[n - 1], integ->integrate(f, n).value);
        }
    }
    auto fit = fit_assumption_b(integrals);
    fit.probes = probes;
    return fit;
}

double ruelle_xi(const CorrelationFamily& rho, int N, double half_width, int n_probes, std::uint64_t seed)
{
    check_order(N, rho.max_order);
    PhiloxStream rng(seed, 0x8e11e);
    double xi = 0.0;
    for (int n = 1; n <= N; ++n) {
        for (int p = 0; p < n_probes; ++p) {
            std::vector<Point> x(n);
            for (auto& xi_pt : x)
                xi_pt = random_point(rng, rho.dimension, half_width);
            const double v = rho(x);
            if (v < 0.0)
                throw NumericalGuardError("negative correlation value");
            xi = std::max(xi, std::pow(v, 1.0 / n));
        }
    }
    return xi;
}

}  // namespace icx
