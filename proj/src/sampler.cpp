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

#include "icx/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace icx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap(double x, double L)
{
    double w = x - L * std::floor(x / L);
    return w >= L ? 0.0 : w;
}

Point uniform_in_box(PhiloxStream& rng, double L, int d)
{
    Point p = Point::Zero();
    for (int a = 0; a < d; ++a)
        p[a] = rng.uniform() * L;
    return p;
}

Point uniform_in_ball(PhiloxStream& rng, double radius, int d)
{
    Point v = Point::Zero();
    do {
        for (int a = 0; a < d; ++a)
            v[a] = rng.uniform(-radius, radius);
    } while (v.squaredNorm() > radius * radius);
    return v;
}

double default_step_radius(const PairPotential& u, double L)
{
    return u.sigma > 0.0 ? u.sigma : L / 20.0;
}

/// Shared move logic; `delta(p, skip)` sums u between p and every point but
/// `skip`, and the hooks keep auxiliary structures in step with `c`.
template <class Delta, class Insert, class Remove, class Move>
MoveResult do_move(Configuration& c, MoveKind kind, double z, double step_radius, PhiloxStream& rng, Delta&& delta,
                   Insert&& on_insert, Remove&& on_remove, Move&& on_move)
{
    MoveResult res{kind, false};
    const double V = c.volume();
    const auto N = static_cast<double>(c.size());
    double ratio = 0.0;
    switch (kind) {
    case MoveKind::birth: {
        const Point p = uniform_in_box(rng, c.L, c.d);
        const double dE = delta(p, -1);
        ratio = z * V / (N + 1.0) * std::exp(-dE);
        if (ratio > 0.0 && rng.uniform() < ratio) {
            c.points.push_back(p);
            on_insert(c.points.size() - 1, p);
            res.accepted = true;
        }
        break;
    }
    case MoveKind::death: {
        if (c.points.empty())
            return res;
        const auto i = static_cast<std::ptrdiff_t>(rng.below(c.size()));
        const double dE = -delta(c.points[i], i);
        ratio = N / (z * V) * std::exp(-dE);
        if (rng.uniform() < ratio) {
            on_remove(static_cast<std::size_t>(i));
            c.points[i] = c.points.back();
            c.points.pop_back();
            res.accepted = true;
        }
        break;
    }
    case MoveKind::translate: {
        if (c.points.empty())
            return res;
        const auto i = static_cast<std::ptrdiff_t>(rng.below(c.size()));
        const Point v = uniform_in_ball(rng, step_radius, c.d);
        Point p = c.points[i];
        for (int a = 0; a < c.d; ++a)
            p[a] = wrap(p[a] + v[a], c.L);
        const double e_new = delta(p, i);
        if (e_new == kInf)
            return res;
        const double dE = e_new - delta(c.points[i], i);
        ratio = std::exp(-dE);
        if (rng.uniform() < ratio) {
            on_move(static_cast<std::size_t>(i), p);
            c.points[i] = p;
            res.accepted = true;
        }
        break;
    }
    }
    return res;
}

MoveKind draw_kind(PhiloxStream& rng)
{
    return static_cast<MoveKind>(rng.below(3));
}

}  // namespace

double PairPotential::operator()(double r) const
{
    if (r < sigma)
        return kInf;
    if (tail && r < cutoff)
        return tail(r);
    return 0.0;
}

PairPotential ideal_potential()
{
    return {};
}

PairPotential hard_core_potential(double sigma)
{
    if (!(sigma > 0.0))
        throw ValidationError("hard-core diameter must be positive");
    PairPotential u;
    u.name = "hard-core";
    u.sigma = sigma;
    u.cutoff = sigma;
    return u;
}

PairPotential square_shoulder_potential(double sigma, double epsilon, double cutoff)
{
    if (!(sigma >= 0.0) || !(cutoff > sigma) || !(epsilon >= 0.0))
        throw ValidationError("square shoulder needs 0 <= sigma < cutoff and epsilon >= 0");
    PairPotential u;
    u.name = "square-shoulder";
    u.sigma = sigma;
    u.cutoff = cutoff;
    u.tail = [epsilon](double) { return epsilon; };
    return u;
}

double Configuration::volume() const
{
    return std::pow(L, d);
}

void Configuration::validate() const
{
    if (!(L > 0.0) || d < 1 || d > 3)
        throw ValidationError("configuration needs L > 0 and d in {1,2,3}");
    for (const auto& p : points)
        for (int a = 0; a < 3; ++a) {
            const bool ok = a < d ? (p[a] >= 0.0 && p[a] < L) : p[a] == 0.0;
            if (!ok)
                throw ValidationError("configuration point outside [0, L)^d");
        }
}

double periodic_distance(const Point& a, const Point& b, double L, int d)
{
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        double dx = a[k] - b[k];
        dx -= L * std::round(dx / L);
        s += dx * dx;
    }
    return std::sqrt(s);
}

bool satisfies_hard_core(const Configuration& c, double sigma)
{
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (periodic_distance(c.points[i], c.points[j], c.L, c.d) < sigma)
                return false;
    return true;
}

MoveResult apply_move(Configuration& c, MoveKind kind, double z, const PairPotential& u, PhiloxStream& rng)
{
    auto delta = [&](const Point& p, std::ptrdiff_t skip) {
        double e = 0.0;
        if (u.range() <= 0.0)
            return e;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) == skip)
                continue;
            const double v = u(periodic_distance(p, c.points[j], c.L, c.d));
            if (v == kInf)
                return kInf;
            e += v;
        }
        return e;
    };
    auto none = [](auto&&...) {};
    return do_move(c, kind, z, default_step_radius(u, c.L), rng, delta, none, none, none);
}

MoveResult gcmc_step(Configuration& c, double z, const PairPotential& u, PhiloxStream& rng)
{
    return apply_move(c, draw_kind(rng), z, u, rng);
}

double integrated_autocorrelation_time(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    if (n < 2)
        return 1.0;
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x)
        c0 += (v - mean) * (v - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0)
        return 1.0;
    double tau = 1.0;
    for (std::size_t t = 1; t < n / 2; ++t) {
        double ct = 0.0;
        for (std::size_t i = 0; i + t < n; ++i)
            ct += (x[i] - mean) * (x[i + t] - mean);
        ct /= static_cast<double>(n);
        tau += 2.0 * ct / c0;
        if (static_cast<double>(t) >= 5.0 * tau)
            break;
    }
    return std::max(tau, 1.0);
}

double ChainStats::acceptance_rate(MoveKind k) const
{
    const auto i = static_cast<std::size_t>(k);
    return attempts[i] ? static_cast<double>(accepts[i]) / static_cast<double>(attempts[i]) : 0.0;
}

void ChainSettings::validate() const
{
    if (!(z > 0.0))
        throw ValidationError("activity z must be positive");
    if (!(L > 0.0) || d < 1 || d > 3)
        throw ValidationError("box needs L > 0 and d in {1,2,3}");
    if (sweeps <= burn_in || burn_in < 0)
        throw ValidationError("need sweeps > burn_in >= 0");
    if (thin < 1)
        throw ValidationError("thinning must be >= 1");
    if (potential.sigma < 0.0 || potential.cutoff < 0.0)
        throw ValidationError("potential radii must be non-negative");
    if (potential.range() >= L / 2)
        throw ValidationError("interaction range must be below L/2 for the minimum-image convention");
}

/// Linked cells of side >= the interaction range, with >= 3 cells per axis.
class GcmcChain::Cells {
  public:
    Cells(double L, int d, double range) : L_(L), d_(d)
    {
        per_axis_ = range > 0.0 ? static_cast<int>(std::floor(L / range)) : 0;
        enabled_ = per_axis_ >= 3;
        if (!enabled_)
            return;
        side_ = L / per_axis_;
        std::size_t total = 1;
        for (int a = 0; a < d; ++a)
            total *= static_cast<std::size_t>(per_axis_);
        cells_.resize(total);
    }

    bool enabled() const { return enabled_; }

    void insert(std::size_t idx, const Point& p)
    {
        const int c = cell_of(p);
        cells_[c].push_back(static_cast<int>(idx));
        if (owner_.size() <= idx)
            owner_.resize(idx + 1);
        owner_[idx] = c;
    }

    /// Mirrors the swap-with-last removal of the configuration.
    void remove(std::size_t idx)
    {
        erase(owner_[idx], static_cast<int>(idx));
        const std::size_t last = owner_.size() - 1;
        if (idx != last) {
            auto& cell = cells_[owner_[last]];
            std::replace(cell.begin(), cell.end(), static_cast<int>(last), static_cast<int>(idx));
            owner_[idx] = owner_[last];
        }
        owner_.pop_back();
    }

    void move(std::size_t idx, const Point& p)
    {
        const int c = cell_of(p);
        if (c == owner_[idx])
            return;
        erase(owner_[idx], static_cast<int>(idx));
        cells_[c].push_back(static_cast<int>(idx));
        owner_[idx] = c;
    }

    template <class Fn>
    bool for_each_neighbour(const Point& p, Fn&& fn) const
    {
        std::array<int, 3> base{0, 0, 0};
        for (int a = 0; a < d_; ++a)
            base[a] = axis_cell(p[a]);
        const int span_y = d_ >= 2 ? 1 : 0, span_z = d_ >= 3 ? 1 : 0;
        for (int dz = -span_z; dz <= span_z; ++dz)
            for (int dy = -span_y; dy <= span_y; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const std::array<int, 3> off{dx, dy, dz};
                    int index = 0;
                    for (int a = d_ - 1; a >= 0; --a) {
                        const int ca = (base[a] + off[a] + per_axis_) % per_axis_;
                        index = index * per_axis_ + ca;
                    }
                    for (int j : cells_[index])
                        if (!fn(j))
                            return false;
                }
        return true;
    }

  private:
    int axis_cell(double x) const { return std::min(per_axis_ - 1, static_cast<int>(x / side_)); }

    int cell_of(const Point& p) const
    {
        int index = 0;
        for (int a = d_ - 1; a >= 0; --a)
            index = index * per_axis_ + axis_cell(p[a]);
        return index;
    }

    void erase(int cell, int idx)
    {
        auto& v = cells_[cell];
        v.erase(std::find(v.begin(), v.end(), idx));
    }

    double L_;
    int d_;
    int per_axis_ = 0;
    double side_ = 0.0;
    bool enabled_ = false;
    std::vector<std::vector<int>> cells_;
    std::vector<int> owner_;
};

GcmcChain::GcmcChain(ChainSettings settings)
    : settings_(std::move(settings)), rng_(settings_.seed)
{
    settings_.validate();
    config_.L = settings_.L;
    config_.d = settings_.d;
    stats_.seed = settings_.seed;
    cells_ = std::make_unique<Cells>(settings_.L, settings_.d, settings_.potential.range());
    step_radius_ = default_step_radius(settings_.potential, settings_.L);
}

GcmcChain::~GcmcChain() = default;

bool GcmcChain::using_cells() const
{
    return cells_->enabled() && config_.size() > settings_.cell_list_threshold;
}

double GcmcChain::delta_insert(const Point& p, std::ptrdiff_t skip) const
{
    const auto& u = settings_.potential;
    if (u.range() <= 0.0)
        return 0.0;
    double e = 0.0;
    auto visit = [&](std::size_t j) {
        if (static_cast<std::ptrdiff_t>(j) == skip)
            return true;
        const double r = periodic_distance(p, config_.points[j], config_.L, config_.d);
        const double v = u(r);
        if (v == kInf) {
            e = kInf;
            return false;
        }
        e += v;
        return true;
    };
    if (using_cells()) {
        cells_->for_each_neighbour(p, [&](int j) { return visit(static_cast<std::size_t>(j)); });
    } else {
        for (std::size_t j = 0; j < config_.size(); ++j)
            if (!visit(j))
                break;
    }
    return e;
}

void GcmcChain::check_invariant() const
{
    if (settings_.potential.sigma > 0.0 && !satisfies_hard_core(config_, settings_.potential.sigma))
        throw NumericalGuardError("hard-core invariant violated");
    config_.validate();
}

MoveResult GcmcChain::step(MoveKind kind)
{
    auto delta = [this](const Point& p, std::ptrdiff_t skip) { return delta_insert(p, skip); };
    const bool cells = cells_->enabled();
    auto on_insert = [&](std::size_t i, const Point& p) {
        if (cells)
            cells_->insert(i, p);
    };
    auto on_remove = [&](std::size_t i) {
        if (cells)
            cells_->remove(i);
    };
    auto on_move = [&](std::size_t i, const Point& p) {
        if (cells)
            cells_->move(i, p);
    };
    const auto res = do_move(config_, kind, settings_.z, step_radius_, rng_, delta, on_insert, on_remove, on_move);
    const auto k = static_cast<std::size_t>(kind);
    ++stats_.attempts[k];
    if (res.accepted) {
        ++stats_.accepts[k];
        if (settings_.check_invariants)
            check_invariant();
    }
    return res;
}

MoveResult GcmcChain::step()
{
    return step(draw_kind(rng_));
}

void GcmcChain::fix_sweep_length(std::size_t moves)
{
    if (moves == 0)
        throw ValidationError("a sweep needs at least one move");
    moves_per_sweep_ = moves;
}

void GcmcChain::sweep()
{
    const std::size_t moves = moves_per_sweep_ ? moves_per_sweep_ : std::max<std::size_t>(1, config_.size());
    for (std::size_t m = 0; m < moves; ++m)
        step();
}

ChainStats run_chain(const ChainSettings& settings, const ConfigurationSink& sink)
{
    GcmcChain chain(settings);
    double burn_sum = 0.0;
    std::int64_t burn_count = 0;
    for (std::int64_t s = 1; s <= settings.sweeps; ++s) {
        if (s == settings.burn_in + 1) {
            std::size_t moves = settings.moves_per_sweep;
            if (moves == 0)
                moves = burn_count > 0 ? static_cast<std::size_t>(std::llround(burn_sum / burn_count))
                                       : static_cast<std::size_t>(std::ceil(settings.z * chain.configuration().volume()));
            chain.fix_sweep_length(std::max<std::size_t>(1, moves));
            chain.stats().moves_per_sweep = chain.sweep_length();
        }
        chain.sweep();
        if (s <= settings.burn_in) {
            if (2 * s > settings.burn_in) {
                burn_sum += static_cast<double>(chain.configuration().size());
                ++burn_count;
            }
            continue;
        }
        chain.stats().n_trace.push_back(static_cast<std::uint32_t>(chain.configuration().size()));
        if ((s - settings.burn_in) % settings.thin == 0) {
            if (sink)
                sink(chain.configuration(), s);
            ++chain.stats().emitted;
        }
    }
    ChainStats stats = chain.stats();
    const std::vector<double> trace(stats.n_trace.begin(), stats.n_trace.end());
    stats.iat = integrated_autocorrelation_time(trace);
    stats.ess = static_cast<double>(trace.size()) / stats.iat;
    return stats;
}

double tonks_mu_exact(double rho, double sigma)
{
    if (!(rho >= 0.0) || !(sigma >= 0.0))
        throw ValidationError("Tonks gas needs rho >= 0 and sigma >= 0");
    const double x = rho * sigma;
    if (x >= 1.0)
        throw NumericalGuardError("jammed: rho * sigma >= 1");
    if (rho == 0.0)
        throw DegenerateDensityError("rho = 0: the chemical potential is -infinity");
    return std::log(rho / (1.0 - x)) + x / (1.0 - x);
}

double tonks_density(double z, double sigma)
{
    if (!(z > 0.0) || !(sigma >= 0.0))
        throw ValidationError("Tonks inversion needs z > 0 and sigma >= 0");
    if (sigma == 0.0)
        return z;
    const double target = std::log(z * sigma);
    // log(z sigma) = log(x/(1-x)) + x/(1-x) is increasing in x = rho sigma.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = std::log(mid / (1.0 - mid)) + mid / (1.0 - mid);
        (val < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / sigma;
}

}  // namespace icx
