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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "icx/core.hpp"
#include "icx/rng.hpp"

namespace icx {

/// Radial pair potential: +inf below the hard core sigma, tail(r) on
/// [sigma, cutoff], zero beyond. B is the declared stability constant.
struct PairPotential {
    std::string name = "ideal";
    double sigma = 0.0;
    double cutoff = 0.0;
    std::function<double(double)> tail;
    double B = 0.0;

    double range() const { return std::max(sigma, cutoff); }
    double operator()(double r) const;
    bool hard_core_only() const { return !tail || cutoff <= sigma; }
};

PairPotential ideal_potential();
PairPotential hard_core_potential(double sigma);
/// Hard core plus a constant shoulder u = epsilon on [sigma, cutoff); epsilon >= 0.
PairPotential square_shoulder_potential(double sigma, double epsilon, double cutoff);

/// Points in the periodic box [0, L)^d.
struct Configuration {
    std::vector<Point> points;
    double L = 1.0;
    int d = 1;

    std::size_t size() const { return points.size(); }
    double volume() const;
    void validate() const;
};

/// Minimum-image distance in the periodic box.
double periodic_distance(const Point& a, const Point& b, double L, int d);
/// min-image pair distances are >= sigma.
bool satisfies_hard_core(const Configuration& c, double sigma);

enum class MoveKind { birth = 0, death = 1, translate = 2 };

struct MoveResult {
    MoveKind kind = MoveKind::birth;
    bool accepted = false;
};

/// Performs one move of the given kind by brute-force energy differences.
MoveResult apply_move(Configuration& c, MoveKind kind, double z, const PairPotential& u, PhiloxStream& rng);

/// One move chosen uniformly among birth, death and translate.
MoveResult gcmc_step(Configuration& c, double z, const PairPotential& u, PhiloxStream& rng);

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorrelation_time(const std::vector<double>& series);

struct ChainStats {
    std::array<std::uint64_t, 3> attempts{};
    std::array<std::uint64_t, 3> accepts{};
    std::vector<std::uint32_t> n_trace;  // N after every post-burn-in sweep
    double iat = 1.0;
    double ess = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t emitted = 0;
    std::size_t moves_per_sweep = 0;

    double acceptance_rate(MoveKind k) const;
};

struct ChainSettings {
    double z = 1.0;
    PairPotential potential;
    double L = 1.0;
    int d = 1;
    std::int64_t sweeps = 1000;
    std::int64_t burn_in = 100;
    std::int64_t thin = 1;
    std::uint64_t seed = 1;
    /// Neighbour search switches to cell lists above this particle count.
    std::size_t cell_list_threshold = 200;
    /// Verify the hard-core invariant after every accepted move.
    bool check_invariants = false;
    /// Moves per post-burn-in sweep; 0 picks the mean N over the second
    /// half of burn-in (or ceil(z |Lambda|) without burn-in).
    std::size_t moves_per_sweep = 0;

    void validate() const;
};

/// A grand-canonical Metropolis chain started from the empty configuration.
/// Until a sweep length is fixed, a sweep is max(1, N) moves with N taken at
/// the start of the sweep. That length depends on the state, so it is only
/// used for burn-in; sampled sweeps must have a fixed length.
class GcmcChain {
  public:
    explicit GcmcChain(ChainSettings settings);
    ~GcmcChain();
    GcmcChain(const GcmcChain&) = delete;
    GcmcChain& operator=(const GcmcChain&) = delete;

    MoveResult step();
    MoveResult step(MoveKind kind);
    void sweep();
    void fix_sweep_length(std::size_t moves);
    std::size_t sweep_length() const { return moves_per_sweep_; }
    const Configuration& configuration() const { return config_; }
    const ChainStats& stats() const { return stats_; }
    ChainStats& stats() { return stats_; }
    bool using_cells() const;

  private:
    class Cells;
    double delta_insert(const Point& p, std::ptrdiff_t skip) const;
    void check_invariant() const;

    ChainSettings settings_;
    Configuration config_;
    PhiloxStream rng_;
    ChainStats stats_;
    std::unique_ptr<Cells> cells_;
    double step_radius_ = 0.0;
    std::size_t moves_per_sweep_ = 0;
};

using ConfigurationSink = std::function<void(const Configuration&, std::int64_t sweep)>;

/// Runs burn-in, fixes the sweep length, then emits the configuration after sweep s whenever
/// s > burn_in and (s - burn_in) % thin == 0.
ChainStats run_chain(const ChainSettings& settings, const ConfigurationSink& sink);

/// Exact 1D hard-rod chemical potential at beta = 1.
double tonks_mu_exact(double rho, double sigma);
/// Inverse of the Tonks activity-density relation z = rho/(1-rho sigma) exp(rho sigma/(1-rho sigma)).
double tonks_density(double z, double sigma);

}  // namespace icx
