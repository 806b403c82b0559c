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
#include <string>
#include <vector>

#include "icx/core.hpp"
#include "icx/integrators.hpp"

namespace icx {

/// Largest tuple a family kernel is evaluated on in continuum mode.
inline constexpr int kMaxFamilyOrder = 8;

/// Correlation functions rho^(n), n = 0..max_order, as one symmetric kernel:
/// the order is the number of arguments and rho^(0) = 1.
struct CorrelationFamily {
    int max_order = 1;
    int dimension = 1;
    TupleFunction kernel;
    bool translation_invariant = false;
    double density = 0.0;  // the constant rho^(1) when translation invariant
    double xi = 0.0;       // declared Ruelle constant, 0 when unknown
    std::string label;

    double operator()(PointSpan x) const;
    double rho1(const Point& x) const;
    void validate() const;
};

/// rho^(n) = rho^n, evaluated as a repeated product so that truncation
/// cancels exactly in floating point.
CorrelationFamily poisson_family(double rho, int max_order, int d = 1);

/// Positive, symmetric, non-translation-invariant test family
/// rho^(n) = c_n exp(sum_i a cos(k.x_i) + b_n sum_{i<j} cos(|x_i - x_j|)).
CorrelationFamily random_smooth_family(int max_order, std::uint64_t seed, int d = 1);

/// Truncated correlation functions. Values on every sub-tuple come out of
/// one call because the recursions need all of them.
class TruncatedFamily {
  public:
    using SubsetKernel = std::function<std::vector<double>(PointSpan)>;

    TruncatedFamily(int max_order, int dimension, SubsetKernel subsets, bool translation_invariant,
                    double density);
    /// Wraps an explicit kernel for rho_T^(n).
    static TruncatedFamily from_kernel(int max_order, int dimension, TupleFunction kernel,
                                       bool translation_invariant, double density);

    int max_order() const { return max_order_; }
    int dimension() const { return dimension_; }
    bool translation_invariant() const { return translation_invariant_; }
    double density() const { return density_; }

    /// rho_T^(n)(x_1..x_n).
    double operator()(PointSpan x) const;
    /// rho_T on x_S for every subset mask S of the tuple; entry 0 is 1.
    std::vector<double> on_subsets(PointSpan x) const;

  private:
    int max_order_;
    int dimension_;
    SubsetKernel subsets_;
    bool translation_invariant_;
    double density_;
};

TruncatedFamily truncate(const CorrelationFamily& rho);
CorrelationFamily untruncate(const TruncatedFamily& rhoT);

/// Kernels k(x, y_1..y_k), symmetric in y, for 1 <= k <= max_order.
class RootedFamily {
  public:
    using RootedKernel = std::function<std::vector<double>(const Point&, PointSpan)>;

    RootedFamily(int max_order, int dimension, RootedKernel subsets, bool translation_invariant,
                 double density);

    int max_order() const { return max_order_; }
    int dimension() const { return dimension_; }
    bool translation_invariant() const { return translation_invariant_; }
    double density() const { return density_; }

    double operator()(const Point& x, PointSpan y) const;
    /// Values on (x, y_T) for every subset mask T of y; entry 0 is 1.
    std::vector<double> on_subsets(const Point& x, PointSpan y) const;

  private:
    int max_order_;
    int dimension_;
    RootedKernel subsets_;
    bool translation_invariant_;
    double density_;
};

/// F_k(x, y_k): rho^(1+k)(x, y)/rho(x) = sum over partitions of y of prod F.
RootedFamily f_family(const CorrelationFamily& rho);
/// tilde_k(x, y_k): rho_T^(1+k)(x, y)/rho(x) = sum over partitions of y of prod tilde.
RootedFamily tilde_family(const TruncatedFamily& rhoT);

struct SplitReport {
    std::vector<double> max_residual;  // index k-1, relative
    double worst() const;
};

/// max |F_k - rho_T^(k) - tilde_k| / scale over random probe tuples in
/// [-half_width, half_width]^d, k = 1..max_order-1.
SplitReport split_check(const CorrelationFamily& rho, int n_probes, std::uint64_t seed,
                        double half_width = 2.0);

struct AssumptionBFit {
    double D = 0.0;
    double q = 0.0;
    double q0 = 0.25;
    bool convergent = true;
    std::vector<double> integrals;  // I_n, n = 1..N
    std::vector<Point> probes;
};

/// Per-order series with a base value: partial_sums[i] = base + terms[0..i].
/// terms[i] belongs to order i+1.
struct ExpansionReport {
    double base = 0.0;
    std::vector<double> terms;
    std::vector<double> partial_sums;
    std::vector<double> std_errs;
    double radius = 0.0;
    std::vector<double> r_halved_terms;
    std::vector<bool> r_converged;
    std::optional<AssumptionBFit> diagnostics;

    double value() const { return partial_sums.empty() ? base : partial_sums.back(); }
    void push(double term, double std_err);
};

/// Janossy partial sums sum_{k<=K} (-1)^k/k! int rho^(n+k)(x_n, y_k) dy_k.
ExpansionReport janossy(const CorrelationFamily& rho, const Integrator& integrator, PointSpan x, int K);

/// Terms (-1)^k/k! int rho_T^(k), k = 1..K, of log j^(0).
ExpansionReport log_j0(const TruncatedFamily& rhoT, const Integrator& integrator, int K);

/// Relative change under halving the radius that still counts as converged.
inline constexpr double kRadiusTolerance = 0.01;

/// mu = log rho + sum_k (-1)^k/k! int tilde_k(x0, y_k) dy_k over the cube of
/// radius R around the probe x0, with the same terms at R/2 for comparison.
ExpansionReport mu_expansion(const RootedFamily& tilde, int K, double R, const IntegrationOptions& options,
                             const Point& probe = Point::Zero());

/// p = rho - sum_k (-1)^(k+1)/(k+1)! int rho_T^(k+1)(0, y_k) dy_k.
ExpansionReport pressure_expansion(const TruncatedFamily& rhoT, int K, double R, const IntegrationOptions& options);

/// Fits I_n / n! = D q^n where I_n is the max over probes x of
/// int |rho_T^(1+n)(x, y)| / rho(x) dy over the cube of radius R around x.
AssumptionBFit assumption_b_diagnostic(const TruncatedFamily& rhoT, int N, double R,
                                       const IntegrationOptions& options, int n_probes = 8,
                                       std::uint64_t seed = 1);

/// Least-squares fit of log(I_n/n!) = log D + n log q over the positive I_n.
AssumptionBFit fit_assumption_b(const std::vector<double>& integrals);

/// max over random probe tuples of rho^(n)^(1/n), n = 1..N.
double ruelle_xi(const CorrelationFamily& rho, int N, double half_width, int n_probes = 64, std::uint64_t seed = 1);

}  // namespace icx
