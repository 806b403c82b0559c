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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "icx/correlation.hpp"

namespace icx {

/// An even, non-negative pair function g(|r|) with C_g = int |g - 1| and
/// uniformity bound b = sup g.
struct PairFunction {
    std::string name;
    int dimension = 1;
    std::function<double(double)> radial;
    double C_g = 0.0;
    double b = 1.0;
    double hard_core = 0.0;  // g = 0 below this distance, 0 if none

    double operator()(const Point& r) const { return radial(r.norm()); }
    double mayer(const Point& r) const { return radial(r.norm()) - 1.0; }
};

PairFunction ideal_pair(int d = 1);
/// g = 1{|r| >= sigma} in d = 1.
PairFunction hard_rod(double sigma);
/// g = 1{|r| >= sigma} in d = 2 or 3.
PairFunction hard_sphere(int d, double sigma);
/// g = 1 - a exp(-r^2/s^2), 0 < a <= 1.
PairFunction gaussian_mayer(int d, double a, double s);
/// Catalog lookup: "ideal", "hard-rod", "hard-sphere", "gaussian".
PairFunction pair_function_by_name(const std::string& name, int d, double sigma, double a = 1.0, double s = 1.0);

/// rho^(n)(x_n) = rho^n prod_{i<j} g(x_i - x_j). Warns when rho is outside
/// the existence region unless `check_existence` is false.
CorrelationFamily kirkwood_family(double rho, const PairFunction& g, int max_order, bool check_existence = true);

/// tilde_k(x, y_k) = (prod_m g(x - y_m) - 1) rho_T^(k)(y_k) with rho_T the
/// truncated functions of the Kirkwood family.
RootedFamily tilde_closed_form(double rho, const PairFunction& g, int max_order, bool check_existence = true);

/// A labeled simple graph on vertices 0..v-1; bit e of `edges` refers to
/// the e-th pair in lexicographic order.
struct ConnectedGraph {
    int vertices = 0;
    std::uint32_t edges = 0;
    std::vector<std::pair<int, int>> edge_list() const;
    std::string to_string() const;
};

inline constexpr int kMaxGraphVertices = 6;

/// Pairs (i, j), i < j, of v vertices in lexicographic order.
std::vector<std::pair<int, int>> vertex_pairs(int v);
bool is_connected(int v, std::uint32_t edges);
/// Connected and vertex 0 is not a cut vertex.
bool is_root_nonseparable(int v, std::uint32_t edges);

/// Every connected labeled graph on v vertices, each once. Cached under
/// $ICX_CACHE_DIR when that variable is set.
std::vector<ConnectedGraph> connected_graphs(int v);

enum class GraphSet {
    connected,           // all connected graphs on {0} + y
    root_nonseparable,   // connected graphs that stay connected without vertex 0
};

/// terms[k] = (-rho)^k/k! int sum_{C} prod_{(i,j) in C} (g(y_i - y_j) - 1) dy_k
/// with y_0 = 0, over the cube of radius R; R/2 terms reported alongside.
ExpansionReport mu_graph_expansion(double rho, const PairFunction& g, int K, double R,
                                   const IntegrationOptions& options, GraphSet set = GraphSet::connected);

struct ExistenceReport {
    double bound = 0.0;            // 1 / (e b C_g)
    bool inside = true;            // rho < bound
    double margin = 0.0;           // bound - rho
    double expansion_bound = 0.0;  // 1 / ((2 + zeta D) e b C_g)
    bool inside_expansion = true;
};

ExistenceReport existence_bound(double rho, const PairFunction& g, double D = 1.0);

/// The mu-expansion terms of one Kirkwood family through every route.
struct KirkwoodComparison {
    ExpansionReport recursion;    // tilde recursion from truncate(kirkwood_family)
    ExpansionReport closed_form;  // tilde_closed_form
    ExpansionReport graphs;       // all connected graphs
    ExpansionReport rooted_graphs;  // root-nonseparable graphs
};

KirkwoodComparison compare_kirkwood_mu(double rho, const PairFunction& g, int K, double R,
                                       const IntegrationOptions& options);

/// Integration options with a 1D grid aligned to the hard core of g.
IntegrationOptions options_for(const PairFunction& g, IntegrationOptions options);

}  // namespace icx
