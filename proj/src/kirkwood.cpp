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

#include "icx/kirkwood.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

namespace icx {

namespace {

void check_radius(double sigma)
{
    if (!(sigma > 0.0))
        throw ValidationError("hard-core diameter must be positive");
}

}  // namespace

PairFunction ideal_pair(int d)
{
    PairFunction g;
    g.name = "ideal";
    g.dimension = d;
    g.radial = [](double) { return 1.0; };
    return g;
}

PairFunction hard_rod(double sigma)
{
    check_radius(sigma);
    PairFunction g;
    g.name = "hard-rod";
    g.dimension = 1;
    g.radial = [sigma](double r) { return r >= sigma ? 1.0 : 0.0; };
    g.C_g = 2.0 * sigma;
    g.hard_core = sigma;
    return g;
}

PairFunction hard_sphere(int d, double sigma)
{
    check_radius(sigma);
    if (d < 2 || d > 3)
        throw ValidationError("hard spheres are defined for d = 2 or 3");
    PairFunction g;
    g.name = "hard-sphere";
    g.dimension = d;
    g.radial = [sigma](double r) { return r >= sigma ? 1.0 : 0.0; };
    g.C_g = ball_volume(d, sigma);
    g.hard_core = sigma;
    return g;
}

PairFunction gaussian_mayer(int d, double a, double s)
{
    if (!(a > 0.0 && a <= 1.0))
        throw ValidationError("gaussian Mayer amplitude must lie in (0, 1]");
    if (!(s > 0.0))
        throw ValidationError("gaussian Mayer width must be positive");
    if (d < 1 || d > 3)
        throw ValidationError("dimension must be 1, 2 or 3");
    PairFunction g;
    g.name = "gaussian";
    g.dimension = d;
    g.radial = [a, s](double r) { return 1.0 - a * std::exp(-(r * r) / (s * s)); };
    g.C_g = a * std::pow(std::sqrt(std::numbers::pi) * s, d);
    return g;
}

PairFunction pair_function_by_name(const std::string& name, int d, double sigma, double a, double s)
{
    if (name == "ideal")
        return ideal_pair(d);
    if (name == "hard-rod") {
        if (d != 1)
            throw ValidationError("hard-rod is one-dimensional");
        return hard_rod(sigma);
    }
    if (name == "hard-sphere")
        return hard_sphere(d, sigma);
    if (name == "gaussian")
        return gaussian_mayer(d, a, s);
    throw ValidationError("unknown pair function '" + name + "'");
}

ExistenceReport existence_bound(double rho, const PairFunction& g, double D)
{
    if (!(rho >= 0.0))
        throw ValidationError("density must be non-negative");
    ExistenceReport rep;
    const double scale = std::numbers::e * g.b * g.C_g;
    rep.bound = scale > 0.0 ? 1.0 / scale : INFINITY;
    rep.inside = rho < rep.bound;
    rep.margin = rep.bound - rho;
    rep.expansion_bound = scale > 0.0 ? 1.0 / ((2.0 + zeta_constant() * D) * scale) : INFINITY;
    rep.inside_expansion = rho < rep.expansion_bound;
    return rep;
}

CorrelationFamily kirkwood_family(double rho, const PairFunction& g, int max_order, bool check_existence)
{
    const auto ex = existence_bound(rho, g);
    if (check_existence && !ex.inside) {
        std::ostringstream msg;
        msg << "rho = " << rho << " is outside the Kirkwood existence region rho < " << ex.bound;
        warn(msg.str());
    }
    CorrelationFamily fam;
    fam.max_order = max_order;
    fam.dimension = g.dimension;
    fam.translation_invariant = true;
    fam.density = rho;
    fam.xi = rho * std::pow(g.b, 0.5 * (max_order - 1));
    fam.label = "kirkwood:" + g.name;
    fam.kernel = [rho, g](PointSpan x) {
        double v = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            v *= rho;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i + 1; j < x.size(); ++j)
                v *= g(x[i] - x[j]);
        return v;
    };
    fam.validate();
    return fam;
}

RootedFamily tilde_closed_form(double rho, const PairFunction& g, int max_order, bool check_existence)
{
    const auto rhoT = truncate(kirkwood_family(rho, g, max_order, check_existence));
    auto subsets = [rhoT, g](const Point& x, PointSpan y) {
        const int m = static_cast<int>(y.size());
        auto out = m == 0 ? std::vector<double>{1.0} : rhoT.on_subsets(y);
        std::array<double, kMaxFamilyOrder> gx{};
        for (int i = 0; i < m; ++i)
            gx[i] = g(x - y[i]);
        for (std::uint32_t mask = 1; mask < out.size(); ++mask) {
            double prod = 1.0;
            for (int i = 0; i < m; ++i)
                if (mask & (1u << i))
                    prod *= gx[i];
            out[mask] *= prod - 1.0;
        }
        return out;
    };
    return RootedFamily(max_order - 1, g.dimension, std::move(subsets), true, rho);
}

std::vector<std::pair<int, int>> vertex_pairs(int v)
{
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < v; ++i)
        for (int j = i + 1; j < v; ++j)
            pairs.emplace_back(i, j);
    return pairs;
}

std::vector<std::pair<int, int>> ConnectedGraph::edge_list() const
{
    std::vector<std::pair<int, int>> out;
    const auto pairs = vertex_pairs(vertices);
    for (std::size_t e = 0; e < pairs.size(); ++e)
        if (edges & (1u << e))
            out.push_back(pairs[e]);
    return out;
}

std::string ConnectedGraph::to_string() const
{
    std::ostringstream os;
    os << vertices << ":";
    for (auto [i, j] : edge_list())
        os << ' ' << i << '-' << j;
    return os.str();
}

namespace {

bool connected_on(int v, std::uint32_t edges, std::uint32_t vertex_mask)
{
    if (vertex_mask == 0)
        return true;
    std::array<std::uint32_t, 32> adj{};
    const auto pairs = vertex_pairs(v);
    for (std::size_t e = 0; e < pairs.size(); ++e) {
        if (!(edges & (1u << e)))
            continue;
        auto [i, j] = pairs[e];
        adj[i] |= 1u << j;
        adj[j] |= 1u << i;
    }
    std::uint32_t seen = vertex_mask & (~vertex_mask + 1);
    std::uint32_t frontier = seen;
    while (frontier) {
        std::uint32_t next = 0;
        for (int i = 0; i < v; ++i)
            if (frontier & (1u << i))
                next |= adj[i];
        next &= vertex_mask & ~seen;
        seen |= next;
        frontier = next;
    }
    return seen == vertex_mask;
}

std::uint32_t all_vertices(int v)
{
    return (1u << v) - 1u;
}

std::vector<ConnectedGraph> generate_connected(int v)
{
    std::vector<ConnectedGraph> out;
    const int n_pairs = v * (v - 1) / 2;
    for (std::uint32_t edges = 0; edges < (1u << n_pairs); ++edges)
        if (is_connected(v, edges))
            out.push_back({v, edges});
    return out;
}

std::filesystem::path cache_file(int v)
{
    const char* dir = std::getenv("ICX_CACHE_DIR");
    if (!dir || !*dir)
        return {};
    return std::filesystem::path(dir) / ("connected_graphs_v" + std::to_string(v) + ".txt");
}

bool read_cache(const std::filesystem::path& path, int v, std::vector<ConnectedGraph>& out)
{
    std::ifstream in(path);
    if (!in)
        return false;
    int file_v = 0;
    std::size_t count = 0;
    if (!(in >> file_v >> count) || file_v != v)
        return false;
    out.clear();
    std::uint32_t edges = 0;
    while (in >> edges) {
        if (!is_connected(v, edges))
            return false;
        out.push_back({v, edges});
    }
    return out.size() == count;
}

void write_cache(const std::filesystem::path& path, int v, const std::vector<ConnectedGraph>& graphs)
{
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            return;
        out << v << ' ' << graphs.size() << '\n';
        for (const auto& gph : graphs)
            out << gph.edges << '\n';
    }
    std::filesystem::rename(tmp, path, ec);
}

}  // namespace

bool is_connected(int v, std::uint32_t edges)
{
    return connected_on(v, edges, all_vertices(v));
}

bool is_root_nonseparable(int v, std::uint32_t edges)
{
    return is_connected(v, edges) && connected_on(v, edges, all_vertices(v) & ~1u);
}

std::vector<ConnectedGraph> connected_graphs(int v)
{
    if (v < 1)
        throw ValidationError("graphs need at least one vertex");
    if (v > kMaxGraphVertices)
        throw SizeLimitError("connected graph enumeration limited to 6 vertices");
    static std::mutex mutex;
    static std::array<std::vector<ConnectedGraph>, kMaxGraphVertices + 1> memo;
    std::lock_guard lock(mutex);
    if (!memo[v].empty())
        return memo[v];
    const auto path = cache_file(v);
    std::vector<ConnectedGraph> graphs;
    if (path.empty() || !read_cache(path, v, graphs)) {
        graphs = generate_connected(v);
        if (!path.empty())
            write_cache(path, v, graphs);
    }
    memo[v] = graphs;
    return graphs;
}

ExpansionReport mu_graph_expansion(double rho, const PairFunction& g, int K, double R, const IntegrationOptions& options,
                                   GraphSet set)
{
    if (!(rho > 0.0))
        throw DegenerateDensityError("rho must be positive for log rho");
    if (K < 0)
        throw ValidationError("truncation order must be non-negative");
    if (K + 1 > kMaxGraphVertices)
        throw SizeLimitError("graph expansion limited to order 5");
    if (!(R > 0.0))
        throw ValidationError("cutoff radius must be positive");
    ExpansionReport report;
    report.base = std::log(rho);
    report.radius = R;
    const int d = g.dimension;
    const auto full = make_integrator(options, Domain::cube_of_radius(d, R));
    const auto half = make_integrator(options, Domain::cube_of_radius(d, R / 2));
    double coef = 1.0;
    for (int k = 1; k <= K; ++k) {
        coef *= -rho / k;
        const int v = k + 1;
        std::vector<std::vector<std::pair<int, int>>> graphs;
        for (const auto& gph : connected_graphs(v))
            if (set == GraphSet::connected || is_root_nonseparable(v, gph.edges))
                graphs.push_back(gph.edge_list());
        auto f = [&](PointSpan y) {
            std::array<Point, kMaxGraphVertices> pts;
            pts[0] = Point::Zero();
            for (int i = 0; i < k; ++i)
                pts[i + 1] = y[i];
            std::array<std::array<double, kMaxGraphVertices>, kMaxGraphVertices> mayer{};
            for (int i = 0; i < v; ++i)
                for (int j = i + 1; j < v; ++j)
                    mayer[i][j] = g.mayer(pts[i] - pts[j]);
            double total = 0.0;
            for (const auto& edges : graphs) {
                double prod = 1.0;
                for (auto [i, j] : edges)
                    prod *= mayer[i][j];
                total += prod;
            }
            return total;
        };
        const auto est = full->integrate(f, k);
        const auto est_half = half->integrate(f, k);
        report.push(coef * est.value, std::abs(coef) * est.std_err);
        report.r_halved_terms.push_back(coef * est_half.value);
        const double t = report.terms.back();
        report.r_converged.push_back(std::abs(t - report.r_halved_terms.back()) <= kRadiusTolerance * std::abs(t) + 1e-300);
    }
    return report;
}

IntegrationOptions options_for(const PairFunction& g, IntegrationOptions options)
{
    if (options.method == IntegrationMethod::quad && g.dimension == 1 && g.hard_core > 0.0 && options.aligned_sigma == 0.0)
        options.aligned_sigma = g.hard_core;
    return options;
}

KirkwoodComparison compare_kirkwood_mu(double rho, const PairFunction& g, int K, double R,
                                       const IntegrationOptions& options)
{
    const auto opts = options_for(g, options);
    KirkwoodComparison cmp;
    cmp.recursion = mu_expansion(tilde_family(truncate(kirkwood_family(rho, g, K + 1))), K, R, opts);
    cmp.closed_form = mu_expansion(tilde_closed_form(rho, g, K + 1), K, R, opts);
    cmp.graphs = mu_graph_expansion(rho, g, K, R, opts, GraphSet::connected);
    cmp.rooted_graphs = mu_graph_expansion(rho, g, K, R, opts, GraphSet::root_nonseparable);
    return cmp;
}

}  // namespace icx
