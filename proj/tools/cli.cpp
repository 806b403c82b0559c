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

#include "cli.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "icx/combinatorics.hpp"
#include "icx/correlation.hpp"
#include "icx/estimation.hpp"
#include "icx/exp_representation.hpp"
#include "icx/kirkwood.hpp"
#include "icx/sampler.hpp"

namespace icx::cli {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex64(std::uint64_t h)
{
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

}  // namespace

std::map<std::string, std::string> read_config(const std::string& path)
{
    std::istringstream in(slurp(path));
    std::map<std::string, std::string> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        while (!key.empty() && key.front() == '-')
            key.erase(key.begin());
        if (key.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": empty key");
        pairs[key] = trim(line.substr(eq + 1));
    }
    return pairs;
}

namespace {

/// Everything a subcommand leaves behind for the run manifest.
struct RunContext {
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> argv;
    std::string config_path;
    json seeds = json::object();
    json inputs = json::object();
    json extra = json::object();
    const CLI::App* command = nullptr;

    void add_input(const std::string& path, const std::string& bytes)
    {
        inputs[path] = "fnv1a64:" + hex64(fnv1a(bytes));
    }

    json flags() const
    {
        json f = json::object();
        auto collect = [&](const CLI::App* app) {
            for (const CLI::Option* opt : app->get_options()) {
                const auto& name = opt->get_lnames();
                if (name.empty() || name.front() == "help" || name.front() == "version")
                    continue;
                std::string value;
                if (opt->count() > 0) {
                    const auto& r = opt->results();
                    value = r.empty() ? std::string("true") : r.back();
                } else {
                    value = opt->get_default_str();
                    if (value.empty() && opt->get_expected_min() == 0)
                        value = "false";
                }
                f[name.front()] = value;
            }
        };
        collect(command->get_parent());
        collect(command);
        return f;
    }

    /// Writes `content` to `path` (stdout when empty) plus `<path>.manifest.json`.
    void emit(const std::string& path, const std::string& content) const
    {
        if (path.empty()) {
            out << content;
            return;
        }
        {
            std::ofstream file(path, std::ios::binary);
            if (!file)
                throw ValidationError("cannot write " + path);
            file << content;
        }
        write_manifest(path, fnv1a(content));
    }

    void write_manifest(const std::string& path, std::uint64_t output_hash) const
    {
        json m;
        m["subcommand"] = command->get_name();
        m["argv"] = argv;
        m["config_file"] = config_path.empty() ? json(nullptr) : json(config_path);
        m["flags"] = flags();
        m["seeds"] = seeds;
        m["versions"] = {{"icx", kVersion},
                         {"interface", kInterfaceVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"boost", BOOST_LIB_VERSION},
                         {"compiler", __VERSION__}};
        m["timestamp_utc"] = utc_timestamp();
        m["input_hashes"] = inputs;
        m["output"] = {{"path", path}, {"hash", "fnv1a64:" + hex64(output_hash)}};
        if (!extra.empty())
            m["run"] = extra;
        std::ofstream file(path + ".manifest.json", std::ios::binary);
        if (!file)
            throw ValidationError("cannot write " + path + ".manifest.json");
        file << m.dump(2) << '\n';
    }
};

struct IntegrationArgs {
    std::string method = "quad";
    int nodes = 0;
    std::uint64_t samples = 200000;
    std::uint64_t seed = 1;
    std::uint64_t budget = 1000000;

    void add(CLI::App* app)
    {
        app->add_option("--method", method, "quad or mc")->check(CLI::IsMember({"quad", "mc"}));
        app->add_option("--nodes", nodes, "quadrature nodes per axis (0: from --budget)");
        app->add_option("--samples", samples, "Monte Carlo samples per integral");
        app->add_option("--seed", seed, "Monte Carlo seed");
        app->add_option("--budget", budget, "quadrature evaluation budget per integral");
    }

    IntegrationOptions options(int workers, RunContext& ctx) const
    {
        IntegrationOptions o;
        o.method = method == "mc" ? IntegrationMethod::mc : IntegrationMethod::quad;
        o.nodes = nodes;
        o.samples = samples;
        o.seed = seed;
        o.workers = workers;
        o.eval_budget = budget;
        if (o.method == IntegrationMethod::mc)
            ctx.seeds["integration"] = seed;
        return o;
    }
};

std::vector<Configuration> read_configurations(const std::string& path, RunContext& ctx)
{
    const auto bytes = slurp(path);
    ctx.add_input(path, bytes);
    std::vector<Configuration> configs;
    std::istringstream in(bytes);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Configuration c;
        c.L = rec.at("L").get<double>();
        c.d = rec.at("d").get<int>();
        for (const auto& p : rec.at("points")) {
            if (static_cast<int>(p.size()) != c.d)
                throw ValidationError(path + ":" + std::to_string(lineno) + ": point dimension mismatch");
            Point x = Point::Zero();
            for (int i = 0; i < c.d; ++i)
                x[i] = p[i].get<double>();
            c.points.push_back(x);
        }
        c.validate();
        configs.push_back(std::move(c));
    }
    return configs;
}

/// Hard core read off the first populated bin when it sits above r = 0.
double infer_hard_core(const PcfEstimate& pcf)
{
    for (std::size_t b = 0; b < pcf.bins(); ++b)
        if (pcf.counts[b] > 0)
            return pcf.edges[b];
    return 0.0;
}

struct EmpiricalArgs {
    std::string configs;
    int bins = 200;
    double rmax = 10.0;
    std::string hard_core = "auto";
    int batches = kDefaultBatches;

    void add(CLI::App* app, bool required)
    {
        auto* c = app->add_option("--configs", configs, "JSONL configurations from `icx sample`");
        if (required)
            c->required();
        app->add_option("--bins", bins, "pair-correlation bins");
        app->add_option("--rmax", rmax, "pair-correlation range");
        app->add_option("--hard-core", hard_core, "hard-core diameter, or auto");
        app->add_option("--batches", batches, "batches for standard errors");
    }

    EmpiricalFamily build(int closure_order, RunContext& ctx) const
    {
        if (configs.empty())
            throw ValidationError("empirical family needs --configs");
        const auto data = read_configurations(configs, ctx);
        const auto density = estimate_density(data, batches);
        const auto pcf = estimate_pcf(data, bins, rmax, batches);
        double sigma = 0.0;
        if (hard_core == "auto") {
            sigma = infer_hard_core(pcf);
        } else {
            try {
                sigma = std::stod(hard_core);
            } catch (const std::exception&) {
                throw ValidationError("--hard-core expects a number or auto");
            }
        }
        ctx.extra["hard_core"] = sigma;
        return make_empirical_family(density, pcf, sigma, closure_order);
    }
};

struct FamilyArgs {
    std::string family = "poisson";
    double rho = 0.05;
    int d = 1;
    std::string g = "hard-rod";
    double sigma = 1.0;
    double a = 1.0;
    double s = 1.0;
    EmpiricalArgs empirical;

    void add(CLI::App* app)
    {
        app->add_option("--family", family, "poisson, kirkwood, empirical or a JSON family file");
        app->add_option("--rho", rho, "density");
        app->add_option("--d", d, "dimension")->check(CLI::Range(1, 3));
        app->add_option("--g", g, "pair function: ideal, hard-rod, hard-sphere, gaussian");
        app->add_option("--sigma", sigma, "hard-core diameter");
        app->add_option("--a", a, "Gaussian Mayer amplitude");
        app->add_option("--s", s, "Gaussian Mayer width");
        empirical.add(app, false);
    }

    /// Resolves a JSON family file into the flag fields.
    void resolve(RunContext& ctx)
    {
        if (family == "poisson" || family == "kirkwood" || family == "empirical")
            return;
        const auto bytes = slurp(family);
        ctx.add_input(family, bytes);
        json desc;
        try {
            desc = json::parse(bytes);
            family = desc.at("type").get<std::string>();
            rho = desc.value("rho", rho);
            d = desc.value("dimension", desc.value("d", d));
            g = desc.value("g", g);
            sigma = desc.value("sigma", sigma);
            a = desc.value("a", a);
            s = desc.value("s", s);
            empirical.configs = desc.value("configs", empirical.configs);
            empirical.bins = desc.value("bins", empirical.bins);
            empirical.rmax = desc.value("rmax", empirical.rmax);
            empirical.batches = desc.value("batches", empirical.batches);
            if (desc.contains("hard_core")) {
                const auto& h = desc["hard_core"];
                empirical.hard_core = h.is_string() ? h.get<std::string>() : format_double(h.get<double>());
            }
        } catch (const json::exception& e) {
            throw ValidationError("family file " + family + ": " + e.what());
        }
        if (family != "poisson" && family != "kirkwood" && family != "empirical")
            throw ValidationError("family type must be poisson, kirkwood or empirical");
    }

    PairFunction pair() const { return pair_function_by_name(g, d, sigma, a, s); }
};

std::string expansion_csv(const ExpansionReport& r)
{
    std::ostringstream ss;
    ss << "k,term,partial_sum,std_err,R_halved_term\n";
    ss << "0," << format_double(r.base) << ',' << format_double(r.base) << ",0," << format_double(r.base) << '\n';
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        const double half = i < r.r_halved_terms.size() ? r.r_halved_terms[i] : std::nan("");
        ss << i + 1 << ',' << format_double(r.terms[i]) << ',' << format_double(r.partial_sums[i]) << ','
           << format_double(r.std_errs[i]) << ',' << format_double(half) << '\n';
    }
    return ss.str();
}

void summarize(const char* label, const ExpansionReport& r, const std::string& out_path, RunContext& ctx)
{
    ctx.extra[label] = r.value();
    if (!out_path.empty())
        ctx.out << label << " = " << format_double(r.value()) << '\n';
    for (std::size_t i = 0; i < r.r_converged.size(); ++i)
        if (!r.r_converged[i])
            warn("term k = " + std::to_string(i + 1) + " changes by more than 1% between R/2 and R");
}

int cmd_combinatorics(bool check, int kmax, bool totals, int mmax, double D, double q, bool superstable, double mu,
                      double B, double C_u, const std::string& out_path, RunContext& ctx)
{
    std::ostringstream ss;
    bool ok = true;
    int status = 0;
    if (!totals && !superstable && std::isnan(D))
        check = true;
    if (check) {
        if (kmax < 1 || kmax > 12)
            throw SizeLimitError("--kmax must lie in 1..12");
        using P = BivariatePolynomial;
        const auto w = w_bounds(kmax, P::D(), P::q());
        ss << "k,terms,match,w_k\n";
        for (int k = 1; k <= kmax; ++k) {
            const auto expected = coefficient_expansion(k, P::D(), P::q());
            const bool match = w[k - 1] == expected;
            ok = ok && match;
            int n_terms = 0;
            for (int nu = 0; nu <= k; ++nu)
                n_terms += expected.coefficient(nu, k) != 0;
            ss << k << ',' << n_terms << ',' << (match ? "yes" : "NO") << ",\"" << w[k - 1].to_string() << "\"\n";
        }
    }
    if (totals) {
        const auto b = total_partition_sequence(mmax);
        ss << "m,b_m\n";
        for (int m = 1; m <= mmax; ++m)
            ss << m << ',' << b[m] << '\n';
    }
    if (!std::isnan(D)) {
        const auto c = ConvergenceConstants::make(D, q);
        ss << "D,q,zeta,q0,M,convergent\n"
           << format_double(c.D) << ',' << format_double(c.q) << ',' << format_double(c.zeta) << ','
           << format_double(c.q0) << ',' << format_double(c.M) << ',' << (c.convergent() ? "true" : "false") << '\n';
    }
    if (superstable) {
        const auto c = superstable_constants(mu, B, C_u);
        ss << "q_bar,D,q,q0,defined,admissible,q_below_q0\n"
           << format_double(c.q_bar) << ',' << format_double(c.D) << ',' << format_double(c.q) << ','
           << format_double(c.q0) << ',' << c.defined << ',' << c.admissible << ',' << c.q_below_q0 << '\n';
        if (!c.admissible) {
            ctx.err << "error: superstable constants are inadmissible (q_bar = " << format_double(c.q_bar)
                    << ")\n";
            status = 2;
        }
    }
    ctx.emit(out_path, ss.str());
    if (!ok) {
        ctx.err << "error: coefficient expansion mismatch\n";
        return 1;
    }
    return status;
}

template <class Scalar>
json exp_report_json(const SiteKernelFamily<Scalar>& fam, const SiteSpace& space, int order)
{
    const auto rep = verify_exp_identity(fam, space, order);
    json j;
    j["order"] = order;
    json lhs = json::array(), rhs = json::array();
    for (int n = 0; n <= order; ++n) {
        lhs.push_back(static_cast<double>(rep.lhs[n]));
        rhs.push_back(static_cast<double>(rep.rhs[n]));
    }
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["residual"] = rep.max_residual();
    j["residual_by_order"] = rep.residual;
    if constexpr (std::is_same_v<Scalar, Rational>) {
        json el = json::array(), er = json::array();
        for (int n = 0; n <= order; ++n) {
            el.push_back(rep.lhs[n].str());
            er.push_back(rep.rhs[n].str());
        }
        j["lhs_exact"] = el;
        j["rhs_exact"] = er;
        j["exact_match"] = rep.lhs == rep.rhs;
    }
    return j;
}

int cmd_verify_exp(int sites, int order, std::uint64_t seed, const std::string& backend, const std::string& out_path,
                   RunContext& ctx)
{
    ctx.seeds["family"] = seed;
    const auto space = SiteSpace::random(sites, seed);
    json j = backend == "exact" ? exp_report_json(random_site_family<Rational>(order, seed), space, order)
                                : exp_report_json(random_site_family<double>(order, seed), space, order);
    j["backend"] = backend;
    j["sites"] = sites;
    j["seed"] = seed;
    ctx.emit(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_mu(FamilyArgs fa, int K, double R, const IntegrationOptions& opts, const std::string& out_path,
           RunContext& ctx)
{
    fa.resolve(ctx);
    ExpansionReport rep;
    if (fa.family == "poisson") {
        rep = mu_expansion(tilde_family(truncate(poisson_family(fa.rho, std::max(K + 1, 2), fa.d))), K, R, opts);
    } else if (fa.family == "kirkwood") {
        const auto g = fa.pair();
        rep = mu_expansion(tilde_family(truncate(kirkwood_family(fa.rho, g, std::max(K + 1, 2)))), K, R,
                           options_for(g, opts));
    } else {
        const auto fam = fa.empirical.build(std::max(K + 1, 3), ctx);
        MuHatOptions mo;
        mo.K = K;
        mo.R = R;
        mo.integration = opts;
        mo.diagnostics = false;
        const auto hat = mu_hat(fam, mo);
        rep = hat.expansion;
        ctx.extra["se_mu"] = hat.se_mu;
    }
    ctx.emit(out_path, expansion_csv(rep));
    summarize("mu", rep, out_path, ctx);
    return 0;
}

int cmd_pressure(FamilyArgs fa, int K, double R, const IntegrationOptions& opts, const std::string& out_path,
                 RunContext& ctx)
{
    fa.resolve(ctx);
    ExpansionReport rep;
    if (fa.family == "poisson") {
        rep = pressure_expansion(truncate(poisson_family(fa.rho, std::max(K + 1, 1), fa.d)), K, R, opts);
    } else if (fa.family == "kirkwood") {
        const auto g = fa.pair();
        rep = pressure_expansion(truncate(kirkwood_family(fa.rho, g, std::max(K + 1, 2))), K, R,
                                 options_for(g, opts));
    } else {
        const auto fam = fa.empirical.build(std::max(K + 1, 3), ctx);
        rep = pressure_expansion(truncate(fam.family()), K, R, options_for(fam.pair_function(), opts));
    }
    ctx.emit(out_path, expansion_csv(rep));
    summarize("p", rep, out_path, ctx);
    return 0;
}

int cmd_kirkwood_mu(const FamilyArgs& fa, int K, double R, const IntegrationOptions& opts,
                    const std::string& out_path, RunContext& ctx)
{
    const auto g = fa.pair();
    const auto cmp = compare_kirkwood_mu(fa.rho, g, K, R, opts);
    std::ostringstream ss;
    ss << "k,recursion,closed_form,graphs,rooted_graphs,std_err,discrepancy\n";
    for (int k = 0; k < K; ++k) {
        const double rec = cmp.recursion.terms[k];
        const double gr = cmp.graphs.terms[k];
        const double scale = std::max({std::abs(rec), std::abs(gr), 1e-300});
        const double se = std::max({cmp.recursion.std_errs[k], cmp.closed_form.std_errs[k], cmp.graphs.std_errs[k],
                                    cmp.rooted_graphs.std_errs[k]});
        ss << k + 1 << ',' << format_double(rec) << ',' << format_double(cmp.closed_form.terms[k]) << ','
           << format_double(gr) << ',' << format_double(cmp.rooted_graphs.terms[k]) << ',' << format_double(se)
           << ',' << format_double(std::abs(gr - rec) / scale) << '\n';
        if (std::abs(gr - rec) > 1e-6 * scale + 3.0 * se)
            warn("k = " + std::to_string(k + 1) + ": graph expansion and tilde recursion disagree");
    }
    ctx.emit(out_path, ss.str());
    ctx.extra["mu_recursion"] = cmp.recursion.value();
    ctx.extra["mu_graphs"] = cmp.graphs.value();
    if (!out_path.empty())
        ctx.out << "mu (recursion) = " << format_double(cmp.recursion.value())
                << "\nmu (graphs) = " << format_double(cmp.graphs.value()) << '\n';
    return 0;
}

struct SampleArgs {
    std::string potential = "hard-rod";
    double sigma = 1.0;
    double epsilon = 1.0;
    double rc = 1.5;
    double z = std::nan("");
    double mu = std::nan("");
    double L = 200.0;
    int d = 1;
    std::int64_t sweeps = 100000;
    std::int64_t burn = 10000;
    std::int64_t thin = 50;
    std::uint64_t seed = 42;
    std::size_t moves_per_sweep = 0;
    bool check = false;
};

int cmd_sample(const SampleArgs& a, const std::string& out_path, RunContext& ctx)
{
    ChainSettings s;
    if (std::isnan(a.z) == std::isnan(a.mu))
        throw ValidationError("give exactly one of --z and --mu");
    s.z = std::isnan(a.z) ? std::exp(a.mu) : a.z;
    if (a.potential == "ideal")
        s.potential = ideal_potential();
    else if (a.potential == "hard-rod" || a.potential == "hard-core" || a.potential == "hard-sphere")
        s.potential = hard_core_potential(a.sigma);
    else if (a.potential == "square-shoulder")
        s.potential = square_shoulder_potential(a.sigma, a.epsilon, a.rc);
    else
        throw ValidationError("unknown potential " + a.potential);
    s.L = a.L;
    s.d = a.d;
    s.sweeps = a.sweeps;
    s.burn_in = a.burn;
    s.thin = a.thin;
    s.seed = a.seed;
    s.moves_per_sweep = a.moves_per_sweep;
    s.check_invariants = a.check;
    ctx.seeds["chain"] = a.seed;

    std::ostringstream body;
    const auto stats = run_chain(s, [&](const Configuration& c, std::int64_t sweep) {
        json rec;
        json pts = json::array();
        for (const auto& p : c.points) {
            json x = json::array();
            for (int i = 0; i < c.d; ++i)
                x.push_back(p[i]);
            pts.push_back(std::move(x));
        }
        rec["points"] = std::move(pts);
        rec["L"] = c.L;
        rec["d"] = c.d;
        rec["sweep"] = sweep;
        body << rec.dump() << '\n';
    });
    double mean_n = 0.0;
    for (auto n : stats.n_trace)
        mean_n += n;
    if (!stats.n_trace.empty())
        mean_n /= static_cast<double>(stats.n_trace.size());
    const double volume = std::pow(a.L, a.d);
    json summary = {{"emitted", stats.emitted},
                    {"moves_per_sweep", stats.moves_per_sweep},
                    {"mean_N", mean_n},
                    {"density", mean_n / volume},
                    {"iat", stats.iat},
                    {"ess", stats.ess},
                    {"acceptance",
                     {{"birth", stats.acceptance_rate(MoveKind::birth)},
                      {"death", stats.acceptance_rate(MoveKind::death)},
                      {"translate", stats.acceptance_rate(MoveKind::translate)}}}};
    ctx.extra["chain"] = summary;
    ctx.emit(out_path, body.str());
    ctx.out << summary.dump() << '\n';
    return 0;
}

int cmd_estimate_mu(const EmpiricalArgs& ea, int K, double R, int closure, bool diag, int diag_orders,
                    const IntegrationOptions& opts, const std::string& out_path, RunContext& ctx)
{
    const auto fam = ea.build(closure, ctx);
    MuHatOptions mo;
    mo.K = K;
    mo.R = R;
    mo.integration = opts;
    mo.diagnostics = diag;
    mo.diagnostic_orders = diag_orders;
    const auto rep = mu_hat(fam, mo);
    json j;
    j["rho_hat"] = rep.rho_hat;
    j["se_rho"] = rep.se_rho;
    j["terms"] = rep.expansion.terms;
    j["std_errs"] = rep.expansion.std_errs;
    j["R_halved_terms"] = rep.expansion.r_halved_terms;
    j["mu_hat"] = rep.mu_hat;
    j["se_mu"] = rep.se_mu;
    j["truncation_err"] = rep.truncation_err;
    j["k1_direct"] = rep.k1_direct;
    j["excess"] = rep.mu_hat - std::log(rep.rho_hat);
    j["order"] = K;
    j["radius"] = R;
    j["hard_core"] = fam.hard_core;
    j["n_configs"] = fam.n_configs;
    j["cutoff_warning"] = rep.cutoff_warning;
    if (rep.diagnostics) {
        const auto& d = *rep.diagnostics;
        j["diagnostics"] = {{"D", d.D},        {"q", d.q},           {"q0", d.q0},
                            {"convergent", d.convergent}, {"integrals", d.integrals}, {"xi_hat", rep.xi_hat}};
    } else {
        j["diagnostics"] = nullptr;
    }
    ctx.emit(out_path, j.dump(2) + "\n");
    ctx.out << "mu_hat = " << format_double(rep.mu_hat) << " +- " << format_double(rep.se_mu) << '\n';
    return 0;
}

const std::vector<std::string> kSubcommands = {"combinatorics", "verify-exp", "mu",         "kirkwood-mu",
                                               "pressure",      "sample",     "estimate-mu"};

/// Splices config-file pairs in front of the command-line flags of the
/// subcommand so that later (command-line) values win.
std::vector<std::string> with_config(const std::vector<std::string>& args, std::string& config_path)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty())
        return args;
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(config_path))
        injected.push_back("--" + key + "=" + value);
    auto pos = std::find_first_of(args.begin(), args.end(), kSubcommands.begin(), kSubcommands.end());
    std::vector<std::string> result(args.begin(), pos == args.end() ? pos : pos + 1);
    result.insert(result.end(), injected.begin(), injected.end());
    if (pos != args.end())
        result.insert(result.end(), pos + 1, args.end());
    return result;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"icx: inverse cluster expansion toolkit", "icx"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.set_version_flag("--version", std::string("icx ") + kVersion + " (interface " + kInterfaceVersion + ")");
    app.require_subcommand(1);
    app.fallthrough();

    int workers = 1;
    std::string config_flag;
    app.add_option("--workers", workers, "worker threads for integrals")->check(CLI::PositiveNumber);
    app.add_option("--config", config_flag, "flat key = value file; flags take precedence");

    std::string out_path;
    IntegrationArgs integ;

    auto* comb = app.add_subcommand("combinatorics", "exact coefficient, total-partition and constant tables");
    bool check = false, totals = false, superstable = false;
    int kmax = 12, mmax = 5;
    double D = std::nan(""), q = 0.0, mu = 0.0, B = 0.0, C_u = 1.0;
    comb->add_flag("--check-coefficients", check, "compare the Bell recursion with the closed coefficients");
    comb->add_option("--kmax", kmax, "largest order k");
    comb->add_flag("--totals", totals, "print the total-partition sequence");
    comb->add_option("--mmax", mmax, "largest m for --totals");
    comb->add_option("--D", D, "print convergence constants for this D");
    comb->add_option("--q", q, "q for --D");
    comb->add_flag("--superstable", superstable, "superstable constants from --mu, --B, --Cu");
    comb->add_option("--mu", mu, "chemical potential");
    comb->add_option("--B", B, "stability constant");
    comb->add_option("--Cu", C_u, "integral of |exp(-u) - 1|");
    comb->add_option("--out", out_path, "output file");

    auto* vexp = app.add_subcommand("verify-exp", "exponential representation on random site families");
    int sites = 4, order = 8;
    std::uint64_t vseed = 7;
    std::string backend = "exact";
    vexp->add_option("--sites", sites, "number of sites")->check(CLI::Range(1, SiteSpace::kMaxSites));
    vexp->add_option("--order", order, "graded order")->check(CLI::Range(0, 8));
    vexp->add_option("--seed", vseed, "family seed");
    vexp->add_option("--backend", backend, "exact or f64")->check(CLI::IsMember({"exact", "f64"}));
    vexp->add_option("--out", out_path, "output file");

    int K = 2;
    double R = 10.0;
    FamilyArgs fam_mu, fam_p, fam_k;
    auto* mu_cmd = app.add_subcommand("mu", "chemical-potential expansion");
    fam_mu.add(mu_cmd);
    mu_cmd->add_option("--order", K, "expansion order K");
    mu_cmd->add_option("--radius", R, "integration radius R");
    integ.add(mu_cmd);
    mu_cmd->add_option("--out", out_path, "CSV output");

    auto* kw = app.add_subcommand("kirkwood-mu", "Kirkwood-closure mu terms by recursion, closed form and graphs");
    fam_k.family = "kirkwood";
    kw->add_option("--g", fam_k.g, "pair function: ideal, hard-rod, hard-sphere, gaussian");
    kw->add_option("--sigma", fam_k.sigma, "hard-core diameter");
    kw->add_option("--a", fam_k.a, "Gaussian Mayer amplitude");
    kw->add_option("--s", fam_k.s, "Gaussian Mayer width");
    kw->add_option("--d", fam_k.d, "dimension")->check(CLI::Range(1, 3));
    kw->add_option("--rho", fam_k.rho, "density");
    kw->add_option("--order", K, "expansion order K")->check(CLI::Range(1, 5));
    kw->add_option("--radius", R, "integration radius R");
    integ.add(kw);
    kw->add_option("--out", out_path, "CSV output")->required();

    auto* pr = app.add_subcommand("pressure", "pressure expansion");
    fam_p.add(pr);
    pr->add_option("--order", K, "expansion order K");
    pr->add_option("--radius", R, "integration radius R");
    integ.add(pr);
    pr->add_option("--out", out_path, "CSV output");

    auto* smp = app.add_subcommand("sample", "grand-canonical Monte Carlo");
    SampleArgs sa;
    smp->add_option("--potential", sa.potential, "ideal, hard-rod, hard-sphere or square-shoulder");
    smp->add_option("--sigma", sa.sigma, "hard-core diameter");
    smp->add_option("--epsilon", sa.epsilon, "shoulder height");
    smp->add_option("--rc", sa.rc, "shoulder range");
    smp->add_option("--z", sa.z, "activity");
    smp->add_option("--mu", sa.mu, "chemical potential (z = exp(mu))");
    smp->add_option("--L", sa.L, "box side");
    smp->add_option("--d", sa.d, "dimension")->check(CLI::Range(1, 3));
    smp->add_option("--sweeps", sa.sweeps, "total sweeps");
    smp->add_option("--burn", sa.burn, "burn-in sweeps");
    smp->add_option("--thin", sa.thin, "emit every thin-th sweep");
    smp->add_option("--seed", sa.seed, "chain seed");
    smp->add_option("--moves-per-sweep", sa.moves_per_sweep, "fixed sweep length (0: from burn-in)");
    smp->add_flag("--check-invariants", sa.check, "verify the hard core after every accepted move");
    smp->add_option("--out", out_path, "JSONL output")->required();

    auto* est = app.add_subcommand("estimate-mu", "mu-hat from sampled configurations");
    EmpiricalArgs ea;
    int closure = 3, diag_orders = 2;
    bool no_diag = false;
    ea.add(est, true);
    est->add_option("--order", K, "expansion order K (at most 2)");
    est->add_option("--radius", R, "integration radius R");
    est->add_option("--closure", closure, "Kirkwood closure order");
    est->add_option("--diagnostic-orders", diag_orders, "orders in the convergence diagnostic");
    est->add_flag("--no-diagnostics", no_diag, "skip the convergence diagnostic");
    integ.add(est);
    est->add_option("--out", out_path, "JSON output")->required();

    RunContext ctx{out, err, args, {}};
    auto previous = set_warning_handler([&err](const std::string& m) { err << "warning: " << m << '\n'; });
    struct Restore {
        WarningHandler h;
        ~Restore() { set_warning_handler(std::move(h)); }
    } restore{std::move(previous)};

    try {
        auto argv = with_config(args, ctx.config_path);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        ctx.command = sub;
        const auto name = sub->get_name();
        if (name == "combinatorics")
            return cmd_combinatorics(check, kmax, totals, mmax, D, q, superstable, mu, B, C_u, out_path, ctx);
        if (name == "verify-exp")
            return cmd_verify_exp(sites, order, vseed, backend, out_path, ctx);
        if (name == "mu")
            return cmd_mu(fam_mu, K, R, integ.options(workers, ctx), out_path, ctx);
        if (name == "kirkwood-mu")
            return cmd_kirkwood_mu(fam_k, K, R, integ.options(workers, ctx), out_path, ctx);
        if (name == "pressure")
            return cmd_pressure(fam_p, K, R, integ.options(workers, ctx), out_path, ctx);
        if (name == "sample")
            return cmd_sample(sa, out_path, ctx);
        if (name == "estimate-mu")
            return cmd_estimate_mu(ea, K, R, closure, !no_diag, diag_orders, integ.options(workers, ctx), out_path,
                                   ctx);
        err << "error: unknown subcommand " << name << '\n';
        return 1;
    } catch (const NumericalGuardError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace icx::cli
