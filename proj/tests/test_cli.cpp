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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cli.hpp"
#include "icx/core.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result icx_run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = icx::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("icx_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("helpers")
{
    CHECK(icx::cli::fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(icx::cli::fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(icx::cli::format_double(0.1) == "0.10000000000000001");
    CHECK(icx::cli::format_double(-0.0) == "0");
    CHECK(std::stod(icx::cli::format_double(M_PI)) == M_PI);

    const auto dir = scratch_dir("helpers");
    std::ofstream(dir / "a.cfg") << "# comment\nrho = 0.1\n--order=3  # trailing\n\n";
    const auto cfg = icx::cli::read_config((dir / "a.cfg").string());
    CHECK(cfg.at("rho") == "0.1");
    CHECK(cfg.at("order") == "3");
    std::ofstream(dir / "bad.cfg") << "rho 0.1\n";
    CHECK_THROWS_AS(icx::cli::read_config((dir / "bad.cfg").string()), icx::ValidationError);
}

TEST_CASE("version and usage errors")
{
    const auto v = icx_run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.3.1") != std::string::npos);
    CHECK(icx_run({}).code == 1);
    CHECK(icx_run({"bogus"}).code == 1);
    CHECK(icx_run({"mu", "--nope", "1"}).code == 1);
    CHECK(icx_run({"sample", "--z", "0.05"}).code == 1);
    CHECK(icx_run({"estimate-mu", "--configs", "x.jsonl"}).code == 1);
    CHECK(icx_run({"verify-exp", "--order", "9"}).code == 1);
    CHECK(icx_run({"mu", "--help"}).code == 0);
}

TEST_CASE("combinatorics")
{
    const auto r = icx_run({"combinatorics", "--check-coefficients", "--kmax", "10"});
    CHECK(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 11);
    for (std::size_t k = 1; k <= 10; ++k)
        CHECK(rows[k][2] == "yes");
    CHECK(icx_run({"combinatorics", "--kmax", "13"}).code == 2);

    const auto t = icx_run({"combinatorics", "--totals"});
    CHECK(t.out.find("5,236") != std::string::npos);

    // q_bar = 1/3 sits on the boundary of the admissible range.
    const auto mu = icx::cli::format_double(std::log((1.0 / 3.0) / (std::exp(1.0) * 2.0)));
    CHECK(icx_run({"combinatorics", "--superstable", "--mu", mu, "--B", "0", "--Cu", "2"}).code == 2);
}

TEST_CASE("verify-exp")
{
    const auto exact = icx_run({"verify-exp", "--sites", "3", "--order", "5", "--seed", "7"});
    REQUIRE(exact.code == 0);
    const auto j = json::parse(exact.out);
    CHECK(j["order"] == 5);
    CHECK(j["residual"] == 0.0);
    CHECK(j["exact_match"] == true);
    const auto f = json::parse(icx_run({"verify-exp", "--sites", "3", "--order", "5", "--backend", "f64"}).out);
    CHECK(f["residual"].get<double>() <= 1e-12);
}

TEST_CASE("mu for the Poisson family")
{
    const auto r = icx_run({"mu", "--family", "poisson", "--rho", "0.05", "--order", "4"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == "k");
    CHECK(rows[0][4] == "R_halved_term");
    for (std::size_t k = 1; k <= 5; ++k) {
        CHECK(std::stod(rows[k][2]) == std::log(0.05));
        if (k > 1)
            CHECK(std::stod(rows[k][1]) == 0.0);
    }
    const auto p = icx_run({"pressure", "--family", "poisson", "--rho", "0.05", "--order", "2"});
    CHECK(std::stod(csv_rows(p.out).back()[2]) == 0.05);
}

TEST_CASE("family files, config precedence and manifests")
{
    const auto dir = scratch_dir("manifest");
    std::ofstream(dir / "fam.json") << R"({"type": "poisson", "rho": 0.25})";
    std::ofstream(dir / "run.cfg") << "order = 1\nrho = 0.5\nradius = 2\n";
    const auto out = (dir / "mu.csv").string();
    const std::vector<std::string> args = {"mu", "--config", (dir / "run.cfg").string(), "--family",
                                           (dir / "fam.json").string(), "--out", out};
    const auto r = icx_run(args);
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(read(out));
    REQUIRE(rows.size() == 3);  // order 1 from the config file
    CHECK(std::stod(rows[2][2]) == std::log(0.25));  // rho from the family file beats the config value

    const auto m = json::parse(read(out + ".manifest.json"));
    CHECK(m["subcommand"] == "mu");
    CHECK(m["flags"]["order"] == "1");
    CHECK(m["flags"]["radius"] == "2");
    CHECK(m["input_hashes"].size() == 1);
    CHECK(m["output"]["hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(m["versions"]["icx"] == "0.3.1");

    auto flag_wins = args;
    flag_wins.insert(flag_wins.end(), {"--order", "2"});
    REQUIRE(icx_run(flag_wins).code == 0);
    CHECK(csv_rows(read(out)).size() == 4);

    std::ofstream(dir / "bad.cfg") << "unknown-key = 1\n";
    CHECK(icx_run({"mu", "--config", (dir / "bad.cfg").string()}).code == 1);
}

TEST_CASE("kirkwood-mu")
{
    const auto dir = scratch_dir("kirkwood");
    const auto out = (dir / "terms.csv").string();
    CHECK(icx_run({"kirkwood-mu", "--g", "hard-rod", "--order", "1"}).code == 1);
    const auto r = icx_run({"kirkwood-mu", "--g", "hard-rod", "--sigma", "1.0", "--rho", "0.05", "--order", "1",
                            "--radius", "5", "--out", out});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(read(out));
    REQUIRE(rows.size() == 2);
    for (int c = 1; c <= 4; ++c)
        CHECK(std::stod(rows[1][c]) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(fs::exists(out + ".manifest.json"));
}

TEST_CASE("sample and estimate-mu round trip")
{
    const auto dir = scratch_dir("pipeline");
    const auto configs = (dir / "configs.jsonl").string();
    const std::vector<std::string> sample = {"sample", "--potential", "ideal", "--z", "0.5", "--L", "20",
                                             "--sweeps", "2200", "--burn", "200", "--thin", "2",
                                             "--seed", "9", "--out", configs};
    REQUIRE(icx_run(sample).code == 0);
    const auto first = read(configs);
    REQUIRE(icx_run(sample).code == 0);
    CHECK(read(configs) == first);

    std::istringstream lines(first);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto rec = json::parse(line);
        CHECK(rec["L"] == 20.0);
        CHECK(rec["d"] == 1);
        CHECK(rec["sweep"].get<int>() == 200 + 2 * (n + 1));
        ++n;
    }
    CHECK(n == 1000);
    CHECK(json::parse(read(configs + ".manifest.json"))["seeds"]["chain"] == 9);

    const auto out = (dir / "mu.json").string();
    const auto r = icx_run({"estimate-mu", "--configs", configs, "--bins", "20", "--rmax", "5", "--order", "1",
                            "--radius", "5", "--no-diagnostics", "--out", out});
    REQUIRE(r.code == 0);
    const auto j = json::parse(read(out));
    for (const char* key : {"rho_hat", "se_rho", "terms", "mu_hat", "se_mu", "truncation_err", "diagnostics"})
        CHECK(j.contains(key));
    CHECK(std::abs(j["mu_hat"].get<double>() - std::log(0.5)) < 4.0 * j["se_mu"].get<double>());
    CHECK(j["hard_core"] == 0.0);
    const auto m = json::parse(read(out + ".manifest.json"));
    CHECK(m["input_hashes"][configs] ==
          "fnv1a64:" + [&] {
              std::ostringstream ss;
              ss << std::hex << std::setw(16) << std::setfill('0') << icx::cli::fnv1a(first);
              return ss.str();
          }());
}
