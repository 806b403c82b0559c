#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "icx/combinatorics.hpp"
#include "icx/partition.hpp"

using namespace icx;

namespace {

int count_stream(int n, std::optional<int> k = std::nullopt)
{
    auto s = enumerate_partitions(n, k);
    int c = 0;
    while (s.advance())
        ++c;
    return c;
}

bool is_canonical(const SetPartition& p)
{
    std::vector<int> seen(p.n, 0);
    int prev_min = -1;
    for (const auto& b : p.blocks) {
        if (b.empty() || !std::is_sorted(b.begin(), b.end()))
            return false;
        if (b.front() <= prev_min)
            return false;
        prev_min = b.front();
        for (int e : b)
            ++seen[e];
    }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

// Structural count of total partitions: a hierarchy on S is either a leaf
// (|S| = 1) or a split of S into >= 2 blocks, each carrying a hierarchy.
BigInt count_hierarchies(int m)
{
    if (m == 1)
        return 1;
    BigInt total = 0;
    auto s = enumerate_partitions(m);
    while (auto p = s.next()) {
        if (p->block_count() < 2)
            continue;
        BigInt prod = 1;
        for (const auto& b : p->blocks)
            prod *= count_hierarchies(static_cast<int>(b.size()));
        total += prod;
    }
    return total;
}

// Bell polynomial as a literal sum over set partitions. Partitions are
// grouped by their sorted block-size signature before multiplying.
Rational bell_by_enumeration(const std::vector<Rational>& x)
{
    const int k = static_cast<int>(x.size());
    std::map<std::vector<int>, long long> signature_count;
    auto s = enumerate_partitions(k);
    std::vector<int> sizes;
    while (s.advance()) {
        sizes.assign(s.current_blocks(), 0);
        for (int v : s.growth_string())
            ++sizes[v];
        std::sort(sizes.begin(), sizes.end());
        ++signature_count[sizes];
    }
    Rational total = 0;
    for (const auto& [sig, count] : signature_count) {
        Rational prod = 1;
        for (int size : sig)
            prod *= x[size - 1];
        total += prod * count;
    }
    return total;
}

}  // namespace

TEST_CASE("enumerate_partitions small cases")
{
    auto s = enumerate_partitions(1);
    auto p = s.next();
    REQUIRE(p);
    CHECK(p->to_string() == "{{1}}");
    CHECK_FALSE(s.next());

    CHECK(count_stream(3) == 5);
    CHECK(count_stream(4, 2) == 7);
    CHECK(count_stream(0) == 0);
}

TEST_CASE("enumerate_partitions counts match the Bell triangle and Stirling numbers")
{
    for (int n = 1; n <= 10; ++n) {
        CHECK(BigInt(count_stream(n)) == bell_number(n));
        for (int k = 1; k <= n; ++k)
            CHECK(BigInt(count_stream(n, k)) == stirling2(n, k));
    }
}

TEST_CASE("each partition appears once, canonically ordered")
{
    for (int n = 1; n <= 7; ++n) {
        std::set<std::vector<std::vector<int>>> seen;
        auto s = enumerate_partitions(n);
        while (auto p = s.next()) {
            CHECK(is_canonical(*p));
            CHECK(seen.insert(p->blocks).second);
        }
    }
}

TEST_CASE("enumerate_partitions guards")
{
    CHECK_THROWS_AS(enumerate_partitions(13), SizeLimitError);
    CHECK_NOTHROW(enumerate_partitions(13, std::nullopt, PartitionLimits{13}));
    CHECK_THROWS_AS(enumerate_partitions(4, 5), ValidationError);
    CHECK_THROWS_AS(enumerate_partitions(4, 0), ValidationError);
}

TEST_CASE("bell_polynomial examples")
{
    using P = BivariatePolynomial;
    const P x1 = P::D(), x2 = P::q();
    std::vector<P> one{x1};
    CHECK(bell_polynomial<P>(one) == x1);
    std::vector<P> two{x1, x2};
    CHECK(bell_polynomial<P>(two) == x1 * x1 + x2);
    std::vector<Rational> ones{1, 1, 1};
    CHECK(bell_polynomial<Rational>(ones) == 5);
}

TEST_CASE("bell_polynomial recursion equals the partition sum for k <= 12")
{
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> num(-7, 7), den(1, 5);
    for (int k = 1; k <= 12; ++k) {
        std::vector<Rational> x;
        for (int i = 0; i < k; ++i)
            x.emplace_back(num(gen), den(gen));
        CHECK(bell_polynomial<Rational>(x) == bell_by_enumeration(x));
    }
}

TEST_CASE("total partition sequence")
{
    const auto b = total_partition_sequence(6);
    CHECK(b[0] == 0);
    CHECK(b[1] == 1);
    CHECK(b[2] == 1);
    CHECK(b[3] == 4);
    CHECK(b[4] == 26);
    CHECK(b[5] == 236);
    for (int m = 1; m <= 5; ++m)
        CHECK(b[m] == count_hierarchies(m));
    CHECK(total_partition_sequence(0).size() == 1);
}

TEST_CASE("w_bound closed form")
{
    using P = BivariatePolynomial;
    const P D = P::D(), q = P::q();
    CHECK(w_bound(1, D, q) == D * q);
    CHECK(w_bound(2, D, q) == D * D * q * q + P(2) * D * q * q);
    const auto w = w_bounds(12, D, q);
    for (int k = 1; k <= 12; ++k)
        CHECK(w[k - 1] == coefficient_expansion(k, D, q));
}

TEST_CASE("a_coefficient special values")
{
    for (int k = 1; k <= 12; ++k) {
        CHECK(a_coefficient(1, k) == Rational(factorial(k)));
        CHECK(a_coefficient(0, k) == 0);
        CHECK(a_coefficient(k + 1, k) == 0);
    }
    for (int k = 1; k <= 11; ++k)
        CHECK(a_coefficient(2, k + 1) == Rational(factorial(k + 1) * k, 2));
}

TEST_CASE("tilde_integral_bound")
{
    ConvergenceConstants c;
    c.M = 1.0;
    c.D = 0.0;
    c.q = 0.37;
    CHECK(tilde_integral_bound(1, c) == doctest::Approx(0.37));

    // The asymptotic step: the exact polynomial never exceeds the bound
    // when M is calibrated on the same range.
    c.M = calibrated_M(10);
    c.q = 1.0;
    for (double D : {0.0, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        c.D = D;
        for (int k = 1; k <= 10; ++k) {
            const double exact = static_cast<double>(tilde_bound_polynomial(k, Rational(D)));
            const double bound = tilde_integral_bound(k, c);
            CHECK(exact <= bound * (1 + 1e-12));
        }
    }
    ConvergenceConstants lo = c, hi = c;
    lo.D = 0.3;
    hi.D = 0.9;
    for (int k = 1; k <= 8; ++k)
        CHECK(tilde_integral_bound(k, hi) >= tilde_integral_bound(k, lo));
}

TEST_CASE("convergence constants")
{
    CHECK(zeta_constant() == doctest::Approx(2.588699).epsilon(1e-6));
    CHECK(ConvergenceConstants::q0_for(0.0) == 0.25);
    double prev = ConvergenceConstants::q0_for(0.0);
    for (double D = 0.1; D < 10; D += 0.1) {
        const double q0 = ConvergenceConstants::q0_for(D);
        CHECK(q0 < prev);
        CHECK(q0 > 0.0);
        prev = q0;
    }
    CHECK(calibrated_M(20) >= calibrated_M(10));
}

TEST_CASE("superstable_constants")
{
    const double B = 0.3, C = 1.7, q_bar = 0.2;
    const double mu = std::log(q_bar / (std::exp(2 * B + 1) * C));
    CHECK(superstable_constants(mu, B, C).q_bar == doctest::Approx(q_bar).epsilon(1e-14));

    {
        const double mu3 = std::log((1.0 / 3.0) / (std::exp(1.0) * 2.0));
        auto s = superstable_constants(mu3, 0.0, 2.0);
        CHECK(s.q == doctest::Approx(0.5).epsilon(1e-12));
        CHECK_FALSE(s.admissible);
    }
    {
        const double mu1 = std::log(0.1 / (std::exp(1.0) * 1.5));
        auto s = superstable_constants(mu1, 0.0, 1.5);
        CHECK(s.q == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
        CHECK(s.D == doctest::Approx(std::exp(mu1) / 0.8).epsilon(1e-12));
        CHECK(s.defined);
        CHECK(s.admissible);
    }
    {
        auto s = superstable_constants(0.0, 0.0, 1.0);  // q_bar = e > 1/2
        CHECK_FALSE(s.defined);
        CHECK_FALSE(s.admissible);
        CHECK(std::isnan(s.D));
    }
}

TEST_CASE("subset transforms invert each other and match the Moebius formula")
{
    std::mt19937 gen(5);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
    for (int m = 1; m <= 5; ++m) {
        std::vector<Rational> moments(1u << m);
        moments[0] = 1;
        for (std::size_t i = 1; i < moments.size(); ++i)
            moments[i] = Rational(num(gen), den(gen));
        const auto cumulants = partition_inverse_on_subsets(m, moments);
        CHECK(partition_sums_on_subsets(m, cumulants) == moments);

        // c(S) = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod m(B)
        const std::uint32_t full = (1u << m) - 1;
        Rational mobius = 0;
        auto s = enumerate_partitions(m);
        while (auto p = s.next()) {
            Rational term = (p->block_count() % 2 ? 1 : -1) * Rational(factorial(p->block_count() - 1));
            for (const auto& b : p->blocks) {
                std::uint32_t mask = 0;
                for (int e : b)
                    mask |= 1u << e;
                term *= moments[mask];
            }
            mobius += term;
        }
        CHECK(cumulants[full] == mobius);
    }
}
