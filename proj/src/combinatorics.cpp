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

#include "icx/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace icx {

BigInt factorial(int n)
{
    if (n < 0)
        throw ValidationError("factorial of a negative number");
    BigInt r = 1;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

BigInt binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

BigInt bell_number(int n)
{
    if (n < 0)
        throw ValidationError("bell_number of a negative number");
    std::vector<BigInt> row{1};
    for (int i = 0; i < n; ++i) {
        std::vector<BigInt> next{row.back()};
        for (const auto& v : row)
            next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

BigInt stirling2(int n, int k)
{
    if (n < 0 || k < 0)
        return 0;
    std::vector<std::vector<BigInt>> s(n + 1, std::vector<BigInt>(k + 1, 0));
    s[0][0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= std::min(i, k); ++j)
            s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
    return s[n][k];
}

// ---------------------------------------------------------------------------

BivariatePolynomial::BivariatePolynomial(const Rational& c)
{
    add_term({0, 0}, c);
}

BivariatePolynomial BivariatePolynomial::monomial(Rational c, int deg_d, int deg_q)
{
    BivariatePolynomial p;
    p.add_term({deg_d, deg_q}, c);
    return p;
}

void BivariatePolynomial::add_term(const Exponents& e, const Rational& c)
{
    if (c == 0)
        return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

Rational BivariatePolynomial::coefficient(int deg_d, int deg_q) const
{
    auto it = terms_.find({deg_d, deg_q});
    return it == terms_.end() ? Rational(0) : it->second;
}

double BivariatePolynomial::evaluate(double d, double q) const
{
    double sum = 0.0;
    for (const auto& [e, c] : terms_)
        sum += static_cast<double>(c) * std::pow(d, e.first) * std::pow(q, e.second);
    return sum;
}

std::string BivariatePolynomial::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first)
            os << " + ";
        first = false;
        os << c;
        if (e.first)
            os << "*D^" << e.first;
        if (e.second)
            os << "*q^" << e.second;
    }
    return os.str();
}

BivariatePolynomial& BivariatePolynomial::operator+=(const BivariatePolynomial& o)
{
    for (const auto& [e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

BivariatePolynomial& BivariatePolynomial::operator-=(const BivariatePolynomial& o)
{
    for (const auto& [e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

BivariatePolynomial& BivariatePolynomial::operator*=(const BivariatePolynomial& o)
{
    BivariatePolynomial out;
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : o.terms_)
            out.add_term({ea.first + eb.first, ea.second + eb.second}, ca * cb);
    *this = std::move(out);
    return *this;
}

// ---------------------------------------------------------------------------

std::vector<BigInt> total_partition_sequence(int m_max)
{
    if (m_max < 0)
        throw ValidationError("total_partition_sequence needs m_max >= 0");
    std::vector<BigInt> b(std::max(m_max + 1, 3), 0);
    b[0] = 0;
    b[1] = 1;
    b[2] = 1;
    for (int v = 2; v + 1 <= m_max; ++v) {
        BigInt acc = BigInt(v + 2) * b[v];
        for (int j = 2; j <= v - 1; ++j)
            acc += 2 * binomial(v, j) * b[j] * b[v - j + 1];
        b[v + 1] = acc;
    }
    b.resize(m_max + 1);
    return b;
}

Rational a_coefficient(int nu, int k)
{
    if (k < 0 || nu < 0)
        throw ValidationError("a_coefficient indices must be non-negative");
    if (nu == 0 || nu > k)
        return 0;
    const auto b = total_partition_sequence(nu);
    return Rational(factorial(k), factorial(nu)) * Rational(binomial(k - 1, nu - 1))
           * Rational(b[nu]);
}

ConvergenceConstants ConvergenceConstants::make(double D, double q)
{
    ConvergenceConstants c;
    c.D = D;
    c.q = q;
    c.q0 = q0_for(D);
    c.M = calibrated_M();
    return c;
}

double calibrated_M(int m_max)
{
    const auto b = total_partition_sequence(m_max);
    const long double zeta = zeta_constant();
    long double best = 0.0L;
    for (int m = 1; m <= m_max; ++m) {
        // b_m e^m / (m^{m-1} zeta^m), evaluated in logs to stay in range.
        long double log_ratio = std::log(static_cast<long double>(b[m])) + m
                                - (m - 1) * std::log(static_cast<long double>(m))
                                - m * std::log(zeta);
        best = std::max(best, std::exp(log_ratio));
    }
    return static_cast<double>(best);
}

double tilde_integral_bound(int k, const ConvergenceConstants& c)
{
    if (k < 1)
        throw ValidationError("tilde_integral_bound needs k >= 1");
    return std::tgamma(static_cast<double>(k)) * c.M * std::pow(1.0 + c.zeta * c.D, k)
           * std::pow(c.q, k);
}

Rational tilde_bound_polynomial(int k, const Rational& d)
{
    const auto b = total_partition_sequence(k);
    Rational sum = 0;
    Rational d_pow = d;
    for (int v = 1; v <= k; ++v) {
        sum += Rational(binomial(k, v)) * Rational(factorial(k - 1), factorial(v - 1))
               * Rational(b[v]) * d_pow;
        d_pow *= d;
    }
    return sum;
}

SuperstableConstants superstable_constants(double mu, double B, double C_u)
{
    if (!(B >= 0.0) || !(C_u > 0.0))
        throw ValidationError("superstable_constants needs B >= 0 and C(u) > 0");
    SuperstableConstants s;
    const double activity = std::exp(mu);
    s.q_bar = activity * std::exp(2.0 * B + 1.0) * C_u;
    s.defined = s.q_bar < 0.5;
    if (!s.defined) {
        s.D = s.q = s.q0 = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.D = activity * std::exp(-2.0 * B) / (1.0 - 2.0 * s.q_bar);
    s.q = s.q_bar / (1.0 - s.q_bar);
    s.q0 = ConvergenceConstants::q0_for(s.D);
    const double zd = zeta_constant() * s.D;
    const double bound = std::min(1.0 / 3.0, 1.0 / (1.0 + 2.0 / (2.0 + zd)));
    s.admissible = s.q_bar < bound;
    s.q_below_q0 = s.q < s.q0;
    return s;
}

}  // namespace icx
