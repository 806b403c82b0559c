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

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "icx/core.hpp"

namespace icx {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt factorial(int n);
BigInt binomial(int n, int k);

/// Bell numbers via the Bell triangle.
BigInt bell_number(int n);
/// Stirling numbers of the second kind via the standard recurrence.
BigInt stirling2(int n, int k);

/// Polynomial in two commuting symbols D and q with rational coefficients,
/// stored sparsely as (deg_D, deg_q) -> coefficient. Zero terms are never
/// stored, so equality is structural.
class BivariatePolynomial {
  public:
    using Exponents = std::pair<int, int>;

    BivariatePolynomial() = default;
    BivariatePolynomial(int c) : BivariatePolynomial(Rational(c)) {}  // NOLINT
    BivariatePolynomial(const Rational& c);                           // NOLINT

    static BivariatePolynomial monomial(Rational c, int deg_d, int deg_q);
    static BivariatePolynomial D() { return monomial(1, 1, 0); }
    static BivariatePolynomial q() { return monomial(1, 0, 1); }

    const std::map<Exponents, Rational>& terms() const { return terms_; }
    Rational coefficient(int deg_d, int deg_q) const;
    bool is_zero() const { return terms_.empty(); }
    double evaluate(double d, double q) const;
    std::string to_string() const;

    BivariatePolynomial& operator+=(const BivariatePolynomial& o);
    BivariatePolynomial& operator-=(const BivariatePolynomial& o);
    BivariatePolynomial& operator*=(const BivariatePolynomial& o);

    friend BivariatePolynomial operator+(BivariatePolynomial a, const BivariatePolynomial& b) { return a += b; }
    friend BivariatePolynomial operator-(BivariatePolynomial a, const BivariatePolynomial& b) { return a -= b; }
    friend BivariatePolynomial operator*(BivariatePolynomial a, const BivariatePolynomial& b) { return a *= b; }
    friend bool operator==(const BivariatePolynomial&, const BivariatePolynomial&) = default;

  private:
    void add_term(const Exponents& e, const Rational& c);
    std::map<Exponents, Rational> terms_;
};

/// Complete Bell polynomials B_0..B_k of x_1..x_k (x[0] holds x_1), by
/// B_{j+1} = sum_i C(j,i) B_{j-i} x_{i+1}, B_0 = 1.
template <class Scalar>
std::vector<Scalar> bell_polynomials(std::span<const Scalar> x)
{
    const int k = static_cast<int>(x.size());
    std::vector<Scalar> b(k + 1, Scalar(0));
    b[0] = Scalar(1);
    for (int j = 0; j < k; ++j) {
        Scalar acc(0);
        for (int i = 0; i <= j; ++i)
            acc += Scalar(Rational(binomial(j, i))) * b[j - i] * x[i];
        b[j + 1] = acc;
    }
    return b;
}

template <class Scalar>
Scalar bell_polynomial(std::span<const Scalar> x)
{
    if (x.empty())
        throw ValidationError("bell_polynomial needs at least one argument");
    if (x.size() > 64)
        throw SizeLimitError("bell_polynomial order capped at 64");
    return bell_polynomials(x).back();
}

/// Number of total partitions b_0..b_{m_max}: b_0 = 0, b_1 = b_2 = 1,
/// b_{v+1} = (v+2) b_v + 2 sum_{j=2}^{v-1} C(v,j) b_j b_{v-j+1}.
std::vector<BigInt> total_partition_sequence(int m_max);

/// (k!/v!) C(k-1, v-1) b_v, zero for v = 0 or v > k.
Rational a_coefficient(int nu, int k);

/// w_1 = D q, w_k = B_k(w_1, ..., w_{k-1}, k! D q^k). Works for any scalar
/// that is a commutative ring over the rationals; pass BivariatePolynomial
/// symbols for the symbolic expansion.
template <class Scalar>
std::vector<Scalar> w_bounds(int k_max, const Scalar& d, const Scalar& q)
{
    if (k_max < 1)
        throw ValidationError("w_bound order must be >= 1");
    std::vector<Scalar> w;
    w.reserve(k_max);
    Scalar q_pow = q;
    for (int k = 1; k <= k_max; ++k) {
        Scalar top = Scalar(Rational(factorial(k))) * d * q_pow;
        if (k == 1) {
            w.push_back(top);
        } else {
            std::vector<Scalar> args(w.begin(), w.end());
            args.push_back(top);
            w.push_back(bell_polynomial<Scalar>(args));
        }
        q_pow *= q;
    }
    return w;
}

template <class Scalar>
Scalar w_bound(int k, const Scalar& d, const Scalar& q)
{
    return w_bounds(k, d, q).back();
}

/// q^k sum_v a_v^(k) D^v.
template <class Scalar>
Scalar coefficient_expansion(int k, const Scalar& d, const Scalar& q)
{
    Scalar sum(0);
    Scalar d_pow = d;
    for (int nu = 1; nu <= k; ++nu) {
        sum += Scalar(a_coefficient(nu, k)) * d_pow;
        d_pow *= d;
    }
    Scalar q_pow(1);
    for (int i = 0; i < k; ++i)
        q_pow *= q;
    return q_pow * sum;
}

struct ConvergenceConstants {
    double D = 0.0;
    double q = 0.0;
    double zeta = zeta_constant();
    double q0 = 0.25;
    double M = 1.0;

    /// q0 = 1/(2(2 + zeta D)).
    static double q0_for(double D) { return 1.0 / (2.0 * (2.0 + zeta_constant() * D)); }
    /// Constants for given (D, q) with q0 derived and M calibrated.
    static ConvergenceConstants make(double D, double q);
    bool convergent() const { return q < q0; }
};

/// Smallest M with b_m <= M m^{m-1} zeta^m e^{-m} on m = 1..m_max.
double calibrated_M(int m_max = 20);

/// (k-1)! M (1 + zeta D)^k q^k.
double tilde_integral_bound(int k, const ConvergenceConstants& c);

/// Exact left side of the tilde bound before the asymptotic step:
/// sum_v C(k,v) (k-1)!/(v-1)! b_v D^v.
Rational tilde_bound_polynomial(int k, const Rational& d);

struct SuperstableConstants {
    double q_bar = 0.0;
    double D = 0.0;  // NaN when q_bar >= 1/2
    double q = 0.0;  // NaN when q_bar >= 1/2
    double q0 = 0.0;
    bool defined = false;       // q_bar < 1/2
    bool admissible = false;    // activity condition for the superstable case
    bool q_below_q0 = false;
};

/// Constants for a superstable pair interaction at chemical potential mu,
/// stability constant B and C(u) = int |e^{-u} - 1|. D is taken as
/// e^mu e^{-2B} / (1 - 2 q_bar); the two-factor form with a cancelling
/// (1 - q_bar) gives the same value.
SuperstableConstants superstable_constants(double mu, double B, double C_u);

}  // namespace icx
