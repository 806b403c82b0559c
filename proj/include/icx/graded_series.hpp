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

#include <cmath>
#include <vector>

#include "icx/core.hpp"

namespace icx {

/// Truncated power series c_0 + c_1 t + ... + c_K t^K in a bookkeeping
/// parameter t. Products and exp/log never look past order K.
template <class Scalar>
class GradedSeries {
  public:
    explicit GradedSeries(int order) : c_(order + 1, Scalar(0))
    {
        if (order < 0)
            throw ValidationError("graded series order must be >= 0");
    }
    explicit GradedSeries(std::vector<Scalar> coefficients) : c_(std::move(coefficients))
    {
        if (c_.empty())
            throw ValidationError("graded series needs at least c_0");
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    Scalar& operator[](int n) { return c_.at(n); }
    const Scalar& operator[](int n) const { return c_.at(n); }
    const std::vector<Scalar>& coefficients() const { return c_; }

    GradedSeries& operator+=(const GradedSeries& o)
    {
        check_order(o);
        for (int n = 0; n <= order(); ++n)
            c_[n] += o.c_[n];
        return *this;
    }
    GradedSeries& operator-=(const GradedSeries& o)
    {
        check_order(o);
        for (int n = 0; n <= order(); ++n)
            c_[n] -= o.c_[n];
        return *this;
    }
    friend GradedSeries operator+(GradedSeries a, const GradedSeries& b) { return a += b; }
    friend GradedSeries operator-(GradedSeries a, const GradedSeries& b) { return a -= b; }

    friend GradedSeries operator*(const GradedSeries& a, const GradedSeries& b)
    {
        a.check_order(b);
        GradedSeries out(a.order());
        for (int i = 0; i <= a.order(); ++i)
            for (int j = 0; i + j <= a.order(); ++j)
                out.c_[i + j] += a.c_[i] * b.c_[j];
        return out;
    }

    /// c_n -> lambda^n c_n.
    GradedSeries scaled(const Scalar& lambda) const
    {
        GradedSeries out = *this;
        Scalar p(1);
        for (int n = 0; n <= order(); ++n) {
            out.c_[n] *= p;
            p *= lambda;
        }
        return out;
    }

    /// exp of a series with zero constant term: n e_n = sum_k k a_k e_{n-k}.
    GradedSeries exp() const
    {
        if (c_[0] != Scalar(0))
            throw ValidationError("exp needs a series without constant term");
        GradedSeries out(order());
        out.c_[0] = Scalar(1);
        for (int n = 1; n <= order(); ++n) {
            Scalar acc(0);
            for (int k = 1; k <= n; ++k)
                acc += Scalar(k) * c_[k] * out.c_[n - k];
            out.c_[n] = acc / Scalar(n);
        }
        return out;
    }

    /// log of a series with constant term one; inverse of exp().
    GradedSeries log() const
    {
        if (c_[0] != Scalar(1))
            throw ValidationError("log needs a series with constant term 1");
        GradedSeries out(order());
        for (int n = 1; n <= order(); ++n) {
            Scalar acc(0);
            for (int k = 1; k < n; ++k)
                acc += Scalar(k) * out.c_[k] * c_[n - k];
            out.c_[n] = c_[n] - acc / Scalar(n);
        }
        return out;
    }

  private:
    void check_order(const GradedSeries& o) const
    {
        if (o.order() != order())
            throw ValidationError("graded series orders differ");
    }
    std::vector<Scalar> c_;
};

}  // namespace icx
