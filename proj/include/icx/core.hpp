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
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace icx {

inline constexpr const char* kVersion = "0.3.1";
inline constexpr const char* kInterfaceVersion = "1";

/// Points live in R^d with d <= 3; unused trailing coordinates stay zero so
/// that norms and differences are independent of d.
using Point = Eigen::Vector3d;
using PointSpan = std::span<const Point>;

/// A symmetric function of a finite tuple of points.
using TupleFunction = std::function<double(PointSpan)>;

/// Inputs that violate a documented precondition.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for this kind of input.
class UnsupportedError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// A numerical guard tripped: cost caps, jammed density, inadmissible
/// constants, degenerate densities.
class NumericalGuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SizeLimitError : public NumericalGuardError {
  public:
    using NumericalGuardError::NumericalGuardError;
};

class DegenerateDensityError : public NumericalGuardError {
  public:
    using NumericalGuardError::NumericalGuardError;
};

/// zeta = 1/(2 ln 2 - 1), the growth rate of the total-partition numbers.
inline double zeta_constant()
{
    return 1.0 / (2.0 * std::numbers::ln2 - 1.0);
}

/// Volume of the d-ball of radius r, d in {1,2,3}.
inline double ball_volume(int d, double r)
{
    switch (d) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    case 3: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
    default: throw ValidationError("dimension must be 1, 2 or 3");
    }
}

/// Non-fatal diagnostics go through one process-wide sink (stderr by
/// default). The handler must be safe to call from several threads.
using WarningHandler = std::function<void(const std::string&)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

inline Point make_point(double x, double y = 0.0, double z = 0.0)
{
    return Point{x, y, z};
}

}  // namespace icx
