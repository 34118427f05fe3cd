// faddeeva.hpp: scaled complex error function w(z) = exp(-z^2) erfc(-iz).
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rmx/numerics.hpp"

namespace rmx {

/// Faddeeva function w(z), accurate to ~1e-13 relative over the full plane.
/// Rational (Weideman) expansion for moderate |z|, continued fraction for
/// large |z|, reflection formula for the lower half plane.
Complex faddeeva_w(Complex z);

}  // namespace rmx
