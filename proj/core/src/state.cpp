// state.cpp: reduced-state validation and transfer-map application.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/state.hpp"

#include <cmath>

namespace rmx {

void ReducedState::validate(double tol) const {
  if (!std::isfinite(pp) || !std::isfinite(mm) || !std::isfinite(pm.real()) ||
      !std::isfinite(pm.imag()))
    throw std::invalid_argument("reduced state has non-finite entries");
  if (std::abs(trace() - 1.0) > tol)
    throw std::invalid_argument("reduced state trace differs from 1");
  if (pp < -tol || mm < -tol)
    throw std::invalid_argument("reduced state has a negative diagonal");
  const double det = pp * mm - std::norm(pm);
  if (det < -tol)
    throw std::invalid_argument("reduced state is not positive semidefinite");
}

Mat2c TransferTensor::apply(const Mat2c& rho) const {
  Mat2c out;
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) {
      Complex acc(0.0, 0.0);
      for (int b = 0; b < 2; ++b)
        for (int g = 0; g < 2; ++g) acc += at(a, b, g, d) * rho.at(b, g);
      out.at(a, d) = acc;
    }
  return out;
}

ProbMatrix TransferTensor::probabilities() const {
  ProbMatrix out;
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) out.at(a, d) = at(a, d, d, a).real();
  return out;
}

}  // namespace rmx
