#pragma once

#include <random>
#include <vector>

#include "hitchin/curve.hpp"
#include "hitchin/numerics.hpp"

namespace testing {

using hitchin::cplx;

// y^2 = (x-1)(x-2)(x-3)(x-4)(x-5)
inline std::vector<cplx> coeffs_12345() {
  return {-120.0, 274.0, -225.0, 85.0, -15.0, 1.0};
}

// prod (x - e) for the given roots, ascending coefficients
inline std::vector<cplx> from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> p{1.0};
  for (cplx e : roots) {
    const std::vector<cplx> lin{-e, 1.0};
    p = hitchin::num::poly_mul(p, lin);
  }
  return p;
}

inline const hitchin::curve::HyperellipticCurve& curve_12345() {
  static const auto c = hitchin::curve::HyperellipticCurve::build(coeffs_12345());
  return c;
}

inline const hitchin::curve::ThetaData& periods_12345() {
  static const auto td = hitchin::curve::period_matrix(curve_12345());
  return td;
}

inline cplx random_cplx(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double re = u(rng);
  return {re, u(rng)};
}

inline double max_abs(const hitchin::CVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const hitchin::CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
