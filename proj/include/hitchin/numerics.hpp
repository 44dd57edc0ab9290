#pragma once

// Small numerical building blocks shared by the modules: complex
// polynomials, Gauss-Legendre rules and an adaptive integrator for
// vector-valued integrands.

#include <functional>
#include <span>
#include <vector>

#include "hitchin/types.hpp"

namespace hitchin::num {

/// Horner evaluation; coefficients in ascending order.
cplx poly_eval(std::span<const cplx> coeffs, cplx x);

/// Value and first derivative.
std::pair<cplx, cplx> poly_eval_d(std::span<const cplx> coeffs, cplx x);

std::vector<cplx> poly_derivative(std::span<const cplx> coeffs);
std::vector<cplx> poly_mul(std::span<const cplx> a, std::span<const cplx> b);

/// Degree after dropping trailing coefficients with |c| <= tiny * max|c|.
int poly_degree(std::span<const cplx> coeffs, double tiny = 0.0);

/// All roots of a polynomial (ascending coefficients, nonzero leading term):
/// companion-matrix eigenvalues followed by `polish_steps` guarded Newton
/// steps on the original polynomial.
std::vector<cplx> poly_roots(std::span<const cplx> coeffs, int polish_steps = 2);

/// Smallest pairwise distance in a set of points (infinity for < 2 points).
double min_separation(std::span<const cplx> pts);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule.
const GaussRule& gauss_legendre(int n);

/// Adaptive Gauss-Legendre on [a, b] for vector integrands. Each panel is
/// accepted when the n-point estimate and the sum of the two half-panel
/// estimates agree to `tol * max(1, |I_panel|)`.
struct AdaptiveOptions {
  int order = 16;
  double tol = 1e-10;
  int max_depth = 40;
  int min_panels = 1;
};

using VecFn = std::function<CVector(double)>;

CVector integrate_adaptive(const VecFn& f, double a, double b, const AdaptiveOptions& opt = {});

/// Fixed composite rule: `panels` equal panels of `order` nodes each.
CVector integrate_composite(const VecFn& f, double a, double b, int panels, int order);

/// Distance between two unordered point sets of equal size: the pairing
/// with minimal total distance is found (exhaustively up to 8 points,
/// greedily beyond) and its largest pair distance is returned.
double matching_distance(std::span<const cplx> a, std::span<const cplx> b);
/// Same pairing rule on an explicit square cost matrix.
double matching_max_cost(const RMatrix& cost);

/// Integer power for complex scalars with exact sign behaviour under z -> -z.
cplx ipow(cplx z, int k);

}  // namespace hitchin::num
