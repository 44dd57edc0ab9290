#pragma once

// Hyperelliptic curves y^2 = P(x), P monic of odd degree 2g+1: branch data,
// analytic continuation of y, holomorphic differentials x^k dx / y
// (k = 0..g-1), period matrices, Abel maps and their jets at infinity.
//
// Near x = infinity the curve is described in the local parameter z with
// x = z^-2 and y = z^-(2g+1) w(z), w(0) = 1, w(z)^2 = z^(4g+2) P(z^-2).

#include <optional>
#include <span>
#include <vector>

#include "hitchin/types.hpp"

namespace hitchin::curve {

struct CurvePoint {
  cplx x{0.0};
  cplx y{0.0};
  bool at_infinity = false;

  static CurvePoint infinity() { return {0.0, 0.0, true}; }
};

struct CurveOptions {
  /// Accept cubic P (genus 1); used by elliptic test fixtures.
  bool allow_genus_one = false;
  /// Roots closer than this (relative to max(1, |root|)) are duplicates.
  double separation_tol = 1e-7;
};

struct QuadratureOptions {
  double tol = 1e-12;
  int order = 16;
  /// When > 0 the period integrals use this many equal panels instead of
  /// adaptive refinement (used for convergence-order studies).
  int fixed_panels = 0;
};

class HyperellipticCurve {
 public:
  /// Coefficients in ascending order; the leading one must equal 1.
  static HyperellipticCurve build(std::vector<cplx> coeffs, const CurveOptions& opt = {});

  int genus() const { return genus_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  /// Roots of P sorted by real part, ties broken by imaginary part.
  const std::vector<cplx>& branch_points() const { return roots_; }

  cplx P(cplx x) const;
  cplx dP(cplx x) const;

  double min_branch_separation() const { return min_sep_; }
  /// 1e-3 times the minimal branch-point separation.
  double exclusion_radius() const { return 1e-3 * min_sep_; }
  /// Radius used when paths are re-routed around a branch point.
  double detour_radius() const { return 0.2 * min_sep_; }
  double distance_to_branch(cplx x) const;

  /// The square root of P(x) nearest to `guess`.
  cplx sqrt_p_nearest(cplx x, cplx guess) const;
  bool on_curve(const CurvePoint& p, double rel_tol = 1e-10) const;

  /// z-chart at infinity: radius inside which the chart is used.
  double chart_radius() const { return chart_radius_; }
  /// w(z)^2 = z^(4g+2) P(z^-2) as a polynomial in u = z^2.
  cplx w_squared(cplx z) const;
  /// Point of the curve with local parameter z (z != 0).
  CurvePoint point_from_z(cplx z, cplx w) const;

 private:
  int genus_ = 0;
  std::vector<cplx> coeffs_;
  std::vector<cplx> dcoeffs_;
  std::vector<cplx> roots_;
  std::vector<cplx> w2_coeffs_;  // in u = z^2
  std::vector<cplx> w_zeros_;    // zeros of w in the z-plane
  double min_sep_ = 0.0;
  double chart_radius_ = 0.1;
};

/// y along a polyline of x values by nearest-branch continuation of sqrt(P);
/// one y per waypoint.
std::vector<cplx> continue_y(const HyperellipticCurve& c, std::span<const cplx> path, cplx y_start);

/// Straight path from xa to xb re-routed by circular arcs around branch
/// points it would pass closer than the detour radius.
std::vector<cplx> route(const HyperellipticCurve& c, cplx xa, cplx xb);

/// Polyline from base.x to target.x along which continuing base.y ends at
/// target.y: route() when that already lands on the right sheet, otherwise
/// route() with a loop around the branch point nearest to the target.
std::vector<cplx> sheet_route(const HyperellipticCurve& c, const CurvePoint& base, const CurvePoint& target);

/// Closed loop around branch point `e` starting and ending at `start`
/// (which must lie at the detour radius from e).
std::vector<cplx> loop_around(cplx e, cplx start, int pieces = 24);

struct ThetaData {
  int genus = 0;
  CMatrix tau;                // g x g
  CVector riemann_constants;  // K, attached by theta::riemann_constants
  CMatrix abel_jets;          // g x order; column l-1 holds phi_s^(l)
  CMatrix normalization;      // C with v_s = sum_k C(s,k) x^k dx/y
  CMatrix a_periods;          // A(i,k) = integral of x^k dx/y over a_i
  CMatrix b_periods;
  std::vector<int> a_signs, b_signs;
};

/// Integral of x^k dx / y, k = 0..g-1, over the segment between sorted
/// branch points p and p+1 (0-based), on an arbitrary but fixed sheet.
CVector branch_segment_integrals(const HyperellipticCurve& c, int p, const QuadratureOptions& opt = {});

/// Period matrix from the standard hyperelliptic cycles: a_i around
/// (e_{2i-1}, e_{2i}), b_i = sum_{k>=i} of the cycles around (e_{2k}, e_{2k+1}).
/// Cycle orientations are fixed by requiring a symmetric tau with positive
/// definite imaginary part.
ThetaData period_matrix(const HyperellipticCurve& c, const QuadratureOptions& opt = {});

/// Normalized differentials v (g-vector) at a finite point.
CVector normalized_differentials(const ThetaData& td, cplx x, cplx y);
/// Normalized differentials in the z-chart: v_s = f_s(z) dz, returns f(z).
CVector normalized_differentials_z(const HyperellipticCurve& c, const ThetaData& td, cplx z, cplx w);

/// Abel map: integral from base to target of the normalized differentials,
/// along an automatically routed path. Defined modulo the period lattice.
CVector abel_map(const HyperellipticCurve& c, const ThetaData& td, const CurvePoint& target,
                 const CurvePoint& base, double tol = 1e-12);

/// Abel map from infinity expressed through the local parameter z
/// (|z| below the chart radius), integrated numerically in the chart.
CVector abel_map_z(const HyperellipticCurve& c, const ThetaData& td, cplx z, double tol = 1e-13);

/// Jets phi_s^(l), l = 1..order, defined by A_s(P(z)) = sum_l phi_s^(l)/l z^l
/// for the Abel map based at infinity.
CMatrix abel_jets(const HyperellipticCurve& c, const ThetaData& td, int order);

/// Decomposes v = m + tau n with real m, n; returns the distance of (m, n)
/// to the nearest integer lattice point (max norm).
double lattice_residual(const CMatrix& tau, const CVector& v);

}  // namespace hitchin::curve
