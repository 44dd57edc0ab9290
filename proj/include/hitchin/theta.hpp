#pragma once

// Riemann theta function theta(z | tau) = sum_n exp(pi i n.tau.n + 2 pi i n.z)
// with termwise derivatives, Riemann constants for hyperelliptic curves based
// at infinity, and the Dubrovin formula for the power sums of the points of
// a divisor in terms of theta.

#include <span>
#include <vector>

#include "hitchin/curve.hpp"
#include "hitchin/series.hpp"
#include "hitchin/types.hpp"

namespace hitchin::theta {

struct ThetaOptions {
  /// Bound on the dropped tail, relative to the normalized lattice sum.
  double tol = 1e-14;
  /// Cap on the number of lattice points summed.
  long max_points = 4'000'000;
};

struct ThetaRequest {
  CVector z;
  CMatrix tau;
  /// Derivative multi-index (empty means no derivative).
  std::vector<int> derivative;
  double tolerance = 1e-14;
  long max_points = 4'000'000;
};

/// Ellipsoid enumeration of the lattice points contributing to theta at z.
struct Truncation {
  double radius = 0.0;
  long points = 0;
};

cplx riemann_theta(const ThetaRequest& req);
cplx riemann_theta(const CVector& z, const CMatrix& tau, const ThetaOptions& opt = {});

/// theta and its gradient in z.
struct ThetaGrad {
  cplx value;
  CVector grad;
  /// sum of |terms|; reference magnitude for "theta is small" decisions.
  double abs_sum = 0.0;
};
ThetaGrad theta_with_gradient(const CVector& z, const CMatrix& tau, const ThetaOptions& opt = {});

/// Taylor expansion theta(z + e) = sum_a c_a e^a up to total degree `order`.
series::MultiSeries theta_taylor(const CVector& z, const CMatrix& tau, int order, const ThetaOptions& opt = {});

/// Radius and point count that the evaluator would use.
Truncation truncation(const CVector& z, const CMatrix& tau, int deriv_order, const ThetaOptions& opt = {});

/// Upper incomplete gamma function for s a positive multiple of 1/2.
double upper_gamma_half(int two_s, double x);

/// Vector of Riemann constants for base point infinity: the half period
/// (a + tau b)/2 for which theta(A(D) + K) vanishes on sampled divisors of
/// degree g-1. Stores K into td and returns the validation residual
/// (max over samples of |theta| / abs_sum).
double riemann_constants(const curve::HyperellipticCurve& c, curve::ThetaData& td, unsigned seed = 7,
                         int samples = 6);

/// Coefficient kappa_i^j of the Dubrovin series (i = 0..g-1, j a multi-index
/// with |j| <= 2k-1) built from the Abel jets.
cplx dubrovin_kappa(const CMatrix& jets, int i, const std::vector<int>& j, int k);

/// The series part R_k(phi) = sum_i sum_j kappa_i^j D^j d_i ln theta(-phi-K),
/// so that sigma_k(phi) = const_k - R_k(phi).
cplx residue_series(const curve::ThetaData& td, const CVector& phi, int k);

struct ContourOptions {
  int samples = 64;
  /// Circle radius in the z-chart; <= 0 picks half the chart radius.
  double radius = 0.0;
  double stability_tol = 1e-6;
};

/// -res_{P=infinity} applied to x^k d ln theta(A(P) - phi - K) with the
/// sign dropped: returns res, so sigma_k = const_k - res. Evaluated by the
/// trapezoid rule on a circle in the z-chart. A(P) comes from the curve when
/// given, otherwise from the truncated jets in td.
cplx residue_contour(const curve::ThetaData& td, const curve::HyperellipticCurve* c, const CVector& phi, int k,
                     const ContourOptions& opt = {});

/// Additive constants const_k, k = 1..kmax, from a reference divisor.
struct SigmaCalibration {
  std::vector<cplx> constants;  // index k-1
  std::vector<curve::CurvePoint> reference;
};
SigmaCalibration calibrate_sigma(const curve::HyperellipticCurve& c, const curve::ThetaData& td, int kmax);

cplx sigma_series(const curve::ThetaData& td, const SigmaCalibration& cal, const CVector& phi, int k);
cplx sigma_contour(const curve::ThetaData& td, const curve::HyperellipticCurve* c, const SigmaCalibration& cal,
                   const CVector& phi, int k, const ContourOptions& opt = {});

/// phi = sum of Abel images (base infinity) of the points.
CVector divisor_image(const curve::HyperellipticCurve& c, const curve::ThetaData& td,
                      std::span<const curve::CurvePoint> pts);

struct InversionReport {
  CVector phi;
  std::vector<cplx> sigmas;        // sigma_1..sigma_g from the theta series
  std::vector<cplx> recovered_x;   // roots of the reconstructed polynomial
  double error = 0.0;              // optimal-matching max distance to the inputs
};

InversionReport jacobi_inversion_check(const curve::HyperellipticCurve& c, const curve::ThetaData& td,
                                       const SigmaCalibration& cal, std::span<const curve::CurvePoint> pts);

/// Roots of x^g - e1 x^(g-1) + ... from power sums sigma_1..sigma_g.
std::vector<cplx> roots_from_power_sums(std::span<const cplx> sigmas);

/// Genus one: x with A(x) = phi mod lattice by a grid search over the
/// x-plane followed by Newton on the Abel map.
cplx invert_abel_genus_one(const curve::HyperellipticCurve& c, const curve::ThetaData& td, cplx phi);

}  // namespace hitchin::theta
