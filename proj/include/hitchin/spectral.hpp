#pragma once

// Spectral polynomial of a classical Hitchin system on a hyperelliptic curve:
//   R(lambda, x, y, H) = lambda^d + sum_j lambda^(d - d_j) B_j(x, y),
//   B_j = sum_k H0_jk x^k + y sum_s H1_js x^s,
// with B_n replaced by B_n^2 for so(2n).

#include <string>
#include <vector>

#include "hitchin/curve.hpp"
#include "hitchin/types.hpp"

namespace hitchin::spectral {

enum class Family { GL, SL, SO_odd, SP, SO_even };

Family parse_family(const std::string& s);
std::string family_name(Family f);

struct LieTypeSpec {
  Family family = Family::GL;
  int rank = 1;
  int d = 1;                  // matrix size
  std::vector<int> deltas;    // degrees of basic invariants
  std::vector<int> dees;      // lambda exponent offsets
  bool square_last = false;
  int dim = 0;                // dimension of the Lie algebra
};

LieTypeSpec resolve_type(Family family, int rank);

struct Block {
  int delta = 0;
  int dee = 0;
  int x_size = 0;   // coefficients H0_jk, k = 0..x_size-1
  int y_size = 0;   // coefficients H1_js, s = 0..y_size-1
  int offset = 0;   // position of H0_j0 in the flat vector; y part follows
};

struct CoefficientLayout {
  std::vector<Block> blocks;
  int h = 0;
};

CoefficientLayout coefficient_layout(const LieTypeSpec& spec, int genus);

struct SpectralPoint {
  cplx x{0.0};
  cplx y{0.0};
  cplx lambda{0.0};
};

/// The spectral data bundled for evaluation.
struct System {
  LieTypeSpec spec;
  const curve::HyperellipticCurve* curve = nullptr;
  CoefficientLayout layout;

  System(const LieTypeSpec& s, const curve::HyperellipticCurve& c);
  int h() const { return layout.h; }
  int genus() const { return curve->genus(); }
};

/// B_j values at (x, y) for each block (before squaring).
std::vector<cplx> brackets(const System& sys, const CVector& H, cplx x, cplx y);

struct RValue {
  cplx R;
  cplx dR_dlambda;
  CVector dR_dH;     // h entries
  cplx dR_dx;        // total derivative along the curve, dy/dx = P'/(2y)
  cplx dR_dx_partial;
  cplx dR_dy;
};

RValue eval_R(const System& sys, const CVector& H, const SpectralPoint& pt);

/// Coefficients of R in lambda (ascending, length d+1) at (x, y).
std::vector<cplx> lambda_polynomial(const System& sys, const CVector& H, cplx x, cplx y);

struct LambdaRoots {
  std::vector<cplx> roots;
  bool ill_conditioned = false;  // some pair closer than 1e-8
  double min_separation = 0.0;
};

LambdaRoots lambda_roots(const System& sys, const CVector& H, cplx x, cplx y);

/// Zero count of the discriminant B_1^2 - 4 B_2 of a d = 2 system (GL(2) or
/// SL(2)) as a function on the base curve and on the spectral cover.
struct DiscriminantCount {
  int zeros_on_curve = 0;        // with multiplicity, on the base curve
  int odd_order_points = 0;      // branch points of the lambda-cover
  int zeros_on_cover = 0;        // pulled back to the spectral curve
  int riemann_hurwitz_genus = 0; // from 2 g_hat - 2 = 2 (2g - 2) + branch points
  std::vector<cplx> x_roots;     // x-coordinates of the zeros (clustered)
  std::vector<int> multiplicities;
};

DiscriminantCount discriminant_zero_count(const System& sys, const CVector& H, double cluster_tol = 1e-6);

}  // namespace hitchin::spectral
