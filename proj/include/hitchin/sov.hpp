#pragma once

// Separation of variables: the Hamiltonians H are fixed by h points
// (x_i, y_i, lambda_i) of the spectral curve through R(gamma_i, H) = 0.
// Phase-space coordinates are (lambda_i, x_i) with {lambda_i, x_j} = delta_ij y_i.

#include <optional>
#include <vector>

#include "hitchin/spectral.hpp"

namespace hitchin::sov {

using spectral::SpectralPoint;
using spectral::System;

struct PhaseConfiguration {
  std::vector<SpectralPoint> points;
};

/// Checks point count, on-curve residuals and x separation.
void validate(const System& sys, const PhaseConfiguration& cfg);

/// max_i (1 + |lambda_i|)^d
double residual_scale(const System& sys, const PhaseConfiguration& cfg);

/// max_i |R(gamma_i, H)|
double fiber_residual(const System& sys, const PhaseConfiguration& cfg, const CVector& H);

struct SolveOptions {
  int starts = 16;
  /// solve_hamiltonians_all: start budget; it stops early once 2^(m-1)
  /// solutions are found, m the size of the last block (Bezout bound).
  int all_starts = 256;
  unsigned seed = 12345;
  int max_iter = 200;
  double tol = 1e-9;  // relative to residual_scale
  std::optional<CVector> warm_start;
};

/// Design matrix of the linear separating system (rows: points, columns: H);
/// for so(2n) the last block entries are evaluated at B_n = 1.
CMatrix design_matrix(const System& sys, const PhaseConfiguration& cfg);

CVector solve_hamiltonians(const System& sys, const PhaseConfiguration& cfg, const SolveOptions& opt = {});

/// so(2n): every distinct residual-certified solution found by the
/// multi-start Newton iteration (B_n -> -B_n images identified).
std::vector<CVector> solve_hamiltonians_all(const System& sys, const PhaseConfiguration& cfg,
                                            const SolveOptions& opt = {});

/// M(i, j) = dR/dH_j at gamma_i
CMatrix jacobian_matrix(const System& sys, const PhaseConfiguration& cfg, const CVector& H);

struct ImplicitGradients {
  CMatrix dH_dlambda;  // column m = dH / d lambda_m
  CMatrix dH_dx;       // column m = dH / d x_m (y slaved to x on the curve)
};

ImplicitGradients implicit_gradients(const System& sys, const PhaseConfiguration& cfg, const CVector& H);

/// Gradient of a function over the (lambda_i, x_i) coordinates.
struct Gradient {
  CVector d_lambda;
  CVector d_x;
};

cplx poisson_bracket(const Gradient& f, const Gradient& g, const PhaseConfiguration& cfg);

/// |{H_j, H_k}| for all j, k.
RMatrix involution_check(const System& sys, const PhaseConfiguration& cfg, const CVector& H);

/// Largest magnitude of the implicit H gradients; the natural scale for
/// bracket magnitudes.
double gradient_scale(const ImplicitGradients& g, const PhaseConfiguration& cfg);

/// Random configuration consistent with a random planted H: x_i random,
/// y_i = sqrt(P(x_i)) with a random sign, lambda_i a random root of R.
struct PlantedSample {
  CVector H;
  PhaseConfiguration cfg;
};
PlantedSample plant(const System& sys, unsigned seed, double h_scale = 1.0);

}  // namespace hitchin::sov
