#pragma once

// Angle (Darboux) coordinates phi_j = sum_i integral^{gamma_i} omega_j with
// omega_j = -(dR/dH_j)/(dR/dlambda) dx/y, the Jacobi matrix
// J_jk = omega_j(gamma_k)/dx, and trajectories of the linear flow phi' = c
// integrated either through J (fixed H) or through the Poisson equations.

#include <string>
#include <vector>

#include "hitchin/sov.hpp"

namespace hitchin::angle {

using sov::PhaseConfiguration;
using spectral::SpectralPoint;
using spectral::System;

cplx angle_integrand(const System& sys, const CVector& H, int j, const SpectralPoint& pt);
CVector angle_integrands(const System& sys, const CVector& H, const SpectralPoint& pt);

CMatrix jacobi_matrix(const System& sys, const CVector& H, const PhaseConfiguration& cfg);
/// 2-norm condition number of J.
double jacobi_condition(const CMatrix& J);

/// Sum of the integrals of omega along straight x-segments from a.points[i]
/// to b.points[i], with y and lambda continued from a; throws
/// PathSheetMismatch if the continued values do not land on b.
CVector angle_increment(const System& sys, const CVector& H, const PhaseConfiguration& a,
                        const PhaseConfiguration& b);

/// phi relative to a common base point of the curve: for each gamma_i the
/// path from base to x_i is auto-routed; y is continued from base.y, the
/// lambda branch is the one whose continuation reaches lambda_i.
CVector angle_coordinates(const System& sys, const CVector& H, const PhaseConfiguration& cfg,
                          const curve::CurvePoint& base);

enum class Scheme { Euler, RK4 };
Scheme parse_scheme(const std::string& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseConfiguration> states;
  Scheme scheme = Scheme::RK4;
  CVector direction;
};

struct FlowOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::RK4;
  /// Store every n-th state (the last one is always stored).
  int store_every = 1;
};

/// Route 1: x' = J^-1 c with H fixed, lambda re-projected onto the fiber.
Trajectory flow_fiber(const System& sys, const CVector& H, const PhaseConfiguration& cfg0, const CVector& c,
                      const FlowOptions& opt);

/// Route 2: x_i' = y_i d(c.H)/dlambda_i, lambda_i' = -y_i d(c.H)/dx_i with H
/// re-solved from the state.
Trajectory flow_poisson(const System& sys, const PhaseConfiguration& cfg0, const CVector& c, const FlowOptions& opt);

/// Distance between configurations as unordered point sets; the pair
/// distance is max(|dx|, |dy|, |dlambda|).
double config_distance(const PhaseConfiguration& a, const PhaseConfiguration& b);

/// sigma_k = sum_i x_i^k, k = 1..k_max
std::vector<cplx> newton_sums(const PhaseConfiguration& cfg, int k_max);

/// max_j |H_j(t) - H_j(0)| / scale along a trajectory (H re-solved per state).
double hamiltonian_drift(const System& sys, const Trajectory& tr, const CVector& H0);

/// Sum of angle increments between consecutive stored states.
CVector trajectory_angle(const System& sys, const CVector& H, const Trajectory& tr, std::size_t upto);

}  // namespace hitchin::angle
