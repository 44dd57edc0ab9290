#pragma once

// The SL2 genus-2 system on T*P^3. A point q of P^3 gives six points
// eps_i(q) of the dual space; the line through eps_i(q) and the covector p
// has Klein coordinates x_i1..x_i6, and the 6x6 matrix x is skew. The
// Hamiltonians are H_i = sum_{j != i} x_ij^2 / (z_i - z_j), and
// L(zeta) = zeta x + diag(z) is a Lax matrix for the flows of tr L^l.
//
// All quantities are bilinear in (q, p): x_ij = q^T A_ij p. Brackets use the
// affine chart q_c = 1, p_c = -sum_{a != c} p_a q_a.

#include <array>
#include <functional>
#include <vector>

#include "hitchin/types.hpp"

namespace hitchin::sl2 {

using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec6 = Eigen::Matrix<cplx, 6, 1>;
using Mat6 = Eigen::Matrix<cplx, 6, 6>;
using Sextet = std::array<cplx, 6>;

struct GeomPhasePoint {
  Vec4 q;
  Vec4 p;
  int chart = 3;  // q(chart) == 1
};

/// Rescales q so that q(chart) = 1 (p scales inversely) and re-imposes
/// p.q = 0 through p(chart). Throws ChartSingularity if q(chart) ~ 0.
GeomPhasePoint normalize(GeomPhasePoint pp, int chart);
/// Chart with the largest |q_c|.
int best_chart(const Vec4& q);
/// Random point with p.q = 0 in the best chart.
GeomPhasePoint random_point(unsigned seed);
void validate(const GeomPhasePoint& pp);
void validate(const Sextet& z);

/// eps_i(q) = E_i q.
const std::array<Mat4, 6>& epsilon_matrices();
std::array<Vec4, 6> epsilon_maps(const Vec4& q);

/// (pi01, pi02, pi03, pi23, pi31, pi12) of the line through a and p.
Vec6 plucker(const Vec4& a, const Vec4& p);
/// pi01 pi23 + pi02 pi31 + pi03 pi12
cplx plucker_relation(const Vec6& pi);

/// Column j of the Klein map uses pi_{0 k} + sign * (complementary pair),
/// times column[j] * line[j] * scale; line i of x is multiplied by line[i].
struct KleinConvention {
  std::array<int, 6> pair{};   // 0: (01,23), 1: (02,31), 2: (03,12)
  std::array<int, 6> sign{};   // +1 or -1
  std::array<cplx, 6> column{};
  std::array<cplx, 6> line{};
  double scale = 1.0;
};

/// The convention frozen into the build.
const KleinConvention& klein_convention();

struct CalibrationReport {
  KleinConvention convention;
  int skew_candidates = 0;   // column-factor choices giving skew x
  int line_candidates = 0;   // line-factor choices giving so(6) relations
  double skew_defect = 0.0;
  double so6_defect = 0.0;
};

/// Search of the finite Klein conventions: pair combination per column
/// from x_jj = 0, column factors in {+-1, +-i} from skewness, line factors
/// and the overall scale from {x_nm, x_mp} + x_np = 0.
CalibrationReport calibrate_klein(unsigned seed = 2024, int points = 3);

/// 6x6 matrix taking Plucker coordinates to Klein coordinates (no line factor).
Mat6 klein_matrix(const KleinConvention& kc = klein_convention());
/// K pi(a, p); row i of x is line[i] * klein_x(eps_i(q), p).
Vec6 klein_x(const Vec4& a, const Vec4& p, const KleinConvention& kc = klein_convention());

struct XMatrix {
  Mat6 x;                    // skew part
  double skew_defect = 0.0;  // |X + X^T| / |X| before skew-symmetrization
};
XMatrix x_matrix(const GeomPhasePoint& pp, const KleinConvention& kc = klein_convention());

/// x_ij = q^T A(i, j) p
using Forms = std::array<std::array<Mat4, 6>, 6>;
Forms bilinear_forms(const KleinConvention& kc = klein_convention());

/// Homogeneous gradient of a function of (q, p).
struct HomGrad {
  Vec4 dq = Vec4::Zero();
  Vec4 dp = Vec4::Zero();
};
HomGrad x_gradient(const GeomPhasePoint& pp, int i, int j);
/// Canonical bracket in the chart of pp: sum_a f_qa g_pa - f_pa g_qa.
cplx chart_bracket(const GeomPhasePoint& pp, const HomGrad& f, const HomGrad& g);

/// max over distinct n, m, p, q of |{x_nm, x_mp} + x_np| and |{x_nm, x_pq}|.
double so6_defect(const GeomPhasePoint& pp);

std::array<cplx, 6> gp_hamiltonians(const GeomPhasePoint& pp, const Sextet& z);
HomGrad gp_gradient(const GeomPhasePoint& pp, const Sextet& z, int i);

Mat6 lax_matrix(const GeomPhasePoint& pp, const Sextet& z, cplx zeta);
struct LaxPair {
  Mat6 L;  // L(zeta')
  Mat6 M;  // M_l(zeta, zeta')
};
LaxPair lax_pair(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, cplx zeta_p, int l);

/// F = tr L(zeta)^l and its gradient.
cplx trace_power(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l);
HomGrad trace_power_gradient(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l);

/// One RK4 step of f' = {F, f} for F given by its homogeneous gradient:
/// chart coordinates q_a' = -dF/dp_a, p_a' = dF/dq_a.
using GradientFn = std::function<HomGrad(const GeomPhasePoint&)>;
GeomPhasePoint flow_step(const GeomPhasePoint& pp, const GradientFn& grad, double dt);
/// flow_step for F = tr L(zeta)^l.
GeomPhasePoint rk4_step(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l, double dt);

struct LaxTrajectory {
  std::vector<double> times;
  std::vector<GeomPhasePoint> states;
  double eigen_drift = 0.0;  // max matching distance of spec L(zeta') to t = 0
  double gp_drift = 0.0;     // max |H_i(t) - H_i(0)|
  int chart_switches = 0;
};

struct LaxFlowOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  cplx probe{0.37, -0.21};  // zeta' for the eigenvalue monitor
  double chart_limit = 1e3; // switch when max |q_a| exceeds this in the chart
  int store_every = 1;
};

LaxTrajectory lax_flow(const GeomPhasePoint& pp0, const Sextet& z, cplx zeta, int l, const LaxFlowOptions& opt = {});

struct LaxResidual {
  double residual = 0.0;    // |dL/dt(zeta') - [M, L(zeta')]|, max entry
  double commutator = 0.0;  // |[M, L]|, max entry
};
/// dL/dt by central differences with step h and one Richardson level.
LaxResidual lax_residual(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, cplx zeta_p, int l, double h = 1e-5);

}  // namespace hitchin::sl2
