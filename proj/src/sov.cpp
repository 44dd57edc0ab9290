#include "hitchin/sov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"

namespace hitchin::sov {

void validate(const System& sys, const PhaseConfiguration& cfg) {
  if (static_cast<int>(cfg.points.size()) != sys.h())
    throw ConfigurationError("configuration has " + std::to_string(cfg.points.size()) + " points, layout needs " +
                             std::to_string(sys.h()));
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const auto& p = cfg.points[i];
    curve::CurvePoint cp{p.x, p.y, false};
    if (!sys.curve->on_curve(cp, 1e-10))
      throw ConfigurationError("point " + std::to_string(i) + " is not on the curve (y^2 != P(x))");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(cfg.points[j].x - p.x) < 1e-8)
        throw ConfigurationError("points " + std::to_string(j) + " and " + std::to_string(i) + " share x");
  }
}

double residual_scale(const System& sys, const PhaseConfiguration& cfg) {
  double s = 1.0;
  for (const auto& p : cfg.points) s = std::max(s, std::pow(1.0 + std::abs(p.lambda), sys.spec.d));
  return s;
}

double fiber_residual(const System& sys, const PhaseConfiguration& cfg, const CVector& H) {
  double r = 0.0;
  for (const auto& p : cfg.points) r = std::max(r, std::abs(spectral::eval_R(sys, H, p).R));
  return r;
}

CMatrix design_matrix(const System& sys, const PhaseConfiguration& cfg) {
  const int h = sys.h();
  const int d = sys.spec.d;
  CMatrix A = CMatrix::Zero(static_cast<int>(cfg.points.size()), h);
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const auto& p = cfg.points[i];
    for (const auto& b : sys.layout.blocks) {
      const cplx lp = num::ipow(p.lambda, d - b.dee);
      cplx xp = 1.0;
      for (int k = 0; k < b.x_size; ++k, xp *= p.x) A(i, b.offset + k) = lp * xp;
      xp = 1.0;
      for (int s = 0; s < b.y_size; ++s, xp *= p.x) A(i, b.offset + b.x_size + s) = lp * xp * p.y;
    }
  }
  return A;
}

namespace {

CVector solve_linear(const System& sys, const PhaseConfiguration& cfg) {
  CMatrix A = design_matrix(sys, cfg);
  CVector rhs(sys.h());
  for (int i = 0; i < sys.h(); ++i) rhs(i) = -num::ipow(cfg.points[i].lambda, sys.spec.d);
  Eigen::JacobiSVD<CMatrix> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-13 * sv(0))
    throw SingularConfiguration("separating system is singular (condition estimate " +
                                std::to_string(sv.size() ? sv(0) / std::max(sv(sv.size() - 1), 1e-300) : 0.0) +
                                ")");
  Eigen::PartialPivLU<CMatrix> lu(A);
  CVector H = lu.solve(rhs);
  // one step of iterative refinement
  H += lu.solve(rhs - A * H);
  return H;
}

CVector residual_vector(const System& sys, const PhaseConfiguration& cfg, const CVector& H) {
  CVector F(sys.h());
  for (int i = 0; i < sys.h(); ++i) F(i) = spectral::eval_R(sys, H, cfg.points[i]).R;
  return F;
}

struct NewtonResult {
  CVector H;
  double residual;
};

NewtonResult damped_newton(const System& sys, const PhaseConfiguration& cfg, CVector H, int max_iter) {
  const int h = sys.h();
  CVector F = residual_vector(sys, cfg, H);
  double fn = F.norm();
  double mu = 1e-3;
  for (int it = 0; it < max_iter && fn > 0; ++it) {
    CMatrix J = jacobian_matrix(sys, cfg, H);
    CMatrix JhJ = J.adjoint() * J;
    CVector g = J.adjoint() * F;
    bool accepted = false;
    // plain Newton step first (quadratic convergence near a root), halved a
    // few times; the Tikhonov-damped step is the fallback
    Eigen::PartialPivLU<CMatrix> lu(J);
    CVector nstep = lu.solve(F);
    if (nstep.allFinite()) {
      double t = 1.0;
      for (int half = 0; half < 6 && !accepted; ++half, t *= 0.5) {
        CVector Hn = H - t * nstep;
        CVector Fn = residual_vector(sys, cfg, Hn);
        if (std::isfinite(Fn.norm()) && Fn.norm() < (1.0 - 0.25 * t) * fn) {
          H = Hn;
          F = Fn;
          fn = Fn.norm();
          accepted = true;
        }
      }
    }
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const double scale = std::max(1e-300, JhJ.diagonal().real().maxCoeff());
      CMatrix A = JhJ + (mu * scale) * CMatrix::Identity(h, h);
      CVector step = A.ldlt().solve(g);
      CVector Hn = H - step;
      CVector Fn = residual_vector(sys, cfg, Hn);
      const double fnn = Fn.norm();
      if (std::isfinite(fnn) && fnn < fn) {
        H = Hn;
        F = Fn;
        fn = fnn;
        mu = std::max(1e-15, mu / 10);
        accepted = true;
      } else {
        mu *= 10;
      }
    }
    if (!accepted) break;
  }
  return {H, F.cwiseAbs().maxCoeff()};
}

bool same_solution(const System& sys, const CVector& a, const CVector& b, double tol) {
  const double s = std::max(1.0, std::max(a.norm(), b.norm()));
  if ((a - b).norm() < tol * s) return true;
  if (!sys.spec.square_last) return false;
  CVector c = b;
  const auto& last = sys.layout.blocks.back();
  c.segment(last.offset, last.x_size + last.y_size) *= -1.0;
  return (a - c).norm() < tol * s;
}

std::vector<CVector> multistart(const System& sys, const PhaseConfiguration& cfg, const SolveOptions& opt, int starts,
                                std::size_t max_solutions, double* best_residual) {
  const double scale = residual_scale(sys, cfg);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<CVector> sols;
  double best = std::numeric_limits<double>::infinity();
  for (int s = -1; s < starts && sols.size() < max_solutions; ++s) {
    CVector H0(sys.h());
    if (s < 0) {
      if (!opt.warm_start) continue;
      H0 = *opt.warm_start;
    } else {
      for (int i = 0; i < sys.h(); ++i) H0(i) = cplx(nd(rng), nd(rng));
    }
    NewtonResult r = damped_newton(sys, cfg, H0, opt.max_iter);
    best = std::min(best, r.residual);
    if (r.residual < opt.tol * scale) {
      bool dup = false;
      for (const auto& q : sols) dup = dup || same_solution(sys, q, r.H, 1e-6);
      if (!dup) sols.push_back(r.H);
    }
  }
  if (best_residual) *best_residual = best;
  return sols;
}

}  // namespace

CVector solve_hamiltonians(const System& sys, const PhaseConfiguration& cfg, const SolveOptions& opt) {
  validate(sys, cfg);
  if (!sys.spec.square_last) return solve_linear(sys, cfg);
  double best = 0.0;
  auto sols = multistart(sys, cfg, opt, opt.starts, 1, &best);
  if (sols.empty())
    throw NewtonDivergence("no start converged; best residual " + std::to_string(best) + " (scale " +
                           std::to_string(residual_scale(sys, cfg)) + ")");
  return sols.front();
}

std::vector<CVector> solve_hamiltonians_all(const System& sys, const PhaseConfiguration& cfg,
                                            const SolveOptions& opt) {
  validate(sys, cfg);
  if (!sys.spec.square_last) return {solve_linear(sys, cfg)};
  double best = 0.0;
  const auto& last = sys.layout.blocks.back();
  const int m = std::min(last.x_size + last.y_size, 30);
  auto sols = multistart(sys, cfg, opt, opt.all_starts, std::size_t{1} << (m - 1), &best);
  if (sols.empty()) throw NewtonDivergence("no start converged; best residual " + std::to_string(best));
  return sols;
}

CMatrix jacobian_matrix(const System& sys, const PhaseConfiguration& cfg, const CVector& H) {
  CMatrix M(static_cast<int>(cfg.points.size()), sys.h());
  for (std::size_t i = 0; i < cfg.points.size(); ++i) M.row(i) = spectral::eval_R(sys, H, cfg.points[i]).dR_dH.transpose();
  return M;
}

ImplicitGradients implicit_gradients(const System& sys, const PhaseConfiguration& cfg, const CVector& H) {
  const int h = sys.h();
  CMatrix M = jacobian_matrix(sys, cfg, H);
  Eigen::FullPivLU<CMatrix> lu(M);
  if (!lu.isInvertible() || lu.rcond() < 1e-14)
    throw SingularJacobian("dR/dH matrix is singular at the configuration");
  CMatrix Minv = lu.inverse();
  ImplicitGradients g{CMatrix(h, h), CMatrix(h, h)};
  for (int m = 0; m < h; ++m) {
    auto r = spectral::eval_R(sys, H, cfg.points[m]);
    g.dH_dlambda.col(m) = -Minv.col(m) * r.dR_dlambda;
    g.dH_dx.col(m) = -Minv.col(m) * r.dR_dx;
  }
  return g;
}

cplx poisson_bracket(const Gradient& f, const Gradient& g, const PhaseConfiguration& cfg) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    s += cfg.points[i].y * (f.d_lambda(i) * g.d_x(i) - g.d_lambda(i) * f.d_x(i));
  return s;
}

RMatrix involution_check(const System& sys, const PhaseConfiguration& cfg, const CVector& H) {
  const int h = sys.h();
  auto G = implicit_gradients(sys, cfg, H);
  RMatrix out = RMatrix::Zero(h, h);
  for (int j = 0; j < h; ++j)
    for (int k = 0; k < h; ++k) {
      if (j == k) continue;
      Gradient a{G.dH_dlambda.row(j).transpose(), G.dH_dx.row(j).transpose()};
      Gradient b{G.dH_dlambda.row(k).transpose(), G.dH_dx.row(k).transpose()};
      out(j, k) = std::abs(poisson_bracket(a, b, cfg));
    }
  return out;
}

double gradient_scale(const ImplicitGradients& g, const PhaseConfiguration& cfg) {
  double ymax = 0.0;
  for (const auto& p : cfg.points) ymax = std::max(ymax, std::abs(p.y));
  return std::max(1e-300, ymax * g.dH_dlambda.cwiseAbs().maxCoeff() * g.dH_dx.cwiseAbs().maxCoeff());
}

PlantedSample plant(const System& sys, unsigned seed, double h_scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& e = sys.curve->branch_points();
  cplx center = 0.0;
  for (cplx b : e) center += b;
  center /= static_cast<double>(e.size());
  double radius = 0.0;
  for (cplx b : e) radius = std::max(radius, std::abs(b - center));
  const double sep = sys.curve->min_branch_separation();
  PlantedSample out;
  out.H = CVector(sys.h());
  for (int i = 0; i < sys.h(); ++i) out.H(i) = h_scale * cplx(nd(rng), nd(rng));
  while (static_cast<int>(out.cfg.points.size()) < sys.h()) {
    const cplx x = center + std::polar(radius * std::sqrt(u(rng)) * 1.2, 2 * kPi * u(rng));
    if (sys.curve->distance_to_branch(x) < 0.1 * sep) continue;
    bool close = false;
    for (const auto& p : out.cfg.points) close = close || std::abs(p.x - x) < 0.05 * sep;
    if (close) continue;
    cplx y = std::sqrt(sys.curve->P(x));
    if (u(rng) < 0.5) y = -y;
    auto all = spectral::lambda_roots(sys, out.H, x, y).roots;
    // SO(2n+1) always has the root lambda = 0, which carries no information
    std::vector<cplx> roots;
    for (cplx r : all)
      if (std::abs(r) > 1e-6) roots.push_back(r);
    if (roots.empty()) continue;
    const int k = std::min(static_cast<int>(u(rng) * roots.size()), static_cast<int>(roots.size()) - 1);
    out.cfg.points.push_back({x, y, roots[k]});
  }
  return out;
}

}  // namespace hitchin::sov
