#include "hitchin/angle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"
#include "hitchin/path.hpp"

namespace hitchin::angle {

cplx angle_integrand(const System& sys, const CVector& H, int j, const SpectralPoint& pt) {
  return angle_integrands(sys, H, pt)(j);
}

CVector angle_integrands(const System& sys, const CVector& H, const SpectralPoint& pt) {
  auto r = spectral::eval_R(sys, H, pt);
  if (std::abs(r.dR_dlambda) < 1e-10) throw BranchLocus("dR/dlambda vanishes: point on the branch locus of the cover");
  return -r.dR_dH / (r.dR_dlambda * pt.y);
}

CMatrix jacobi_matrix(const System& sys, const CVector& H, const PhaseConfiguration& cfg) {
  const int h = sys.h();
  CMatrix J(h, h);
  for (int k = 0; k < h; ++k) J.col(k) = angle_integrands(sys, H, cfg.points[k]);
  return J;
}

double jacobi_condition(const CMatrix& J) {
  Eigen::JacobiSVD<CMatrix> svd(J);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  return lo > 0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

namespace {

// y and lambda continued together; sep is the distance from lambda to the
// other roots of the fiber
struct Sheet {
  cplx y{0.0}, lam{0.0};
  double sep = 1.0;
  Sheet operator*(double t) const { return {y * t, lam * t, sep * t}; }
  Sheet operator+(const Sheet& o) const { return {y + o.y, lam + o.lam, sep + o.sep}; }
};

Sheet project_sheet(const System& sys, const CVector& H, cplx x, const Sheet& guess) {
  Sheet s;
  s.y = sys.curve->sqrt_p_nearest(x, guess.y);
  auto roots = spectral::lambda_roots(sys, H, x, s.y).roots;
  std::size_t best = 0;
  for (std::size_t k = 1; k < roots.size(); ++k)
    if (std::abs(roots[k] - guess.lam) < std::abs(roots[best] - guess.lam)) best = k;
  s.lam = roots[best];
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < roots.size(); ++k)
    if (k != best) sep = std::min(sep, std::abs(roots[k] - s.lam));
  s.sep = std::isfinite(sep) ? sep : 1.0;
  return s;
}

path::Tracker<Sheet> sheet_tracker(const System& sys, const CVector& H) {
  path::Tracker<Sheet> tr;
  tr.project = [&sys, &H](cplx x, const Sheet& g) { return project_sheet(sys, H, x, g); };
  tr.change = [](const Sheet& a, const Sheet& b) {
    return std::max(std::abs(a.y - b.y) / std::max(std::abs(a.y), 1e-300),
                    std::abs(a.lam - b.lam) / std::max(a.sep, 1e-300));
  };
  tr.safe_step = [&sys](cplx x) {
    const double d = sys.curve->distance_to_branch(x);
    if (d < sys.curve->exclusion_radius()) throw BranchProximity("angle path enters the exclusion radius");
    return 0.5 * d;
  };
  return tr;
}

struct Leg {
  CVector integral;
  Sheet end;
};

Leg integrate_leg(const System& sys, const CVector& H, const std::vector<cplx>& pts, const Sheet& start) {
  auto tr = sheet_tracker(sys, H);
  auto grid = path::track(tr, pts, start);
  num::AdaptiveOptions opt;
  opt.tol = 1e-12;
  CVector I = path::integrate(tr, grid, sys.h(), [&](cplx x, const Sheet& s) {
    return angle_integrands(sys, H, {x, s.y, s.lam});
  }, opt);
  return {I, grid.back().value};
}

Sheet sheet_at(const System& sys, const CVector& H, const SpectralPoint& p) {
  return project_sheet(sys, H, p.x, {p.y, p.lambda, 1.0});
}

bool lands(const Sheet& s, const SpectralPoint& p) {
  const double ty = 1e-6 * std::max(1.0, std::abs(p.y));
  const double tl = 1e-6 * std::max(1.0, std::abs(p.lambda));
  return std::abs(s.y - p.y) < ty && std::abs(s.lam - p.lambda) < tl;
}

}  // namespace

CVector angle_increment(const System& sys, const CVector& H, const PhaseConfiguration& a,
                        const PhaseConfiguration& b) {
  CVector total = CVector::Zero(sys.h());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    if (pa.x == pb.x) continue;
    Leg leg = integrate_leg(sys, H, {pa.x, pb.x}, sheet_at(sys, H, pa));
    if (!lands(leg.end, pb)) throw PathSheetMismatch("continuation between states left the sheet of the target point");
    total += leg.integral;
  }
  return total;
}

CVector angle_coordinates(const System& sys, const CVector& H, const PhaseConfiguration& cfg,
                          const curve::CurvePoint& base) {
  CVector phi = CVector::Zero(sys.h());
  const auto base_roots = spectral::lambda_roots(sys, H, base.x, base.y).roots;
  for (const auto& p : cfg.points) {
    curve::CurvePoint target{p.x, p.y, false};
    if (p.x == base.x && p.y == base.y) {
      bool on_fiber = false;
      for (cplx r : base_roots) on_fiber = on_fiber || std::abs(r - p.lambda) < 1e-9 * std::max(1.0, std::abs(r));
      if (on_fiber) continue;
    }
    const auto pts = curve::sheet_route(*sys.curve, base, target);
    bool done = false;
    for (cplx r : base_roots) {
      Leg leg = integrate_leg(sys, H, pts, sheet_at(sys, H, {base.x, base.y, r}));
      if (lands(leg.end, p)) {
        phi += leg.integral;
        done = true;
        break;
      }
    }
    if (!done) throw PathSheetMismatch("no lambda branch over the base point continues to the target point");
  }
  return phi;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::Euler;
  if (s == "rk4") return Scheme::RK4;
  throw TypeError("unknown scheme '" + s + "' (expected euler or rk4)");
}

namespace {

void check_collisions(const System& sys, const PhaseConfiguration& cfg) {
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    if (sys.curve->distance_to_branch(cfg.points[i].x) < sys.curve->exclusion_radius())
      throw BranchCollision("point " + std::to_string(i) + " reached a branch point of the curve");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(cfg.points[i].x - cfg.points[j].x) < 1e-8) throw BranchCollision("two separating points collided");
  }
}

// x-state for route 1; y and lambda re-projected from the previous values
PhaseConfiguration project_fiber(const System& sys, const CVector& H, const PhaseConfiguration& prev,
                                 const CVector& x) {
  PhaseConfiguration out = prev;
  for (int i = 0; i < x.size(); ++i) {
    const auto& p = prev.points[i];
    Sheet s = project_sheet(sys, H, x(i), {p.y, p.lambda, 1.0});
    const double jump = std::abs(s.lam - p.lambda);
    if (jump > 0.3 * s.sep)
      throw StepRejected("lambda projection is ambiguous at point " + std::to_string(i) + "; retry with dt/2");
    out.points[i] = {x(i), s.y, s.lam};
  }
  return out;
}

CVector xs(const PhaseConfiguration& c) {
  CVector v(static_cast<int>(c.points.size()));
  for (std::size_t i = 0; i < c.points.size(); ++i) v(i) = c.points[i].x;
  return v;
}

}  // namespace

Trajectory flow_fiber(const System& sys, const CVector& H, const PhaseConfiguration& cfg0, const CVector& c,
                      const FlowOptions& opt) {
  Trajectory tr;
  tr.scheme = opt.scheme;
  tr.direction = c;
  tr.times.push_back(0.0);
  tr.states.push_back(cfg0);
  const long steps = std::lround(opt.t_end / opt.dt);
  PhaseConfiguration cur = cfg0;
  auto field = [&](const PhaseConfiguration& s) -> CVector {
    CMatrix J = jacobi_matrix(sys, H, s);
    if (jacobi_condition(J) > 1e12) throw IllConditioned("Jacobi matrix is ill-conditioned along the flow");
    return Eigen::PartialPivLU<CMatrix>(J).solve(c);
  };
  for (long n = 1; n <= steps; ++n) {
    const double dt = opt.dt;
    const CVector x0 = xs(cur);
    CVector xn;
    if (opt.scheme == Scheme::Euler) {
      xn = x0 + dt * field(cur);
    } else {
      const CVector k1 = field(cur);
      const CVector k2 = field(project_fiber(sys, H, cur, x0 + 0.5 * dt * k1));
      const CVector k3 = field(project_fiber(sys, H, cur, x0 + 0.5 * dt * k2));
      const CVector k4 = field(project_fiber(sys, H, cur, x0 + dt * k3));
      xn = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    cur = project_fiber(sys, H, cur, xn);
    check_collisions(sys, cur);
    if (n % std::max(1, opt.store_every) == 0 || n == steps) {
      tr.times.push_back(n * dt);
      tr.states.push_back(cur);
    }
  }
  return tr;
}

Trajectory flow_poisson(const System& sys, const PhaseConfiguration& cfg0, const CVector& c, const FlowOptions& opt) {
  const int h = sys.h();
  Trajectory tr;
  tr.scheme = opt.scheme;
  tr.direction = c;
  tr.times.push_back(0.0);
  tr.states.push_back(cfg0);
  sov::SolveOptions sopt;
  CVector Hprev = sov::solve_hamiltonians(sys, cfg0, sopt);
  // state vector: x_1..x_h, lambda_1..lambda_h
  auto assemble = [&](const PhaseConfiguration& like, const CVector& s) {
    PhaseConfiguration out = like;
    for (int i = 0; i < h; ++i) {
      out.points[i].x = s(i);
      out.points[i].y = sys.curve->sqrt_p_nearest(s(i), like.points[i].y);
      out.points[i].lambda = s(h + i);
    }
    return out;
  };
  auto field = [&](const PhaseConfiguration& cfg) -> CVector {
    sopt.warm_start = Hprev;
    CVector H = sov::solve_hamiltonians(sys, cfg, sopt);
    auto G = sov::implicit_gradients(sys, cfg, H);
    CVector f(2 * h);
    const CVector dF_dlambda = G.dH_dlambda.transpose() * c;
    const CVector dF_dx = G.dH_dx.transpose() * c;
    for (int i = 0; i < h; ++i) {
      f(i) = cfg.points[i].y * dF_dlambda(i);
      f(h + i) = -cfg.points[i].y * dF_dx(i);
    }
    return f;
  };
  auto state = [&](const PhaseConfiguration& cfg) {
    CVector s(2 * h);
    for (int i = 0; i < h; ++i) {
      s(i) = cfg.points[i].x;
      s(h + i) = cfg.points[i].lambda;
    }
    return s;
  };
  const long steps = std::lround(opt.t_end / opt.dt);
  PhaseConfiguration cur = cfg0;
  for (long n = 1; n <= steps; ++n) {
    const double dt = opt.dt;
    const CVector s0 = state(cur);
    CVector sn;
    if (opt.scheme == Scheme::Euler) {
      sn = s0 + dt * field(cur);
    } else {
      const CVector k1 = field(cur);
      const CVector k2 = field(assemble(cur, s0 + 0.5 * dt * k1));
      const CVector k3 = field(assemble(cur, s0 + 0.5 * dt * k2));
      const CVector k4 = field(assemble(cur, s0 + dt * k3));
      sn = s0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    cur = assemble(cur, sn);
    check_collisions(sys, cur);
    if (sys.spec.square_last) {
      sopt.warm_start = Hprev;
      Hprev = sov::solve_hamiltonians(sys, cur, sopt);
    }
    if (n % std::max(1, opt.store_every) == 0 || n == steps) {
      tr.times.push_back(n * dt);
      tr.states.push_back(cur);
    }
  }
  return tr;
}

double config_distance(const PhaseConfiguration& a, const PhaseConfiguration& b) {
  const auto n = static_cast<int>(a.points.size());
  if (static_cast<int>(b.points.size()) != n) throw ConfigurationError("configurations differ in size");
  RMatrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& p = a.points[i];
      const auto& q = b.points[j];
      cost(i, j) = std::max({std::abs(p.x - q.x), std::abs(p.y - q.y), std::abs(p.lambda - q.lambda)});
    }
  return num::matching_max_cost(cost);
}

std::vector<cplx> newton_sums(const PhaseConfiguration& cfg, int k_max) {
  std::vector<cplx> s(std::max(0, k_max), cplx(0.0));
  for (const auto& p : cfg.points) {
    cplx xp = 1.0;
    for (int k = 0; k < k_max; ++k) {
      xp *= p.x;
      s[k] += xp;
    }
  }
  return s;
}

double hamiltonian_drift(const System& sys, const Trajectory& tr, const CVector& H0) {
  sov::SolveOptions opt;
  opt.warm_start = H0;
  const double scale = std::max(1.0, H0.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (const auto& s : tr.states) {
    CVector H = sov::solve_hamiltonians(sys, s, opt);
    worst = std::max(worst, (H - H0).cwiseAbs().maxCoeff() / scale);
    opt.warm_start = H;
  }
  return worst;
}

CVector trajectory_angle(const System& sys, const CVector& H, const Trajectory& tr, std::size_t upto) {
  CVector phi = CVector::Zero(sys.h());
  for (std::size_t k = 0; k + 1 < tr.states.size() && k < upto; ++k)
    phi += angle_increment(sys, H, tr.states[k], tr.states[k + 1]);
  return phi;
}

}  // namespace hitchin::angle
