#include "hitchin/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"
#include "hitchin/path.hpp"

namespace hitchin::curve {

namespace {

cplx nearest_sign(cplx r, cplx guess) { return std::abs(r - guess) <= std::abs(r + guess) ? r : -r; }

double segment_distance(cplx a, cplx b, cplx p) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::real((p - a) * std::conj(d)) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

path::Tracker<cplx> y_tracker(const HyperellipticCurve& c) {
  path::Tracker<cplx> tr;
  tr.project = [&c](cplx x, const cplx& guess) { return c.sqrt_p_nearest(x, guess); };
  tr.change = [](const cplx& a, const cplx& b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  tr.safe_step = [&c](cplx x) {
    const double d = c.distance_to_branch(x);
    if (d < c.exclusion_radius())
      throw BranchProximity("path enters the exclusion radius of a branch point");
    return 0.5 * d;
  };
  return tr;
}

path::Tracker<cplx> w_tracker(const HyperellipticCurve& c, const std::vector<cplx>& w_zeros) {
  path::Tracker<cplx> tr;
  tr.project = [&c](cplx z, const cplx& guess) { return nearest_sign(std::sqrt(c.w_squared(z)), guess); };
  tr.change = [](const cplx& a, const cplx& b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  tr.safe_step = [&w_zeros](cplx z) {
    double d = std::numeric_limits<double>::infinity();
    for (cplx r : w_zeros) d = std::min(d, std::abs(z - r));
    return std::isfinite(d) ? 0.5 * d : 0.25;
  };
  return tr;
}

struct PathResult {
  CVector integral;
  cplx y_end;
};

// Integral of the normalized differentials along an x-polyline.
PathResult integrate_x_path(const HyperellipticCurve& c, const ThetaData& td, const std::vector<cplx>& pts,
                            cplx y_start, double tol) {
  auto tr = y_tracker(c);
  auto grid = path::track(tr, pts, y_start);
  num::AdaptiveOptions opt;
  opt.tol = tol;
  CVector I = path::integrate(tr, grid, c.genus(), [&td](cplx x, cplx y) {
    return normalized_differentials(td, x, y);
  }, opt);
  return {I, grid.back().value};
}

}  // namespace

HyperellipticCurve HyperellipticCurve::build(std::vector<cplx> coeffs, const CurveOptions& opt) {
  while (coeffs.size() > 1 && coeffs.back() == cplx(0.0)) coeffs.pop_back();
  const int deg = static_cast<int>(coeffs.size()) - 1;
  const int min_deg = opt.allow_genus_one ? 3 : 5;
  if (deg % 2 == 0 || deg < min_deg)
    throw DegreeError("P must have odd degree >= " + std::to_string(min_deg) + ", got " + std::to_string(deg));
  if (std::abs(coeffs.back() - cplx(1.0)) > 1e-14)
    throw DegreeError("leading coefficient of P must be 1");
  coeffs.back() = 1.0;

  HyperellipticCurve c;
  c.genus_ = (deg - 1) / 2;
  c.coeffs_ = coeffs;
  c.dcoeffs_ = num::poly_derivative(coeffs);
  c.roots_ = num::poly_roots(coeffs, 3);
  std::sort(c.roots_.begin(), c.roots_.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  for (std::size_t i = 0; i < c.roots_.size(); ++i)
    for (std::size_t j = i + 1; j < c.roots_.size(); ++j) {
      const double scale = std::max(1.0, std::max(std::abs(c.roots_[i]), std::abs(c.roots_[j])));
      if (std::abs(c.roots_[i] - c.roots_[j]) < opt.separation_tol * scale)
        throw DuplicateBranchPoint("roots of P are not separated (|e_i - e_j| = " +
                                   std::to_string(std::abs(c.roots_[i] - c.roots_[j])) + ")");
    }
  c.min_sep_ = num::min_separation(c.roots_);

  // w^2(u) = u^(2g+1) P(1/u) = sum_m c_{2g+1-m} u^m
  c.w2_coeffs_.resize(deg + 1);
  for (int m = 0; m <= deg; ++m) c.w2_coeffs_[m] = coeffs[deg - m];
  double max_root = 0.0;
  for (cplx e : c.roots_) {
    max_root = std::max(max_root, std::abs(e));
    if (std::abs(e) > 0.0) {
      cplx z = 1.0 / std::sqrt(e);
      c.w_zeros_.push_back(z);
      c.w_zeros_.push_back(-z);
    }
  }
  c.chart_radius_ = max_root > 0.0 ? std::min(0.1, 0.5 / std::sqrt(max_root)) : 0.1;
  return c;
}

cplx HyperellipticCurve::P(cplx x) const { return num::poly_eval(coeffs_, x); }
cplx HyperellipticCurve::dP(cplx x) const { return num::poly_eval(dcoeffs_, x); }

double HyperellipticCurve::distance_to_branch(cplx x) const {
  double d = std::numeric_limits<double>::infinity();
  for (cplx e : roots_) d = std::min(d, std::abs(x - e));
  return d;
}

cplx HyperellipticCurve::sqrt_p_nearest(cplx x, cplx guess) const { return nearest_sign(std::sqrt(P(x)), guess); }

bool HyperellipticCurve::on_curve(const CurvePoint& p, double rel_tol) const {
  if (p.at_infinity) return true;
  const cplx v = P(p.x);
  return std::abs(p.y * p.y - v) <= rel_tol * std::max(1.0, std::abs(v));
}

cplx HyperellipticCurve::w_squared(cplx z) const { return num::poly_eval(w2_coeffs_, z * z); }

CurvePoint HyperellipticCurve::point_from_z(cplx z, cplx w) const {
  return {1.0 / (z * z), w / num::ipow(z, 2 * genus_ + 1), false};
}

std::vector<cplx> continue_y(const HyperellipticCurve& c, std::span<const cplx> pts, cplx y_start) {
  std::vector<cplx> out;
  if (pts.empty()) return out;
  if (std::abs(y_start * y_start - c.P(pts[0])) > 1e-8 * std::max(1.0, std::abs(c.P(pts[0]))))
    throw ContinuationAmbiguity("y_start is not a square root of P(path[0])");
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (cplx e : c.branch_points())
      if (segment_distance(pts[i], pts[i + 1], e) < c.exclusion_radius())
        throw BranchProximity("path segment passes within the exclusion radius of a branch point");
  auto tr = y_tracker(c);
  cplx y = y_start;
  out.push_back(y);
  const double amb = 1e-12 * std::max(1.0, std::abs(y_start));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    auto grid = path::track(tr, {pts[i - 1], pts[i]}, y);
    for (const auto& gp : grid)
      if (std::abs(gp.value) < amb) throw ContinuationAmbiguity("sheet candidates coincide along the path");
    y = grid.back().value;
    out.push_back(y);
  }
  return out;
}

std::vector<cplx> route(const HyperellipticCurve& c, cplx xa, cplx xb) {
  const double rd = c.detour_radius();
  const cplx d = xb - xa;
  const double len2 = std::norm(d);
  struct Detour {
    double t1, t2;
    cplx e;
    double side;
    double r;
  };
  std::vector<Detour> detours;
  if (len2 > 0.0) {
    for (cplx e : c.branch_points()) {
      // an endpoint inside the detour disk shrinks the arc to pass between it and e
      double r = rd;
      const double near = std::min(std::abs(xa - e), std::abs(xb - e));
      if (near < rd * (1 - 1e-9)) r = 0.5 * near;
      if (r < 2.0 * c.exclusion_radius()) continue;
      if (segment_distance(xa, xb, e) >= r) continue;
      // |xa + t d - e|^2 = r^2
      const cplx f = xa - e;
      const double A = len2, B = 2.0 * std::real(f * std::conj(d)), C = std::norm(f) - r * r;
      const double disc = std::max(0.0, B * B - 4 * A * C);
      const double t1 = std::max(0.0, (-B - std::sqrt(disc)) / (2 * A));
      const double t2 = std::min(1.0, (-B + std::sqrt(disc)) / (2 * A));
      const double tc = std::clamp(-B / (2 * A), 0.0, 1.0);
      cplx closest = xa + tc * d - e;
      double side = std::abs(closest) > 1e-14 * r ? std::arg(closest) : std::arg(d * kI);
      detours.push_back({t1, t2, e, side, r});
    }
  }
  std::sort(detours.begin(), detours.end(), [](const Detour& a, const Detour& b) { return a.t1 < b.t1; });
  std::vector<cplx> out{xa};
  for (const auto& dt : detours) {
    const cplx p1 = xa + dt.t1 * d, p2 = xa + dt.t2 * d;
    const double th1 = std::arg(p1 - dt.e);
    double delta = std::remainder(std::arg(p2 - dt.e) - th1, 2 * kPi);
    double mid = th1 + 0.5 * delta;
    if (std::abs(std::remainder(mid - dt.side, 2 * kPi)) > 0.5 * kPi)
      delta = delta > 0 ? delta - 2 * kPi : delta + 2 * kPi;
    if (std::abs(p1 - out.back()) > 0.0) out.push_back(p1);
    const int pieces = 16;
    for (int k = 1; k <= pieces; ++k) out.push_back(dt.e + dt.r * std::polar(1.0, th1 + delta * k / pieces));
  }
  if (std::abs(xb - out.back()) > 0.0) out.push_back(xb);
  return out;
}

std::vector<cplx> sheet_route(const HyperellipticCurve& c, const CurvePoint& base, const CurvePoint& target) {
  std::vector<cplx> pts = route(c, base.x, target.x);
  const cplx y_end = continue_y(c, pts, base.y).back();
  if (std::abs(y_end - target.y) <= std::abs(y_end + target.y)) return pts;
  // arrived on the other sheet: insert a loop around the branch point
  // nearest the target to switch sheets
  const auto& bp = c.branch_points();
  cplx e = bp.front();
  for (cplx b : bp)
    if (std::abs(b - target.x) < std::abs(e - target.x)) e = b;
  const cplx u = (target.x - e) / std::abs(target.x - e);
  const double r = std::min(c.detour_radius(), 0.5 * std::abs(target.x - e));
  const cplx q = e + r * u;
  pts = route(c, base.x, e + c.detour_radius() * u);
  if (std::abs(pts.back() - q) > 0.0) pts.push_back(q);
  auto loop = loop_around(e, q);
  pts.insert(pts.end(), loop.begin() + 1, loop.end());
  auto tail = route(c, q, target.x);
  pts.insert(pts.end(), tail.begin() + 1, tail.end());
  return pts;
}

std::vector<cplx> loop_around(cplx e, cplx start, int pieces) {
  const double r = std::abs(start - e);
  const double th = std::arg(start - e);
  std::vector<cplx> out;
  for (int k = 0; k <= pieces; ++k) out.push_back(e + r * std::polar(1.0, th + 2 * kPi * k / pieces));
  out.back() = start;
  return out;
}

CVector branch_segment_integrals(const HyperellipticCurve& c, int p, const QuadratureOptions& opt) {
  const auto& e = c.branch_points();
  const int g = c.genus();
  if (p < 0 || p + 1 >= static_cast<int>(e.size())) throw CycleDegenerate("segment index out of range");
  const cplx m = 0.5 * (e[p] + e[p + 1]);
  const cplx h = 0.5 * (e[p + 1] - e[p]);
  std::vector<cplx> others;
  for (int j = 0; j < static_cast<int>(e.size()); ++j)
    if (j != p && j != p + 1) others.push_back(e[j]);
  for (cplx o : others)
    if (segment_distance(e[p], e[p + 1], o) < 1e-3 * c.min_branch_separation())
      throw CycleDegenerate("a branch point lies on the segment between consecutive branch points");

  auto xof = [m, h](double th) { return m - h * std::cos(th); };
  auto Q = [&others](cplx x) {
    cplx q = 1.0;
    for (cplx o : others) q *= (x - o);
    return q;
  };
  // dx / y = -i dtheta / sqrt(Q(x(theta)))
  auto integrand = [g](cplx x, cplx sq) {
    CVector v(g);
    cplx xp = 1.0;
    for (int k = 0; k < g; ++k) {
      v(k) = -kI * xp / sq;
      xp *= x;
    }
    return v;
  };

  if (opt.fixed_panels > 0) {
    const auto& rule = num::gauss_legendre(opt.order);
    CVector total = CVector::Zero(g);
    cplx sq = std::sqrt(Q(xof(0.0)));
    const double w = kPi / opt.fixed_panels;
    for (int pnl = 0; pnl < opt.fixed_panels; ++pnl) {
      const double a = pnl * w;
      // nodes are visited in increasing theta so nearest-value continuation is local
      for (int i = static_cast<int>(rule.nodes.size()) - 1; i >= 0; --i) {
        const double th = a + 0.5 * w * (1.0 + rule.nodes[i]);
        const cplx x = xof(th);
        sq = nearest_sign(std::sqrt(Q(x)), sq);
        total += 0.5 * w * rule.weights[i] * integrand(x, sq);
      }
    }
    return total;
  }

  path::Tracker<cplx> tr;
  tr.project = [&](cplx s, const cplx& guess) { return nearest_sign(std::sqrt(Q(xof(s.real()))), guess); };
  tr.change = [](const cplx& a, const cplx& b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  tr.safe_step = [&](cplx s) {
    const cplx x = xof(s.real());
    double d = std::numeric_limits<double>::infinity();
    for (cplx o : others) d = std::min(d, std::abs(x - o));
    return std::isfinite(d) ? std::min(0.25, 0.5 * d / std::abs(h)) : 0.25;
  };
  auto grid = path::track(tr, {cplx(0.0), cplx(kPi)}, std::sqrt(Q(xof(0.0))));
  num::AdaptiveOptions aopt;
  aopt.tol = opt.tol;
  aopt.order = opt.order;
  return path::integrate(tr, grid, g, [&](cplx s, cplx sq) { return integrand(xof(s.real()), sq); }, aopt);
}

ThetaData period_matrix(const HyperellipticCurve& c, const QuadratureOptions& opt) {
  const int g = c.genus();
  std::vector<CVector> seg;
  for (int p = 0; p < 2 * g; ++p) seg.push_back(branch_segment_integrals(c, p, opt));

  for (int pattern = 0; pattern < (1 << (2 * g)); ++pattern) {
    std::vector<int> sa(g), sb(g);
    for (int i = 0; i < g; ++i) {
      sa[i] = (pattern >> i) & 1 ? -1 : 1;
      sb[i] = (pattern >> (g + i)) & 1 ? -1 : 1;
    }
    CMatrix A(g, g), B = CMatrix::Zero(g, g);
    for (int i = 0; i < g; ++i) {
      A.row(i) = 2.0 * sa[i] * seg[2 * i].transpose();
      for (int k = i; k < g; ++k) B.row(i) += 2.0 * sb[k] * seg[2 * k + 1].transpose();
    }
    Eigen::FullPivLU<CMatrix> lu(A);
    if (!lu.isInvertible()) continue;
    CMatrix tau = B * lu.inverse();
    const double scale = std::max(1.0, tau.cwiseAbs().maxCoeff());
    if ((tau - tau.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) continue;
    RMatrix im = 0.5 * (tau.imag() + tau.imag().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(im);
    if (es.eigenvalues().minCoeff() <= 0.0) continue;

    ThetaData td;
    td.genus = g;
    td.tau = 0.5 * (tau + tau.transpose());
    td.normalization = lu.inverse().transpose();
    td.a_periods = A;
    td.b_periods = B;
    td.a_signs = sa;
    td.b_signs = sb;
    td.riemann_constants = CVector::Zero(g);
    return td;
  }
  throw CycleDegenerate("no orientation of the standard cycles yields a Riemann matrix");
}

CVector normalized_differentials(const ThetaData& td, cplx x, cplx y) {
  const int g = td.genus;
  CVector w(g);
  cplx xp = 1.0;
  for (int k = 0; k < g; ++k) {
    w(k) = xp / y;
    xp *= x;
  }
  return td.normalization * w;
}

CVector normalized_differentials_z(const HyperellipticCurve& c, const ThetaData& td, cplx z, cplx w) {
  const int g = c.genus();
  CVector f(g);
  for (int k = 0; k < g; ++k) f(k) = -2.0 * num::ipow(z, 2 * g - 2 - 2 * k) / w;
  return td.normalization * f;
}

namespace {

struct ChartResult {
  CVector integral;
  cplx w_end;
};

ChartResult integrate_chart(const HyperellipticCurve& c, const ThetaData& td, cplx z, double tol) {
  static thread_local std::vector<cplx> zeros;
  zeros.clear();
  for (cplx e : c.branch_points())
    if (std::abs(e) > 0.0) {
      zeros.push_back(1.0 / std::sqrt(e));
      zeros.push_back(-1.0 / std::sqrt(e));
    }
  auto tr = w_tracker(c, zeros);
  auto grid = path::track(tr, {cplx(0.0), z}, cplx(1.0));
  num::AdaptiveOptions opt;
  opt.tol = tol;
  CVector I = path::integrate(tr, grid, c.genus(), [&](cplx s, cplx w) {
    return normalized_differentials_z(c, td, s, w);
  }, opt);
  return {I, grid.back().value};
}

CVector abel_from_infinity(const HyperellipticCurve& c, const ThetaData& td, const CurvePoint& t, double tol) {
  const int g = c.genus();
  const cplx zt = 1.0 / std::sqrt(t.x);
  const double rc = c.chart_radius();
  const auto matches = [&](cplx y) { return std::abs(y - t.y) <= std::abs(y + t.y); };
  if (std::abs(zt) < rc) {
    auto r = integrate_chart(c, td, zt, tol);
    const cplx y = r.w_end / num::ipow(zt, 2 * g + 1);
    // v(-z) = v(z) dz with an even integrand, so the integral is odd in z
    return matches(y) ? r.integral : CVector(-r.integral);
  }
  const cplx zj = zt * (rc / std::abs(zt));
  auto r = integrate_chart(c, td, zj, tol);
  CurvePoint junction = c.point_from_z(zj, r.w_end);
  auto seg = integrate_x_path(c, td, route(c, junction.x, t.x), junction.y, tol);
  if (matches(seg.y_end)) return r.integral + seg.integral;
  // the other sheet over the junction reaches the other sheet over the target
  return -r.integral - seg.integral;
}

}  // namespace

CVector abel_map_z(const HyperellipticCurve& c, const ThetaData& td, cplx z, double tol) {
  return integrate_chart(c, td, z, tol).integral;
}

CVector abel_map(const HyperellipticCurve& c, const ThetaData& td, const CurvePoint& target,
                 const CurvePoint& base, double tol) {
  const int g = c.genus();
  if (target.at_infinity && base.at_infinity) return CVector::Zero(g);
  if (base.at_infinity) return abel_from_infinity(c, td, target, tol);
  if (target.at_infinity) return -abel_from_infinity(c, td, base, tol);
  if (target.x == base.x && target.y == base.y) return CVector::Zero(g);

  auto res = integrate_x_path(c, td, sheet_route(c, base, target), base.y, tol);
  if (std::abs(res.y_end - target.y) > std::abs(res.y_end + target.y))
    throw PathSheetMismatch("could not reach the requested sheet over the target");
  return res.integral;
}

CMatrix abel_jets(const HyperellipticCurve& c, const ThetaData& td, int order) {
  const int g = c.genus();
  const int deg = c.degree();
  // series of S(u)^(-1/2), S(u) = w^2 in u = z^2
  std::vector<cplx> S(deg + 1);
  for (int m = 0; m <= deg; ++m) S[m] = c.coeffs()[deg - m];
  const int nterms = order / 2 + 2;
  std::vector<cplx> F(nterms, cplx(0.0));
  F[0] = 1.0;
  const double alpha = -0.5;
  for (int n = 1; n < nterms; ++n) {
    cplx acc = 0.0;
    for (int k = 1; k <= std::min(n, deg); ++k) acc += ((alpha + 1.0) * k - n) * S[k] * F[n - k];
    F[n] = acc / static_cast<double>(n);
  }
  CMatrix jets = CMatrix::Zero(g, order);
  for (int l = 1; l <= order; ++l) {
    for (int k = 0; k < g; ++k) {
      const int rem = l - 1 - (2 * g - 2 - 2 * k);
      if (rem < 0 || rem % 2 != 0) continue;
      const int m = rem / 2;
      if (m >= nterms) continue;
      for (int s = 0; s < g; ++s) jets(s, l - 1) += -2.0 * td.normalization(s, k) * F[m];
    }
  }
  return jets;
}

double lattice_residual(const CMatrix& tau, const CVector& v) {
  RMatrix Y = tau.imag();
  RVector n = Y.ldlt().solve(v.imag());
  RVector m = v.real() - tau.real() * n;
  double worst = 0.0;
  for (int i = 0; i < n.size(); ++i) {
    worst = std::max(worst, std::abs(n(i) - std::round(n(i))));
    worst = std::max(worst, std::abs(m(i) - std::round(m(i))));
  }
  return worst;
}

}  // namespace hitchin::curve
