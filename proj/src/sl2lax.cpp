#include "hitchin/sl2lax.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"

namespace hitchin::sl2 {

namespace {

const std::array<cplx, 4> kFactors{cplx(1.0), cplx(-1.0), kI, -kI};

// index pairs (a, b), (c, d) of the k-th complementary couple
constexpr int kPairs[3][4] = {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}};

Mat4 bivector(int pair, int sign) {
  Mat4 K = Mat4::Zero();
  const int* ix = kPairs[pair];
  K(ix[0], ix[1]) += 1.0;
  K(ix[1], ix[0]) -= 1.0;
  K(ix[2], ix[3]) += static_cast<double>(sign);
  K(ix[3], ix[2]) -= static_cast<double>(sign);
  return K;
}

Mat4 signed_permutation(const int (&rows)[4][2]) {
  Mat4 M = Mat4::Zero();
  for (int r = 0; r < 4; ++r) M(r, rows[r][0]) = static_cast<double>(rows[r][1]);
  return M;
}

const Forms& default_forms() {
  static const Forms f = bilinear_forms(klein_convention());
  return f;
}

cplx form(const Mat4& A, const GeomPhasePoint& pp) { return pp.q.transpose() * A * pp.p; }

Mat6 raw_x(const GeomPhasePoint& pp, const Forms& A) {
  Mat6 X;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) X(i, j) = form(A[i][j], pp);
  return X;
}

HomGrad form_gradient(const Mat4& A, const GeomPhasePoint& pp) {
  return {A * pp.p, A.transpose() * pp.q};
}

// bracket of two bilinear forms in the chart of pp
cplx form_bracket(const GeomPhasePoint& pp, const Mat4& A, const Mat4& B) {
  return chart_bracket(pp, form_gradient(A, pp), form_gradient(B, pp));
}

double max_abs(const Mat6& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

int best_chart(const Vec4& q) {
  int c = 0;
  for (int k = 1; k < 4; ++k)
    if (std::abs(q(k)) > std::abs(q(c))) c = k;
  return c;
}

GeomPhasePoint normalize(GeomPhasePoint pp, int chart) {
  const cplx s = pp.q(chart);
  if (!(std::abs(s) > 1e-12 * pp.q.cwiseAbs().maxCoeff()) || !std::isfinite(std::abs(s)))
    throw ChartSingularity("q vanishes in chart " + std::to_string(chart));
  pp.q /= s;
  pp.p *= s;
  pp.q(chart) = 1.0;
  cplx acc = 0.0;
  for (int a = 0; a < 4; ++a)
    if (a != chart) acc += pp.p(a) * pp.q(a);
  pp.p(chart) = -acc;
  pp.chart = chart;
  return pp;
}

GeomPhasePoint random_point(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  GeomPhasePoint pp;
  for (int k = 0; k < 4; ++k) pp.q(k) = {n(rng), n(rng)};
  for (int k = 0; k < 4; ++k) pp.p(k) = {n(rng), n(rng)};
  const cplx qq = pp.q.transpose() * pp.q;
  const cplx pq = pp.p.transpose() * pp.q;
  pp.p -= (pq / qq) * pp.q;
  return normalize(pp, best_chart(pp.q));
}

void validate(const GeomPhasePoint& pp) {
  const double qn = pp.q.cwiseAbs().maxCoeff();
  if (!(qn > 0.0)) throw ConfigurationError("q must be nonzero");
  if (pp.chart < 0 || pp.chart > 3) throw ConfigurationError("chart index must be 0..3");
  const double pn = pp.p.cwiseAbs().maxCoeff();
  const double inc = std::abs(cplx(pp.p.transpose() * pp.q));
  if (inc > 1e-12 * std::max(1.0, pn * qn)) throw ConfigurationError("incidence p.q = 0 violated");
}

void validate(const Sextet& z) {
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(z[i] - z[j]) < 1e-12 * std::max(1.0, std::abs(z[i])))
        throw ConfigurationError("sextet points must be distinct");
}

const std::array<Mat4, 6>& epsilon_matrices() {
  // rows (source index, sign): eps_1 = (y, -x, t, -z), ..., eps_6 = (t, -z, y, -x)
  static const std::array<Mat4, 6> E = [] {
    const int t[6][4][2] = {
        {{1, 1}, {0, -1}, {3, 1}, {2, -1}},
        {{1, 1}, {0, -1}, {3, -1}, {2, 1}},
        {{2, 1}, {3, 1}, {0, -1}, {1, -1}},
        {{2, 1}, {3, -1}, {0, -1}, {1, 1}},
        {{3, 1}, {2, 1}, {1, -1}, {0, -1}},
        {{3, 1}, {2, -1}, {1, 1}, {0, -1}},
    };
    std::array<Mat4, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = signed_permutation(t[i]);
    return out;
  }();
  return E;
}

std::array<Vec4, 6> epsilon_maps(const Vec4& q) {
  std::array<Vec4, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = epsilon_matrices()[i] * q;
  return out;
}

namespace {

Vec6 plucker_raw(const Vec4& a, const Vec4& p) {
  auto pi = [&](int m, int n) { return a(m) * p(n) - a(n) * p(m); };
  Vec6 v;
  v << pi(0, 1), pi(0, 2), pi(0, 3), pi(2, 3), pi(3, 1), pi(1, 2);
  return v;
}

}  // namespace

Vec6 plucker(const Vec4& a, const Vec4& p) {
  const Vec6 v = plucker_raw(a, p);
  const double scale = a.cwiseAbs().maxCoeff() * p.cwiseAbs().maxCoeff();
  if (!(v.cwiseAbs().maxCoeff() > 1e-12 * scale)) throw DegenerateLine("points are proportional; no line through them");
  return v;
}

cplx plucker_relation(const Vec6& pi) { return pi(0) * pi(3) + pi(1) * pi(4) + pi(2) * pi(5); }

const KleinConvention& klein_convention() {
  // output of calibrate_klein(), frozen
  static const KleinConvention kc{
      {0, 0, 1, 1, 2, 2},
      {1, -1, -1, 1, 1, -1},
      {cplx(1.0), cplx(-1.0), cplx(-1.0), cplx(1.0), cplx(1.0), cplx(-1.0)},
      {cplx(1.0), kI, kI, cplx(1.0), cplx(1.0), kI},
      0.5,
  };
  return kc;
}

Mat6 klein_matrix(const KleinConvention& kc) {
  Mat6 K = Mat6::Zero();
  for (int j = 0; j < 6; ++j) {
    const cplx f = kc.column[j] * kc.line[j] * kc.scale;
    K(j, kc.pair[j]) = f;
    K(j, 3 + kc.pair[j]) = f * static_cast<double>(kc.sign[j]);
  }
  return K;
}

Vec6 klein_x(const Vec4& a, const Vec4& p, const KleinConvention& kc) { return klein_matrix(kc) * plucker(a, p); }

Forms bilinear_forms(const KleinConvention& kc) {
  Forms A;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      A[i][j] = kc.line[i] * kc.column[j] * kc.line[j] * kc.scale *
                (epsilon_matrices()[i].transpose() * bivector(kc.pair[j], kc.sign[j]));
  return A;
}

XMatrix x_matrix(const GeomPhasePoint& pp, const KleinConvention& kc) {
  const auto eps = epsilon_maps(pp.q);
  const Mat6 K = klein_matrix(kc);
  Mat6 X;
  // bilinear in (q, p): a vanishing row (p = 0 or eps_i(q) ~ p) is a valid value
  for (int i = 0; i < 6; ++i) X.row(i) = (kc.line[i] * (K * plucker_raw(eps[i], pp.p))).transpose();
  XMatrix out;
  const double n = max_abs(X);
  out.skew_defect = n > 0 ? max_abs(X + X.transpose()) / n : 0.0;
  out.x = 0.5 * (X - X.transpose());
  return out;
}

HomGrad x_gradient(const GeomPhasePoint& pp, int i, int j) { return form_gradient(default_forms()[i][j], pp); }

cplx chart_bracket(const GeomPhasePoint& pp, const HomGrad& f, const HomGrad& g) {
  const int c = pp.chart;
  cplx s = 0.0;
  for (int a = 0; a < 4; ++a) {
    if (a == c) continue;
    const cplx fq = f.dq(a) - f.dp(c) * pp.p(a), fp = f.dp(a) - f.dp(c) * pp.q(a);
    const cplx gq = g.dq(a) - g.dp(c) * pp.p(a), gp = g.dp(a) - g.dp(c) * pp.q(a);
    s += fq * gp - fp * gq;
  }
  return s;
}

namespace {

double so6_defect_with(const GeomPhasePoint& pp, const Forms& A) {
  const Mat6 X = raw_x(pp, A);
  double worst = 0.0;
  for (int n = 0; n < 6; ++n)
    for (int m = 0; m < 6; ++m)
      for (int p = 0; p < 6; ++p) {
        if (n == m || m == p || n == p) continue;
        worst = std::max(worst, std::abs(form_bracket(pp, A[n][m], A[m][p]) + X(n, p)));
        for (int q = 0; q < 6; ++q) {
          if (q == n || q == m || q == p) continue;
          worst = std::max(worst, std::abs(form_bracket(pp, A[n][m], A[p][q])));
        }
      }
  return worst;
}

double skew_with(const GeomPhasePoint& pp, const Forms& A) {
  const Mat6 X = raw_x(pp, A);
  return max_abs(X + X.transpose()) / max_abs(X);
}

}  // namespace

double so6_defect(const GeomPhasePoint& pp) { return so6_defect_with(pp, default_forms()); }

CalibrationReport calibrate_klein(unsigned seed, int points) {
  std::vector<GeomPhasePoint> pts;
  for (int k = 0; k < points; ++k) pts.push_back(random_point(seed + 7919u * k));
  CalibrationReport rep;
  KleinConvention kc;
  kc.column.fill(1.0);
  kc.line.fill(1.0);
  kc.scale = 1.0;
  // 1. the pair combination with x_jj = 0
  for (int j = 0; j < 6; ++j) {
    bool found = false;
    for (int pr = 0; pr < 3 && !found; ++pr)
      for (int sg : {1, -1}) {
        const Mat4 A = epsilon_matrices()[j].transpose() * bivector(pr, sg);
        bool ok = true;
        for (const auto& pp : pts)
          ok = ok && std::abs(form(A, pp)) < 1e-12 * pp.q.cwiseAbs().maxCoeff() * pp.p.cwiseAbs().maxCoeff();
        if (ok) {
          kc.pair[j] = pr;
          kc.sign[j] = sg;
          found = true;
          break;
        }
      }
    if (!found) throw DegenerateLine("no Klein combination annihilates the diagonal");
  }
  // 2. column factors for skewness
  bool have_column = false;
  KleinConvention best = kc;
  for (int code = 0; code < 4096; ++code) {
    KleinConvention t = kc;
    for (int j = 0, c = code; j < 6; ++j, c /= 4) t.column[5 - j] = kFactors[c % 4];
    const Forms A = bilinear_forms(t);
    bool ok = true;
    for (const auto& pp : pts) ok = ok && skew_with(pp, A) < 1e-9;
    if (ok) {
      ++rep.skew_candidates;
      if (!have_column) best = t;
      have_column = true;
    }
  }
  if (!have_column) throw DegenerateLine("no column factors make x skew");
  kc = best;
  // 3. line factors: x_np / {x_nm, x_mp} must be one constant, fixing the scale
  bool have_line = false;
  for (int code = 0; code < 4096; ++code) {
    KleinConvention t = kc;
    for (int j = 0, c = code; j < 6; ++j, c /= 4) t.line[5 - j] = kFactors[c % 4];
    const Forms A = bilinear_forms(t);
    cplx kappa = 0.0;
    bool ok = true;
    for (const auto& pp : pts) {
      const Mat6 X = raw_x(pp, A);
      if (skew_with(pp, A) > 1e-9) ok = false;
      for (int n = 0; n < 6 && ok; ++n)
        for (int m = 0; m < 6 && ok; ++m)
          for (int p = 0; p < 6 && ok; ++p) {
            if (n == m || m == p || n == p) continue;
            const cplx r = -form_bracket(pp, A[n][m], A[m][p]) / X(n, p);
            if (kappa == cplx(0.0)) kappa = r;
            if (std::abs(r - kappa) > 1e-8 * std::abs(kappa)) ok = false;
          }
      if (!ok) break;
    }
    if (!ok) continue;
    ++rep.line_candidates;
    if (!have_line) {
      t.scale = 1.0 / kappa.real();
      if (std::abs(kappa.imag()) > 1e-8 * std::abs(kappa)) continue;
      best = t;
      have_line = true;
    }
  }
  if (!have_line) throw DegenerateLine("no line factors satisfy the so(6) relations");
  rep.convention = best;
  const Forms A = bilinear_forms(best);
  for (const auto& pp : pts) {
    rep.skew_defect = std::max(rep.skew_defect, skew_with(pp, A));
    rep.so6_defect = std::max(rep.so6_defect, so6_defect_with(pp, A));
  }
  return rep;
}

std::array<cplx, 6> gp_hamiltonians(const GeomPhasePoint& pp, const Sextet& z) {
  const Mat6 x = x_matrix(pp).x;
  std::array<cplx, 6> H{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (j != i) H[i] += x(i, j) * x(i, j) / (z[i] - z[j]);
  return H;
}

HomGrad gp_gradient(const GeomPhasePoint& pp, const Sextet& z, int i) {
  const auto& A = default_forms();
  HomGrad g;
  for (int j = 0; j < 6; ++j) {
    if (j == i) continue;
    const cplx w = 2.0 * form(A[i][j], pp) / (z[i] - z[j]);
    g.dq += w * (A[i][j] * pp.p);
    g.dp += w * (A[i][j].transpose() * pp.q);
  }
  return g;
}

Mat6 lax_matrix(const GeomPhasePoint& pp, const Sextet& z, cplx zeta) {
  Mat6 L = zeta * x_matrix(pp).x;
  for (int k = 0; k < 6; ++k) L(k, k) += z[k];
  return L;
}

namespace {

Mat6 mpow(const Mat6& M, int k) {
  Mat6 R = Mat6::Identity();
  for (int i = 0; i < k; ++i) R = R * M;
  return R;
}

}  // namespace

LaxPair lax_pair(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, cplx zeta_p, int l) {
  if (std::abs(zeta - zeta_p) < 1e-10 || std::abs(zeta + zeta_p) < 1e-10)
    throw PoleCollision("zeta' coincides with +-zeta");
  if (l < 1) throw ConfigurationError("trace power l must be >= 1");
  LaxPair out;
  out.L = lax_matrix(pp, z, zeta_p);
  const double ld = l;
  out.M = (ld * zeta * zeta_p / (zeta - zeta_p)) * mpow(lax_matrix(pp, z, zeta), l - 1) +
          (ld * zeta * zeta_p / (zeta + zeta_p)) * mpow(lax_matrix(pp, z, -zeta), l - 1);
  return out;
}

cplx trace_power(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l) {
  return mpow(lax_matrix(pp, z, zeta), l).trace();
}

HomGrad trace_power_gradient(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l) {
  HomGrad g;
  if (l < 1) return g;
  const auto& A = default_forms();
  const Mat6 P = mpow(lax_matrix(pp, z, zeta), l - 1);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const cplx w = static_cast<double>(l) * zeta * P(j, i);
      g.dq += w * (A[i][j] * pp.p);
      g.dp += w * (A[i][j].transpose() * pp.q);
    }
  return g;
}

namespace {

using Chart6 = Eigen::Matrix<cplx, 6, 1>;

Chart6 to_chart(const GeomPhasePoint& pp) {
  Chart6 v;
  for (int a = 0, k = 0; a < 4; ++a)
    if (a != pp.chart) {
      v(k) = pp.q(a);
      v(k + 3) = pp.p(a);
      ++k;
    }
  return v;
}

GeomPhasePoint from_chart(const Chart6& v, int chart) {
  GeomPhasePoint pp;
  pp.chart = chart;
  pp.q(chart) = 1.0;
  cplx acc = 0.0;
  for (int a = 0, k = 0; a < 4; ++a)
    if (a != chart) {
      pp.q(a) = v(k);
      pp.p(a) = v(k + 3);
      acc += v(k) * v(k + 3);
      ++k;
    }
  pp.p(chart) = -acc;
  return pp;
}

Chart6 field(const GeomPhasePoint& pp, const GradientFn& grad) {
  const HomGrad g = grad(pp);
  const int c = pp.chart;
  Chart6 f;
  for (int a = 0, k = 0; a < 4; ++a)
    if (a != c) {
      f(k) = -(g.dp(a) - g.dp(c) * pp.q(a));
      f(k + 3) = g.dq(a) - g.dp(c) * pp.p(a);
      ++k;
    }
  return f;
}

}  // namespace

GeomPhasePoint flow_step(const GeomPhasePoint& pp, const GradientFn& grad, double dt) {
  const int c = pp.chart;
  const Chart6 v = to_chart(pp);
  const Chart6 k1 = field(pp, grad);
  const Chart6 k2 = field(from_chart(v + 0.5 * dt * k1, c), grad);
  const Chart6 k3 = field(from_chart(v + 0.5 * dt * k2, c), grad);
  const Chart6 k4 = field(from_chart(v + dt * k3, c), grad);
  return from_chart(v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), c);
}

GeomPhasePoint rk4_step(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, int l, double dt) {
  return flow_step(pp, [&](const GeomPhasePoint& s) { return trace_power_gradient(s, z, zeta, l); }, dt);
}

LaxTrajectory lax_flow(const GeomPhasePoint& pp0, const Sextet& z, cplx zeta, int l, const LaxFlowOptions& opt) {
  validate(pp0);
  validate(z);
  LaxTrajectory tr;
  auto spectrum = [&](const GeomPhasePoint& pp) {
    Eigen::ComplexEigenSolver<Mat6> es(lax_matrix(pp, z, opt.probe), false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + 6);
    return ev;
  };
  GeomPhasePoint cur = normalize(pp0, pp0.chart);
  const auto ev0 = spectrum(cur);
  const auto H0 = gp_hamiltonians(cur, z);
  tr.times.push_back(0.0);
  tr.states.push_back(cur);
  const long steps = std::lround(opt.t_end / opt.dt);
  for (long n = 1; n <= steps; ++n) {
    cur = rk4_step(cur, z, zeta, l, opt.dt);
    if (!cur.q.allFinite() || !cur.p.allFinite()) throw ChartSingularity("flow left every affine chart");
    if (cur.q.cwiseAbs().maxCoeff() > opt.chart_limit) {
      const int c = best_chart(cur.q);
      cur = normalize(cur, c);
      ++tr.chart_switches;
      if (cur.q.cwiseAbs().maxCoeff() > opt.chart_limit) throw ChartSingularity("chart switch did not restore bounded coordinates");
    }
    const auto ev = spectrum(cur);
    tr.eigen_drift = std::max(tr.eigen_drift, num::matching_distance(ev, ev0));
    const auto H = gp_hamiltonians(cur, z);
    for (int i = 0; i < 6; ++i) tr.gp_drift = std::max(tr.gp_drift, std::abs(H[i] - H0[i]));
    if (n % std::max(1, opt.store_every) == 0 || n == steps) {
      tr.times.push_back(n * opt.dt);
      tr.states.push_back(cur);
    }
  }
  return tr;
}

LaxResidual lax_residual(const GeomPhasePoint& pp, const Sextet& z, cplx zeta, cplx zeta_p, int l, double h) {
  auto central = [&](double s) -> Mat6 {
    const Mat6 Lp = lax_matrix(rk4_step(pp, z, zeta, l, s), z, zeta_p);
    const Mat6 Lm = lax_matrix(rk4_step(pp, z, zeta, l, -s), z, zeta_p);
    return (Lp - Lm) / (2.0 * s);
  };
  const Mat6 D = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  const LaxPair lp = lax_pair(pp, z, zeta, zeta_p, l);
  const Mat6 C = lp.M * lp.L - lp.L * lp.M;
  return {max_abs(D - C), max_abs(C)};
}

}  // namespace hitchin::sl2
