#include "hitchin/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hitchin::num {

cplx poly_eval(std::span<const cplx> c, cplx x) {
  cplx acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::pair<cplx, cplx> poly_eval_d(std::span<const cplx> c, cplx x) {
  cplx p = 0.0, dp = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    dp = dp * x + p;
    p = p * x + c[i];
  }
  return {p, dp};
}

std::vector<cplx> poly_derivative(std::span<const cplx> c) {
  if (c.size() <= 1) return {cplx(0.0)};
  std::vector<cplx> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

std::vector<cplx> poly_mul(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<cplx> r(a.size() + b.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

int poly_degree(std::span<const cplx> c, double tiny) {
  double mx = 0.0;
  for (auto v : c) mx = std::max(mx, std::abs(v));
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    if (std::abs(c[i]) > tiny * mx && std::abs(c[i]) > 0.0) return i;
  return -1;
}

std::vector<cplx> poly_roots(std::span<const cplx> c, int polish_steps) {
  const int deg = poly_degree(c);
  if (deg < 1) return {};
  const cplx lead = c[deg];
  std::vector<cplx> roots;
  if (deg == 1) {
    roots.push_back(-c[0] / lead);
  } else {
    CMatrix comp = CMatrix::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / lead;
    Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
    for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  }
  std::span<const cplx> used(c.data(), deg + 1);
  for (auto& r : roots) {
    for (int s = 0; s < polish_steps; ++s) {
      auto [p, dp] = poly_eval_d(used, r);
      if (std::abs(dp) == 0.0) break;
      cplx cand = r - p / dp;
      if (std::abs(poly_eval(used, cand)) <= std::abs(p)) r = cand;
      else break;
    }
  }
  return roots;
}

double min_separation(std::span<const cplx> pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
  return r;
}

CVector panel(const VecFn& f, double a, double b, const GaussRule& rule) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  CVector acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    CVector v = f(mid + half * rule.nodes[i]);
    if (i == 0) acc = CVector::Zero(v.size());
    acc += rule.weights[i] * v;
  }
  return acc * half;
}

CVector adapt(const VecFn& f, double a, double b, const CVector& whole, const GaussRule& rule,
              double tol, int depth) {
  const double m = 0.5 * (a + b);
  CVector left = panel(f, a, m, rule);
  CVector right = panel(f, m, b, rule);
  CVector sum = left + right;
  const double scale = std::max(1.0, sum.cwiseAbs().maxCoeff());
  if ((sum - whole).cwiseAbs().maxCoeff() <= tol * scale || depth <= 0) return sum;
  return adapt(f, a, m, left, rule, tol, depth - 1) + adapt(f, m, b, right, rule, tol, depth - 1);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

CVector integrate_adaptive(const VecFn& f, double a, double b, const AdaptiveOptions& opt) {
  const GaussRule& rule = gauss_legendre(opt.order);
  const int panels = std::max(1, opt.min_panels);
  CVector total;
  for (int p = 0; p < panels; ++p) {
    double pa = a + (b - a) * p / panels;
    double pb = a + (b - a) * (p + 1) / panels;
    CVector whole = panel(f, pa, pb, rule);
    CVector part = adapt(f, pa, pb, whole, rule, opt.tol, opt.max_depth);
    if (p == 0) total = part;
    else total += part;
  }
  return total;
}

CVector integrate_composite(const VecFn& f, double a, double b, int panels, int order) {
  const GaussRule& rule = gauss_legendre(order);
  CVector total;
  for (int p = 0; p < panels; ++p) {
    double pa = a + (b - a) * p / panels;
    double pb = a + (b - a) * (p + 1) / panels;
    CVector part = panel(f, pa, pb, rule);
    if (p == 0) total = part;
    else total += part;
  }
  return total;
}

double matching_max_cost(const RMatrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (n == 0) return 0.0;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  if (n <= 8) {
    double best_total = std::numeric_limits<double>::infinity(), best_max = 0.0;
    do {
      double total = 0.0, mx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = cost(i, perm[i]);
        total += d;
        mx = std::max(mx, d);
      }
      if (total < best_total) {
        best_total = total;
        best_max = mx;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_max;
  }
  std::vector<bool> used(n, false);
  double mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = 0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && cost(i, j) < d) {
        d = cost(i, j);
        pick = j;
      }
    used[pick] = true;
    mx = std::max(mx, d);
  }
  return mx;
}

double matching_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("matching_distance: sizes differ");
  RMatrix cost(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) cost(i, j) = std::abs(a[i] - b[j]);
  return matching_max_cost(cost);
}

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

}  // namespace hitchin::num
