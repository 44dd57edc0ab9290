#include "hitchin/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"

namespace hitchin::spectral {

Family parse_family(const std::string& s) {
  if (s == "GL") return Family::GL;
  if (s == "SL") return Family::SL;
  if (s == "SO_odd") return Family::SO_odd;
  if (s == "SP") return Family::SP;
  if (s == "SO_even") return Family::SO_even;
  throw TypeError("unknown Lie family '" + s + "' (expected GL, SL, SO_odd, SP, SO_even)");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::GL: return "GL";
    case Family::SL: return "SL";
    case Family::SO_odd: return "SO_odd";
    case Family::SP: return "SP";
    case Family::SO_even: return "SO_even";
  }
  return "?";
}

LieTypeSpec resolve_type(Family family, int n) {
  if (n < 1) throw RankError("rank must be >= 1");
  LieTypeSpec s;
  s.family = family;
  s.rank = n;
  switch (family) {
    case Family::GL:
      s.d = n;
      for (int j = 1; j <= n; ++j) s.deltas.push_back(j);
      s.dim = n * n;
      break;
    case Family::SL:
      if (n < 2) throw RankError("SL needs rank >= 2");
      s.d = n;
      for (int j = 2; j <= n; ++j) s.deltas.push_back(j);
      s.dim = n * n - 1;
      break;
    case Family::SO_odd:
      s.d = 2 * n + 1;
      for (int j = 1; j <= n; ++j) s.deltas.push_back(2 * j);
      s.dim = n * (2 * n + 1);
      break;
    case Family::SP:
      s.d = 2 * n;
      for (int j = 1; j <= n; ++j) s.deltas.push_back(2 * j);
      s.dim = n * (2 * n + 1);
      break;
    case Family::SO_even:
      if (n < 2) throw RankError("SO_even needs rank >= 2");
      s.d = 2 * n;
      for (int j = 1; j < n; ++j) s.deltas.push_back(2 * j);
      s.deltas.push_back(n);
      s.dim = n * (2 * n - 1);
      s.square_last = true;
      break;
  }
  s.dees = s.deltas;
  if (s.square_last) s.dees.back() = 2 * s.deltas.back();
  int kostant = 0;
  for (int dl : s.deltas) kostant += 2 * dl - 1;
  if (kostant != s.dim) throw RankError("Kostant identity fails for " + family_name(family));
  return s;
}

CoefficientLayout coefficient_layout(const LieTypeSpec& spec, int g) {
  if (g < 2) throw DegreeError("coefficient layout needs genus >= 2");
  CoefficientLayout L;
  int off = 0;
  for (std::size_t j = 0; j < spec.deltas.size(); ++j) {
    Block b;
    b.delta = spec.deltas[j];
    b.dee = spec.dees[j];
    b.x_size = b.delta * (g - 1) + 1;
    b.y_size = std::max(0, (b.delta - 1) * (g - 1) - 1);
    b.offset = off;
    off += b.x_size + b.y_size;
    L.blocks.push_back(b);
  }
  L.h = off;
  return L;
}

System::System(const LieTypeSpec& s, const curve::HyperellipticCurve& c)
    : spec(s), curve(&c), layout(coefficient_layout(s, c.genus())) {}

namespace {

struct BlockEval {
  cplx B, dBx;
};

BlockEval eval_block(const Block& b, const CVector& H, cplx x, cplx y, cplx& dBy) {
  cplx p = 0.0, dp = 0.0, q = 0.0, dq = 0.0;
  for (int k = b.x_size - 1; k >= 0; --k) {
    dp = dp * x + p;
    p = p * x + H(b.offset + k);
  }
  for (int s = b.y_size - 1; s >= 0; --s) {
    dq = dq * x + q;
    q = q * x + H(b.offset + b.x_size + s);
  }
  dBy = q;
  return {p + y * q, dp + y * dq};
}

}  // namespace

std::vector<cplx> brackets(const System& sys, const CVector& H, cplx x, cplx y) {
  std::vector<cplx> out;
  cplx dy;
  for (const auto& b : sys.layout.blocks) out.push_back(eval_block(b, H, x, y, dy).B);
  return out;
}

RValue eval_R(const System& sys, const CVector& H, const SpectralPoint& pt) {
  const auto& spec = sys.spec;
  const int d = spec.d;
  if (H.size() != sys.h()) throw ConfigurationError("Hamiltonian vector has wrong length");
  RValue r;
  r.dR_dH = CVector::Zero(sys.h());
  const cplx lam = pt.lambda;
  r.R = num::ipow(lam, d);
  r.dR_dlambda = d >= 1 ? static_cast<double>(d) * num::ipow(lam, d - 1) : cplx(0.0);
  r.dR_dx_partial = 0.0;
  r.dR_dy = 0.0;
  const std::size_t nb = sys.layout.blocks.size();
  for (std::size_t j = 0; j < nb; ++j) {
    const Block& b = sys.layout.blocks[j];
    cplx dBy;
    BlockEval be = eval_block(b, H, pt.x, pt.y, dBy);
    const int e = d - b.dee;
    const cplx lp = num::ipow(lam, e);
    const cplx dlp = e >= 1 ? static_cast<double>(e) * num::ipow(lam, e - 1) : cplx(0.0);
    const bool sq = spec.square_last && j + 1 == nb;
    const cplx val = sq ? be.B * be.B : be.B;
    const cplx chain = sq ? 2.0 * be.B : cplx(1.0);
    r.R += lp * val;
    r.dR_dlambda += dlp * val;
    r.dR_dx_partial += lp * chain * be.dBx;
    r.dR_dy += lp * chain * dBy;
    cplx xp = 1.0;
    for (int k = 0; k < b.x_size; ++k, xp *= pt.x) r.dR_dH(b.offset + k) = lp * chain * xp;
    xp = 1.0;
    for (int s = 0; s < b.y_size; ++s, xp *= pt.x) r.dR_dH(b.offset + b.x_size + s) = lp * chain * xp * pt.y;
  }
  r.dR_dx = r.dR_dx_partial + r.dR_dy * sys.curve->dP(pt.x) / (2.0 * pt.y);
  if (r.dR_dy == cplx(0.0)) r.dR_dx = r.dR_dx_partial;
  return r;
}

std::vector<cplx> lambda_polynomial(const System& sys, const CVector& H, cplx x, cplx y) {
  const int d = sys.spec.d;
  std::vector<cplx> c(d + 1, cplx(0.0));
  c[d] = 1.0;
  auto B = brackets(sys, H, x, y);
  for (std::size_t j = 0; j < B.size(); ++j) {
    const bool sq = sys.spec.square_last && j + 1 == B.size();
    c[d - sys.layout.blocks[j].dee] += sq ? B[j] * B[j] : B[j];
  }
  return c;
}

LambdaRoots lambda_roots(const System& sys, const CVector& H, cplx x, cplx y) {
  auto c = lambda_polynomial(sys, H, x, y);
  LambdaRoots out;
  out.roots = num::poly_roots(c, 2);
  out.min_separation = num::min_separation(out.roots);
  out.ill_conditioned = out.min_separation < 1e-8;
  return out;
}

namespace {

std::vector<cplx> poly_add(std::vector<cplx> a, const std::vector<cplx>& b, cplx s = 1.0) {
  if (a.size() < b.size()) a.resize(b.size(), cplx(0.0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
  return a;
}

}  // namespace

DiscriminantCount discriminant_zero_count(const System& sys, const CVector& H, double cluster_tol) {
  if (sys.spec.d != 2) throw TypeError("discriminant count implemented for d = 2 systems");
  // split each bracket into p(x) + y q(x)
  std::vector<std::vector<cplx>> p, q;
  for (const auto& b : sys.layout.blocks) {
    p.emplace_back(H.data() + b.offset, H.data() + b.offset + b.x_size);
    std::vector<cplx> qq(H.data() + b.offset + b.x_size, H.data() + b.offset + b.x_size + b.y_size);
    if (qq.empty()) qq.push_back(0.0);
    q.push_back(qq);
  }
  const auto P = std::vector<cplx>(sys.curve->coeffs().begin(), sys.curve->coeffs().end());
  std::vector<cplx> p1{0.0}, q1{0.0}, p2, q2;
  if (sys.layout.blocks.size() == 2) {
    p1 = p[0];
    q1 = q[0];
    p2 = p[1];
    q2 = q[1];
  } else {
    p2 = p[0];
    q2 = q[0];
  }
  // Delta = a + b y
  std::vector<cplx> a = poly_add(num::poly_mul(p1, p1), num::poly_mul(P, num::poly_mul(q1, q1)));
  a = poly_add(a, p2, -4.0);
  std::vector<cplx> b = num::poly_mul(p1, q1);
  for (auto& v : b) v *= 2.0;
  b = poly_add(b, q2, -4.0);
  std::vector<cplx> N = poly_add(num::poly_mul(a, a), num::poly_mul(P, num::poly_mul(b, b)), -1.0);
  const int deg = num::poly_degree(N, 1e-13);
  DiscriminantCount out;
  if (deg < 0) throw BranchLocus("discriminant vanishes identically");
  N.resize(deg + 1);
  out.zeros_on_curve = deg;
  auto roots = num::poly_roots(N, 3);
  double scale = 1.0;
  for (cplx r : roots) scale = std::max(scale, std::abs(r));
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    cplx sum = roots[i];
    int m = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (!used[j] && std::abs(roots[j] - roots[i]) < cluster_tol * scale) {
        used[j] = true;
        sum += roots[j];
        ++m;
      }
    const cplx x0 = sum / static_cast<double>(m);
    out.x_roots.push_back(x0);
    out.multiplicities.push_back(m);
    const cplx y0 = std::sqrt(sys.curve->P(x0));
    const cplx av = num::poly_eval(a, x0), bv = num::poly_eval(b, x0);
    const double ref_scale = 1.0 + std::abs(num::poly_eval(num::poly_mul(p1, p1), x0)) + 4.0 * std::abs(num::poly_eval(p2, x0));
    int sheets = 0;
    for (int s = 0; s < 2; ++s) {
      const cplx dv = av + (s ? -1.0 : 1.0) * bv * y0;
      if (std::abs(dv) < 1e-6 * ref_scale) ++sheets;
    }
    if (std::abs(y0) < 1e-10) sheets = 1;  // Weierstrass point: a single point of the curve
    if (sheets == 2) {
      if ((m / 2) % 2 == 1) out.odd_order_points += 2;
    } else {
      if (m % 2 == 1) out.odd_order_points += 1;
    }
  }
  out.zeros_on_cover = 2 * out.zeros_on_curve;
  const int g = sys.genus();
  out.riemann_hurwitz_genus = (2 * (2 * g - 2) + out.odd_order_points) / 2 + 1;
  return out;
}

}  // namespace hitchin::spectral
