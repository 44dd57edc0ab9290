#include "hitchin/theta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"

namespace hitchin::theta {

namespace {

struct Lattice {
  int g = 0;
  RMatrix T;      // upper triangular, pi Y = T^T T
  RVector c;      // Y^-1 Im z
  double shift;   // pi c^T Y c
  double radius;
};

double shortest_vector(const RMatrix& T) {
  const int g = static_cast<int>(T.rows());
  const int box = g <= 4 ? 2 : 1;
  std::vector<int> n(g, -box);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    bool zero = std::all_of(n.begin(), n.end(), [](int v) { return v == 0; });
    if (!zero) {
      RVector v(g);
      for (int i = 0; i < g; ++i) v(i) = n[i];
      best = std::min(best, (T * v).norm());
    }
    int i = 0;
    while (i < g && n[i] == box) n[i++] = -box;
    if (i == g) break;
    ++n[i];
  }
  return best;
}

double tail_bound(int g, double rho, double R) {
  // (g/2) (2/rho)^g Gamma(g/2, (R - rho/2)^2)
  const double x = (R - 0.5 * rho) * (R - 0.5 * rho);
  return 0.5 * g * std::pow(2.0 / rho, g) * upper_gamma_half(g, x);
}

Lattice setup(const CVector& z, const CMatrix& tau, int deriv_order, double tol) {
  const int g = static_cast<int>(tau.rows());
  if (tau.cols() != g || z.size() != g) throw ConfigurationError("theta: dimension mismatch between z and tau");
  RMatrix Y = 0.5 * (tau.imag() + tau.imag().transpose());
  Eigen::LLT<RMatrix> llt(kPi * Y);
  if (llt.info() != Eigen::Success) throw ConfigurationError("theta: Im tau is not positive definite");
  Lattice L;
  L.g = g;
  L.T = llt.matrixU();
  L.c = Y.ldlt().solve(z.imag());
  L.shift = kPi * L.c.dot(Y * L.c);
  const double rho = shortest_vector(L.T);
  const double tinv = L.T.inverse().norm();
  double R = 0.5 * (std::sqrt(static_cast<double>(g)) + rho) + 0.05;
  for (int it = 0; it < 10000; ++it, R += 0.05) {
    const double poly = std::pow(1.0 + 2.0 * kPi * (tinv * (R + 2.0) + L.c.norm()), deriv_order);
    if (tail_bound(g, rho, R) * poly < tol) break;
  }
  L.radius = R;
  return L;
}

// Visits n in Z^g with |T (n + c)| <= R.
template <class F>
long enumerate(const Lattice& L, long cap, F&& visit) {
  const int g = L.g;
  std::vector<int> n(g);
  long count = 0;
  // recursion from the last coordinate; partial[i] = sum_{k>i} rows
  std::function<void(int, double)> rec = [&](int i, double rem) {
    // row i of T(n+c): T_ii (n_i + c_i) + sum_{k>i} T_ik (n_k + c_k)
    double off = 0.0;
    for (int k = i + 1; k < g; ++k) off += L.T(i, k) * (n[k] + L.c(k));
    const double tii = L.T(i, i);
    const double half = std::sqrt(std::max(0.0, rem)) / tii;
    const double center = -L.c(i) - off / tii;
    const int lo = static_cast<int>(std::ceil(center - half));
    const int hi = static_cast<int>(std::floor(center + half));
    for (int v = lo; v <= hi; ++v) {
      n[i] = v;
      const double row = tii * (v + L.c(i)) + off;
      const double r2 = rem - row * row;
      if (r2 < 0) continue;
      if (i == 0) {
        if (++count > cap) throw TruncationOverflow("theta: lattice point budget exceeded");
        visit(n);
      } else {
        rec(i - 1, r2);
      }
    }
  };
  rec(g - 1, L.radius * L.radius);
  return count;
}

cplx term(const std::vector<int>& n, const CVector& z, const CMatrix& tau, double shift) {
  const int g = static_cast<int>(n.size());
  cplx e = 0.0;
  for (int i = 0; i < g; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < g; ++j) row += tau(i, j) * static_cast<double>(n[j]);
    e += static_cast<double>(n[i]) * (kPi * kI * row + 2.0 * kPi * kI * z(i));
  }
  return std::exp(e - shift);
}

}  // namespace

double upper_gamma_half(int two_s, double x) {
  if (two_s <= 0) throw ConfigurationError("upper_gamma_half: s must be positive");
  if (x <= 0) return std::tgamma(0.5 * two_s);
  double val;
  int cur;
  if (two_s % 2 == 1) {
    val = std::sqrt(kPi) * std::erfc(std::sqrt(x));
    cur = 1;
  } else {
    val = std::exp(-x);
    cur = 2;
  }
  // Gamma(s + 1, x) = s Gamma(s, x) + x^s e^-x
  while (cur < two_s) {
    const double s = 0.5 * cur;
    val = s * val + std::pow(x, s) * std::exp(-x);
    cur += 2;
  }
  return val;
}

Truncation truncation(const CVector& z, const CMatrix& tau, int deriv_order, const ThetaOptions& opt) {
  Lattice L = setup(z, tau, deriv_order, opt.tol);
  Truncation t;
  t.radius = L.radius;
  t.points = enumerate(L, opt.max_points, [](const std::vector<int>&) {});
  return t;
}

cplx riemann_theta(const ThetaRequest& req) {
  const int g = static_cast<int>(req.tau.rows());
  std::vector<int> a = req.derivative;
  if (a.empty()) a.assign(g, 0);
  if (static_cast<int>(a.size()) != g) throw ConfigurationError("theta: derivative multi-index has wrong length");
  int order = 0;
  for (int v : a) {
    if (v < 0) throw ConfigurationError("theta: negative derivative order");
    order += v;
  }
  if (!(req.tolerance > 0)) throw ConfigurationError("theta: tolerance must be positive");
  Lattice L = setup(req.z, req.tau, order, req.tolerance);
  cplx sum = 0.0;
  enumerate(L, req.max_points, [&](const std::vector<int>& n) {
    cplx f = term(n, req.z, req.tau, L.shift);
    for (int s = 0; s < g; ++s) f *= num::ipow(2.0 * kPi * kI * static_cast<double>(n[s]), a[s]);
    sum += f;
  });
  return sum * std::exp(L.shift);
}

cplx riemann_theta(const CVector& z, const CMatrix& tau, const ThetaOptions& opt) {
  ThetaRequest r{z, tau, {}, opt.tol, opt.max_points};
  return riemann_theta(r);
}

ThetaGrad theta_with_gradient(const CVector& z, const CMatrix& tau, const ThetaOptions& opt) {
  const int g = static_cast<int>(tau.rows());
  Lattice L = setup(z, tau, 1, opt.tol);
  ThetaGrad out{0.0, CVector::Zero(g), 0.0};
  enumerate(L, opt.max_points, [&](const std::vector<int>& n) {
    const cplx f = term(n, z, tau, L.shift);
    out.value += f;
    out.abs_sum += std::abs(f);
    for (int s = 0; s < g; ++s) out.grad(s) += 2.0 * kPi * kI * static_cast<double>(n[s]) * f;
  });
  const double e = std::exp(L.shift);
  out.value *= e;
  out.grad *= e;
  out.abs_sum *= e;
  return out;
}

series::MultiSeries theta_taylor(const CVector& z, const CMatrix& tau, int order, const ThetaOptions& opt) {
  const int g = static_cast<int>(tau.rows());
  series::MultiSeries S(g, order);
  Lattice L = setup(z, tau, order, opt.tol);
  const double e = std::exp(L.shift);
  std::vector<double> fact(order + 1, 1.0);
  for (int i = 1; i <= order; ++i) fact[i] = fact[i - 1] * i;
  enumerate(L, opt.max_points, [&](const std::vector<int>& n) {
    const cplx f = term(n, z, tau, L.shift) * e;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const auto& a = S.exponent(k);
      cplx m = f;
      for (int s = 0; s < g; ++s)
        if (a[s] > 0) m *= num::ipow(2.0 * kPi * kI * static_cast<double>(n[s]), a[s]) / fact[a[s]];
      S[k] += m;
    }
  });
  return S;
}

CVector divisor_image(const curve::HyperellipticCurve& c, const curve::ThetaData& td,
                      std::span<const curve::CurvePoint> pts) {
  CVector phi = CVector::Zero(c.genus());
  for (const auto& p : pts) phi += curve::abel_map(c, td, p, curve::CurvePoint::infinity());
  return phi;
}

namespace {

curve::CurvePoint random_point(const curve::HyperellipticCurve& c, std::mt19937_64& rng) {
  const auto& e = c.branch_points();
  double lo = e.front().real(), hi = lo, ilo = e.front().imag(), ihi = ilo;
  for (cplx b : e) {
    lo = std::min(lo, b.real());
    hi = std::max(hi, b.real());
    ilo = std::min(ilo, b.imag());
    ihi = std::max(ihi, b.imag());
  }
  std::uniform_real_distribution<double> ux(lo - 1.0, hi + 1.0), uy(ilo - 1.5, ihi + 1.5), coin(0.0, 1.0);
  while (true) {
    cplx x(ux(rng), uy(rng));
    if (c.distance_to_branch(x) < 0.1 * c.min_branch_separation()) continue;
    cplx y = std::sqrt(c.P(x));
    if (coin(rng) < 0.5) y = -y;
    return {x, y, false};
  }
}

}  // namespace

double riemann_constants(const curve::HyperellipticCurve& c, curve::ThetaData& td, unsigned seed, int samples) {
  const int g = c.genus();
  std::mt19937_64 rng(seed);
  std::vector<CVector> images;
  for (int s = 0; s < samples; ++s) {
    CVector v = CVector::Zero(g);
    for (int p = 0; p < g - 1; ++p) v += curve::abel_map(c, td, random_point(c, rng), curve::CurvePoint::infinity());
    images.push_back(v);
    if (g == 1) break;
  }
  double best = std::numeric_limits<double>::infinity();
  CVector bestK;
  for (int mask = 0; mask < (1 << (2 * g)); ++mask) {
    RVector a(g), b(g);
    for (int i = 0; i < g; ++i) {
      a(i) = (mask >> i) & 1;
      b(i) = (mask >> (g + i)) & 1;
    }
    CVector K = 0.5 * (a.cast<cplx>() + td.tau * b.cast<cplx>());
    double worst = 0.0;
    for (const auto& v : images) {
      ThetaGrad t = theta_with_gradient(v + K, td.tau);
      worst = std::max(worst, std::abs(t.value) / t.abs_sum);
      if (worst > best) break;
    }
    if (worst < best) {
      best = worst;
      bestK = K;
    }
  }
  if (best > 1e-6)
    throw ThetaDivisor("no half period satisfies Riemann vanishing (best residual " + std::to_string(best) + ")");
  td.riemann_constants = bestK;
  return best;
}

cplx dubrovin_kappa(const CMatrix& jets, int i, const std::vector<int>& j, int k) {
  const int g = static_cast<int>(jets.rows());
  const int top = 2 * k - 1;  // z-degree needed from prod A_s^{j_s}
  if (jets.cols() < 2 * k) throw ConfigurationError("abel jets needed to order 2k");
  // A_s(z) = sum_l phi_s^(l) / l z^l, as dense coefficient vectors of length top+1
  std::vector<cplx> prod(top + 1, cplx(0.0));
  prod[0] = 1.0;
  for (int s = 0; s < g; ++s) {
    std::vector<cplx> A(top + 1, cplx(0.0));
    for (int l = 1; l <= top; ++l) A[l] = jets(s, l - 1) / static_cast<double>(l);
    for (int p = 0; p < j[s]; ++p) {
      std::vector<cplx> next(top + 1, cplx(0.0));
      for (int u = 0; u <= top; ++u)
        if (prod[u] != cplx(0.0))
          for (int v = 1; u + v <= top; ++v) next[u + v] += prod[u] * A[v];
      prod = next;
    }
  }
  // v_i / dz = sum_l phi_i^(l) z^(l-1); the z^(2k-1) coefficient of the product
  cplx kappa = 0.0;
  for (int l = 1; l <= 2 * k; ++l) kappa += jets(i, l - 1) * prod[2 * k - l];
  return kappa;
}

cplx residue_series(const curve::ThetaData& td, const CVector& phi, int k) {
  const int g = td.genus;
  if (k < 1) throw ConfigurationError("sigma: k must be >= 1");
  const CVector w = -phi - td.riemann_constants;
  ThetaGrad tg = theta_with_gradient(w, td.tau);
  if (std::abs(tg.value) < 1e-12 * tg.abs_sum) throw ThetaDivisor("theta(-phi-K) vanishes");
  series::MultiSeries L = theta_taylor(w, td.tau, 2 * k).log();
  cplx total = 0.0;
  const auto multi = series::monomials(g, 2 * k - 1);
  for (int i = 0; i < g; ++i) {
    series::MultiSeries Di = L.derivative(i);
    for (const auto& j : multi) {
      const cplx kap = dubrovin_kappa(td.abel_jets, i, j, k);
      if (kap == cplx(0.0)) continue;
      total += kap * Di.coeff(j);
    }
  }
  return total;
}

cplx residue_contour(const curve::ThetaData& td, const curve::HyperellipticCurve* c, const CVector& phi, int k,
                     const ContourOptions& opt) {
  const int g = td.genus;
  double r = opt.radius;
  if (r <= 0) r = c ? 0.5 * c->chart_radius() : 0.05;
  auto eval_plain = [&](int N) {
    cplx acc = 0.0;
    for (int n = 0; n < N; ++n) {
      const cplx z = std::polar(r, 2 * kPi * (n + 0.5) / N);
      CVector A(g), f(g);
      if (c) {
        A = curve::abel_map_z(*c, td, z);
        const cplx w = std::sqrt(c->w_squared(z));
        f = curve::normalized_differentials_z(*c, td, z, w);
      } else {
        A.setZero();
        f.setZero();
        for (int l = 1; l <= td.abel_jets.cols(); ++l) {
          A += td.abel_jets.col(l - 1) * (std::pow(z, l) / static_cast<double>(l));
          f += td.abel_jets.col(l - 1) * std::pow(z, l - 1);
        }
      }
      ThetaGrad t = theta_with_gradient(A - phi - td.riemann_constants, td.tau);
      if (std::abs(t.value) < 1e-14 * t.abs_sum) throw ThetaDivisor("theta vanishes on the residue contour");
      const cplx F = std::pow(z, -2 * k) * ((t.grad.transpose() * f)(0) / t.value);
      acc += F * z;
    }
    return acc / static_cast<double>(N);
  };
  const cplx coarse = eval_plain(opt.samples);
  const cplx fine = eval_plain(2 * opt.samples);
  if (std::abs(fine - coarse) > opt.stability_tol * std::max(1.0, std::abs(fine)))
    throw ResidueUnstable("contour residue changed by " + std::to_string(std::abs(fine - coarse)) +
                          " under sample doubling");
  return fine;
}

SigmaCalibration calibrate_sigma(const curve::HyperellipticCurve& c, const curve::ThetaData& td, int kmax) {
  const int g = c.genus();
  const auto& e = c.branch_points();
  cplx center = 0.0;
  for (cplx b : e) center += b;
  center /= static_cast<double>(e.size());
  SigmaCalibration cal;
  const double sep = c.min_branch_separation();
  for (int i = 0; cal.reference.size() < static_cast<std::size_t>(g); ++i) {
    const cplx x = center + std::polar(0.37 * sep + 0.61 * sep * i, 0.9 + 2.3 * i);
    if (c.distance_to_branch(x) < 0.2 * sep) continue;
    cal.reference.push_back({x, std::sqrt(c.P(x)), false});
  }
  const CVector phi = divisor_image(c, td, cal.reference);
  for (int k = 1; k <= kmax; ++k) {
    cplx s = 0.0;
    for (const auto& p : cal.reference) s += std::pow(p.x, k);
    cal.constants.push_back(s + residue_series(td, phi, k));
  }
  return cal;
}

cplx sigma_series(const curve::ThetaData& td, const SigmaCalibration& cal, const CVector& phi, int k) {
  if (k < 1 || k > static_cast<int>(cal.constants.size())) throw ConfigurationError("sigma: k not calibrated");
  return cal.constants[k - 1] - residue_series(td, phi, k);
}

cplx sigma_contour(const curve::ThetaData& td, const curve::HyperellipticCurve* c, const SigmaCalibration& cal,
                   const CVector& phi, int k, const ContourOptions& opt) {
  if (k < 1 || k > static_cast<int>(cal.constants.size())) throw ConfigurationError("sigma: k not calibrated");
  return cal.constants[k - 1] - residue_contour(td, c, phi, k, opt);
}

std::vector<cplx> roots_from_power_sums(std::span<const cplx> p) {
  const int g = static_cast<int>(p.size());
  std::vector<cplx> e(g + 1, cplx(0.0));
  e[0] = 1.0;
  for (int m = 1; m <= g; ++m) {
    cplx acc = 0.0;
    for (int i = 1; i <= m; ++i) acc += ((i % 2 == 1) ? 1.0 : -1.0) * e[m - i] * p[i - 1];
    e[m] = acc / static_cast<double>(m);
  }
  std::vector<cplx> coeffs(g + 1);
  for (int m = 0; m <= g; ++m) coeffs[g - m] = ((m % 2 == 0) ? 1.0 : -1.0) * e[m];
  return num::poly_roots(coeffs, 3);
}

InversionReport jacobi_inversion_check(const curve::HyperellipticCurve& c, const curve::ThetaData& td,
                                       const SigmaCalibration& cal, std::span<const curve::CurvePoint> pts) {
  const int g = c.genus();
  if (static_cast<int>(pts.size()) != g) throw ConfigurationError("Jacobi inversion needs exactly g points");
  InversionReport rep;
  rep.phi = divisor_image(c, td, pts);
  for (int k = 1; k <= g; ++k) rep.sigmas.push_back(sigma_series(td, cal, rep.phi, k));
  rep.recovered_x = roots_from_power_sums(rep.sigmas);
  std::vector<cplx> xs;
  for (const auto& p : pts) xs.push_back(p.x);
  rep.error = num::matching_distance(xs, rep.recovered_x);
  return rep;
}

cplx invert_abel_genus_one(const curve::HyperellipticCurve& c, const curve::ThetaData& td, cplx phi) {
  if (c.genus() != 1) throw ConfigurationError("invert_abel_genus_one needs a genus-one curve");
  const cplx tau = td.tau(0, 0);
  // distance to the lattice Z + tau Z, with the nearest lattice point
  auto reduce = [&](cplx d, cplx& lattice) {
    const double n = std::round(d.imag() / tau.imag());
    const double m = std::round((d - n * tau).real());
    lattice = m + n * tau;
    cplx best = d - lattice;
    for (int dm = -1; dm <= 1; ++dm)
      for (int dn = -1; dn <= 1; ++dn) {
        const cplx L = (m + dm) + (n + dn) * tau;
        if (std::abs(d - L) < std::abs(best)) {
          best = d - L;
          lattice = L;
        }
      }
    return std::abs(best);
  };
  const auto& e = c.branch_points();
  double lo = e.front().real(), hi = lo;
  for (cplx b : e) {
    lo = std::min(lo, b.real());
    hi = std::max(hi, b.real());
  }
  const double span = std::max(1.0, hi - lo);
  double best = std::numeric_limits<double>::infinity();
  curve::CurvePoint bp{};
  cplx blat = 0.0;
  const int N = 31;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const cplx x(lo - span + 3.0 * span * a / (N - 1), -1.5 * span + 3.0 * span * b / (N - 1));
      if (c.distance_to_branch(x) < 0.05 * c.min_branch_separation()) continue;
      for (int sheet = 0; sheet < 2; ++sheet) {
        curve::CurvePoint p{x, std::sqrt(c.P(x)) * (sheet ? -1.0 : 1.0), false};
        cplx lat;
        const double d = reduce(curve::abel_map(c, td, p, curve::CurvePoint::infinity())(0) - phi, lat);
        if (d < best) {
          best = d;
          bp = p;
          blat = lat;
        }
      }
    }
  // Newton on A(x) - phi - lattice = 0 with dA/dx = v(x)
  for (int it = 0; it < 50; ++it) {
    const cplx F = curve::abel_map(c, td, bp, curve::CurvePoint::infinity())(0) - phi - blat;
    if (std::abs(F) < 1e-14) break;
    const cplx dA = curve::normalized_differentials(td, bp.x, bp.y)(0);
    cplx step = F / dA;
    for (int h = 0; h < 30; ++h) {
      const cplx xn = bp.x - step;
      if (c.distance_to_branch(xn) < 0.05 * c.min_branch_separation()) {
        step *= 0.5;
        continue;
      }
      const cplx yn = c.sqrt_p_nearest(xn, bp.y);
      curve::CurvePoint cand{xn, yn, false};
      const cplx Fn = curve::abel_map(c, td, cand, curve::CurvePoint::infinity())(0) - phi - blat;
      if (std::abs(Fn) < std::abs(F)) {
        bp = cand;
        break;
      }
      step *= 0.5;
    }
  }
  return bp.x;
}

}  // namespace hitchin::theta
