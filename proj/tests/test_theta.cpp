#include <doctest.h>

#include <algorithm>
#include <random>

#include "hitchin/angle.hpp"
#include "hitchin/errors.hpp"
#include "hitchin/theta.hpp"
#include "support.hpp"

using namespace hitchin;
using namespace hitchin::theta;
using curve::CurvePoint;
using testing::curve_12345;
using testing::max_abs;

namespace {

CMatrix random_tau(int g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  RMatrix A(g, g), R(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) A(i, j) = u(rng);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j <= i; ++j) R(i, j) = R(j, i) = u(rng);
  const RMatrix Im = A * A.transpose() + 0.4 * RMatrix::Identity(g, g);
  return R.cast<cplx>() + kI * Im.cast<cplx>();
}

CVector random_z(int g, std::mt19937_64& rng) {
  CVector z(g);
  for (int i = 0; i < g; ++i) z(i) = testing::random_cplx(rng, 0.6);
  return z;
}

struct Genus2 {
  curve::ThetaData td = curve::period_matrix(curve_12345());
  SigmaCalibration cal;
  Genus2() {
    riemann_constants(curve_12345(), td);
    td.abel_jets = curve::abel_jets(curve_12345(), td, 8);
    cal = calibrate_sigma(curve_12345(), td, 3);
  }
};

const Genus2& genus2() {
  static const Genus2 g;
  return g;
}

CurvePoint on(const curve::HyperellipticCurve& c, cplx x, double sheet = 1.0) {
  return {x, sheet * std::sqrt(c.P(x)), false};
}

}  // namespace

TEST_CASE("riemann_theta: evenness") {
  std::mt19937_64 rng(1);
  for (int g = 1; g <= 3; ++g)
    for (int t = 0; t < 10; ++t) {
      const CMatrix tau = random_tau(g, rng);
      const CVector z = random_z(g, rng);
      const cplx a = riemann_theta(z, tau), b = riemann_theta(CVector(-z), tau);
      CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("riemann_theta: quasi-periodicity") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> un(-2, 2);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int g = 1 + t % 3;
    const CMatrix tau = random_tau(g, rng);
    const CVector z = random_z(g, rng);
    Eigen::VectorXd m(g), n(g);
    for (int i = 0; i < g; ++i) {
      m(i) = un(rng);
      n(i) = un(rng);
    }
    const CVector nc = n.cast<cplx>();
    const auto base = theta_with_gradient(z, tau);
    const cplx shifted_m = riemann_theta(CVector(z + m.cast<cplx>()), tau);
    worst = std::max(worst, std::abs(shifted_m - base.value) / base.abs_sum);
    const cplx factor = std::exp(-kPi * kI * (nc.transpose() * tau * nc)(0) - 2.0 * kPi * kI * (nc.transpose() * z)(0));
    const cplx shifted_n = riemann_theta(CVector(z + tau * nc), tau);
    worst = std::max(worst, std::abs(shifted_n - factor * base.value) / (std::abs(factor) * base.abs_sum));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("riemann_theta: genus one against the Jacobi triple product") {
  CMatrix tau(1, 1);
  tau(0, 0) = kI;
  const cplx q = std::exp(kPi * kI * tau(0, 0));
  for (cplx z : {cplx(0.0), cplx(0.13, 0.0), cplx(0.3, 0.2), cplx(-0.41, -0.35), cplx(0.5, 0.5)}) {
    cplx prod = 1.0;
    const cplx e = std::exp(2.0 * kPi * kI * z);
    for (int m = 1; m <= 40; ++m)
      prod *= (1.0 - std::pow(q, 2 * m)) * (1.0 + std::pow(q, 2 * m - 1) * e) * (1.0 + std::pow(q, 2 * m - 1) / e);
    CVector zz(1);
    zz(0) = z;
    CHECK(std::abs(riemann_theta(zz, tau) - prod) < 1e-12);
  }
}

TEST_CASE("riemann_theta: derivatives against central differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-3;
  for (int g = 1; g <= 3; ++g) {
    const CMatrix tau = random_tau(g, rng);
    const CVector z = random_z(g, rng);
    for (const auto& a : series::monomials(g, 3)) {
      int order = 0;
      for (int v : a) order += v;
      if (order == 0) continue;
      // peel one derivative off: D^a = d_i D^(a - e_i)
      const int i = static_cast<int>(std::find_if(a.begin(), a.end(), [](int v) { return v > 0; }) - a.begin());
      std::vector<int> lower = a;
      --lower[i];
      auto at = [&](double s) {
        CVector zz = z;
        zz(i) += s;
        return riemann_theta(ThetaRequest{zz, tau, lower, 1e-15});
      };
      // fourth-order central difference
      const cplx fd = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
      const cplx exact = riemann_theta(ThetaRequest{z, tau, a, 1e-15});
      CAPTURE(g);
      CHECK(std::abs(fd - exact) < 1e-5 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("riemann_theta: gradient and Taylor expansion agree with derivative requests") {
  std::mt19937_64 rng(4);
  const CMatrix tau = random_tau(2, rng);
  const CVector z = random_z(2, rng);
  const auto tg = theta_with_gradient(z, tau);
  CHECK(std::abs(tg.grad(1) - riemann_theta(ThetaRequest{z, tau, {0, 1}, 1e-14})) < 1e-12 * tg.abs_sum * 40);
  const auto T = theta_taylor(z, tau, 3);
  // c_a = D^a theta / a!
  const cplx d21 = riemann_theta(ThetaRequest{z, tau, {2, 1}, 1e-15});
  CHECK(std::abs(T.coeff({2, 1}) - d21 / 2.0) < 1e-9 * std::max(1.0, std::abs(d21)));
  CHECK_THROWS_AS(riemann_theta(ThetaRequest{z, tau, {1}, 1e-14}), ConfigurationError);
}

TEST_CASE("riemann_constants: vanishing on degree g-1 divisors") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const CurvePoint p = on(c, testing::random_cplx(rng, 3.0) + 3.0, t % 2 ? 1.0 : -1.0);
    const CVector v = curve::abel_map(c, G.td, p, CurvePoint::infinity());
    const auto tg = theta_with_gradient(CVector(v - G.td.riemann_constants), G.td.tau);
    CHECK(std::abs(tg.value) < 1e-6 * tg.abs_sum);
  }
  // genus 3: degree-2 divisors
  auto c3 = curve::HyperellipticCurve::build(testing::from_roots({-3.0, -2.0, -1.0, 0.5, 1.5, {2.0, 1.0}, {2.0, -1.0}}));
  auto td3 = curve::period_matrix(c3);
  CHECK(riemann_constants(c3, td3) < 1e-6);
  for (int t = 0; t < 10; ++t) {
    const CurvePoint p = on(c3, testing::random_cplx(rng, 2.0)), q = on(c3, testing::random_cplx(rng, 2.0) + 1.0);
    const CVector v = curve::abel_map(c3, td3, p, CurvePoint::infinity()) +
                      curve::abel_map(c3, td3, q, CurvePoint::infinity());
    const auto tg = theta_with_gradient(CVector(v - td3.riemann_constants), td3.tau);
    CHECK(std::abs(tg.value) < 1e-6 * tg.abs_sum);
  }
}

TEST_CASE("sigma: series and contour agree on random divisors") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  std::mt19937_64 rng(6);
  for (int t = 0; t < 6; ++t) {
    const std::vector<CurvePoint> pts{on(c, testing::random_cplx(rng, 2.5) + 3.0, 1.0),
                                      on(c, testing::random_cplx(rng, 2.5) + 3.0, -1.0)};
    const CVector phi = divisor_image(c, G.td, pts);
    for (int k = 1; k <= 3; ++k) {
      const cplx s = sigma_series(G.td, G.cal, phi, k), r = sigma_contour(G.td, &c, G.cal, phi, k);
      CHECK(std::abs(s - r) < 1e-6 * std::max(1.0, std::abs(s)));
      cplx newton = 0.0;
      for (const auto& p : pts) newton += std::pow(p.x, k);
      CHECK(std::abs(s - newton) < 1e-5 * std::max(1.0, std::abs(newton)));
    }
  }
}

TEST_CASE("sigma: differences do not depend on the calibration constant") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  SigmaCalibration other = G.cal;
  for (auto& k : other.constants) k += cplx(3.7, -1.2);
  const CVector a = divisor_image(c, G.td, std::vector<CurvePoint>{on(c, {0.5, 0.3}), on(c, {6.2, -0.4})});
  const CVector b = divisor_image(c, G.td, std::vector<CurvePoint>{on(c, {2.2, 1.3}), on(c, {4.1, -0.8}, -1.0)});
  for (int k = 1; k <= 3; ++k) {
    const cplx d1 = sigma_series(G.td, G.cal, a, k) - sigma_series(G.td, G.cal, b, k);
    const cplx d2 = sigma_series(G.td, other, a, k) - sigma_series(G.td, other, b, k);
    CHECK(std::abs(d1 - d2) < 1e-12 * std::max(1.0, std::abs(d1)));
  }
}

TEST_CASE("sigma_contour: stable under sample doubling") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  const CVector phi = divisor_image(c, G.td, std::vector<CurvePoint>{on(c, {1.4, 0.9}), on(c, {3.3, -1.1})});
  ContourOptions a, b;
  a.samples = 64;
  b.samples = 256;
  const cplx ra = residue_contour(G.td, &c, phi, 2, a), rb = residue_contour(G.td, &c, phi, 2, b);
  CHECK(std::abs(ra - rb) < 1e-10 * std::max(1.0, std::abs(ra)));
  // truncated jets instead of the curve: same residue
  const cplx rj = residue_contour(G.td, nullptr, phi, 2, a);
  CHECK(std::abs(rj - ra) < 1e-6 * std::max(1.0, std::abs(ra)));
}

TEST_CASE("sigma_contour: no residue when the differential is analytic at infinity") {
  const auto& G = genus2();
  // Abel image vanishing to order 2k+1 at infinity: x^k d ln theta has no pole
  curve::ThetaData td = G.td;
  const int k = 1;
  td.abel_jets = CMatrix::Zero(2, 6);
  td.abel_jets.col(2 * k) = G.td.abel_jets.col(0);
  td.abel_jets.col(2 * k + 2) = G.td.abel_jets.col(2);
  CVector phi(2);
  phi << cplx(0.2, 0.1), cplx(-0.3, 0.25);
  CHECK(std::abs(residue_contour(td, nullptr, phi, k)) < 1e-13);
}

TEST_CASE("sigma: points on the theta divisor are rejected") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  // a single point: -phi - K lies on the theta divisor
  const CVector phi = curve::abel_map(c, G.td, on(c, {2.5, 0.5}), CurvePoint::infinity());
  CHECK_THROWS_AS(sigma_series(G.td, G.cal, phi, 1), ThetaDivisor);
}

TEST_CASE("jacobi_inversion: genus 2, branch points 1..5") {
  const auto& G = genus2();
  const auto& c = curve_12345();
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    std::vector<CurvePoint> pts{on(c, testing::random_cplx(rng, 2.5) + 3.0, 1.0),
                                on(c, testing::random_cplx(rng, 2.5) + 3.0, -1.0)};
    const auto rep = jacobi_inversion_check(c, G.td, G.cal, pts);
    CHECK(rep.error < 1e-5);
    // cross-check with the Newton sums of the configuration
    angle::PhaseConfiguration cfg;
    for (const auto& p : pts) cfg.points.push_back({p.x, p.y, 0.0});
    const auto ns = angle::newton_sums(cfg, 2);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(rep.sigmas[k] - ns[k]) < 1e-5 * std::max(1.0, std::abs(ns[k])));
    std::reverse(pts.begin(), pts.end());
    const auto rev = jacobi_inversion_check(c, G.td, G.cal, pts);
    CHECK(num::matching_distance(rev.recovered_x, rep.recovered_x) < 1e-12);
  }
}

TEST_CASE("jacobi_inversion: genus one against dense search") {
  curve::CurveOptions g1;
  g1.allow_genus_one = true;
  auto c = curve::HyperellipticCurve::build(testing::from_roots({-1.0, {0.3, 0.8}, 1.4}), g1);
  auto td = curve::period_matrix(c);
  riemann_constants(c, td);
  td.abel_jets = curve::abel_jets(c, td, 6);
  td.genus = 1;
  const auto cal = calibrate_sigma(c, td, 1);
  for (cplx x : {cplx(0.6, -0.7), cplx(-1.8, 0.4), cplx(2.2, 1.1)}) {
    const std::vector<CurvePoint> pts{on(c, x)};
    const auto rep = jacobi_inversion_check(c, td, cal, pts);
    CHECK(rep.error < 1e-6);
    const cplx grid = invert_abel_genus_one(c, td, rep.phi(0));
    CHECK(std::abs(grid - rep.recovered_x[0]) < 1e-6);
  }
}

TEST_CASE("roots_from_power_sums") {
  const std::vector<cplx> xs{cplx(1.0, 2.0), cplx(-0.5, 0.1), 3.0};
  std::vector<cplx> p;
  for (int k = 1; k <= 3; ++k) {
    cplx s = 0.0;
    for (cplx x : xs) s += std::pow(x, k);
    p.push_back(s);
  }
  CHECK(num::matching_distance(roots_from_power_sums(p), xs) < 1e-12);
}

TEST_CASE("truncation: point budget") {
  std::mt19937_64 rng(8);
  const CMatrix tau = random_tau(3, rng);
  const CVector z = random_z(3, rng);
  ThetaOptions tight;
  tight.max_points = 5;
  CHECK_THROWS_AS(riemann_theta(z, tau, tight), TruncationOverflow);
  const auto tr = truncation(z, tau, 0);
  CHECK(tr.points > 0);
  CHECK(tr.radius > 0.0);
}
