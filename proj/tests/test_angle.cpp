#include <doctest.h>

#include <random>

#include "hitchin/angle.hpp"
#include "hitchin/errors.hpp"
#include "support.hpp"

using namespace hitchin;
using namespace hitchin::angle;
using spectral::Family;
using spectral::resolve_type;
using testing::curve_12345;
using testing::max_abs;

namespace {

struct Gl2 {
  System sys{resolve_type(Family::GL, 2), curve_12345()};
  sov::PlantedSample s = sov::plant(sys, 7, 0.5);
  CVector c = direction();

  static CVector direction() {
    CVector c = CVector::Zero(5);
    c(0) = 0.3;
    c(1) = -0.2;
    return c;
  }
};

const Gl2& gl2() {
  static const Gl2 g;
  return g;
}

FlowOptions options(double t_end, double dt, Scheme s = Scheme::RK4) {
  FlowOptions o;
  o.t_end = t_end;
  o.dt = dt;
  o.scheme = s;
  return o;
}

// Moves point k of cfg to x, continuing y and lambda by nearest values.
PhaseConfiguration moved(const System& sys, const CVector& H, PhaseConfiguration cfg, int k, cplx x) {
  auto& p = cfg.points[k];
  const cplx y = sys.curve->sqrt_p_nearest(x, p.y);
  const auto roots = spectral::lambda_roots(sys, H, x, y).roots;
  cplx best = roots.front();
  for (cplx r : roots)
    if (std::abs(r - p.lambda) < std::abs(best - p.lambda)) best = r;
  p = {x, y, best};
  return cfg;
}

}  // namespace

TEST_CASE("angle_integrand: gl(2) x-block density") {
  const auto& G = gl2();
  const auto& blk = G.sys.layout.blocks[1];
  REQUIRE(blk.delta == 2);
  for (const auto& pt : G.s.cfg.points) {
    const cplx b1 = spectral::brackets(G.sys, G.s.H, pt.x, pt.y)[0];
    for (int k = 0; k < blk.x_size; ++k) {
      const cplx expect = -std::pow(pt.x, k) / ((2.0 * pt.lambda + b1) * pt.y);
      CHECK(std::abs(angle_integrand(G.sys, G.s.H, blk.offset + k, pt) - expect) < 1e-13 * std::abs(expect));
    }
  }
}

TEST_CASE("angle_integrand: same formula as the eval_R partials") {
  const auto& G = gl2();
  for (const auto& pt : G.s.cfg.points) {
    const auto r = spectral::eval_R(G.sys, G.s.H, pt);
    const CVector w = angle_integrands(G.sys, G.s.H, pt);
    for (int j = 0; j < G.sys.h(); ++j) {
      const cplx expect = -r.dR_dH(j) / (r.dR_dlambda * pt.y);
      CHECK(std::abs(w(j) - expect) <= 1e-15 * std::abs(expect));
      CHECK(angle_integrand(G.sys, G.s.H, j, pt) == w(j));
    }
  }
}

TEST_CASE("angle_integrand: Prym parity for the B and C families") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(21);
  double worst = 0.0;
  int evals = 0;
  for (Family f : {Family::SP, Family::SO_odd})
    for (int n = 1; n <= 2; ++n) {
      System sys(resolve_type(f, n), c);
      for (int t = 0; t < 25; ++t) {
        CVector H(sys.h());
        for (int k = 0; k < sys.h(); ++k) H(k) = testing::random_cplx(rng);
        spectral::SpectralPoint pt;
        pt.x = testing::random_cplx(rng, 2.0) + 3.0;
        pt.y = std::sqrt(c.P(pt.x));
        pt.lambda = testing::random_cplx(rng, 2.0);
        auto neg = pt;
        neg.lambda = -pt.lambda;
        const CVector a = angle_integrands(sys, H, pt), b = angle_integrands(sys, H, neg);
        worst = std::max(worst, max_abs(CVector(a + b)) / max_abs(a));
        ++evals;
      }
    }
  CHECK(evals == 100);
  CHECK(worst < 1e-12);
}

TEST_CASE("angle_integrand: branch locus of the cover") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::SL, 2), c);
  const cplx x{2.5, 0.5};
  CHECK_THROWS_AS(angle_integrand(sys, CVector::Ones(3), 0, {x, std::sqrt(c.P(x)), 0.0}), BranchLocus);
}

TEST_CASE("angle_coordinates: points over the base at zero path length") {
  const auto& G = gl2();
  const cplx x{2.5, 0.7};
  const curve::CurvePoint base{x, std::sqrt(curve_12345().P(x)), false};
  const auto roots = spectral::lambda_roots(G.sys, G.s.H, base.x, base.y).roots;
  PhaseConfiguration cfg;
  for (int i = 0; i < G.sys.h(); ++i) cfg.points.push_back({base.x, base.y, roots[i % 2]});
  CHECK(max_abs(angle_coordinates(G.sys, G.s.H, cfg, base)) == 0.0);
}

TEST_CASE("angle_increment: homotopic deformation of the paths") {
  const auto& G = gl2();
  const auto& a = G.s.cfg;
  PhaseConfiguration b = a, m = a;
  for (int k = 0; k < G.sys.h(); ++k) {
    const cplx d{0.05 * (k + 1), -0.03 * k};
    b = moved(G.sys, G.s.H, b, k, a.points[k].x + d);
    // midpoint pushed off the straight segment
    m = moved(G.sys, G.s.H, m, k, a.points[k].x + 0.5 * d + cplx(0.0, 0.02));
  }
  const CVector direct = angle_increment(G.sys, G.s.H, a, b);
  const CVector bent = angle_increment(G.sys, G.s.H, a, m) + angle_increment(G.sys, G.s.H, m, b);
  CHECK(max_abs(CVector(direct - bent)) < 1e-8);
  // small displacement: the common-base coordinates move by the same increment
  const curve::CurvePoint base{cplx(2.5, 0.7), std::sqrt(curve_12345().P(cplx(2.5, 0.7))), false};
  const CVector da = angle_coordinates(G.sys, G.s.H, b, base) - angle_coordinates(G.sys, G.s.H, a, base);
  CHECK(max_abs(CVector(da - direct)) < 1e-8);
}

TEST_CASE("jacobi_matrix: column structure and finite differences") {
  const auto& G = gl2();
  const CMatrix J = jacobi_matrix(G.sys, G.s.H, G.s.cfg);
  for (int k = 0; k < G.sys.h(); ++k) {
    const CVector col = angle_integrands(G.sys, G.s.H, G.s.cfg.points[k]);
    CHECK(max_abs(CVector(J.col(k) - col)) == 0.0);
  }
  // moving point 0 changes column 0 only
  const auto other = moved(G.sys, G.s.H, G.s.cfg, 0, G.s.cfg.points[0].x + 0.1);
  const CMatrix J2 = jacobi_matrix(G.sys, G.s.H, other);
  CHECK(max_abs(CVector(J2.col(0) - J.col(0))) > 1e-6);
  CHECK(max_abs(CMatrix(J2.rightCols(4) - J.rightCols(4))) == 0.0);

  const double eps = 1e-4;
  double worst = 0.0;
  for (int k = 0; k < G.sys.h(); ++k) {
    const cplx x = G.s.cfg.points[k].x;
    const auto up = moved(G.sys, G.s.H, G.s.cfg, k, x + eps), dn = moved(G.sys, G.s.H, G.s.cfg, k, x - eps);
    const CVector fd = angle_increment(G.sys, G.s.H, dn, up) / (2.0 * eps);
    worst = std::max(worst, max_abs(CVector(fd - J.col(k))) / max_abs(CVector(J.col(k))));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("jacobi_matrix: gl(2) genus 2 is nonsingular at random configurations") {
  const auto& G = gl2();
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto s = sov::plant(G.sys, 900 + seed);
    const double cond = jacobi_condition(jacobi_matrix(G.sys, s.H, s.cfg));
    CHECK(std::isfinite(cond));
    CHECK(cond < 1e12);
  }
}

TEST_CASE("flows: zero direction leaves the configuration fixed") {
  const auto& G = gl2();
  const CVector zero = CVector::Zero(5);
  const auto a = flow_fiber(G.sys, G.s.H, G.s.cfg, zero, options(0.1, 0.01));
  const auto b = flow_poisson(G.sys, G.s.cfg, zero, options(0.1, 0.01));
  REQUIRE(a.states.size() == 11);
  REQUIRE(b.states.size() == 11);
  CHECK(config_distance(a.states.back(), G.s.cfg) < 1e-14);
  CHECK(config_distance(b.states.back(), G.s.cfg) < 1e-14);
}

TEST_CASE("flows: observed convergence orders") {
  const auto& G = gl2();
  const auto ref = flow_fiber(G.sys, G.s.H, G.s.cfg, G.c, options(0.2, 1e-4));
  auto err = [&](Scheme s, double dt, bool poisson) {
    const auto tr = poisson ? flow_poisson(G.sys, G.s.cfg, G.c, options(0.2, dt, s))
                            : flow_fiber(G.sys, G.s.H, G.s.cfg, G.c, options(0.2, dt, s));
    return config_distance(tr.states.back(), ref.states.back());
  };
  for (bool poisson : {false, true}) {
    const double e1 = std::log2(err(Scheme::Euler, 0.01, poisson) / err(Scheme::Euler, 0.005, poisson));
    const double e4 = std::log2(err(Scheme::RK4, 0.02, poisson) / err(Scheme::RK4, 0.01, poisson));
    MESSAGE(std::string(poisson ? "poisson" : "fiber") << " orders: euler " << e1 << ", rk4 " << e4);
    CHECK(e1 == doctest::Approx(1.0).epsilon(0.2));
    CHECK(e4 == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("flows: two routes agree at t = 1 and conserve every Hamiltonian") {
  const auto& G = gl2();
  const auto a = flow_fiber(G.sys, G.s.H, G.s.cfg, G.c, options(1.0, 1e-3));
  const auto b = flow_poisson(G.sys, G.s.cfg, G.c, options(1.0, 1e-3));
  REQUIRE(a.states.size() == b.states.size());
  double dist = 0.0;
  for (std::size_t k = 0; k < a.states.size(); k += 50) dist = std::max(dist, config_distance(a.states[k], b.states[k]));
  dist = std::max(dist, config_distance(a.states.back(), b.states.back()));
  CHECK(dist < 1e-6);
  CHECK(hamiltonian_drift(G.sys, a, G.s.H) < 1e-7);
  CHECK(hamiltonian_drift(G.sys, b, G.s.H) < 1e-7);
  // the angle moves linearly with velocity c
  const CVector phi = trajectory_angle(G.sys, G.s.H, a, a.states.size() - 1);
  CHECK(max_abs(CVector(phi - G.c * a.times.back())) < 1e-5 * a.times.back());
}

TEST_CASE("flows: finite-difference angle velocity along the states") {
  const auto& G = gl2();
  const double dt = 1e-2;
  const auto tr = flow_fiber(G.sys, G.s.H, G.s.cfg, G.c, options(0.3, dt));
  for (std::size_t k : {5u, 15u, 25u}) {
    const CVector v =
        angle_increment(G.sys, G.s.H, tr.states[k - 1], tr.states[k + 1]) / (tr.times[k + 1] - tr.times[k - 1]);
    CHECK(max_abs(CVector(v - G.c)) < 1e-6);
  }
}

TEST_CASE("newton_sums") {
  PhaseConfiguration one;
  one.points.push_back({2.0, 0.0, 0.0});
  const auto s = newton_sums(one, 5);
  for (int k = 1; k <= 5; ++k) CHECK(s[k - 1] == std::pow(2.0, k));
  auto cfg = gl2().s.cfg;
  const auto a = newton_sums(cfg, 4);
  std::reverse(cfg.points.begin(), cfg.points.end());
  const auto b = newton_sums(cfg, 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12 * std::abs(a[k]));
  CHECK(config_distance(cfg, gl2().s.cfg) == 0.0);
}

TEST_CASE("parse_scheme") {
  CHECK(parse_scheme("euler") == Scheme::Euler);
  CHECK(parse_scheme("rk4") == Scheme::RK4);
  CHECK_THROWS_AS(parse_scheme("leapfrog"), TypeError);
}
