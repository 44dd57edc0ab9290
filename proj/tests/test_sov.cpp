#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hitchin/errors.hpp"
#include "hitchin/sov.hpp"
#include "support.hpp"

using namespace hitchin;
using namespace hitchin::sov;
using spectral::Family;
using spectral::resolve_type;
using testing::curve_12345;
using testing::max_abs;

namespace {

const curve::HyperellipticCurve& curve_genus3() {
  static const auto c =
      curve::HyperellipticCurve::build(testing::from_roots({-3.0, -2.0, -1.0, 0.5, 1.5, {2.0, 1.0}, {2.0, -1.0}}));
  return c;
}

double rel_error(const CVector& a, const CVector& b) { return max_abs(CVector(a - b)) / std::max(1.0, max_abs(b)); }

}  // namespace

TEST_CASE("solve_hamiltonians: one-block Vandermonde case") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 1), c);
  REQUIRE(sys.h() == 2);
  PhaseConfiguration cfg;
  for (cplx x : {cplx(1.5, 0.2), cplx(3.7, -0.4)}) cfg.points.push_back({x, std::sqrt(c.P(x)), 0.0});
  CHECK(max_abs(solve_hamiltonians(sys, cfg)) < 1e-15);
  // lambda_i = -(H0 + H1 x_i)
  const cplx h0{0.4, -1.1}, h1{2.0, 0.5};
  for (auto& p : cfg.points) p.lambda = -(h0 + h1 * p.x);
  const CVector H = solve_hamiltonians(sys, cfg);
  CHECK(std::abs(H(0) - h0) < 1e-13);
  CHECK(std::abs(H(1) - h1) < 1e-13);
}

TEST_CASE("solve_hamiltonians: gl(2) at genus 2 takes exactly 5 points") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  auto s = plant(sys, 1);
  REQUIRE(s.cfg.points.size() == 5);
  CHECK(design_matrix(sys, s.cfg).rows() == 5);
  CHECK(design_matrix(sys, s.cfg).cols() == 5);
  auto four = s.cfg;
  four.points.pop_back();
  CHECK_THROWS_AS(solve_hamiltonians(sys, four), ConfigurationError);
  auto six = s.cfg;
  six.points.push_back({cplx(7.0, 1.0), std::sqrt(c.P(cplx(7.0, 1.0))), 0.0});
  CHECK_THROWS_AS(solve_hamiltonians(sys, six), ConfigurationError);
}

TEST_CASE("solve_hamiltonians: invalid and singular configurations") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  auto s = plant(sys, 2);
  auto off = s.cfg;
  off.points[1].y *= 1.01;
  CHECK_THROWS_AS(validate(sys, off), ConfigurationError);
  auto dup = s.cfg;
  dup.points[2] = dup.points[0];
  CHECK_THROWS_AS(validate(sys, dup), ConfigurationError);
  // all lambda = 0 kills the columns of the lambda-linear block
  auto zero = s.cfg;
  for (auto& p : zero.points) p.lambda = 0.0;
  CHECK_THROWS_AS(solve_hamiltonians(sys, zero), SingularConfiguration);
}

TEST_CASE("solve_hamiltonians: forward-backward round trip") {
  struct Case {
    Family f;
    int n;
  };
  for (const auto& [f, n] : {Case{Family::GL, 2}, Case{Family::GL, 3}, Case{Family::SL, 2}, Case{Family::SL, 3},
                             Case{Family::SO_odd, 1}, Case{Family::SO_odd, 2}, Case{Family::SP, 1},
                             Case{Family::SP, 2}}) {
    for (const auto* c : {&curve_12345(), &curve_genus3()}) {
      System sys(resolve_type(f, n), *c);
      double worst = 0.0;
      for (unsigned seed = 0; seed < 10; ++seed) {
        auto s = plant(sys, 100 + seed);
        worst = std::max(worst, rel_error(solve_hamiltonians(sys, s.cfg), s.H));
        CHECK(fiber_residual(sys, s.cfg, s.H) < 1e-9 * residual_scale(sys, s.cfg));
      }
      CAPTURE(spectral::family_name(f));
      CAPTURE(n);
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("solve_hamiltonians: so(4) Newton solve is residual certified") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::SO_even, 2), c);
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto s = plant(sys, 40 + seed, 0.5);
    const CVector H = solve_hamiltonians(sys, s.cfg);
    CHECK(fiber_residual(sys, s.cfg, H) < 1e-9 * residual_scale(sys, s.cfg));
    const auto all = solve_hamiltonians_all(sys, s.cfg);
    REQUIRE_FALSE(all.empty());
    // the planted H is among the solutions up to the sign of the squared bracket
    CVector flipped = s.H;
    const auto& b = sys.layout.blocks.back();
    flipped.segment(b.offset, b.x_size + b.y_size) *= -1.0;
    double best = 1e300;
    for (const auto& h : all) best = std::min({best, rel_error(h, s.H), rel_error(h, flipped)});
    MESSAGE("so(4) seed " << seed << ": " << all.size() << " solutions, planted found at " << best);
    CHECK(best < 1e-8);
  }
}

TEST_CASE("implicit_gradients: finite differences") {
  const auto& c = curve_12345();
  for (Family f : {Family::GL, Family::SP}) {
    System sys(resolve_type(f, 2), c);
    auto s = plant(sys, 9);
    const CVector H = solve_hamiltonians(sys, s.cfg);
    const auto g = implicit_gradients(sys, s.cfg, H);
    const double eps = 1e-6;
    double worst = 0.0;
    for (int m = 0; m < sys.h(); ++m) {
      auto up = s.cfg, dn = s.cfg;
      up.points[m].lambda += eps;
      dn.points[m].lambda -= eps;
      const CVector fd = (solve_hamiltonians(sys, up) - solve_hamiltonians(sys, dn)) / (2.0 * eps);
      worst = std::max(worst, rel_error(fd, g.dH_dlambda.col(m)));
      up = s.cfg;
      dn = s.cfg;
      up.points[m].x += eps;
      up.points[m].y = c.sqrt_p_nearest(up.points[m].x, s.cfg.points[m].y);
      dn.points[m].x -= eps;
      dn.points[m].y = c.sqrt_p_nearest(dn.points[m].x, s.cfg.points[m].y);
      const CVector fdx = (solve_hamiltonians(sys, up) - solve_hamiltonians(sys, dn)) / (2.0 * eps);
      worst = std::max(worst, rel_error(fdx, g.dH_dx.col(m)));
    }
    MESSAGE(spectral::family_name(f) << " max relative error " << worst);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("implicit_gradients: point m enters row m only") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  auto s = plant(sys, 10);
  const CVector H = solve_hamiltonians(sys, s.cfg);
  const CMatrix M = jacobian_matrix(sys, s.cfg, H);
  const auto g = implicit_gradients(sys, s.cfg, H);
  const CMatrix ML = M * g.dH_dlambda, MX = M * g.dH_dx;
  for (int m = 0; m < sys.h(); ++m) {
    const auto r = spectral::eval_R(sys, H, s.cfg.points[m]);
    for (int i = 0; i < sys.h(); ++i) {
      const cplx el = (i == m) ? -r.dR_dlambda : cplx(0.0);
      const cplx ex = (i == m) ? -r.dR_dx : cplx(0.0);
      CHECK(std::abs(ML(i, m) - el) < 1e-9 * (1.0 + std::abs(r.dR_dlambda)));
      CHECK(std::abs(MX(i, m) - ex) < 1e-9 * (1.0 + std::abs(r.dR_dx)));
    }
  }
}

TEST_CASE("implicit_gradients: relabeling the points permutes the gradients") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::SP, 2), c);
  auto s = plant(sys, 11);
  const CVector H = solve_hamiltonians(sys, s.cfg);
  const auto g = implicit_gradients(sys, s.cfg, H);
  std::vector<int> perm(sys.h());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  PhaseConfiguration p;
  for (int i : perm) p.points.push_back(s.cfg.points[i]);
  CHECK(rel_error(solve_hamiltonians(sys, p), H) < 1e-10);
  const auto gp = implicit_gradients(sys, p, H);
  for (int k = 0; k < sys.h(); ++k) {
    CHECK(rel_error(gp.dH_dlambda.col(k), g.dH_dlambda.col(perm[k])) < 1e-9);
    CHECK(rel_error(gp.dH_dx.col(k), g.dH_dx.col(perm[k])) < 1e-9);
  }
}

TEST_CASE("poisson_bracket: canonical coordinate brackets") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  auto s = plant(sys, 12);
  const int h = sys.h();
  auto unit = [&](bool lambda, int i) {
    Gradient g{CVector::Zero(h), CVector::Zero(h)};
    (lambda ? g.d_lambda : g.d_x)(i) = 1.0;
    return g;
  };
  CHECK(poisson_bracket(unit(true, 0), unit(false, 0), s.cfg) == s.cfg.points[0].y);
  CHECK(poisson_bracket(unit(true, 0), unit(false, 1), s.cfg) == cplx(0.0));
  CHECK(poisson_bracket(unit(true, 0), unit(true, 1), s.cfg) == cplx(0.0));
  CHECK(poisson_bracket(unit(false, 0), unit(false, 1), s.cfg) == cplx(0.0));
  CHECK(poisson_bracket(unit(false, 2), unit(true, 2), s.cfg) == -s.cfg.points[2].y);
}

TEST_CASE("poisson_bracket: antisymmetry, bilinearity and Leibniz") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  auto s = plant(sys, 13);
  const int h = sys.h();
  std::mt19937_64 rng(2);
  auto rnd = [&] {
    Gradient g{CVector(h), CVector(h)};
    for (int i = 0; i < h; ++i) {
      g.d_lambda(i) = testing::random_cplx(rng);
      g.d_x(i) = testing::random_cplx(rng);
    }
    return g;
  };
  for (int t = 0; t < 10; ++t) {
    const Gradient f = rnd(), g = rnd(), k = rnd();
    CHECK(std::abs(poisson_bracket(f, g, s.cfg) + poisson_bracket(g, f, s.cfg)) < 1e-13);
    const cplx a{0.7, -0.3};
    const Gradient lin{f.d_lambda * a + g.d_lambda, f.d_x * a + g.d_x};
    const cplx lhs = poisson_bracket(lin, k, s.cfg);
    const cplx rhs = a * poisson_bracket(f, k, s.cfg) + poisson_bracket(g, k, s.cfg);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  // polynomial test functions F = lambda_0^2 x_1, G = x_0 lambda_1, K = lambda_0 x_0 x_1
  const auto& P = s.cfg.points;
  const cplx l0 = P[0].lambda, l1 = P[1].lambda, x0 = P[0].x, x1 = P[1].x;
  auto grad = [&](cplx dl0, cplx dl1, cplx dx0, cplx dx1) {
    Gradient g{CVector::Zero(h), CVector::Zero(h)};
    g.d_lambda(0) = dl0;
    g.d_lambda(1) = dl1;
    g.d_x(0) = dx0;
    g.d_x(1) = dx1;
    return g;
  };
  const cplx F = l0 * l0 * x1, G = x0 * l1;
  const Gradient dF = grad(2.0 * l0 * x1, 0.0, 0.0, l0 * l0);
  const Gradient dG = grad(0.0, x0, l1, 0.0);
  const Gradient dK = grad(x0 * x1, 0.0, l0 * x1, l0 * x0);
  const Gradient dFG = grad(2.0 * l0 * x1 * G, F * x0, F * l1, l0 * l0 * G);
  const cplx lhs = poisson_bracket(dFG, dK, s.cfg);
  const cplx rhs = F * poisson_bracket(dG, dK, s.cfg) + G * poisson_bracket(dF, dK, s.cfg);
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("involution_check: gl(2) and sp(4) at genus 2") {
  const auto& c = curve_12345();
  for (Family f : {Family::GL, Family::SP}) {
    System sys(resolve_type(f, 2), c);
    auto s = plant(sys, 14);
    const CVector H = solve_hamiltonians(sys, s.cfg);
    const RMatrix B = involution_check(sys, s.cfg, H);
    const double scale = gradient_scale(implicit_gradients(sys, s.cfg, H), s.cfg);
    for (int j = 0; j < sys.h(); ++j) CHECK(B(j, j) == 0.0);
    CHECK(B.maxCoeff() / scale < 1e-8);
  }
}

TEST_CASE("involution_check: every family up to rank 2 at genus 2 and 3") {
  struct Case {
    Family f;
    int n;
  };
  for (const auto& [f, n] : {Case{Family::GL, 1}, Case{Family::GL, 2}, Case{Family::SL, 2}, Case{Family::SO_odd, 1},
                             Case{Family::SO_odd, 2}, Case{Family::SP, 1}, Case{Family::SP, 2},
                             Case{Family::SO_even, 2}}) {
    for (const auto* c : {&curve_12345(), &curve_genus3()}) {
      System sys(resolve_type(f, n), *c);
      double worst = 0.0;
      for (unsigned seed = 0; seed < 20; ++seed) {
        auto s = plant(sys, 500 + seed, f == Family::SO_even ? 0.5 : 1.0);
        const RMatrix B = involution_check(sys, s.cfg, s.H);
        worst = std::max(worst, B.maxCoeff() / gradient_scale(implicit_gradients(sys, s.cfg, s.H), s.cfg));
      }
      CAPTURE(spectral::family_name(f));
      CAPTURE(n);
      CAPTURE(c->genus());
      CHECK(worst < 1e-7);
    }
  }
}
