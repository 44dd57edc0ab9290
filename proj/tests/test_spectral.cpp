#include <doctest.h>

#include <random>

#include "hitchin/errors.hpp"
#include "hitchin/spectral.hpp"
#include "hitchin/sov.hpp"
#include "support.hpp"

using namespace hitchin;
using namespace hitchin::spectral;
using testing::curve_12345;

namespace {

const std::vector<Family> kFamilies{Family::GL, Family::SL, Family::SO_odd, Family::SP, Family::SO_even};

int lie_dim(Family f, int n) {
  switch (f) {
    case Family::GL: return n * n;
    case Family::SL: return n * n - 1;
    case Family::SO_odd: return n * (2 * n + 1);
    case Family::SP: return n * (2 * n + 1);
    case Family::SO_even: return n * (2 * n - 1);
  }
  return 0;
}

bool supported(Family f, int n) { return !((f == Family::SL || f == Family::SO_even) && n < 2); }

CVector random_h(int h, std::mt19937_64& rng, double s = 1.0) {
  CVector H(h);
  for (int k = 0; k < h; ++k) H(k) = testing::random_cplx(rng, s);
  return H;
}

SpectralPoint random_point(const curve::HyperellipticCurve& c, std::mt19937_64& rng) {
  SpectralPoint p;
  p.x = testing::random_cplx(rng, 2.0) + 3.0;
  p.y = std::sqrt(c.P(p.x));
  p.lambda = testing::random_cplx(rng, 2.0);
  return p;
}

}  // namespace

TEST_CASE("resolve_type: gl(2)") {
  auto s = resolve_type(Family::GL, 2);
  CHECK(s.d == 2);
  CHECK(s.deltas == std::vector<int>{1, 2});
  CHECK(s.dees == std::vector<int>{1, 2});
  CHECK_FALSE(s.square_last);
}

TEST_CASE("resolve_type: so(4) squares the last bracket") {
  auto s = resolve_type(Family::SO_even, 2);
  CHECK(s.d == 4);
  CHECK(s.deltas == std::vector<int>{2, 2});
  CHECK(s.dees == std::vector<int>{2, 4});
  CHECK(s.square_last);
}

TEST_CASE("resolve_type: Kostant identity for sp(4)") {
  auto s = resolve_type(Family::SP, 2);
  int sum = 0;
  for (int d : s.deltas) sum += 2 * d - 1;
  CHECK(sum == 10);
  CHECK(s.dim == 10);
  CHECK(s.d == 4);
}

TEST_CASE("resolve_type: degrees of the classical families") {
  CHECK(resolve_type(Family::SL, 3).deltas == std::vector<int>{2, 3});
  CHECK(resolve_type(Family::SO_odd, 3).deltas == std::vector<int>{2, 4, 6});
  CHECK(resolve_type(Family::SO_odd, 3).d == 7);
  CHECK(resolve_type(Family::SP, 3).d == 6);
  auto so8 = resolve_type(Family::SO_even, 4);
  CHECK(so8.deltas == std::vector<int>{2, 4, 6, 4});
  CHECK(so8.dees == std::vector<int>{2, 4, 6, 8});
}

TEST_CASE("resolve_type: rank errors and family names") {
  CHECK_THROWS_AS(resolve_type(Family::GL, 0), RankError);
  CHECK_THROWS_AS(resolve_type(Family::SO_even, 1), RankError);
  CHECK_THROWS_AS(resolve_type(Family::SL, 1), RankError);
  for (Family f : kFamilies) CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS_AS(parse_family("E8"), TypeError);
}

TEST_CASE("coefficient_layout: examples at genus 2") {
  auto gl2 = coefficient_layout(resolve_type(Family::GL, 2), 2);
  REQUIRE(gl2.blocks.size() == 2);
  CHECK(gl2.blocks[0].x_size == 2);
  CHECK(gl2.blocks[0].y_size == 0);
  CHECK(gl2.blocks[1].x_size == 3);
  CHECK(gl2.blocks[1].y_size == 0);
  CHECK(gl2.h == 5);

  auto sl2 = coefficient_layout(resolve_type(Family::SL, 2), 2);
  REQUIRE(sl2.blocks.size() == 1);
  CHECK(sl2.blocks[0].x_size == 3);
  CHECK(sl2.blocks[0].y_size == 0);
  CHECK(sl2.h == 3);

  CHECK(coefficient_layout(resolve_type(Family::SP, 2), 2).h == 10);
}

TEST_CASE("coefficient_layout: h = dim g (g - 1), plus one for gl") {
  for (Family f : kFamilies)
    for (int n = 1; n <= 4; ++n) {
      if (!supported(f, n)) continue;
      const auto s = resolve_type(f, n);
      CHECK(s.dim == lie_dim(f, n));
      for (int g = 2; g <= 4; ++g) {
        const auto L = coefficient_layout(s, g);
        CHECK(L.h == lie_dim(f, n) * (g - 1) + (f == Family::GL ? 1 : 0));
        int offset = 0;
        for (const auto& b : L.blocks) {
          CHECK(b.offset == offset);
          offset += b.x_size + b.y_size;
          if (b.delta >= 2) {
            CHECK(b.x_size == b.delta * (g - 1) + 1);
            CHECK(b.y_size == std::max(0, (b.delta - 1) * (g - 1) - 1));
          }
        }
        CHECK(offset == L.h);
      }
    }
}

TEST_CASE("eval_R: zero Hamiltonians") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(1);
  for (Family f : kFamilies) {
    System sys(resolve_type(f, 2), c);
    const auto pt = random_point(c, rng);
    const auto r = eval_R(sys, CVector::Zero(sys.h()), pt);
    const int d = sys.spec.d;
    CHECK(std::abs(r.R - std::pow(pt.lambda, d)) < 1e-12 * std::pow(std::abs(pt.lambda), d));
    CHECK(std::abs(r.dR_dlambda - double(d) * std::pow(pt.lambda, d - 1)) < 1e-12 * std::pow(std::abs(pt.lambda) + 1, d));
  }
}

TEST_CASE("eval_R: analytic gradients against central differences") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int samples = 0;
  for (Family f : kFamilies)
    for (int t = 0; t < 20; ++t) {
      System sys(resolve_type(f, 2), c);
      const CVector H = random_h(sys.h(), rng);
      const auto pt = random_point(c, rng);
      const auto r = eval_R(sys, H, pt);
      const double step = 1e-6;
      for (int k = 0; k < sys.h(); ++k) {
        CVector Hp = H, Hm = H;
        Hp(k) += step;
        Hm(k) -= step;
        const cplx fd = (eval_R(sys, Hp, pt).R - eval_R(sys, Hm, pt).R) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - r.dR_dH(k)) / std::max(1.0, std::abs(r.dR_dH(k))));
      }
      // lambda derivative
      auto at = [&](cplx l) { auto q = pt; q.lambda = l; return eval_R(sys, H, q).R; };
      const cplx fdl = (at(pt.lambda + step) - at(pt.lambda - step)) / (2.0 * step);
      worst = std::max(worst, std::abs(fdl - r.dR_dlambda) / std::max(1.0, std::abs(r.dR_dlambda)));
      // total x derivative along the curve
      auto atx = [&](cplx x) {
        auto q = pt;
        q.x = x;
        q.y = c.sqrt_p_nearest(x, pt.y);
        return eval_R(sys, H, q).R;
      };
      const cplx fdx = (atx(pt.x + step) - atx(pt.x - step)) / (2.0 * step);
      worst = std::max(worst, std::abs(fdx - r.dR_dx) / std::max(1.0, std::abs(r.dR_dx)));
      ++samples;
    }
  MESSAGE("max relative gradient error " << worst << " over " << samples << " samples");
  CHECK(samples == 100);
  CHECK(worst < 1e-6);
}

TEST_CASE("eval_R: so(2n) is even in the last bracket") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 3; ++n) {
    System sys(resolve_type(Family::SO_even, n), c);
    const CVector H = random_h(sys.h(), rng);
    CVector Hn = H;
    const auto& b = sys.layout.blocks.back();
    Hn.segment(b.offset, b.x_size + b.y_size) *= -1.0;
    const auto pt = random_point(c, rng);
    CHECK(std::abs(eval_R(sys, H, pt).R - eval_R(sys, Hn, pt).R) <= 1e-13 * std::abs(eval_R(sys, H, pt).R));
  }
}

TEST_CASE("eval_R: lambda parity for the B, C and D families") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(4);
  for (Family f : {Family::SO_odd, Family::SP, Family::SO_even})
    for (int n = 2; n <= 3; ++n) {
      System sys(resolve_type(f, n), c);
      for (int t = 0; t < 10; ++t) {
        const CVector H = random_h(sys.h(), rng);
        auto pt = random_point(c, rng);
        const cplx r = eval_R(sys, H, pt).R;
        pt.lambda = -pt.lambda;
        const double sign = (sys.spec.d % 2) ? -1.0 : 1.0;
        // exact: every monomial carries an even power of lambda times lambda^(d mod 2)
        CHECK(std::abs(eval_R(sys, H, pt).R - sign * r) <= 4e-16 * std::abs(r) * sys.h());
      }
    }
}

TEST_CASE("lambda_roots: zero Hamiltonians give the zero root") {
  const auto& c = curve_12345();
  for (Family f : kFamilies) {
    System sys(resolve_type(f, 2), c);
    const cplx x{2.5, 0.3};
    const auto lr = lambda_roots(sys, CVector::Zero(sys.h()), x, std::sqrt(c.P(x)));
    REQUIRE(static_cast<int>(lr.roots.size()) == sys.spec.d);
    for (cplx r : lr.roots) CHECK(std::abs(r) < 1e-12);
    CHECK(lr.ill_conditioned);
  }
}

TEST_CASE("lambda_roots: quadratic formula for sl(2)") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::SL, 2), c);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const CVector H = random_h(sys.h(), rng);
    const cplx x = testing::random_cplx(rng, 2.0) + 3.0, y = std::sqrt(c.P(x));
    const cplx b2 = brackets(sys, H, x, y)[0];
    const cplx s = std::sqrt(-b2);
    const std::vector<cplx> expect{s, -s};
    const auto lr = lambda_roots(sys, H, x, y);
    CHECK(num::matching_distance(lr.roots, expect) < 1e-12 * (1.0 + std::abs(s)));
  }
}

TEST_CASE("lambda_roots: Vieta sum and residual certificate") {
  const auto& c = curve_12345();
  std::mt19937_64 rng(6);
  for (int n = 2; n <= 4; ++n) {
    System sys(resolve_type(Family::GL, n), c);
    for (int t = 0; t < 10; ++t) {
      const CVector H = random_h(sys.h(), rng);
      const cplx x = testing::random_cplx(rng, 2.0) + 3.0, y = std::sqrt(c.P(x));
      const auto lr = lambda_roots(sys, H, x, y);
      cplx sum = 0.0;
      for (cplx r : lr.roots) {
        sum += r;
        const double bound = 1e-9 * (1.0 + std::pow(std::abs(r), n));
        CHECK(std::abs(eval_R(sys, H, {x, y, r}).R) < bound);
      }
      const cplx b1 = brackets(sys, H, x, y)[0];
      CHECK(std::abs(sum + b1) < 1e-8 * (1.0 + std::abs(b1)));
    }
  }
  // all roots, also for the D family with its squared bracket
  System so4(resolve_type(Family::SO_even, 2), c);
  const CVector H = random_h(so4.h(), rng);
  const cplx x{3.3, -0.4};
  const auto lr = lambda_roots(so4, H, x, std::sqrt(c.P(x)));
  CHECK(lr.roots.size() == 4);
}

TEST_CASE("discriminant of gl(2) at genus 2") {
  const auto& c = curve_12345();
  System sys(resolve_type(Family::GL, 2), c);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const auto dc = discriminant_zero_count(sys, random_h(sys.h(), rng));
    CHECK(dc.zeros_on_curve == 4);
    CHECK(dc.odd_order_points == 4);
    CHECK(dc.zeros_on_cover == 8);
    CHECK(dc.riemann_hurwitz_genus == 5);
  }
  CHECK_THROWS_AS(discriminant_zero_count(System(resolve_type(Family::SP, 2), c), CVector::Zero(10)), TypeError);
}
