#pragma once

// Analytic continuation of multivalued quantities along polylines, and
// quadrature of integrands that depend on the continued values.
//
// A Tracker knows how to project a guess onto the branch nearest to it at a
// given parameter value, how far it may step from a point, and how large a
// change between neighbouring grid values is acceptable. The grid produced by
// track() is fine enough that linear interpolation between grid values picks
// the right branch at any intermediate quadrature node.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hitchin/errors.hpp"
#include "hitchin/numerics.hpp"

namespace hitchin::path {

template <class State>
struct Tracker {
  /// Branch of the quantity at `s` nearest to `guess`.
  std::function<State(cplx s, const State& guess)> project;
  /// Relative change between two neighbouring values; must stay below `max_change`.
  std::function<double(const State& a, const State& b)> change;
  /// Largest admissible step length at `s` (e.g. half the distance to a singularity).
  std::function<double(cplx s)> safe_step;
  double max_change = 0.1;
  int max_points = 2'000'000;
};

template <class State>
struct GridPoint {
  cplx s;
  State value;
};

template <class State>
std::vector<GridPoint<State>> track(const Tracker<State>& tr, const std::vector<cplx>& waypoints,
                                    const State& start) {
  std::vector<GridPoint<State>> grid;
  if (waypoints.empty()) return grid;
  grid.push_back({waypoints.front(), start});
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const cplx a = waypoints[w - 1], b = waypoints[w];
    const double len = std::abs(b - a);
    if (len == 0.0) continue;
    double t = 0.0;
    while (t < 1.0) {
      const GridPoint<State>& cur = grid.back();
      double step = std::min(1.0 - t, tr.safe_step(cur.s) / len);
      for (int tries = 0;; ++tries) {
        if (tries > 60 || step < 1e-15) {
          throw ContinuationAmbiguity("continuation step underflow near s = " +
                                      std::to_string(cur.s.real()) + "+" +
                                      std::to_string(cur.s.imag()) + "i");
        }
        const double tn = (t + step >= 1.0 - 1e-15) ? 1.0 : t + step;
        const cplx sn = (tn == 1.0) ? b : a + tn * (b - a);
        State cand = tr.project(sn, cur.value);
        if (tr.change(cur.value, cand) < tr.max_change) {
          grid.push_back({sn, cand});
          t = tn;
          break;
        }
        step *= 0.5;
      }
      if (static_cast<int>(grid.size()) > tr.max_points)
        throw ContinuationAmbiguity("continuation grid exceeded point budget");
    }
  }
  return grid;
}

/// Integrates f(s, value) ds over the tracked grid (straight cells).
template <class State, class F>
CVector integrate(const Tracker<State>& tr, const std::vector<GridPoint<State>>& grid, int dim,
                  F&& f, const num::AdaptiveOptions& opt) {
  CVector total = CVector::Zero(dim);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const auto& A = grid[k - 1];
    const auto& B = grid[k];
    const cplx ds = B.s - A.s;
    auto fn = [&](double t) -> CVector {
      const cplx s = A.s + t * ds;
      State guess = A.value * (1.0 - t) + B.value * t;
      State v = tr.project(s, guess);
      return f(s, v) * ds;
    };
    total += num::integrate_adaptive(fn, 0.0, 1.0, opt);
  }
  return total;
}

}  // namespace hitchin::path
