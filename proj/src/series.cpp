#include "hitchin/series.hpp"

#include <algorithm>
#include <numeric>

#include "hitchin/errors.hpp"

namespace hitchin::series {

namespace {

void fill(int n, int left, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n - 1) {
    cur.push_back(left);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = left; a >= 0; --a) {
    cur.push_back(a);
    fill(n, left - a, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> monomials(int n, int order) {
  std::vector<std::vector<int>> out;
  for (int d = 0; d <= order; ++d) {
    std::vector<int> cur;
    fill(n, d, cur, out);
  }
  return out;
}

MultiSeries::MultiSeries(int nvars, int order) : nvars_(nvars), order_(order) {
  exps_ = monomials(nvars, order);
  coef_.assign(exps_.size(), cplx(0.0));
  for (const auto& e : exps_) degree_.push_back(std::accumulate(e.begin(), e.end(), 0));
}

std::size_t MultiSeries::index(const std::vector<int>& e) const {
  // exps_ is short (dozens of entries at the orders used here)
  auto it = std::find(exps_.begin(), exps_.end(), e);
  if (it == exps_.end()) throw IndexError("monomial outside the truncation order");
  return static_cast<std::size_t>(it - exps_.begin());
}

cplx MultiSeries::coeff(const std::vector<int>& e) const {
  const int d = std::accumulate(e.begin(), e.end(), 0);
  if (d > order_) return 0.0;
  return coef_[index(e)];
}

MultiSeries MultiSeries::operator+(const MultiSeries& o) const {
  MultiSeries r = *this;
  for (std::size_t k = 0; k < coef_.size(); ++k) r.coef_[k] += o.coef_[k];
  return r;
}

MultiSeries MultiSeries::operator-(const MultiSeries& o) const {
  MultiSeries r = *this;
  for (std::size_t k = 0; k < coef_.size(); ++k) r.coef_[k] -= o.coef_[k];
  return r;
}

MultiSeries MultiSeries::operator*(cplx s) const {
  MultiSeries r = *this;
  for (auto& c : r.coef_) c *= s;
  return r;
}

MultiSeries MultiSeries::operator*(const MultiSeries& o) const {
  MultiSeries r(nvars_, order_);
  std::vector<int> e(nvars_);
  for (std::size_t a = 0; a < coef_.size(); ++a) {
    if (coef_[a] == cplx(0.0)) continue;
    for (std::size_t b = 0; b < o.coef_.size(); ++b) {
      if (degree_[a] + o.degree_[b] > order_ || o.coef_[b] == cplx(0.0)) continue;
      for (int i = 0; i < nvars_; ++i) e[i] = exps_[a][i] + o.exps_[b][i];
      r.coef_[r.index(e)] += coef_[a] * o.coef_[b];
    }
  }
  return r;
}

MultiSeries MultiSeries::derivative(int i) const {
  MultiSeries r(nvars_, order_);
  for (std::size_t k = 0; k < coef_.size(); ++k) {
    const auto& e = exps_[k];
    if (e[i] == 0) continue;
    std::vector<int> f = e;
    f[i] -= 1;
    r.coef_[r.index(f)] += static_cast<double>(e[i]) * coef_[k];
  }
  return r;
}

MultiSeries MultiSeries::log() const {
  const cplx c0 = coef_[0];
  if (c0 == cplx(0.0)) throw ThetaDivisor("log of a series with vanishing constant term");
  MultiSeries X = *this * (1.0 / c0);
  X.coef_[0] = 0.0;
  MultiSeries acc(nvars_, order_);
  MultiSeries power = X;
  for (int m = 1; m <= order_; ++m) {
    acc = acc + power * ((m % 2 == 1 ? 1.0 : -1.0) / m);
    power = power * X;
  }
  acc.coef_[0] = std::log(c0);
  return acc;
}

}  // namespace hitchin::series
