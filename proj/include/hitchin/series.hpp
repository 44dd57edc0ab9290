#pragma once

// Truncated power series in several variables with complex coefficients,
// dense over all monomials of total degree <= order.

#include <vector>

#include "hitchin/types.hpp"

namespace hitchin::series {

class MultiSeries {
 public:
  MultiSeries(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  std::size_t size() const { return coef_.size(); }

  const std::vector<int>& exponent(std::size_t k) const { return exps_[k]; }
  std::size_t index(const std::vector<int>& e) const;

  cplx& operator[](std::size_t k) { return coef_[k]; }
  cplx operator[](std::size_t k) const { return coef_[k]; }
  cplx coeff(const std::vector<int>& e) const;
  void set(const std::vector<int>& e, cplx v) { coef_[index(e)] = v; }

  MultiSeries operator+(const MultiSeries& o) const;
  MultiSeries operator-(const MultiSeries& o) const;
  MultiSeries operator*(const MultiSeries& o) const;
  MultiSeries operator*(cplx s) const;

  /// Partial derivative in variable i (order drops by one, kept dense at the
  /// same order with zero top-degree terms).
  MultiSeries derivative(int i) const;

  /// log of a series with nonzero constant term.
  MultiSeries log() const;

 private:
  int nvars_;
  int order_;
  std::vector<std::vector<int>> exps_;
  std::vector<cplx> coef_;
  std::vector<int> degree_;
};

/// All exponent vectors of length n with total degree <= order, graded
/// (total degree first), then lexicographic.
std::vector<std::vector<int>> monomials(int n, int order);

}  // namespace hitchin::series
