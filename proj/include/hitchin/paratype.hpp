#pragma once

// Parabolic type combinatorics: partitions and their duals, level
// functions, base dimensions, Delta_P, parabolic degree, and the t-adic
// Newton polygon of a local characteristic polynomial.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace hitchin::para {

using Rational = boost::multiprecision::cpp_rational;
using Partition = std::vector<int>;

/// Throws ConfigurationError unless p is weakly decreasing and positive.
void validate_partition(const Partition& p);
int partition_size(const Partition& p);
/// All partitions of r, in reverse lexicographic order.
std::vector<Partition> partitions(int r);

/// mu_j = #{l : n_l >= j}
Partition dual_partition(const Partition& n);

/// gamma_j = l iff sum_{t<l} mu_t < j <= sum_{t<=l} mu_t, mu = dual(n); 1 <= j <= r.
int level_function(const Partition& n, int j);
std::vector<int> level_functions(const Partition& n);

struct MarkedPoint {
  Partition partition;          // multiplicities m^1..m^sigma, sum r
  std::vector<Rational> weights;  // strictly increasing in [0, 1)
};

struct ParabolicType {
  int genus = 0;
  int rank = 0;
  std::vector<MarkedPoint> points;
};

void validate(const ParabolicType& t);

struct BaseDimensions {
  std::vector<int> degrees;  // d_j, j = 1..r
  std::vector<int> dims;
  int total = 0;
};
/// d_j = j(2g-2) + sum_x (j - gamma_j(x)); throws IndeterminateDimension
/// when 0 <= d_j <= 2g-2 for some j > 1.
BaseDimensions parabolic_base_dims(const ParabolicType& t);

/// gcd over points x and i = 1..r of #{l : mu_l(x) = i}, with gcd(0, a) = a.
int delta_p(const ParabolicType& t);

/// deg E + sum_x sum_j alpha_j(x) m^j(x)
Rational parabolic_degree(long deg_e, const ParabolicType& t);

/// Parses "p/q", "p" or a decimal literal exactly.
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);

/// Power series in t known up to (excluding) t^order.
struct Series {
  std::vector<Rational> c;
  int order = 16;

  static Series zero(int order) { return {std::vector<Rational>(order), order}; }
  static Series monomial(const Rational& a, int k, int order);
  /// Smallest k with c[k] != 0, or nullopt if no known term is nonzero.
  std::optional<int> valuation() const;
  Series operator+(const Series& o) const;
  Series operator*(const Series& o) const;
};

/// f(lambda) = lambda^r + sum_j a_j lambda^(r-j); a[j-1] = a_j.
struct LocalCharPoly {
  std::vector<Series> a;
  int rank() const { return static_cast<int>(a.size()); }
  int order() const;
};

/// Coefficients of a monic polynomial in lambda (index = power, lowest
/// first). Product of monic polynomials with series coefficients.
LocalCharPoly from_monic(const std::vector<Series>& coeffs_low_first);
std::vector<Series> to_monic(const LocalCharPoly& f);
std::vector<Series> multiply_monic(const std::vector<Series>& f, const std::vector<Series>& g);

struct PolygonSegment {
  int x0 = 0, x1 = 0;  // horizontal extent (powers of lambda)
  int y0 = 0, y1 = 0;  // valuations at the ends
  int p = 0, q = 1;    // |slope| = p / q in lowest terms
  int factor_degree = 0;
  int factor_count = 0;
  bool eisenstein = false;
  bool residual_squarefree = false;
};

struct NewtonReport {
  std::vector<std::pair<int, int>> vertices;  // (power of lambda, valuation)
  std::vector<PolygonSegment> segments;
  Partition factor_degrees;  // sorted decreasing
  bool all_eisenstein = false;
  bool distinguished = false;
  bool matches_expected = false;
  int verified_order = 0;
};

/// Newton polygon and factor degrees; distinguished when every factor is
/// Eisenstein and equal-degree factors have constant terms differing at
/// exact valuation 1 (residual polynomials squarefree).
NewtonReport newton_eisenstein_check(const LocalCharPoly& f, const Partition& expected_mu);

/// Product of Eisenstein factors, one per part of mu, with distinct
/// constant-term units for equal degrees.
LocalCharPoly synthesize_eisenstein(const Partition& mu, unsigned seed, int order = 12);

}  // namespace hitchin::para
