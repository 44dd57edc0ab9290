#include "hitchin/paratype.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "hitchin/errors.hpp"

namespace hitchin::para {

void validate_partition(const Partition& p) {
  if (p.empty()) throw ConfigurationError("partition must be nonempty");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) throw ConfigurationError("partition parts must be positive");
    if (i > 0 && p[i] > p[i - 1]) throw ConfigurationError("partition parts must be weakly decreasing");
  }
}

int partition_size(const Partition& p) { return std::accumulate(p.begin(), p.end(), 0); }

std::vector<Partition> partitions(int r) {
  std::vector<Partition> out;
  Partition cur;
  std::function<void(int, int)> rec = [&](int left, int maxp) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (int k = std::min(left, maxp); k >= 1; --k) {
      cur.push_back(k);
      rec(left - k, k);
      cur.pop_back();
    }
  };
  if (r > 0) rec(r, r);
  return out;
}

Partition dual_partition(const Partition& n) {
  validate_partition(n);
  Partition mu(n.front(), 0);
  for (int part : n)
    for (int j = 0; j < part; ++j) ++mu[j];
  return mu;
}

int level_function(const Partition& n, int j) {
  const int r = partition_size(n);
  if (j < 1 || j > r) throw IndexError("level function index j = " + std::to_string(j) + " outside 1.." + std::to_string(r));
  const Partition mu = dual_partition(n);
  int acc = 0;
  for (std::size_t l = 0; l < mu.size(); ++l) {
    acc += mu[l];
    if (j <= acc) return static_cast<int>(l) + 1;
  }
  return static_cast<int>(mu.size());
}

std::vector<int> level_functions(const Partition& n) {
  std::vector<int> g;
  for (int j = 1; j <= partition_size(n); ++j) g.push_back(level_function(n, j));
  return g;
}

void validate(const ParabolicType& t) {
  if (t.genus < 0) throw ConfigurationError("genus must be >= 0");
  if (t.rank < 1) throw ConfigurationError("rank must be >= 1");
  if (2 * t.genus - 2 + static_cast<int>(t.points.size()) <= 0)
    throw ConfigurationError("need 2g - 2 + #marked points > 0");
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const auto& pt = t.points[k];
    const std::string where = "points[" + std::to_string(k) + "]";
    validate_partition(pt.partition);
    if (partition_size(pt.partition) != t.rank) throw ConfigurationError(where + ".partition must sum to the rank");
    if (!pt.weights.empty()) {
      if (pt.weights.size() != pt.partition.size())
        throw ConfigurationError(where + ".weights needs one weight per part");
      for (std::size_t i = 0; i < pt.weights.size(); ++i) {
        if (pt.weights[i] < 0 || pt.weights[i] >= 1) throw ConfigurationError(where + ".weights must lie in [0, 1)");
        if (i > 0 && !(pt.weights[i] > pt.weights[i - 1]))
          throw ConfigurationError(where + ".weights must be strictly increasing");
      }
    }
  }
}

BaseDimensions parabolic_base_dims(const ParabolicType& t) {
  validate(t);
  const int g = t.genus, r = t.rank;
  std::vector<std::vector<int>> gam;
  for (const auto& pt : t.points) gam.push_back(level_functions(pt.partition));
  BaseDimensions out;
  for (int j = 1; j <= r; ++j) {
    int d = j * (2 * g - 2);
    for (const auto& gm : gam) d += j - gm[j - 1];
    out.degrees.push_back(d);
    int dim;
    if (j == 1) {
      dim = g;  // gamma_1 = 1 everywhere, so d_1 = 2g - 2: the canonical bundle
    } else if (d > 2 * g - 2) {
      dim = d - g + 1;
    } else if (d < 0) {
      dim = 0;
    } else {
      throw IndeterminateDimension("h^0 of a degree " + std::to_string(d) + " bundle for j = " + std::to_string(j) +
                                   " depends on the curve");
    }
    out.dims.push_back(dim);
    out.total += dim;
  }
  return out;
}

int delta_p(const ParabolicType& t) {
  validate(t);
  if (t.points.empty()) throw ConfigurationError("Delta_P needs at least one marked point");
  int d = 0;
  for (const auto& pt : t.points) {
    const Partition mu = dual_partition(pt.partition);
    for (int i = 1; i <= t.rank; ++i) d = std::gcd(d, static_cast<int>(std::count(mu.begin(), mu.end(), i)));
  }
  return d;
}

Rational parabolic_degree(long deg_e, const ParabolicType& t) {
  validate(t);
  Rational s = deg_e;
  for (const auto& pt : t.points)
    for (std::size_t j = 0; j < pt.weights.size(); ++j) s += pt.weights[j] * pt.partition[j];
  return s;
}

Rational parse_rational(const std::string& s) {
  using boost::multiprecision::cpp_int;
  auto bad = [&] { return ConfigurationError("not a rational number: '" + s + "'"); };
  if (s.empty()) throw bad();
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      const Rational num = parse_rational(s.substr(0, slash)), den = parse_rational(s.substr(slash + 1));
      if (denominator(num) != 1 || denominator(den) != 1) throw bad();
      if (den == 0) throw bad();
      return num / den;
    }
    std::string body = s;
    int exp10 = 0;
    if (auto e = body.find_first_of("eE"); e != std::string::npos) {
      exp10 = std::stoi(body.substr(e + 1));
      body = body.substr(0, e);
    }
    if (auto dot = body.find('.'); dot != std::string::npos) {
      exp10 -= static_cast<int>(body.size() - dot - 1);
      body.erase(dot, 1);
    }
    bool neg = false;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
      neg = body.front() == '-';
      body.erase(0, 1);
    }
    if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos) throw bad();
    // cpp_int reads a leading 0 as octal
    body.erase(0, std::min(body.find_first_not_of('0'), body.size() - 1));
    Rational q{cpp_int(body)};
    if (neg) q = -q;
    const cpp_int ten = boost::multiprecision::pow(cpp_int(10), std::abs(exp10));
    return exp10 >= 0 ? Rational(q * ten) : Rational(q / ten);
  } catch (const ConfigurationError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

std::string to_string(const Rational& q) {
  const auto num = boost::multiprecision::numerator(q);
  const auto den = boost::multiprecision::denominator(q);
  return den == 1 ? num.str() : num.str() + "/" + den.str();
}

Series Series::monomial(const Rational& a, int k, int order) {
  Series s = zero(order);
  if (k < order) s.c[k] = a;
  return s;
}

std::optional<int> Series::valuation() const {
  for (int k = 0; k < order; ++k)
    if (c[k] != 0) return k;
  return std::nullopt;
}

Series Series::operator+(const Series& o) const {
  Series s = zero(std::min(order, o.order));
  for (int k = 0; k < s.order; ++k) s.c[k] = c[k] + o.c[k];
  return s;
}

Series Series::operator*(const Series& o) const {
  Series s = zero(std::min(order, o.order));
  for (int i = 0; i < s.order; ++i)
    if (c[i] != 0)
      for (int j = 0; i + j < s.order; ++j) s.c[i + j] += c[i] * o.c[j];
  return s;
}

int LocalCharPoly::order() const {
  int T = a.empty() ? 0 : a.front().order;
  for (const auto& s : a) T = std::min(T, s.order);
  return T;
}

LocalCharPoly from_monic(const std::vector<Series>& f) {
  const int r = static_cast<int>(f.size()) - 1;
  LocalCharPoly out;
  for (int j = 1; j <= r; ++j) out.a.push_back(f[r - j]);
  return out;
}

std::vector<Series> to_monic(const LocalCharPoly& f) {
  const int r = f.rank(), T = f.order();
  std::vector<Series> c(r + 1, Series::zero(T));
  c[r] = Series::monomial(1, 0, T);
  for (int j = 1; j <= r; ++j) c[r - j] = f.a[j - 1];
  return c;
}

std::vector<Series> multiply_monic(const std::vector<Series>& f, const std::vector<Series>& g) {
  const int T = std::min(f.front().order, g.front().order);
  std::vector<Series> h(f.size() + g.size() - 1, Series::zero(T));
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) h[i + j] = h[i + j] + f[i] * g[j];
  return h;
}

namespace {

using RPoly = std::vector<Rational>;  // low first

void trim(RPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

RPoly poly_mod(RPoly a, const RPoly& b) {
  trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational f = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    trim(a);
  }
  return a;
}

bool squarefree(RPoly p) {
  trim(p);
  if (p.size() <= 2) return true;
  RPoly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<int>(k));
  RPoly a = p, b = d;
  trim(b);
  while (!b.empty()) {
    RPoly r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return a.size() == 1;
}

}  // namespace

NewtonReport newton_eisenstein_check(const LocalCharPoly& f, const Partition& expected_mu) {
  const int r = f.rank();
  if (r < 1) throw ConfigurationError("local characteristic polynomial needs rank >= 1");
  const int T = f.order();
  const auto coeffs = to_monic(f);
  std::vector<std::optional<int>> val(r + 1);
  for (int i = 0; i <= r; ++i) val[i] = coeffs[i].valuation();
  // lower hull of the known points
  std::vector<std::pair<int, int>> hull;
  for (int i = 0; i <= r; ++i) {
    if (!val[i]) continue;
    const std::pair<int, int> P{i, *val[i]};
    while (hull.size() >= 2) {
      const auto& A = hull[hull.size() - 2];
      const auto& B = hull.back();
      const long cross = static_cast<long>(B.first - A.first) * (P.second - A.second) -
                         static_cast<long>(B.second - A.second) * (P.first - A.first);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(P);
  }
  if (hull.front().first > 0)
    throw TruncationInsufficient("constant coefficient vanishes to order " + std::to_string(T) + "; valuation unknown");
  for (int i = 0; i <= r; ++i) {
    if (val[i]) continue;
    for (std::size_t s = 1; s < hull.size(); ++s) {
      const auto& A = hull[s - 1];
      const auto& B = hull[s];
      if (i < A.first || i > B.first) continue;
      // hull height at i versus the lower bound T on the unknown valuation
      const long lhs = static_cast<long>(T) * (B.first - A.first);
      const long rhs = static_cast<long>(A.second) * (B.first - i) + static_cast<long>(B.second) * (i - A.first);
      if (lhs <= rhs)
        throw TruncationInsufficient("coefficient of lambda^" + std::to_string(i) + " is unknown at the order that shapes the polygon");
    }
  }
  int top = 0;
  for (const auto& v : hull) top = std::max(top, v.second);
  if (T < top + 2) throw TruncationInsufficient("truncation order " + std::to_string(T) + " < max valuation + 2");
  NewtonReport rep;
  rep.vertices = hull;
  rep.verified_order = T;
  rep.all_eisenstein = true;
  bool all_sqf = true;
  for (std::size_t s = 1; s < hull.size(); ++s) {
    PolygonSegment seg;
    seg.x0 = hull[s - 1].first;
    seg.y0 = hull[s - 1].second;
    seg.x1 = hull[s].first;
    seg.y1 = hull[s].second;
    const int dx = seg.x1 - seg.x0, dy = seg.y0 - seg.y1;
    if (dy == 0) throw NotIntegral("a root of valuation 0: the polynomial has a unit factor");
    const int gd = std::gcd(dx, dy);
    seg.p = dy / gd;
    seg.q = dx / gd;
    seg.factor_degree = seg.q;
    seg.factor_count = gd;
    seg.eisenstein = seg.p == 1;
    RPoly res;
    for (int k = 0; k <= gd; ++k) {
      const int x = seg.x0 + k * seg.q, y = seg.y0 - k * seg.p;
      res.push_back(coeffs[x].c[y]);
    }
    seg.residual_squarefree = squarefree(res);
    rep.all_eisenstein = rep.all_eisenstein && seg.eisenstein;
    all_sqf = all_sqf && seg.residual_squarefree;
    for (int k = 0; k < gd; ++k) rep.factor_degrees.push_back(seg.q);
    rep.segments.push_back(seg);
  }
  std::sort(rep.factor_degrees.rbegin(), rep.factor_degrees.rend());
  rep.distinguished = rep.all_eisenstein && all_sqf;
  Partition e = expected_mu;
  std::sort(e.rbegin(), e.rend());
  rep.matches_expected = e == rep.factor_degrees;
  return rep;
}

LocalCharPoly synthesize_eisenstein(const Partition& mu, unsigned seed, int order) {
  validate_partition(mu);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  auto rnd = [&] { return Rational(num(rng), den(rng)); };
  std::vector<Series> f{Series::monomial(1, 0, order)};
  std::vector<std::pair<int, Rational>> used;
  for (int m : mu) {
    // constant-term unit distinct from those of earlier factors of the same degree
    Rational u0;
    for (;;) {
      u0 = rnd();
      if (u0 == 0) continue;
      bool clash = false;
      for (const auto& [deg, c] : used) clash = clash || (deg == m && c == u0);
      if (!clash) break;
    }
    used.push_back({m, u0});
    std::vector<Series> fac(m + 1, Series::zero(order));
    fac[m] = Series::monomial(1, 0, order);
    fac[0] = Series::monomial(u0, 1, order);
    for (int k = 2; k < order; ++k) fac[0].c[k] = rnd();
    for (int i = 1; i < m; ++i)
      for (int k = 1; k < order; ++k) fac[i].c[k] = rnd();
    f = multiply_monic(f, fac);
  }
  return from_monic(f);
}

}  // namespace hitchin::para
