#include "hitchin/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hitchin/errors.hpp"

namespace hitchin::io {

namespace {

ConfigurationError field_error(const std::string& path, const std::string& what) {
  return ConfigurationError("field '" + path + "': " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw field_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw field_error(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw field_error(path, "expected an integer");
  return j.get<int>();
}

para::Rational as_rational(const json& j, const std::string& path) {
  try {
    if (j.is_string()) return para::parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return para::Rational(j.get<long long>());
    if (j.is_number()) return para::parse_rational(j.dump());
  } catch (const ConfigurationError& e) {
    throw field_error(path, e.what());
  }
  throw field_error(path, "expected a rational (number or \"p/q\")");
}

}  // namespace

cplx parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw field_error(path, "expected [re, im] pair or number");
}

std::vector<cplx> parse_complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw field_error(path, "expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_complex(j[i], index(path, i)));
  return out;
}

CVector parse_cvector(const json& j, const std::string& path) {
  auto v = parse_complex_list(j, path);
  CVector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

CMatrix parse_cmatrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw field_error(path, "expected a nonempty array of rows");
  std::vector<CVector> rows;
  for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(parse_cvector(j[i], index(path, i)));
  const auto n = rows.front().size();
  CMatrix m(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n) throw field_error(index(path, i), "row length differs");
    m.row(i) = rows[i].transpose();
  }
  return m;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const CVector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

json to_json(const CMatrix& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(to_json(CVector(m.row(i).transpose())));
  return a;
}

json to_json(const std::vector<cplx>& v) {
  json a = json::array();
  for (cplx z : v) a.push_back(to_json(z));
  return a;
}

json to_json(const sov::PhaseConfiguration& cfg) {
  json a = json::array();
  for (const auto& p : cfg.points) a.push_back({{"x", to_json(p.x)}, {"y", to_json(p.y)}, {"lambda", to_json(p.lambda)}});
  return a;
}

SystemDescription parse_system(const json& j) {
  if (!j.is_object()) throw field_error("<root>", "expected an object");
  SystemDescription s;
  const json& curve = require(j, "curve", "");
  s.coeffs = parse_complex_list(require(curve, "coeffs", "curve"), "curve.coeffs");
  if (j.contains("lie_type")) {
    const json& lt = j["lie_type"];
    const json& fam = require(lt, "family", "lie_type");
    if (!fam.is_string()) throw field_error("lie_type.family", "expected a string");
    try {
      s.family = spectral::parse_family(fam.get<std::string>());
    } catch (const Error& e) {
      throw field_error("lie_type.family", e.what());
    }
    s.rank = as_int(require(lt, "rank", "lie_type"), "lie_type.rank");
  }
  if (j.contains("points")) {
    const json& pts = j["points"];
    if (!pts.is_array()) throw field_error("points", "expected an array");
    sov::PhaseConfiguration cfg;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string p = index("points", i);
      spectral::SpectralPoint sp;
      sp.x = parse_complex(require(pts[i], "x", p), join(p, "x"));
      sp.y = parse_complex(require(pts[i], "y", p), join(p, "y"));
      sp.lambda = parse_complex(require(pts[i], "lambda", p), join(p, "lambda"));
      cfg.points.push_back(sp);
    }
    s.points = cfg;
  }
  if (j.contains("hamiltonians")) s.hamiltonians = parse_cvector(j["hamiltonians"], "hamiltonians");
  if (j.contains("flow")) {
    const json& f = j["flow"];
    if (!f.is_object()) throw field_error("flow", "expected an object");
    if (f.contains("t_end")) s.flow.t_end = as_double(f["t_end"], "flow.t_end");
    if (f.contains("dt")) s.flow.dt = as_double(f["dt"], "flow.dt");
    if (f.contains("scheme")) {
      if (!f["scheme"].is_string()) throw field_error("flow.scheme", "expected a string");
      s.flow.scheme = f["scheme"].get<std::string>();
    }
    if (f.contains("route")) {
      if (!f["route"].is_string()) throw field_error("flow.route", "expected a string");
      s.flow.route = f["route"].get<std::string>();
    }
    if (f.contains("direction")) s.flow.direction = parse_cvector(f["direction"], "flow.direction");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw field_error("seed", "expected a non-negative integer");
    s.seed = j["seed"].get<unsigned>();
  }
  return s;
}

para::ParabolicType parse_parabolic(const json& j) {
  para::ParabolicType t;
  t.genus = as_int(require(j, "genus", ""), "genus");
  t.rank = as_int(require(j, "rank", ""), "rank");
  const json& pts = require(j, "points", "");
  if (!pts.is_array()) throw field_error("points", "expected an array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string p = index("points", i);
    para::MarkedPoint mp;
    const json& part = require(pts[i], "partition", p);
    if (!part.is_array()) throw field_error(join(p, "partition"), "expected an array");
    for (std::size_t k = 0; k < part.size(); ++k) mp.partition.push_back(as_int(part[k], index(join(p, "partition"), k)));
    if (pts[i].contains("weights")) {
      const json& w = pts[i]["weights"];
      if (!w.is_array()) throw field_error(join(p, "weights"), "expected an array");
      for (std::size_t k = 0; k < w.size(); ++k) mp.weights.push_back(as_rational(w[k], index(join(p, "weights"), k)));
    }
    t.points.push_back(mp);
  }
  return t;
}

para::LocalCharPoly parse_local(const json& j, int order) {
  const json& cs = require(j, "coefficients", "local");
  if (!cs.is_array() || cs.empty()) throw field_error("local.coefficients", "expected a nonempty array");
  para::LocalCharPoly f;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string p = index("local.coefficients", i);
    if (!cs[i].is_array()) throw field_error(p, "expected an array of series coefficients");
    if (static_cast<int>(cs[i].size()) > order) throw field_error(p, "more terms than the truncation order");
    para::Series s = para::Series::zero(order);
    for (std::size_t k = 0; k < cs[i].size(); ++k) s.c[k] = as_rational(cs[i][k], index(p, k));
    f.a.push_back(s);
  }
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IOError("write failed for '" + path + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const angle::Trajectory& tr) {
  std::string out = "t,i,re_x,im_x,re_y,im_y,re_lambda,im_lambda\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k)
    for (std::size_t i = 0; i < tr.states[k].points.size(); ++i) {
      const auto& p = tr.states[k].points[i];
      out += num(tr.times[k]) + "," + std::to_string(i) + "," + num(p.x.real()) + "," + num(p.x.imag()) + "," +
             num(p.y.real()) + "," + num(p.y.imag()) + "," + num(p.lambda.real()) + "," + num(p.lambda.imag()) + "\n";
    }
  return out;
}

std::string trajectory_svg(const angle::Trajectory& tr, const std::string& title) {
  if (tr.states.empty()) throw ConfigurationError("cannot plot an empty trajectory");
  const double W = 800, H = 480, ml = 70, mr = 120, mt = 40, mb = 50;
  const std::size_t n = tr.states.front().points.size();
  double t0 = tr.times.front(), t1 = tr.times.back();
  if (t1 <= t0) t1 = t0 + 1.0;
  double lo = tr.states.front().points.front().x.real(), hi = lo;
  for (const auto& s : tr.states)
    for (const auto& p : s.points) {
      lo = std::min(lo, p.x.real());
      hi = std::max(hi, p.x.real());
    }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto fx = [&](double t) { return ml + (t - t0) / (t1 - t0) * (W - ml - mr); };
  auto fy = [&](double v) { return mt + (hi - v) / (hi - lo) * (H - mt - mb); };
  auto f3 = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3f", v);
    return std::string(b);
  };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" viewBox=\"0 0 800 480\">\n";
  s += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"" + f3(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";
  s += "<line x1=\"" + f3(ml) + "\" y1=\"" + f3(H - mb) + "\" x2=\"" + f3(W - mr) + "\" y2=\"" + f3(H - mb) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + f3(ml) + "\" y1=\"" + f3(mt) + "\" x2=\"" + f3(ml) + "\" y2=\"" + f3(H - mb) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + f3((ml + W - mr) / 2) + "\" y=\"" + f3(H - 12) + "\" text-anchor=\"middle\" font-size=\"13\">t</text>\n";
  s += "<text x=\"" + f3(ml) + "\" y=\"" + f3(H - mb + 16) + "\" text-anchor=\"middle\" font-size=\"11\">" + f3(t0) + "</text>\n";
  s += "<text x=\"" + f3(W - mr) + "\" y=\"" + f3(H - mb + 16) + "\" text-anchor=\"middle\" font-size=\"11\">" + f3(t1) + "</text>\n";
  s += "<text x=\"" + f3(ml - 6) + "\" y=\"" + f3(mt + 4) + "\" text-anchor=\"end\" font-size=\"11\">" + f3(hi) + "</text>\n";
  s += "<text x=\"" + f3(ml - 6) + "\" y=\"" + f3(H - mb + 4) + "\" text-anchor=\"end\" font-size=\"11\">" + f3(lo) + "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const char* col = colors[i % 10];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      if (k) s += " ";
      s += f3(fx(tr.times[k])) + "," + f3(fy(tr.states[k].points[i].x.real()));
    }
    s += "\"/>\n";
    const double ly = mt + 18.0 * static_cast<double>(i);
    s += "<line x1=\"" + f3(W - mr + 12) + "\" y1=\"" + f3(ly) + "\" x2=\"" + f3(W - mr + 32) + "\" y2=\"" + f3(ly) +
         "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + f3(W - mr + 38) + "\" y=\"" + f3(ly + 4) + "\" font-size=\"12\">Re x_" + std::to_string(i + 1) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void export_plot(const angle::Trajectory& tr, const std::string& path) {
  write_file(path, trajectory_svg(tr, "Re x_i(t)"));
}

}  // namespace hitchin::io
