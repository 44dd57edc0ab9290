#pragma once

// JSON ingestion and CSV/JSON/SVG emission. Complex numbers are [re, im]
// pairs everywhere; plain numbers are accepted on input as real values.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitchin/angle.hpp"
#include "hitchin/paratype.hpp"
#include "hitchin/sl2lax.hpp"

namespace hitchin::io {

using nlohmann::json;

cplx parse_complex(const json& j, const std::string& path);
std::vector<cplx> parse_complex_list(const json& j, const std::string& path);
CVector parse_cvector(const json& j, const std::string& path);
CMatrix parse_cmatrix(const json& j, const std::string& path);

json to_json(cplx z);
json to_json(const CVector& v);
json to_json(const CMatrix& m);
json to_json(const std::vector<cplx>& v);

struct FlowSpec {
  double t_end = 1.0;
  double dt = 1e-3;
  std::string scheme = "rk4";
  std::string route = "fiber";
  std::optional<CVector> direction;
};

/// {"curve":{"coeffs"}, "lie_type":{"family","rank"}, "points":[{"x","y","lambda"}], "flow":{...}, "seed"}
struct SystemDescription {
  std::vector<cplx> coeffs;
  std::optional<spectral::Family> family;
  int rank = 0;
  std::optional<sov::PhaseConfiguration> points;
  std::optional<CVector> hamiltonians;
  FlowSpec flow;
  std::optional<unsigned> seed;
};

/// Throws ConfigurationError with the JSON path of the offending field.
SystemDescription parse_system(const json& j);
json to_json(const sov::PhaseConfiguration& cfg);

/// {"genus", "rank", "points":[{"partition", "weights"}]}; weights are
/// numbers or "p/q" strings.
para::ParabolicType parse_parabolic(const json& j);
/// Power-series coefficient lists: "coefficients": [[c_0, c_1, ...] per a_j].
para::LocalCharPoly parse_local(const json& j, int order);

json parse_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// %.17g
std::string num(double v);

/// t, i, re_x, im_x, re_y, im_y, re_lambda, im_lambda
std::string trajectory_csv(const angle::Trajectory& tr);
/// Polylines of Re x_i(t) with a legend.
std::string trajectory_svg(const angle::Trajectory& tr, const std::string& title);
void export_plot(const angle::Trajectory& tr, const std::string& path);

}  // namespace hitchin::io
