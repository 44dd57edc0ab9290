// hitchin: command-line front end.
//
//   hitchin curve info      --input system.json
//   hitchin ham solve|check --input system.json
//   hitchin flow run        --input system.json [--t-end --dt --scheme --direction --route --svg]
//   hitchin theta sigma     --input theta.json [--k]
//   hitchin sl2 demo        [--input sl2.json]
//   hitchin parabolic dims|delta|local --input parabolic.json
//
// Exit status: 0 ok, 1 tolerance violated under --strict, 2 usage,
// 3 validation error, 4 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "hitchin/angle.hpp"
#include "hitchin/errors.hpp"
#include "hitchin/io.hpp"
#include "hitchin/numerics.hpp"
#include "hitchin/paratype.hpp"
#include "hitchin/sl2lax.hpp"
#include "hitchin/theta.hpp"

using namespace hitchin;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string input;
  std::string output = ".";
  std::optional<unsigned> seed;
  bool strict = false;
  std::optional<double> tolerance;
};

class Run {
 public:
  Run(const Common& c, std::string command) : c_(c), command_(std::move(command)), start_(clock::now()) {
    std::filesystem::create_directories(c_.output);
    if (!c_.input.empty()) input_text_ = io::read_file(c_.input);
  }

  json input() const {
    if (c_.input.empty()) throw ConfigurationError("--input is required for '" + command_ + "'");
    try {
      return json::parse(input_text_);
    } catch (const json::parse_error& e) {
      throw ConfigurationError("malformed JSON in '" + c_.input + "': " + e.what());
    }
  }
  bool has_input() const { return !c_.input.empty(); }

  double tol(double dflt) const { return c_.tolerance.value_or(dflt); }
  unsigned seed(std::optional<unsigned> from_input, unsigned dflt) const {
    if (c_.seed) return *c_.seed;
    return from_input.value_or(dflt);
  }

  void write(const std::string& name, const std::string& text) {
    io::write_file((std::filesystem::path(c_.output) / name).string(), text);
    outputs_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void mark(const std::string& phase) {
    const auto now = clock::now();
    timings_[phase] = std::chrono::duration<double, std::milli>(now - start_).count();
  }

  // records a tolerance check; returns false on violation
  bool check(const std::string& name, double value, double limit) {
    const bool ok = value < limit;
    checks_.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", ok}});
    if (!ok) {
      std::fprintf(stderr, "tolerance violated: %s = %.3e (limit %.3e)\n", name.c_str(), value, limit);
      violated_ = true;
    }
    return ok;
  }

  void set_seed(unsigned s) { used_seed_ = s; }

  int finish() {
    mark("total");
    json m;
    m["tool"] = "hitchin";
    m["version"] = kVersion;
    m["command"] = command_;
    m["input"] = c_.input;
    m["input_hash"] = c_.input.empty() ? "" : io::fnv1a_hex(input_text_);
    m["seed"] = used_seed_ ? json(*used_seed_) : json(nullptr);
    m["tolerance"] = c_.tolerance ? json(*c_.tolerance) : json(nullptr);
    m["strict"] = c_.strict;
    m["checks"] = checks_;
    m["timings_ms"] = timings_;
    outputs_.push_back("manifest.json");
    m["outputs"] = outputs_;
    io::write_file((std::filesystem::path(c_.output) / "manifest.json").string(), m.dump(2) + "\n");
    return (c_.strict && violated_) ? 1 : 0;
  }

 private:
  using clock = std::chrono::steady_clock;
  Common c_;
  std::string command_;
  clock::time_point start_;
  std::string input_text_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timings_;
  json checks_ = json::array();
  std::optional<unsigned> used_seed_;
  bool violated_ = false;
};

// the system keeps a pointer to the curve, so both live on the heap
struct Loaded {
  io::SystemDescription desc;
  std::unique_ptr<curve::HyperellipticCurve> curve;
  std::unique_ptr<spectral::System> sys;
};

Loaded load_system(const Run& run, bool need_type) {
  Loaded L;
  L.desc = io::parse_system(run.input());
  L.curve = std::make_unique<curve::HyperellipticCurve>(curve::HyperellipticCurve::build(L.desc.coeffs));
  if (need_type) {
    if (!L.desc.family) throw ConfigurationError("field 'lie_type': missing");
    L.sys = std::make_unique<spectral::System>(spectral::resolve_type(*L.desc.family, L.desc.rank), *L.curve);
  }
  return L;
}

// points from the input, or a planted sample from the seed
struct Configured {
  sov::PhaseConfiguration cfg;
  std::optional<CVector> planted;
};

Configured configuration(Run& run, const Loaded& L) {
  const unsigned seed = run.seed(L.desc.seed, 1);
  if (L.desc.points) {
    sov::validate(*L.sys, *L.desc.points);
    return {*L.desc.points, std::nullopt};
  }
  run.set_seed(seed);
  auto s = sov::plant(*L.sys, seed, 0.5);
  return {s.cfg, s.H};
}

json layout_json(const spectral::System& sys) {
  json blocks = json::array();
  for (const auto& b : sys.layout.blocks)
    blocks.push_back({{"delta", b.delta}, {"x_size", b.x_size}, {"y_size", b.y_size}, {"offset", b.offset}});
  return {{"h", sys.h()}, {"blocks", blocks}, {"dim", sys.spec.dim}};
}

// ---- curve info

int curve_info(const Common& c) {
  Run run(c, "curve info");
  auto L = load_system(run, false);
  const auto& C = *L.curve;
  auto td = curve::period_matrix(C);
  const double kres = theta::riemann_constants(C, td);
  const int jet_order = 2 * C.genus() + 2;
  td.abel_jets = curve::abel_jets(C, td, jet_order);
  run.mark("periods");
  const double sym = (td.tau - td.tau.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(td.tau.imag());
  json out;
  out["genus"] = C.genus();
  out["degree"] = C.degree();
  out["branch_points"] = io::to_json(C.branch_points());
  out["min_branch_separation"] = C.min_branch_separation();
  out["exclusion_radius"] = C.exclusion_radius();
  out["detour_radius"] = C.detour_radius();
  out["chart_radius"] = C.chart_radius();
  out["tau_symmetry_defect"] = sym;
  out["im_tau_min_eigenvalue"] = es.eigenvalues().minCoeff();
  out["riemann_residual"] = kres;
  json tdj;
  tdj["tau"] = io::to_json(td.tau);
  tdj["riemann_constants"] = io::to_json(td.riemann_constants);
  tdj["abel_jets"] = io::to_json(td.abel_jets);
  tdj["normalization"] = io::to_json(td.normalization);
  out["theta_data"] = tdj;
  run.write_json("curve.json", out);
  run.check("tau_symmetry_defect", sym, run.tol(1e-10));
  run.check("riemann_residual", kres, 1e-6);
  std::printf("genus %d, tau symmetry %.3e, min eig Im tau %.6g, K residual %.3e\n", C.genus(), sym,
              es.eigenvalues().minCoeff(), kres);
  return run.finish();
}

// ---- ham

int ham_solve(const Common& c) {
  Run run(c, "ham solve");
  auto L = load_system(run, true);
  auto conf = configuration(run, L);
  sov::SolveOptions opt;
  opt.seed = run.seed(L.desc.seed, 12345);
  const CVector H = sov::solve_hamiltonians(*L.sys, conf.cfg, opt);
  run.mark("solve");
  const double res = sov::fiber_residual(*L.sys, conf.cfg, H) / sov::residual_scale(*L.sys, conf.cfg);
  json out;
  out["family"] = spectral::family_name(L.sys->spec.family);
  out["rank"] = L.sys->spec.rank;
  out["layout"] = layout_json(*L.sys);
  out["points"] = io::to_json(conf.cfg);
  out["H"] = io::to_json(H);
  out["relative_residual"] = res;
  if (L.sys->spec.square_last) {
    json all = json::array();
    for (const auto& s : sov::solve_hamiltonians_all(*L.sys, conf.cfg, opt)) all.push_back(io::to_json(s));
    out["solutions"] = all;
  }
  if (conf.planted) {
    out["planted_H"] = io::to_json(*conf.planted);
    if (!L.sys->spec.square_last)
      run.check("planted_recovery", (H - *conf.planted).norm() / conf.planted->norm(), run.tol(1e-8));
  }
  run.write_json("hamiltonians.json", out);
  run.check("relative_residual", res, run.tol(1e-8));
  std::printf("h = %d, relative residual %.3e\n", L.sys->h(), res);
  return run.finish();
}

int ham_check(const Common& c) {
  Run run(c, "ham check");
  auto L = load_system(run, true);
  auto conf = configuration(run, L);
  const CVector H = L.desc.hamiltonians ? *L.desc.hamiltonians : sov::solve_hamiltonians(*L.sys, conf.cfg);
  const RMatrix B = sov::involution_check(*L.sys, conf.cfg, H);
  const double scale = sov::gradient_scale(sov::implicit_gradients(*L.sys, conf.cfg, H), conf.cfg);
  run.mark("brackets");
  std::string csv = "j,k,abs_bracket,relative\n";
  for (int j = 0; j < B.rows(); ++j)
    for (int k = 0; k < B.cols(); ++k)
      csv += std::to_string(j) + "," + std::to_string(k) + "," + io::num(B(j, k)) + "," + io::num(B(j, k) / scale) + "\n";
  run.write("brackets.csv", csv);
  const double worst = B.maxCoeff() / scale;
  run.check("max_relative_bracket", worst, run.tol(1e-7));
  std::printf("max |{H_j,H_k}| / scale = %.3e (scale %.3e)\n", worst, scale);
  return run.finish();
}

// ---- flow

struct FlowFlags {
  std::optional<double> t_end, dt;
  std::optional<std::string> scheme, route, direction;
  bool svg = false;
  int store_every = 1;
};

int flow_run(const Common& c, const FlowFlags& ff) {
  Run run(c, "flow run");
  auto L = load_system(run, true);
  auto conf = configuration(run, L);
  const auto& sys = *L.sys;
  angle::FlowOptions opt;
  opt.t_end = ff.t_end.value_or(L.desc.flow.t_end);
  opt.dt = ff.dt.value_or(L.desc.flow.dt);
  if (!(opt.dt > 0) || !(opt.t_end >= 0)) throw ConfigurationError("flow needs dt > 0 and t_end >= 0");
  opt.scheme = angle::parse_scheme(ff.scheme.value_or(L.desc.flow.scheme));
  opt.store_every = std::max(1, ff.store_every);
  const std::string route = ff.route.value_or(L.desc.flow.route);
  if (route != "fiber" && route != "poisson" && route != "both")
    throw ConfigurationError("field 'route': expected fiber, poisson or both");
  CVector dir = CVector::Zero(sys.h());
  dir(0) = 0.1;
  if (ff.direction) dir = io::parse_cvector(json::parse(*ff.direction), "--direction");
  else if (L.desc.flow.direction) dir = *L.desc.flow.direction;
  if (dir.size() != sys.h()) throw ConfigurationError("field 'direction': expected " + std::to_string(sys.h()) + " entries");
  const CVector H0 = L.desc.hamiltonians ? *L.desc.hamiltonians : sov::solve_hamiltonians(sys, conf.cfg);
  json summary;
  summary["h"] = sys.h();
  summary["direction"] = io::to_json(dir);
  summary["H0"] = io::to_json(H0);
  std::optional<angle::Trajectory> fib, poi;
  auto report = [&](const std::string& name, const angle::Trajectory& tr) {
    run.write("flow_" + name + ".csv", io::trajectory_csv(tr));
    if (ff.svg) run.write("flow_" + name + ".svg", io::trajectory_svg(tr, "Re x_i(t), route " + name));
    const double drift = angle::hamiltonian_drift(sys, tr, H0);
    summary[name]["hamiltonian_drift"] = drift;
    run.check(name + ".hamiltonian_drift", drift, run.tol(1e-7));
    const CVector phi = angle::trajectory_angle(sys, H0, tr, tr.states.size());
    const double lin = (phi - dir * tr.times.back()).norm();
    summary[name]["angle_linearity_error"] = lin;
    if (tr.times.back() > 0) run.check(name + ".angle_linearity", lin, 1e-5 * tr.times.back());
  };
  if (route == "fiber" || route == "both") {
    fib = angle::flow_fiber(sys, H0, conf.cfg, dir, opt);
    run.mark("fiber");
    report("fiber", *fib);
  }
  if (route == "poisson" || route == "both") {
    poi = angle::flow_poisson(sys, conf.cfg, dir, opt);
    run.mark("poisson");
    report("poisson", *poi);
  }
  if (fib && poi) {
    double worst = 0.0;
    for (std::size_t k = 0; k < fib->states.size(); ++k)
      worst = std::max(worst, angle::config_distance(fib->states[k], poi->states[k]));
    summary["max_point_set_distance"] = worst;
    summary["final_point_set_distance"] = angle::config_distance(fib->states.back(), poi->states.back());
    run.check("max_point_set_distance", worst, run.tol(1e-6));
    std::printf("max matched point-set distance %.3e\n", worst);
    run.write_json("comparison.json", summary);
  } else {
    run.write_json("summary.json", summary);
  }
  return run.finish();
}

// ---- theta sigma

int theta_sigma(const Common& c, std::optional<int> k_flag) {
  Run run(c, "theta sigma");
  const json in = run.input();
  const int k = k_flag.value_or(in.contains("k") ? in["k"].get<int>() : 1);
  if (k < 1) throw ConfigurationError("field 'k': must be >= 1");
  std::optional<curve::HyperellipticCurve> C;
  curve::ThetaData td;
  std::optional<theta::SigmaCalibration> cal;
  if (in.contains("curve")) {
    C = curve::HyperellipticCurve::build(io::parse_complex_list(in["curve"].value("coeffs", json()), "curve.coeffs"));
    td = curve::period_matrix(*C);
    theta::riemann_constants(*C, td);
    td.abel_jets = curve::abel_jets(*C, td, 2 * k + 2);
    td.genus = C->genus();
    cal = theta::calibrate_sigma(*C, td, k);
  } else if (in.contains("theta_data")) {
    const json& t = in["theta_data"];
    if (!t.contains("tau") || !t.contains("riemann_constants") || !t.contains("abel_jets"))
      throw ConfigurationError("field 'theta_data': needs tau, riemann_constants and abel_jets");
    td.tau = io::parse_cmatrix(t["tau"], "theta_data.tau");
    td.riemann_constants = io::parse_cvector(t["riemann_constants"], "theta_data.riemann_constants");
    td.abel_jets = io::parse_cmatrix(t["abel_jets"], "theta_data.abel_jets");
    td.genus = static_cast<int>(td.tau.rows());
    if (td.abel_jets.cols() < 2 * k) throw ConfigurationError("field 'theta_data.abel_jets': needs at least 2k columns");
    if (in.contains("constants")) {
      theta::SigmaCalibration sc;
      sc.constants = io::parse_complex_list(in["constants"], "constants");
      if (static_cast<int>(sc.constants.size()) < k) throw ConfigurationError("field 'constants': needs k entries");
      cal = sc;
    }
  } else {
    throw ConfigurationError("field 'curve' or 'theta_data': missing");
  }
  CVector phi;
  std::optional<cplx> newton;
  if (in.contains("phi")) {
    phi = io::parse_cvector(in["phi"], "phi");
  } else if (in.contains("points")) {
    if (!C) throw ConfigurationError("field 'points': needs a curve to form the Abel image");
    std::vector<curve::CurvePoint> pts;
    cplx s = 0.0;
    for (std::size_t i = 0; i < in["points"].size(); ++i) {
      const std::string p = "points[" + std::to_string(i) + "]";
      const auto& e = in["points"][i];
      if (!e.contains("x")) throw ConfigurationError("field '" + p + ".x': missing");
      curve::CurvePoint cp{io::parse_complex(e["x"], p + ".x"), 0.0, false};
      // y defaults to the principal square root
      cp.y = e.contains("y") ? io::parse_complex(e["y"], p + ".y") : std::sqrt(C->P(cp.x));
      if (!C->on_curve(cp, 1e-8)) throw ConfigurationError("field '" + p + "': point is not on the curve");
      pts.push_back(cp);
      s += num::ipow(cp.x, k);
    }
    phi = theta::divisor_image(*C, td, pts);
    newton = s;
  } else {
    throw ConfigurationError("field 'phi' or 'points': missing");
  }
  if (phi.size() != td.tau.rows()) throw ConfigurationError("field 'phi': length must equal the genus");
  const cplx rs = theta::residue_series(td, phi, k);
  const cplx rc = theta::residue_contour(td, C ? &*C : nullptr, phi, k);
  run.mark("residues");
  json out;
  out["k"] = k;
  out["phi"] = io::to_json(phi);
  out["residue_series"] = io::to_json(rs);
  out["residue_contour"] = io::to_json(rc);
  out["series_contour_difference"] = std::abs(rs - rc);
  run.check("series_contour_difference", std::abs(rs - rc), run.tol(1e-6));
  if (cal) {
    const cplx ss = cal->constants[k - 1] - rs, sc = cal->constants[k - 1] - rc;
    out["constant"] = io::to_json(cal->constants[k - 1]);
    out["sigma_series"] = io::to_json(ss);
    out["sigma_contour"] = io::to_json(sc);
    if (newton) {
      out["newton_sum"] = io::to_json(*newton);
      run.check("sigma_vs_newton_sum", std::abs(ss - *newton), 1e-5);
    }
  }
  run.write_json("sigma.json", out);
  std::printf("k = %d, |series - contour| = %.3e\n", k, std::abs(rs - rc));
  return run.finish();
}

// ---- sl2 demo

int sl2_demo(const Common& c) {
  Run run(c, "sl2 demo");
  json in = run.has_input() ? run.input() : json::object();
  sl2::Sextet z{cplx(0.1, 0.2), cplx(1.3, -0.4), cplx(-0.7, 0.5), cplx(2.1, 0.9), cplx(-1.5, -1.1), cplx(0.4, 1.7)};
  if (in.contains("sextet")) {
    auto v = io::parse_complex_list(in["sextet"], "sextet");
    if (v.size() != 6) throw ConfigurationError("field 'sextet': expected 6 entries");
    std::copy(v.begin(), v.end(), z.begin());
  }
  sl2::validate(z);
  sl2::GeomPhasePoint pp;
  if (in.contains("q") && in.contains("p")) {
    const CVector q = io::parse_cvector(in["q"], "q"), p = io::parse_cvector(in["p"], "p");
    if (q.size() != 4 || p.size() != 4) throw ConfigurationError("fields 'q', 'p': expected 4 entries");
    pp.q = q;
    pp.p = p;
    pp.chart = sl2::best_chart(pp.q);
    sl2::validate(pp);
    pp = sl2::normalize(pp, pp.chart);
  } else {
    const unsigned seed = run.seed(in.contains("seed") ? std::optional<unsigned>(in["seed"].get<unsigned>()) : std::nullopt, 5);
    run.set_seed(seed);
    pp = sl2::random_point(seed);
  }
  const cplx zeta = in.contains("zeta") ? io::parse_complex(in["zeta"], "zeta") : cplx(0.3, 0.1);
  const int l = in.contains("l") ? in["l"].get<int>() : 2;
  sl2::LaxFlowOptions opt;
  if (in.contains("t_end")) opt.t_end = in["t_end"].get<double>();
  if (in.contains("dt")) opt.dt = in["dt"].get<double>();
  if (in.contains("probe")) opt.probe = io::parse_complex(in["probe"], "probe");
  const auto xm = sl2::x_matrix(pp);
  const double so6 = sl2::so6_defect(pp);
  const auto lr = sl2::lax_residual(pp, z, zeta, opt.probe, l);
  const auto tr = sl2::lax_flow(pp, z, zeta, l, opt);
  run.mark("flow");
  auto spectrum = [&](const sl2::GeomPhasePoint& s) {
    Eigen::ComplexEigenSolver<sl2::Mat6> es(sl2::lax_matrix(s, z, opt.probe), false);
    return std::vector<cplx>(es.eigenvalues().data(), es.eigenvalues().data() + 6);
  };
  const auto ev0 = spectrum(tr.states.front());
  const auto H0 = sl2::gp_hamiltonians(tr.states.front(), z);
  std::string csv = "t";
  for (int i = 1; i <= 6; ++i) csv += ",re_H" + std::to_string(i) + ",im_H" + std::to_string(i);
  csv += ",max_abs_dH,eigen_drift\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto H = sl2::gp_hamiltonians(tr.states[k], z);
    double dh = 0.0;
    csv += io::num(tr.times[k]);
    for (int i = 0; i < 6; ++i) {
      csv += "," + io::num(H[i].real()) + "," + io::num(H[i].imag());
      dh = std::max(dh, std::abs(H[i] - H0[i]));
    }
    csv += "," + io::num(dh) + "," + io::num(num::matching_distance(spectrum(tr.states[k]), ev0)) + "\n";
  }
  run.write("sl2.csv", csv);
  json out;
  out["l"] = l;
  out["zeta"] = io::to_json(zeta);
  out["probe"] = io::to_json(opt.probe);
  out["skew_defect"] = xm.skew_defect;
  out["so6_defect"] = so6;
  out["lax_residual"] = lr.residual;
  out["commutator_scale"] = lr.commutator;
  out["eigen_drift"] = tr.eigen_drift;
  out["gp_drift"] = tr.gp_drift;
  out["chart_switches"] = tr.chart_switches;
  run.write_json("sl2.json", out);
  run.check("skew_defect", xm.skew_defect, 1e-10);
  run.check("so6_defect", so6, run.tol(1e-8));
  run.check("lax_residual", lr.residual, run.tol(1e-6));
  run.check("eigen_drift", tr.eigen_drift, run.tol(1e-6) * std::max(1.0, opt.t_end));
  run.check("gp_drift", tr.gp_drift, run.tol(1e-6));
  std::printf("so6 %.3e, Lax residual %.3e, eigen drift %.3e, H drift %.3e\n", so6, lr.residual, tr.eigen_drift,
              tr.gp_drift);
  return run.finish();
}

// ---- parabolic

json partition_json(const para::Partition& p) { return json(p); }

int parabolic_dims(const Common& c) {
  Run run(c, "parabolic dims");
  const auto t = io::parse_parabolic(run.input());
  const auto d = para::parabolic_base_dims(t);
  json out;
  out["genus"] = t.genus;
  out["rank"] = t.rank;
  json lev = json::array();
  for (const auto& p : t.points) lev.push_back(para::level_functions(p.partition));
  out["level_functions"] = lev;
  out["degrees"] = d.degrees;
  out["dims"] = d.dims;
  out["total"] = d.total;
  run.write_json("dims.json", out);
  std::printf("total dimension %d\n", d.total);
  return run.finish();
}

int parabolic_delta(const Common& c) {
  Run run(c, "parabolic delta");
  const json in = run.input();
  const auto t = io::parse_parabolic(in);
  json out;
  out["delta_p"] = para::delta_p(t);
  json duals = json::array();
  for (const auto& p : t.points) duals.push_back(partition_json(para::dual_partition(p.partition)));
  out["dual_partitions"] = duals;
  if (in.contains("deg_E")) {
    if (!in["deg_E"].is_number_integer()) throw ConfigurationError("field 'deg_E': expected an integer");
    out["parabolic_degree"] = para::to_string(para::parabolic_degree(in["deg_E"].get<long>(), t));
  }
  run.write_json("delta.json", out);
  std::printf("Delta_P = %d\n", out["delta_p"].get<int>());
  return run.finish();
}

int parabolic_local(const Common& c) {
  Run run(c, "parabolic local");
  const json in = run.input();
  para::LocalCharPoly f;
  para::Partition expected;
  json out;
  if (in.contains("local")) {
    const json& lj = in["local"];
    const int order = lj.value("order", 16);
    f = io::parse_local(lj, order);
    if (!in.contains("expected_mu") || !in["expected_mu"].is_array())
      throw ConfigurationError("field 'expected_mu': missing");
    expected = in["expected_mu"].get<para::Partition>();
  } else {
    const auto t = io::parse_parabolic(in);
    para::validate(t);
    if (t.points.empty()) throw ConfigurationError("field 'points': needs a marked point");
    expected = para::dual_partition(t.points.front().partition);
    const unsigned seed = run.seed(std::nullopt, 1);
    run.set_seed(seed);
    f = para::synthesize_eisenstein(expected, seed, in.value("order", 12));
    out["synthesized"] = true;
  }
  const auto rep = para::newton_eisenstein_check(f, expected);
  json verts = json::array();
  for (const auto& [x, y] : rep.vertices) verts.push_back({x, y});
  json segs = json::array();
  for (const auto& s : rep.segments)
    segs.push_back({{"from", {s.x0, s.y0}}, {"to", {s.x1, s.y1}}, {"slope", std::to_string(s.p) + "/" + std::to_string(s.q)},
                    {"factor_degree", s.factor_degree}, {"factor_count", s.factor_count}, {"eisenstein", s.eisenstein},
                    {"residual_squarefree", s.residual_squarefree}});
  out["vertices"] = verts;
  out["segments"] = segs;
  out["factor_degrees"] = rep.factor_degrees;
  out["expected_mu"] = expected;
  out["matches_expected"] = rep.matches_expected;
  out["all_eisenstein"] = rep.all_eisenstein;
  out["distinguished"] = rep.distinguished;
  out["verified_order"] = rep.verified_order;
  run.write_json("local.json", out);
  run.check("factor_degree_mismatch", rep.matches_expected ? 0.0 : 1.0, 0.5);
  std::printf("factor degrees:");
  for (int d : rep.factor_degrees) std::printf(" %d", d);
  std::printf("; distinguished %s\n", rep.distinguished ? "yes" : "no");
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for hyperelliptic Hitchin systems"};
  app.fallthrough();
  app.require_subcommand(1);
  Common common;
  std::optional<unsigned> seed;
  std::optional<double> tol;
  app.add_option("--input", common.input, "input JSON file");
  app.add_option("--output", common.output, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--strict", common.strict, "exit 1 when a tolerance is violated");
  app.add_option("--tolerance", tol, "override the default tolerance of the command");
  app.set_version_flag("--version", kVersion);

  std::function<int()> action;
  auto group = [&](const std::string& name, const std::string& desc) {
    auto* g = app.add_subcommand(name, desc);
    g->require_subcommand(1);
    return g;
  };
  auto* curve = group("curve", "hyperelliptic curve data");
  curve->add_subcommand("info", "branch data, period matrix, Riemann constants, Abel jets")
      ->callback([&] { action = [&] { return curve_info(common); }; });
  auto* ham = group("ham", "Hamiltonians from separated variables");
  ham->add_subcommand("solve", "solve R(gamma_i, H) = 0 for H")->callback([&] { action = [&] { return ham_solve(common); }; });
  ham->add_subcommand("check", "Poisson brackets {H_j, H_k}")->callback([&] { action = [&] { return ham_check(common); }; });
  FlowFlags ff;
  auto* flow = group("flow", "linear flows on the fiber");
  auto* run = flow->add_subcommand("run", "integrate a trajectory");
  run->add_option("--t-end", ff.t_end, "final time");
  run->add_option("--dt", ff.dt, "step");
  run->add_option("--scheme", ff.scheme, "euler or rk4");
  run->add_option("--direction", ff.direction, "JSON vector c");
  run->add_option("--route", ff.route, "fiber, poisson or both");
  run->add_option("--store-every", ff.store_every, "store every n-th state");
  run->add_flag("--svg", ff.svg, "also write SVG plots");
  run->callback([&] { action = [&] { return flow_run(common, ff); }; });
  std::optional<int> k;
  auto* th = group("theta", "theta functions");
  auto* sig = th->add_subcommand("sigma", "power sums sigma_k from theta (series and contour)");
  sig->add_option("--k", k, "power");
  sig->callback([&] { action = [&] { return theta_sigma(common, k); }; });
  auto* sl = group("sl2", "SL2 genus-2 system on T*P^3");
  sl->add_subcommand("demo", "Lax flow with conservation monitors")->callback([&] { action = [&] { return sl2_demo(common); }; });
  auto* par = group("parabolic", "parabolic types");
  par->add_subcommand("dims", "parabolic Hitchin base dimensions")->callback([&] { action = [&] { return parabolic_dims(common); }; });
  par->add_subcommand("delta", "Delta_P and parabolic degree")->callback([&] { action = [&] { return parabolic_delta(common); }; });
  par->add_subcommand("local", "Newton polygon and Eisenstein factors")->callback([&] { action = [&] { return parabolic_local(common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  common.seed = seed;
  common.tolerance = tol;
  try {
    return action();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::Validation ? 3 : 4;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: ConfigurationError: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: IOError: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
