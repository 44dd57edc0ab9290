#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "hitchin/angle.hpp"
#include "hitchin/errors.hpp"
#include "hitchin/paratype.hpp"
#include "hitchin/sl2lax.hpp"
#include "hitchin/sov.hpp"
#include "hitchin/theta.hpp"

namespace py = pybind11;
using namespace hitchin;

namespace {

// Owns the curve the System points into.
struct PySystem {
  std::shared_ptr<curve::HyperellipticCurve> curve;
  std::unique_ptr<spectral::System> sys;

  PySystem(const std::string& family, int rank, std::vector<cplx> coeffs)
      : curve(std::make_shared<curve::HyperellipticCurve>(curve::HyperellipticCurve::build(std::move(coeffs)))),
        sys(std::make_unique<spectral::System>(spectral::resolve_type(spectral::parse_family(family), rank), *curve)) {}
};

using Points = Eigen::Matrix<cplx, Eigen::Dynamic, 3, Eigen::RowMajor>;

sov::PhaseConfiguration to_config(const Points& m) {
  sov::PhaseConfiguration c;
  for (Eigen::Index i = 0; i < m.rows(); ++i) c.points.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return c;
}

Points from_config(const sov::PhaseConfiguration& c) {
  Points m(static_cast<Eigen::Index>(c.points.size()), 3);
  for (std::size_t i = 0; i < c.points.size(); ++i) m.row(i) << c.points[i].x, c.points[i].y, c.points[i].lambda;
  return m;
}

py::dict trajectory_dict(const angle::Trajectory& tr) {
  py::list states;
  for (const auto& s : tr.states) states.append(from_config(s));
  py::dict d;
  d["times"] = tr.times;
  d["states"] = states;
  return d;
}

angle::FlowOptions flow_options(double t_end, double dt, const std::string& scheme, int store_every) {
  angle::FlowOptions o;
  o.t_end = t_end;
  o.dt = dt;
  o.scheme = angle::parse_scheme(scheme);
  o.store_every = store_every;
  return o;
}

para::ParabolicType parabolic_type(int genus, int rank, const std::vector<para::Partition>& points) {
  para::ParabolicType t{genus, rank, {}};
  for (const auto& p : points) t.points.push_back({p, {}});
  return t;
}

}  // namespace

PYBIND11_MODULE(hitchin, m) {
  m.doc() = "Hyperelliptic Hitchin systems: curves, theta functions, separated variables and flows";

  static py::exception<Error> base(m, "Error");
  static py::exception<Error> validation(m, "ValidationError", base.ptr());
  static py::exception<Error> numerical(m, "NumericalError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(e.kind() == ErrorKind::Validation ? validation : numerical, e.what());
    }
  });

  py::class_<curve::HyperellipticCurve, std::shared_ptr<curve::HyperellipticCurve>>(m, "Curve")
      .def(py::init([](std::vector<cplx> coeffs, bool genus_one) {
             curve::CurveOptions o;
             o.allow_genus_one = genus_one;
             return std::make_shared<curve::HyperellipticCurve>(curve::HyperellipticCurve::build(std::move(coeffs), o));
           }),
           py::arg("coeffs"), py::arg("allow_genus_one") = false)
      .def_property_readonly("genus", &curve::HyperellipticCurve::genus)
      .def_property_readonly("branch_points", &curve::HyperellipticCurve::branch_points)
      .def("P", &curve::HyperellipticCurve::P);

  m.def(
      "period_matrix",
      [](const curve::HyperellipticCurve& c) {
        const auto td = curve::period_matrix(c);
        py::dict d;
        d["tau"] = td.tau;
        d["a_periods"] = td.a_periods;
        d["b_periods"] = td.b_periods;
        d["normalization"] = td.normalization;
        return d;
      },
      py::arg("curve"));
  m.def(
      "abel_map",
      [](const curve::HyperellipticCurve& c, cplx x, cplx y) {
        const auto td = curve::period_matrix(c);
        return curve::abel_map(c, td, {x, y, false}, curve::CurvePoint::infinity());
      },
      py::arg("curve"), py::arg("x"), py::arg("y"), "Abel map from the point at infinity");
  m.def(
      "riemann_theta", [](const CVector& z, const CMatrix& tau) { return theta::riemann_theta(z, tau); }, py::arg("z"),
      py::arg("tau"));
  m.def(
      "jacobi_inversion",
      [](const curve::HyperellipticCurve& c, const std::vector<std::pair<cplx, cplx>>& pts) {
        auto td = curve::period_matrix(c);
        theta::riemann_constants(c, td);
        td.abel_jets = curve::abel_jets(c, td, 2 * c.genus() + 4);
        const auto cal = theta::calibrate_sigma(c, td, c.genus() + 1);
        std::vector<curve::CurvePoint> cp;
        for (const auto& [x, y] : pts) cp.push_back({x, y, false});
        const auto rep = theta::jacobi_inversion_check(c, td, cal, cp);
        py::dict d;
        d["recovered_x"] = rep.recovered_x;
        d["sigmas"] = rep.sigmas;
        d["error"] = rep.error;
        return d;
      },
      py::arg("curve"), py::arg("points"), "Recover x-coordinates of g points from their Abel image");

  m.def(
      "resolve_type",
      [](const std::string& family, int rank) {
        const auto s = spectral::resolve_type(spectral::parse_family(family), rank);
        py::dict d;
        d["family"] = spectral::family_name(s.family);
        d["rank"] = s.rank;
        d["matrix_size"] = s.d;
        d["deltas"] = s.deltas;
        d["dees"] = s.dees;
        d["dim"] = s.dim;
        return d;
      },
      py::arg("family"), py::arg("rank"));

  py::class_<PySystem>(m, "System")
      .def(py::init<const std::string&, int, std::vector<cplx>>(), py::arg("family"), py::arg("rank"), py::arg("coeffs"))
      .def_property_readonly("h", [](const PySystem& s) { return s.sys->h(); })
      .def_property_readonly("genus", [](const PySystem& s) { return s.sys->genus(); })
      .def_property_readonly("curve", [](const PySystem& s) { return s.curve; })
      .def(
          "plant",
          [](const PySystem& s, unsigned seed, double h_scale) {
            const auto p = sov::plant(*s.sys, seed, h_scale);
            return py::make_tuple(p.H, from_config(p.cfg));
          },
          py::arg("seed"), py::arg("h_scale") = 1.0, "Random Hamiltonians H and h points on the fiber over H")
      .def(
          "lambda_roots", [](const PySystem& s, const CVector& H, cplx x, cplx y) { return spectral::lambda_roots(*s.sys, H, x, y).roots; },
          py::arg("H"), py::arg("x"), py::arg("y"))
      .def(
          "solve_hamiltonians",
          [](const PySystem& s, const Points& pts) { return sov::solve_hamiltonians(*s.sys, to_config(pts)); },
          py::arg("points"))
      .def(
          "solve_hamiltonians_all",
          [](const PySystem& s, const Points& pts) { return sov::solve_hamiltonians_all(*s.sys, to_config(pts)); },
          py::arg("points"))
      .def(
          "fiber_residual",
          [](const PySystem& s, const Points& pts, const CVector& H) { return sov::fiber_residual(*s.sys, to_config(pts), H); },
          py::arg("points"), py::arg("H"))
      .def(
          "involution_check",
          [](const PySystem& s, const Points& pts, const CVector& H) {
            const auto cfg = to_config(pts);
            const RMatrix B = sov::involution_check(*s.sys, cfg, H);
            return py::make_tuple(B, sov::gradient_scale(sov::implicit_gradients(*s.sys, cfg, H), cfg));
          },
          py::arg("points"), py::arg("H"), "|{H_j, H_k}| and the gradient scale")
      .def(
          "discriminant_count",
          [](const PySystem& s, const CVector& H) {
            const auto d = spectral::discriminant_zero_count(*s.sys, H);
            py::dict r;
            r["zeros_on_curve"] = d.zeros_on_curve;
            r["zeros_on_cover"] = d.zeros_on_cover;
            r["branch_points"] = d.odd_order_points;
            r["genus"] = d.riemann_hurwitz_genus;
            return r;
          },
          py::arg("H"))
      .def(
          "angle_increment",
          [](const PySystem& s, const CVector& H, const Points& a, const Points& b) {
            return angle::angle_increment(*s.sys, H, to_config(a), to_config(b));
          },
          py::arg("H"), py::arg("a"), py::arg("b"))
      .def(
          "flow_fiber",
          [](const PySystem& s, const CVector& H, const Points& pts, const CVector& c, double t_end, double dt,
             const std::string& scheme, int store_every) {
            return trajectory_dict(angle::flow_fiber(*s.sys, H, to_config(pts), c, flow_options(t_end, dt, scheme, store_every)));
          },
          py::arg("H"), py::arg("points"), py::arg("c"), py::arg("t_end") = 1.0, py::arg("dt") = 1e-3,
          py::arg("scheme") = "rk4", py::arg("store_every") = 1)
      .def(
          "flow_poisson",
          [](const PySystem& s, const Points& pts, const CVector& c, double t_end, double dt, const std::string& scheme,
             int store_every) {
            return trajectory_dict(angle::flow_poisson(*s.sys, to_config(pts), c, flow_options(t_end, dt, scheme, store_every)));
          },
          py::arg("points"), py::arg("c"), py::arg("t_end") = 1.0, py::arg("dt") = 1e-3, py::arg("scheme") = "rk4",
          py::arg("store_every") = 1);

  m.def(
      "config_distance", [](const Points& a, const Points& b) { return angle::config_distance(to_config(a), to_config(b)); },
      py::arg("a"), py::arg("b"));

  m.def("dual_partition", &para::dual_partition, py::arg("partition"));
  m.def("level_functions", &para::level_functions, py::arg("partition"));
  m.def(
      "parabolic_base_dims",
      [](int genus, int rank, const std::vector<para::Partition>& points) {
        const auto d = para::parabolic_base_dims(parabolic_type(genus, rank, points));
        py::dict r;
        r["degrees"] = d.degrees;
        r["dims"] = d.dims;
        r["total"] = d.total;
        return r;
      },
      py::arg("genus"), py::arg("rank"), py::arg("points"));
  m.def(
      "delta_p",
      [](int genus, int rank, const std::vector<para::Partition>& points) {
        return para::delta_p(parabolic_type(genus, rank, points));
      },
      py::arg("genus"), py::arg("rank"), py::arg("points"));
  m.def(
      "newton_check",
      [](const std::vector<std::vector<long>>& coeffs, const para::Partition& expected, int order) {
        para::LocalCharPoly f;
        for (const auto& a : coeffs) {
          auto s = para::Series::zero(order);
          for (std::size_t k = 0; k < a.size() && k < s.c.size(); ++k) s.c[k] = a[k];
          f.a.push_back(s);
        }
        const auto rep = para::newton_eisenstein_check(f, expected);
        py::dict r;
        r["factor_degrees"] = rep.factor_degrees;
        r["distinguished"] = rep.distinguished;
        r["matches_expected"] = rep.matches_expected;
        return r;
      },
      py::arg("coefficients"), py::arg("expected"), py::arg("order") = 16,
      "coefficients[j-1] lists the t-series of a_j");

  m.def(
      "sl2_lax_flow",
      [](unsigned seed, std::vector<cplx> z, cplx zeta, int l, double t_end) {
        if (z.size() != 6) throw ConfigurationError("need six marked points");
        sl2::Sextet zs;
        std::copy(z.begin(), z.end(), zs.begin());
        sl2::LaxFlowOptions o;
        o.t_end = t_end;
        const auto tr = sl2::lax_flow(sl2::random_point(seed), zs, zeta, l, o);
        py::dict r;
        r["eigen_drift"] = tr.eigen_drift;
        r["gp_drift"] = tr.gp_drift;
        r["steps"] = tr.times.size();
        return r;
      },
      py::arg("seed"), py::arg("z"), py::arg("zeta"), py::arg("l"), py::arg("t_end") = 1.0,
      "Flow of tr L(zeta)^l from a random phase point; returns conservation monitors");
}
