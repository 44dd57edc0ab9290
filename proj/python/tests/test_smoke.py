import numpy as np
import pytest

import hitchin

COEFFS = [-120, 274, -225, 85, -15, 1]  # (x-1)(x-2)(x-3)(x-4)(x-5)


def test_curve_and_periods():
    c = hitchin.Curve(COEFFS)
    assert c.genus == 2
    assert sorted(round(b.real) for b in c.branch_points) == [1, 2, 3, 4, 5]
    tau = hitchin.period_matrix(c)["tau"]
    assert np.allclose(tau, tau.T, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(tau.imag) > 0)


def test_theta_genus_one():
    tau = np.array([[1j]])
    z = np.array([0.2 + 0.1j])
    direct = sum(np.exp(1j * np.pi * (n * n * tau[0, 0] + 2 * n * z[0])) for n in range(-30, 31))
    assert abs(hitchin.riemann_theta(z, tau) - direct) < 1e-12


def test_involution_and_round_trip():
    s = hitchin.System("GL", 2, COEFFS)
    assert s.h == 5
    H, pts = s.plant(3)
    assert pts.shape == (5, 3)
    assert np.max(np.abs(s.solve_hamiltonians(pts) - H)) < 1e-8 * max(1.0, np.max(np.abs(H)))
    B, scale = s.involution_check(pts, H)
    assert B.max() / scale < 1e-7


def test_flows_agree():
    s = hitchin.System("GL", 2, COEFFS)
    H, pts = s.plant(7, 0.5)
    c = np.array([0.3, -0.2, 0, 0, 0], dtype=complex)
    a = s.flow_fiber(H, pts, c, t_end=0.1, dt=1e-3)
    b = s.flow_poisson(pts, c, t_end=0.1, dt=1e-3)
    assert len(a["times"]) == len(b["times"])
    assert hitchin.config_distance(a["states"][-1], b["states"][-1]) < 1e-8
    phi = s.angle_increment(H, a["states"][0], a["states"][-1])
    assert np.max(np.abs(phi - c * a["times"][-1])) < 1e-6


def test_discriminant():
    s = hitchin.System("GL", 2, COEFFS)
    H, _ = s.plant(7, 0.5)
    d = s.discriminant_count(H)
    assert d["zeros_on_cover"] == 8
    assert d["genus"] == 5


def test_jacobi_inversion():
    c = hitchin.Curve(COEFFS)
    xs = [2.3 + 0.7j, 4.1 - 0.4j]
    pts = [(x, np.sqrt(c.P(x))) for x in xs]
    rep = hitchin.jacobi_inversion(c, pts)
    assert rep["error"] < 1e-5


def test_parabolic():
    assert hitchin.dual_partition([3, 1]) == [2, 1, 1]
    assert hitchin.level_functions([2, 2]) == [1, 1, 2, 2]
    assert hitchin.parabolic_base_dims(2, 4, [[2, 2]])["dims"] == [2, 4, 6, 9]
    assert hitchin.delta_p(2, 4, [[1, 1, 1, 1]]) == 1
    rep = hitchin.newton_check([[0, 1], [0, 1], [0, 0, 1], [0, 0, 1]], [2, 2])
    assert rep["factor_degrees"] == [2, 2]
    assert rep["distinguished"]


def test_sl2_flow():
    z = [0, 1, 2.5, -1.3 + 0.4j, 0.7 - 1.1j, 3.2 + 0.9j]
    r = hitchin.sl2_lax_flow(5, z, 0.3 + 0.1j, 4, t_end=0.2)
    assert r["eigen_drift"] < 1e-6
    assert r["gp_drift"] < 1e-6


def test_errors_map_to_exceptions():
    with pytest.raises(hitchin.ValidationError):
        hitchin.Curve([0, 0, 0, 0, 0, 1])
    with pytest.raises(hitchin.ValidationError):
        hitchin.resolve_type("XY", 2)
    assert issubclass(hitchin.ValidationError, hitchin.Error)
