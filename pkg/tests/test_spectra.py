import numpy as np
import pytest
from hypothesis import given, strategies as st

from sichain import models
from sichain.ratfun import Poly, RatFun, rat_derivs_at_zero
from sichain.spectra import (
    RATE_NONE,
    RATE_SHARP,
    circulant_matrix,
    circulant_resolvent_apply,
    circulant_spectrum,
    growth_param,
    h_taylor,
    hypothesis_check,
    omega_contour,
    onesided_matrix,
    resolvent_bracket,
    resolvent_norm_twosided,
    roots_of_unity,
    set_distance,
)

GALLERY = models.gallery()
NAMES = sorted(GALLERY)


def test_h2_formula():
    phi = models.platoon_pair(2, 1, 1).phi
    d = rat_derivs_at_zero(phi, 2)
    h = h_taylor(phi, 4)
    assert h[2] == pytest.approx((d[2] - d[1] ** 2).real, rel=1e-12)
    assert abs(h[1]) < 1e-14 and abs(h[3]) < 1e-12


def test_growth_parameter_values():
    assert growth_param(models.robot().phi) == 2
    assert growth_param(RatFun(Poly([2.0]), Poly([2.0, 2.0, 1.0]))) == 4


def test_hypothesis_reports():
    rep = hypothesis_check(GALLERY["robot"])
    assert rep.hurwitz and rep.omega_ok and rep.n_phi == 2 and rep.predicted_rate == RATE_SHARP
    bad = hypothesis_check(models.platoon_from_zeros(1, 2, 3, literal_sign=True))
    assert not bad.hurwitz and bad.predicted_rate == RATE_NONE
    neg = hypothesis_check(GALLERY["platoon_pair(0.5,1,1)"])
    assert neg.predicted_rate == RATE_NONE
    assert rep.to_json()["predicted_rate"] == RATE_SHARP


def test_robot_circulant_spectrum_is_shifted_roots():
    for N in (2, 5, 64):
        vals, _ = circulant_spectrum(GALLERY["robot"], N)
        assert set_distance(vals, roots_of_unity(N) - 1) < 1e-14


@given(st.sampled_from(NAMES), st.integers(2, 24))
def test_circulant_spectrum_matches_dense_and_level_set(name, N):
    s = GALLERY[name]
    vals, tags = circulant_spectrum(s, N)
    assert len(vals) == N * s.m and len(tags) == len(vals)
    assert set_distance(vals, np.linalg.eigvals(circulant_matrix(s, N))) < 1e-8
    assert np.max(np.abs(s.phi(vals) ** N - 1)) < 1e-8


@given(st.sampled_from(NAMES), st.integers(2, 12), st.complex_numbers(max_magnitude=3))
def test_circulant_resolvent_closed_form(name, N, lam):
    s = GALLERY[name]
    poles = [z for z, _ in s.phi.poles()]
    if min(abs(lam - z) for z in poles) < 0.2 or abs(1 - complex(s.phi(lam)) ** N) < 1e-2:
        return
    x = np.arange(N * s.m, dtype=float).reshape(N, s.m) + 1j
    ref = np.linalg.solve(lam * np.eye(N * s.m) - circulant_matrix(s, N), x.ravel())
    got = circulant_resolvent_apply(s, lam, x).ravel()
    assert np.linalg.norm(got - ref) <= 1e-8 * np.linalg.norm(ref)


def test_onesided_matrix_structure():
    s = GALLERY["robot"]
    A = onesided_matrix(s, 4)
    assert np.allclose(A, -np.eye(4) + np.eye(4, k=-1))
    C = circulant_matrix(s, 4)
    assert C[0, 3] == 1 and np.allclose(C - A, np.eye(4, k=3))


def test_robot_resolvent_on_axis():
    # |R(is)| = 1/(sqrt(1+s^2) - 1) for the robot chain
    s = GALLERY["robot"]
    for x in (0.05, 0.3, 2.0):
        got = resolvent_norm_twosided(s, 1j * x)
        assert got == pytest.approx(1 / (np.sqrt(1 + x * x) - 1), rel=1e-6)


@given(st.floats(-0.5, 3), st.floats(-3, 3))
def test_resolvent_bracket(re, im):
    s = GALLERY["platoon_pair(2,1,1)"]
    lam = complex(re, im)
    poles = [z for z, _ in s.phi.poles()]
    if min(abs(lam - z) for z in poles) < 0.2 or abs(s.phi(lam)) >= 0.98:
        return
    b = resolvent_bracket(s, lam)
    assert abs(b["norm"] - b["centre"]) <= b["radius"] * (1 + 1e-9)


def test_contour_vertices_on_level_set():
    phi = GALLERY["platoon_from_zeros(1,2,3)"].phi
    cs = omega_contour(phi, resolution=(200, 200))
    v = cs.vertices
    assert len(v) > 50
    assert np.max(np.abs(np.abs(phi(v)) - 1)) < 1e-9
    # contour passes through the origin region (phi(0) = 1)
    assert np.min(np.abs(v)) < 0.05


def test_set_distance_symmetric():
    a = np.array([0, 1, 2j])
    b = np.array([0.1, 1, 2j])
    assert set_distance(a, b) == set_distance(b, a) == pytest.approx(0.1)


@pytest.mark.parametrize("N", [33, 48, 64])
def test_circulant_level_set_large_N(N):
    for s in GALLERY.values():
        vals, _ = circulant_spectrum(s, N)
        assert np.max(np.abs(s.phi(vals) ** N - 1)) < 1e-8


def test_growth_param_even_for_passing_systems():
    for s in GALLERY.values():
        rep = hypothesis_check(s)
        if rep.hurwitz and rep.omega_ok:
            assert rep.n_phi is not None and rep.n_phi % 2 == 0


def test_contour_refinement_is_stable():
    phi = GALLERY["platoon_pair(1,1,1)"].phi
    coarse = omega_contour(phi, resolution=(150, 150)).vertices
    fine = omega_contour(phi, resolution=(300, 300)).vertices
    # every coarse vertex lies on the curve traced by the finer grid
    d = np.min(np.abs(coarse[:, None] - fine[None, :]), axis=1)
    assert np.max(d) <= 2e-3 + 2 * (fine.real.max() - fine.real.min()) / 300


def test_robot_resolvent_tracks_level_gap():
    s = GALLERY["robot"]
    for x in np.logspace(-3, -1, 7):
        gap = 1 - abs(s.phi(1j * x))
        ratio = resolvent_norm_twosided(s, 1j * x) * gap
        assert 0.5 <= ratio <= 2.0
