import numpy as np
import pytest
from hypothesis import given, strategies as st

from sichain import models
from sichain.monotone import (
    Verdict,
    cm_certify,
    conv_powers,
    eps_max,
    g_series,
    ind_chain,
    laplace_check,
    tm_certify,
    tm_coeffs,
    tm_rescale,
)
from sichain.ratfun import Poly, RatFun, g_values, partial_fractions

GALLERY_VERDICTS = {
    "robot": ("Certified", "Certified"),
    "platoon_from_zeros(1,2,3)": ("Certified", "Certified"),
    "platoon_pair(1,1,1)": ("Certified", "RefutedAtTestedEps"),
    "platoon_pair(2,1,1)": ("Certified", "Certified"),
    "platoon_pair(0.5,1,1)": ("Refuted", "RefutedAtTestedEps"),
    "cascade(1,2)": ("Certified", "Certified"),
}


@pytest.mark.parametrize("name", sorted(GALLERY_VERDICTS))
def test_gallery_verdicts(name):
    phi = models.gallery()[name].phi
    cm, tm = GALLERY_VERDICTS[name]
    assert cm_certify(phi).verdict.value == cm
    assert tm_certify(phi).verdict.value == tm


def test_cm_refutation_witness_is_negative():
    phi = models.platoon_pair(0.5, 1, 1).phi
    cert = cm_certify(phi)
    t, g = cert.witness
    assert g < 0
    assert g_values(partial_fractions(phi), t)[0][0].real == pytest.approx(g, rel=1e-9)


def test_tm_refutation_witness_is_negative_coefficient():
    phi = models.platoon_pair(1, 1, 1).phi
    eps, n, val = tm_certify(phi).witness
    assert val < 0
    assert tm_coeffs(phi, eps, n + 5).a[n] == pytest.approx(val, rel=1e-9)


def test_eps_max_values():
    assert eps_max([-1.0]) == pytest.approx(2.0)
    # -1 +- i: 2*1/2 = 1
    assert eps_max([-1 + 1j, -1 - 1j, -3.0]) == pytest.approx(min(1.0, 2 / 3))


def test_robot_coefficients_frozen():
    # phi(eps^-1(l-1)) for 1/(l+1) at eps = 1/2: a_n = 2^-(n+1)
    a = tm_coeffs(models.robot().phi, 0.5, 60).a
    assert np.allclose(a, 0.5 ** (np.arange(61) + 1), rtol=0, atol=1e-16)


def test_tail_bound_covers_truncation():
    phi = models.platoon_from_zeros(1, 2, 3).phi
    short = tm_coeffs(phi, 0.2, 100)
    long = tm_coeffs(phi, 0.2, 3000)
    # tail_sum is the summed remainder; tail_bound covers what lies beyond it
    assert short.tail_sum == pytest.approx(long.a[101:].sum() + long.tail_sum, rel=1e-9)
    assert short.tail_bound < 1e-15
    assert short.total == pytest.approx(1.0, abs=1e-12)


def test_g_series_reproduces_g():
    phi = models.platoon_from_zeros(1, 2, 3).phi
    eps = 0.2
    a = tm_coeffs(phi, eps, 4000).a
    t = np.array([0.5, 1.0, 3.0, 8.0])
    ref = g_values(partial_fractions(phi), t)[0].real
    assert np.allclose(g_series(a, eps, t), ref, rtol=1e-8, atol=1e-12)


def test_laplace_check_small():
    assert laplace_check(models.robot().phi, [0.5, 1.0, 2 + 1j]) < 1e-8


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_rescale_composes(b1, b2):
    a = tm_coeffs(models.platoon_pair(2, 1, 1).phi, 0.3, 80).a
    two_step = tm_rescale(tm_rescale(a, b1), b2)
    one_step = tm_rescale(a, b1 * b2)
    assert np.allclose(two_step, one_step, atol=1e-12)


@given(st.floats(0.05, 1.0))
def test_rescale_matches_direct(beta):
    phi = models.cascade(1.0, 2.0).phi
    eps = 0.5
    direct = tm_coeffs(phi, eps * beta, 120).a
    assert np.allclose(tm_rescale(tm_coeffs(phi, eps, 120).a, beta), direct, atol=1e-12)


@given(st.lists(st.floats(0.2, 5.0), min_size=1, max_size=4))
def test_products_of_first_order_lags_are_monotone(rates):
    # prod z/(l+z) is the Laplace transform of a convolution of exponentials
    phi = RatFun(Poly([float(np.prod(rates))]), Poly.from_roots([-z for z in rates]))
    assert cm_certify(phi).verdict == Verdict.CERTIFIED
    assert tm_certify(phi).verdict == Verdict.CERTIFIED


@given(st.integers(1, 5))
def test_conv_powers_mass(L):
    a = tm_coeffs(models.robot().phi, 0.5, 400).a
    tab = conv_powers(a, L, 400)
    assert tab[L].sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(tab >= 0)


def test_ind_chain_ordering():
    eps = tm_certify(models.platoon_from_zeros(1, 2, 3).phi).witness[0]
    a = tm_coeffs(models.platoon_from_zeros(1, 2, 3).phi, eps, 400).a
    lhs, mid = ind_chain(a, 120)
    assert np.all(lhs <= mid + 1e-12) and np.all(mid <= 1 + 1e-12)


def test_certificate_json():
    doc = tm_certify(models.robot().phi).to_json()
    assert doc["verdict"] == "Certified" and doc["kind"] == "TM"


@given(st.floats(0.2, 2.5), st.floats(0.3, 2.0), st.floats(0.2, 2.5))
def test_tm_implies_not_cm_refuted(a, b, c):
    phi = models.platoon_pair(a, b, c).phi
    if tm_certify(phi).verdict == Verdict.CERTIFIED:
        assert cm_certify(phi).verdict != Verdict.REFUTED


@given(st.lists(st.sampled_from([0.5, 1.0, 2.0, 3.0]), min_size=1, max_size=3))
def test_cm_certified_has_growth_two(rates):
    from sichain.spectra import growth_param

    phi = RatFun(Poly([float(np.prod(rates))]), Poly.from_roots([-z for z in rates]))
    assert cm_certify(phi).verdict == Verdict.CERTIFIED
    assert growth_param(phi) == 2


@pytest.mark.parametrize("name", ["robot", "platoon_from_zeros(1,2,3)", "platoon_pair(2,1,1)", "cascade(1,2)"])
def test_sum_identities(name):
    phi = models.gallery()[name].phi
    eps = tm_certify(phi).witness[0]
    c = tm_coeffs(phi, eps, 3000)
    assert c.total == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.cumsum(c.a) <= 1.0 + 1e-9)
    tab = conv_powers(c.a, 3, 3000)
    for L in (2, 3):
        assert tab[L].sum() == pytest.approx(1.0, abs=1e-8)
