import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sichain.charfun import SystemPair, adjugate_polynomial, extract_phi, verify_char
from sichain.errors import NoCharacteristicFunction, ZeroA1


def test_robot_phi():
    s = SystemPair.from_matrices([[-1.0]], [[1.0]])
    lam = np.array([0.0, 1.0, 2j])
    assert np.allclose(s.phi(lam), 1 / (lam + 1))


def test_platoon_phi_is_alpha0_over_p0():
    a0, a1, a2 = 6.0, 11.0, 6.0
    A0 = [[0, 1, 0], [0, 0, 1], [-a0, -a1, -a2]]
    A1 = np.zeros((3, 3))
    A1[0, 1] = -1
    s = SystemPair.from_matrices(A0, A1)
    lam = np.array([0.3, 1 + 1j, -4.0])
    assert np.allclose(s.phi(lam), a0 / (lam**3 + a2 * lam**2 + a1 * lam + a0), rtol=1e-12)
    assert verify_char(s) < 1e-12


def test_zero_coupling_rejected():
    with pytest.raises(ZeroA1):
        extract_phi(np.eye(2), np.zeros((2, 2)))


def test_non_admissible_coupling_rejected():
    with pytest.raises(NoCharacteristicFunction):
        SystemPair.from_matrices([[-1.0, 0], [0, -2.0]], np.eye(2))


@given(arrays(float, (4, 4), elements=st.floats(-2, 2)))
def test_adjugate_polynomial_matches_inverse(A0):
    coeffs, p0 = adjugate_polynomial(A0)
    assert np.allclose(p0.coeffs[::-1], np.poly(A0), atol=1e-8 * (1 + np.abs(np.poly(A0)).max()))
    lam = 3.7 + 0.4j
    M = lam * np.eye(4) - A0
    adj = sum(c * lam**k for k, c in enumerate(coeffs))
    assert np.allclose(M @ adj, p0(lam) * np.eye(4), atol=1e-7 * abs(p0(lam)) + 1e-9)


@given(
    arrays(float, (3, 3), elements=st.floats(-2, 2)),
    arrays(float, 3, elements=st.floats(-1, 1)),
    arrays(float, 3, elements=st.floats(-1, 1)),
)
def test_rank_one_coupling_gives_bilinear_form(A0, u, v):
    # A1 = u v^T  =>  phi(l) = v^T R(l, A0) u
    if np.linalg.norm(u) < 0.1 or np.linalg.norm(v) < 0.1:
        return
    A1 = np.outer(u, v)
    phi = extract_phi(A0, A1)
    lam = 6.0 + 1.0j
    ref = v @ np.linalg.solve(lam * np.eye(3) - A0, u)
    assert phi(lam) == pytest.approx(ref, rel=1e-8, abs=1e-10)


@given(arrays(float, (3, 3), elements=st.floats(-1, 1)))
def test_phi_invariant_under_similarity(S):
    S = S + 3 * np.eye(3)
    base = SystemPair.from_matrices(
        [[0, 1, 0], [0, 0, 1], [-6, -11, -6]], [[0, -1, 0], [0, 0, 0], [0, 0, 0]]
    )
    Si = np.linalg.inv(S)
    moved = SystemPair.from_matrices(S @ base.A0.real @ Si, S @ base.A1.real @ Si)
    lam = np.array([0.5, 2j, -0.5 + 1j])
    assert np.allclose(moved.phi(lam), base.phi(lam), rtol=1e-7)


def test_gallery_extraction_loop_and_structure():
    from sichain import models
    from sichain.ratfun import rat_derivs_at_zero

    for s in models.gallery().values():
        assert verify_char(s) <= 1e-8
        assert s.phi.num.degree < s.phi.den.degree <= s.m
        A0i = np.linalg.inv(s.A0)
        lhs = -s.A1 @ A0i @ A0i @ s.A1
        d1 = rat_derivs_at_zero(s.phi, 1)[1]
        assert np.linalg.norm(lhs - d1 * s.A1) <= 1e-9 * np.linalg.norm(lhs) + 1e-12


@given(arrays(float, (3, 3), elements=st.floats(-1, 1)), arrays(float, 3, elements=st.floats(-1, 1)),
       arrays(float, 3, elements=st.floats(-1, 1)))
def test_rank_one_with_hurwitz_A0_always_extracts(B, u, v):
    if np.linalg.norm(u) < 0.1 or np.linalg.norm(v) < 0.1:
        return
    A0 = B - (np.max(np.linalg.eigvals(B).real) + 0.5) * np.eye(3)
    s = SystemPair.from_matrices(A0, np.outer(u, v))
    assert verify_char(s) <= 1e-8
