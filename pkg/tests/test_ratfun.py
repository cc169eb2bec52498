import numpy as np
import pytest
from hypothesis import given, strategies as st

from sichain.errors import NearPole
from sichain.ratfun import (
    EXP_FLUSH,
    Poly,
    RatFun,
    g_values,
    inverse_laplace_eval,
    partial_fractions,
    poly_roots,
    rat_derivs_at_zero,
    rat_reduce,
    rat_taylor_at_zero,
    series_divide,
)

finite = st.floats(-3, 3, allow_nan=False)


def test_multiple_roots_are_merged():
    roots = poly_roots(Poly.from_roots([1, 1, 1, -2]))
    assert [m for _, m in roots] == [1, 3]
    assert abs(roots[0][0] + 2) < 1e-12 and abs(roots[1][0] - 1) < 1e-8


def test_conjugate_pair_roots():
    roots = poly_roots(Poly([2.0, 2.0, 1.0]))  # l^2 + 2l + 2
    vals = sorted((z for z, _ in roots), key=lambda z: z.imag)
    assert np.allclose(vals, [-1 - 1j, -1 + 1j], atol=1e-14)


def test_partial_fractions_known_expansion():
    # 1/((l+1)^2 (l+2)) = 1/(l+1)^2 - 1/(l+1) + 1/(l+2)
    pf = partial_fractions(RatFun(Poly([1.0]), Poly.from_roots([-1, -1, -2])))
    got = {(round(xi.real, 8), k): A for xi, k, A in pf.terms}
    assert got[(-1.0, 2)] == pytest.approx(1.0, abs=1e-12)
    assert got[(-1.0, 1)] == pytest.approx(-1.0, abs=1e-12)
    assert got[(-2.0, 1)] == pytest.approx(1.0, abs=1e-12)


def test_inverse_laplace_closed_form():
    pf = partial_fractions(RatFun(Poly([1.0]), Poly.from_roots([-1, -1, -2])))
    t = np.linspace(0.05, 20, 81)
    ref = t * np.exp(-t) - np.exp(-t) + np.exp(-2 * t)
    vals, flushed = g_values(pf, t)
    assert np.max(np.abs(vals - ref)) < 1e-13
    assert not flushed.any()
    assert inverse_laplace_eval(pf, 1.0) == pytest.approx(np.exp(-1) - np.exp(-1) + np.exp(-2))


def test_nonpositive_t_rejected():
    pf = partial_fractions(RatFun(Poly([1.0]), Poly([1.0, 1.0])))
    with pytest.raises(ValueError):
        g_values(pf, [0.0])


def test_flush_flag_marks_underflow():
    pf = partial_fractions(RatFun(Poly([1.0]), Poly([1.0, 1.0])))
    vals, flushed = g_values(pf, [1.0, -EXP_FLUSH + 50])
    assert not flushed[0] and flushed[1] and vals[1] == 0.0


def test_reduce_cancels_common_factor():
    r = RatFun(Poly.from_roots([-1, -3]), Poly.from_roots([-1, -2, -4]))
    red = rat_reduce(r)
    assert red.den.degree == 2 and red.num.degree == 1
    lam = np.array([0.3, 1 + 2j, -5.0])
    assert np.allclose(red(lam), r(lam), rtol=1e-12)


def test_derivatives_at_zero():
    d = rat_derivs_at_zero(RatFun(Poly([1.0]), Poly([1.0, 1.0])), 6)
    ref = [(-1) ** k * np.prod(np.arange(1, k + 1)) for k in range(7)]
    assert np.allclose(d, ref, rtol=1e-14)


def test_taylor_at_pole_raises():
    with pytest.raises(NearPole):
        rat_taylor_at_zero(RatFun(Poly([1.0]), Poly([0.0, 1.0])), 3)


@given(st.lists(finite, min_size=1, max_size=5), st.lists(finite, min_size=1, max_size=5))
def test_series_divide_inverts_multiplication(num, den):
    den[0] = 1.0 + abs(den[0])
    K = 8
    c = series_divide(np.array(num), np.array(den), K)
    back = np.convolve(c, den)[: K + 1]
    ref = np.concatenate([num, np.zeros(K + 1)])[: K + 1]
    assert np.allclose(back, ref, atol=1e-9 * (1 + np.max(np.abs(c))))


@given(
    st.lists(st.floats(0.2, 4.0), min_size=1, max_size=3, unique=True),
    st.lists(st.floats(0.2, 4.0), min_size=0, max_size=2),
    st.lists(finite, min_size=1, max_size=3),
)
def test_partial_fractions_reconstruct(real_rates, pair_re, num):
    roots = [-r for r in real_rates]
    for a in pair_re:
        roots += [complex(-a, 1.3), complex(-a, -1.3)]
    den = Poly.from_roots(roots)
    num = num[: den.degree]
    if not np.any(num):
        num = [1.0]
    r = rat_reduce(RatFun(Poly(num), den))
    pf = partial_fractions(r)
    lam = np.array([0.7, 2 + 1j, -0.1 + 3j, 5.0])
    assert np.allclose(pf(lam), r(lam), rtol=1e-7, atol=1e-9)


@given(st.lists(st.sampled_from([0.3, 0.5, 1.0, 2.0, 3.0, 5.0]), min_size=1, max_size=4))
def test_g_matches_numerical_laplace(rates):
    # product of z/(l+z): int_0^inf g(t) e^{-l t} dt = r(l)
    from scipy.integrate import quad

    r = RatFun(Poly([float(np.prod(rates))]), Poly.from_roots([-z for z in rates]))
    pf = partial_fractions(rat_reduce(r))
    lam = 0.5
    val, _ = quad(lambda t: g_values(pf, t)[0][0].real * np.exp(-lam * t), 0, np.inf, limit=200)
    assert val == pytest.approx(r(lam).real, rel=1e-6, abs=1e-9)


# well-separated root grid keeps conditioning honest at the stated tolerances
_ROOT_GRID = st.sampled_from([-3.0, -2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 2.5, complex(-1, 1), complex(-0.5, 2)])


@given(st.lists(_ROOT_GRID, min_size=1, max_size=8))
def test_roots_rebuild_coefficients(roots):
    roots = roots + [np.conj(z) for z in roots if isinstance(z, complex)]
    roots = roots[:8]
    p = Poly.from_roots(roots)
    back = Poly.from_roots([z for z, m in poly_roots(p) for _ in range(m)])
    assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-8 * np.max(np.abs(p.coeffs))


@given(st.lists(st.sampled_from([-0.5, -1.0, -2.0, -3.5, -5.0]), min_size=1, max_size=5, unique=True),
       st.lists(finite, min_size=1, max_size=4), st.integers(0, 2**16))
def test_partial_fractions_residual_random_points(poles, num, seed):
    den = Poly.from_roots(poles)
    num = num[: den.degree] if np.any(num[: den.degree]) else [1.0]
    r = rat_reduce(RatFun(Poly(num), den))
    pf = partial_fractions(r)
    z = np.random.default_rng(seed).normal(size=20) * 3 + 1j * np.random.default_rng(seed + 1).normal(size=20) * 3
    z = z[np.min(np.abs(z[:, None] - np.array(poles)[None]), axis=1) > 0.3]
    ref = r(z)
    assert np.all(np.abs(pf(z) - ref) <= 1e-9 * np.maximum(np.abs(ref), 1e-3))


@given(st.lists(st.sampled_from([0.5, 1.0, 2.0, 3.0]), min_size=1, max_size=4), st.floats(0.01, 30))
def test_inverse_laplace_real_for_real_input(rates, t):
    r = RatFun(Poly([1.0, 0.3]), Poly.from_roots([-z for z in rates] + [complex(-1, 2), complex(-1, -2)]))
    r = RatFun(Poly(r.num.coeffs.real), Poly(r.den.coeffs.real))
    v = inverse_laplace_eval(partial_fractions(rat_reduce(r)), t)
    assert abs(np.imag(v)) <= 1e-12 * max(abs(v), 1e-300) or abs(np.imag(v)) < 1e-15


@given(st.lists(finite, min_size=1, max_size=4), st.lists(st.floats(0.2, 3), min_size=1, max_size=4))
def test_derivative_zero_matches_value_and_reduce_idempotent(num, rates):
    num = num[: len(rates)]
    r = RatFun(Poly(num if np.any(num) else [1.0]), Poly.from_roots([-z for z in rates]))
    assert rat_derivs_at_zero(r, 3)[0] == pytest.approx(complex(r(0.0)), abs=1e-14, rel=1e-14)
    once = rat_reduce(r)
    twice = rat_reduce(once)
    assert np.array_equal(once.num.coeffs, twice.num.coeffs) and np.array_equal(once.den.coeffs, twice.den.coeffs)


def test_reduce_keeps_scale_of_non_monic_denominator():
    r = RatFun(Poly(3 * Poly.from_roots([-1, -3]).coeffs), Poly(2 * Poly.from_roots([-1, -2, -4]).coeffs))
    red = rat_reduce(r)
    lam = np.array([0.3, 1 + 2j, -5.0])
    assert red.den.degree == 2
    assert np.allclose(red(lam), r(lam), rtol=1e-12)
