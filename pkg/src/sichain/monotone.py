"""Complete and total monotonicity certificates for rational characteristic functions.

Complete monotonicity is decided through the inverse Laplace transform g of
phi (an exponential polynomial): dense sampling with local refinement in the
interior, and analytic sign of the leading terms as t -> 0+ and t -> oo.

Total monotonicity is decided through the coefficients a_{eps,n} of
psi_eps(z) = phi((z - 1)/eps) = sum_n a_{eps,n} z^-(n+1), which are again an
exponential polynomial in n with bases 1 + eps*xi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import ceil, factorial, log

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import EpsTooLarge, NonRealOnAxis, PoleInRightHalfPlane
from .ratfun import PartialFractions, RatFun, g_values, partial_fractions

REFUTE_TOL = 1e-10
CERTIFY_TOL = 1e-12
SEARCH_CAP = 2_000_000
NOISE_ULPS = 64


class Verdict(str, Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    REFUTED_AT_TESTED_EPS = "RefutedAtTestedEps"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class MonotoneCertificate:
    kind: str  # "CM" or "TM"
    verdict: Verdict
    witness: tuple | None = None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else [float(x) for x in self.witness],
            "evidence": _jsonable(self.evidence),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Enum):
        return x.value
    return x


def _check_stable(poles) -> None:
    for xi in poles:
        if xi.real >= 0:
            raise PoleInRightHalfPlane(f"pole {xi} is not in the open left half-plane")


def eps_max(poles) -> float:
    """Supremum of eps with |eps*xi + 1| < 1 for every pole xi."""
    poles = [complex(p) for p in poles]
    if not poles:
        return np.inf
    _check_stable(poles)
    return min(-2.0 * p.real / abs(p) ** 2 for p in poles)


# ---------------------------------------------------------------------------
# complete monotonicity


def _small_t_leading(phi: RatFun) -> tuple[int, complex]:
    # phi(l) = sum_r g^(r)(0) l^-(r+1); first term is lead(num) / l^(deg den - deg num)
    return phi.den.degree - phi.num.degree - 1, phi.num.lead


def _large_t_dominant(pf: PartialFractions) -> dict:
    sigma = max(xi.real for xi, _, a in pf.terms if a != 0)
    group = [(xi, k, a) for xi, k, a in pf.terms if a != 0 and abs(xi.real - sigma) <= 1e-12 * (1 + abs(sigma))]
    K = max(k for _, k, _ in group)
    top = [(xi, a / factorial(K - 1)) for xi, k, a in group if k == K]
    c0 = sum(a.real for xi, a in top if xi.imag == 0)
    osc = sum(2 * abs(a) for xi, a in top if xi.imag > 0)
    whole = len(group) == sum(1 for _, _, a in pf.terms if a != 0) and all(k == K for _, k, _ in group)
    return {"sigma": sigma, "order": K, "c0": c0, "oscillation": osc, "group_is_everything": whole}


def cm_certify(phi: RatFun, t_min: float = 1e-3, t_max: float = 1e3, points_per_decade: int = 200) -> MonotoneCertificate:
    """Certify or refute g >= 0 where phi is the Laplace transform of g."""
    pf = partial_fractions(phi)
    _check_stable(pf.poles)
    if not pf.terms:
        return MonotoneCertificate("CM", Verdict.CERTIFIED, evidence={"note": "phi == 0"})
    ndec = np.log10(t_max / t_min)
    ts = np.logspace(np.log10(t_min), np.log10(t_max), int(round(ndec * points_per_decade)) + 1)

    if pf.real:
        gfun = lambda t: g_values(pf, t)[0]  # noqa: E731
    else:
        cplx = PartialFractions(terms=pf.terms, real=False)
        vals, _ = g_values(cplx, ts)
        if np.max(np.abs(vals.imag)) > 1e-10 * np.max(np.abs(vals)):
            raise NonRealOnAxis("phi is not real on the positive axis")
        gfun = lambda t: g_values(cplx, t)[0].real  # noqa: E731

    g = gfun(ts)
    gmax = float(np.max(np.abs(g)))
    i_min = int(np.argmin(g))
    tmin, gmin = float(ts[i_min]), float(g[i_min])
    # refine every interior local minimum
    idx = np.flatnonzero((g[1:-1] <= g[:-2]) & (g[1:-1] <= g[2:])) + 1
    for i in idx:
        res = optimize.minimize_scalar(
            lambda t: float(gfun(t)[0]),
            bounds=(ts[i - 1], ts[i + 1]),
            method="bounded",
            options={"xatol": 1e-12 * ts[i]},
        )
        if res.fun < gmin:
            gmin, tmin = float(res.fun), float(res.x)

    order, lead = _small_t_leading(phi)
    dom = _large_t_dominant(pf)
    small_ok = lead.real > 0 and abs(lead.imag) <= 1e-12 * abs(lead)
    margin = dom["c0"] - dom["oscillation"]
    large_ok = margin > 1e-12 * max(dom["c0"], 1e-300) or (
        margin >= -1e-9 * max(dom["c0"], 1e-300) and dom["c0"] > 0 and dom["group_is_everything"]
    )
    evidence = {
        "grid": {"t_min": t_min, "t_max": t_max, "points_per_decade": points_per_decade},
        "g_min": gmin,
        "t_at_min": tmin,
        "g_absmax": gmax,
        "small_t": {"order": order, "coefficient": lead, "positive": small_ok},
        "large_t": {**dom, "positive": large_ok},
    }
    if gmin < -REFUTE_TOL * gmax:
        return MonotoneCertificate("CM", Verdict.REFUTED, witness=(tmin, gmin), evidence=evidence)
    if gmin >= -CERTIFY_TOL * gmax and small_ok and large_ok:
        return MonotoneCertificate("CM", Verdict.CERTIFIED, evidence=evidence)
    return MonotoneCertificate("CM", Verdict.INCONCLUSIVE, evidence=evidence)


# ---------------------------------------------------------------------------
# total monotonicity


@dataclass(frozen=True, eq=False)
class TMCoefficients:
    eps: float
    a: np.ndarray
    tail_base: complex
    tail_dominant_real: bool
    n_star: int | None
    tail_sum: float
    tail_bound: float
    imag_max: float = 0.0

    @property
    def total(self) -> float:
        """Partial sum plus the separately summed tail."""
        return float(np.sum(self.a) + self.tail_sum)


def _tm_terms(pf: PartialFractions, eps: float):
    return [(1.0 + eps * xi, k, a * eps**k) for xi, k, a in pf.terms if a != 0]


def _eval_terms(terms, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n)
    out = np.zeros(n.shape, dtype=complex)
    for beta, k, c in terms:
        e = n - k + 1
        ok = e >= 0
        with np.errstate(under="ignore", divide="ignore", invalid="ignore"):
            if beta == 0:
                pw = np.where(e == 0, 1.0, 0.0)
            else:
                pw = np.exp(np.where(ok, e, 0) * np.log(complex(beta)))
            val = c * special.comb(n, k - 1) * pw
        out += np.where(ok, val, 0.0)
    return out


def _noise(terms, n) -> np.ndarray:
    """Roundoff floor of a_n: a few ulps of the sum of term magnitudes."""
    mags = [(abs(b), k, abs(c)) for b, k, c in terms]
    return NOISE_ULPS * np.finfo(float).eps * _eval_terms(mags, np.asarray(n)).real


def _crossover(terms, dom_idx: list[int], factor: float = 1.0) -> int | None:
    """Smallest n beyond which the dominant terms exceed ``factor`` times all others.

    Every ratio other/dominant is non-increasing past the returned index, so the
    bound holds for all larger n too.
    """
    R = abs(terms[dom_idx[0]][0])
    K = max(terms[i][1] for i in dom_idx)
    amp = sum(abs(terms[i][2]) for i in dom_idx if terms[i][1] == K)
    if amp == 0:
        return None
    others = [t for i, t in enumerate(terms) if not (i in dom_idx and t[1] == K)]
    if not others:
        return K - 1
    n0 = K - 1
    for beta, k, c in others:
        q = abs(beta) / R
        if q >= 1.0 and k >= K:
            return None
        if k > K:
            n0 = max(n0, int(ceil((k - 2 + q * (2 - K)) / (1 - q))))
    logR = log(R)
    start = n0
    while start < SEARCH_CAP:
        n = np.arange(start, min(start + 100_000, SEARCH_CAP), dtype=float)
        s = np.zeros_like(n)
        base_log = np.log(amp) + special.gammaln(n + 1) - special.gammaln(K) - special.gammaln(n - K + 2) + (n - K + 1) * logR
        for beta, k, c in others:
            if c == 0 or beta == 0:
                continue
            e = n - k + 1
            lg = np.log(abs(c)) + special.gammaln(n + 1) - special.gammaln(k) - special.gammaln(np.maximum(n - k + 2, 1)) + e * log(abs(beta))
            s += np.where(e >= 0, np.exp(np.minimum(lg - base_log, 700)), 0.0)
        hit = np.flatnonzero(s * factor < 1.0)
        if hit.size:
            return int(n[hit[0]])
        start += 100_000
    return None


def _dominance(terms):
    """Index list of the dominant (max-modulus) base group, plus whether it is real positive."""
    if all(b == 0 for b, _, _ in terms):
        return [], True
    R = max(abs(b) for b, _, _ in terms)
    dom = [i for i, (b, _, _) in enumerate(terms) if abs(b) >= R * (1 - 1e-12)]
    bases = {terms[i][0] for i in dom}
    real_pos = len(bases) == 1 and all(
        abs(terms[i][0].imag) <= 1e-14 * R and terms[i][0].real > 0 for i in dom
    )
    if real_pos:
        K = max(terms[i][1] for i in dom)
        top = sum(terms[i][2] for i in dom if terms[i][1] == K)
        real_pos = top.real > 0
    return dom, real_pos


def _tail(terms, N: int) -> tuple[float, float]:
    """Signed sum of a_n over n > N, and a bound on the remainder beyond what was summed."""
    if all(b == 0 for b, _, _ in terms):
        return 0.0, 0.0
    R = max(abs(b) for b, _, _ in terms)
    if R == 0:
        return 0.0, 0.0
    kmax = max(k for _, k, _ in terms)
    total, n = 0.0, N + 1
    while True:
        chunk = np.arange(n, n + 50_000)
        total += float(np.sum(_eval_terms(terms, chunk)).real)
        n += 50_000
        # geometric bound of the rest: sum |c| C(n,k-1) R^(n-k+1) / (1 - R)^k
        rest = sum(abs(c) * special.comb(n, k - 1) * R ** max(n - k + 1, 0) for _, k, c in terms) / (1 - R) ** kmax
        if rest < 1e-16 or n > SEARCH_CAP:
            return total, float(rest)


def tm_coeffs(phi: RatFun, eps: float, N: int = 400, pf: PartialFractions | None = None) -> TMCoefficients:
    """a_{eps,n}, n = 0..N, from the partial fractions of phi, with tail metadata."""
    pf = pf or partial_fractions(phi)
    em = eps_max(pf.poles)
    if not 0 < eps < em:
        raise EpsTooLarge(f"eps={eps} outside (0, {em})")
    terms = _tm_terms(pf, eps)
    n = np.arange(N + 1)
    vals = _eval_terms(terms, n)
    # relative degree d forces a_0 .. a_{d-2} = 0; partial fractions only reach them up to cancellation
    vals[: max(phi.den.degree - phi.num.degree - 1, 0)] = 0.0
    scale = sum(abs(c) for _, _, c in terms) or 1.0
    imag_max = float(np.max(np.abs(vals.imag)) / scale)
    if pf.real and imag_max > 1e-10:
        raise NonRealOnAxis(f"coefficients have imaginary part {imag_max:.2e}")
    dom, real_pos = _dominance(terms)
    if not dom:
        base, n_star = 0j, max(k for _, k, _ in terms) if terms else 0
    else:
        base = terms[dom[0]][0]
        n_star = _crossover(terms, dom) if real_pos else None
    tsum, tbound = _tail(terms, N)
    return TMCoefficients(
        eps=eps,
        a=vals.real.copy(),
        tail_base=complex(base),
        tail_dominant_real=bool(real_pos),
        n_star=n_star,
        tail_sum=tsum,
        tail_bound=tbound,
        imag_max=imag_max,
    )


def default_eps_grid(poles) -> list[float]:
    em = eps_max(poles)
    return [em * 2.0**-k for k in range(1, 9)]


def tm_certify(phi: RatFun, eps_grid=None, N: int = 400) -> MonotoneCertificate:
    """Scan eps downward looking for a non-negative coefficient sequence.

    A scan can certify (finite check plus a dominated tail) but never refute
    total monotonicity outright: the definition quantifies over all eps.
    """
    pf = partial_fractions(phi)
    _check_stable(pf.poles)
    grid = sorted(eps_grid or default_eps_grid(pf.poles), reverse=True)
    runs = []
    witnesses = []
    for eps in grid:
        c = tm_coeffs(phi, eps, N, pf=pf)
        terms = _tm_terms(pf, eps)
        a = c.a
        scale = float(np.max(np.abs(a))) or 1.0
        run = {"eps": eps, "n_star": c.n_star, "tail_base": c.tail_base, "tail_dominant_real": c.tail_dominant_real}
        noise = _noise(terms, np.arange(len(a)))
        i = _most_negative(a, REFUTE_TOL * scale, noise)
        if i is not None:
            witnesses.append((eps, i, float(a[i])))
            runs.append({**run, "outcome": "negative", "n": i, "a_n": float(a[i])})
            continue
        if c.tail_dominant_real and c.n_star is not None:
            if c.n_star > N:
                a = np.concatenate([a, _eval_terms(terms, np.arange(N + 1, c.n_star + 1)).real])
                scale = float(np.max(np.abs(a))) or 1.0
                noise = _noise(terms, np.arange(len(a)))
            i = _most_negative(a, REFUTE_TOL * scale, noise)
            if i is not None:
                witnesses.append((eps, i, float(a[i])))
                runs.append({**run, "outcome": "negative", "n": i, "a_n": float(a[i])})
                continue
            if _most_negative(a, CERTIFY_TOL * scale, noise) is None:
                runs.append({**run, "outcome": "certified", "checked_to": max(N, c.n_star), "min_a": float(a.min())})
                return MonotoneCertificate(
                    "TM", Verdict.CERTIFIED, witness=(eps,), evidence={"eps_grid": grid, "runs": runs, "N": N}
                )
            runs.append({**run, "outcome": "undecided"})
            continue
        w = _search_negative(terms, scale)
        if w is not None:
            witnesses.append((eps, w[0], w[1]))
            runs.append({**run, "outcome": "negative", "n": w[0], "a_n": w[1]})
        else:
            runs.append({**run, "outcome": "undecided"})
    evidence = {"eps_grid": grid, "runs": runs, "N": N}
    if len(witnesses) == len(grid):
        best = min(witnesses, key=lambda w: w[2])
        return MonotoneCertificate("TM", Verdict.REFUTED_AT_TESTED_EPS, witness=best, evidence=evidence)
    return MonotoneCertificate("TM", Verdict.INCONCLUSIVE, evidence=evidence)


def _most_negative(a, tol: float, noise) -> int | None:
    """Index of the most negative a_n below -max(tol, noise_n), or None."""
    bad = a < -np.maximum(tol, noise)
    if not bad.any():
        return None
    idx = np.flatnonzero(bad)
    return int(idx[np.argmin(a[idx])])


def _search_negative(terms, scale: float):
    """Find n with a_n < -tol*scale when an oscillating base dominates the tail."""
    dom, real_pos = _dominance(terms)
    if not dom or real_pos:
        return None
    n_half = _crossover(terms, dom, factor=2.0)
    if n_half is None:
        n_half = 0
    theta = max(abs(np.angle(terms[i][0])) for i in dom)
    period = 2 * np.pi / theta if theta > 0 else 2.0
    stop = int(min(SEARCH_CAP, n_half + 10 * ceil(period) + 50))
    start = 0
    while start <= stop:
        n = np.arange(start, min(start + 200_000, stop + 1))
        a = _eval_terms(terms, n).real
        hit = np.flatnonzero(a < -np.maximum(REFUTE_TOL * scale, _noise(terms, n)))
        if hit.size:
            j = hit[np.argmin(a[hit])] if hit.size < 64 else hit[0]
            return int(n[j]), float(a[j])
        start += 200_000
    return None


def tm_rescale(a, beta: float) -> np.ndarray:
    """b_n = sum_k a_k C(n,k) beta^(k+1) (1-beta)^(n-k): coefficients at eps*beta from those at eps."""
    a = np.asarray(a, dtype=float)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    n = np.arange(len(a))
    pmf = stats.binom.pmf(n[None, :], n[:, None], beta)  # [n, k]
    return beta * pmf @ a


def conv_powers(a, L: int, N: int) -> np.ndarray:
    """Table t[l, n] = a^(l)_n with a^(0) = delta and a^(l+1) = a * a^(l)."""
    a = np.zeros(N + 1) + np.concatenate([np.asarray(a, float), np.zeros(N + 1)])[: N + 1]
    tab = np.zeros((L + 1, N + 1))
    tab[0, 0] = 1.0
    for l in range(L):
        tab[l + 1] = np.convolve(a, tab[l])[: N + 1]
    return tab


def ind_chain(a, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """For n = 1..n_max: (sum_l a^(l+2)_{n-1-l}, sum_l a^(2)_{n-1-l})."""
    tab = conv_powers(a, n_max + 1, n_max - 1)
    lhs = np.zeros(n_max)
    mid = np.zeros(n_max)
    csum2 = np.cumsum(tab[2])
    for n in range(1, n_max + 1):
        l = np.arange(n)
        lhs[n - 1] = np.sum(tab[l + 2, n - 1 - l])
        mid[n - 1] = csum2[n - 1]
    return lhs, mid


def g_series(a, eps: float, t) -> np.ndarray:
    """(1/eps) e^(-t/eps) sum_n a_n (t/eps)^n / n!, summed in log space."""
    a = np.asarray(a, float)
    t = np.atleast_1d(np.asarray(t, float))
    n = np.arange(len(a))
    x = t[:, None] / eps
    logw = -x + n[None, :] * np.log(x) - special.gammaln(n + 1)[None, :]
    return (np.exp(logw) @ a) / eps


def laplace_check(phi: RatFun, lam_samples, eps: float | None = None, n_terms: int = 4000) -> float:
    """Max relative error of phi against quadrature of g and against the coefficient series."""
    pf = partial_fractions(phi)
    eps = eps or eps_max(pf.poles) / 4
    coeffs = tm_coeffs(phi, eps, n_terms, pf=pf)
    worst = 0.0
    n = np.arange(len(coeffs.a))
    for lam in lam_samples:
        lam = complex(lam)
        ref = complex(phi(lam))
        parts = []
        for part in (np.real, np.imag):
            v, _ = integrate.quad(
                lambda t: part(np.exp(-lam * t)) * g_values(pf, t)[0][0].real if t > 0 else 0.0,
                0, np.inf, epsabs=0, epsrel=1e-12, limit=400,
            )
            parts.append(v)
        quad = complex(*parts)
        ser = complex(np.sum(coeffs.a * (1 + eps * lam) ** -(n + 1.0)))
        worst = max(worst, abs(quad - ref) / abs(ref), abs(ser - ref) / abs(ref))
    return worst
