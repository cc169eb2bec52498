"""Complex polynomials and proper rational functions.

Polynomials are dense coefficient arrays in ascending powers.  Degrees in this
package stay small (at most ~2m <= 16), so everything is plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegreeZero, NearPole, NotReduced

# multiple-root acceptance: |p^(j)(c)/j!| relative to the absolute-value bound
MULTIPLICITY_TOL = 1e-10
ROOT_INF_RATIO = 1e-290
NEAR_POLE_TOL = 1e-12


def _as_coeffs(c) -> np.ndarray:
    a = np.atleast_1d(np.asarray(c, dtype=complex)).copy()
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return a[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class Poly:
    """Polynomial with ascending coefficients; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        a = _as_coeffs(self.coeffs)
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "Poly":
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(lead * c)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    @property
    def is_real(self) -> bool:
        c = self.coeffs
        return bool(np.all(np.abs(c.imag) <= 1e-14 * max(1.0, np.max(np.abs(c)))))

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for a in self.coeffs[::-1]:
            out = out * x + a
        return out if out.ndim else complex(out)

    def abs_bound(self, x, j: int = 0):
        """sum_i |a_i| C(i, j) |x|^(i-j), the natural scale of p^(j)(x)/j!."""
        ax = np.abs(np.asarray(x, dtype=complex))
        out = np.zeros_like(ax, dtype=float)
        for i in range(len(self.coeffs) - 1, j - 1, -1):
            out = out * ax + abs(self.coeffs[i]) * comb(i, j)
        return out

    def deriv(self, k: int = 1) -> "Poly":
        c = self.coeffs
        for _ in range(k):
            if len(c) == 1:
                return Poly([0.0])
            c = c[1:] * np.arange(1, len(c))
        return Poly(c)

    def taylor_at(self, c: complex) -> np.ndarray:
        """Coefficients of h -> p(c + h) in ascending powers of h."""
        a = self.coeffs.astype(complex).copy()
        n = len(a)
        for k in range(n - 1):
            for i in range(n - 2, k - 1, -1):
                a[i] += c * a[i + 1]
        return a

    def monic(self) -> "Poly":
        return Poly(self.coeffs / self.coeffs[-1])

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly(np.convolve(self.coeffs, other.coeffs))

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, precision=6)})"


def cluster_radius(roots) -> float:
    roots = np.asarray(roots)
    return 1e-8 * (1.0 + (np.max(np.abs(roots)) if roots.size else 0.0))


def _aberth_polish(p: Poly, roots: list, iters: int = 8) -> list:
    """Aberth corrections applied to simple roots only; clusters stay fixed."""
    dp = p.deriv()
    z = np.array([r for r, _ in roots], dtype=complex)
    mult = np.array([m for _, m in roots])
    for _ in range(iters):
        moved = False
        for i in np.flatnonzero(mult == 1):
            with np.errstate(over="ignore", invalid="ignore"):
                pz, dpz = p(z[i]), dp(z[i])
                # roots near the overflow range (negligible leading coefficient) are left as found
                if pz == 0 or dpz == 0 or not np.isfinite(pz * dpz):
                    continue
                mask = np.arange(len(z)) != i
                w = pz / dpz
                s = np.sum(mult[mask] / (z[i] - z[mask]))
                cand = z[i] - w / (1.0 - w * s)
                better = np.isfinite(cand) and abs(p(cand)) < abs(pz)
            if better:
                moved = True
                z[i] = cand
        if not moved:
            break
    return [(complex(zi), int(m)) for zi, m in zip(z, mult)]


def _is_multiple(p: Poly, c: complex, k: int) -> bool:
    for j in range(k):
        val = p.deriv(j)(c) / factorial(j)
        if abs(val) > MULTIPLICITY_TOL * p.abs_bound(c, j):
            return False
    return True


def poly_roots(p: Poly) -> list[tuple[complex, int]]:
    """Roots of ``p`` with multiplicities, sorted by (real, imag).

    Roots too large for double precision (leading coefficients below 1e-290 of
    the largest) are omitted, so fewer than ``degree`` roots may come back.

    Companion-matrix eigenvalues are clustered first: approximations closer
    than ``cluster_radius`` merge outright, farther ones merge only if the
    centroid passes a multiplicity test (vanishing derivatives up to the merged
    order).  Simple roots are then Aberth-polished against the cluster centres.
    """
    if p.degree < 1:
        raise DegreeZero("polynomial has degree < 1")
    # exact power-of-two rescale first: dividing by a subnormal lead overflows
    e = np.frexp(np.max(np.abs(p.coeffs)))[1]
    c = np.ldexp(p.coeffs.real, -e) + 1j * np.ldexp(p.coeffs.imag, -e)
    # roots beyond ~1e290 are at infinity in double precision; drop them
    keep = np.flatnonzero(np.abs(c) > ROOT_INF_RATIO)
    c = c[: keep[-1] + 1]
    if len(c) == 1:
        return []
    c = c / c[-1]
    n = len(c) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -c[-2::-1]
    if n > 1:
        comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    z = np.linalg.eigvals(comp)

    r = cluster_radius(z)
    groups = [[zi] for zi in z]
    # tight merge
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if abs(np.mean(groups[i]) - np.mean(groups[j])) <= r:
                    groups[i] += groups.pop(j)
                    merged = True
                    break
            if merged:
                break
    # validated merge of perturbed multiple roots
    while len(groups) > 1:
        best = None
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                ci, cj = np.mean(groups[i]), np.mean(groups[j])
                d = abs(ci - cj)
                if d > 1e-2 * (1 + abs(ci)):
                    continue
                if best is None or d < best[0]:
                    best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        cand = groups[i] + groups[j]
        if not _is_multiple(p, np.mean(cand), len(cand)):
            break
        groups[i] = cand
        groups.pop(j)

    out = _aberth_polish(p, [(complex(np.mean(g)), len(g)) for g in groups])
    if p.is_real:
        out = _symmetrize(out, r)
    out.sort(key=lambda rm: (round(rm[0].real, 12), rm[0].imag))
    return out


def _symmetrize(roots, r):
    """Snap near-real roots to the axis and make conjugate partners exact."""
    res = []
    used = [False] * len(roots)
    for i, (z, m) in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(z.imag) <= max(r, 1e-10 * (1 + abs(z))):
            res.append((complex(z.real, 0.0), m))
            continue
        best, bj = np.inf, -1
        for j, (w, mw) in enumerate(roots):
            if not used[j] and mw == m and abs(w - z.conjugate()) < best:
                best, bj = abs(w - z.conjugate()), j
        if bj >= 0 and best <= 1e-6 * (1 + abs(z)):
            used[bj] = True
            w = roots[bj][0]
            zz = 0.5 * (z + w.conjugate())
            res.extend([(zz, m), (zz.conjugate(), m)])
        else:
            # non-real roots of a real polynomial come in pairs; an unpaired one is real
            res.append((complex(z.real, 0.0), m))
    return res


@dataclass(frozen=True, eq=False)
class RatFun:
    """Proper rational function num/den with monic denominator."""

    num: Poly
    den: Poly
    reduced: bool = False

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("zero denominator")
        lead = self.den.lead
        if lead != 1:
            object.__setattr__(self, "num", Poly(self.num.coeffs / lead))
            object.__setattr__(self, "den", self.den.monic())
        if self.num.degree >= self.den.degree:
            raise ValueError("rational function must be strictly proper")

    @property
    def is_real(self) -> bool:
        return self.num.is_real and self.den.is_real

    def __call__(self, lam):
        return self.num(lam) / self.den(lam)

    def conj(self) -> "RatFun":
        """The rational function with conjugated coefficients."""
        return RatFun(Poly(self.num.coeffs.conj()), Poly(self.den.coeffs.conj()), self.reduced)

    def poles(self) -> list[tuple[complex, int]]:
        if self.den.degree < 1:
            return []
        return poly_roots(self.den)

    def __repr__(self):
        return f"RatFun(num={self.num!r}, den={self.den!r})"


def rat_eval(r: RatFun, lam: complex) -> complex:
    d = r.den(lam)
    if abs(d) < NEAR_POLE_TOL * r.den.abs_bound(lam):
        raise NearPole(f"{lam} is within tolerance of a pole")
    return complex(r.num(lam) / d)


def series_divide(num: np.ndarray, den: np.ndarray, K: int) -> np.ndarray:
    """First K+1 power-series coefficients of num/den (den[0] != 0)."""
    num = np.concatenate([np.asarray(num, complex), np.zeros(K + 1)])[: K + 1]
    den = np.concatenate([np.asarray(den, complex), np.zeros(K + 1)])[: K + 1]
    c = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        c[k] = (num[k] - np.dot(den[1 : k + 1], c[k - 1 :: -1][:k])) / den[0]
    return c


def rat_taylor_at_zero(r: RatFun, K: int) -> np.ndarray:
    d0 = r.den.coeffs[0]
    if abs(d0) < NEAR_POLE_TOL * np.max(np.abs(r.den.coeffs)):
        raise NearPole("0 is a pole")
    return series_divide(r.num.coeffs, r.den.coeffs, K)


def rat_derivs_at_zero(r: RatFun, K: int) -> np.ndarray:
    """phi(0), phi'(0), ..., phi^(K)(0)."""
    c = rat_taylor_at_zero(r, K)
    return c * np.array([factorial(k) for k in range(K + 1)], dtype=float)


def rat_reduce(r: RatFun) -> RatFun:
    """Cancel numerator roots that coincide (within the cluster radius) with poles."""
    if r.num.is_zero:
        return RatFun(Poly([0.0]), Poly([1.0]), reduced=True)
    if r.num.degree < 1 or r.den.degree < 1:
        return RatFun(r.num, r.den, reduced=True)
    zn = [[z, m] for z, m in poly_roots(r.num)]
    zd = [[z, m] for z, m in poly_roots(r.den)]
    common = []
    for a in zn:
        for b in zd:
            # radius local to the pair, so one huge spurious root cannot swallow the rest
            if a[1] and b[1] and abs(a[0] - b[0]) <= cluster_radius([a[0], b[0]]):
                k = min(a[1], b[1])
                a[1] -= k
                b[1] -= k
                common += [0.5 * (a[0] + b[0])] * k
    if not common:
        return RatFun(r.num, r.den, reduced=True)
    # divide the shared factor out; keeps leading coefficients and any roots poly_roots omitted
    g = Poly.from_roots(common).coeffs
    num = P.polydiv(r.num.coeffs, g)[0]
    den = P.polydiv(r.den.coeffs, g)[0]
    if r.is_real:
        num, den = num.real, den.real
    return RatFun(Poly(num), Poly(den), reduced=True)


@dataclass(frozen=True, eq=False)
class PartialFractions:
    """sum_j sum_k A_{j,k} / (x - xi_j)^k, stored as (xi_j, k, A_{j,k}) triples."""

    terms: tuple
    real: bool = False
    method: str = "confluent"
    residual: float = field(default=0.0)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros_like(lam)
        for xi, k, a in self.terms:
            out = out + a / (lam - xi) ** k
        return out if out.ndim else complex(out)

    @property
    def poles(self) -> list[complex]:
        seen = []
        for xi, _, _ in self.terms:
            if not any(xi == s for s in seen):
                seen.append(xi)
        return seen

    def order(self, xi) -> int:
        return max(k for x, k, _ in self.terms if x == xi)


def _sample_ring(poles, count: int) -> np.ndarray:
    rad = 2.0 * (1.0 + max((abs(p) for p in poles), default=0.0))
    th = 2 * np.pi * (np.arange(count) + 0.37) / count
    return rad * np.exp(1j * th)


def partial_fractions(r: RatFun) -> PartialFractions:
    """Partial-fraction decomposition of a reduced proper rational function."""
    if r.num.is_zero or r.den.degree < 1:
        return PartialFractions(terms=(), real=r.is_real)
    poles = poly_roots(r.den)
    for xi, _ in poles:
        if abs(r.num(xi)) <= 1e-9 * r.num.abs_bound(xi):
            raise NotReduced(f"numerator vanishes at pole {xi}")

    terms = []
    for j, (xi, n) in enumerate(poles):
        other = Poly.from_roots([x for i, (x, m) in enumerate(poles) if i != j for _ in range(m)])
        hs = series_divide(r.num.taylor_at(xi), other.taylor_at(xi), n - 1)
        for k in range(1, n + 1):
            terms.append((xi, k, complex(hs[n - k])))

    samples = _sample_ring([p for p, _ in poles], 20)
    exact = r(samples)

    def resid(ts):
        pf = PartialFractions(terms=tuple(ts))
        return float(np.max(np.abs(pf(samples) - exact)) / np.max(np.abs(exact)))

    method = "confluent"
    res = resid(terms)
    if res > 1e-9:
        # clustered poles: least-squares fit of the coefficients on a sample ring
        pts = _sample_ring([p for p, _ in poles], 4 * len(terms) + 8)
        basis = np.column_stack([1.0 / (pts - xi) ** k for xi, k, _ in terms])
        coef, *_ = np.linalg.lstsq(basis, r(pts), rcond=None)
        terms = [(xi, k, complex(c)) for (xi, k, _), c in zip(terms, coef)]
        res = resid(terms)
        method = "lstsq"

    real = r.is_real
    if real:
        terms = _conjugate_pair_terms(terms)
        res = resid(terms)
    return PartialFractions(terms=tuple(terms), real=real, method=method, residual=res)


def _conjugate_pair_terms(terms):
    out = []
    for xi, k, a in terms:
        if xi.imag == 0:
            out.append((xi, k, complex(a.real, 0.0)))
        elif xi.imag > 0:
            out.append((xi, k, a))
        else:
            partner = [b for x, kk, b in terms if x == xi.conjugate() and kk == k]
            out.append((xi, k, partner[0].conjugate() if partner else a))
    return out


EXP_FLUSH = -700.0


def g_values(pf: PartialFractions, t) -> tuple[np.ndarray, np.ndarray]:
    """Inverse Laplace transform g(t) = sum A t^(k-1) e^(xi t)/(k-1)! on an array.

    Returns (values, flushed) where ``flushed`` marks samples at which some
    term's exponent fell below -700 and was replaced by 0.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    acc = np.zeros(t.shape, dtype=complex)
    flushed = np.zeros(t.shape, dtype=bool)
    for xi, k, a in pf.terms:
        expo = xi.real * t
        low = expo < EXP_FLUSH
        flushed |= low
        with np.errstate(under="ignore"):
            val = np.where(low, 0.0, a * t ** (k - 1) * np.exp(xi * t) / factorial(k - 1))
        acc += val
    if pf.real:
        scale = np.zeros(t.shape)
        for xi, k, a in pf.terms:
            with np.errstate(under="ignore"):
                scale += np.abs(a) * t ** (k - 1) * np.exp(xi.real * t) / factorial(k - 1)
        bad = np.abs(acc.imag) > 1e-12 * np.maximum(np.abs(acc), scale) + 1e-300
        if np.any(bad):
            raise ValueError("real-coefficient input produced a complex g(t)")
        return acc.real, flushed
    return acc, flushed


def inverse_laplace_eval(pf: PartialFractions, t: float, with_flag: bool = False):
    vals, flushed = g_values(pf, t)
    v = vals[0].item()
    return (v, bool(flushed[0])) if with_flag else v
