"""Spectra, level sets of |phi|, resolvent growth and the hypothesis report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .charfun import SystemPair
from .errors import (
    NoConvergence,
    NotNormalized,
    OddLeadingOrder,
    OnLevelSet,
    SichainError,
    WindowTooCoarse,
)
from .monotone import MonotoneCertificate, Verdict, cm_certify, tm_certify
from .ratfun import Poly, RatFun, rat_taylor_at_zero

CLUSTER_MATCH = 1e-7

RATE_SHARP = "t^{-1/2} sharp"
RATE_LOG = "t^{-1/2}·log-factor"
RATE_NONE = "none"


def eigvals(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def set_distance(a, b) -> float:
    """Hausdorff distance between two finite point sets in C."""
    a = np.asarray(a, complex).ravel()
    b = np.asarray(b, complex).ravel()
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# ---------------------------------------------------------------------------
# resolvent growth parameter


def h_taylor(phi: RatFun, K: int) -> np.ndarray:
    """Taylor coefficients in s of h(s) = 1 - phi(is) phi*(-is), orders 0..K."""
    c = rat_taylor_at_zero(phi, K)
    k = np.arange(K + 1)
    u = c * (1j) ** k
    v = np.conj(c) * (-1j) ** k
    # phi*(-is) has coefficients conj(c_k) (-i)^k; for real s this is conj(phi(is))
    prod = np.convolve(u, v)[: K + 1]
    h = -prod
    h[0] += 1.0
    return h.real


def growth_param(phi: RatFun, K_max: int = 8, rel_tol: float = 1e-9) -> int | None:
    """Order of vanishing of 1 - |phi(is)|^2 at s = 0 (None if beyond K_max)."""
    c0 = complex(phi(0.0))
    if abs(c0 - 1) > 1e-10:
        raise NotNormalized(f"phi(0) = {c0}, expected 1")
    c = rat_taylor_at_zero(phi, K_max)
    h = h_taylor(phi, K_max)
    a = np.abs(c)
    n = None
    for k in range(1, K_max + 1):
        size = max(1.0, float(np.sum(a[: k + 1] * a[k::-1])))
        if abs(h[k]) > rel_tol * size:
            n = k
            break
    if n is not None and n % 2:
        raise OddLeadingOrder(f"leading order {n} of 1 - |phi(is)|^2 is odd")
    # two-path check of the n = 2 case: h_2 = phi''(0) - phi'(0)^2 for real phi
    if phi.is_real and K_max >= 2:
        d = 2 * c[2].real - c[1].real ** 2
        if (n == 2) != (abs(d) > rel_tol * max(1.0, abs(c[1]) ** 2, 2 * abs(c[2]))):
            raise OddLeadingOrder("growth order disagrees with the second-derivative test")
    return n


# ---------------------------------------------------------------------------
# hypothesis report


@dataclass
class HypothesisReport:
    hurwitz: bool
    phi_at_zero: complex
    omega_ok: bool
    n_phi: int | None
    cm: Verdict | None
    tm: Verdict | None
    phi_is_p0_ratio: bool
    predicted_rate: str
    spectrum_A0: list = field(default_factory=list)
    grids: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    certificates: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "hurwitz": self.hurwitz,
            "phi_at_zero": [self.phi_at_zero.real, self.phi_at_zero.imag],
            "omega_ok": self.omega_ok,
            "n_phi": self.n_phi,
            "cm": None if self.cm is None else self.cm.value,
            "tm": None if self.tm is None else self.tm.value,
            "phi_is_p0_ratio": self.phi_is_p0_ratio,
            "predicted_rate": self.predicted_rate,
            "spectrum_A0": [[float(z.real), float(z.imag)] for z in self.spectrum_A0],
            "grids": self.grids,
            "notes": list(self.notes),
            "certificates": {k: v.to_json() for k, v in self.certificates.items()},
        }


def _imag_axis_ok(phi: RatFun, s_lo, s_hi, per_decade, K_max=8) -> tuple[bool, dict]:
    s = np.logspace(np.log10(s_lo), np.log10(s_hi), int(round(np.log10(s_hi / s_lo) * per_decade)) + 1)
    s = np.concatenate([-s[::-1], s])
    direct = 1.0 - np.abs(phi(1j * s)) ** 2
    h = h_taylor(phi, K_max)
    model = np.polyval(h[::-1], s)
    # below ~1e-8 the direct difference is roundoff; trust the Taylor model there
    small = np.abs(direct) < 1e-8
    use_model = small & (np.abs(s) < 0.1)
    d = np.where(use_model, model, direct)
    info = {
        "s_range": [s_lo, s_hi],
        "per_decade": per_decade,
        "min_margin": float(np.min(d)),
        "model_points": int(np.sum(use_model)),
    }
    return bool(np.all(d > 0) and not np.any(small & ~use_model)), info


def _rhp_ok(phi: RatFun, radius: float, n: int = 41) -> bool:
    x = np.linspace(0.0, radius, n)
    y = np.linspace(-radius, radius, 2 * n - 1)
    Z = x[None, :] + 1j * y[:, None]
    Z = Z[np.abs(Z) > 1e-3]
    return bool(np.all(np.abs(phi(Z)) < 1.0))


def is_p0_ratio(phi: RatFun, p0: Poly, tol: float = 1e-10) -> bool:
    """phi == p0(0) / p0, checked via q p0 - p0(0) p coefficientwise."""
    lhs = (phi.num * p0).coeffs
    rhs = (Poly([p0.coeffs[0]]) * phi.den).coeffs
    n = max(len(lhs), len(rhs))
    lhs = np.pad(lhs, (0, n - len(lhs)))
    rhs = np.pad(rhs, (0, n - len(rhs)))
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    return bool(np.max(np.abs(lhs - rhs)) <= tol * scale)


def hypothesis_check(
    system: SystemPair, s_lo: float = 1e-4, s_hi: float = 1e4, per_decade: int = 50, K_max: int = 8
) -> HypothesisReport:
    phi = system.phi
    spec = eigvals(system.A0)
    hurwitz = bool(np.all(spec.real < 0))
    notes = []
    try:
        phi0 = complex(phi(0.0)) if abs(phi.den(0.0)) > 0 else complex("nan")
    except ZeroDivisionError:
        phi0 = complex("nan")
    normalized = abs(phi0 - 1) <= 1e-10
    if not hurwitz:
        notes.append("A0 has an eigenvalue in the closed right half-plane")
    if not normalized:
        notes.append(f"phi(0) = {phi0} differs from 1")

    omega_ok = False
    grids = {}
    if normalized:
        axis_ok, info = _imag_axis_ok(phi, s_lo, s_hi, per_decade, K_max)
        radius = 2.0 * (1.0 + float(np.max(np.abs(spec))))
        rhp = _rhp_ok(phi, radius)
        grids = {"imag_axis": info, "rhp_radius": radius}
        omega_ok = axis_ok and rhp and phi.num.degree < system.p0.degree

    n_phi = None
    if normalized:
        try:
            n_phi = growth_param(phi, K_max)
        except SichainError as exc:
            notes.append(f"growth parameter: {exc}")

    certs: dict[str, MonotoneCertificate] = {}
    for kind, fn in (("cm", cm_certify), ("tm", tm_certify)):
        try:
            certs[kind] = fn(phi)
        except SichainError as exc:
            notes.append(f"{kind}: {exc}")
    cm = certs["cm"].verdict if "cm" in certs else None
    tm = certs["tm"].verdict if "tm" in certs else None

    ratio = is_p0_ratio(phi, system.p0)
    if hurwitz and omega_ok and cm == Verdict.CERTIFIED:
        rate = RATE_SHARP if (tm == Verdict.CERTIFIED and ratio) else RATE_LOG
    else:
        rate = RATE_NONE
    return HypothesisReport(
        hurwitz=hurwitz,
        phi_at_zero=phi0,
        omega_ok=omega_ok,
        n_phi=n_phi,
        cm=cm,
        tm=tm,
        phi_is_p0_ratio=ratio,
        predicted_rate=rate,
        spectrum_A0=sorted(spec, key=lambda z: (z.real, z.imag)),
        grids=grids,
        notes=notes,
        certificates=certs,
    )


# ---------------------------------------------------------------------------
# level-set contours (marching squares)


@dataclass(eq=False)
class ContourSet:
    window: tuple
    resolution: tuple
    polylines: list
    inside: np.ndarray  # |phi| >= 1 at grid nodes, shape (ny, nx)

    @property
    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros(0, complex)
        return np.concatenate(self.polylines)


# cell corners: 0=(i,j) 1=(i,j+1) 2=(i+1,j+1) 3=(i+1,j); edges: 0 bottom, 1 right, 2 top, 3 left
_EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))
_SEGMENTS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(2, 0)], 11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def _edge_key(i, j, e):
    # canonical id shared by neighbouring cells
    if e == 0:
        return ("h", i, j)
    if e == 2:
        return ("h", i + 1, j)
    if e == 3:
        return ("v", i, j)
    return ("v", i, j + 1)


def default_window(phi: RatFun) -> tuple:
    poles = [z for z, _ in phi.poles()]
    R = 1.5 * (1.0 + max([abs(z) for z in poles] + [0.0]))
    return (-R, 0.5 * R, -R, R)


def omega_contour(phi: RatFun, window=None, resolution=(400, 400), tol: float = 1e-3) -> ContourSet:
    """Trace |phi(l)| = 1 on a rectangle by marching squares with edge bisection."""
    x0, x1, y0, y1 = window or default_window(phi)
    nx, ny = resolution
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    Z = xs[None, :] + 1j * ys[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.abs(phi(Z)) - 1.0
    F = np.where(np.isfinite(F), F, np.inf)
    inside = F >= 0

    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    pole_cells = set()
    for z, _ in phi.poles():
        j, i = int(np.floor((z.real - x0) / dx)), int(np.floor((z.imag - y0) / dy))
        if 0 <= i < ny - 1 and 0 <= j < nx - 1:
            pole_cells.add((i, j))

    b = inside.astype(int)
    code = b[:-1, :-1] | (b[:-1, 1:] << 1) | (b[1:, 1:] << 2) | (b[1:, :-1] << 3)
    cells = np.argwhere((code != 0) & (code != 15))
    for i, j in cells:
        if (int(i), int(j)) in pole_cells:
            raise WindowTooCoarse(f"cell ({i},{j}) holds both a pole and the level curve")

    fabs = lambda z: abs(complex(phi(z))) - 1.0  # noqa: E731
    cache: dict = {}

    def edge_point(i, j, e):
        key = _edge_key(i, j, e)
        if key in cache:
            return key
        ca, cb = _EDGE_CORNERS[e]
        corners = (Z[i, j], Z[i, j + 1], Z[i + 1, j + 1], Z[i + 1, j])
        za, zb = corners[ca], corners[cb]
        f = lambda u: fabs(za + u * (zb - za))  # noqa: E731
        fa, fb = f(0.0), f(1.0)
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
            u = optimize.brentq(f, 0.0, 1.0, xtol=1e-14)
        else:
            u = 0.0 if abs(fa) <= abs(fb) else 1.0
        cache[key] = za + u * (zb - za)
        return key

    segs = []
    for i, j in cells:
        c = int(code[i, j])
        if c in (5, 10):
            centre = np.mean([Z[i, j], Z[i, j + 1], Z[i + 1, j + 1], Z[i + 1, j]])
            up = fabs(centre) >= 0
            if c == 5:
                pairs = [(3, 2), (1, 0)] if up else [(3, 0), (1, 2)]
            else:
                pairs = [(0, 3), (2, 1)] if up else [(0, 1), (2, 3)]
        else:
            pairs = _SEGMENTS[c]
        for ea, eb in pairs:
            segs.append((edge_point(i, j, ea), edge_point(i, j, eb)))

    polylines = _chain(segs, cache)
    bad = [z for line in polylines for z in line if abs(fabs(z)) > tol]
    if bad:
        raise WindowTooCoarse(f"{len(bad)} contour vertices miss the level set by more than {tol}")
    return ContourSet(window=(x0, x1, y0, y1), resolution=(nx, ny), polylines=polylines, inside=inside)


def _chain(segs, points) -> list:
    adj: dict = {}
    for n, (a, b) in enumerate(segs):
        adj.setdefault(a, []).append(n)
        adj.setdefault(b, []).append(n)
    used = [False] * len(segs)
    lines = []
    # open chains first (start at degree-1 endpoints), then closed loops
    starts = [k for k, v in adj.items() if len(v) == 1] + list(adj)
    for start in starts:
        if not any(not used[n] for n in adj[start]):
            continue
        line = [start]
        cur = start
        while True:
            nxt = next((n for n in adj[cur] if not used[n]), None)
            if nxt is None:
                break
            used[nxt] = True
            a, b = segs[nxt]
            cur = b if a == cur else a
            line.append(cur)
        lines.append(np.array([points[k] for k in line]))
    return lines


# ---------------------------------------------------------------------------
# circulant truncation spectra and resolvents


def roots_of_unity(N: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(N) / N)


def symbol_blocks(system: SystemPair, omegas) -> np.ndarray:
    omegas = np.asarray(omegas, complex)
    return system.A0[None] + omegas[:, None, None] * system.A1[None]


def circulant_spectrum(system: SystemPair, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the N-block circulant truncation with their root-of-unity index j."""
    if N < 2:
        raise ValueError("N must be at least 2")
    blocks = symbol_blocks(system, roots_of_unity(N))
    vals = np.linalg.eigvals(blocks)
    tags = np.repeat(np.arange(N), system.m)
    return vals.ravel(), tags


def circulant_matrix(system: SystemPair, N: int) -> np.ndarray:
    """Dense A_N: block diagonal A0 plus A1 on the block subdiagonal and in the top-right corner."""
    m = system.m
    A = np.zeros((N * m, N * m), dtype=complex)
    for k in range(N):
        A[k * m : (k + 1) * m, k * m : (k + 1) * m] = system.A0
        j = (k - 1) % N
        A[k * m : (k + 1) * m, j * m : (j + 1) * m] += system.A1
    return A


def onesided_matrix(system: SystemPair, N: int) -> np.ndarray:
    m = system.m
    A = np.zeros((N * m, N * m), dtype=complex)
    for k in range(N):
        A[k * m : (k + 1) * m, k * m : (k + 1) * m] = system.A0
        if k:
            A[k * m : (k + 1) * m, (k - 1) * m : k * m] = system.A1
    return A


def circulant_resolvent_apply(system: SystemPair, lam: complex, x) -> np.ndarray:
    """R(lam, A_N) x through the closed form with the 1/(1 - phi^N) prefactor.

    x has shape (N, m).  Valid off sigma(A0) and off |phi(lam)|^N = 1.
    """
    x = np.asarray(x, complex)
    N, m = x.shape
    R = np.linalg.inv(lam * np.eye(m) - system.A0)
    ph = complex(system.phi(lam))
    Rx = x @ R.T
    K = R @ system.A1 @ R
    Kx = x @ K.T
    acc = np.zeros_like(Kx)
    for ell in range(N):
        # row k picks x_{k-1-ell} cyclically: substituting A1 x_{k-1} into x_k = R y_k + R A1 x_{k-1}
        acc += ph**ell * np.roll(Kx, ell + 1, axis=0)
    return Rx + acc / (1.0 - ph**N)


# ---------------------------------------------------------------------------
# two-sided resolvent norm (p = 2)


def _inv_smin(system: SystemPair, lam: complex, theta) -> np.ndarray:
    theta = np.atleast_1d(theta)
    m = system.m
    M = lam * np.eye(m)[None] - symbol_blocks(system, np.exp(-1j * theta))
    s = np.linalg.svd(M, compute_uv=False)
    with np.errstate(divide="ignore"):
        return 1.0 / s[:, -1]


def resolvent_norm_twosided(system: SystemPair, lam: complex, theta_points: int = 1024) -> float:
    ph = complex(system.phi(lam))
    if abs(1.0 - abs(ph)) < 1e-10:
        raise OnLevelSet(f"|phi({lam})| = 1")
    theta = -np.pi + 2 * np.pi * np.arange(theta_points) / theta_points
    vals = _inv_smin(system, lam, theta)
    k = int(np.argmax(vals))
    best = float(vals[k])
    h = 2 * np.pi / theta_points
    res = optimize.minimize_scalar(
        lambda th: -float(_inv_smin(system, lam, th)[0]),
        bounds=(theta[k] - h, theta[k] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(best, -float(res.fun))


def resolvent_bracket(system: SystemPair, lam: complex) -> dict:
    """Pieces of the resolvent bracket at lam: ||R||, ||R A1 R||/(1-|phi|), ||R_lam||."""
    m = system.m
    R = np.linalg.inv(lam * np.eye(m) - system.A0)
    ph = complex(system.phi(lam))
    return {
        "norm": resolvent_norm_twosided(system, lam),
        "centre": float(np.linalg.norm(R @ system.A1 @ R, 2) / (1.0 - abs(ph))),
        "radius": float(np.linalg.norm(R, 2)),
        "phi_abs": abs(ph),
    }


__all__ = [
    "ContourSet",
    "HypothesisReport",
    "circulant_matrix",
    "circulant_resolvent_apply",
    "circulant_spectrum",
    "eigvals",
    "growth_param",
    "h_taylor",
    "hypothesis_check",
    "is_p0_ratio",
    "omega_contour",
    "onesided_matrix",
    "resolvent_bracket",
    "resolvent_norm_twosided",
    "roots_of_unity",
    "set_distance",
    "symbol_blocks",
]
