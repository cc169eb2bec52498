"""Semigroups of truncated and infinite chains, and their decay measurements.

Structured paths:
  one-sided   first block column B_l(t) of exp(t A_N) from B_l' = A0 B_l + A1 B_{l-1}
  circulant   DFT factors E_j(t) = exp(t (A0 + w_j A1)) over N-th roots of unity w_j
  laurent     symbol A0 + e^{-i theta} A1 over a graded theta grid (p = 2 only)
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.sparse.linalg import LinearOperator, svds

from .charfun import SystemPair
from .errors import (
    DegenerateWindow,
    EpsTooLarge,
    PhiPrimeZero,
    RangeInconsistent,
    ShapeMismatch,
    ToleranceNotMet,
    ZeroInSpectrum,
)
from .ratfun import rat_derivs_at_zero
from .spectra import eigvals, roots_of_unity, symbol_blocks

DENSE_SVD_MAX = 1024
EXPM_OVERFLOW = 1e4


class ExpmOverflowWarning(RuntimeWarning):
    pass


# ---------------------------------------------------------------------------
# matrix exponential: scaling and squaring with diagonal Pade approximants

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1, 7: 9.504178996162932e-1, 9: 2.097847961257068e0}
_THETA13 = 5.371920351148152e0
_B = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0, 1323241920.0,
        40840800.0, 960960.0, 16380.0, 182.0, 1.0,
    ),
}


def _pade(A: np.ndarray, order: int) -> np.ndarray:
    b = _B[order]
    eye = np.broadcast_to(np.eye(A.shape[-1], dtype=A.dtype), A.shape)
    A2 = A @ A
    if order < 13:
        powers = [eye, A2]
        while len(powers) <= order // 2:
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * k + 1] * powers[k] for k in range(order // 2 + 1))
        V = sum(b[2 * k] * powers[k] for k in range(order // 2 + 1))
    else:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye
    return np.linalg.solve(V - U, V + U)


def expm_dense(M, t: float = 1.0) -> np.ndarray:
    """exp(t M) for one matrix or a stack (..., n, n)."""
    A = t * np.asarray(M, dtype=complex)
    if A.shape[-1] != A.shape[-2]:
        raise ShapeMismatch(f"expected square matrices, got {A.shape}")
    batch = A.shape[:-2]
    A = A.reshape((-1,) + A.shape[-2:])
    n = A.shape[-1]
    if n == 1:
        return np.exp(A).reshape(batch + (1, 1))
    norms = np.abs(A).sum(axis=-2).max(axis=-1)
    if np.any(norms > EXPM_OVERFLOW):
        warnings.warn("expm argument norm exceeds 1e4; result relies on many squarings", ExpmOverflowWarning, stacklevel=2)
    out = np.empty_like(A)
    todo = np.ones(len(A), bool)
    for order in (3, 5, 7, 9):
        sel = todo & (norms <= _THETA[order])
        if sel.any():
            out[sel] = _pade(A[sel], order)
            todo &= ~sel
    if todo.any():
        idx = np.flatnonzero(todo)
        s = np.maximum(0, np.ceil(np.log2(norms[idx] / _THETA13))).astype(int)
        X = _pade(A[idx] / (2.0**s)[:, None, None], 13)
        for k in range(int(s.max(initial=0))):
            live = s > k
            X[live] = X[live] @ X[live]
        out[idx] = X
    return out.reshape(batch + (n, n))


# ---------------------------------------------------------------------------
# block columns


@dataclass(frozen=True, eq=False)
class BlockColumn:
    """Blocks of exp(t A_N) on a t-grid.

    onesided: blocks[i, l] = B_l(t_i), first block column of the lower-triangular Toeplitz matrix.
    circulant: blocks[i, j] = E_j(t_i) = exp(t_i (A0 + w_j A1)), w_j = exp(2 pi i j / N).
    """

    kind: str
    t: np.ndarray
    blocks: np.ndarray

    @property
    def N(self) -> int:
        return self.blocks.shape[1]

    @property
    def m(self) -> int:
        return self.blocks.shape[2]


def onesided_blocks(system: SystemPair, N: int, t, tol: float = 1e-10) -> BlockColumn:
    """Integrate the block recursion with an adaptive 8th-order Runge-Kutta scheme."""
    t = np.atleast_1d(np.asarray(t, float))
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t must be non-negative and strictly increasing")
    m = system.m
    A0, A1 = system.A0, system.A1
    shape = (N, m, m)

    def rhs(_, y):
        B = y.reshape(shape)
        d = A0 @ B
        d[1:] += A1 @ B[:-1]
        return d.ravel()

    y0 = np.zeros(shape, complex)
    y0[0] = np.eye(m)
    out = np.zeros((len(t),) + shape, complex)
    t_eval = t[t > 0]
    out[t == 0] = y0
    if t_eval.size:
        sol = integrate.solve_ivp(
            rhs, (0.0, float(t_eval[-1])), y0.ravel(), method="DOP853", t_eval=t_eval, rtol=tol, atol=tol * 1e-6
        )
        if sol.status != 0:
            raise ToleranceNotMet(sol.message)
        out[t > 0] = sol.y.T.reshape((-1,) + shape)
    return BlockColumn("onesided", t, out)


def toeplitz_fill(blocks: np.ndarray) -> np.ndarray:
    """Dense block lower-triangular Toeplitz matrix from its first block column (N, m, m)."""
    N, m, _ = blocks.shape
    out = np.zeros((N * m, N * m), dtype=blocks.dtype)
    for k in range(N):
        for j in range(k + 1):
            out[k * m : (k + 1) * m, j * m : (j + 1) * m] = blocks[k - j]
    return out


def circulant_exp(system: SystemPair, N: int, t) -> BlockColumn:
    t = np.atleast_1d(np.asarray(t, float))
    S = symbol_blocks(system, roots_of_unity(N))
    E = expm_dense(t[:, None, None, None] * S[None])
    return BlockColumn("circulant", t, E)


def circulant_column(factors: np.ndarray) -> np.ndarray:
    """First block column C_l of a block circulant from its factors at w_j (axis -3)."""
    return np.fft.fft(factors, axis=-3) / factors.shape[-3]


def circulant_fill(column: np.ndarray) -> np.ndarray:
    N, m, _ = column.shape
    out = np.zeros((N * m, N * m), dtype=column.dtype)
    for k in range(N):
        for j in range(N):
            out[k * m : (k + 1) * m, j * m : (j + 1) * m] = column[(k - j) % N]
    return out


def generator_times(system: SystemPair, col: BlockColumn) -> np.ndarray:
    """Blocks of A_N exp(t A_N) in the same layout as col.blocks."""
    B = col.blocks
    if col.kind == "circulant":
        S = symbol_blocks(system, roots_of_unity(col.N))
        return S[None] @ B
    D = system.A0 @ B
    D[:, 1:] += system.A1 @ B[:, :-1]
    return D


# ---------------------------------------------------------------------------
# operator norms


def _spec2(M) -> np.ndarray:
    return np.linalg.norm(M, 2, axis=(-2, -1))


def _ascent_p1(D, v, iters=30):
    # maximise sum_l ||D_l v|| over unit v; each step cannot decrease the objective
    best = 0.0
    for _ in range(iters):
        w = D @ v
        nw = np.linalg.norm(w, axis=-1)
        val = float(nw.sum())
        if val <= best * (1 + 1e-13):
            best = max(best, val)
            break
        best = val
        g = np.einsum("lji,lj->i", D.conj(), w / np.where(nw > 0, nw, 1)[:, None])
        ng = np.linalg.norm(g)
        if ng == 0:
            break
        v = g / ng
    return best


def _ascent_pinf(D, x, iters=30):
    # maximise ||sum_l D_l x_l|| over ||x_l|| <= 1
    best = 0.0
    for _ in range(iters):
        y = np.einsum("lij,lj->i", D, x)
        val = float(np.linalg.norm(y))
        if val <= best * (1 + 1e-13):
            best = max(best, val)
            break
        best = val
        if val == 0:
            break
        g = np.einsum("lji,j->li", D.conj(), y / val)
        ng = np.linalg.norm(g, axis=-1)
        x = g / np.where(ng > 0, ng, 1)[:, None]
    return best


def block_norm_bracket(D: np.ndarray, p, rng: np.random.Generator, probes: int = 32) -> tuple[float, float]:
    """Bracket for the l^p(C^m)-induced norm of a block Toeplitz/circulant operator.

    D holds the N defining blocks.  For p = 1 the worst column sees all of them,
    for p = inf the worst row does, so both reduce to this single block list.
    """
    D = np.asarray(D, complex)
    N, m, _ = D.shape
    if m == 1:
        v = float(np.abs(D).sum())
        return v, v
    upper = float(_spec2(D).sum())
    lower = 0.0
    if p == 1:
        starts = [np.eye(m)[i] for i in range(m)]
        starts += [z / np.linalg.norm(z) for z in rng.normal(size=(probes, m)) + 1j * rng.normal(size=(probes, m))]
        # right singular vector of the heaviest block is a good seed
        _, _, vh = np.linalg.svd(D[int(np.argmax(_spec2(D)))])
        starts.append(vh[0].conj())
        for v in starts:
            lower = max(lower, _ascent_p1(D, v.astype(complex)))
    else:
        starts = [np.tile(np.eye(m)[i], (N, 1)) for i in range(m)]
        for _ in range(probes):
            z = rng.normal(size=(N, m)) + 1j * rng.normal(size=(N, m))
            starts.append(z / np.linalg.norm(z, axis=-1, keepdims=True))
        u, _, _ = np.linalg.svd(D[int(np.argmax(_spec2(D)))])
        w = u[:, 0]
        g = np.einsum("lji,j->li", D.conj(), w)
        ng = np.linalg.norm(g, axis=-1)
        starts.append(g / np.where(ng > 0, ng, 1)[:, None])
        for x in starts:
            lower = max(lower, _ascent_pinf(D, x.astype(complex)))
    return min(lower, upper), upper


def _toeplitz_matvec(D):
    N, m, _ = D.shape
    Df = np.fft.fft(np.concatenate([D, np.zeros_like(D)]), axis=0)
    DfH = np.conj(Df).transpose(0, 2, 1)

    def mv(x, F=Df):
        X = np.fft.fft(np.concatenate([x.reshape(N, m), np.zeros((N, m))]), axis=0)
        return np.fft.ifft(np.einsum("lij,lj->li", F, X), axis=0)[:N].ravel()

    def rmv(x):
        # adjoint of lower-triangular Toeplitz: upper-triangular with blocks D_l^H
        y = x.reshape(N, m)[::-1]
        Y = np.fft.fft(np.concatenate([y, np.zeros((N, m))]), axis=0)
        return np.fft.ifft(np.einsum("lij,lj->li", DfH, Y), axis=0)[:N][::-1].ravel()

    return LinearOperator((N * m, N * m), matvec=mv, rmatvec=rmv, dtype=complex)


def onesided_norm2(D: np.ndarray) -> tuple[float, float]:
    """Spectral norm of the block lower-triangular Toeplitz matrix with first column D."""
    N, m, _ = D.shape
    if N * m <= DENSE_SVD_MAX:
        v = float(np.linalg.norm(toeplitz_fill(D), 2))
        return v, v
    op = _toeplitz_matvec(D)
    s = svds(op, k=1, return_singular_vectors=False, tol=1e-10, random_state=0)
    lower = float(s[0])
    # ||M||_2 <= sqrt(||M||_1 ||M||_inf) with entrywise column/row sums
    col = float(np.abs(D).sum(axis=(0, 1)).max())
    row = float(np.abs(D).sum(axis=(0, 2)).max())
    upper = min(float(np.sqrt(col * row)), float(_spec2(D).sum()))
    return lower, max(lower, upper)


# ---------------------------------------------------------------------------
# decay curves


@dataclass
class DecayCurve:
    kind: str  # onesided | circulant | laurent | sup
    N: int | None
    p: object
    t: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    exact: bool
    meta: dict = field(default_factory=dict)

    @property
    def mid(self) -> np.ndarray:
        return np.sqrt(self.lower * self.upper)

    def rows(self):
        label = self.N if self.N is not None else ("sup" if self.kind == "sup" else "inf")
        for t, lo, up in zip(self.t, self.lower, self.upper):
            yield (t, lo, up, label, p_label(self.p), self.kind)

    def to_csv(self, fh=None, header: bool = True) -> str:
        buf = fh or io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["t", "lower", "upper", "N", "p", "kind"])
        for t, lo, up, N, p, kind in self.rows():
            w.writerow([repr(float(t)), repr(float(lo)), repr(float(up)), N, p, kind])
        return buf.getvalue() if fh is None else ""


def p_label(p) -> str:
    return "inf" if p in (np.inf, "inf", float("inf")) else str(int(p))


def parse_p(p):
    if p in ("inf", "Inf", "INF", np.inf):
        return np.inf
    p = int(p)
    if p not in (1, 2):
        raise ValueError(f"p must be 1, 2 or inf, got {p}")
    return p


def log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    n = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.logspace(np.log10(lo), np.log10(hi), n)


def decay_curve(
    system: SystemPair,
    kind: str,
    N: int,
    p,
    t,
    seed: int = 0,
    tol: float = 1e-10,
    generator: bool = True,
) -> DecayCurve:
    """Bracket ||A_N T_N(t)|| (or ||T_N(t)|| when generator is False) on a t-grid."""
    p = parse_p(p)
    t = np.atleast_1d(np.asarray(t, float))
    if kind == "laurent":
        if p != 2:
            raise ValueError("the two-sided symbol path is p = 2 only")
        return laurent_decay(system, t, generator=generator)
    if N < 2:
        raise ValueError("N must be at least 2")
    rng = np.random.default_rng(seed)
    if kind == "circulant":
        col = circulant_exp(system, N, t)
    elif kind == "onesided":
        col = onesided_blocks(system, N, t, tol)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    F = generator_times(system, col) if generator else col.blocks
    lo = np.empty(len(t))
    up = np.empty(len(t))
    exact = True
    for i in range(len(t)):
        if kind == "circulant" and p == 2:
            lo[i] = up[i] = float(_spec2(F[i]).max())
            continue
        D = circulant_column(F[i]) if kind == "circulant" else F[i]
        if p == 2:
            lo[i], up[i] = onesided_norm2(D)
        else:
            lo[i], up[i] = block_norm_bracket(D, p, rng)
        exact &= bool(lo[i] == up[i])
    return DecayCurve(kind, N, p, t, lo, up, exact, meta={"seed": seed, "tol": tol, "generator": generator})


def decay_curves(system: SystemPair, kind: str, N_list, p, t, seed: int = 0, tol: float = 1e-10, generator: bool = True) -> list[DecayCurve]:
    """One curve per N; one-sided blocks are integrated once for the largest N and sliced."""
    N_list = sorted(set(int(n) for n in N_list))
    if kind != "onesided":
        return [decay_curve(system, kind, N, p, t, seed, tol, generator) for N in N_list]
    p = parse_p(p)
    t = np.atleast_1d(np.asarray(t, float))
    full = onesided_blocks(system, N_list[-1], t, tol)
    F = generator_times(system, full) if generator else full.blocks
    out = []
    for N in N_list:
        rng = np.random.default_rng(seed)
        lo = np.empty(len(t))
        up = np.empty(len(t))
        for i in range(len(t)):
            D = F[i, :N]
            lo[i], up[i] = onesided_norm2(D) if p == 2 else block_norm_bracket(D, p, rng)
        out.append(DecayCurve("onesided", N, p, t, lo, up, bool(np.all(lo == up)), meta={"seed": seed, "tol": tol, "generator": generator}))
    return out


def _laurent_eval(system: SystemPair, t: float, theta, generator=True) -> np.ndarray:
    S = symbol_blocks(system, np.exp(-1j * np.atleast_1d(theta)))
    E = expm_dense(t * S)
    return _spec2(S @ E if generator else E)


def laurent_decay(system: SystemPair, t, n_uniform: int = 1024, n_graded: int = 512, generator: bool = True) -> DecayCurve:
    """sup over theta of ||S(theta) exp(t S(theta))||_2 with S(theta) = A0 + e^{-i theta} A1."""
    t = np.atleast_1d(np.asarray(t, float))
    uni = -np.pi + 2 * np.pi * (np.arange(n_uniform) + 0.5) / n_uniform
    vals = np.empty(len(t))
    for i, ti in enumerate(t):
        W = min(np.pi, 10.0 / np.sqrt(max(ti, 1e-12)))
        grid = np.unique(np.concatenate([uni, np.linspace(-W, W, n_graded), [0.0]]))
        f = _laurent_eval(system, ti, grid, generator)
        k = int(np.argmax(f))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        best = float(f[k])
        if b > a:
            res = optimize.minimize_scalar(
                lambda th: -float(_laurent_eval(system, ti, th, generator)[0]),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-13},
            )
            best = max(best, -float(res.fun))
        vals[i] = best
    return DecayCurve("laurent", None, 2, t, vals.copy(), vals.copy(), True, meta={"theta_uniform": n_uniform, "theta_graded": n_graded})


def sup_over_N(curves: list[DecayCurve]) -> DecayCurve:
    if not curves:
        raise ValueError("need at least one curve")
    t = curves[0].t
    for c in curves[1:]:
        if c.t.shape != t.shape or np.any(c.t != t) or c.p != curves[0].p:
            raise ShapeMismatch("curves must share t-grid and p")
    lo = np.max([c.lower for c in curves], axis=0)
    up = np.max([c.upper for c in curves], axis=0)
    return DecayCurve(
        "sup" if len(curves) > 1 else curves[0].kind,
        None if len(curves) > 1 else curves[0].N,
        curves[0].p,
        t,
        lo,
        up,
        all(c.exact for c in curves),
        meta={"N_list": [c.N for c in curves], "kind": curves[0].kind},
    )


def spectral_lower_bound(spectrum, t: float) -> float:
    lam = np.asarray(spectrum, complex)
    with np.errstate(under="ignore"):
        return float(np.max(np.abs(lam) * np.exp(t * lam.real)))


# ---------------------------------------------------------------------------
# rate fits


@dataclass(frozen=True)
class RateFit:
    alpha: float
    beta: float
    residual: float
    window: tuple
    n: int

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "residual": self.residual, "window": list(self.window), "n": self.n}


def fit_rate(t, y, window=None, with_log: bool = False) -> RateFit:
    """Least squares for log y = c - alpha log t (+ beta log log t)."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    lo, hi = window or (t.min(), t.max())
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 8:
        raise DegenerateWindow(f"{int(sel.sum())} samples in window, need 8")
    if np.any(y[sel] <= 0):
        raise DegenerateWindow("non-positive values in window")
    if with_log and lo <= 1:
        raise DegenerateWindow("log-factor fit needs t > 1")
    lt = np.log(t[sel])
    cols = [np.ones_like(lt), lt] + ([np.log(lt)] if with_log else [])
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, np.log(y[sel]), rcond=None)
    res = np.log(y[sel]) - X @ coef
    return RateFit(
        alpha=float(-coef[1]),
        beta=float(coef[2]) if with_log else 0.0,
        residual=float(np.sqrt(np.mean(res**2))),
        window=(float(lo), float(hi)),
        n=int(sel.sum()),
    )


def fit_bracketed(t, lower, upper, window=None, with_log: bool = False) -> RateFit:
    """Fit the geometric midpoint; half the log-width of each bracket is added to the residual."""
    t = np.asarray(t, float)
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    fit = fit_rate(t, np.sqrt(lower * upper), window, with_log)
    sel = (t >= fit.window[0]) & (t <= fit.window[1])
    half = 0.5 * np.log(upper[sel] / lower[sel])
    return replace(fit, residual=float(np.sqrt(fit.residual**2 + np.mean(half**2))))


def fit_curve(curve: DecayCurve, window=None, with_log: bool = False) -> RateFit:
    return fit_bracketed(curve.t, curve.lower, curve.upper, window, with_log)


# ---------------------------------------------------------------------------
# Cesaro means


@dataclass(frozen=True, eq=False)
class CesaroResult:
    n: np.ndarray
    norms: np.ndarray
    exponent: float
    classification: str  # decays-to-0 | O(1/n) | stagnates


def _block_norms(X) -> np.ndarray:
    # Euclidean inside each block; p only combines blocks
    return np.linalg.norm(X, axis=-1)


def _check_invertible(A0):
    s = np.linalg.svd(A0, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise ZeroInSpectrum("A0 is singular")


def cesaro_norms(system: SystemPair, x0, p, n_max: int = 2000) -> CesaroResult:
    """||(1/n) sum_{k=1}^n phi(0)^k S^k M x0||_p for n = 1..n_max.

    Only the K blocks that move at step n are touched, so the cost is O(n_max K m).
    """
    p = parse_p(p)
    x0 = np.asarray(x0, complex)
    if x0.ndim == 1:
        x0 = x0[:, None]
    K, m = x0.shape
    if m != system.m:
        raise ShapeMismatch(f"blocks of size {m}, system has m={system.m}")
    _check_invertible(system.A0)
    phi0 = complex(system.phi(0.0))
    y = x0 @ (system.A1 @ np.linalg.inv(system.A0)).T  # M x0
    W = np.zeros((K + n_max + 1, m), complex)
    settled = 0.0  # p-th power sum (or max) over blocks that no longer change
    norms = np.empty(n_max)
    w = 1.0 + 0j
    for n in range(1, n_max + 1):
        w *= phi0
        W[n : n + K] += w * y
        # block n-1 is final once step n has been added
        b = float(np.linalg.norm(W[n - 1]))
        if p == np.inf:
            settled = max(settled, b)
            live = float(_block_norms(W[n : n + K]).max())
            total = max(settled, live)
        else:
            settled += b**p
            total = (settled + float(np.sum(_block_norms(W[n : n + K]) ** p))) ** (1.0 / p)
        norms[n - 1] = total / n
    ns = np.arange(1, n_max + 1)
    tail = ns >= max(1, n_max // 10)
    first = norms[0] if norms[0] > 0 else 1.0
    if np.all(norms[tail] <= 1e-14 * first):
        return CesaroResult(ns, norms, -np.inf, "decays-to-0")
    pos = tail & (norms > 0)
    slope = float(np.polyfit(np.log(ns[pos]), np.log(norms[pos]), 1)[0])
    if slope <= -0.9:
        cls = "O(1/n)"
    elif slope >= -0.05 and norms[-1] >= 0.9 * norms[tail][0]:
        cls = "stagnates"
    else:
        cls = "decays-to-0"
    return CesaroResult(ns, norms, slope, cls)


# ---------------------------------------------------------------------------
# kernel projection of circulant truncations


def _range_basis(M, tol=1e-10):
    u, s, _ = np.linalg.svd(M)
    r = int(np.sum(s > tol * max(s[0], 1e-300)))
    return u[:, :r]


def kernel_projection(system: SystemPair, x, tol: float = 1e-9) -> np.ndarray:
    """Projection onto Ker A_N along Ran A_N for the circulant truncation; x has shape (N, m)."""
    x = np.asarray(x, complex)
    if x.ndim != 2 or x.shape[1] != system.m:
        raise ShapeMismatch(f"x must have shape (N, {system.m})")
    _check_invertible(system.A0)
    d1 = rat_derivs_at_zero(system.phi, 1)[1]
    if abs(d1) < 1e-12:
        raise PhiPrimeZero("phi'(0) = 0")
    A0inv = np.linalg.inv(system.A0)
    K = system.A1 @ A0inv
    Qx = (x @ K.T).mean(axis=0)
    U = _range_basis(A0inv @ system.A1)
    c, *_ = np.linalg.lstsq(K @ U, Qx, rcond=None)
    res = np.linalg.norm(K @ U @ c - Qx)
    if res > tol * max(1.0, np.linalg.norm(Qx)):
        raise RangeInconsistent(f"Qx not in the range of A1 A0^-1 on Ran(A0^-1 A1): residual {res:.2e}")
    y = U @ c
    return np.tile(y, (x.shape[0], 1))


def apply_circulant(system: SystemPair, x) -> np.ndarray:
    x = np.asarray(x, complex)
    return x @ system.A0.T + np.roll(x, 1, axis=0) @ system.A1.T


# ---------------------------------------------------------------------------
# power-boundedness of B = eps A_N + I


@dataclass(frozen=True, eq=False)
class PowerBound:
    sup: float
    n: np.ndarray
    norms: np.ndarray
    stable: bool
    p: object
    exact: bool


def power_eps_max(system: SystemPair) -> float:
    lam = eigvals(system.A0)
    if np.any(lam.real >= 0):
        raise EpsTooLarge("A0 has eigenvalues outside the open left half-plane")
    return float(np.min(-2 * lam.real / np.abs(lam) ** 2))


def _trend_stable(norms, n_max) -> bool:
    cut = max(1, n_max // 10)
    early = float(np.max(norms[:cut]))
    late = float(np.max(norms))
    return late <= 1.01 * early


def power_bound_check(system: SystemPair, N: int, eps: float, n_max: int = 10_000, p=2, seed: int = 0) -> PowerBound:
    p = parse_p(p)
    em = power_eps_max(system)
    if not 0 < eps < em:
        raise EpsTooLarge(f"eps={eps} outside (0, {em})")
    m = system.m
    G = np.eye(m)[None] + eps * symbol_blocks(system, roots_of_unity(N))
    if p == 2:
        P = np.broadcast_to(np.eye(m, dtype=complex), G.shape).copy()
        logscale = np.zeros(N)
        norms = np.empty(n_max)
        for n in range(1, n_max + 1):
            P = P @ G
            nn = _spec2(P)
            big = nn > 1e100
            if big.any():
                P[big] /= nn[big][:, None, None]
                logscale[big] += np.log(nn[big])
                nn = _spec2(P)
            norms[n - 1] = float(np.max(np.exp(np.log(np.maximum(nn, 1e-300)) + logscale)))
        ns = np.arange(1, n_max + 1)
        return PowerBound(float(norms.max()), ns, norms, _trend_stable(norms, n_max), p, True)
    # p in {1, inf}: iterate the first block column of B^n directly
    C = np.zeros((N, m, m), complex)
    C[0] = np.eye(m)
    B0 = np.eye(m) + eps * system.A0
    B1 = eps * system.A1
    rng = np.random.default_rng(seed)
    if m == 1:
        ns = np.arange(1, n_max + 1)
    else:
        ns = np.unique(np.concatenate([np.round(np.logspace(0, np.log10(n_max), 200)).astype(int), [n_max]]))
    want = set(ns.tolist())
    norms = []
    for n in range(1, n_max + 1):
        C = B0 @ C + B1 @ np.roll(C, 1, axis=0)
        if n in want:
            norms.append(block_norm_bracket(C, p, rng)[1])
    norms = np.array(norms)
    early = norms[ns <= max(1, n_max // 10)].max()
    return PowerBound(float(norms.max()), ns, norms, bool(norms.max() <= 1.01 * early), p, m == 1)
