"""Characteristic function of a coupled pair (A0, A1).

The pair admits a characteristic function when A1 R(l, A0) A1 = phi(l) A1 on
the resolvent set of A0.  Writing adj(l - A0) = sum_k l^k M_k, this holds iff
every A1 M_k A1 is a scalar multiple q_k A1, and then phi = q / p0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoCharacteristicFunction, ZeroA1
from .ratfun import Poly, RatFun, rat_reduce

DEFAULT_TOL = 1e-8


def adjugate_polynomial(A0) -> tuple[list[np.ndarray], Poly]:
    """Faddeev-LeVerrier: matrix coefficients of adj(l I - A0) and p0 = det(l I - A0)."""
    A0 = np.asarray(A0, dtype=complex)
    m = A0.shape[0]
    eye = np.eye(m, dtype=complex)
    M = [None] * m
    c = np.zeros(m + 1, dtype=complex)
    c[m] = 1.0
    M[m - 1] = eye
    for k in range(m - 1, 0, -1):
        c[k] = -np.trace(A0 @ M[k]) / (m - k)
        M[k - 1] = A0 @ M[k] + c[k] * eye
    c[0] = -np.trace(A0 @ M[0]) / m
    return M, Poly(c)


def _frob(a, b) -> complex:
    return complex(np.vdot(b, a))  # <a, b>_F = sum a * conj(b)


def extract_phi(A0, A1, tol: float = DEFAULT_TOL) -> RatFun:
    """Return the reduced characteristic function of (A0, A1).

    Raises NoCharacteristicFunction when some A1 M_k A1 is not proportional to A1.
    """
    A0 = np.asarray(A0, dtype=complex)
    A1 = np.asarray(A1, dtype=complex)
    n1 = np.linalg.norm(A1)
    if n1 == 0:
        raise ZeroA1("A1 must be non-zero")
    M, p0 = adjugate_polynomial(A0)
    q = np.zeros(len(M), dtype=complex)
    for k, Mk in enumerate(M):
        Bk = A1 @ Mk @ A1
        q[k] = _frob(Bk, A1) / (n1 * n1)
        res = np.linalg.norm(Bk - q[k] * A1)
        # residual measured against |A1|^2 (1 + |M_k|), the natural size of B_k
        if res > tol * n1 * max(n1, 1.0) * (1.0 + np.linalg.norm(Mk)):
            raise NoCharacteristicFunction(
                f"A1 M_{k} A1 is not proportional to A1 (residual {res:.3e})"
            )
    # coefficients at roundoff level relative to the largest are noise from the traces
    q[np.abs(q) <= 64 * np.finfo(float).eps * np.max(np.abs(q))] = 0.0
    real = np.all(A0.imag == 0) and np.all(A1.imag == 0)
    num = Poly(q.real if real else q)
    den = Poly(p0.coeffs.real if real else p0.coeffs)
    return rat_reduce(RatFun(num, den))


@dataclass(frozen=True, eq=False)
class SystemPair:
    """Spatially invariant pair with its characteristic data."""

    A0: np.ndarray
    A1: np.ndarray
    p0: Poly
    phi: RatFun
    label: str = ""

    @property
    def m(self) -> int:
        return self.A0.shape[0]

    @classmethod
    def from_matrices(cls, A0, A1, label: str = "", tol: float = DEFAULT_TOL) -> "SystemPair":
        A0 = np.array(A0, dtype=complex, ndmin=2)
        A1 = np.array(A1, dtype=complex, ndmin=2)
        if A0.shape != A1.shape or A0.shape[0] != A0.shape[1]:
            raise ValueError(f"A0 and A1 must be square of equal size, got {A0.shape}, {A1.shape}")
        phi = extract_phi(A0, A1, tol)
        _, p0 = adjugate_polynomial(A0)
        if np.all(A0.imag == 0):
            p0 = Poly(p0.coeffs.real)
        A0.setflags(write=False)
        A1.setflags(write=False)
        sp = cls(A0=A0, A1=A1, p0=p0, phi=phi, label=label)
        res = verify_char(sp)
        if res > tol:
            raise NoCharacteristicFunction(f"extracted phi fails verification (residual {res:.3e})")
        return sp


def verify_char(system: SystemPair, samples: int = 20) -> float:
    """Max relative residual of A1 R(l, A0) A1 - phi(l) A1 over sample points.

    Samples lie on a circle of radius 2 (1 + spectral radius of A0), away from
    every eigenvalue, and use a dense linear solve independent of extraction.
    """
    A0, A1 = system.A0, system.A1
    rho = np.max(np.abs(np.linalg.eigvals(A0)))
    rad = 2.0 * (1.0 + rho)
    n1 = np.linalg.norm(A1)
    eye = np.eye(system.m)
    worst = 0.0
    for th in 2 * np.pi * (np.arange(samples) + 0.5) / samples:
        lam = rad * np.exp(1j * th)
        Z = np.linalg.solve(lam * eye - A0, A1)
        lhs = A1 @ Z
        ph = complex(system.phi(lam))
        scale = max(abs(ph), np.linalg.norm(lhs) / n1, 1e-300)
        worst = max(worst, np.linalg.norm(lhs - ph * A1) / (n1 * scale))
    return float(worst)
