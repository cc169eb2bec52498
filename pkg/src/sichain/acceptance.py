"""Desk-scale acceptance checks, one function per criterion.

Each check returns a CriterionResult; ``run`` evaluates a selection and is
shared by ``sichain verify`` and the test suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import models
from .charfun import verify_char
from .monotone import Verdict, cm_certify, ind_chain, tm_certify, tm_coeffs, tm_rescale
from .ratfun import Poly, RatFun
from .semigroup import (
    apply_circulant,
    circulant_exp,
    decay_curves,
    fit_rate,
    cesaro_norms,
    kernel_projection,
    laurent_decay,
    log_grid,
    power_bound_check,
    power_eps_max,
    sup_over_N,
    _spec2,
)
from .spectra import (
    circulant_matrix,
    circulant_resolvent_apply,
    circulant_spectrum,
    growth_param,
    resolvent_bracket,
    roots_of_unity,
    set_distance,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  [{self.number:2d}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _cm_gallery():
    return {k: s for k, s in models.gallery().items() if cm_certify(s.phi).verdict == Verdict.CERTIFIED}


# 1 ---------------------------------------------------------------------------
def characteristic_extraction(seed: int = 0) -> CriterionResult:
    worst_res = 0.0
    worst_coef = 0.0
    r = models.robot()
    worst_coef = max(worst_coef, _coef_err(r.phi, [1.0], [1.0, 1.0]))
    worst_res = max(worst_res, verify_char(r))
    rng = np.random.default_rng(seed)
    params = [(6.0, 11.0, 6.0)]
    for a, b, c in [(1, 1, 1), (2, 1, 1), (0.5, 1, 1)]:
        params.append(((a * a + b * b) * c, a * a + b * b + 2 * a * c, 2 * a + c))
    params += [tuple(rng.uniform(0.5, 5.0, 3)) for _ in range(5)]
    for a0, a1, a2 in params:
        s = models.platoon(a0, a1, a2)
        worst_coef = max(worst_coef, _coef_err(s.phi, [a0], [a0, a1, a2, 1.0]))
        worst_res = max(worst_res, verify_char(s))
    ok = worst_res <= 1e-9 and worst_coef <= 1e-10
    return CriterionResult(
        1, "characteristic extraction", ok,
        f"{1 + len(params)} systems, max verify residual {worst_res:.1e}, max coefficient error {worst_coef:.1e}",
        values={"residual": worst_res, "coef_err": worst_coef},
    )


def _coef_err(phi: RatFun, num, den) -> float:
    want = RatFun(Poly(num), Poly(den))
    e = 0.0
    for got, ref in ((phi.num.coeffs, want.num.coeffs), (phi.den.coeffs, want.den.coeffs)):
        if len(got) != len(ref):
            return np.inf
        e = max(e, float(np.max(np.abs(got - ref)) / max(1.0, np.max(np.abs(ref)))))
    return e


# 2 ---------------------------------------------------------------------------
def monotonicity_boundary() -> CriterionResult:
    vals = [0.25 * k for k in range(1, 9)]
    mismatches = []
    t0 = time.perf_counter()
    for a in vals:
        for c in vals:
            phi = models.platoon_pair(a, 1.0, c).phi
            cm = cm_certify(phi).verdict
            tm = tm_certify(phi).verdict
            if a > c:
                ok = cm == Verdict.CERTIFIED and tm == Verdict.CERTIFIED
            elif a == c:
                ok = cm in (Verdict.CERTIFIED, Verdict.INCONCLUSIVE) and tm == Verdict.REFUTED_AT_TESTED_EPS
            else:
                ok = cm == Verdict.REFUTED and tm == Verdict.REFUTED_AT_TESTED_EPS
            if not ok:
                mismatches.append((a, c, cm.value, tm.value))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt <= 60.0
    return CriterionResult(
        2, "monotonicity boundary", ok,
        f"64 (a,c) pairs, {len(mismatches)} mismatches, sweep {dt:.1f}s (limit 60s)",
        values={"mismatches": mismatches, "sweep_seconds": dt},
    )


# 3 ---------------------------------------------------------------------------
def tm_coefficients() -> CriterionResult:
    phi = models.robot().phi
    c = tm_coeffs(phi, 0.5, 100)
    n = np.arange(101)
    err_formula = float(np.max(np.abs(c.a - 0.5 ** (n + 1))))
    direct = tm_coeffs(phi, 0.5, 200).a
    rescaled = tm_rescale(tm_coeffs(phi, 1.0, 200).a, 0.5)
    err_rescale = float(np.max(np.abs(direct - rescaled)))
    sum_err = abs(tm_coeffs(phi, 0.5, 400).total - 1.0)
    ok = err_formula <= 1e-12 and err_rescale <= 1e-10 and sum_err <= 1e-9
    return CriterionResult(
        3, "TM coefficients", ok,
        f"|a_n - 2^-(n+1)| {err_formula:.1e}, rescale two-path {err_rescale:.1e}, |sum a_n - 1| {sum_err:.1e}",
        values={"formula": err_formula, "rescale": err_rescale, "sum": sum_err},
    )


# 4 ---------------------------------------------------------------------------
def growth_parameter() -> CriterionResult:
    got = {k: growth_param(s.phi) for k, s in _cm_gallery().items()}
    quartic = growth_param(RatFun(Poly([2.0]), Poly([2.0, 2.0, 1.0])))
    ok = all(v == 2 for v in got.values()) and quartic == 4 and len(got) >= 4
    return CriterionResult(
        4, "growth parameter", ok,
        f"n_phi over {len(got)} CM systems = {sorted(set(got.values()))}, 2/(l^2+2l+2) -> {quartic}",
        values={"gallery": got, "quartic": quartic},
    )


# 5 ---------------------------------------------------------------------------
def circulant_spectra() -> CriterionResult:
    robot = models.robot()
    d_robot = 0.0
    for N in range(2, 65):
        vals, _ = circulant_spectrum(robot, N)
        d_robot = max(d_robot, set_distance(vals, roots_of_unity(N) - 1.0))
    d_dense = 0.0
    level = 0.0
    for s in models.gallery().values():
        for N in range(2, 33):
            vals, _ = circulant_spectrum(s, N)
            d_dense = max(d_dense, set_distance(vals, np.linalg.eigvals(circulant_matrix(s, N))))
            level = max(level, float(np.max(np.abs(s.phi(vals) ** N - 1.0))))
    ok = d_robot <= 1e-10 and d_dense <= 1e-8 and level <= 1e-8
    return CriterionResult(
        5, "circulant spectra", ok,
        f"robot set distance {d_robot:.1e}, block vs dense {d_dense:.1e}, max |phi^N - 1| {level:.1e}",
        values={"robot": d_robot, "dense": d_dense, "level": level},
    )


# 6 ---------------------------------------------------------------------------
def uniform_decay_robot() -> CriterionResult:
    robot = models.robot()
    t = log_grid(1e2, 1e4, 40)
    curves = decay_curves(robot, "circulant", [2**k for k in range(2, 10)], 2, t)
    sup = sup_over_N(curves)
    fit = fit_rate(sup.t, sup.mid, with_log=True)
    c_floor = 4.0 * np.exp(-2 * np.pi**2)
    cN = []
    for N in range(2, 513):
        tN = float(N * N)
        col = circulant_exp(robot, N, [tN])
        S = roots_of_unity(N) - 1.0
        val = float(np.max(np.abs(S * col.blocks[0, :, 0, 0])))
        cN.append(val * np.sqrt(tN))
    c_min = float(min(cN))
    ok = 0.45 <= fit.alpha <= 0.55 and abs(fit.beta) <= 0.2 and c_min >= c_floor
    return CriterionResult(
        6, "uniform decay, circulant robot", ok,
        f"alpha {fit.alpha:.4f}, beta {fit.beta:.4f}; min_N sqrt(t_N)|A_N T_N(t_N)| = {c_min:.3e} >= {c_floor:.3e}",
        values={"alpha": fit.alpha, "beta": fit.beta, "c_min": c_min},
    )


# 7 ---------------------------------------------------------------------------
def onesided_sharpness() -> CriterionResult:
    robot = models.robot()
    Ns = [2, 4, 8, 16, 32, 64]
    t = np.unique(np.concatenate([log_grid(0.1, 200.0, 10), np.array(Ns, float)]))
    worst_lb = np.inf
    worst_eq = 0.0
    nest_viol = 0.0
    for p in (1, np.inf):
        curves = decay_curves(robot, "onesided", Ns, p, t, tol=1e-13)
        for c in curves:
            N = c.N
            closed = t ** (N - 1) / factorial(N - 1) * np.exp(-t)
            pos = closed > 1e-300
            worst_lb = min(worst_lb, float(np.min(c.lower[pos] / closed[pos])))
            i = int(np.flatnonzero(t == N)[0])
            worst_eq = max(worst_eq, abs(c.lower[i] - closed[i]) / closed[i])
        vals = np.array([c.upper for c in curves])
        nest_viol = max(nest_viol, float(np.max(vals[:-1] - vals[1:])))
    ok = worst_lb >= 1 - 1e-9 and worst_eq <= 1e-9 and nest_viol <= 1e-12
    return CriterionResult(
        7, "one-sided robot sharpness", ok,
        f"min ratio to t^(N-1)e^-t/(N-1)! {worst_lb:.12f}, equality at t=N {worst_eq:.1e}, nesting violation {max(nest_viol, 0):.1e}",
        values={"ratio": worst_lb, "equality": worst_eq, "nesting": nest_viol},
    )


# 8 ---------------------------------------------------------------------------
def no_log_rate() -> CriterionResult:
    t = log_grid(1e3, 1e4, 40)
    out = {}
    ok = True
    for name, s in (("robot", models.robot()), ("platoon_from_zeros(1,2,3)", models.platoon_from_zeros(1, 2, 3))):
        c = laurent_decay(s, t)
        scaled = c.mid * np.sqrt(t)
        slope = 0.5 - fit_rate(t, c.mid).alpha
        out[name] = (float(scaled.max()), slope)
        ok &= bool(np.all(np.isfinite(scaled))) and abs(slope) <= 0.05
    detail = ", ".join(f"{k}: max sqrt(t)||AT|| {v[0]:.4f}, slope {v[1]:+.2e}" for k, v in out.items())
    return CriterionResult(8, "no-log TM rate", ok, detail, values=out)


# 9 ---------------------------------------------------------------------------
def uniform_boundedness() -> CriterionResult:
    t = log_grid(1.0, 1e4, 40)
    Ns = [2**k for k in range(2, 9)]
    out = {}
    ok = True
    for name, s in _cm_gallery().items():
        best = np.zeros(len(t))
        for N in Ns:
            E = circulant_exp(s, N, t).blocks
            best = np.maximum(best, _spec2(E).max(axis=1))
        running = np.maximum.accumulate(best)
        early = running[t <= 1e3][-1]
        growth = running[-1] / early - 1.0
        out[name] = (float(running[-1]), float(growth))
        ok &= bool(np.isfinite(running[-1])) and growth <= 0.01
    detail = "; ".join(f"{k} plateau {v[0]:.3f} (+{100 * v[1]:.2f}% last decade)" for k, v in out.items())
    return CriterionResult(9, "uniform semigroup boundedness", ok, detail, values=out)


# 10 --------------------------------------------------------------------------
def cesaro_classification(seed: int = 0) -> CriterionResult:
    robot = models.robot()
    single = cesaro_norms(robot, [[1.0]], 1, 2000)
    diff = cesaro_norms(robot, [[1.0], [-1.0]], 1, 2000)
    e_single = float(np.max(np.abs(single.norms - 1.0)))
    e_diff = float(np.max(np.abs(diff.norms * diff.n - 2.0)))
    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=(6, 3))
    x0[:, 0] -= x0[:, 0].mean()
    plat = cesaro_norms(models.platoon_from_zeros(1, 2, 3), x0, 2, 2000)
    ok = (
        e_single <= 1e-12 and single.classification == "stagnates"
        and e_diff <= 1e-12 and diff.classification == "O(1/n)"
        and plat.exponent <= -0.9
    )
    return CriterionResult(
        10, "Cesaro classification", ok,
        f"e1: max|v_n - 1| {e_single:.1e} ({single.classification}); e1-e2: max|n v_n - 2| {e_diff:.1e} "
        f"({diff.classification}); platoon zero-mean exponent {plat.exponent:.3f}",
        values={"single": e_single, "diff": e_diff, "platoon_exponent": plat.exponent},
    )


# 11 --------------------------------------------------------------------------
def power_boundedness() -> CriterionResult:
    robot = power_bound_check(models.robot(), 64, 0.5, 10_000, p=np.inf)
    e_robot = float(np.max(np.abs(robot.norms - 1.0)))
    plat = models.platoon_from_zeros(1, 2, 3)
    pb = power_bound_check(plat, 64, power_eps_max(plat) / 4, 10_000, p=2)
    ind_ok = True
    checked = []
    for name, s in models.gallery().items():
        cert = tm_certify(s.phi)
        if cert.verdict != Verdict.CERTIFIED:
            continue
        a = tm_coeffs(s.phi, cert.witness[0], 400).a
        lhs, mid = ind_chain(a, 200)
        ind_ok &= bool(np.all(lhs <= mid + 1e-12) and np.all(mid <= 1 + 1e-12))
        checked.append(name)
    ok = e_robot <= 1e-12 and np.isfinite(pb.sup) and pb.stable and ind_ok and len(checked) >= 4
    return CriterionResult(
        11, "power-boundedness", ok,
        f"robot max|‖B^n‖_inf - 1| {e_robot:.1e}; platoon sup‖B^n‖_2 {pb.sup:.4f} stable={pb.stable}; "
        f"convolution-power chain holds on {len(checked)} TM systems: {ind_ok}",
        values={"robot": e_robot, "platoon_sup": pb.sup, "ind_systems": checked},
    )


# 12 --------------------------------------------------------------------------
def resolvent_machinery(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_gap = -np.inf
    for s in (models.robot(), models.platoon_pair(2, 1, 1)):
        poles = [z for z, _ in s.phi.poles()]
        n = 0
        while n < 20:
            lam = complex(rng.uniform(-0.5, 3.0), rng.uniform(-3.0, 3.0))
            if min(abs(lam - z) for z in poles) < 0.2 or abs(s.phi(lam)) >= 0.98:
                continue
            b = resolvent_bracket(s, lam)
            worst_gap = max(worst_gap, abs(b["norm"] - b["centre"]) - b["radius"] * (1 + 1e-9))
            n += 1
    worst_res = 0.0
    for s in models.gallery().values():
        poles = [z for z, _ in s.phi.poles()]
        for N in (3, 8, 16):
            A = circulant_matrix(s, N)
            k = 0
            while k < 5:
                lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
                ph = complex(s.phi(lam))
                if min(abs(lam - z) for z in poles) < 0.1 or abs(1 - ph**N) < 1e-3:
                    continue
                x = rng.normal(size=(N, s.m)) + 1j * rng.normal(size=(N, s.m))
                ref = np.linalg.solve(lam * np.eye(N * s.m) - A, x.ravel())
                got = circulant_resolvent_apply(s, lam, x).ravel()
                worst_res = max(worst_res, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
                k += 1
    ok = worst_gap <= 1e-12 and worst_res <= 1e-8
    return CriterionResult(
        12, "resolvent machinery", ok,
        f"bracket slack max(|‖R‖ - centre| - radius) {worst_gap:.1e}; circulant closed form vs dense {worst_res:.1e}",
        values={"bracket": worst_gap, "circulant": worst_res},
    )


# 13 --------------------------------------------------------------------------
def kernel_projection_check(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    e_pattern = e_kernel = e_idem = 0.0
    for s in (models.platoon_from_zeros(1, 2, 3), models.platoon_pair(2, 1, 1), models.platoon_pair(1, 1, 1)):
        a0, a1 = -s.A0[2, 0].real, -s.A0[2, 1].real
        for N in (4, 16, 64):
            x = rng.normal(size=(N, 3))
            P = kernel_projection(s, x)
            cx = x[:, 0].mean()
            want = np.array([cx, -a0 * cx / a1, 0.0])
            e_pattern = max(e_pattern, float(np.max(np.abs(P - want))))
            e_kernel = max(e_kernel, float(np.linalg.norm(apply_circulant(s, P)) / np.linalg.norm(x)))
            e_idem = max(e_idem, float(np.max(np.abs(kernel_projection(s, P) - P))))
    ok = e_pattern <= 1e-10 and e_kernel <= 1e-9 and e_idem <= 1e-10
    return CriterionResult(
        13, "kernel projection", ok,
        f"pattern error {e_pattern:.1e}, ‖A_N P_N x‖/‖x‖ {e_kernel:.1e}, ‖P_N^2 x - P_N x‖ {e_idem:.1e}",
        values={"pattern": e_pattern, "kernel": e_kernel, "idempotent": e_idem},
    )


CRITERIA = {
    1: characteristic_extraction,
    2: monotonicity_boundary,
    3: tm_coefficients,
    4: growth_parameter,
    5: circulant_spectra,
    6: uniform_decay_robot,
    7: onesided_sharpness,
    8: no_log_rate,
    9: uniform_boundedness,
    10: cesaro_classification,
    11: power_boundedness,
    12: resolvent_machinery,
    13: kernel_projection_check,
}


def run_one(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number]()
    except Exception as exc:  # a crash is a failure, reported not raised
        res = CriterionResult(number, CRITERIA[number].__name__, False, f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run(numbers=None, echo=None) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        r = run_one(k)
        if echo:
            echo(r.line())
        out.append(r)
    return out
