"""Built-in acceptance checks behind the ``verify`` subcommand.

Every check is deterministic; the report holds measured values and
thresholds only (no timings), so reruns produce identical files.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from fracqd import caputo, comb, hyperbolic, laplace, mlf, spectral
from fracqd.errors import IntegralDivergent
from fracqd.states import WaveFunction

__all__ = ["Check", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    value: float
    threshold: float
    relation: str  # "<=", ">=", ">" or "in"
    passed: bool


def _le(c, name, value, thr):
    return Check(c, name, float(value), thr, "<=", bool(value <= thr))


def _gt(c, name, value, thr):
    return Check(c, name, float(value), thr, ">", bool(value > thr))


def disk_points(n: int = 200, radius: float = 3.0) -> np.ndarray:
    """Deterministic, evenly spread points in a disk (sunflower pattern)."""
    k = np.arange(n) + 0.5
    r = radius * np.sqrt(k / n)
    th = k * math.pi * (3.0 - math.sqrt(5.0))
    return r * np.exp(1j * th)


def criterion_1():
    z = disk_points()
    half = np.array([mlf.mlf_half_order(v).value for v in z])
    direct = np.exp(z * z) * special.erfc(-z)
    series = np.array([mlf.mlf_series(0.5, v).value for v in z])
    contour = np.array([mlf.mlf_contour(0.5, v, tol=1e-12).value for v in z])
    mutual = max(np.max(np.abs(series - contour)), np.max(np.abs(series - half)),
                 np.max(np.abs(contour - half)))
    z1 = disk_points(50, 20.0)
    e1 = max(abs(mlf.mittag_leffler(1.0, v).value - cmath.exp(v)) / max(1.0, abs(cmath.exp(v))) for v in z1)
    return [
        _le(1, "half_order_vs_exp_erfc", np.max(np.abs(half - direct)), 1e-9),
        _le(1, "series_contour_half_order_agreement", mutual, 1e-8),
        _le(1, "alpha1_vs_exp", e1, 1e-10),
    ]


def criterion_2():
    worst = 0.0
    for lam in (0.25, 0.5, 1.0, 2.0):
        for t in (0.1, 1.0, 10.0):
            val, _ = spectral.operator_form_factor(lam, t, 1.0, quad_tol=1e-10)
            ref = mlf.mlf_half_order(lam * cmath.sqrt(t / 2j)).value
            worst = max(worst, abs(val - ref))
    return [_le(2, "operator_form_vs_mittag_leffler", worst, 1e-6)]


def criterion_3():
    prob = caputo.EigenmodeProblem(lam=0.5, alpha=0.5)
    err = prob.error(1e-3)
    dts = [1 / 64, 1 / 128, 1 / 256, 1 / 512]
    order = caputo.convergence_order(prob, dts)
    return [
        _le(3, "amplitude_rel_error_dt_1e-3", err, 5e-3),
        Check(3, "convergence_order", order, 1.5, "in [1.3, 1.7]", bool(abs(order - 1.5) <= 0.2)),
    ]


def _box(n=64):
    return spectral.discretize_hamiltonian(spectral.HamiltonianSpec("particle_in_box"), 0.0, math.pi, n)


def criterion_4():
    d = _box()
    psi = WaveFunction.from_function(lambda x: np.exp(-4 * (x - 1.2) ** 2) * (1 + 0.5j * x), 0.0, math.pi, 64)
    psi = psi.normalized()
    tr = spectral.evolve_fse_spectral(d, 1.0, psi, np.linspace(0, 10, 41), observables=())
    drift = float(np.max(np.abs(tr.norms - 1.0)))
    ground = d.eigenfunction(0)
    tr2 = spectral.evolve_fse_spectral(d, 0.5, ground, [1.0], observables=())
    return [
        _le(4, "alpha1_norm_drift_t0_10", drift, 1e-8),
        _gt(4, "alpha_half_norm_deviation_t1", abs(tr2.norms[-1] - 1.0), 1e-3),
    ]


def criterion_5():
    rng = np.random.default_rng(20240601)
    pts = np.column_stack([rng.uniform(-3, 3, 50), rng.uniform(0.2, 3, 50), rng.uniform(-3, 3, 50)])
    red = max(abs(comb.delta_green(y, t, yp, comb.DeltaGreenParams(0.0))
                  - complex(comb.free_propagator(y, t, yp))) for y, t, yp in pts)
    group = 0.0
    for y, t1, t2, yp in [(0.3, 0.4, 0.7, -0.5), (1.0, 1.0, 0.5, 0.2), (-2.0, 0.2, 1.3, 1.1)]:
        lhs = comb.free_compose(y, t1, t2, yp, quad_tol=1e-10)
        group = max(group, abs(lhs - complex(comb.free_propagator(y, t1 + t2, yp))))
    return [
        _le(5, "zero_coupling_reduction", red, 1e-10),
        _le(5, "free_group_property", group, 1e-6),
        _le(5, "delta_green_pde_residual", pde_residual(), 1e-3),
    ]


def pde_residual(lam: float = 1.0, hbar: float = 1.0, h: float = 1e-3) -> float:
    """Max of ``|i hbar dG/dt + (hbar^2/2) d2G/dy2|`` away from ``y = 0``."""
    p = comb.DeltaGreenParams(lam, hbar)
    g = lambda y, t, yp: comb.delta_green(y, t, yp, p, quad_tol=1e-13)  # noqa: E731
    worst = 0.0
    for y, t, yp in [(0.5, 1.0, 0.3), (1.5, 0.7, -0.4), (-1.0, 1.5, 0.8), (2.0, 2.0, -1.0)]:
        dt = (g(y, t + h, yp) - g(y, t - h, yp)) / (2 * h)
        dyy = (g(y + h, t, yp) - 2 * g(y, t, yp) + g(y - h, t, yp)) / (h * h)
        worst = max(worst, abs(1j * hbar * dt + 0.5 * hbar * hbar * dyy))
    return worst


def criterion_6():
    worst = 0.0
    simple = True
    for lam in (0.5, 2.0, 4.5):
        for k in (laplace.COMB, laplace.FSE_HALF):
            rep = laplace.locate_pole(k, lam, 1.0)
            target = lam * lam / 2.0
            worst = max(worst, abs(abs(rep.located_pole) - target) / target)
            simple &= rep.order == 1
    return [
        _le(6, "pole_modulus_rel_error", worst, 1e-6),
        Check(6, "all_poles_simple", float(simple), 1.0, "==", simple),
    ]


def criterion_7():
    p = hyperbolic.DilationParams(1.0)
    g = hyperbolic.gaussian_profile()
    t_div = hyperbolic.divergence_time(p, g, 2.0)
    m0 = hyperbolic.second_moment_semiclassical(p, g, 0.0)
    near = hyperbolic.second_moment_semiclassical(p, g, 0.99 * math.pi / 4)
    try:
        hyperbolic.second_moment_semiclassical(p, g, math.pi / 4)
        raised = False
    except IntegralDivergent:
        raised = True
    ts = np.linspace(0.0, 2.0, 41)
    s0 = hyperbolic.second_moment_standard(p, g, 0.0)
    std = max(abs(hyperbolic.second_moment_standard(p, g, t) / (s0 * math.exp(2 * t)) - 1.0) for t in ts)
    return [
        _le(7, "divergence_time_error", abs(t_div - math.pi / 4) if t_div is not None else math.inf, 1e-8),
        Check(7, "divergent_at_pi_over_4", float(raised), 1.0, "==", raised),
        _gt(7, "moment_ratio_at_0.99pi_over_4", abs(near) / abs(m0), 1e3),
        _le(7, "standard_moment_growth_rel_error", std, 1e-10),
    ]


def criterion_8():
    out = []
    for a in (0.25, 0.5, 0.75):
        for fn in ("linear", "quadratic"):
            out.append(_le(8, f"{fn}_alpha_{a}", laplace.verify_caputo_laplace(a, fn), 1e-3))
    for a in (0.25, 0.5, 0.75, 1.0):
        out.append(_le(8, f"const_alpha_{a}", laplace.verify_caputo_laplace(a, "const"), 1e-6))
    out.append(_le(8, "exp_decay_alpha_1.0", laplace.verify_caputo_laplace(1.0, "exp_decay"), 1e-6))
    return out


CRITERIA: dict[int, Callable[[], list[Check]]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_all() -> list[Check]:
    checks: list[Check] = []
    for key in sorted(CRITERIA):
        checks.extend(CRITERIA[key]())
    return checks
