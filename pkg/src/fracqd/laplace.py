r"""Laplace-domain kernels of the comb and half-order Green functions.

For an eigenmode :math:`\lambda` the comb propagator at :math:`y = y' = 0`
and the half-order fractional propagator have the Laplace images

.. math::

    K_{\rm comb}(s) = \frac{1}{\sqrt{i\hbar s}\,(\sqrt{-2is/\hbar} - \lambda/\hbar)},
    \qquad
    K_{\rm fse}(s) = \frac{1}{\sqrt s\,(\sqrt s - \lambda/\sqrt{2i\hbar})}.

Square roots of ``s`` are factored out, :math:`\sqrt{i\hbar s} =
\sqrt{i\hbar}\sqrt s` and :math:`\sqrt{-2is/\hbar} = \sqrt{-2i/\hbar}\sqrt s`,
so both kernels share the single cut along the negative real axis. Their
poles are :math:`s = i\lambda^2/2\hbar` (comb) and :math:`s = -i\lambda^2/2\hbar`
(fse): complex conjugates with equal modulus.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy import integrate

from fracqd.caputo import caputo_apply_all
from fracqd.errors import OnBranchCut, RootFindFailure
from fracqd.mlf import as_alpha

__all__ = [
    "COMB",
    "FSE_HALF",
    "LaplaceKernel",
    "PoleReport",
    "SpectrumRow",
    "comb_kernel",
    "compare_spectra",
    "fse_kernel",
    "locate_pole",
    "verify_caputo_laplace",
]

MAX_NEWTON = 100


def _check_cut(s: complex):
    if s.imag == 0.0 and s.real <= 0.0:
        raise OnBranchCut(f"s = {s} lies on the branch cut (-inf, 0]")


def _comb_consts(lam, hbar):
    return cmath.sqrt(1j * hbar), cmath.sqrt(-2j / hbar), lam / hbar


def comb_kernel(s: complex, lam: float, hbar: float = 1.0) -> complex:
    s = complex(s)
    _check_cut(s)
    a, c, k = _comb_consts(lam, hbar)
    r = cmath.sqrt(s)
    return 1.0 / (a * r * (c * r - k))


def fse_kernel(s: complex, lam: float, hbar: float = 1.0) -> complex:
    s = complex(s)
    _check_cut(s)
    r = cmath.sqrt(s)
    return 1.0 / (r * (r - lam / cmath.sqrt(2j * hbar)))


def _comb_den(s, lam, hbar):
    a, c, k = _comb_consts(lam, hbar)
    r = cmath.sqrt(s)
    return a * (c * s - k * r), a * (c - 0.5 * k / r)


def _fse_den(s, lam, hbar):
    k = lam / cmath.sqrt(2j * hbar)
    r = cmath.sqrt(s)
    return s - k * r, 1.0 - 0.5 * k / r


@dataclass(frozen=True)
class LaplaceKernel:
    """A kernel with its denominator ``den(s) -> (value, derivative)``."""

    evaluator: Callable[[complex, float, float], complex]
    kind: Literal["comb", "fse_half"]
    documented_pole: Callable[[float, float], complex]
    denominator: Callable[[complex, float, float], tuple]
    branch_points: tuple = (0j,)

    def __call__(self, s, lam, hbar=1.0):
        return self.evaluator(s, lam, hbar)


COMB = LaplaceKernel(comb_kernel, "comb", lambda lam, hbar: 1j * lam * lam / (2.0 * hbar), _comb_den)
FSE_HALF = LaplaceKernel(fse_kernel, "fse_half", lambda lam, hbar: -1j * lam * lam / (2.0 * hbar), _fse_den)


@dataclass(frozen=True)
class PoleReport:
    located_pole: complex
    residue_estimate: complex
    match_error: float
    order: int
    iterations: int

    def __post_init__(self):
        if not self.match_error >= 0:
            raise ValueError("match_error must be non-negative")


def _newton(den, guess, lam, hbar, tol=1e-15):
    s = complex(guess)
    f, df = den(s, lam, hbar)
    for it in range(1, MAX_NEWTON + 1):
        if abs(f) <= tol * max(1.0, abs(s)):
            return s, it - 1
        if df == 0:
            raise RootFindFailure(f"zero derivative at s = {s}")
        step = f / df
        damp = 1.0
        while True:
            cand = s - damp * step
            if not (cand.imag == 0.0 and cand.real <= 0.0):
                fc, dfc = den(cand, lam, hbar)
                if abs(fc) < abs(f):
                    break
            damp *= 0.5
            if damp < 1e-10:
                raise RootFindFailure(f"damped Newton stalled at s = {s}, |den| = {abs(f):.3g}")
        s, f, df = cand, fc, dfc
    if abs(f) <= 1e-12 * max(1.0, abs(s)):
        return s, MAX_NEWTON
    raise RootFindFailure(f"no root after {MAX_NEWTON} iterations (|den| = {abs(f):.3g})")


def _circle(kernel, s0, lam, hbar, n=256):
    rho = 0.1 * abs(s0)
    th = 2.0 * np.pi * np.arange(n) / n
    z = rho * np.exp(1j * th)
    k = np.array([kernel(s0 + zz, lam, hbar) for zz in z])
    residue = complex(np.mean(k * z))  # (1/2 pi i) oint K ds, trapezoid
    # winding number of K around the circle: -1 for a simple pole
    dphi = np.angle(np.roll(k, -1) / k)
    winding = int(round(dphi.sum() / (2.0 * np.pi)))
    return residue, -winding


def locate_pole(kernel: LaplaceKernel, lam: float, hbar: float = 1.0, guess: complex | None = None) -> PoleReport:
    """Root of the kernel denominator by damped Newton from the documented pole
    (or ``guess``), with residue and order from a circle of radius ``0.1|s0|``."""
    if lam == 0:
        raise ValueError("lam must be non-zero")
    documented = kernel.documented_pole(lam, hbar)
    s0, its = _newton(kernel.denominator, documented if guess is None else guess, lam, hbar)
    if abs(s0) < 1e-14:
        raise RootFindFailure("Newton converged to the branch point s = 0")
    residue, order = _circle(kernel, s0, lam, hbar)
    if order < 1:
        raise RootFindFailure(f"denominator root {s0} is not a pole on the principal sheet")
    return PoleReport(s0, residue, abs(s0 - documented), order, its)


class SpectrumRow(NamedTuple):
    lam: float
    comb_pole: complex
    fse_pole: complex
    moduli_match: bool
    conjugate_match: bool


def compare_spectra(decomp, hbar: float | None = None, rtol: float = 1e-6) -> list[SpectrumRow]:
    """Pole pair for every eigenvalue of ``decomp`` (or an iterable of eigenvalues).

    ``moduli_match`` compares ``|s|`` at relative ``rtol``; ``conjugate_match``
    reports whether the comb pole is the conjugate of the fse pole.
    """
    if hasattr(decomp, "eigenvalues"):
        lams = np.asarray(decomp.eigenvalues, float)
        hbar = decomp.hbar if hbar is None else hbar
    else:
        lams = np.asarray(list(decomp), float)
    hbar = 1.0 if hbar is None else hbar
    rows = []
    for lam in lams:
        c = locate_pole(COMB, float(lam), hbar).located_pole
        f = locate_pole(FSE_HALF, float(lam), hbar).located_pole
        scale = max(abs(c), abs(f))
        rows.append(SpectrumRow(
            float(lam), c, f,
            bool(abs(abs(c) - abs(f)) <= rtol * scale),
            bool(abs(c - f.conjugate()) <= rtol * scale),
        ))
    return rows


# -- Laplace identity of the Caputo derivative -------------------------------

_TEST_FUNCTIONS = {
    # u(t), u(0), transform
    "const": (lambda t: np.ones_like(t), 1.0, lambda s: 1.0 / s),
    "linear": (lambda t: t, 0.0, lambda s: 1.0 / s**2),
    "quadratic": (lambda t: t * t, 0.0, lambda s: 2.0 / s**3),
    "exp_decay": (lambda t: np.exp(-t), 1.0, lambda s: 1.0 / (s + 1.0)),
}


def _laplace_of_derivative(u, alpha, dt, t_end, s):
    t = dt * np.arange(int(round(t_end / dt)) + 1)
    vals = u(t)
    d = np.empty_like(vals, dtype=float)
    d[1:] = caputo_apply_all(vals, alpha, dt)
    # the Caputo derivative of a smooth function vanishes at t = 0 for
    # alpha < 1; at alpha = 1 it is u'(0), extrapolated
    d[0] = 2.0 * d[1] - d[2] if alpha == 1.0 else 0.0
    return integrate.trapezoid(d[None, :] * np.exp(-s[:, None] * t[None, :]), t, axis=1)


def verify_caputo_laplace(alpha, test_fn: str, dt: float = 1e-3, t_end: float = 60.0,
                          n_s: int = 10) -> float:
    r"""Max over ``s in [0.5, 5]`` of
    :math:`|\mathcal L[\partial^\alpha u](s) - (s^\alpha\tilde u(s) - s^{\alpha-1}u(0))|`.

    The left side is the numerical transform (trapezoid on ``[0, t_end]``)
    of the L1 derivative, extrapolated in the step from ``dt`` and ``dt/2``
    with the scheme's order ``2 - alpha`` (1 at ``alpha = 1``).
    """
    a = as_alpha(alpha)
    if test_fn not in _TEST_FUNCTIONS:
        raise ValueError(f"unknown test function {test_fn!r}; choose from {sorted(_TEST_FUNCTIONS)}")
    u, u0, tr = _TEST_FUNCTIONS[test_fn]
    s = np.linspace(0.5, 5.0, n_s)
    coarse = _laplace_of_derivative(u, a, dt, t_end, s)
    fine = _laplace_of_derivative(u, a, dt / 2, t_end, s)
    p = 1.0 if a == 1.0 else 2.0 - a
    lhs = fine + (fine - coarse) / (2.0**p - 1.0)
    rhs = s**a * tr(s) - s ** (a - 1.0) * u0
    return float(np.max(np.abs(lhs - rhs)))
