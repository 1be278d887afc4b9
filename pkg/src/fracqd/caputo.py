r"""Time-domain integration of the fractional Schrödinger equation.

The Caputo derivative is discretised with the L1 scheme on a uniform mesh,

.. math::

    \partial_t^\alpha u(t_n) \approx \frac{\Delta t^{-\alpha}}{\Gamma(2-\alpha)}
    \sum_{j=0}^{n-1} b_j\,(u_{n-j} - u_{n-j-1}),
    \qquad b_j = (j+1)^{1-\alpha} - j^{1-\alpha},

and each step of :math:`(i\hbar)^\alpha \partial_t^\alpha\psi = H\psi` is
solved implicitly for :math:`\psi_n`. The full history is kept, so a run of
``N`` steps costs :math:`O(N^2)` vector updates.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg, signal

from fracqd.errors import InsufficientPoints, LinearSolveFailure, StabilityGuardTripped
from fracqd.mlf import as_alpha, mittag_leffler
from fracqd.states import EvolutionTrace, WaveFunction, measure

__all__ = [
    "CaputoSolver",
    "EigenmodeProblem",
    "caputo_apply",
    "caputo_apply_all",
    "convergence_order",
    "fit_order",
    "l1_weights",
    "solve",
]

STABILITY_LIMIT = 10.0


def l1_weights(alpha, n: int) -> np.ndarray:
    """L1 weights ``b_0 .. b_{n-1}``."""
    a = as_alpha(alpha)
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(n, dtype=float)
    b = (j + 1.0) ** (1.0 - a) - j ** (1.0 - a)
    b[0] = 1.0  # 0**0 would make this 0 at alpha = 1
    return b


def caputo_apply(u, alpha, dt: float) -> complex:
    """L1 approximation of the Caputo derivative at the last node of ``u``.

    ``u[j]`` is the value at ``t_j = j * dt``.
    """
    a = as_alpha(alpha)
    u = np.asarray(u)
    if u.size < 2:
        raise ValueError("need at least two samples")
    n = u.size - 1
    b = l1_weights(a, n)
    du = np.diff(u)[::-1]
    return dt**-a / math.gamma(2.0 - a) * np.dot(b, du)


def caputo_apply_all(u, alpha, dt: float) -> np.ndarray:
    """L1 derivative at every node ``t_1 .. t_N`` at once (FFT convolution)."""
    a = as_alpha(alpha)
    u = np.asarray(u)
    if u.size < 2:
        raise ValueError("need at least two samples")
    du = np.diff(u)
    b = l1_weights(a, du.size)
    if np.iscomplexobj(du):
        conv = signal.fftconvolve(b, du.real)[: du.size] + 1j * signal.fftconvolve(b, du.imag)[: du.size]
    else:
        conv = signal.fftconvolve(b, du)[: du.size]
    return dt**-a / math.gamma(2.0 - a) * conv


class CaputoSolver:
    """Stepper holding the complete solution history.

    Parameters
    ----------
    h : (M, M) array
        Hamiltonian matrix.
    psi0 : (M,) array
        Initial state.
    stability_limit : float
        Upper bound on ``dt**alpha * ||H|| / hbar**alpha``. The implicit
        scheme does not blow up beyond it, but its accuracy degrades, so
        the run is refused rather than returning a meaningless answer.
    """

    def __init__(self, h, psi0, alpha, hbar: float, dt: float, n_steps: int,
                 stability_limit: float = STABILITY_LIMIT):
        a = as_alpha(alpha)
        if not dt > 0:
            raise ValueError("dt must be positive")
        if not hbar > 0:
            raise ValueError("hbar must be positive")
        h = np.asarray(h)
        psi0 = np.asarray(psi0, dtype=complex)
        if h.shape != (psi0.size, psi0.size):
            raise ValueError(f"Hamiltonian shape {h.shape} does not match state size {psi0.size}")
        h_norm = np.linalg.norm(h, 2)
        guard = dt**a * h_norm / hbar**a
        if guard > stability_limit:
            raise StabilityGuardTripped(
                f"dt^alpha*||H||/hbar^alpha = {guard:.3g} exceeds {stability_limit:g}; reduce dt"
            )
        self.alpha = a
        self.hbar = hbar
        self.dt = dt
        self.c = cmath.exp(a * cmath.log(1j * hbar)) * dt**-a / math.gamma(2.0 - a)
        self.weights = l1_weights(a, max(n_steps, 1))
        m = psi0.size
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            try:
                self._lu = linalg.lu_factor(self.c * np.eye(m) - h)
            except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError) as exc:
                raise LinearSolveFailure(f"step matrix cannot be factorised: {exc}") from exc
        self.history = np.zeros((n_steps + 1, m), dtype=complex)
        self.diffs = np.zeros((n_steps + 1, m), dtype=complex)
        self.history[0] = psi0
        self.steps_done = 0

    def _advance(self, n: int) -> np.ndarray:
        # psi_n from psi_0 .. psi_{n-1}
        rhs = self.history[n - 1].copy()
        if n > 1:
            rhs -= self.weights[1:n] @ self.diffs[n - 1 : 0 : -1]
        out = linalg.lu_solve(self._lu, self.c * rhs)
        if not np.all(np.isfinite(out)):
            raise LinearSolveFailure(f"non-finite state at step {n}")
        return out

    def step(self) -> np.ndarray:
        n = self.steps_done + 1
        if n >= self.history.shape[0]:
            raise IndexError("solver capacity exhausted")
        psi = self._advance(n)
        self.history[n] = psi
        self.diffs[n] = psi - self.history[n - 1]
        self.steps_done = n
        return psi

    def recompute(self, n: int) -> np.ndarray:
        """Rebuild ``psi_n`` from the stored history before it."""
        if not 1 <= n <= self.steps_done:
            raise IndexError(f"step {n} has not been computed")
        return self._advance(n)

    def run(self) -> np.ndarray:
        while self.steps_done < self.history.shape[0] - 1:
            self.step()
        return self.history


def solve(
    h,
    psi0: WaveFunction,
    alpha,
    hbar: float,
    dt: float,
    t_end: float,
    output_times: Sequence[float] | None = None,
    observables: Sequence[str] = ("x2",),
    stability_limit: float = STABILITY_LIMIT,
) -> EvolutionTrace:
    """Integrate from 0 to ``t_end`` with step ``dt``.

    Snapshots are taken at the mesh nodes nearest to ``output_times``
    (every node when omitted).
    """
    if not 0 < dt <= t_end:
        raise ValueError("need 0 < dt <= t_end")
    n_steps = int(round(t_end / dt))
    solver = CaputoSolver(h, psi0.samples, alpha, hbar, dt, n_steps, stability_limit)
    states = solver.run()
    if output_times is None:
        idx = np.arange(n_steps + 1)
    else:
        idx = np.unique(np.clip(np.rint(np.asarray(output_times) / dt).astype(int), 0, n_steps))
        idx = np.union1d([0], idx)
    snaps = [psi0] + [psi0.with_samples(states[i]) for i in idx[1:]]
    return EvolutionTrace(idx * dt, snaps, [s.norm() for s in snaps], measure(snaps, observables, psi0))


def fit_order(dts, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(dt)``."""
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if dts.size < 3:
        raise InsufficientPoints(f"need at least 3 step sizes, got {dts.size}")
    if np.any(errors <= 0) or np.any(dts <= 0):
        raise ValueError("step sizes and errors must be positive")
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])


@dataclass(frozen=True)
class EigenmodeProblem:
    """Single-eigenmode test problem with a known Mittag-Leffler solution.

    A Dirichlet box of ``n`` interior nodes is sized so that its discrete
    ground level is exactly ``lam``; the initial state is that ground mode,
    whose amplitude then evolves as ``E_alpha(lam [t/(i hbar)]^alpha)``.
    """

    lam: float
    alpha: float
    hbar: float = 1.0
    t_end: float = 1.0
    n: int = 8

    def box(self):
        theta = math.pi / (2 * (self.n + 1))
        dx = self.hbar * math.sin(theta) * math.sqrt(2.0 / self.lam)
        length = (self.n + 1) * dx
        kin = self.hbar**2 / (2.0 * dx * dx)
        h = np.diag(np.full(self.n, 2.0 * kin)) - kin * (np.eye(self.n, k=1) + np.eye(self.n, k=-1))
        i = np.arange(1, self.n + 1)
        ground = np.sin(math.pi * i / (self.n + 1))
        ground /= math.sqrt(np.sum(ground**2) * dx)
        return h, WaveFunction(ground, 0.0, length)

    def exact_amplitude(self, t=None) -> complex:
        t = self.t_end if t is None else t
        z = self.lam * cmath.exp(self.alpha * cmath.log(t / (1j * self.hbar)))
        return mittag_leffler(self.alpha, z).value

    def amplitude(self, dt: float) -> complex:
        h, psi0 = self.box()
        trace = solve(h, psi0, self.alpha, self.hbar, dt, self.t_end, [self.t_end], observables=())
        return psi0.inner(trace.snapshots[-1])

    def error(self, dt: float) -> float:
        exact = self.exact_amplitude()
        return abs(self.amplitude(dt) - exact) / abs(exact)


def convergence_order(problem, dts: Sequence[float]) -> float:
    """Observed order of accuracy; ``problem.error(dt)`` supplies the errors."""
    if len(dts) < 3:
        raise InsufficientPoints(f"need at least 3 step sizes, got {len(dts)}")
    return fit_order(dts, [problem.error(dt) for dt in dts])
