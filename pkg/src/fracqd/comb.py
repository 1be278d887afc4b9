r"""Quantum dynamics on a comb.

Motion along ``x`` happens only on the backbone ``y = 0``; along ``y`` the
particle is free. For an eigenmode of the backbone Hamiltonian with
eigenvalue :math:`\lambda` the ``y`` motion sees the potential
:math:`\lambda\delta(y)` and has the Green function

.. math::

    G_\lambda(y, t; y') = G_0(y, t; y') - \kappa \int_0^\infty du\,
        G_0(|y| + |y'| + u, t; 0)\,e^{-\kappa u}, \qquad \kappa = \lambda/\hbar,

with the free propagator
:math:`G_0 = (2\pi i\hbar t)^{-1/2}\exp(i(y-y')^2/2\hbar t)`. The free
propagator solves :math:`i\hbar\partial_t G = -(\hbar^2/2)\partial_y^2 G`.

The ``u`` integral is done on the ray :math:`u = v e^{i\pi/4}`, where the
chirp turns into a decaying Gaussian. Wave functions along ``y`` are taken
as piecewise linear between grid nodes and zero outside the grid; the free
part is then integrated exactly. For the correction, substituting
:math:`s = |y'| + u` gives

.. math::

    \int dy'\,\psi(y') \int_0^\infty du\, G_0(|y|+|y'|+u)e^{-\kappa u}
      = \sum_\pm \int_0^\infty ds\, G_0(|y|+s)\,\Phi_\pm(s), \qquad
    \Phi_\pm(s) = \int_0^s \psi(\pm y')e^{-\kappa(s-y')}dy',

a chirp against the smooth memory function :math:`\Phi`, which is exact at
the nodes and linear on a refined mesh in between (Richardson-extrapolated
in the refinement). Past the grid :math:`\Phi` decays exponentially and
that tail is summed in closed form.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from fracqd.errors import (
    DivergentTail,
    GridMismatch,
    NonpositiveEigenvalueWarning,
    QuadratureFailure,
)
from fracqd.fresnel import chirp_matrix, chirp_tail
from fracqd.spectral import SpectralDecomposition
from fracqd.states import interior_grid

__all__ = [
    "CombState",
    "DeltaGreenParams",
    "backbone_density",
    "comb_evolve",
    "delta_green",
    "delta_tail",
    "free_compose",
    "free_propagate",
    "free_propagator",
]

log = logging.getLogger(__name__)

_ROT = cmath.exp(1j * math.pi / 4)


@dataclass(frozen=True)
class DeltaGreenParams:
    lam: float
    hbar: float = 1.0

    def __post_init__(self):
        if isinstance(self.lam, complex):
            raise TypeError("lam must be real")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")


@dataclass(frozen=True)
class CombState:
    """Amplitudes ``samples[i, j]`` at ``(x_i, y_j)``.

    ``x`` uses the interior Dirichlet nodes of ``[x_min, x_max]`` (matching
    :class:`SpectralDecomposition`); ``y`` is ``linspace(y_min, y_max, ny)``.
    """

    samples: np.ndarray
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    hbar: float = 1.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.ndim != 2 or s.shape[1] < 2:
            raise ValueError("samples must be a 2D (nx, ny) array with ny >= 2")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("empty grid extent")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def separable(cls, fx, fy, x_min, x_max, nx, y_min, y_max, ny, hbar=1.0) -> CombState:
        x = interior_grid(x_min, x_max, nx)
        y = np.linspace(y_min, y_max, ny)
        return cls(np.outer(fx(x), fy(y)), x_min, x_max, y_min, y_max, hbar)

    @property
    def x(self):
        return interior_grid(self.x_min, self.x_max, self.samples.shape[0])

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, self.samples.shape[1])

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.samples.shape[0] + 1)

    @property
    def dy(self):
        return (self.y_max - self.y_min) / (self.samples.shape[1] - 1)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx * self.dy))

    def with_samples(self, samples) -> CombState:
        return CombState(samples, self.x_min, self.x_max, self.y_min, self.y_max, self.hbar)


def free_propagator(y, t, y_prime, hbar: float = 1.0):
    """Free-particle propagator; ``y`` and ``y_prime`` may be complex arrays."""
    if not np.all(np.asarray(t) > 0):
        raise ValueError("free propagator needs t > 0")
    d = np.asarray(y) - np.asarray(y_prime)
    return np.exp(1j * d * d / (2.0 * hbar * t)) / np.sqrt(2j * np.pi * hbar * t)


def _check_lam(params: DeltaGreenParams):
    if params.lam < 0:
        raise DivergentTail(
            f"lam = {params.lam} < 0: exp(-u*lam/hbar) grows and the u-integral diverges"
        )


def delta_tail(a, t: float, kappa, hbar: float = 1.0):
    r"""Closed form of :math:`\int_0^\infty G_0(a+u, t; 0)e^{-\kappa u}du`.

    Vectorised over ``a`` and ``kappa``; see :func:`fracqd.fresnel.chirp_tail`.
    """
    beta = 1.0 / (2.0 * hbar * t)
    return chirp_tail(a, beta, kappa) / cmath.sqrt(2j * math.pi * hbar * t)


def _tail_rotated(a: float, t: float, kappa: float, hbar: float, quad_tol: float):
    beta = 1.0 / (2.0 * hbar * t)

    def f(v):
        u = v * _ROT
        w = a + u
        return cmath.exp(1j * beta * w * w - kappa * u) * _ROT

    # |f| <= exp(-beta v^2); stop where that is below 1e-18
    v_max = math.sqrt(42.0 / beta)
    re, e1 = integrate.quad(lambda v: f(v).real, 0.0, v_max, epsabs=quad_tol / 4, epsrel=0, limit=400)
    im, e2 = integrate.quad(lambda v: f(v).imag, 0.0, v_max, epsabs=quad_tol / 4, epsrel=0, limit=400)
    return complex(re, im) / cmath.sqrt(2j * math.pi * hbar * t), e1 + e2


def delta_green(y: float, t: float, y_prime: float, params: DeltaGreenParams,
                quad_tol: float = 1e-12) -> complex:
    """Green function of the free particle with a ``lam * delta(y)`` potential."""
    if not t > 0:
        raise ValueError("delta_green needs t > 0")
    _check_lam(params)
    g0 = complex(free_propagator(y, t, y_prime, params.hbar))
    if params.lam == 0:
        return g0
    kappa = params.lam / params.hbar
    tail, err = _tail_rotated(abs(y) + abs(y_prime), t, kappa, params.hbar, quad_tol / kappa)
    if kappa * err > quad_tol:
        raise QuadratureFailure(f"u-integral error {kappa * err:.3g} exceeds {quad_tol:.3g}")
    return g0 - kappa * tail


def free_compose(y: float, t1: float, t2: float, y_prime: float, hbar: float = 1.0,
                 quad_tol: float = 1e-12) -> complex:
    r""":math:`\int G_0(y, t_1; z)\,G_0(z, t_2; y')\,dz` by quadrature.

    The path runs through the stationary point of the combined phase at
    45 degrees, where the integrand decays like a Gaussian.
    """
    z0 = (y * t2 + y_prime * t1) / (t1 + t2)
    width = math.sqrt(2.0 * hbar * t1 * t2 / (t1 + t2))
    v_max = 10.0 * width

    def f(v):
        z = z0 + v * _ROT
        return complex(free_propagator(y, t1, z, hbar) * free_propagator(z, t2, y_prime, hbar)) * _ROT

    re, e1 = integrate.quad(lambda v: f(v).real, -v_max, v_max, epsabs=quad_tol / 4, epsrel=0, limit=200)
    im, e2 = integrate.quad(lambda v: f(v).imag, -v_max, v_max, epsabs=quad_tol / 4, epsrel=0, limit=200)
    if e1 + e2 > quad_tol:
        raise QuadratureFailure(f"composition quadrature error {e1 + e2:.3g} exceeds {quad_tol:.3g}")
    return complex(re, im)


def _free_matrix(y_nodes: np.ndarray, y_out: np.ndarray, t: float, hbar: float) -> np.ndarray:
    # exact integral of G0 against the piecewise-linear interpolant:
    # result = P @ psi_nodes
    beta = 1.0 / (2.0 * hbar * t)
    return chirp_matrix(y_nodes, y_out, beta) / cmath.sqrt(2j * math.pi * hbar * t)


def free_propagate(samples: np.ndarray, y_nodes: np.ndarray, t: float, hbar: float = 1.0) -> np.ndarray:
    """Free evolution along the last axis of ``samples`` (piecewise-linear data)."""
    if not t > 0:
        raise ValueError("free propagation needs t > 0")
    p = _free_matrix(np.asarray(y_nodes, float), np.asarray(y_nodes, float), t, hbar)
    return np.asarray(samples) @ p.T


def _memory_nodes(psi_side, s_nodes, kappa):
    # Phi(s) = int_0^s psi(y') exp(-kappa (s - y')) dy' at the nodes, exact for
    # piecewise-linear psi; psi_side: (modes, nodes), kappa: (modes,)
    h = np.diff(s_nodes)[None, :]
    k = kappa[:, None]
    kh = k * h
    one_m_e = -np.expm1(-kh)  # 1 - exp(-kappa h)
    e = 1.0 - one_m_e
    # int_0^h exp(-kappa (h - tau)) dtau and int_0^h tau exp(-kappa (h - tau)) dtau / h
    i0 = one_m_e / k
    i1 = np.where(kh > 1e-4, 1.0 / k - one_m_e / (k * kh), h * (0.5 - kh / 6.0 + kh * kh / 24.0))
    seg = psi_side[:, :-1] * i0 + (psi_side[:, 1:] - psi_side[:, :-1]) * i1
    phi = np.zeros_like(psi_side)
    for j in range(seg.shape[1]):
        phi[:, j + 1] = e[:, j] * phi[:, j] + seg[:, j]
    return phi


def _correction_side(amps, y, sign, lams, ay, t, hbar, refine):
    # contribution of y' on one side of the backbone (sign = +1 or -1)
    kappa = lams / hbar
    yy = sign * y
    mask = yy > 0
    s_coarse = np.concatenate([[0.0], np.sort(yy[mask])])
    order = np.argsort(yy[mask])
    psi0 = np.array([np.interp(0.0, y, r.real) + 1j * np.interp(0.0, y, r.imag) for r in amps])
    psi_coarse = np.concatenate([psi0[:, None], amps[:, mask][:, order]], axis=1)
    # refine each segment; psi stays linear in between
    frac = np.arange(refine) / refine
    s_fine = np.concatenate([s_coarse[:-1, None] + np.diff(s_coarse)[:, None] * frac, ]).ravel()
    s_fine = np.append(s_fine, s_coarse[-1])
    psi_fine = np.concatenate(
        [
            (psi_coarse[:, :-1, None] * (1 - frac) + psi_coarse[:, 1:, None] * frac).reshape(amps.shape[0], -1),
            psi_coarse[:, -1:],
        ],
        axis=1,
    )
    phi = _memory_nodes(psi_fine, s_fine, kappa)
    p = _free_matrix(s_fine, -ay, t, hbar)  # G0(|y| + s) = G0(s; -|y|)
    body = phi @ p.T
    tail = phi[:, -1:] * delta_tail(ay[None, :] + s_fine[-1], t, kappa[:, None], hbar)
    return body + tail


def _correction(amps, lams, y, t, hbar, quad_tol):
    # -kappa * int dy' psi_lam(y') J(|y| + |y'|) for every mode and output y
    if not y[0] < 0.0 < y[-1]:
        raise ValueError("the y grid must contain the backbone y = 0 in its interior")
    ay = np.abs(y)
    kappa = (lams / hbar)[:, None]
    prev = prev_rich = None
    err = math.inf
    refine = 2
    while refine <= 512:
        cur = -kappa * sum(_correction_side(amps, y, sgn, lams, ay, t, hbar, refine) for sgn in (1.0, -1.0))
        if prev is not None:
            # the refinement error is O(h^2): Richardson, then compare
            # successive extrapolants
            rich = cur + (cur - prev) / 3.0
            if prev_rich is not None:
                err = float(np.max(np.abs(rich - prev_rich)))
                if err <= quad_tol:
                    return rich
            prev_rich = rich
        prev = cur
        refine *= 2
    raise QuadratureFailure(f"memory-integral refinement did not reach {quad_tol:.3g} (last {err:.3g})")


def comb_evolve(decomp: SpectralDecomposition, psi0: CombState, t: float,
                quad_tol: float = 1e-8) -> CombState:
    """Evolve a comb state by time ``t``.

    Each backbone mode gets the free ``y`` propagation plus the delta-potential
    correction. Modes with ``lam <= 0`` are left with the free part only and
    reported through :class:`NonpositiveEigenvalueWarning`.
    """
    if not t > 0:
        raise ValueError("comb_evolve needs t > 0")
    nx = psi0.samples.shape[0]
    if not (
        nx == decomp.n_points
        and math.isclose(psi0.x_min, decomp.x_min, abs_tol=1e-12)
        and math.isclose(psi0.x_max, decomp.x_max, abs_tol=1e-12)
    ):
        raise GridMismatch("comb state x-grid does not match the decomposition")
    hbar = psi0.hbar
    y = psi0.y
    free = free_propagate(psi0.samples, y, t, hbar)

    amps = decomp.modes.conj().T @ psi0.samples * decomp.dx  # (modes, ny)
    weight = np.sum(np.abs(amps) ** 2, axis=1)
    order = np.argsort(weight)[::-1]
    cum = np.cumsum(weight[order])
    keep = np.sort(order[: int(np.searchsorted(cum, (1 - 1e-10) * cum[-1])) + 1]) if cum[-1] > 0 else []
    keep = np.asarray(keep, dtype=int)

    lams = decomp.eigenvalues[keep]
    bad = lams <= 0
    if np.any(bad):
        msg = f"{int(bad.sum())} mode(s) with lam <= 0 excluded from the delta correction: {lams[bad]}"
        log.warning(msg)
        warnings.warn(msg, NonpositiveEigenvalueWarning, stacklevel=2)
    good = keep[~bad]
    out = free
    if good.size:
        corr = _correction(amps[good], decomp.eigenvalues[good], y, t, hbar, quad_tol)
        out = free + decomp.modes[:, good] @ corr
    return psi0.with_samples(out)


def backbone_density(state: CombState) -> np.ndarray:
    """``|Psi(x, 0)|^2`` along the backbone (linear interpolation in ``y``)."""
    y = state.y
    if not y[0] <= 0.0 <= y[-1]:
        return np.zeros(state.samples.shape[0])
    re = np.array([np.interp(0.0, y, row.real) for row in state.samples])
    im = np.array([np.interp(0.0, y, row.imag) for row in state.samples])
    return re * re + im * im
