r"""Dilation Hamiltonian :math:`\hat H = -2i\hbar\omega(x\partial_x + 1/2)`.

With :math:`D = -i(x\partial_x + 1/2)` the Hamiltonian is :math:`2\hbar\omega D`
and :math:`e^{-uD}\psi(x) = e^{-u/2}\psi(e^{-u}x)`. Hence

* standard evolution: :math:`\psi(x,t) = e^{-\omega t}\psi_0(xe^{-2\omega t})`,
  with :math:`\langle x^2\rangle` growing as :math:`e^{4\omega t}`;
* semiclassical evolution under :math:`\hat H^2/2`, i.e.
  :math:`e^{-i\tau D^2}` with :math:`\tau = 2\hbar\omega^2 t`, written as a
  Fresnel integral over dilations,

  .. math::

      \psi_{\rm scl}(x,t) = (4\pi i\tau)^{-1/2}\int du\,
          e^{iu^2/4\tau - u/2}\,\psi_0(e^{-u}x).

Tied mode fixes :math:`\omega = 1/(2\hbar)`; then :math:`\tau = t/2\hbar`
and every formula above loses its explicit :math:`\omega`.

Initial states are analytic profiles :math:`P(x)e^{-ax^2}`, because the
semiclassical moment needs them at complex arguments. There
:math:`\psi_0^*` denotes the analytic continuation of
:math:`x \mapsto \overline{\psi_0(x)}`, i.e.
:math:`\psi_0^*(z) = \overline{\psi_0(\bar z)}`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial import hermite, polynomial
from scipy import integrate

from fracqd.errors import ExtrapolationBeyondProfile, IntegralDivergent, QuadratureFailure
from fracqd.fresnel import chirp_segments, chirp_tail
from fracqd.states import WaveFunction, interior_grid

__all__ = [
    "DilationParams",
    "MomentTrace",
    "PolyGaussianProfile",
    "divergence_time",
    "evolve_semiclassical",
    "evolve_standard",
    "gaussian_profile",
    "hermite_gaussian",
    "moment_trace",
    "second_moment_semiclassical",
    "second_moment_standard",
    "semiclassical_decay_rate",
]

# decay rates at or below this are treated as a divergent integral; the
# exact crossing cos(2t/hbar) = 0 is not representable in floating point
DECAY_FLOOR = 1e-12


@dataclass(frozen=True)
class DilationParams:
    """``omega=None`` selects tied mode, ``omega = 1/(2 hbar)``."""

    hbar: float = 1.0
    omega: float | None = None

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def omega_tied(self) -> bool:
        return self.omega is None

    @property
    def omega_eff(self) -> float:
        return 0.5 / self.hbar if self.omega is None else float(self.omega)

    def tau(self, t: float) -> float:
        """Semiclassical time: ``exp(-i H^2 t / 2 hbar) = exp(-i tau D^2)``."""
        return 2.0 * self.hbar * self.omega_eff**2 * t


@dataclass(frozen=True)
class PolyGaussianProfile:
    """``P(z) exp(-a z^2)`` with ``P`` given by ascending coefficients."""

    coeffs: tuple
    a: complex = 1.0

    def __post_init__(self):
        c = tuple(complex(v) for v in np.atleast_1d(self.coeffs))
        if not c:
            raise ValueError("need at least one coefficient")
        if not complex(self.a).real > 0:
            raise ValueError("Re a must be positive for a decaying profile")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "a", complex(self.a))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return polynomial.polyval(z, self.coeffs) * np.exp(-self.a * z * z)

    def reflected(self, z):
        """``conj(psi0(conj(z)))``, the continuation of ``conj(psi0)``."""
        return np.conj(self(np.conj(np.asarray(z, dtype=complex))))

    def taylor(self, k: int) -> np.ndarray:
        """First ``k`` Taylor coefficients at the origin."""
        g = np.zeros(k, dtype=complex)
        for m in range((k + 1) // 2):
            g[2 * m] = (-self.a) ** m / math.factorial(m)
        return polynomial.polymul(self.coeffs, g)[:k]

    def second_moment(self) -> float:
        """``int x^2 |psi0(x)|^2 dx`` from Gaussian moments."""
        dens = polynomial.polymul(self.coeffs, np.conj(self.coeffs))
        r = 2.0 * self.a.real
        total = 0.0
        for k, c in enumerate(dens):
            if k % 2 == 0:
                m = k // 2 + 1  # x^2 * x^k = x^(2m)
                total += c.real * math.gamma(m + 0.5) / r ** (m + 0.5)
        return total

    def norm(self) -> float:
        dens = polynomial.polymul(self.coeffs, np.conj(self.coeffs))
        r = 2.0 * self.a.real
        return math.sqrt(sum(c.real * math.gamma(k // 2 + 0.5) / r ** (k // 2 + 0.5)
                             for k, c in enumerate(dens) if k % 2 == 0))


def gaussian_profile(normalized: bool = False) -> PolyGaussianProfile:
    """``exp(-x^2)/sqrt(pi)`` (unnormalised) or the normalised ``(2/pi)^(1/4) exp(-x^2)``."""
    amp = (2.0 / math.pi) ** 0.25 if normalized else 1.0 / math.sqrt(math.pi)
    return PolyGaussianProfile((amp,), 1.0)


def hermite_gaussian(n: int, normalized: bool = True) -> PolyGaussianProfile:
    """``H_n(x) exp(-x^2/2)``, optionally normalised."""
    if n < 0:
        raise ValueError("n must be non-negative")
    c = hermite.herm2poly([0] * n + [1])
    if normalized:
        c = c / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return PolyGaussianProfile(tuple(c), 0.5)


@dataclass(frozen=True)
class MomentTrace:
    times: np.ndarray
    x2_values: np.ndarray
    diverged_at: float | None = None
    diverged: np.ndarray = field(default=None)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.x2_values, dtype=complex)
        if times.shape != vals.shape:
            raise ValueError("times and x2_values must have the same length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.diverged_at is not None:
            if times.size == 0 or not times[0] <= self.diverged_at <= times[-1]:
                raise ValueError("diverged_at must lie within the time window")
        flags = np.zeros(times.size, bool) if self.diverged is None else np.asarray(self.diverged, bool)
        if flags.shape != times.shape:
            raise ValueError("diverged flags must match times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "x2_values", vals)
        object.__setattr__(self, "diverged", flags)

    def __len__(self):
        return self.times.size


# -- standard evolution ------------------------------------------------------

def _profile_samples(psi0, grid):
    if isinstance(psi0, WaveFunction):
        return psi0
    if grid is None:
        raise ValueError("a profile needs an output grid (x_min, x_max, n)")
    return WaveFunction.from_function(psi0, *grid)


def evolve_standard(params: DilationParams, psi0, t: float, grid=None) -> WaveFunction:
    """``exp(-omega t) psi0(x exp(-2 omega t))`` on a grid.

    ``psi0`` is either a profile (evaluated exactly, ``grid`` required) or a
    :class:`WaveFunction`, which is interpolated linearly with the Dirichlet
    zeros at its end points. Rescaled points leaving ``[x_min, x_max]``
    raise :class:`ExtrapolationBeyondProfile`.
    """
    w = params.omega_eff
    if isinstance(psi0, WaveFunction):
        x = psi0.x
        xs = x * math.exp(-2.0 * w * t)
        if xs.min() < psi0.x_min - 1e-12 or xs.max() > psi0.x_max + 1e-12:
            raise ExtrapolationBeyondProfile(
                f"rescaled grid [{xs.min():.6g}, {xs.max():.6g}] leaves the sampled "
                f"support [{psi0.x_min:.6g}, {psi0.x_max:.6g}]"
            )
        nodes = np.concatenate([[psi0.x_min], x, [psi0.x_max]])
        vals = np.concatenate([[0.0], psi0.samples, [0.0]])
        out = np.interp(xs, nodes, vals.real) + 1j * np.interp(xs, nodes, vals.imag)
        if t == 0:
            out = psi0.samples
        return psi0.with_samples(math.exp(-w * t) * out)
    if grid is None:
        raise ValueError("a profile needs an output grid (x_min, x_max, n)")
    x = interior_grid(*grid)
    return WaveFunction(math.exp(-w * t) * psi0(x * math.exp(-2.0 * w * t)), grid[0], grid[1])


def second_moment_standard(params: DilationParams, psi0, t: float) -> float:
    """``exp(4 omega t) * int y^2 |psi0(y)|^2 dy`` (``exp(2t/hbar)`` in tied mode)."""
    if isinstance(psi0, WaveFunction):
        m0 = float(np.sum(psi0.x**2 * np.abs(psi0.samples) ** 2) * psi0.dx)
    else:
        m0 = psi0.second_moment()
    return math.exp(4.0 * params.omega_eff * t) * m0


# -- semiclassical evolution -------------------------------------------------

_TAYLOR_TERMS = 5
_TAIL_DELTA = 1e-3  # |x| exp(-U) at the start of the Taylor tail


def _left_cutoff(profile: PolyGaussianProfile, x: float) -> float:
    # u below which e^{-u/2} |psi0(e^{-u} x)| < 1e-18
    ra = profile.a.real
    scale = max(1.0, float(np.sum(np.abs(profile.coeffs))))
    r = math.sqrt(45.0 / ra)
    for _ in range(4):
        left = math.log(abs(x) / r)
        deg = len(profile.coeffs) - 1
        need = 42.0 + math.log(scale) + deg * math.log(max(r, 1.0)) + max(0.0, -0.5 * left)
        r = math.sqrt(need / ra)
    return math.log(abs(x) / r)


def _semiclassical_body(profile, xs, beta, h):
    left_cut = np.array([_left_cutoff(profile, x) for x in xs])
    right_cut = np.log(np.abs(xs) / _TAIL_DELTA)
    lo = math.floor(left_cut.min() / h) * h
    hi = math.ceil(right_cut.max() / h) * h
    u = lo + h * np.arange(int(round((hi - lo) / h)) + 1)
    left, right = chirp_segments(u, 0.0, beta)
    f = np.exp(-0.5 * u)[None, :] * profile(np.exp(-u)[None, :] * xs[:, None])
    seg = left[0] * f[:, :-1] + right[0] * f[:, 1:]
    # the body stops at the node at or beyond each point's right cut-off
    stop = np.minimum(np.searchsorted(u, right_cut, side="left"), u.size - 1)
    seg[np.arange(u.size - 1)[None, :] >= stop[:, None]] = 0.0
    body = seg.sum(axis=1)
    big_u = u[stop]
    # e^{-u/2} psi0(e^{-u} x) = sum_k c_k x^k e^{-(k+1/2) u} past the cut-off
    c = profile.taylor(_TAYLOR_TERMS)
    tail = np.zeros(xs.size, dtype=complex)
    for k in range(_TAYLOR_TERMS):
        if c[k] != 0:
            kap = k + 0.5
            tail += c[k] * xs**k * np.exp(-kap * big_u) * chirp_tail(big_u, beta, kap)
    return body + tail


def evolve_semiclassical(params: DilationParams, psi0: PolyGaussianProfile, t: float,
                         grid, quad_tol: float = 1e-8) -> WaveFunction:
    r"""Semiclassical wave function on the interior nodes of ``grid``.

    For :math:`x \ne 0` the integrand amplitude :math:`e^{-u/2}\psi_0(e^{-u}x)`
    is smooth and decays at both ends (super-exponentially to the left,
    like :math:`e^{-u/2}` to the right). It is taken piecewise linear on a
    uniform ``u`` mesh, against which the chirp integrates exactly; the mesh
    is halved with Richardson extrapolation until successive extrapolants
    agree to ``quad_tol``. Past :math:`|x|e^{-u} = 10^{-3}` the Taylor
    series of :math:`\psi_0` turns the tail into closed forms.

    At :math:`x = 0` the integral is not absolutely convergent; its value
    by analytic continuation, :math:`\psi_0(0)e^{i\tau/4}`, is returned.
    """
    if not t > 0:
        raise ValueError("semiclassical evolution needs t > 0")
    tau = params.tau(t)
    beta = 0.25 / tau
    pref = 1.0 / cmath.sqrt(4j * math.pi * tau)
    x = interior_grid(*grid)
    out = np.empty(x.size, dtype=complex)
    zero = x == 0.0
    out[zero] = psi0(0.0) * cmath.exp(0.25j * tau)
    xs = x[~zero]
    if xs.size:
        h = 1.0 / 16
        prev = prev_rich = None
        err = math.inf
        while h >= 1.0 / 4096:
            cur = pref * _semiclassical_body(psi0, xs, beta, h)
            if prev is not None:
                rich = cur + (cur - prev) / 3.0
                if prev_rich is not None:
                    err = float(np.max(np.abs(rich - prev_rich)))
                    if err <= quad_tol:
                        break
                prev_rich = rich
            prev = cur
            h /= 2
        else:
            raise QuadratureFailure(f"dilation integral reached {err:.3g}, requested {quad_tol:.3g}")
        out[~zero] = rich
    return WaveFunction(out, grid[0], grid[1])


# -- semiclassical second moment --------------------------------------------

def _phase(params: DilationParams, t: float) -> float:
    # rotation angle of the moment integrand; t / hbar in tied mode
    return 2.0 * params.tau(t)


def semiclassical_decay_rate(params: DilationParams, profile: PolyGaussianProfile, t: float) -> float:
    r"""Gaussian decay rate of the moment integrand, :math:`2\,\mathrm{Re}(a e^{-2i\theta})`."""
    th = _phase(params, t)
    return 2.0 * (profile.a * cmath.exp(-2j * th)).real


def second_moment_semiclassical(params: DilationParams, profile: PolyGaussianProfile, t: float,
                                decay_floor: float = DECAY_FLOOR, quad_tol: float = 1e-10) -> complex:
    r""":math:`\int y^2\,\psi_0^*(ye^{i\theta})\,\psi_0(ye^{-i\theta})\,dy` with
    :math:`\theta = 2\tau` (``t/hbar`` in tied mode).

    The integrand is a polynomial times :math:`e^{-ry^2}` with the decay rate
    ``r`` from :func:`semiclassical_decay_rate`; ``r <= decay_floor`` raises
    :class:`IntegralDivergent`. Otherwise the integral is done by adaptive
    quadrature.
    """
    rate = semiclassical_decay_rate(params, profile, t)
    if rate <= decay_floor:
        raise IntegralDivergent(
            f"decay rate {rate:.3g} <= {decay_floor:.3g} at t = {t:.12g}: the moment integral diverges"
        )
    th = _phase(params, t)
    up = cmath.exp(1j * th)
    # exponents cancel to -rate*y^2 exactly, so only the polynomial parts remain
    p_left = np.conj(np.asarray(profile.coeffs)) * up ** np.arange(len(profile.coeffs))
    p_right = np.asarray(profile.coeffs) * np.conj(up) ** np.arange(len(profile.coeffs))
    poly = polynomial.polymul(polynomial.polymul(p_left, p_right), [0, 0, 1])

    def f(y):
        return polynomial.polyval(y, poly) * math.exp(-rate * y * y)

    # the integrand is even up to its odd part, which integrates to zero
    half = math.sqrt((45.0 + 2 * len(poly) * abs(math.log(rate))) / rate)
    re, e1 = integrate.quad(lambda y: f(y).real, -half, half, epsabs=quad_tol, epsrel=1e-13, limit=500)
    im, e2 = integrate.quad(lambda y: f(y).imag, -half, half, epsabs=quad_tol, epsrel=1e-13, limit=500)
    value = complex(re, im)
    if e1 + e2 > max(quad_tol, 1e-12 * abs(value)):
        raise QuadratureFailure(f"moment quadrature error {e1 + e2:.3g}")
    return value


def divergence_time(params: DilationParams, profile: PolyGaussianProfile, t_max: float,
                    decay_floor: float = DECAY_FLOOR, tol: float = 1e-13) -> float | None:
    """First ``t`` in ``[0, t_max]`` where the moment integral stops converging."""
    if not t_max >= 0:
        raise ValueError("t_max must be non-negative")

    def bad(t):
        return semiclassical_decay_rate(params, profile, t) <= decay_floor

    if bad(0.0):
        return 0.0
    # the rate is a cosine in theta; sampling at an eighth of its period
    # cannot step over a crossing
    omega_theta = 4.0 * params.tau(1.0)  # d(2 theta)/dt
    n = max(16, int(math.ceil(t_max * omega_theta / (math.pi / 8))))
    grid = np.linspace(0.0, t_max, n + 1)
    for lo, hi in zip(grid[:-1], grid[1:]):
        if bad(hi):
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if bad(mid):
                    hi = mid
                else:
                    lo = mid
            return float(hi)
    return None


def moment_trace(params: DilationParams, profile: PolyGaussianProfile, times: Sequence[float],
                 mode: Literal["standard", "semiclassical"] = "semiclassical",
                 decay_floor: float = DECAY_FLOOR) -> MomentTrace:
    """Second moment over ``times``; divergent rows hold NaN and are flagged."""
    times = np.asarray(times, dtype=float)
    vals = np.empty(times.size, dtype=complex)
    flags = np.zeros(times.size, dtype=bool)
    for i, t in enumerate(times):
        if mode == "standard":
            vals[i] = second_moment_standard(params, profile, t)
        elif mode == "semiclassical":
            try:
                vals[i] = second_moment_semiclassical(params, profile, t, decay_floor)
            except IntegralDivergent:
                vals[i] = complex(math.nan, math.nan)
                flags[i] = True
        else:
            raise ValueError(f"unknown mode {mode!r}")
    at = None
    if mode == "semiclassical" and times.size:
        at = divergence_time(params, profile, times[-1], decay_floor)
        if at is not None and at < times[0]:
            at = None if not flags.any() else float(times[0])
    return MomentTrace(times, vals, at, flags)
