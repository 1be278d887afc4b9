r"""One-parameter Mittag-Leffler function :math:`E_\alpha(z)`.

Three evaluation routes are provided:

* power series :math:`\sum_j z^j / \Gamma(j\alpha + 1)` inside a fixed radius,
* the closed form :math:`E_{1/2}(z) = e^{z^2}\operatorname{erfc}(-z)`,
* inversion of the Laplace image :math:`s^{\alpha-1}/(s^\alpha - z)` on a
  Hankel contour wrapped around the negative real axis, plus the residue of
  the pole :math:`s = z^{1/\alpha}` when it lies on the principal sheet.

All complex powers use the principal branch.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate, special

from fracqd.errors import ContourFailure, MlfOverflow, NonConvergent

__all__ = [
    "FractionalOrder",
    "MlfEvalReport",
    "SERIES_RADIUS",
    "as_alpha",
    "erfc_complex",
    "mittag_leffler",
    "mittag_leffler_array",
    "mlf_contour",
    "mlf_half_order",
    "mlf_series",
]

SERIES_RADIUS = 5.0
MAX_SERIES_TERMS = 10_000

_EPS = np.finfo(float).eps
_MAX_EXP = 709.0  # exp() of anything larger is beyond double range

Method = Literal["series", "half_order_identity", "contour", "exponential"]


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a <= 1.0) or math.isnan(a):
            raise ValueError(f"fractional order must satisfy 0 < alpha <= 1, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def as_alpha(alpha: float | FractionalOrder) -> float:
    """Validate and unwrap a fractional order."""
    if isinstance(alpha, FractionalOrder):
        return alpha.alpha
    return FractionalOrder(alpha).alpha


@dataclass(frozen=True)
class MlfEvalReport:
    value: complex
    method_used: Method
    est_abs_error: float

    def __post_init__(self):
        if not (math.isfinite(self.est_abs_error) and self.est_abs_error >= 0.0):
            raise ValueError(f"invalid error estimate {self.est_abs_error!r}")


def mlf_series(alpha, z: complex, tol: float = 1e-16) -> MlfEvalReport:
    """Sum the defining power series.

    Summation stops at the first term that is both below ``tol`` in modulus
    and smaller than its predecessor. The reported error adds a geometric
    tail bound to an estimate of accumulated rounding, which dominates when
    the terms cancel (negative real ``z`` and small ``alpha``).
    """
    a = as_alpha(alpha)
    z = complex(z)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if abs(z) > SERIES_RADIUS:
        raise ValueError(f"|z| = {abs(z):.6g} exceeds the series radius {SERIES_RADIUS}")
    if z == 0:
        return MlfEvalReport(1.0 + 0.0j, "series", 0.0)

    logr = math.log(abs(z))
    theta = cmath.phase(z)
    re_terms = [1.0]
    im_terms = [0.0]
    abs_sum = 1.0
    prev = 1.0
    for j in range(1, MAX_SERIES_TERMS + 1):
        log_mag = j * logr - math.lgamma(j * a + 1.0)
        if log_mag > 700.0:
            raise NonConvergent(f"series terms for E_{a}({z}) exceed double range at j = {j}")
        mag = math.exp(log_mag)
        re_terms.append(mag * math.cos(j * theta))
        im_terms.append(mag * math.sin(j * theta))
        # exp() turns the absolute rounding of its argument into relative error
        abs_sum += mag * (1.0 + abs(j * logr) + abs(log_mag))
        if mag < tol and mag < prev:
            ratio = mag / prev
            tail = mag * ratio / (1.0 - ratio)
            value = complex(math.fsum(re_terms), math.fsum(im_terms))
            err = tail + 4.0 * _EPS * abs_sum
            return MlfEvalReport(value, "series", err)
        prev = mag
    raise NonConvergent(
        f"series for E_{a}({z}) did not meet the stopping rule in {MAX_SERIES_TERMS} terms"
    )


def erfc_complex(z: complex) -> complex:
    """Complementary error function of a complex argument."""
    return complex(special.erfc(complex(z)))


def mlf_half_order(z: complex) -> MlfEvalReport:
    r"""Evaluate :math:`E_{1/2}(z) = e^{z^2}\operatorname{erfc}(-z)`.

    The product is formed as the Faddeeva function :math:`w(-iz)`, which is
    the same quantity without the intermediate overflow of :math:`e^{z^2}`.
    """
    z = complex(z)
    if z == 0:
        return MlfEvalReport(1.0 + 0.0j, "half_order_identity", 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        value = complex(special.wofz(-1j * z))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise MlfOverflow(f"E_1/2({z}) overflows double precision (Re z^2 = {(z * z).real:.6g})")
    return MlfEvalReport(value, "half_order_identity", 1e-13 * max(1.0, abs(value)))


def _ray_angle(phi: float) -> float:
    # phi = |arg z| / alpha is the angle of the pole z**(1/alpha); keep the
    # rays well away from it
    if abs(phi - math.pi) < 0.125 * math.pi:
        return 0.75 * math.pi
    return math.pi


def mlf_contour(alpha, z: complex, tol: float = 1e-12) -> MlfEvalReport:
    r"""Invert the Laplace image of :math:`E_\alpha` on a Hankel contour.

    The Bromwich line is deformed onto the two rays :math:`\arg s = \pm\theta`
    with :math:`\theta = \pi` (both banks of the branch cut) unless the pole
    :math:`s_0 = z^{1/\alpha}` sits close to the cut, in which case
    :math:`\theta = 3\pi/4` is used instead. With :math:`r = v^{1/\alpha}`
    each ray contributes

    .. math::

        \frac{1}{2\pi i\alpha}\int_0^\infty
        \frac{e^{v^{1/\alpha} e^{i\theta}} e^{i\theta\alpha}}
             {v e^{i\theta\alpha} - z}\,dv,

    an integrand without the :math:`r^{\alpha-1}` endpoint singularity. The
    residue :math:`e^{s_0}/\alpha` is added when the pole lies inside the
    wedge :math:`|\arg s| < \theta`.
    """
    a = as_alpha(alpha)
    if not a < 1.0:
        raise ValueError("contour evaluation requires alpha < 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = complex(z)
    if z == 0:
        return MlfEvalReport(1.0 + 0.0j, "contour", 0.0)

    phi = abs(cmath.phase(z)) / a
    theta = _ray_angle(phi)
    if abs(phi - theta) < 1e-8:
        raise ContourFailure(f"pole of the Laplace image lies on the contour for alpha={a}, z={z}")

    inv_a = 1.0 / a
    if phi < theta:
        s0 = cmath.exp(cmath.log(z) * inv_a)
        if s0.real > _MAX_EXP:
            raise MlfOverflow(f"E_{a}({z}) overflows double precision (pole residue exp({s0.real:.6g}))")
    up = cmath.exp(1j * theta)
    down = up.conjugate()
    up_a = cmath.exp(1j * theta * a)
    down_a = up_a.conjugate()

    def integrand(v):
        r = v**inv_a
        return cmath.exp(r * up) * up_a / (v * up_a - z) - cmath.exp(r * down) * down_a / (
            v * down_a - z
        )

    v_max = (700.0 / abs(math.cos(theta))) ** a
    # the integrand varies on the scale |z| near v = |z|; geometric break
    # points let quad resolve it however small |z| is
    pts = []
    v = abs(z)
    while v < min(1.0, v_max):
        pts.append(v)
        v *= 4.0
    if abs(z) < v_max and abs(z) not in pts:
        pts.append(abs(z))
    pts = sorted(pts) or None
    opts = dict(limit=2000, epsabs=tol / 4, epsrel=0.0, points=pts)
    re, err_re = integrate.quad(lambda v: integrand(v).real, 0.0, v_max, **opts)
    im, err_im = integrate.quad(lambda v: integrand(v).imag, 0.0, v_max, **opts)

    pref = 1.0 / (2j * math.pi * a)
    value = pref * complex(re, im)
    quad_err = abs(pref) * (err_re + err_im)
    if not quad_err <= tol:
        raise ContourFailure(
            f"contour quadrature for E_{a}({z}) reached error {quad_err:.3g} > tol {tol:.3g}"
        )
    s0_mag = 0.0
    if phi < theta:
        s0_mag = abs(s0)
        value += cmath.exp(s0) * inv_a
    if not math.isfinite(abs(value)):
        raise MlfOverflow(f"E_{a}({z}) overflows double precision")
    # rounding in s0 is amplified by exp
    return MlfEvalReport(value, "contour", quad_err + 4.0 * _EPS * abs(value) * (1.0 + s0_mag))


def mittag_leffler(alpha, z: complex, tol: float = 1e-12) -> MlfEvalReport:
    """Evaluate ``E_alpha(z)``, choosing the evaluation route automatically.

    ``alpha == 1`` returns ``exp(z)`` and ``alpha == 1/2`` uses the erfc
    identity. Otherwise the series is tried inside :data:`SERIES_RADIUS` and
    kept only if its error estimate meets ``tol`` relative to ``max(1, |E|)``;
    everything else goes to the contour.
    """
    a = as_alpha(alpha)
    z = complex(z)
    if a == 1.0:
        if z.real > _MAX_EXP:
            raise MlfOverflow(f"exp({z}) overflows double precision")
        value = cmath.exp(z)
        return MlfEvalReport(value, "exponential", 2.0 * _EPS * abs(value))
    if z == 0:
        return MlfEvalReport(1.0 + 0.0j, "series", 0.0)
    if a == 0.5:
        return mlf_half_order(z)
    if abs(z) <= SERIES_RADIUS:
        try:
            rep = mlf_series(a, z)
        except NonConvergent:
            rep = None
        if rep is not None and rep.est_abs_error <= tol * max(1.0, abs(rep.value)):
            return rep
    return mlf_contour(a, z, tol=tol)


def mittag_leffler_array(alpha, z, tol: float = 1e-12) -> np.ndarray:
    """Elementwise :func:`mittag_leffler` over an array of arguments."""
    a = as_alpha(alpha)
    z = np.asarray(z, dtype=complex)
    if a == 1.0:
        if np.any(z.real > _MAX_EXP):
            raise MlfOverflow("exp overflows double precision for some arguments")
        return np.exp(z)
    if a == 0.5:
        with np.errstate(over="ignore", invalid="ignore"):
            out = special.wofz(-1j * z)
        out = np.where(z == 0, 1.0 + 0.0j, out)
        if not np.all(np.isfinite(out)):
            raise MlfOverflow("E_1/2 overflows double precision for some arguments")
        return out
    flat = [mittag_leffler(a, zz, tol).value for zz in z.ravel()]
    return np.asarray(flat, dtype=complex).reshape(z.shape)
