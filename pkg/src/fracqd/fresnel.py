r"""Exact chirp integrals of piecewise-linear data.

Both the comb propagator and the semiclassical dilation integral reduce to
integrals :math:`\int e^{i\beta(u-c)^2} f(u)\,du` with ``f`` smooth. Taking
``f`` piecewise linear between nodes, every segment integral is a closed
form in :math:`\operatorname{erf}`, so the oscillation costs nothing and only
the smoothness of ``f`` sets the accuracy.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import special

__all__ = ["chirp_matrix", "chirp_segments", "chirp_tail"]

_ROT = cmath.exp(1j * math.pi / 4)


def chirp_segments(nodes, centers, beta: float):
    """Per-segment weights ``(left, right)``, each ``(len(centers), len(nodes) - 1)``.

    Segment ``j`` contributes ``left[:, j] * f[j] + right[:, j] * f[j + 1]``.
    """
    nodes = np.asarray(nodes, dtype=float)
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    if not beta > 0:
        raise ValueError("beta must be positive")
    sp = math.sqrt(beta) * np.conj(_ROT)  # sqrt(-i beta)
    h = np.diff(nodes)
    w = nodes[None, :] - centers[:, None]
    erf_w = special.erf(sp * w)
    e_w = np.exp(1j * beta * w * w)
    # zeroth and first moments of each segment, in w
    m0 = 0.5 * math.sqrt(math.pi) / sp * (erf_w[:, 1:] - erf_w[:, :-1])
    m1 = (e_w[:, 1:] - e_w[:, :-1]) / (2j * beta)
    return (w[:, 1:] * m0 - m1) / h, (m1 - w[:, :-1] * m0) / h


def chirp_matrix(nodes, centers, beta: float) -> np.ndarray:
    r"""Weights ``P`` with ``(P @ f)[k] = int exp(i beta (u - c_k)^2) f(u) du``.

    ``f`` is the piecewise-linear interpolant of its values at ``nodes``
    (increasing), zero outside them. ``beta > 0``.
    """
    left, right = chirp_segments(nodes, centers, beta)
    p = np.zeros((left.shape[0], left.shape[1] + 1), dtype=complex)
    p[:, :-1] += left
    p[:, 1:] += right
    return p


def chirp_tail(a, beta: float, kappa):
    r""":math:`\int_0^\infty e^{i\beta(a+u)^2 - \kappa u}\,du` for ``kappa >= 0``.

    Completing the square gives
    :math:`\tfrac12\sqrt{\pi/p}\,e^{i\beta a^2}\operatorname{erfcx}(q/2\sqrt p)`
    with :math:`p = -i\beta` and :math:`q = \kappa - 2i\beta a`. Vectorised
    over ``a`` and ``kappa``.
    """
    a = np.asarray(a, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    sp = math.sqrt(beta) * np.conj(_ROT)
    zeta = (kappa - 2j * beta * a) / (2.0 * sp)
    return 0.5 * math.sqrt(math.pi) / sp * np.exp(1j * beta * a * a) * special.erfcx(zeta)
