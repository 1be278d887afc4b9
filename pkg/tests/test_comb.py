from __future__ import annotations

import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from _oracles import chirp_tail_mp, regulated_delta_integral
from fracqd.comb import (
    CombState,
    DeltaGreenParams,
    backbone_density,
    comb_evolve,
    delta_green,
    delta_tail,
    free_compose,
    free_propagate,
    free_propagator,
)
from fracqd.errors import DivergentTail, GridMismatch, NonpositiveEigenvalueWarning, QuadratureFailure
from fracqd.spectral import HamiltonianSpec, SpectralDecomposition, discretize_hamiltonian
from fracqd.verify import pde_residual

BOX = HamiltonianSpec("particle_in_box")


def gx(x):
    return np.exp(-((x - math.pi / 2) ** 2))


def gy(y):
    return np.exp(-(y**2))


# -- free propagator ------------------------------------------------------------

def test_free_propagator_examples():
    assert abs(free_propagator(0.0, 1.0, 0.0) - 1 / cmath.sqrt(2j * math.pi)) <= 1e-15
    v = free_propagator(1.0, 2.0, -1.0, hbar=0.5)
    assert abs(v - cmath.exp(1j * 4 / 2.0) / cmath.sqrt(2j * math.pi)) <= 1e-15


@given(st.floats(-10, 10), st.floats(0.01, 10), st.floats(-10, 10))
def test_free_propagator_modulus(y, t, yp):
    assert abs(abs(free_propagator(y, t, yp)) - 1 / math.sqrt(2 * math.pi * t)) <= 1e-14


def test_free_propagator_needs_positive_time():
    with pytest.raises(ValueError):
        free_propagator(0.0, 0.0, 0.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 2), st.floats(0.2, 2), st.floats(-3, 3))
def test_free_group_property(y, t1, t2, yp):
    lhs = free_compose(y, t1, t2, yp, quad_tol=1e-10)
    assert abs(lhs - complex(free_propagator(y, t1 + t2, yp))) <= 1e-6


def test_free_propagate_gaussian_closed_form():
    y = np.linspace(-12, 12, 2401)
    s, t = 0.5, 0.7
    out = free_propagate(np.exp(-(y**2) / (2 * s)), y, t)
    exact = np.sqrt(s / (s + 1j * t)) * np.exp(-(y**2) / (2 * (s + 1j * t)))
    inner = np.abs(y) < 6
    assert np.max(np.abs(out[inner] - exact[inner])) <= 1e-4


# -- delta Green function -----------------------------------------------------------

def test_params_validation():
    with pytest.raises(TypeError):
        DeltaGreenParams(1j)
    with pytest.raises(ValueError):
        DeltaGreenParams(1.0, hbar=0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3), st.floats(-3, 3))
def test_zero_coupling_is_free(y, t, yp):
    g = delta_green(y, t, yp, DeltaGreenParams(0.0))
    assert abs(g - complex(free_propagator(y, t, yp))) <= 1e-10


@pytest.mark.parametrize("y, t, yp, lam", [(0.0, 1.0, 0.0, 1.0), (0.5, 0.7, -0.3, 1.0), (1.2, 2.0, 0.4, 0.5)])
def test_delta_green_matches_regulated_quadrature(y, t, yp, lam):
    g = delta_green(y, t, yp, DeltaGreenParams(lam))
    ref = complex(free_propagator(y, t, yp)) - lam * regulated_delta_integral(abs(y) + abs(yp), t, lam)
    assert abs(g - ref) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3), st.floats(-3, 3), st.floats(0.0, 4.0))
def test_delta_green_symmetries(y, t, yp, lam):
    p = DeltaGreenParams(lam)
    g = delta_green(y, t, yp, p)
    assert abs(g - delta_green(yp, t, y, p)) <= 1e-10
    assert abs(g - delta_green(-y, t, -yp, p)) <= 1e-10


def test_negative_coupling_diverges():
    with pytest.raises(DivergentTail):
        delta_green(0.0, 1.0, 0.0, DeltaGreenParams(-0.5))


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_unreachable_tolerance():
    with pytest.raises(QuadratureFailure):
        delta_green(0.3, 1.0, 0.2, DeltaGreenParams(1.0), quad_tol=1e-30)


def test_delta_green_needs_positive_time():
    with pytest.raises(ValueError):
        delta_green(0.0, 0.0, 0.0, DeltaGreenParams(1.0))


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 5), st.floats(0.3, 3), st.floats(0.1, 3))
def test_tail_closed_form(a, t, kappa):
    ref = chirp_tail_mp(a, 1 / (2 * t), kappa) / cmath.sqrt(2j * math.pi * t)
    assert abs(delta_tail(a, t, kappa) - ref) <= 1e-10


def test_pde_residual():
    assert pde_residual() <= 1e-3


# -- comb evolution --------------------------------------------------------------------

@pytest.fixture(scope="module")
def box32():
    return discretize_hamiltonian(BOX, 0.0, math.pi, 32)


def _state(n=32, ny=121, fy=gy):
    return CombState.separable(gx, fy, 0.0, math.pi, n, -6.0, 6.0, ny)


def test_state_validation():
    with pytest.raises(ValueError):
        CombState(np.zeros(5), 0, 1, -1, 1)
    with pytest.raises(ValueError):
        CombState(np.full((4, 4), np.nan), 0, 1, -1, 1)
    with pytest.raises(ValueError):
        CombState(np.zeros((4, 4)), 1, 0, -1, 1)


def test_small_time_limit():
    d = discretize_hamiltonian(BOX, 0.0, math.pi, 16)
    s = _state(16)
    out = comb_evolve(d, s, 1e-3)
    dev = out.with_samples(out.samples - s.samples).norm()
    assert dev <= 1e-2


def _mode_amplitude_oracle(decomp, state, t, k=0):
    """Amplitude of mode ``k`` at y = 0 after time ``t``, by brute force.

    The y data is the piecewise-linear interpolant of the samples, as in the
    library. With s = |y'| + u the correction becomes
    -kappa int_0^inf G0(s) M(s) ds, M(s) = sum over both sides of
    int_0^s h(+-y') exp(-kappa (s - y')) dy'. M is built by cumulative
    trapezoid and the s-integral by Simpson, on a mesh aligned with the
    y nodes so that every kink of h falls on a panel boundary.
    """
    lam = decomp.eigenvalues[k]
    kappa = lam
    y = state.y
    c = decomp.modes[:, k] @ state.samples * decomp.dx  # mode amplitude along y
    ds = 1 / 8000
    s = np.arange(0, int(round(66 / ds)) + 1) * ds
    h_pos = np.interp(s, y, c.real) + 1j * np.interp(s, y, c.imag)
    h_neg = np.interp(-s, y, c.real) + 1j * np.interp(-s, y, c.imag)
    h = h_pos + h_neg
    w = h * np.exp(kappa * (s - s[-1]))  # scaled to avoid overflow
    cum = integrate.cumulative_trapezoid(w, s, initial=0.0)
    m = cum * np.exp(-kappa * (s - s[-1]))
    g0 = np.exp(1j * s * s / (2 * t)) / cmath.sqrt(2j * math.pi * t)
    corr = -kappa * integrate.simpson(g0 * m, x=s)
    free = integrate.simpson(g0 * h, x=s)
    return complex(free + corr)


def test_mode_amplitude_matches_brute_force(box32):
    state = _state(32, 121)
    t = 1.0
    assert abs(box32.eigenvalues[0] - 0.5) <= 1e-3
    out = comb_evolve(box32, state, t, quad_tol=1e-9)
    j0 = int(np.argmin(np.abs(state.y)))
    amp = box32.modes[:, 0] @ out.samples[:, j0] * box32.dx
    ref = _mode_amplitude_oracle(box32, state, t)
    assert abs(amp - ref) <= 1e-8


def test_dense_y_grid_approaches_gaussian_data(box32):
    # with the exact Gaussian the answer differs by O(dy^2)
    t = 1.0
    coarse = comb_evolve(box32, _state(32, 121), t)
    fine = comb_evolve(box32, _state(32, 241), t)
    a = coarse.samples[:, 60]
    b = fine.samples[:, 120]
    assert np.max(np.abs(a - b)) <= 5e-3 * np.max(np.abs(b))


def test_tiny_couplings_reduce_to_free(box32):
    d = SpectralDecomposition(box32.eigenvalues * 1e-9, box32.modes, 1.0, 0.0, math.pi)
    s = _state(32)
    out = comb_evolve(d, s, 0.5)
    free = free_propagate(s.samples, s.y, 0.5)
    assert np.max(np.abs(out.samples - free)) <= 1e-7


def test_nonpositive_modes_are_excluded_with_warning():
    d = discretize_hamiltonian(HamiltonianSpec("potential_grid", potential=np.full(16, -100.0)), 0.0, math.pi, 16)
    assert np.all(d.eigenvalues < 0)
    s = _state(16)
    with pytest.warns(NonpositiveEigenvalueWarning):
        out = comb_evolve(d, s, 0.5)
    assert np.allclose(out.samples, free_propagate(s.samples, s.y, 0.5), atol=1e-14)


def test_norm_nearly_conserved(box32):
    s = _state(32, 241)
    out = comb_evolve(box32, s, 0.5)
    assert abs(out.norm() / s.norm() - 1.0) <= 1e-3


def test_evolution_is_linear(box32):
    a = _state(32, 121)
    b = CombState.separable(lambda x: np.sin(3 * x), lambda y: y * np.exp(-(y**2)), 0.0, math.pi, 32, -6, 6, 121)
    both = a.with_samples(2 * a.samples - 1j * b.samples)
    ea, eb, eab = (comb_evolve(box32, s, 0.8, quad_tol=1e-10).samples for s in (a, b, both))
    assert np.max(np.abs(eab - 2 * ea + 1j * eb)) <= 1e-8


def test_grid_mismatch(box32):
    with pytest.raises(GridMismatch):
        comb_evolve(box32, _state(16), 1.0)


def test_rejects_bad_inputs(box32):
    with pytest.raises(ValueError):
        comb_evolve(box32, _state(32), 0.0)
    one_sided = CombState.separable(gx, gy, 0.0, math.pi, 32, 0.5, 6.0, 56)
    with pytest.raises(ValueError):
        comb_evolve(box32, one_sided, 1.0)


# -- backbone density ---------------------------------------------------------------

def test_backbone_density_of_separable_state():
    s = _state(32)
    rho = backbone_density(s)
    assert np.allclose(rho, gx(s.x) ** 2 * gy(0.0) ** 2, rtol=1e-14)


def test_backbone_density_zero_state_and_missing_backbone():
    z = CombState(np.zeros((8, 5)), 0, 1, -1, 1)
    assert not np.any(backbone_density(z))
    off = CombState.separable(gx, gy, 0.0, math.pi, 8, 1.0, 2.0, 5)
    assert not np.any(backbone_density(off))


def test_backbone_density_after_evolution_is_nonnegative(box32):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rho = backbone_density(comb_evolve(box32, _state(32), 1.0))
    assert np.all(rho >= 0)
