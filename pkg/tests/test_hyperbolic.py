from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import simpson_complex
from fracqd.errors import ExtrapolationBeyondProfile, IntegralDivergent, QuadratureFailure
from fracqd.hyperbolic import (
    DilationParams,
    MomentTrace,
    PolyGaussianProfile,
    divergence_time,
    evolve_semiclassical,
    evolve_standard,
    gaussian_profile,
    hermite_gaussian,
    moment_trace,
    second_moment_semiclassical,
    second_moment_standard,
)
from fracqd.states import WaveFunction

TIED = DilationParams(1.0)
GAUSS = gaussian_profile()
NGAUSS = gaussian_profile(normalized=True)
QUARTER_PI = math.pi / 4


def at_point(x):
    """A nine-node grid whose middle node is ``x``."""
    return (x - 1.0, x + 1.0, 9)


def value_at(params, profile, t, x, **kw):
    return evolve_semiclassical(params, profile, t, at_point(x), **kw).samples[4]


# -- parameters and profiles ----------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        DilationParams(0.0)
    with pytest.raises(ValueError):
        DilationParams(1.0, omega=-1.0)
    assert DilationParams(2.0).omega_eff == 0.25
    assert DilationParams(2.0).omega_tied
    assert not DilationParams(2.0, 0.25).omega_tied


def test_profile_validation():
    with pytest.raises(ValueError):
        PolyGaussianProfile((), 1.0)
    with pytest.raises(ValueError):
        PolyGaussianProfile((1.0,), -1.0)


def test_gaussian_norms():
    assert abs(NGAUSS.norm() - 1.0) <= 1e-14
    # the unnormalised profile exp(-x^2)/sqrt(pi) has norm (2 pi)^(-1/4)
    assert abs(GAUSS.norm() - (2 * math.pi) ** -0.25) <= 1e-14


@pytest.mark.parametrize("n", range(6))
def test_hermite_gaussian_moments(n):
    h = hermite_gaussian(n)
    assert abs(h.norm() - 1.0) <= 1e-12
    assert abs(h.second_moment() - (n + 0.5)) <= 1e-12


def test_taylor_coefficients():
    p = PolyGaussianProfile((1.0, 2.0), 0.5)
    z = 1e-3
    approx = np.polynomial.polynomial.polyval(z, p.taylor(6))
    assert abs(approx - p(z)) <= 1e-17


# -- standard evolution ------------------------------------------------------------

def test_standard_at_zero_time_is_identity():
    psi = WaveFunction.from_function(GAUSS, -5, 5, 101)
    assert np.array_equal(evolve_standard(TIED, psi, 0.0).samples, psi.samples)


def test_standard_gaussian_closed_form():
    grid = (-5.0, 5.0, 201)
    out = evolve_standard(TIED, GAUSS, 1.0, grid)
    x = out.x
    exact = math.exp(-0.5) * np.exp(-(x**2) * math.exp(-2.0)) / math.sqrt(math.pi)
    assert np.max(np.abs(out.samples - exact)) <= 1e-15


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3), st.floats(0.05, 2), st.floats(0, 2))
def test_standard_general_form_preserves_norm(hbar, omega, t):
    p = DilationParams(hbar, omega)
    # a wide grid so the dilated Gaussian stays inside
    width = 8 * math.exp(2 * omega * t)
    out = evolve_standard(p, NGAUSS, t, (-width, width, 4001))
    assert abs(out.norm() - 1.0) <= 1e-8


def test_standard_sampled_input_leaving_support():
    psi = WaveFunction.from_function(GAUSS, -1, 1, 21)
    with pytest.raises(ExtrapolationBeyondProfile):
        evolve_standard(TIED, psi, -1.0)


def test_standard_moments():
    assert abs(second_moment_standard(TIED, NGAUSS, 0.0) - 0.25) <= 1e-14
    assert abs(second_moment_standard(TIED, NGAUSS, 1.0) - 0.25 * math.e**2) <= 1e-13
    assert abs(second_moment_standard(TIED, NGAUSS, 1.0) - 1.8473) <= 1e-4


@given(st.floats(0.2, 5), st.floats(0, 2))
def test_standard_moment_ratio(hbar, t):
    p = DilationParams(hbar)
    r = second_moment_standard(p, NGAUSS, t) / second_moment_standard(p, NGAUSS, 0.0)
    assert abs(r / math.exp(2 * t / hbar) - 1.0) <= 1e-10


def test_moment_growth_law_through_the_grid():
    for t in (0.25, 0.5, 1.0):
        width = 7 * math.exp(t)
        grid = (-width, width, 4001)
        m0 = second_moment_standard(TIED, evolve_standard(TIED, NGAUSS, 0.0, grid), 0.0)
        mt = second_moment_standard(TIED, evolve_standard(TIED, NGAUSS, t, grid), 0.0)
        assert abs(math.log(mt) - math.log(m0) - 2 * t) <= 1e-4


# -- semiclassical evolution --------------------------------------------------------

def _brute_force(profile, x, t, hbar=1.0, n=2_000_000):
    """Real-axis Simpson over u in [-8, 80] of the dilation integral."""
    tau = t / (2 * hbar)
    f = lambda u: np.exp(1j * u * u / (4 * tau) - 0.5 * u) * profile(np.exp(-u) * x)  # noqa: E731
    return simpson_complex(f, -8.0, 80.0, n) / cmath.sqrt(4j * math.pi * tau)


@pytest.mark.parametrize("x", [0.5, -0.7, 1.3])
def test_semiclassical_matches_brute_force(x):
    got = value_at(TIED, GAUSS, 0.1, x)
    assert abs(got - _brute_force(GAUSS, x, 0.1)) <= 1e-7


def test_semiclassical_at_origin_is_continuous():
    at0 = value_at(TIED, GAUSS, 0.1, 0.0)
    assert abs(at0 - GAUSS(0.0) * cmath.exp(0.25j * 0.05)) <= 1e-15
    near = [value_at(TIED, GAUSS, 0.1, x) for x in (1e-2, 1e-3, 1e-4)]
    gaps = [abs(v - at0) for v in near]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 1e-3


def test_semiclassical_small_time_limit():
    grid = (-6.0, 6.0, 121)
    out = evolve_semiclassical(TIED, NGAUSS, 1e-3, grid)
    ref = WaveFunction.from_function(NGAUSS, *grid)
    assert out.with_samples(out.samples - ref.samples).norm() <= 1e-2


def test_semiclassical_is_linear():
    grid = (-3.0, 3.0, 13)
    # profiles with different widths cannot be added as one PolyGaussianProfile,
    # so linearity is checked within a common width
    a = PolyGaussianProfile((1.0, 0.0, 0.5), 0.7)
    b = PolyGaussianProfile((0.0, 1.0), 0.7)
    both = PolyGaussianProfile((2.0, -1j, 1.0), 0.7)
    ea, eb, eab = (evolve_semiclassical(TIED, p, 0.3, grid, quad_tol=1e-10).samples for p in (a, b, both))
    assert np.max(np.abs(eab - 2 * ea + 1j * eb)) <= 1e-8


def test_general_omega_depends_only_on_tau():
    # tau = 2 hbar omega^2 t; tied mode with hbar = 1 has tau = t / 2
    grid = (-2.0, 2.0, 9)
    general = evolve_semiclassical(DilationParams(0.5, 1.0), GAUSS, 0.25, grid)
    tied = evolve_semiclassical(TIED, GAUSS, 0.5, grid)
    assert np.max(np.abs(general.samples - tied.samples)) <= 1e-8


def test_semiclassical_needs_positive_time():
    with pytest.raises(ValueError):
        evolve_semiclassical(TIED, GAUSS, 0.0, at_point(1.0))


def test_semiclassical_unreachable_tolerance():
    with pytest.raises(QuadratureFailure):
        evolve_semiclassical(TIED, GAUSS, 0.5, at_point(1.0), quad_tol=1e-30)


# -- semiclassical second moment ---------------------------------------------------

def _moment_closed_form(amp2, t, hbar=1.0):
    # A^2 int y^2 exp(-2 cos(2t/hbar) y^2) dy
    r = 2 * math.cos(2 * t / hbar)
    return amp2 * math.sqrt(math.pi) / (2 * r**1.5)


def test_moment_at_zero_time():
    v = second_moment_semiclassical(TIED, NGAUSS, 0.0)
    assert abs(v - 0.25) <= 1e-12
    assert abs(v - second_moment_standard(TIED, NGAUSS, 0.0)) <= 1e-8


@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9, 0.99, 0.999])
def test_moment_matches_closed_form(frac):
    t = frac * QUARTER_PI
    v = second_moment_semiclassical(TIED, NGAUSS, t)
    ref = _moment_closed_form(math.sqrt(2 / math.pi), t)
    assert abs(v - ref) <= 1e-9 * ref


def test_moment_hermite_profile_matches_quadrature_oracle():
    h = hermite_gaussian(2)
    t = 0.3
    th = t
    up = cmath.exp(1j * th)

    def f(y):
        return y * y * np.conj(h(np.conj(y * up))) * h(y / up)

    ref = simpson_complex(f, -12, 12, 20000)
    assert abs(second_moment_semiclassical(TIED, h, t) - ref) <= 1e-9


def test_moment_diverges_at_quarter_pi():
    with pytest.raises(IntegralDivergent):
        second_moment_semiclassical(TIED, GAUSS, QUARTER_PI)
    with pytest.raises(IntegralDivergent):
        second_moment_semiclassical(TIED, GAUSS, 1.2)


def test_contrast_between_standard_and_semiclassical():
    for t in np.linspace(0, 2, 21):
        assert math.isfinite(second_moment_standard(TIED, GAUSS, t))


# -- divergence time -------------------------------------------------------------

def test_divergence_time_examples():
    assert abs(divergence_time(TIED, GAUSS, 2.0) - QUARTER_PI) <= 1e-8
    assert abs(divergence_time(TIED, GAUSS, 2.0) - 0.78539816) <= 1e-8
    assert abs(divergence_time(DilationParams(2.0), GAUSS, 4.0) - math.pi / 2) <= 1e-8
    assert divergence_time(TIED, GAUSS, 0.1) is None


@given(st.floats(0.2, 5))
def test_divergence_time_scales_with_hbar(hbar):
    t = divergence_time(DilationParams(hbar), GAUSS, 2 * hbar)
    assert abs(t - hbar * QUARTER_PI) <= 1e-8 * max(1.0, hbar)


def test_divergence_time_rejects_negative_window():
    with pytest.raises(ValueError):
        divergence_time(TIED, GAUSS, -1.0)


# -- moment traces -----------------------------------------------------------------

def test_moment_trace_validation():
    with pytest.raises(ValueError):
        MomentTrace([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        MomentTrace([1.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        MomentTrace([0.0, 1.0], [1.0, 2.0], diverged_at=3.0)
    assert len(MomentTrace([], [])) == 0


def test_moment_trace_flags_divergent_rows():
    tr = moment_trace(TIED, NGAUSS, [0.0, 0.5, 1.0, 1.5])
    assert tr.diverged.tolist() == [False, False, True, True]
    assert abs(tr.diverged_at - QUARTER_PI) <= 1e-8
    assert np.isnan(tr.x2_values[2])
    assert abs(tr.x2_values[0] - 0.25) <= 1e-12


def test_moment_trace_standard_mode():
    tr = moment_trace(TIED, NGAUSS, [0.0, 1.0], mode="standard")
    assert tr.diverged_at is None and not tr.diverged.any()
    assert abs(tr.x2_values[1] - 0.25 * math.e**2) <= 1e-13
    with pytest.raises(ValueError):
        moment_trace(TIED, NGAUSS, [0.0], mode="other")
