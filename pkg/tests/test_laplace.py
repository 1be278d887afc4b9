from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracqd.errors import OnBranchCut, RootFindFailure
from fracqd.laplace import (
    COMB,
    FSE_HALF,
    PoleReport,
    compare_spectra,
    comb_kernel,
    fse_kernel,
    locate_pole,
    verify_caputo_laplace,
)
from fracqd.spectral import HamiltonianSpec, discretize_hamiltonian

right_half = st.builds(
    lambda r, th: r * cmath.exp(1j * th), st.floats(0.01, 50), st.floats(-1.5, 1.5)
)


# -- kernels ----------------------------------------------------------------------

@given(right_half, st.floats(0, 5), st.floats(0.2, 5))
def test_comb_kernel_matches_literal_form_in_right_half_plane(s, lam, hbar):
    # there the principal roots of i hbar s and -2 i s / hbar need no care
    literal = 1 / (cmath.sqrt(1j * hbar * s) * (cmath.sqrt(-2j * s / hbar) - lam / hbar))
    k = comb_kernel(s, lam, hbar)
    assert abs(k - literal) <= 1e-12 * max(1.0, abs(literal))


@given(right_half, st.floats(0, 5), st.floats(0.2, 5))
def test_fse_kernel_matches_literal_form_in_right_half_plane(s, lam, hbar):
    literal = 1 / (cmath.sqrt(s) * (cmath.sqrt(s) - lam / cmath.sqrt(2j * hbar)))
    k = fse_kernel(s, lam, hbar)
    assert abs(k - literal) <= 1e-12 * max(1.0, abs(literal))


def test_zero_coupling_fse_kernel_is_one_over_s():
    for s in (1.0, 2 + 3j, -1 + 0.5j):
        assert abs(fse_kernel(s, 0.0) - 1 / s) <= 1e-15


@pytest.mark.parametrize("kernel", [comb_kernel, fse_kernel])
def test_kernels_decay_at_infinity(kernel):
    for th in (-1.0, 0.0, 1.0):
        vals = [abs(kernel(r * cmath.exp(1j * th), 1.0)) for r in (1e2, 1e4, 1e6)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-5


@pytest.mark.parametrize("kernel", [comb_kernel, fse_kernel])
@pytest.mark.parametrize("s", [0.0, -1.0, -1e-300])
def test_kernels_refuse_the_branch_cut(kernel, s):
    with pytest.raises(OnBranchCut):
        kernel(complex(s, 0.0), 1.0)


# -- poles -------------------------------------------------------------------------

def test_comb_pole_example():
    rep = locate_pole(COMB, 1.0, 1.0)
    assert abs(abs(rep.located_pole) - 0.5) <= 1e-8
    assert abs(rep.located_pole - 0.5j) <= 1e-12
    assert rep.order == 1
    assert rep.match_error <= 1e-12


def test_fse_pole_example():
    rep = locate_pole(FSE_HALF, 1.0, 1.0)
    assert abs(rep.located_pole + 0.5j) <= 1e-12
    assert rep.order == 1


@pytest.mark.parametrize("kernel", [COMB, FSE_HALF])
def test_pole_scaling(kernel):
    assert abs(abs(locate_pole(kernel, 2.0, 1.0).located_pole) - 2.0) <= 1e-10


def test_residues_are_closed_forms():
    # comb: 1 / (a r (c r - k)) with r = sqrt(s) has residue 2 r0 / (a c) = sqrt(2)
    # fse: 1 / (r (r - k)) has residue 2 at r0 = k
    c = locate_pole(COMB, 1.0)
    f = locate_pole(FSE_HALF, 1.0)
    assert abs(c.residue_estimate - math.sqrt(2)) <= 1e-10
    assert abs(f.residue_estimate - 2.0) <= 1e-10


def test_newton_from_a_distant_guess():
    rep = locate_pole(FSE_HALF, 1.0, 1.0, guess=0.3 - 0.2j)
    assert abs(rep.located_pole + 0.5j) <= 1e-12
    assert rep.iterations > 0


def test_zero_coupling_rejected():
    with pytest.raises(ValueError):
        locate_pole(COMB, 0.0)


def test_negative_coupling_has_no_principal_pole():
    with pytest.raises(RootFindFailure):
        locate_pole(COMB, -1.0)


def test_report_validation():
    with pytest.raises(ValueError):
        PoleReport(1j, 1.0, -1.0, 1, 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 10), st.floats(0.2, 5))
def test_isospectral_moduli(lam, hbar):
    target = lam * lam / (2 * hbar)
    c = locate_pole(COMB, lam, hbar)
    f = locate_pole(FSE_HALF, lam, hbar)
    assert abs(abs(c.located_pole) - target) <= 1e-6 * target
    assert abs(abs(f.located_pole) - target) <= 1e-6 * target
    assert c.order == f.order == 1
    assert abs(c.located_pole - f.located_pole.conjugate()) <= 1e-9 * target


# -- spectra -------------------------------------------------------------------

def test_box_spectrum_pole_moduli():
    d = discretize_hamiltonian(HamiltonianSpec("particle_in_box"), 0.0, math.pi, 512)
    rows = compare_spectra(d)[:3]
    for row, target in zip(rows, (0.125, 2.0, 10.125)):
        assert abs(abs(row.comb_pole) - target) <= 1e-3 * target
        assert abs(abs(row.comb_pole) - row.lam**2 / 2) <= 1e-10 * target
        assert row.moduli_match and row.conjugate_match


def test_compare_spectra_edge_cases():
    assert compare_spectra([]) == []
    rows = compare_spectra([1.0])
    assert len(rows) == 1 and rows[0].moduli_match


def test_compare_spectra_uses_decomposition_hbar():
    d = discretize_hamiltonian(HamiltonianSpec("particle_in_box", hbar=2.0), 0.0, math.pi, 64)
    row = compare_spectra(d)[0]
    assert abs(abs(row.fse_pole) - row.lam**2 / 4) <= 1e-10 * row.lam**2


# -- Laplace identity of the Caputo derivative --------------------------------------

@pytest.mark.parametrize("a", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("fn", ["linear", "quadratic"])
def test_laplace_identity_polynomials(a, fn):
    assert verify_caputo_laplace(a, fn) <= 1e-3


@pytest.mark.parametrize("a", [0.25, 0.5, 0.75, 1.0])
def test_laplace_identity_constant(a):
    assert verify_caputo_laplace(a, "const") <= 1e-6


def test_laplace_identity_exponential():
    assert verify_caputo_laplace(1.0, "exp_decay") <= 1e-6
    assert verify_caputo_laplace(0.5, "exp_decay") <= 1e-3


def test_laplace_identity_unknown_function():
    with pytest.raises(ValueError):
        verify_caputo_laplace(0.5, "cubic")


def test_laplace_linear_closed_form():
    # both sides equal s^(-3/2) for u = t, alpha = 1/2
    s = np.linspace(0.5, 5.0, 10)
    assert np.allclose(s**0.5 / s**2, s**-1.5)
    assert verify_caputo_laplace(0.5, "linear") <= 1e-3
