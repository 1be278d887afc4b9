"""Fractional-time quantum dynamics.

Mittag-Leffler evolution of the fractional Schrödinger equation, an L1
Caputo time stepper, the quantum comb propagator, Laplace-domain pole
analysis and the dilation-Hamiltonian case study, with a scenario CLI.
"""

from fracqd.errors import *  # noqa: F401,F403
from fracqd.mlf import FractionalOrder, MlfEvalReport, mittag_leffler
from fracqd.spectral import HamiltonianSpec, SpectralDecomposition, discretize_hamiltonian
from fracqd.states import EvolutionTrace, WaveFunction

__version__ = "0.1.0"

__all__ = [
    "EvolutionTrace",
    "FractionalOrder",
    "HamiltonianSpec",
    "MlfEvalReport",
    "SpectralDecomposition",
    "WaveFunction",
    "discretize_hamiltonian",
    "mittag_leffler",
]
