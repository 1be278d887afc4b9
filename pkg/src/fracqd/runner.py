"""Run a validated scenario and write its outputs."""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fracqd import caputo, comb, hyperbolic, io, laplace, mlf, spectral
from fracqd.config import ScenarioConfig, render_config
from fracqd.errors import NumericalError, ValidationError
from fracqd.states import WaveFunction, interior_grid

__all__ = ["RunReport", "ScenarioFailure", "build_profile", "run_scenario"]

log = logging.getLogger(__name__)

OBSERVABLES = ("x", "x2", "survival")


class ScenarioFailure(NumericalError):
    """A numerical error raised while running a named scenario."""


@dataclass
class RunReport:
    files: list[Path]
    wall_time: float
    warnings: list[str] = field(default_factory=list)


def build_profile(cfg: ScenarioConfig) -> hyperbolic.PolyGaussianProfile:
    """Analytic profile centred at 0 with the configured width."""
    w = cfg.profile_width
    if cfg.profile in ("gaussian", "gaussian_normalized"):
        base = hyperbolic.gaussian_profile(normalized=cfg.profile == "gaussian_normalized")
    elif cfg.profile == "hermite_gaussian":
        base = hyperbolic.hermite_gaussian(cfg.profile_mode)
    else:
        raise ValueError(f"profile {cfg.profile!r} has no analytic form")
    # psi(x / w) / sqrt(w) keeps the normalisation
    coeffs = np.asarray(base.coeffs) / w ** np.arange(len(base.coeffs)) / math.sqrt(w)
    return hyperbolic.PolyGaussianProfile(tuple(coeffs), base.a / (w * w))


def _initial_state(cfg: ScenarioConfig, decomp) -> WaveFunction:
    if cfg.profile == "eigenmode":
        if cfg.profile_mode >= len(decomp):
            raise ValidationError("profile_mode", f"{cfg.profile_mode} exceeds the {len(decomp)} available modes")
        return decomp.eigenfunction(cfg.profile_mode)
    prof = build_profile(cfg)
    x = interior_grid(*cfg.grid)
    return WaveFunction(prof(x - cfg.profile_center), cfg.x_min, cfg.x_max)


def _write_evolution(out: Path, trace, files):
    files.append(io.write_trace(out / "trace.csv", trace))
    files.append(io.emit_plotdata(trace, out / "trace.dat"))
    for i, snap in enumerate(trace.snapshots):
        files.append(io.write_snapshot(out / f"snapshot_{i:03d}.csv", snap))


def _run_mlf(cfg, out, files):
    rows = []
    for z in cfg.z:
        rep = mlf.mittag_leffler(cfg.alpha, z, tol=cfg.mlf_tol)
        rows.append((cfg.alpha, z.real, z.imag, rep.value.real, rep.value.imag, rep.method_used, rep.est_abs_error))
    files.append(io.write_csv(out / "mlf.csv",
                              ["alpha", "z_re", "z_im", "value_re", "value_im", "method", "est_abs_error"], rows))


def _decomp(cfg):
    return spectral.discretize_hamiltonian(cfg.hamiltonian_spec(), cfg.x_min, cfg.x_max, cfg.n)


def _run_spectral(cfg, out, files):
    d = _decomp(cfg)
    psi0 = _initial_state(cfg, d)
    if cfg.module == "fse_spectral":
        tr = spectral.evolve_fse_spectral(d, cfg.alpha, psi0, cfg.times, OBSERVABLES)
    else:
        tr = spectral.evolve_operator_form(d, psi0, cfg.times, cfg.quad_tol, OBSERVABLES)
    _write_evolution(out, tr, files)


def _run_caputo(cfg, out, files):
    d = _decomp(cfg)
    psi0 = _initial_state(cfg, d)
    h = spectral.hamiltonian_matrix(cfg.hamiltonian_spec(), cfg.x_min, cfg.x_max, cfg.n)
    tr = caputo.solve(h, psi0, cfg.alpha, cfg.hbar, cfg.dt, cfg.times[-1], cfg.times,
                      OBSERVABLES, cfg.stability_limit)
    _write_evolution(out, tr, files)


def _run_comb(cfg, out, files):
    d = _decomp(cfg)
    psi_x = _initial_state(cfg, d).samples
    y = np.linspace(cfg.y_min, cfg.y_max, cfg.ny)
    state = comb.CombState(np.outer(psi_x, np.exp(-((y / cfg.y_width) ** 2))),
                           cfg.x_min, cfg.x_max, cfg.y_min, cfg.y_max, cfg.hbar)
    x = state.x
    xx, yy = np.meshgrid(x, y, indexing="ij")
    norms, dens = [], []
    for i, t in enumerate(cfg.times):
        s = state if t == 0 else comb.comb_evolve(d, state, t, cfg.quad_tol)
        norms.append(s.norm())
        dens.append(comb.backbone_density(s))
        files.append(io.write_csv(out / f"comb_{i:03d}.csv", ["x", "y", "re", "im"],
                                  zip(xx.ravel(), yy.ravel(), s.samples.real.ravel(), s.samples.imag.ravel())))
    files.append(io.write_csv(out / "comb_trace.csv", ["t", "norm"], zip(cfg.times, norms)))
    header = ["x"] + [f"rho_{i:03d}" for i in range(len(cfg.times))]
    files.append(io.write_csv(out / "backbone.csv", header, zip(x, *dens)))


def _run_poles(cfg, out, files):
    rows = laplace.compare_spectra(_decomp(cfg), cfg.hbar)
    files.append(io.write_csv(
        out / "poles.csv",
        ["lambda", "comb_re", "comb_im", "fse_re", "fse_im", "moduli_match", "conjugate_match"],
        [(r.lam, r.comb_pole.real, r.comb_pole.imag, r.fse_pole.real, r.fse_pole.imag,
          r.moduli_match, r.conjugate_match) for r in rows],
    ))


def _run_hyperbolic(cfg, out, files):
    params = hyperbolic.DilationParams(cfg.hbar, cfg.omega)
    prof = build_profile(cfg)
    trace = hyperbolic.moment_trace(params, prof, cfg.times, cfg.mode, cfg.decay_floor)
    files.append(io.write_csv(out / "moments.csv", ["t", "x2_re", "x2_im", "diverged"],
                              zip(trace.times, trace.x2_values.real, trace.x2_values.imag, trace.diverged)))
    files.append(io.emit_plotdata(trace, out / "moments.dat"))
    for i, t in enumerate(cfg.times):
        if cfg.mode == "standard" or t == 0:
            wf = hyperbolic.evolve_standard(params, prof, t, cfg.grid)
        else:
            wf = hyperbolic.evolve_semiclassical(params, prof, t, cfg.grid, cfg.quad_tol)
        files.append(io.write_snapshot(out / f"snapshot_{i:03d}.csv", wf))


_DISPATCH = {
    "mlf": _run_mlf,
    "fse_spectral": _run_spectral,
    "fse_operator": _run_spectral,
    "fse_caputo": _run_caputo,
    "comb": _run_comb,
    "poles": _run_poles,
    "hyperbolic": _run_hyperbolic,
}


def run_scenario(cfg: ScenarioConfig, output_dir: str | Path | None = None) -> RunReport:
    """Run ``cfg`` and write every output under ``output_dir`` (default ``cfg.output_dir``).

    Output files are deterministic; the manifest lists them with the hash of
    the rendered configuration. Wall time is reported but never written.
    """
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            _DISPATCH[cfg.module](cfg, out, files)
        except NumericalError as exc:
            raise ScenarioFailure(f"scenario {cfg.name!r} ({cfg.module}): {type(exc).__name__}: {exc}") from exc
    msgs = sorted({str(w.message) for w in caught})
    text = render_config(cfg)
    manifest = {
        "name": cfg.name,
        "module": cfg.module,
        "config_sha256": io.config_hash(text),
        "outputs": [p.name for p in files],
        "warnings": msgs,
    }
    files.append(io.write_manifest(out / "manifest.json", manifest))
    return RunReport(files, time.perf_counter() - start, msgs)
