"""Scenario configuration files.

The format is flat ``key = value`` lines. ``#`` starts a comment, blank
lines are ignored and ``[section]`` headers are allowed purely for
readability (they do not namespace keys). Lists are comma separated;
complex numbers use Python syntax (``1+2j``).

Example::

    name = box_demo
    module = fse_spectral
    hamiltonian = particle_in_box
    alpha = 0.5
    x_min = 0
    x_max = 3.141592653589793
    n = 128
    times = 0.5, 1.0
    profile = eigenmode
    profile_mode = 0
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from typing import Any

from fracqd.errors import ParseError, ValidationError
from fracqd.spectral import HamiltonianSpec

__all__ = ["MODULES", "PROFILES", "ScenarioConfig", "parse_config", "render_config"]

MODULES = ("mlf", "fse_spectral", "fse_caputo", "fse_operator", "comb", "poles", "hyperbolic")
HAMILTONIANS = ("particle_in_box", "harmonic", "potential_grid", "dilation")
PROFILES = ("eigenmode", "gaussian", "gaussian_normalized", "hermite_gaussian")
EVOLVE_MODULES = ("fse_spectral", "fse_caputo", "fse_operator", "comb", "hyperbolic")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    module: str = "mlf"
    hamiltonian: str = "particle_in_box"
    potential: tuple = ()
    omega: float | None = None
    alpha: float = 0.5
    hbar: float = 1.0
    x_min: float = 0.0
    x_max: float = math.pi
    n: int = 64
    times: tuple = ()
    profile: str = "eigenmode"
    profile_mode: int = 0
    profile_center: float = 0.0
    profile_width: float = 1.0
    # mlf
    z: tuple = ()
    mlf_tol: float = 1e-12
    # caputo
    dt: float = 1e-3
    stability_limit: float = 10.0
    # comb
    y_min: float = -6.0
    y_max: float = 6.0
    ny: int = 121
    y_width: float = 1.0
    # hyperbolic
    mode: str = "semiclassical"
    decay_floor: float = 1e-12
    quad_tol: float = 1e-8
    output_dir: str = "out"

    def hamiltonian_spec(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            self.hamiltonian,
            hbar=self.hbar,
            potential=self.potential if self.hamiltonian == "potential_grid" else None,
            omega=self.omega if self.hamiltonian == "dilation" else None,
        )

    @property
    def grid(self):
        return (self.x_min, self.x_max, self.n)


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_LISTS = {"potential": float, "times": float, "z": complex}
_OPTIONAL = {"omega"}


def _convert(key: str, raw: str, line: int) -> Any:
    f = _FIELDS[key]
    try:
        if key in _LISTS:
            kind = _LISTS[key]
            items = [v.strip() for v in raw.split(",")] if raw.strip() else []
            if any(not v for v in items):
                raise ValueError("empty list item")
            return tuple(kind(v.replace(" ", "")) for v in items)
        if key in _OPTIONAL:
            return None if raw.lower() in ("", "none") else float(raw)
        if f.type == "str":
            if not raw:
                raise ValueError("empty value")
            return raw
        if f.type == "int":
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ParseError(line, key, f"cannot read {raw!r}: {exc}") from None


def _validate(cfg: ScenarioConfig, lines: dict[str, int]):
    def bad(key, reason):
        raise ValidationError(key, reason, lines.get(key))

    if not re.fullmatch(r"[A-Za-z0-9_.-]+", cfg.name):
        bad("name", "use letters, digits, '_', '.' or '-' only")
    if cfg.module not in MODULES:
        bad("module", f"must be one of {', '.join(MODULES)}")
    if cfg.hamiltonian not in HAMILTONIANS:
        bad("hamiltonian", f"must be one of {', '.join(HAMILTONIANS)}")
    if not (0.0 < cfg.alpha <= 1.0):
        bad("alpha", "fractional order must satisfy 0 < alpha <= 1")
    if not cfg.hbar > 0:
        bad("hbar", "must be positive")
    if not cfg.x_min < cfg.x_max:
        bad("x_max", "must exceed x_min")
    if cfg.n < 8:
        bad("n", "need at least 8 grid points")
    if cfg.hamiltonian == "potential_grid" and len(cfg.potential) != cfg.n:
        bad("potential", f"needs exactly n = {cfg.n} values")
    if cfg.hamiltonian != "potential_grid" and cfg.potential:
        bad("potential", "only allowed with hamiltonian = potential_grid")
    if cfg.omega is not None and not cfg.omega > 0:
        bad("omega", "must be positive")
    if cfg.hamiltonian == "dilation" and cfg.omega is None:
        bad("omega", "required for hamiltonian = dilation")
    if cfg.profile not in PROFILES:
        bad("profile", f"must be one of {', '.join(PROFILES)}")
    if cfg.profile_mode < 0:
        bad("profile_mode", "must be non-negative")
    if not cfg.profile_width > 0:
        bad("profile_width", "must be positive")
    for key in ("mlf_tol", "dt", "stability_limit", "quad_tol", "y_width"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    if cfg.module in EVOLVE_MODULES:
        if not cfg.times:
            bad("times", f"required for module = {cfg.module}")
        if any(b <= a for a, b in zip(cfg.times, cfg.times[1:])):
            bad("times", "must be strictly increasing")
        if cfg.times[0] < 0:
            bad("times", "must be non-negative")
    if cfg.module == "mlf" and not cfg.z:
        bad("z", "required for module = mlf")
    if cfg.module == "comb":
        if not cfg.y_min < 0 < cfg.y_max:
            bad("y_min", "the y range must contain the backbone y = 0 in its interior")
        if cfg.ny < 3:
            bad("ny", "need at least 3 points")
    if cfg.module == "fse_caputo" and cfg.dt > cfg.times[-1]:
        bad("dt", "must not exceed the last output time")
    if cfg.module == "hyperbolic":
        if cfg.mode not in ("standard", "semiclassical"):
            bad("mode", "must be standard or semiclassical")
        if cfg.profile == "eigenmode":
            bad("profile", "hyperbolic scenarios need an analytic profile")
    if not cfg.output_dir.strip():
        bad("output_dir", "must not be empty")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario; the first problem found is reported."""
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            continue
        if "=" not in body:
            raise ParseError(no, None, "expected 'key = value'")
        key, val = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ParseError(no, None, "missing key")
        if key not in _FIELDS:
            raise ParseError(no, key, "unknown key")
        if key in values:
            raise ParseError(no, key, f"duplicate key (first set on line {lines[key]})")
        values[key] = _convert(key, val, no)
        lines[key] = no
    cfg = ScenarioConfig(**values)
    _validate(cfg, lines)
    return cfg


def _render_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ", ".join(_render_value(x) for x in v)
    if isinstance(v, complex):
        return repr(v).strip("()")
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config(render_config(cfg)) == cfg``."""
    return "".join(f"{f.name} = {_render_value(getattr(cfg, f.name))}\n" for f in dataclasses.fields(cfg))
