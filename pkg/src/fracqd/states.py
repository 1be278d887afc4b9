"""Grid-sampled wave functions and evolution traces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fracqd.errors import GridMismatch

__all__ = ["EvolutionTrace", "WaveFunction", "interior_grid"]


def interior_grid(x_min: float, x_max: float, n: int) -> np.ndarray:
    """``n`` interior nodes of ``[x_min, x_max]``; the end points carry the
    homogeneous Dirichlet condition and are not stored."""
    dx = (x_max - x_min) / (n + 1)
    return x_min + dx * np.arange(1, n + 1)


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on the interior nodes of ``[x_min, x_max]``."""

    samples: np.ndarray
    x_min: float
    x_max: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size < 8:
            raise ValueError(f"need at least 8 grid points, got {samples.size}")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @classmethod
    def from_function(cls, f, x_min, x_max, n) -> WaveFunction:
        return cls(f(interior_grid(x_min, x_max, n)), x_min, x_max)

    @property
    def n_points(self) -> int:
        return self.samples.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points + 1)

    @property
    def x(self) -> np.ndarray:
        return interior_grid(self.x_min, self.x_max, self.n_points)

    def inner(self, other: WaveFunction) -> complex:
        self.check_same_grid(other)
        return complex(np.vdot(self.samples, other.samples) * self.dx)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx))

    def normalized(self) -> WaveFunction:
        return WaveFunction(self.samples / self.norm(), self.x_min, self.x_max)

    def with_samples(self, samples) -> WaveFunction:
        return WaveFunction(samples, self.x_min, self.x_max)

    def same_grid(self, other) -> bool:
        return (
            self.n_points == other.n_points
            and np.isclose(self.x_min, other.x_min, rtol=0, atol=1e-12)
            and np.isclose(self.x_max, other.x_max, rtol=0, atol=1e-12)
        )

    def check_same_grid(self, other):
        if not self.same_grid(other):
            raise GridMismatch(
                f"grid [{other.x_min}, {other.x_max}]x{other.n_points} does not match "
                f"[{self.x_min}, {self.x_max}]x{self.n_points}"
            )


@dataclass(frozen=True)
class EvolutionTrace:
    times: np.ndarray
    snapshots: list[WaveFunction]
    norms: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size == 0 or times[0] != 0.0:
            raise ValueError("trace times must start at 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("trace times must be strictly increasing")
        if len(self.snapshots) != times.size or len(self.norms) != times.size:
            raise ValueError("snapshots and norms must match times in length")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "norms", np.asarray(self.norms, dtype=float))

    def __len__(self):
        return self.times.size


# observables evaluated on a snapshot; second moment is the unnormalised
# <psi|x^2|psi> so that it tracks norm loss as well
OBSERVABLES = {
    "x": lambda wf: complex(np.sum(wf.x * np.abs(wf.samples) ** 2) * wf.dx),
    "x2": lambda wf: complex(np.sum(wf.x**2 * np.abs(wf.samples) ** 2) * wf.dx),
}


def measure(snapshots, names, psi0: WaveFunction | None = None) -> dict[str, np.ndarray]:
    out = {}
    for name in names:
        if name == "survival":
            if psi0 is None:
                raise ValueError("survival amplitude needs the initial state")
            out[name] = np.array([psi0.inner(s) for s in snapshots])
        elif name in OBSERVABLES:
            out[name] = np.array([OBSERVABLES[name](s) for s in snapshots])
        else:
            raise ValueError(f"unknown observable {name!r}")
    return out
