"""Boundary traces on a circle and their spectral calculus.

A trace is a set of samples ``f(theta_j)`` at ``N`` uniform angles on
``|x| = R``.  Its Fourier coefficients use the unnormalized convention

    fhat(n) = int_0^{2 pi} f(theta) exp(-i n theta) d theta,

approximated by the trapezoidal rule, so that ``f = (1/2 pi) sum fhat(n)
exp(i n theta)``.  The ``H^gamma`` duality product on the circle is the
modal sum

    <f, g>_gamma = sum_n  R |n|^(2 gamma) / (2 pi) * conj(fhat(n)) ghat(n).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "BoundaryTrace",
    "FourierCoeffs",
    "SobolevParams",
    "default_max_mode",
    "uniform_angles",
    "dft",
    "synthesize",
    "sobolev_weights",
    "sobolev_pair",
    "sobolev_seminorm",
    "surface_laplacian_power",
    "read_trace_csv",
    "write_trace_csv",
]

PathLike = Union[str, Path]


def uniform_angles(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class BoundaryTrace:
    """Samples of a boundary function at uniform angles ``2 pi j / N``."""

    radius: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).ravel()
        if vals.size < 4:
            raise ValueError(f"a boundary trace needs at least 4 samples, got {vals.size}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def angles(self) -> np.ndarray:
        return uniform_angles(self.n)

    def scaled(self, c: complex) -> "BoundaryTrace":
        return BoundaryTrace(self.radius, c * self.values)

    @classmethod
    def from_function(cls, func, n: int, radius: float = 1.0) -> "BoundaryTrace":
        """Sample ``func(theta)`` at ``n`` uniform angles."""
        return cls(radius, np.asarray(func(uniform_angles(n)), dtype=complex))


@dataclass(frozen=True)
class FourierCoeffs:
    """Coefficients ``fhat(n)`` for ``n = -max_mode..max_mode``.

    ``coeffs[n + max_mode]`` holds mode ``n``; index with ``fc[n]``.
    """

    radius: float
    coeffs: np.ndarray
    max_mode: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2*max_mode + 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "max_mode", (c.size - 1) // 2)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.max_mode, self.max_mode + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.max_mode:
            return 0.0j
        return complex(self.coeffs[n + self.max_mode])

    def truncated(self, max_mode: int) -> "FourierCoeffs":
        if max_mode >= self.max_mode:
            return self
        m = self.max_mode
        return FourierCoeffs(self.radius, self.coeffs[m - max_mode : m + max_mode + 1])

    @classmethod
    def from_modes(cls, radius: float, modes: dict, max_mode: int) -> "FourierCoeffs":
        """Build from a sparse ``{n: value}`` mapping."""
        c = np.zeros(2 * max_mode + 1, dtype=complex)
        for n, v in modes.items():
            c[n + max_mode] = v
        return cls(radius, c)


@dataclass(frozen=True)
class SobolevParams:
    """Sobolev scale ``gamma >= 0`` of the duality product.

    ``zero_mode_weight`` overrides the weight of the ``n = 0`` mode.  Left as
    ``None`` it follows ``0^(2 gamma)``: zero for ``gamma > 0`` and one for
    ``gamma = 0``, so that ``gamma = 0`` is the plain L2 pairing.
    """

    gamma: float = 1.0
    zero_mode_weight: float | None = None

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.zero_mode_weight is not None and not self.zero_mode_weight >= 0:
            raise ValueError("zero_mode_weight must be >= 0")

    def weights(self, modes: np.ndarray) -> np.ndarray:
        return sobolev_weights(modes, self.gamma, self.zero_mode_weight)


def default_max_mode(n_samples: int) -> int:
    return min(60, n_samples // 2 - 1)


def dft(trace: BoundaryTrace, max_mode: int | None = None) -> FourierCoeffs:
    """Trapezoidal Fourier coefficients of ``trace`` up to ``max_mode``.

    ``max_mode`` must stay below the Nyquist limit ``N/2 - 1``.
    """
    n = trace.n
    if max_mode is None:
        max_mode = default_max_mode(n)
    if max_mode < 0 or max_mode > n // 2 - 1:
        raise ValueError(f"max_mode={max_mode} aliases with {n} samples (limit {n // 2 - 1})")
    full = np.fft.fft(trace.values) * (2.0 * np.pi / n)
    idx = np.arange(-max_mode, max_mode + 1) % n
    return FourierCoeffs(trace.radius, full[idx])


def synthesize(fc: FourierCoeffs, n: int) -> BoundaryTrace:
    """Evaluate ``(1/2 pi) sum fhat(m) exp(i m theta)`` at ``n`` uniform angles."""
    if fc.max_mode > n // 2 - 1:
        raise ValueError(f"{n} samples cannot represent modes up to {fc.max_mode}")
    full = np.zeros(n, dtype=complex)
    full[fc.modes % n] = fc.coeffs
    return BoundaryTrace(fc.radius, np.fft.ifft(full) * n / (2.0 * np.pi))


def sobolev_weights(modes: np.ndarray, gamma: float, zero_mode_weight: float | None = None) -> np.ndarray:
    """``|n|^(2 gamma)`` with ``0^0 = 1``, so ``gamma = 0`` is the plain L2 pairing."""
    a = np.abs(np.asarray(modes, dtype=float))
    w = np.ones_like(a) if gamma == 0 else a ** (2.0 * gamma)
    if zero_mode_weight is not None:
        w = np.where(a == 0, float(zero_mode_weight), w)
    return w


def _common(f: FourierCoeffs, g: FourierCoeffs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not math.isclose(f.radius, g.radius, rel_tol=1e-12):
        raise ValueError(f"radius mismatch: {f.radius} vs {g.radius}")
    m = min(f.max_mode, g.max_mode)
    f, g = f.truncated(m), g.truncated(m)
    return f.modes, f.coeffs, g.coeffs


def sobolev_pair(f: FourierCoeffs, g: FourierCoeffs, p: SobolevParams = SobolevParams()) -> complex:
    """``<f, g>`` in ``H^gamma``; conjugate-linear in ``f``, truncated at the smaller band."""
    modes, fc, gc = _common(f, g)
    w = f.radius * p.weights(modes) / (2.0 * np.pi)
    return complex(np.sum(w * np.conj(fc) * gc))


def sobolev_seminorm(f: FourierCoeffs, p: SobolevParams = SobolevParams()) -> float:
    val = sobolev_pair(f, f, p)
    if abs(val.imag) > 1e-12 * max(abs(val.real), 1e-300):
        raise ArithmeticError(f"self-pairing is not real: {val}")
    return math.sqrt(max(val.real, 0.0))


def surface_laplacian_power(f: FourierCoeffs, gamma: float) -> FourierCoeffs:
    """Spectral ``(-Delta_boundary)^gamma``: multiply mode ``n`` by ``|n|^(2 gamma)``."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return FourierCoeffs(f.radius, f.coeffs * sobolev_weights(f.modes, gamma))


# ---------------------------------------------------------------------------
# CSV serialization: header ``theta,re,im``
# ---------------------------------------------------------------------------
def write_trace_csv(trace: BoundaryTrace, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "re", "im"])
        for th, v in zip(trace.angles, trace.values):
            w.writerow([f"{th:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_trace_csv(path: PathLike, radius: float = 1.0) -> BoundaryTrace:
    """Load a trace; the angles must be the uniform grid ``2 pi j / N``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["theta", "re", "im"]:
        raise ValueError(f"{path}: expected header 'theta,re,im'")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: malformed rows")
    n = data.shape[0]
    if n < 4 or not np.allclose(data[:, 0], uniform_angles(n), atol=1e-9):
        raise ValueError(f"{path}: angles are not uniform 2*pi*j/{n}")
    return BoundaryTrace(radius, data[:, 1] + 1j * data[:, 2])
