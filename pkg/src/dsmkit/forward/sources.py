"""Synthetic data from point sources and the multiplicative noise model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..boundary import BoundaryTrace, FourierCoeffs, synthesize
from ..probing import BackgroundMedium, Direction, ProbePoint, modal_values

__all__ = ["PointSourceConfig", "point_source_coeffs", "point_source_trace", "noise_factors", "add_noise"]


@dataclass(frozen=True)
class PointSourceConfig:
    """Monopoles ``(q_j, c_j)`` and dipoles ``(p_i, a_i, d_i)``.

    The boundary datum is ``sum c_j G_{q_j} + sum a_i d_i . grad G_{p_i}``.
    """

    monopoles: tuple[tuple[ProbePoint, complex], ...] = field(default=())
    dipoles: tuple[tuple[ProbePoint, complex, Direction], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "monopoles", tuple(self.monopoles))
        object.__setattr__(self, "dipoles", tuple(self.dipoles))

    def scaled(self, c: complex) -> "PointSourceConfig":
        return PointSourceConfig(
            tuple((q, c * w) for q, w in self.monopoles),
            tuple((p, c * a, d) for p, a, d in self.dipoles),
        )


def point_source_coeffs(cfg: PointSourceConfig, bg: BackgroundMedium, max_mode: int) -> FourierCoeffs:
    """Boundary Fourier coefficients of the point-source datum."""
    total = np.zeros(2 * max_mode + 1, dtype=complex)
    for q, c in cfg.monopoles:
        q.check_inside(bg)
        total += c * np.conj(modal_values("green", [q.r], [q.theta], bg, max_mode)[0])
    for p, a, d in cfg.dipoles:
        p.check_inside(bg)
        total += a * np.conj(modal_values("grad_green", [p.r], [p.theta], bg, max_mode, d=d)[0])
    return FourierCoeffs(bg.radius, total / bg.radius)


def point_source_trace(cfg: PointSourceConfig, bg: BackgroundMedium, n: int = 48, max_mode: int | None = None) -> BoundaryTrace:
    """Samples of the point-source datum at ``n`` uniform angles."""
    if max_mode is None:
        max_mode = n // 2 - 1
    return synthesize(point_source_coeffs(cfg, bg, max_mode), n)


def noise_factors(n: int, seed: int, stream: int = 0) -> np.ndarray:
    """``eps_j`` uniform on ``[-1, 1]`` from a counter-based generator.

    Sample ``j`` depends only on ``(seed, stream, j)``: it is the first draw
    of a Philox generator keyed by ``seed`` with counter ``(j, stream, 0, 0)``.
    Distinct streams give independent noise for different measurements.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    out = np.empty(n)
    for j in range(n):
        bitgen = np.random.Philox(key=seed, counter=[j, stream, 0, 0])
        out[j] = np.random.Generator(bitgen).uniform(-1.0, 1.0)
    return out


def add_noise(trace: BoundaryTrace, delta: float, seed: int, stream: int = 0) -> BoundaryTrace:
    """Multiplicative noise ``u_s (1 + eps delta)``."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if delta == 0:
        return trace
    return BoundaryTrace(trace.radius, trace.values * (1.0 + delta * noise_factors(trace.n, seed, stream)))
