"""Monopole and dipole index functions on a sampling grid.

Given a scattered boundary trace ``u_s``,

    I_mo(x)      = |<zeta_x, u_s>|      / (|zeta_x|^n1 |G_x|^n2)
    I_di(x, d_x) = |<eta_{x,d_x}, u_s>| / (|eta_{x,d_x}|^m1 |d_x . grad G_x|^m2)

The numerators are also the values of the auxiliary field
``phi(x) = <zeta_x, u_s>`` and of its gradient, since
``<eta_{x,d}, u_s> = d . grad phi(x)``.  ``phi`` is the background
solution whose Dirichlet trace is ``(-Laplace_boundary)^gamma u_s``, and the
dipole direction maximizing ``|d . grad phi(x)|`` is used by default.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np

from .boundary import BoundaryTrace, FourierCoeffs, default_max_mode, dft, sobolev_weights, surface_laplacian_power
from .kernels import KernelParams
from .probing import BackgroundMedium, modal_values, seminorm_table

__all__ = [
    "SamplingGrid",
    "IndexField",
    "AuxField",
    "ZeroTraceWarning",
    "LayoutError",
    "sampling_grid",
    "aux_field",
    "optimal_directions",
    "index_mo",
    "index_mo_from_aux",
    "index_di",
    "reconstruct",
    "local_maxima",
    "write_index_csv",
    "write_index_pgm",
    "write_directions_csv",
]

PathLike = Union[str, Path]


class ZeroTraceWarning(UserWarning):
    """The trace vanishes, so the index is zero everywhere."""


class LayoutError(ValueError):
    """Traces that should share a probe layout do not."""


@dataclass(frozen=True)
class SamplingGrid:
    """Cartesian lattice points ``(i h + x0, j h + x0)`` with ``r <= max_radius``.

    ``ij`` holds the integer lattice indices of each point; ``shape`` is the
    size of the bounding lattice.
    """

    points: np.ndarray
    ij: np.ndarray
    spacing: float
    max_radius: float
    origin: float
    shape: tuple[int, int]

    @property
    def r(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    @property
    def theta(self) -> np.ndarray:
        return np.arctan2(self.points[:, 1], self.points[:, 0])

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def nearest(self, xy) -> int:
        d = np.hypot(self.points[:, 0] - xy[0], self.points[:, 1] - xy[1])
        return int(np.argmin(d))


def sampling_grid(spacing: float = 0.02, max_radius: Optional[float] = None, radius: float = 1.0) -> SamplingGrid:
    """Lattice of spacing ``spacing`` symmetric about the origin, clipped to ``r <= max_radius``.

    ``max_radius`` defaults to ``0.95 radius``.
    """
    if max_radius is None:
        max_radius = 0.95 * radius
    if not (spacing > 0 and 0 < max_radius < radius):
        raise ValueError(f"need spacing > 0 and 0 < max_radius < {radius}")
    half = int(math.floor(max_radius / spacing + 1e-9))
    idx = np.arange(-half, half + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="xy")
    ii, jj = ii.ravel(), jj.ravel()
    pts = np.column_stack([ii * spacing, jj * spacing])
    keep = np.hypot(pts[:, 0], pts[:, 1]) <= max_radius * (1 + 1e-12)
    n = idx.size
    return SamplingGrid(
        points=pts[keep],
        ij=np.column_stack([ii[keep] + half, jj[keep] + half]),
        spacing=float(spacing),
        max_radius=float(max_radius),
        origin=-half * spacing,
        shape=(n, n),
    )


@dataclass(frozen=True)
class AuxField:
    """``phi`` and its complex gradient (shape ``(P, 2)``) on a grid."""

    grid: SamplingGrid
    phi: np.ndarray
    grad_phi: np.ndarray


@dataclass(frozen=True)
class IndexField:
    """Index values on a grid plus ``normalized_sq = (raw / max raw)^2``."""

    grid: SamplingGrid
    raw: np.ndarray
    kind: Literal["monopole", "dipole"]
    normalized_sq: np.ndarray = field(init=False)
    directions: Optional[np.ndarray] = None
    degenerate: Optional[np.ndarray] = None

    def __post_init__(self):
        mx = float(np.max(self.raw)) if self.raw.size else 0.0
        ns = (self.raw / mx) ** 2 if mx > 0 else np.zeros_like(self.raw)
        object.__setattr__(self, "normalized_sq", ns)

    @property
    def argmax(self) -> tuple[float, float]:
        i = int(np.argmax(self.raw))
        return (float(self.grid.points[i, 0]), float(self.grid.points[i, 1]))

    def peak_to_mean(self) -> float:
        ns = self.normalized_sq
        m = float(np.mean(ns))
        return float(np.max(ns)) / m if m > 0 else 0.0


# ---------------------------------------------------------------------------
# field evaluation
# ---------------------------------------------------------------------------
def _coeffs(trace: BoundaryTrace, bg: BackgroundMedium, max_mode: Optional[int]) -> FourierCoeffs:
    if abs(trace.radius - bg.radius) > 1e-12:
        raise LayoutError(f"trace radius {trace.radius} differs from background radius {bg.radius}")
    return dft(trace, default_max_mode(trace.n) if max_mode is None else max_mode)


def _is_zero(fc: FourierCoeffs) -> bool:
    return not np.any(fc.coeffs)


def aux_field(
    trace: BoundaryTrace,
    grid: SamplingGrid,
    gamma: float,
    bg: BackgroundMedium,
    max_mode: Optional[int] = None,
) -> AuxField:
    """``phi`` as the background extension of the Dirichlet datum ``(-Laplace_boundary)^gamma u_s``.

    A boundary datum ``g`` extends to ``(1/2 pi) sum ghat(n) phi_n(x)``.
    """
    fc = _coeffs(trace, bg, max_mode)
    g = surface_laplacian_power(fc, gamma).coeffs / (2.0 * np.pi)
    M = fc.max_mode
    r, th = grid.r, grid.theta
    phi = modal_values("monopole", r, th, bg, M) @ g
    gx = modal_values("dipole", r, th, bg, M, d=(1.0, 0.0)) @ g
    gy = modal_values("dipole", r, th, bg, M, d=(0.0, 1.0)) @ g
    return AuxField(grid, phi, np.column_stack([gx, gy]))


def optimal_directions(aux: AuxField, rel_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors maximizing ``|d . grad phi(x)|`` over real ``d``.

    With ``g = grad phi`` complex, ``|d . g|^2 = (d . Re h)^2 + (d . Im h)^2``
    for ``h = exp(-i psi) g``; taking ``psi = arg(g . g) / 2`` makes
    ``Re h`` and ``Im h`` orthogonal with ``|Re h| >= |Im h|``, so the
    maximizer is ``Re h / |Re h|``.  Where ``|g|`` is below ``rel_tol``
    times its grid maximum the radial direction (``e1`` at the origin) is
    used and the point is flagged.

    Returns ``(directions, degenerate)`` of shapes ``(P, 2)`` and ``(P,)``.
    """
    g = aux.grad_phi
    mag = np.sqrt(np.sum(np.abs(g) ** 2, axis=1))
    gmax = float(mag.max()) if mag.size else 0.0
    degenerate = mag <= rel_tol * gmax if gmax > 0 else np.ones(mag.shape, dtype=bool)
    psi = 0.5 * np.angle(g[:, 0] ** 2 + g[:, 1] ** 2)
    h = np.real(np.exp(-1j * psi)[:, None] * g)
    hn = np.linalg.norm(h, axis=1)
    degenerate |= hn == 0
    pts = aux.grid.points
    pr = np.hypot(pts[:, 0], pts[:, 1])
    radial = np.where(pr[:, None] > 0, pts / np.where(pr > 0, pr, 1.0)[:, None], np.array([1.0, 0.0]))
    safe = np.where(hn > 0, hn, 1.0)
    d = np.where(degenerate[:, None], radial, h / safe[:, None])
    return d, degenerate


def _mo_denominator(grid: SamplingGrid, p: KernelParams, bg: BackgroundMedium) -> np.ndarray:
    rc = np.maximum(grid.r, p.clamp_eta)
    st = seminorm_table(rc, grid.theta, bg, p.sobolev)
    return np.sqrt(st.zeta2) ** p.n1 * np.sqrt(st.green2) ** p.n2


def _di_denominator(grid: SamplingGrid, d: np.ndarray, p: KernelParams, bg: BackgroundMedium) -> np.ndarray:
    st = seminorm_table(grid.r, grid.theta, bg, p.sobolev)
    return np.sqrt(st.eta2(d)) ** p.m1 * np.sqrt(st.ggrad2(d)) ** p.m2


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def _pair_probes(kind: str, fc: FourierCoeffs, grid: SamplingGrid, p: KernelParams, bg: BackgroundMedium, d=None) -> np.ndarray:
    """Direct pairings ``<probe_x, u_s>`` from the probes' boundary coefficients."""
    M = fc.max_mode
    probe = np.conj(modal_values(kind, grid.r, grid.theta, bg, M, d=d)) / bg.radius
    w = bg.radius * sobolev_weights(fc.modes, p.gamma) / (2.0 * np.pi)
    return np.conj(probe) @ (w * fc.coeffs)


def index_mo(
    trace: BoundaryTrace,
    grid: SamplingGrid,
    p: KernelParams = KernelParams(),
    bg: BackgroundMedium = BackgroundMedium(),
    max_mode: Optional[int] = None,
) -> IndexField:
    """Monopole index by pairing each ``zeta_x`` with the trace."""
    fc = _coeffs(trace, bg, max_mode)
    if _is_zero(fc):
        warnings.warn("trace is identically zero; index set to 0", ZeroTraceWarning, stacklevel=2)
        return IndexField(grid, np.zeros(grid.size), "monopole")
    num = np.abs(_pair_probes("monopole", fc, grid, p, bg))
    return IndexField(grid, _ratio(num, _mo_denominator(grid, p, bg)), "monopole")


def index_mo_from_aux(aux: AuxField, p: KernelParams, bg: BackgroundMedium) -> IndexField:
    """Monopole index as ``|phi(x)|`` over the same denominator."""
    return IndexField(aux.grid, _ratio(np.abs(aux.phi), _mo_denominator(aux.grid, p, bg)), "monopole")


def index_di(
    trace: BoundaryTrace,
    grid: SamplingGrid,
    p: KernelParams = KernelParams(),
    bg: BackgroundMedium = BackgroundMedium(),
    directions: Optional[np.ndarray] = None,
    max_mode: Optional[int] = None,
) -> IndexField:
    """Dipole index; ``directions`` (shape ``(P, 2)`` or ``(2,)``) default to the optimal ones."""
    fc = _coeffs(trace, bg, max_mode)
    if _is_zero(fc):
        warnings.warn("trace is identically zero; index set to 0", ZeroTraceWarning, stacklevel=2)
        return IndexField(grid, np.zeros(grid.size), "dipole")
    degenerate = None
    if directions is None:
        directions, degenerate = optimal_directions(aux_field(trace, grid, p.gamma, bg, fc.max_mode))
    d = np.asarray(directions, dtype=float)
    if d.shape == (2,):
        d = np.tile(d, (grid.size, 1))
    if d.shape != (grid.size, 2):
        raise ValueError(f"directions must have shape ({grid.size}, 2)")
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    num = np.abs(_pair_probes("dipole", fc, grid, p, bg, d=d))
    raw = _ratio(num, _di_denominator(grid, d, p, bg))
    return IndexField(grid, raw, "dipole", directions=d, degenerate=degenerate)


def reconstruct(
    low_trace: BoundaryTrace,
    high_trace: BoundaryTrace,
    grid: SamplingGrid,
    p: KernelParams = KernelParams(),
    bg: BackgroundMedium = BackgroundMedium(),
) -> tuple[IndexField, IndexField]:
    """Monopole index from the low-frequency trace, dipole index from the high-frequency one."""
    if low_trace.n != high_trace.n or abs(low_trace.radius - high_trace.radius) > 1e-12:
        raise LayoutError(
            f"traces use different probe layouts: {low_trace.n} vs {high_trace.n} samples"
        )
    return index_mo(low_trace, grid, p, bg), index_di(high_trace, grid, p, bg)


# ---------------------------------------------------------------------------
# peaks and output
# ---------------------------------------------------------------------------
def _lattice(fieldv: np.ndarray, grid: SamplingGrid) -> np.ndarray:
    img = np.full(grid.shape[::-1], np.nan)          # rows: j (y), columns: i (x)
    img[grid.ij[:, 1], grid.ij[:, 0]] = fieldv
    return img


def local_maxima(fieldv: IndexField, threshold: float = 0.5) -> list[tuple[float, float, float]]:
    """Grid points above all 8 neighbours and at least ``threshold`` of the global max.

    Returns ``(x, y, normalized_sq)`` sorted by decreasing value.
    """
    vals = fieldv.normalized_sq
    grid = fieldv.grid
    img = _lattice(vals, grid)
    pad = np.pad(img, 1, constant_values=np.nan)
    H, W = img.shape
    is_max = np.ones_like(img, dtype=bool)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dj == 0 and di == 0:
                continue
            nb = pad[1 + dj : 1 + dj + H, 1 + di : 1 + di + W]
            is_max &= np.isnan(nb) | (img > nb)
    top = np.nanmax(img) if np.any(np.isfinite(img)) else 0.0
    sel = is_max[grid.ij[:, 1], grid.ij[:, 0]] & (vals >= threshold * top) & (vals > 0)
    out = [(float(grid.points[i, 0]), float(grid.points[i, 1]), float(vals[i])) for i in np.flatnonzero(sel)]
    out.sort(key=lambda t: (-t[2], t[0], t[1]))
    return out


def write_index_csv(fieldv: IndexField, path: PathLike) -> None:
    """``x,y,value`` rows of the normalized-squared field."""
    pts = fieldv.grid.points
    with open(path, "w", newline="") as fh:
        fh.write("x,y,value\n")
        for (x, y), v in zip(pts, fieldv.normalized_sq):
            fh.write(f"{x:.17g},{y:.17g},{v:.17g}\n")


def write_index_pgm(fieldv: IndexField, path: PathLike) -> None:
    """Binary 8-bit PGM of the normalized-squared field; top row is the largest ``y``."""
    img = _lattice(fieldv.normalized_sq, fieldv.grid)[::-1]
    gray = np.where(np.isnan(img), 0, np.clip(np.rint(255.0 * np.nan_to_num(img)), 0, 255)).astype(np.uint8)
    H, W = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{W} {H}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def write_directions_csv(fieldv: IndexField, path: PathLike) -> None:
    if fieldv.directions is None:
        raise ValueError("field carries no directions")
    deg = fieldv.degenerate if fieldv.degenerate is not None else np.zeros(fieldv.grid.size, dtype=bool)
    with open(path, "w", newline="") as fh:
        fh.write("x,y,dx,dy,degenerate\n")
        for (x, y), (dx, dy), f in zip(fieldv.grid.points, fieldv.directions, deg):
            fh.write(f"{x:.17g},{y:.17g},{dx:.17g},{dy:.17g},{int(bool(f))}\n")
