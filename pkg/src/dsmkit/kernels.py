"""Kernels of the sampling method and their maximizers.

For a sampling point ``x`` and a source ``z``::

    K1(x, z)         = |<zeta_x, G_z>|          / (|zeta_x|^n1 |G_x|^n2)
    K2(x, z; dz)     = |<zeta_x, dz.grad G_z>|  / (|zeta_x|^n1 |G_x|^n2)
    K3(x, z; dx)     = |<eta_{x,dx}, G_z>|      / (|eta_{x,dx}|^m1 |dx.grad G_x|^m2)
    K4(x, z; dx, dz) = |<eta_{x,dx}, dz.grad G_z>| / (|eta_{x,dx}|^m1 |dx.grad G_x|^m2)

with pairings and seminorms in ``H^gamma`` of the boundary.  The
denominators always live at the sampling point.  Near the origin
``|zeta_x|`` and ``|G_x|`` vanish, so both are evaluated at radius
``clamp_eta`` whenever ``|x| < clamp_eta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .boundary import SobolevParams, sobolev_weights
from .probing import (
    BackgroundMedium,
    Direction,
    ProbePoint,
    modal_values,
    seminorm_table,
    truncation_modes,
)
from .special import DomainError, _legendre_all, bessel_i_ratio_table, bessel_i_successive_ratios

__all__ = [
    "KernelParams",
    "KernelQuery",
    "ScanResult",
    "FlatFieldWarning",
    "KERNELS",
    "k1",
    "k2",
    "k3",
    "k4",
    "kernel_value",
    "kernel_numerator",
    "kernel_field",
    "k1_numerator_closed_v0",
    "k4_numerator_closed_v0",
    "k1_3d",
    "k1_3d_numerator",
    "seminorms_3d",
    "argmax_scan",
]

KernelName = Literal["k1", "k2", "k3", "k4"]
KERNELS = ("k1", "k2", "k3", "k4")

# (probe kind at x, probe kind at z)
_KINDS = {
    "k1": ("monopole", "green"),
    "k2": ("monopole", "grad_green"),
    "k3": ("dipole", "green"),
    "k4": ("dipole", "grad_green"),
}


class FlatFieldWarning(UserWarning):
    """A scanned field is too flat for its maximizer to mean anything."""


@dataclass(frozen=True)
class KernelParams:
    """Sobolev scale, denominator exponents and origin clamp radius."""

    gamma: float = 1.0
    n1: float = 0.5
    n2: float = 0.5
    m1: float = 0.5
    m2: float = 0.5
    clamp_eta: float = 0.1

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.clamp_eta >= 0:
            raise ValueError(f"clamp_eta must be >= 0, got {self.clamp_eta}")

    @property
    def sobolev(self) -> SobolevParams:
        return SobolevParams(self.gamma)


@dataclass(frozen=True)
class KernelQuery:
    """Sampling point ``x``, source ``z`` and optional probe directions."""

    x: ProbePoint
    z: ProbePoint
    dx: Optional[Direction] = None
    dz: Optional[Direction] = None


@dataclass(frozen=True)
class ScanResult:
    """Maximizer of a scanned kernel.

    ``location`` is ``(r,)`` for radial scans and ``(x, y)`` for planar
    scans; ``grid``/``values`` hold the raw scan before refinement.
    """

    location: tuple
    value: float
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# vectorized evaluation
# ---------------------------------------------------------------------------
def _denominator(kernel: str, r, theta, dx, p: KernelParams, bg: BackgroundMedium) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if kernel in ("k1", "k2"):
        rc = np.maximum(r, p.clamp_eta)
        st = seminorm_table(rc, theta, bg, p.sobolev)
        return np.sqrt(st.zeta2) ** p.n1 * np.sqrt(st.green2) ** p.n2
    st = seminorm_table(r, theta, bg, p.sobolev)
    return np.sqrt(st.eta2(dx)) ** p.m1 * np.sqrt(st.ggrad2(dx)) ** p.m2


def _check_dirs(kernel: str, dx, dz) -> None:
    if kernel in ("k3", "k4") and dx is None:
        raise ValueError(f"{kernel} needs a sampling direction dx")
    if kernel in ("k2", "k4") and dz is None:
        raise ValueError(f"{kernel} needs a source direction dz")


def _numerators(kernel: str, r, theta, z: ProbePoint, dx, dz, p: KernelParams, bg: BackgroundMedium) -> np.ndarray:
    """Complex pairings ``<probe_x, probe_z>`` for many sampling points."""
    if kernel not in _KINDS:
        raise ValueError(f"unknown kernel {kernel!r}")
    _check_dirs(kernel, dx, dz)
    z.check_inside(bg)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape)
    R = bg.radius
    q = float(r.max()) * z.r / (R * R) if r.size else 0.0
    M, _ = truncation_modes(q)
    kx, kz = _KINDS[kernel]
    px = modal_values(kx, r, theta, bg, M, d=dx)
    pz = modal_values(kz, [z.r], [z.theta], bg, M, d=dz)[0]
    n = np.arange(-M, M + 1)
    w = sobolev_weights(n, p.gamma) / (2.0 * np.pi * R)
    return px @ (w * np.conj(pz))


def kernel_field(
    kernel: KernelName,
    r,
    theta,
    z: ProbePoint,
    bg: BackgroundMedium,
    p: KernelParams = KernelParams(),
    dx=None,
    dz: Optional[Direction] = None,
) -> np.ndarray:
    """Kernel values at many sampling points ``(r, theta)`` for a fixed source ``z``.

    ``dx`` is a :class:`Direction`, a 2-vector or an array of per-point
    unit vectors of shape ``(P, 2)``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape)
    num = np.abs(_numerators(kernel, r, theta, z, dx, dz, p, bg))
    den = _denominator(kernel, r, theta, dx, p, bg)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out


def kernel_numerator(kernel: KernelName, q: KernelQuery, p: KernelParams, bg: BackgroundMedium) -> complex:
    """The complex ``H^gamma`` pairing in the numerator of ``kernel``."""
    q.x.check_inside(bg)
    return complex(_numerators(kernel, [q.x.r], [q.x.theta], q.z, q.dx, q.dz, p, bg)[0])


def kernel_value(kernel: KernelName, q: KernelQuery, p: KernelParams, bg: BackgroundMedium) -> float:
    q.x.check_inside(bg)
    return float(kernel_field(kernel, [q.x.r], [q.x.theta], q.z, bg, p, dx=q.dx, dz=q.dz)[0])


def k1(q: KernelQuery, p: KernelParams = KernelParams(), bg: BackgroundMedium = BackgroundMedium()) -> float:
    return kernel_value("k1", q, p, bg)


def k2(q: KernelQuery, p: KernelParams = KernelParams(), bg: BackgroundMedium = BackgroundMedium()) -> float:
    return kernel_value("k2", q, p, bg)


def k3(q: KernelQuery, p: KernelParams = KernelParams(), bg: BackgroundMedium = BackgroundMedium()) -> float:
    return kernel_value("k3", q, p, bg)


def k4(q: KernelQuery, p: KernelParams = KernelParams(), bg: BackgroundMedium = BackgroundMedium()) -> float:
    return kernel_value("k4", q, p, bg)


# ---------------------------------------------------------------------------
# closed forms for V0 = 0, gamma = 1, R = 1
# ---------------------------------------------------------------------------
def _closed_w(x: ProbePoint, z: ProbePoint) -> complex:
    c = x.r * z.r
    if not c < 1:
        raise DomainError(f"closed forms need r_x r_z < 1, got {c}")
    return c * complex(math.cos(x.theta - z.theta), -math.sin(x.theta - z.theta))


def k1_numerator_closed_v0(x: ProbePoint, z: ProbePoint) -> float:
    """``<zeta_x, G_z> = Re{w / (pi (1 - w)^2)}`` with ``w = r_x r_z exp(i (theta_x - theta_z))``."""
    w = _closed_w(x, z)
    return (w / (math.pi * (1 - w) ** 2)).real


def k4_numerator_closed_v0(x: ProbePoint, z: ProbePoint, dx: Direction, dz: Direction) -> float:
    """``<eta_{x,dx}, dz.grad G_z>`` from ``sum n^3 c^(n-1) = (c^2 + 4c + 1)/(1 - c)^4``.

    The modal sum is ``(1/pi) sum_n n^3 (r_x r_z)^(n-1) cos((n-1)(theta_x - theta_z) + alpha_x - alpha_z)``.
    """
    w = _closed_w(x, z)
    s = (w * w + 4 * w + 1) / (1 - w) ** 4
    rot = complex(math.cos(dx.alpha - dz.alpha), -math.sin(dx.alpha - dz.alpha))
    return (rot * s).real / math.pi


# ---------------------------------------------------------------------------
# three dimensions: the unit ball
# ---------------------------------------------------------------------------
def _ball_check(v, bg: BackgroundMedium) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError("3-d points must have three coordinates")
    if bg.ksq <= 0:
        raise DomainError("the ball formulas need k^2 > 0")
    if bg.radius != 1.0:
        raise DomainError("the ball formulas are stated for the unit ball")
    if np.any(np.linalg.norm(v, axis=-1) >= 1.0):
        raise DomainError("3-d points must lie strictly inside the unit ball")
    return v


def _ball_tables(r: np.ndarray, k: float, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """``rho_n(r) / sqrt(r) = I_{n+1/2}(k r) / (I_{n+1/2}(k) sqrt(r))`` and
    ``T_n = I_{n+1/2}(k) / (n I_{n-1/2}(k) + (n+1) I_{n+3/2}(k))`` for ``n = 0..nmax``."""
    rho_s = np.zeros((r.size, nmax + 1))
    pos = r > 0
    if pos.any():
        rho = bessel_i_ratio_table(nmax, k * r[pos], k, half=True)
        rho_s[pos] = rho / np.sqrt(r[pos])[:, None]
    s = bessel_i_successive_ratios(nmax + 1, k, half=True)   # s[j] = I_{j+3/2} / I_{j+1/2}
    n = np.arange(nmax + 1)
    T = np.zeros(nmax + 1)
    T[1:] = 1.0 / (n[1:] / s[: nmax] + (n[1:] + 1) * s[1 : nmax + 1])
    return rho_s, T


def k1_3d_numerator(x, z, bg: BackgroundMedium) -> np.ndarray:
    """``<zeta_x, G_z>_{H^1}`` on the unit sphere; ``x`` may be an array of points."""
    x = _ball_check(x, bg)
    z = _ball_check(z, bg)
    xs = np.atleast_2d(x)
    rx = np.linalg.norm(xs, axis=1)
    rz = float(np.linalg.norm(z))
    M, _ = truncation_modes(float(rx.max()) * rz)
    k = bg.k
    rho_x, T = _ball_tables(rx, k, M)
    rho_z, _ = _ball_tables(np.array([rz]), k, M)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosg = np.where(rx * rz > 0, xs @ z / np.where(rx * rz > 0, rx * rz, 1.0), 1.0)
    P = _legendre_all(M, np.clip(cosg, -1.0, 1.0))
    n = np.arange(M + 1)
    coef = n * (n + 1) * (2 * n + 1) ** 2 * T * rho_z[0] / (4 * math.pi * k)
    out = np.sum(rho_x * P * coef, axis=1)
    return out if np.ndim(x) == 2 else out[0]


def seminorms_3d(r, bg: BackgroundMedium) -> tuple[np.ndarray, np.ndarray]:
    """Squared ``H^1`` seminorms ``(|zeta_x|^2, |G_x|^2)`` at radii ``r`` in the unit ball."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    _ball_check(np.stack([r, 0 * r, 0 * r], axis=1), bg)
    M, _ = truncation_modes(float(r.max()) ** 2)
    k = bg.k
    rho_s, T = _ball_tables(r, k, M)
    n = np.arange(M + 1)
    zeta2 = (rho_s**2) @ (n * (n + 1) * (2 * n + 1)) / (4 * math.pi)
    green2 = (rho_s**2) @ (n * (n + 1) * (2 * n + 1) ** 3 * T**2) / (4 * math.pi * k * k)
    return zeta2, green2


def k1_3d(x, z, p: KernelParams = KernelParams(), bg: BackgroundMedium = BackgroundMedium()):
    """``K1`` in the unit ball with sampling point(s) ``x`` and source ``z``."""
    if p.gamma != 1:
        raise ValueError("the ball kernel is available for gamma = 1 only")
    num = np.abs(k1_3d_numerator(x, z, bg))
    rx = np.linalg.norm(np.atleast_2d(np.asarray(x, dtype=float)), axis=1)
    zeta2, green2 = seminorms_3d(np.maximum(rx, p.clamp_eta), bg)
    out = num / (np.sqrt(zeta2) ** p.n1 * np.sqrt(green2) ** p.n2)
    return out if np.ndim(x) == 2 else float(out[0])


# ---------------------------------------------------------------------------
# maximizers
# ---------------------------------------------------------------------------
def _golden_refine(f, grid: np.ndarray, i: int) -> tuple[float, float]:
    """Golden-section refinement of a grid maximum at interior index ``i``."""
    a, b, c = grid[i - 1], grid[i], grid[i + 1]
    res = minimize_scalar(lambda t: -f(t), bracket=(a, b, c), method="golden", tol=1e-10)
    t = float(res.x)
    if not a <= t <= c:
        return float(b), float(f(b))
    return t, float(-res.fun)


def _flat_check(values: np.ndarray) -> None:
    mean = float(np.mean(values))
    if mean <= 0 or float(np.max(values)) / mean < 1.05:
        warnings.warn("scanned field is flat (max/mean < 1.05)", FlatFieldWarning, stacklevel=3)


def argmax_scan(
    kernel: Literal["k1", "k4"],
    source: ProbePoint,
    scan_grid,
    bg: BackgroundMedium,
    p: KernelParams = KernelParams(),
    dz: Optional[Direction] = None,
    dx: Optional[Direction] = None,
) -> ScanResult:
    """Locate the sampling point where ``kernel`` peaks for a fixed source.

    ``scan_grid`` is either a 1-d array of radii, scanned along the ray
    through the source, or an array of planar points of shape ``(P, 2)``.
    For ``k4`` the sampling direction defaults to the source direction.
    The grid maximum (ties to the lowest index) is refined by one
    golden-section search along each axis.
    """
    if kernel not in ("k1", "k4"):
        raise ValueError(f"argmax scans are defined for k1 and k4, got {kernel!r}")
    if kernel == "k4":
        if dz is None:
            raise ValueError("k4 scans need a source direction")
        dx = dz if dx is None else dx
    grid = np.asarray(scan_grid, dtype=float)
    rmax = 0.95 * bg.radius

    if grid.ndim == 1:
        if np.any(grid < 0) or np.any(grid > rmax):
            raise ValueError(f"scan radii must lie in [0, {rmax}]")
        vals = kernel_field(kernel, grid, source.theta, source, bg, p, dx=dx, dz=dz)
        _flat_check(vals)
        i = int(np.argmax(vals))
        loc, best = (float(grid[i]),), float(vals[i])
        if 0 < i < grid.size - 1:
            f = lambda t: float(kernel_field(kernel, [t], source.theta, source, bg, p, dx=dx, dz=dz)[0])
            t, v = _golden_refine(f, grid, i)
            if v >= best:
                loc, best = (t,), v
        return ScanResult(loc, best, grid, vals)

    if grid.ndim != 2 or grid.shape[1] != 2:
        raise ValueError("planar scan grids must have shape (P, 2)")
    r = np.hypot(grid[:, 0], grid[:, 1])
    if np.any(r > rmax):
        raise ValueError(f"scan points must satisfy r <= {rmax}")
    th = np.arctan2(grid[:, 1], grid[:, 0])
    vals = kernel_field(kernel, r, th, source, bg, p, dx=dx, dz=dz)
    _flat_check(vals)
    i = int(np.argmax(vals))
    pt, best = grid[i].copy(), float(vals[i])

    def at(xy):
        rr = math.hypot(xy[0], xy[1])
        if rr > rmax:
            return -np.inf
        return float(kernel_field(kernel, [rr], [math.atan2(xy[1], xy[0])], source, bg, p, dx=dx, dz=dz)[0])

    for axis in (0, 1):
        line = np.unique(grid[:, axis])
        j = int(np.searchsorted(line, pt[axis]))
        if 0 < j < line.size - 1 and line[j] == pt[axis]:
            def f(t, axis=axis):
                q = pt.copy()
                q[axis] = t
                return at(q)
            t, v = _golden_refine(f, line, j)
            if v >= best:
                pt[axis], best = t, v
    return ScanResult((float(pt[0]), float(pt[1])), best, grid, vals)
