"""Probing functions on the disk ``B_R`` and their Fourier representations.

The background operator ``-sigma0 Laplace + V0`` on ``B_R`` has
Neumann-to-Dirichlet eigenpairs

    phi_n(r, theta) = I_n(k r) / I_n(k R) exp(i n theta),
    lambda_n        = I_n(k R) / (k I_n'(k R)),

with ``k^2 = V0 / sigma0``; for ``k = 0`` they degenerate to
``(r/R)^|n| exp(i n theta)`` and ``R / |n|``.  Every probe used by the
sampling method is a modal sum over these pairs:

=============  ===================================
kind           boundary coefficient ``fhat(n)``
=============  ===================================
monopole       ``conj(phi_n(x)) / R``
dipole         ``conj(d . grad phi_n(x)) / R``
green          ``lambda_n conj(phi_n(x)) / R``
grad_green     ``lambda_n conj(d . grad phi_n(x)) / R``
=============  ===================================

so that pairing a probe at ``x`` with data ``u`` gives
``(1/2 pi) sum |n|^(2 gamma) P_n(x) uhat(n)`` where ``P_n`` is the matching
modal function.  All radial dependence goes through three real factors per
order ``m = |n|``:

* ``rho_m(r) = I_m(k r) / I_m(k R)``,
* ``A_m(r) = d rho_m / d r``  (radial derivative),
* ``B_m(r) = rho_m(r) / r``    (angular factor, finite at ``r = 0``),

and ``grad phi_n = exp(i n theta) (A_m e_r + i n B_m e_theta)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .boundary import FourierCoeffs, SobolevParams, sobolev_pair, sobolev_weights
from .special import (
    MAX_ORDER,
    DomainError,
    bessel_i_ratio_table,
    bessel_i_successive_ratios,
    bessel_i_table,
)

__all__ = [
    "BackgroundMedium",
    "ProbePoint",
    "Direction",
    "ProbeSpectrum",
    "RadialTable",
    "TruncationWarning",
    "UnsupportedBackgroundError",
    "PROBE_KINDS",
    "radial_table",
    "truncation_modes",
    "eigenfunction",
    "eigenvalue",
    "grad_eigenfunction",
    "modal_values",
    "probe_coeffs",
    "zeta_pointwise",
    "eta_pointwise",
    "seminorm_closed_v0",
    "SeminormTable",
    "seminorm_table",
]

ProbeKind = Literal["monopole", "dipole", "green", "grad_green"]
PROBE_KINDS = ("monopole", "dipole", "green", "grad_green")

# Modal sums are cut where the geometric factor drops below this level.
_TRUNC_TOL = 1e-16


class TruncationWarning(UserWarning):
    """A modal series was cut before its terms became negligible."""


class UnsupportedBackgroundError(ValueError):
    """The requested representation does not exist for this background."""


@dataclass(frozen=True)
class BackgroundMedium:
    """Homogeneous background ``sigma0``, ``V0`` on the disk of radius ``R``."""

    sigma0: float = 1.0
    v0: float = 10.0
    radius: float = 1.0

    def __post_init__(self):
        for name in ("sigma0", "v0", "radius"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be > 0, got {self.sigma0}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.v0 < 0:
            raise UnsupportedBackgroundError(
                "V0 < 0 gives k^2 < 0, which needs ordinary rather than modified Bessel functions"
            )

    @property
    def ksq(self) -> float:
        return self.v0 / self.sigma0

    @property
    def k(self) -> float:
        return math.sqrt(self.ksq)


@dataclass(frozen=True)
class ProbePoint:
    """Point ``(r cos theta, r sin theta)`` in polar coordinates."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", float(self.theta))
        if not (math.isfinite(self.r) and math.isfinite(self.theta)):
            raise ValueError("probe point coordinates must be finite")
        if self.r < 0:
            raise ValueError(f"radius must be >= 0, got {self.r}")

    @classmethod
    def from_xy(cls, x: float, y: float) -> "ProbePoint":
        return cls(math.hypot(x, y), math.atan2(y, x))

    @property
    def x(self) -> float:
        return self.r * math.cos(self.theta)

    @property
    def y(self) -> float:
        return self.r * math.sin(self.theta)

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def rotated(self, beta: float) -> "ProbePoint":
        return ProbePoint(self.r, self.theta + beta)

    def check_inside(self, bg: BackgroundMedium) -> None:
        if not self.r < bg.radius:
            raise DomainError(f"point at r={self.r} is not inside the disk of radius {bg.radius}")


@dataclass(frozen=True)
class Direction:
    """Unit vector ``d = (-sin alpha, cos alpha)``."""

    alpha: float

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Direction":
        vx, vy = float(v[0]), float(v[1])
        if vx == 0.0 and vy == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(math.atan2(-vx, vy))

    @property
    def vector(self) -> np.ndarray:
        return np.array([-math.sin(self.alpha), math.cos(self.alpha)])

    def rotated(self, beta: float) -> "Direction":
        return Direction(self.alpha + beta)


E1 = Direction(-math.pi / 2)
E2 = Direction(0.0)


# ---------------------------------------------------------------------------
# radial factors
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RadialTable:
    """``rho``, ``A``, ``B`` of shape ``(P, nmax + 1)`` and ``lam`` of shape ``(nmax + 1,)``.

    ``lam[0]`` is ``nan`` when ``k = 0`` (no zero-mode eigenvalue).
    """

    r: np.ndarray
    rho: np.ndarray
    A: np.ndarray
    B: np.ndarray
    lam: np.ndarray

    @property
    def nmax(self) -> int:
        return self.lam.size - 1


def radial_table(r, bg: BackgroundMedium, nmax: int) -> RadialTable:
    """Radial factors ``rho_m, A_m, B_m`` for ``m = 0..nmax`` at radii ``r``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if r.ndim != 1:
        raise ValueError("radii must be a 1-d array")
    if np.any(r < 0) or np.any(r >= bg.radius):
        raise DomainError(f"radii must lie in [0, {bg.radius})")
    if not 0 <= nmax <= MAX_ORDER:
        raise ValueError(f"nmax must lie in [0, {MAX_ORDER}], got {nmax}")
    R = bg.radius
    m = np.arange(nmax + 1)
    P = r.size
    A = np.zeros((P, nmax + 1))
    B = np.zeros((P, nmax + 1))
    if bg.ksq == 0:
        rt = r / R
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = rt[:, None] ** m[None, :]
        rho[:, 0] = 1.0
        if nmax >= 1:
            A[:, 1:] = m[1:] * rho[:, :-1] / R
            B[:, 1:] = rho[:, :-1] / R
        lam = np.full(nmax + 1, np.nan)
        lam[1:] = R / m[1:]
        return RadialTable(r, rho, A, B, lam)

    k = bg.k
    kR = k * R
    full = bessel_i_ratio_table(nmax + 1, k * r, kR)  # (P, nmax + 2)
    rho = full[:, : nmax + 1]
    c = bessel_i_successive_ratios(nmax + 1, kR)       # c[m] = I_{m+1}/I_m at kR
    A[:, 0] = k * full[:, 1] * c[0]
    if nmax >= 1:
        A[:, 1:] = 0.5 * k * (full[:, : nmax] / c[: nmax] + full[:, 2 : nmax + 2] * c[1 : nmax + 1])
    pos = r > 0
    # B_0 only ever multiplies the angular derivative of a constant, so it stays zero
    B[pos, 1:] = rho[pos, 1:] / r[pos, None]
    if nmax >= 1:
        # I_1(k r) / r -> k / 2 as r -> 0; higher orders vanish
        B[~pos, 1] = 0.5 * k * full[~pos, 0] / c[0]
    lam = np.empty(nmax + 1)
    lam[0] = 1.0 / (k * c[0])
    if nmax >= 1:
        lam[1:] = 2.0 / (k * (1.0 / c[: nmax] + c[1 : nmax + 1]))
    return RadialTable(r, rho, A, B, lam)


def truncation_modes(q: float, cap: int = MAX_ORDER - 1) -> tuple[int, bool]:
    """Modes needed for a series whose terms decay like ``q^n``.

    Returns ``(n, capped)``; ``capped`` is true when ``cap`` binds.
    """
    q = float(q)
    if q <= 0:
        return 2, False
    if q >= 1:
        return cap, True
    need = int(math.ceil(math.log(_TRUNC_TOL) / math.log(q))) + 4
    need = max(need, 4)
    return (cap, True) if need > cap else (need, False)


def _warn_cap(capped: bool, what: str, rtilde: float) -> None:
    if capped and rtilde > 0.95:
        warnings.warn(
            f"{what}: series truncated at {MAX_ORDER - 1} modes for r/R = {rtilde:.4g}",
            TruncationWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# single-mode evaluation
# ---------------------------------------------------------------------------
def eigenfunction(n: int, x: ProbePoint, bg: BackgroundMedium) -> complex:
    """``phi_n(x)``."""
    x.check_inside(bg)
    t = radial_table([x.r], bg, abs(n))
    return complex(t.rho[0, abs(n)] * np.exp(1j * n * x.theta))


def eigenvalue(n: int, bg: BackgroundMedium) -> float:
    """``lambda_n``; undefined for ``n = 0`` when ``k = 0``."""
    if n == 0 and bg.ksq == 0:
        raise DomainError("lambda_0 is undefined for k = 0")
    return float(radial_table([0.0], bg, abs(n)).lam[abs(n)])


def _grad_parts(n: int, theta: float, A: float, B: float) -> np.ndarray:
    er = np.array([math.cos(theta), math.sin(theta)])
    et = np.array([-math.sin(theta), math.cos(theta)])
    return np.exp(1j * n * theta) * (A * er + 1j * n * B * et)


def grad_eigenfunction(n: int, x: ProbePoint, bg: BackgroundMedium) -> np.ndarray:
    """Cartesian gradient of ``phi_n`` at ``x`` as a complex 2-vector."""
    x.check_inside(bg)
    m = abs(n)
    t = radial_table([x.r], bg, m)
    return _grad_parts(n, x.theta, t.A[0, m], t.B[0, m])


# ---------------------------------------------------------------------------
# vectorized modal values
# ---------------------------------------------------------------------------
def _as_dirs(d, count: int) -> np.ndarray:
    """Direction input as an array of unit vectors of shape ``(count, 2)``."""
    if isinstance(d, Direction):
        return np.tile(d.vector, (count, 1))
    arr = np.asarray(d, dtype=float)
    if arr.shape == (2,):
        return np.tile(arr, (count, 1))
    if arr.shape != (count, 2):
        raise ValueError(f"directions must have shape (2,) or ({count}, 2), got {arr.shape}")
    return arr


def modal_values(
    kind: ProbeKind,
    r,
    theta,
    bg: BackgroundMedium,
    max_mode: int,
    d=None,
    table: Optional[RadialTable] = None,
) -> np.ndarray:
    """Modal functions ``P_n(x)`` for ``n = -max_mode..max_mode`` at many points.

    Returns shape ``(P, 2 max_mode + 1)``: ``phi_n``, ``d . grad phi_n``,
    ``lambda_n phi_n`` or ``lambda_n d . grad phi_n`` depending on ``kind``.
    The green zero mode is set to 0 when ``k = 0``.
    """
    if kind not in PROBE_KINDS:
        raise ValueError(f"unknown probe kind {kind!r}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape)
    if table is None or table.nmax < max_mode:
        table = radial_table(r, bg, max_mode)
    n = np.arange(-max_mode, max_mode + 1)
    m = np.abs(n)
    phase = np.exp(1j * np.outer(theta, n))
    if kind in ("monopole", "green"):
        vals = table.rho[:, m] * phase
    else:
        if d is None:
            raise ValueError(f"{kind} probes need a direction")
        dv = _as_dirs(d, r.size)
        c, s = np.cos(theta), np.sin(theta)
        d_r = dv[:, 0] * c + dv[:, 1] * s
        d_t = -dv[:, 0] * s + dv[:, 1] * c
        vals = phase * (table.A[:, m] * d_r[:, None] + 1j * n * table.B[:, m] * d_t[:, None])
    if kind in ("green", "grad_green"):
        lam = np.nan_to_num(table.lam[m], nan=0.0)
        vals = vals * lam
    return vals


# ---------------------------------------------------------------------------
# probe spectra
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ProbeSpectrum:
    """Boundary Fourier coefficients of one probe."""

    kind: str
    source: ProbePoint
    direction: Optional[Direction]
    coeffs: FourierCoeffs
    background: BackgroundMedium

    def seminorm(self, p: SobolevParams = SobolevParams()) -> float:
        val = sobolev_pair(self.coeffs, self.coeffs, p).real
        return math.sqrt(max(val, 0.0))

    def pair(self, data: FourierCoeffs, p: SobolevParams = SobolevParams()) -> complex:
        """``<probe, data>`` in ``H^gamma``."""
        return sobolev_pair(self.coeffs, data, p)


def probe_coeffs(
    kind: ProbeKind,
    x: ProbePoint,
    d: Optional[Direction],
    bg: BackgroundMedium,
    max_mode: int = 60,
) -> ProbeSpectrum:
    """Fourier coefficients of the ``kind`` probe located at ``x``.

    Warns with :class:`TruncationWarning` when the last retained mode is
    not negligible (above ``1e-12`` of the largest coefficient).
    """
    x.check_inside(bg)
    if kind in ("dipole", "grad_green") and d is None:
        raise ValueError(f"{kind} probes need a direction")
    vals = modal_values(kind, [x.r], [x.theta], bg, max_mode, d=d)[0]
    coeffs = np.conj(vals) / bg.radius
    big = np.abs(coeffs).max()
    tail = max(abs(coeffs[0]), abs(coeffs[-1]))
    if big > 0 and tail > 1e-12 * big:
        warnings.warn(
            f"{kind} probe at r={x.r:.4g}: mode {max_mode} is {tail / big:.2e} of the largest",
            TruncationWarning,
            stacklevel=2,
        )
    return ProbeSpectrum(kind, x, d, FourierCoeffs(bg.radius, coeffs), bg)


# ---------------------------------------------------------------------------
# pointwise boundary traces on the unit disk
# ---------------------------------------------------------------------------
def _pointwise_check(x: ProbePoint, bg: BackgroundMedium) -> None:
    if bg.ksq <= 0:
        raise UnsupportedBackgroundError("pointwise probe traces need k^2 > 0")
    if bg.radius != 1.0:
        raise UnsupportedBackgroundError("pointwise probe traces are defined on the unit disk")
    x.check_inside(bg)


def zeta_pointwise(x: ProbePoint, y_angle, bg: BackgroundMedium, max_mode: int = 60):
    """Monopole trace ``(1/2 pi) sum_n I_n(k r_x)/I_n(k) exp(i n (theta_y - theta_x))``."""
    _pointwise_check(x, bg)
    k = bg.k
    n = np.arange(-max_mode, max_mode + 1)
    ik = bessel_i_table(max_mode, k)
    ikr = bessel_i_table(max_mode, k * x.r)
    c = ikr[np.abs(n)] / ik[np.abs(n)]
    y = np.asarray(y_angle, dtype=float)
    out = np.exp(1j * np.multiply.outer(y - x.theta, n)) @ c / (2.0 * np.pi)
    return complex(out) if out.ndim == 0 else out


def _eta_basis_coeffs(x: ProbePoint, bg: BackgroundMedium, max_mode: int) -> tuple[np.ndarray, np.ndarray]:
    k = bg.k
    n = np.arange(-max_mode, max_mode + 1)
    m = np.abs(n)
    ik = bessel_i_table(max_mode + 1, k)
    ikr = bessel_i_table(max_mode + 1, k * x.r)
    dikr = np.empty(max_mode + 1)
    dikr[0] = ikr[1]
    dikr[1:] = 0.5 * (ikr[: max_mode] + ikr[2:])
    if x.r > 0:
        over_r = ikr[: max_mode + 1] / x.r
    else:
        over_r = np.zeros(max_mode + 1)
        if max_mode >= 1:
            over_r[1] = 0.5 * k
    radial = k * dikr[m] / ik[m]
    angular = n * over_r[m] / ik[m]
    cx, sx = math.cos(x.theta), math.sin(x.theta)
    e1 = radial * cx + 1j * angular * sx
    e2 = radial * sx - 1j * angular * cx
    return e1, e2


def eta_pointwise(
    x: ProbePoint,
    basis: Union[str, Direction, Sequence[float]],
    y_angle,
    bg: BackgroundMedium,
    max_mode: int = 60,
):
    """Dipole trace ``eta_{x,d}(theta_y)`` on the unit circle.

    ``basis`` is ``"e1"``, ``"e2"``, a :class:`Direction` or a 2-vector
    ``(d1, d2)``; general directions combine the two basis traces linearly.
    """
    _pointwise_check(x, bg)
    if isinstance(basis, str):
        if basis not in ("e1", "e2"):
            raise ValueError(f"basis must be 'e1' or 'e2', got {basis!r}")
        w = (1.0, 0.0) if basis == "e1" else (0.0, 1.0)
    elif isinstance(basis, Direction):
        w = tuple(basis.vector)
    else:
        w = (float(basis[0]), float(basis[1]))
    e1, e2 = _eta_basis_coeffs(x, bg, max_mode)
    c = w[0] * e1 + w[1] * e2
    n = np.arange(-max_mode, max_mode + 1)
    y = np.asarray(y_angle, dtype=float)
    out = np.exp(1j * np.multiply.outer(y - x.theta, n)) @ c / (2.0 * np.pi)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------
def seminorm_closed_v0(kind: ProbeKind, x: ProbePoint, R: float = 1.0, gamma: float = 1.0) -> float:
    """Closed-form ``H^1`` seminorm of a probe when ``V0 = 0``.

    With ``t = r/R``:

    * monopole   ``|zeta|^2     = t^2 (1 + t^2) / (pi R (1 - t^2)^3)``
    * dipole     ``|eta|^2      = (t^6 + 11 t^4 + 11 t^2 + 1) / (pi R^3 (1 - t^2)^5)``
    * green      ``|G|^2        = R t^2 / (pi (1 - t^2))``
    * grad_green ``|d.grad G|^2 = (1 + t^2) / (pi R (1 - t^2)^3)``

    The dipole forms do not depend on the direction.
    """
    if gamma != 1:
        raise ValueError("closed forms exist for gamma = 1 only")
    t = x.r / R
    if not 0 <= t < 1:
        raise DomainError(f"r/R must lie in [0, 1), got {t}")
    c = t * t
    if kind == "monopole":
        sq = c * (1 + c) / (math.pi * R * (1 - c) ** 3)
    elif kind == "dipole":
        sq = (c**3 + 11 * c**2 + 11 * c + 1) / (math.pi * R**3 * (1 - c) ** 5)
    elif kind == "green":
        sq = R * c / (math.pi * (1 - c))
    elif kind == "grad_green":
        sq = (1 + c) / (math.pi * R * (1 - c) ** 3)
    else:
        raise ValueError(f"unknown probe kind {kind!r}")
    return math.sqrt(sq)


@dataclass(frozen=True)
class SeminormTable:
    """Squared ``H^gamma`` seminorms of all four probe families at many points.

    The dipole-type norms depend on the direction only through its radial
    and angular components::

        |eta_{x,d}|^2 = (d . e_r)^2 eta_rr + (d . e_theta)^2 eta_tt
    """

    r: np.ndarray
    theta: np.ndarray
    zeta2: np.ndarray
    green2: np.ndarray
    eta_rr: np.ndarray
    eta_tt: np.ndarray
    ggrad_rr: np.ndarray
    ggrad_tt: np.ndarray

    def _split(self, d) -> tuple[np.ndarray, np.ndarray]:
        dv = _as_dirs(d, self.r.size)
        c, s = np.cos(self.theta), np.sin(self.theta)
        d_r = dv[:, 0] * c + dv[:, 1] * s
        d_t = -dv[:, 0] * s + dv[:, 1] * c
        return d_r**2, d_t**2

    def eta2(self, d) -> np.ndarray:
        a, b = self._split(d)
        return a * self.eta_rr + b * self.eta_tt

    def ggrad2(self, d) -> np.ndarray:
        a, b = self._split(d)
        return a * self.ggrad_rr + b * self.ggrad_tt


def seminorm_table(r, theta, bg: BackgroundMedium, p: SobolevParams = SobolevParams(), nmax: Optional[int] = None) -> SeminormTable:
    """Squared seminorms summed until the tail is negligible (at most ``MAX_ORDER`` modes)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape).copy()
    rmax = float(r.max() / bg.radius) if r.size else 0.0
    if nmax is None:
        nmax, capped = truncation_modes(rmax * rmax)
        _warn_cap(capped, "seminorm", rmax)
    t = radial_table(r, bg, nmax)
    m = np.arange(nmax + 1)
    w = sobolev_weights(m, p.gamma, p.zero_mode_weight)
    # modes +m and -m contribute equally; mode 0 once
    mult = np.where(m == 0, 1.0, 2.0) * w / (2.0 * np.pi * bg.radius)
    lam2 = np.nan_to_num(t.lam, nan=0.0) ** 2
    zeta2 = (t.rho**2) @ mult
    green2 = (t.rho**2) @ (mult * lam2)
    eta_rr = (t.A**2) @ mult
    eta_tt = (t.B**2) @ (mult * m**2)
    return SeminormTable(
        r=r,
        theta=theta,
        zeta2=zeta2,
        green2=green2,
        eta_rr=eta_rr,
        eta_tt=eta_tt,
        ggrad_rr=(t.A**2) @ (mult * lam2),
        ggrad_tt=(t.B**2) @ (mult * lam2 * m**2),
    )
