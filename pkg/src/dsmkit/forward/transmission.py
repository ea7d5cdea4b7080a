"""Concentric-disk transmission problems solved by separation of variables.

A disk of radius ``R_i`` centred at the origin carries either a
conductivity ``sigma1`` (with ``V = V0``) or a potential ``V1`` (with
``sigma = sigma0``).  For the incident field
``u0 = I_m(k r) exp(i m theta) / I_m(k)`` only mode ``m`` scatters.

Two scattered fields are available:

* :func:`analytic_transmission` gives the coefficient ``beta_m`` of the
  outgoing wave ``beta_m K_m(k r)`` in the whole plane;
* :func:`bounded_scattered_coefficient` gives the exact boundary value of
  ``u - u0`` in the unit disk with the Neumann influx of ``u0`` kept fixed,
  which is the problem the finite element solver discretizes.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from ..probing import BackgroundMedium, ProbePoint
from ..special import bessel_i_table, bessel_k_table

__all__ = [
    "analytic_transmission",
    "bounded_scattered_coefficient",
    "incident_influx_coefficient",
    "decoupling_ratio",
    "small_inclusion_gradient_ratio",
]

Kind = Literal["sigma", "v"]


def _i_and_prime(m: int, z: float) -> tuple[float, float]:
    t = bessel_i_table(m + 1, z)
    d = t[1] if m == 0 else 0.5 * (t[m - 1] + t[m + 1])
    return float(t[m]), float(d)


def _k_and_prime(m: int, z: float) -> tuple[float, float]:
    t = bessel_k_table(m + 1, z)
    d = -t[1] if m == 0 else -0.5 * (t[m - 1] + t[m + 1])
    return float(t[m]), float(d)


def _check(m: int, bg: BackgroundMedium, radius: float, value: float, kind: str) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"mode must be an integer >= 1, got {m!r}")
    if bg.ksq <= 0:
        raise ValueError("transmission coefficients need k^2 > 0")
    if bg.radius != 1.0:
        raise ValueError("transmission coefficients are stated for the unit disk")
    if not 0 < radius < 1:
        raise ValueError(f"inclusion radius must lie in (0, 1), got {radius}")
    if kind not in ("sigma", "v"):
        raise ValueError(f"kind must be 'sigma' or 'v', got {kind!r}")
    if not value > 0:
        raise ValueError(f"inclusion value must be positive, got {value}")


def _inner_k(bg: BackgroundMedium, kind: str, value: float) -> float:
    if kind == "sigma":
        return math.sqrt(bg.v0 / value)
    return math.sqrt(value / bg.sigma0)


def analytic_transmission(m: int, bg: BackgroundMedium, radius: float, kind: Kind, value: float) -> float:
    """Free-space scattering coefficient ``beta_m`` (``kind='sigma'``) or ``beta~_m`` (``kind='v'``).

    Conductivity contrast, ``k_s^2 = V0 / sigma1``::

        beta_m = (k_s I_m(k_s a) I_m'(k a) - k I_m'(k_s a) I_m(k a))
                 / (k I_m'(k_s a) K_m(k a) - k_s I_m(k_s a) K_m'(k a)) / I_m(k)

    Potential contrast, ``k_v^2 = V1 / sigma0``, with ``k`` and ``k_v``
    exchanged in the prefactors.  The conductivity factors of the flux
    condition are absorbed through ``sigma1 k_s / (sigma0 k) = k / k_s``.
    """
    _check(m, bg, radius, value, kind)
    k = bg.k
    ki = _inner_k(bg, kind, value)
    ii, dii = _i_and_prime(m, ki * radius)
    io, dio = _i_and_prime(m, k * radius)
    ko, dko = _k_and_prime(m, k * radius)
    im_k, _ = _i_and_prime(m, k)
    if kind == "sigma":
        a, b = ki, k
    else:
        a, b = k, ki
    num = a * ii * dio - b * dii * io
    den = b * dii * ko - a * ii * dko
    return num / den / im_k


def incident_influx_coefficient(m: int, bg: BackgroundMedium) -> float:
    """Neumann datum ``k I_m'(k) / I_m(k)`` of ``u0 = I_m(k r) exp(i m theta) / I_m(k)``."""
    im, dim = _i_and_prime(m, bg.k)
    return bg.k * dim / im


def bounded_scattered_coefficient(m: int, bg: BackgroundMedium, radius: float, kind: Kind, value: float) -> float:
    """Boundary value of ``(u - u0) exp(-i m theta)`` in the unit disk.

    Inside ``u = a I_m(k_i r)``.  Outside
    ``u = u0 + B (K_m(k r) - K_m'(k)/I_m'(k) I_m(k r))``, whose bracket has
    zero normal derivative at ``r = 1`` so the influx is unchanged.
    Continuity of ``u`` and of the flux ``sigma du/dr`` at ``r = radius``
    fixes ``a`` and ``B``; the boundary value is ``B / (k I_m'(k))`` by
    the Wronskian.
    """
    _check(m, bg, radius, value, kind)
    k = bg.k
    ki = _inner_k(bg, kind, value)
    s_in = value if kind == "sigma" else bg.sigma0
    ii, dii = _i_and_prime(m, ki * radius)
    io, dio = _i_and_prime(m, k * radius)
    ko, dko = _k_and_prime(m, k * radius)
    im_k, dim_k = _i_and_prime(m, k)
    _, dkm_k = _k_and_prime(m, k)
    c = dkm_k / dim_k
    w, dw = ko - c * io, k * (dko - c * dio)
    # unknowns (a, B)
    lhs = np.array([[ii, -w], [s_in * ki * dii, -bg.sigma0 * dw]])
    rhs = np.array([io / im_k, bg.sigma0 * k * dio / im_k])
    a, B = np.linalg.solve(lhs, rhs)
    return float(B / (k * dim_k))


def decoupling_ratio(m: int, bg: BackgroundMedium, radius: float, sigma1: float, v1: float) -> float:
    """``tau_m = |beta_m| / |beta~_m|`` for a conductivity and a potential disk of equal radius."""
    b = analytic_transmission(m, bg, radius, "sigma", sigma1)
    bt = analytic_transmission(m, bg, radius, "v", v1)
    if sigma1 == bg.sigma0 or v1 == bg.v0:
        raise ZeroDivisionError("both contrasts must be nonzero")
    if bt == 0 or not math.isfinite(bt) or abs(bt) < 1e-300:
        raise ZeroDivisionError(f"beta~_{m} underflows")
    return abs(b) / abs(bt)


def small_inclusion_gradient_ratio(m: int, z1: ProbePoint, z2: ProbePoint, bg: BackgroundMedium) -> float:
    """``|grad u0(z1)| / |u0(z2)|`` for the influx ``exp(i m theta)``::

        sqrt((k I_m'(k r1) / I_m(k r2))^2 + (m / r1 * I_m(k r1) / I_m(k r2))^2)
    """
    if int(m) != m or m < 1:
        raise ValueError(f"mode must be an integer >= 1, got {m!r}")
    if bg.ksq <= 0:
        raise ValueError("the ratio needs k^2 > 0")
    z1.check_inside(bg)
    z2.check_inside(bg)
    if not (z1.r > 0 and z2.r > 0):
        raise ValueError("both points must differ from the origin")
    k = bg.k
    i1, di1 = _i_and_prime(m, k * z1.r)
    i2, _ = _i_and_prime(m, k * z2.r)
    return math.hypot(k * di1 / i2, m / z1.r * i1 / i2)
