"""Modified Bessel functions and Legendre polynomials.

Everything in the spectral layer is built from ratios such as
``I_n(k r) / I_n(k R)``.  Numerator and denominator overflow or underflow
independently long before the ratio leaves ``(0, 1]``, so the workhorse here
is a mantissa/exponent evaluation of a whole run of orders at once, exposed
through :func:`bessel_i_ratio_table` and :func:`log_bessel_i_table`.

Evaluation strategy
-------------------
* ``I_nu``: Miller's backward recurrence, started well above ``max(n, z)``
  and normalized either by ``e^z = I_0 + 2 sum_k I_k`` (integer orders) or by
  the closed form of ``I_{1/2}`` (half-integer orders).  The power series
  takes over for ``z <= 1``.  Rescaling uses exact powers of two.
* ``K_n``: ``K_0`` and ``K_1`` from their power series for ``z <= 2`` and from
  Steed's continued fraction (CF2) above, then upward recurrence, which is
  stable for ``K``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DomainError",
    "MAX_ORDER",
    "bessel_i",
    "bessel_k",
    "bessel_i_prime",
    "bessel_k_prime",
    "bessel_i_half",
    "legendre_p",
    "log_bessel_i_table",
    "bessel_i_table",
    "bessel_i_ratio_table",
    "bessel_i_successive_ratios",
    "bessel_k_table",
]

MAX_ORDER = 200

_EULER_GAMMA = 0.57721566490153286061
_SHIFT = 600                    # rescale by 2**-600: exact in binary floating point
_RESCALE = 2.0 ** _SHIFT
_SERIES_MAX_Z = 1.0
_LN2 = math.log(2.0)


class DomainError(ValueError):
    """Argument outside the domain where a special function is defined."""


def _check_order(n: int, allow_neg: bool = False) -> int:
    if int(n) != n:
        raise DomainError(f"order must be an integer, got {n!r}")
    n = int(n)
    if n < 0 and not allow_neg:
        raise DomainError(f"order must be >= 0, got {n}")
    if abs(n) > MAX_ORDER:
        raise DomainError(f"order {n} exceeds the supported cap of {MAX_ORDER}")
    return n


def _check_arg(z: float, strict: bool) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"argument must be finite, got {z}")
    if z < 0.0 or (strict and z == 0.0):
        bound = "> 0" if strict else ">= 0"
        raise DomainError(f"argument must be {bound}, got {z}")
    return z


def _exp_split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``e^x`` as ``(mantissa, exponent)`` with ``e^x = mantissa * 2**exponent``."""
    q = np.floor(x / _LN2)
    return np.exp(x - q * _LN2), q


def _miller(nmax: int, z: np.ndarray, nu0: float) -> tuple[np.ndarray, np.ndarray]:
    """``I_{nu0 + j}(z)``, ``j = 0..nmax``, as mantissa/exponent arrays; ``z > 0``."""
    big = float(max(nmax, z.max()))
    start = int(big + 3.0 * math.sqrt(80.0 * max(big, 1.0)) + 40)

    val = np.zeros((z.size, nmax + 1))
    cnt = np.zeros((z.size, nmax + 1))
    nxt = np.zeros_like(z)
    cur = np.ones_like(z)
    shifts = np.zeros_like(z)
    total = np.zeros_like(z)

    for j in range(start, 0, -1):
        if j <= nmax:
            val[:, j] = cur
            cnt[:, j] = shifts
        if nu0 == 0.0:
            total += 2.0 * cur
        prev = nxt + (2.0 * (j + nu0) / z) * cur
        nxt, cur = cur, prev
        hot = cur > _RESCALE
        if hot.any():
            nxt[hot] /= _RESCALE
            cur[hot] /= _RESCALE
            total[hot] /= _RESCALE
            shifts[hot] += 1
    val[:, 0] = cur
    cnt[:, 0] = shifts

    if nu0 == 0.0:
        # e^z = I_0 + 2 sum_k I_k
        total += cur
        fm, fe = _exp_split(z)
        dm, de = np.frexp(total)
    else:
        # I_{1/2}(z) = sqrt(2/(pi z)) sinh z
        fm, fe = _exp_split(z)
        fm = fm * np.sqrt(2.0 / (math.pi * z)) * 0.5 * (-np.expm1(-2.0 * z))
        dm, de = np.frexp(cur)
    vm, ve = np.frexp(val)
    mant = vm * (fm / dm)[:, None]
    expo = ve + _SHIFT * (cnt - shifts[:, None]) + (fe - de)[:, None]
    return mant, expo


def _series(nmax: int, z: np.ndarray, nu0: float) -> tuple[np.ndarray, np.ndarray]:
    """Power series ``sum_m (z/2)^(2m+nu) / (m! Gamma(nu+m+1))`` for small ``z``."""
    nu = nu0 + np.arange(nmax + 1)
    q = (z * z / 4.0)[:, None]
    term = np.ones((z.size, nmax + 1))
    acc = np.ones((z.size, nmax + 1))
    for m in range(1, 40):
        term = term * q / (m * (nu + m))
        acc += term
    # leading factor (z/2)^nu / Gamma(nu+1), built order by order with renormalization
    lead_m = np.empty((z.size, nmax + 1))
    lead_e = np.empty((z.size, nmax + 1))
    m0, e0 = np.frexp((z / 2.0) ** nu0 / math.gamma(nu0 + 1.0))
    lead_m[:, 0], lead_e[:, 0] = m0, e0
    for n in range(1, nmax + 1):
        m, e = np.frexp(lead_m[:, n - 1] * (z / 2.0) / nu[n])
        lead_m[:, n] = m
        lead_e[:, n] = lead_e[:, n - 1] + e
    am, ae = np.frexp(acc)
    return lead_m * am, lead_e + ae


def _bessel_i_parts(nmax: int, z, half: bool) -> tuple[np.ndarray, np.ndarray, tuple]:
    nmax = _check_order(nmax)
    za = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(za)) or np.any(za < 0):
        raise DomainError("arguments must be finite and >= 0")
    nu0 = 0.5 if half else 0.0
    flat = za.ravel()
    mant = np.zeros((flat.size, nmax + 1))
    expo = np.zeros((flat.size, nmax + 1))
    zero = flat == 0.0
    if zero.any():
        if half:
            raise DomainError("half-integer orders require z > 0")
        mant[zero, 0] = 1.0
    small = (~zero) & (flat <= _SERIES_MAX_Z)
    if small.any():
        mant[small], expo[small] = _series(nmax, flat[small], nu0)
    rest = flat > _SERIES_MAX_Z
    if rest.any():
        mant[rest], expo[rest] = _miller(nmax, flat[rest], nu0)
    return mant, expo, za.shape + (nmax + 1,)


def log_bessel_i_table(nmax: int, z, half: bool = False) -> np.ndarray:
    """Natural log of ``I_nu(z)`` for ``nu = nu0, nu0+1, ..., nu0+nmax``.

    ``nu0`` is 0, or 1/2 when ``half`` is set.  The result has shape
    ``z.shape + (nmax + 1,)``.  Entries are ``-inf`` where ``I_nu(z) = 0``
    (positive order at ``z = 0``).
    """
    mant, expo, shape = _bessel_i_parts(nmax, z, half)
    with np.errstate(divide="ignore"):
        out = np.log(mant) + expo * _LN2
    return out.reshape(shape)


def bessel_i_table(nmax: int, z, half: bool = False) -> np.ndarray:
    """``I_nu(z)`` for a run of orders; see :func:`log_bessel_i_table`."""
    mant, expo, shape = _bessel_i_parts(nmax, z, half)
    return np.ldexp(mant, expo.astype(int)).reshape(shape)


def bessel_i_ratio_table(nmax: int, num, den, half: bool = False) -> np.ndarray:
    """``I_nu(num) / I_nu(den)`` for a run of orders without overflow.

    ``den`` must be positive; ``num`` may be zero (ratio 0 for ``nu > 0``).
    ``num`` and ``den`` are broadcast against each other.
    """
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    if np.any(den <= 0):
        raise DomainError("denominator argument must be > 0")
    am, ae, shape = _bessel_i_parts(nmax, num, half)
    bm, be, _ = _bessel_i_parts(nmax, den, half)
    return np.ldexp(am / bm, (ae - be).astype(int)).reshape(shape)


def bessel_i_successive_ratios(nmax: int, z: float, half: bool = False) -> np.ndarray:
    """``I_{nu+1}(z) / I_nu(z)`` for ``nu = nu0..nu0+nmax-1`` at a single ``z > 0``."""
    z = _check_arg(z, strict=True)
    mant, expo, _ = _bessel_i_parts(nmax, z, half)
    return np.ldexp(mant[0, 1:] / mant[0, :-1], (expo[0, 1:] - expo[0, :-1]).astype(int))


# ---------------------------------------------------------------------------
# second kind
# ---------------------------------------------------------------------------
def _k01_series(x: float) -> tuple[float, float]:
    q = x * x / 4.0
    lg = math.log(x / 2.0)
    # K_0 = -(ln(x/2) + gamma) I_0 + sum q^k / (k!)^2 H_k
    i0 = 0.0
    i1 = 0.0
    s0 = 0.0
    s1 = 0.0
    term0 = 1.0          # q^k / (k!)^2
    term1 = x / 2.0      # (x/2) q^k / (k! (k+1)!)
    harm = 0.0           # H_k
    for k in range(60):
        if k > 0:
            term0 *= q / (k * k)
            term1 *= q / (k * (k + 1))
            harm += 1.0 / k
        i0 += term0
        i1 += term1
        s0 += term0 * harm
        # psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        s1 += term1 * (-2.0 * _EULER_GAMMA + 2.0 * harm + 1.0 / (k + 1))
        if term0 < 1e-18 * i0 and k > 2:
            break
    k0 = -(lg + _EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.5 * s1
    return k0, k1


def _k_cf2(x: float, mu: float) -> tuple[float, float]:
    """Steed's CF2: ``K_mu(x)`` and ``K_{mu+1}(x)`` for ``x >= 2``, ``|mu| <= 1/2``."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    kmu1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, kmu1


def _k01(x: float) -> tuple[float, float]:
    if x <= 2.0:
        return _k01_series(x)
    return _k_cf2(x, 0.0)


def bessel_k_table(nmax: int, z) -> np.ndarray:
    """``K_n(z)`` for ``n = 0..nmax``; shape ``z.shape + (nmax + 1,)``.

    Orders whose value overflows come back as ``inf``.
    """
    nmax = _check_order(nmax)
    za = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(za)) or np.any(za <= 0):
        raise DomainError("K_n requires finite z > 0")
    flat = za.ravel()
    out = np.empty((flat.size, nmax + 2))
    for i, x in enumerate(flat):
        out[i, 0], out[i, 1] = _k01(x)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax + 1):
            out[:, n + 1] = out[:, n - 1] + (2.0 * n / flat) * out[:, n]
    return out[:, : nmax + 1].reshape(za.shape + (nmax + 1,))


# ---------------------------------------------------------------------------
# scalar front ends
# ---------------------------------------------------------------------------
def bessel_i(n: int, z: float) -> float:
    """Modified Bessel function of the first kind ``I_n(z)``, ``n >= 0``, ``z >= 0``."""
    n = _check_order(n)
    z = _check_arg(z, strict=False)
    return float(np.exp(log_bessel_i_table(n, z)[n]))


def bessel_k(n: int, z: float) -> float:
    """Modified Bessel function of the second kind ``K_n(z)``, ``z > 0``."""
    n = _check_order(n)
    z = _check_arg(z, strict=True)
    return float(bessel_k_table(n, z)[n])


def bessel_i_prime(n: int, z: float) -> float:
    """``I_n'(z) = (I_{n-1}(z) + I_{n+1}(z)) / 2`` (``I_1`` for ``n = 0``)."""
    n = _check_order(n)
    z = _check_arg(z, strict=False)
    vals = np.exp(log_bessel_i_table(min(n + 1, MAX_ORDER), z))
    if n == 0:
        return float(vals[1])
    upper = vals[n + 1] if n + 1 <= MAX_ORDER else 0.0
    return float(0.5 * (vals[n - 1] + upper))


def bessel_k_prime(n: int, z: float) -> float:
    """``K_n'(z) = -(K_{n-1}(z) + K_{n+1}(z)) / 2`` (``-K_1`` for ``n = 0``)."""
    n = _check_order(n)
    z = _check_arg(z, strict=True)
    vals = bessel_k_table(min(n + 1, MAX_ORDER), z)
    if n == 0:
        return float(-vals[1])
    return float(-0.5 * (vals[n - 1] + vals[n + 1]))


def bessel_i_half(order: float, z: float) -> float:
    """``I_{n+1/2}(z)`` for a half-integer order ``n + 1/2 >= 1/2`` and ``z > 0``."""
    n = order - 0.5
    if n < 0 or n != int(n):
        raise DomainError(f"order must be a half-integer >= 1/2, got {order!r}")
    n = _check_order(int(n))
    z = _check_arg(z, strict=True)
    return float(np.exp(log_bessel_i_table(n, z, half=True)[n]))


def legendre_p(n: int, t: float) -> float:
    """Legendre polynomial ``P_n(t)`` on ``[-1, 1]`` by the three-term recurrence."""
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    t = float(t)
    if not -1.0 <= t <= 1.0:
        raise DomainError(f"argument must lie in [-1, 1], got {t}")
    return float(_legendre_all(int(n), np.asarray(t))[..., -1])


def _legendre_all(nmax: int, t: np.ndarray) -> np.ndarray:
    """``P_0..P_nmax`` at ``t``; shape ``t.shape + (nmax + 1,)``."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (nmax + 1,))
    out[..., 0] = 1.0
    if nmax >= 1:
        out[..., 1] = t
    for k in range(1, nmax):
        out[..., k + 1] = ((2 * k + 1) * t * out[..., k] - k * out[..., k - 1]) / (k + 1)
    return out
