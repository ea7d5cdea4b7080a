"""Media, inclusions and boundary influxes, with JSON-style validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

import numpy as np

from ..probing import BackgroundMedium, UnsupportedBackgroundError

__all__ = [
    "ConfigError",
    "Inclusion",
    "MediumConfig",
    "Influx",
    "medium_from_dict",
    "influx_from_dict",
]


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass(frozen=True)
class Inclusion:
    """Disk ``|x - center| < radius`` carrying a conductivity or potential value."""

    center: tuple[float, float]
    radius: float
    kind: Literal["sigma", "v"]
    value: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 2 or not all(math.isfinite(v) for v in c):
            raise ValueError(f"center must be two finite numbers, got {self.center!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "value", float(self.value))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.kind not in ("sigma", "v"):
            raise ValueError(f"kind must be 'sigma' or 'v', got {self.kind!r}")
        if not math.isfinite(self.value):
            raise ValueError("value must be finite")
        if self.kind == "sigma" and not self.value > 0:
            raise ValueError(f"conductivity must be positive, got {self.value}")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.hypot(pts[..., 0] - self.center[0], pts[..., 1] - self.center[1]) < self.radius


@dataclass(frozen=True)
class MediumConfig:
    """Background plus pairwise disjoint inclusions lying inside the disk."""

    background: BackgroundMedium
    inclusions: tuple[Inclusion, ...] = field(default=())

    def __post_init__(self):
        incs = tuple(self.inclusions)
        object.__setattr__(self, "inclusions", incs)
        R = self.background.radius
        for i, inc in enumerate(incs):
            if not math.hypot(*inc.center) + inc.radius < R:
                raise ConfigError(f"inclusions[{i}]: disk reaches the boundary |x| = {R}")
        for i in range(len(incs)):
            for j in range(i + 1, len(incs)):
                a, b = incs[i], incs[j]
                gap = math.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
                if gap < a.radius + b.radius:
                    raise ConfigError(f"inclusions[{i}] and inclusions[{j}] overlap")

    def coefficients(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(sigma, V)`` at points of shape ``(..., 2)``."""
        pts = np.asarray(pts, dtype=float)
        sigma = np.full(pts.shape[:-1], self.background.sigma0, dtype=float)
        v = np.full(pts.shape[:-1], self.background.v0, dtype=float)
        for inc in self.inclusions:
            inside = inc.contains(pts)
            if inc.kind == "sigma":
                sigma[inside] = inc.value
            else:
                v[inside] = inc.value
        return sigma, v

    def homogeneous(self) -> "MediumConfig":
        return MediumConfig(self.background, ())


@dataclass(frozen=True)
class Influx:
    """Neumann datum ``cos(m theta)`` or ``exp(i m theta)``."""

    mode: int
    form: Literal["cos", "exp"] = "cos"

    def __post_init__(self):
        if int(self.mode) != self.mode or self.mode < 0:
            raise ValueError(f"influx mode must be a non-negative integer, got {self.mode!r}")
        object.__setattr__(self, "mode", int(self.mode))
        if self.form not in ("cos", "exp"):
            raise ValueError(f"influx form must be 'cos' or 'exp', got {self.form!r}")

    @property
    def is_real(self) -> bool:
        return self.form == "cos"

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.form == "cos":
            return np.cos(self.mode * theta)
        return np.exp(1j * self.mode * theta)


# ---------------------------------------------------------------------------
# dictionaries (parsed JSON)
# ---------------------------------------------------------------------------
def _num(d: Mapping[str, Any], key: str, path: str, default=None) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}: missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _obj(d: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(d, Mapping):
        raise ConfigError(f"{path}: expected an object")
    return d


def influx_from_dict(d: Any, path: str = "influx") -> Influx:
    d = _obj(d, path)
    mode = d.get("mode")
    if isinstance(mode, bool) or not isinstance(mode, int) or mode < 0:
        raise ConfigError(f"{path}.mode: expected a non-negative integer, got {mode!r}")
    form = d.get("form", "cos")
    if form not in ("cos", "exp"):
        raise ConfigError(f"{path}.form: expected 'cos' or 'exp', got {form!r}")
    return Influx(mode, form)


def medium_from_dict(d: Any) -> MediumConfig:
    """Build a :class:`MediumConfig` from the ``background``/``inclusions`` entries."""
    d = _obj(d, "config")
    b = _obj(d.get("background", {}), "background")
    try:
        bg = BackgroundMedium(
            _num(b, "sigma0", "background", 1.0),
            _num(b, "v0", "background", 10.0),
            _num(b, "radius", "background", 1.0),
        )
    except (ValueError, UnsupportedBackgroundError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"background: {exc}") from None
    raw = d.get("inclusions", [])
    if not isinstance(raw, list):
        raise ConfigError("inclusions: expected a list")
    incs = []
    for i, item in enumerate(raw):
        path = f"inclusions[{i}]"
        item = _obj(item, path)
        center = item.get("center")
        if (
            not isinstance(center, (list, tuple))
            or len(center) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in center)
        ):
            raise ConfigError(f"{path}.center: expected [x, y], got {center!r}")
        kind = item.get("kind")
        if kind not in ("sigma", "v"):
            raise ConfigError(f"{path}.kind: expected 'sigma' or 'v', got {kind!r}")
        try:
            incs.append(Inclusion(tuple(center), _num(item, "radius", path), kind, _num(item, "value", path)))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return MediumConfig(bg, tuple(incs))
