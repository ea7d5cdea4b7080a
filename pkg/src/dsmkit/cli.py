"""Command-line front end: forward simulation, reconstruction, kernel scans, verification.

Subcommands
-----------
``forward``      solve the forward problem for the two influxes and write traces
``reconstruct``  compute the monopole and dipole index fields from the traces
``kernels``      scan the analytic kernels (``k1`` .. ``k4``, ``argmax``, ``3d``)
``verify``       run the acceptance suite

Exit codes: 0 success, 2 configuration error, 3 solver error,
4 data-consistency error.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .boundary import BoundaryTrace, read_trace_csv, write_trace_csv
from .forward import (
    DEFAULT_H,
    ConfigError,
    Influx,
    MediumConfig,
    MeshError,
    SolverError,
    add_noise,
    influx_from_dict,
    medium_from_dict,
    mesh_disk,
    scattered_traces,
)
from .kernels import KERNELS, KernelParams, argmax_scan, k1_3d, kernel_field
from .probing import BackgroundMedium, Direction, ProbePoint
from .reconstruction import (
    IndexField,
    LayoutError,
    SamplingGrid,
    index_di,
    index_mo,
    local_maxima,
    reconstruct,
    sampling_grid,
    write_directions_csv,
    write_index_csv,
    write_index_pgm,
)

__all__ = ["ExperimentSpec", "spec_from_dict", "load_spec", "run_forward", "run_reconstruct", "main"]

SCHEMA_VERSION = "dsmkit-summary/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_DATA = 4

TRACE_FILES = ("trace_low.csv", "trace_high.csv", "trace_low_clean.csv", "trace_high_clean.csv")


class DataError(RuntimeError):
    """Input data are missing or inconsistent with the configuration."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed for one two-measurement experiment."""

    medium: MediumConfig
    influx_low: Influx
    influx_high: Optional[Influx]
    probes: int = 48
    delta: float = 0.0
    seed: int = 0
    spacing: float = 0.02
    max_radius: Optional[float] = None
    params: KernelParams = KernelParams()
    mesh_h: float = DEFAULT_H
    formulation: str = "difference"

    @property
    def background(self) -> BackgroundMedium:
        return self.medium.background

    def grid(self) -> SamplingGrid:
        return sampling_grid(self.spacing, self.max_radius, self.background.radius)

    def influxes(self) -> list[Influx]:
        return [self.influx_low] if self.influx_high is None else [self.influx_low, self.influx_high]


def _get_obj(d: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    v = d.get(key, {})
    if not isinstance(v, Mapping):
        raise ConfigError(f"{key}: expected an object")
    return v


def _get_num(d: Mapping[str, Any], key: str, path: str, default, positive: bool = False, integer: bool = False):
    if key not in d or d[key] is None:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {v!r}")
    return int(v) if integer else float(v)


def spec_from_dict(d: Any, single: bool = False) -> ExperimentSpec:
    """Validate a parsed JSON configuration.

    ``influx_low``/``influx_high`` are required unless ``single`` is set, in
    which case ``influx`` (or ``influx_low``) alone is used.
    """
    if not isinstance(d, Mapping):
        raise ConfigError("config: expected a JSON object")
    medium = medium_from_dict(d)
    if single:
        key = "influx" if "influx" in d else "influx_low"
        if key not in d:
            raise ConfigError("influx: missing (single-influx mode needs 'influx' or 'influx_low')")
        low, high = influx_from_dict(d[key], key), None
    else:
        for key in ("influx_low", "influx_high"):
            if key not in d:
                raise ConfigError(f"{key}: missing")
        low = influx_from_dict(d["influx_low"], "influx_low")
        high = influx_from_dict(d["influx_high"], "influx_high")
        if not low.mode < high.mode:
            raise ConfigError(
                f"influx_high.mode: must exceed influx_low.mode ({high.mode} <= {low.mode})"
            )
    probes = _get_obj(d, "probes")
    count = _get_num(probes, "count", "probes", 48, positive=True, integer=True)
    noise = _get_obj(d, "noise")
    delta = _get_num(noise, "delta", "noise", 0.0)
    if delta < 0:
        raise ConfigError(f"noise.delta: must be >= 0, got {delta}")
    seed = _get_num(noise, "seed", "noise", 0, integer=True)
    if seed < 0:
        raise ConfigError(f"noise.seed: must be >= 0, got {seed}")
    grid = _get_obj(d, "grid")
    spacing = _get_num(grid, "spacing", "grid", 0.02, positive=True)
    max_radius = _get_num(grid, "max_radius", "grid", None, positive=True)
    R = medium.background.radius
    if max_radius is not None and not max_radius < R:
        raise ConfigError(f"grid.max_radius: must be below the radius {R}, got {max_radius}")
    praw = _get_obj(d, "params")
    known = {"gamma", "n1", "n2", "m1", "m2", "clamp_eta"}
    unknown = sorted(set(praw) - known)
    if unknown:
        raise ConfigError(f"params.{unknown[0]}: unknown parameter")
    defaults = KernelParams()
    try:
        params = KernelParams(**{k: _get_num(praw, k, "params", getattr(defaults, k)) for k in known})
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None
    mesh = _get_obj(d, "mesh")
    h = _get_num(mesh, "h", "mesh", DEFAULT_H, positive=True)
    if not h < R / 4:
        raise ConfigError(f"mesh.h: must be below R/4 = {R / 4}, got {h}")
    formulation = mesh.get("formulation", "difference")
    if formulation not in ("difference", "scattered"):
        raise ConfigError(f"mesh.formulation: expected 'difference' or 'scattered', got {formulation!r}")
    return ExperimentSpec(medium, low, high, count, delta, seed, spacing, max_radius, params, h, formulation)


def load_spec(path: str | Path, single: bool = False) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return spec_from_dict(data, single)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------
def run_forward(spec: ExperimentSpec, out: str | Path) -> list[Path]:
    """Write clean and noisy traces for each influx; returns the written paths.

    The low trace uses noise stream 0 and the high trace stream 1 of the
    configured seed.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = mesh_disk(spec.background.radius, spec.mesh_h)
    traces = scattered_traces(spec.medium, spec.influxes(), mesh, spec.probes, spec.formulation)
    names = ("low", "high")
    written = []
    for stream, (name, clean) in enumerate(zip(names, traces)):
        noisy = add_noise(clean, spec.delta, spec.seed, stream)
        for fname, tr in ((f"trace_{name}_clean.csv", clean), (f"trace_{name}.csv", noisy)):
            write_trace_csv(tr, out / fname)
            written.append(out / fname)
    return written


def _read_trace(path: Path, spec: ExperimentSpec) -> BoundaryTrace:
    if not path.exists():
        raise DataError(f"{path.name}: missing (run 'forward' first)")
    try:
        tr = read_trace_csv(path, spec.background.radius)
    except ValueError as exc:
        raise DataError(f"{path.name}: {exc}") from None
    if tr.n != spec.probes:
        raise DataError(f"{path.name}: {tr.n} samples but probes.count = {spec.probes}")
    return tr


def _fmt(v: float) -> float:
    return float(f"{v:.17g}")


def _summary(spec: ExperimentSpec, mo: IndexField, di: IndexField, single: bool) -> str:
    p = spec.params
    body = {
        "schema_version": SCHEMA_VERSION,
        "argmax_mo": [_fmt(v) for v in mo.argmax],
        "argmax_di": [_fmt(v) for v in di.argmax],
        "local_maxima_mo": [[_fmt(v) for v in m] for m in local_maxima(mo)],
        "local_maxima_di": [[_fmt(v) for v in m] for m in local_maxima(di)],
        "params": {
            "gamma": p.gamma,
            "n1": p.n1,
            "n2": p.n2,
            "m1": p.m1,
            "m2": p.m2,
            "clamp_eta": p.clamp_eta,
            "spacing": spec.spacing,
            "max_radius": mo.grid.max_radius,
            "probes": spec.probes,
            "noise_delta": spec.delta,
            "noise_seed": spec.seed,
            "influx_low": {"mode": spec.influx_low.mode, "form": spec.influx_low.form},
            "influx_high": None
            if spec.influx_high is None
            else {"mode": spec.influx_high.mode, "form": spec.influx_high.form},
            "single": single,
        },
    }
    # the schema version shares the first line with the opening brace
    lines = json.dumps(body, indent=2).split("\n")
    lines[0:2] = ["{" + lines[1].strip()]
    return "\n".join(lines) + "\n"


def run_reconstruct(spec: ExperimentSpec, out: str | Path, traces: str | Path | None = None, single: bool = False) -> dict:
    """Compute both index fields and write CSV, PGM, directions and summary files."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    src = Path(traces) if traces is not None else out
    low = _read_trace(src / "trace_low.csv", spec)
    grid = spec.grid()
    if single:
        mo = index_mo(low, grid, spec.params, spec.background)
        di = index_di(low, grid, spec.params, spec.background)
    else:
        high = _read_trace(src / "trace_high.csv", spec)
        mo, di = reconstruct(low, high, grid, spec.params, spec.background)
    write_index_csv(mo, out / "index_mo.csv")
    write_index_pgm(mo, out / "index_mo.pgm")
    write_index_csv(di, out / "index_di.csv")
    write_index_pgm(di, out / "index_di.pgm")
    write_directions_csv(di, out / "directions.csv")
    text = _summary(spec, mo, di, single)
    (out / "summary.json").write_text(text)
    return json.loads(text)


# ---------------------------------------------------------------------------
# kernel scans
# ---------------------------------------------------------------------------
def _floats(text: str, count: int, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"--{name}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"--{name}: expected {count} comma-separated numbers, got {text!r}")
    return vals


def _kernel_background(args, default_v0: float) -> BackgroundMedium:
    if args.config is not None:
        data = json.loads(Path(args.config).read_text())
        bg = medium_from_dict(data).background
        if args.v0 is not None:
            bg = replace(bg, v0=args.v0)
        return bg
    return BackgroundMedium(1.0, default_v0 if args.v0 is None else args.v0, 1.0)


def _write_rows(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def run_kernels(args) -> int:
    params = KernelParams(gamma=args.gamma if args.gamma is not None else 1.0)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    mode = args.mode
    if mode in KERNELS:
        bg = _kernel_background(args, 0.0)
        z = ProbePoint.from_xy(*_floats(args.z, 2, "z"))
        z.check_inside(bg)
        grid = sampling_grid(args.spacing, None, bg.radius)
        needs_dz = mode in ("k2", "k4")
        needs_dx = mode in ("k3", "k4")
        dz = Direction(args.alpha_z if args.alpha_z is not None else z.theta) if needs_dz else None
        dx = Direction(args.alpha_x if args.alpha_x is not None else z.theta) if needs_dx else None
        vals = kernel_field(mode, grid.r, grid.theta, z, bg, params, dx=dx, dz=dz)
        i = int(np.argmax(vals))
        if out is not None:
            _write_rows(out / f"{mode}.csv", "x,y,value", ((x, y, v) for (x, y), v in zip(grid.points, vals)))
        print(f"{mode} argmax {grid.points[i, 0]:.17g},{grid.points[i, 1]:.17g} value {vals[i]:.17g}")
        return EXIT_OK
    if mode == "argmax":
        bg = _kernel_background(args, 0.0)
        kern = args.kernel
        r1 = args.r1
        if not 0 < r1 < 0.95 * bg.radius:
            raise ConfigError(f"--r1: must lie in (0, {0.95 * bg.radius}), got {r1}")
        src = ProbePoint(r1, 0.0)
        radii = np.linspace(0.0, 0.95 * bg.radius, 951)
        dz = Direction(0.0) if kern == "k4" else None
        res = argmax_scan(kern, src, radii, bg, params, dz=dz)
        if out is not None:
            _write_rows(out / f"argmax_{kern}.csv", "r,value", zip(res.grid, res.values))
        print(f"{kern} r1 {r1:g} argmax r2 {res.location[0]:.17g} value {res.value:.17g}")
        return EXIT_OK
    if mode == "3d":
        bg = _kernel_background(args, 10.0)
        x = np.array(_floats(args.x, 3, "x"))
        h = args.spacing3d
        ax = np.arange(-0.9, 0.9 + 1e-9, h)
        g = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
        g = g[np.linalg.norm(g, axis=1) <= 0.9]
        vals = k1_3d(g, x, params, bg)
        i = int(np.argmax(vals))
        if out is not None:
            _write_rows(out / "k1_3d.csv", "x,y,z,value", ((*p, v) for p, v in zip(g, vals)))
        print("3d argmax " + ",".join(f"{v:.17g}" for v in g[i]) + f" value {vals[i]:.17g}")
        return EXIT_OK
    raise ConfigError(f"kernels: unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------
def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dsmkit", description="Direct sampling for conductivity and potential inclusions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON experiment file")
        p.add_argument("--out", required=config_required, help="output directory")

    p = sub.add_parser("forward", help="simulate boundary traces")
    common(p)
    p.add_argument("--single", action="store_true", help="one influx only")

    p = sub.add_parser("reconstruct", help="compute index fields from traces")
    common(p)
    p.add_argument("--traces", help="directory holding the trace CSVs (default: --out)")
    p.add_argument("--single", action="store_true", help="both indices from the low-frequency trace")
    p.add_argument("--gamma", type=float, help="override the Sobolev scale")

    p = sub.add_parser("kernels", help="scan the analytic kernels")
    p.add_argument("mode", choices=list(KERNELS) + ["argmax", "3d"])
    p.add_argument("kernel", nargs="?", choices=["k1", "k4"], default="k4", help="kernel for 'argmax'")
    common(p, config_required=False)
    p.add_argument("--z", default="0.5,0.2", help="source point x,y")
    p.add_argument("--x", default="0.114,0.114,0.396", help="3-d source point x,y,z")
    p.add_argument("--r1", type=float, default=0.4, help="source radius for 'argmax'")
    p.add_argument("--alpha-z", dest="alpha_z", type=float, help="source dipole angle")
    p.add_argument("--alpha-x", dest="alpha_x", type=float, help="sampling dipole angle")
    p.add_argument("--v0", type=float, help="background potential (sigma0 = 1)")
    p.add_argument("--gamma", type=float, help="Sobolev scale")
    p.add_argument("--spacing", type=float, default=0.02, help="planar grid spacing")
    p.add_argument("--spacing3d", type=float, default=0.1, help="3-d grid spacing")

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p, config_required=False)
    return ap


def _verify(args) -> int:
    here = Path(__file__).resolve()
    candidates = [parent / "tests" / "test_acceptance.py" for parent in here.parents]
    target = next((c for c in candidates if c.exists()), None)
    if target is None:
        print("error: tests/test_acceptance.py not found", file=sys.stderr)
        return EXIT_DATA
    cmd = [sys.executable, "-m", "pytest", "-q", "-s", str(target)]
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        cmd += ["--junitxml", str(Path(args.out) / "acceptance.xml")]
    return subprocess.call(cmd)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "forward":
            spec = load_spec(args.config, args.single)
            for path in run_forward(spec, args.out):
                print(path)
            return EXIT_OK
        if args.command == "reconstruct":
            spec = load_spec(args.config, args.single)
            if args.gamma is not None:
                try:
                    spec = replace(spec, params=replace(spec.params, gamma=args.gamma))
                except ValueError as exc:
                    raise ConfigError(f"--gamma: {exc}") from None
            summary = run_reconstruct(spec, args.out, args.traces, args.single)
            print(f"argmax_mo {summary['argmax_mo']} argmax_di {summary['argmax_di']}")
            return EXIT_OK
        if args.command == "kernels":
            return run_kernels(args)
        return _verify(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, MeshError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, LayoutError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
