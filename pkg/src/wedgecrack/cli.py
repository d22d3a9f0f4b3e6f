"""Command-line front end: single solves, table comparisons and parameter sweeps.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

import click
import numpy as np

__all__ = ["main", "RunConfig", "parse_angle", "parse_angle_range", "reference_tables"]

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_ANGLE = re.compile(r"^\s*([-+0-9.eE/]+)\s*(deg|rad|pi)\s*$")
_RANGE = re.compile(r"^\s*([-+0-9.eE]+):([-+0-9.eE]+):([-+0-9.eE]+)\s*(deg|rad|pi)\s*$")

SWEEP_COLUMNS = ["problem", "alpha", "a", "b", "delta", "P1", "P2",
                 "K_I_minus", "K_II_minus", "K_I_plus", "K_II_plus",
                 "roots", "truncation", "quad_error", "closure_defect", "status"]


def _to_radians(value: float, unit: str) -> float:
    return {"deg": np.deg2rad(value), "rad": value, "pi": value * np.pi}[unit]


def parse_angle(text: str) -> float:
    """``"90deg"``, ``"1.5708rad"`` or ``"1/2pi"`` to radians; a unit suffix is required."""
    m = _ANGLE.match(text)
    if not m:
        raise ValueError(f"angle {text!r} needs a unit suffix: deg, rad or pi")
    return float(_to_radians(float(Fraction(m.group(1))), m.group(2)))


def parse_angle_range(text: str) -> list[float]:
    """``"start:stop:step<unit>"`` (stop inclusive) or a single angle, to radians."""
    m = _RANGE.match(text)
    if not m:
        return [parse_angle(text)]
    start, stop, step = (float(g) for g in m.groups()[:3])
    if step <= 0 or stop < start:
        raise ValueError(f"bad range {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [float(_to_radians(start + k * step, m.group(4))) for k in range(count)]


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


@dataclass
class RunConfig:
    """Validated parameters for one invocation."""

    subcommand: str
    params: dict = field(default_factory=dict)
    tol: float = 1e-14
    fmt: str = "csv"
    output: str | None = None
    cache_dir: str | None = None
    timestamp: bool = True

    def __post_init__(self):
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")


def _check_alpha(alpha: float):
    if not 0.0 < alpha < np.pi:
        raise ValueError(f"alpha must lie strictly between 0 and pi, got {alpha!r} rad")


def _check_crack(a: float, b: float):
    if b <= 0 or a < 0 or a >= b:
        raise ValueError(f"need 0 <= a < b, got a={a!r}, b={b!r}")


def reference_tables() -> list[dict]:
    """Published values shipped with the package, one dict per entry."""
    text = resources.files("wedgecrack").joinpath("data/reference_tables.csv").read_text()
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [{"table": int(r["table"]), "alpha_over_pi": r["alpha_over_pi"], "quantity": r["quantity"],
             "value": float(r["value"])} for r in rows]


def _render(rows: list[dict], columns: list[str], cfg: RunConfig) -> str:
    if cfg.fmt == "json":
        payload = {"columns": columns, "rows": [{c: row.get(c) for c in columns} for row in rows]}
        if cfg.timestamp:
            payload["generated"] = datetime.now(timezone.utc).isoformat()
        return json.dumps(payload, indent=1, default=lambda v: float(v) if np.isscalar(v) else str(v)) + "\n"
    buf = io.StringIO()
    if cfg.timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _emit(rows, columns, cfg: RunConfig):
    text = _render(rows, columns, cfg)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# ---- computations (module level so worker processes can pickle them) ----

def _edge_row(alpha: float, b: float, load: tuple[float, float] | None, eigen: str | None) -> dict:
    from .edge import sif_edge_constant, sif_edge_eigen
    from .factor import build_khrapkov

    row = {"problem": "edge", "alpha": alpha, "a": 0.0, "b": b}
    if eigen:
        K, D, eig = sif_edge_eigen(alpha, b, 1.0, eigen)
        row.update(mu=eig.mu, k_star=eig.k_star)
    else:
        K, D = sif_edge_constant(alpha, b, load)
        row.update(P1=load[0], P2=load[1])
    row.update(K_I_plus=float(K[0]), K_II_plus=float(K[1]), D11=D[0, 0], D12=D[0, 1], D21=D[1, 0], D22=D[1, 1],
               quad_error=build_khrapkov(alpha).quad_error)
    return row


def _internal_row(alpha: float, a: float, b: float, load: tuple[float, float], tol: float) -> dict:
    from .internal import solve_internal

    res = solve_internal(alpha, a, b, load, tol=tol)
    return _result_row("internal", alpha, a, b, load, res)


def _halfplane_row(a: float, b: float, P: float, tol: float) -> dict:
    from .halfplane import solve_halfplane

    res = solve_halfplane(a, b, P, tol=tol)
    return _result_row("halfplane", np.pi / 2, a, b, (P, 0.0), res)


def _result_row(problem, alpha, a, b, load, res) -> dict:
    d = res.diagnostics
    return {"problem": problem, "alpha": alpha, "a": a, "b": b, "delta": a / b, "P1": load[0], "P2": load[1],
            "K_I_minus": res.K_I_minus, "K_II_minus": res.K_II_minus,
            "K_I_plus": res.K_I_plus, "K_II_plus": res.K_II_plus,
            "dU_minus": res.dU_minus, "dU_plus": res.dU_plus,
            "roots": d.get("roots", 0), "truncation": d.get("truncation", 0.0),
            "residual": d.get("residual", 0.0), "quad_error": d.get("quad_error", 0.0),
            "closure_defect": d.get("closure_defect", 0.0), "transform_identity": d.get("transform_identity", 0.0),
            "status": "ok"}


def _sweep_point(args) -> dict:
    problem, alpha, a, b, load, tol = args
    try:
        if problem == "edge":
            row = _edge_row(alpha, b, load, None)
            row["delta"] = 0.0
        elif problem == "internal":
            row = _internal_row(alpha, a, b, load, tol)
        else:
            row = _halfplane_row(a, b, load[0], tol)
        row.setdefault("status", "ok")
    except Exception as exc:  # per-point failures are recorded, not fatal
        row = {"problem": problem, "alpha": alpha, "a": a, "b": b, "delta": a / b, "P1": load[0], "P2": load[1],
               "status": f"error: {type(exc).__name__}: {exc}"}
    return row


# ---- click plumbing ----

class _Failure(click.ClickException):
    exit_code = EXIT_NUMERICAL


def _validated(fn):
    try:
        return fn()
    except (ValueError, click.BadParameter) as exc:
        raise click.UsageError(str(exc))


def _run(fn):
    from .internal import NoCrackError

    try:
        return fn()
    except NoCrackError as exc:
        raise click.UsageError(str(exc))
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        raise _Failure(f"numerical failure: {type(exc).__name__}: {exc}")


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(f)
    f = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write to a file.")(f)
    f = click.option("--tol", type=float, default=1e-14, show_default=True,
                     help="Truncation tolerance on delta**Re(s_N).")(f)
    f = click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                     help="Factorization cache directory ('' disables caching).")(f)
    f = click.option("--no-timestamp", is_flag=True, help="Omit the generation timestamp.")(f)
    return f


def _config(sub, params, fmt, output, tol, cache_dir, no_timestamp) -> RunConfig:
    cfg = _validated(lambda: RunConfig(sub, params, tol, fmt, output, cache_dir, not no_timestamp))
    if cache_dir is not None:
        from .factor import CACHE_ENV

        os.environ[CACHE_ENV] = cache_dir
    return cfg


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase logging verbosity.")
def main(verbose):
    """Stress intensity factors for cracks in elastic wedges."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--alpha", required=True, help="Wedge angle with unit, e.g. 90deg, 1/2pi, 1.5708rad.")
@click.option("--b", type=float, default=1.0, show_default=True, help="Crack length.")
@click.option("--load", default=None, help="Constant crack-face load 'P1,P2' (normal, shear).")
@click.option("--eigen", type=click.Choice(["first", "second"]), default=None, help="Eigen-solution load.")
@_common
def edge(alpha, b, load, eigen, fmt, output, tol, cache_dir, no_timestamp):
    """Edge crack 0 < r < b along a wedge side."""
    def check():
        ang = parse_angle(alpha)
        _check_alpha(ang)
        _check_crack(0.0, b)
        if (load is None) == (eigen is None):
            raise ValueError("give exactly one of --load or --eigen")
        vals = None
        if load is not None:
            vals = _parse_floats(load)
            if len(vals) != 2:
                raise ValueError("--load expects two values 'P1,P2'")
        return ang, vals

    ang, vals = _validated(check)
    cfg = _config("edge", {"alpha": ang, "b": b, "load": vals, "eigen": eigen}, fmt, output, tol, cache_dir, no_timestamp)
    row = _run(lambda: _edge_row(ang, b, tuple(vals) if vals else None, eigen))
    cols = ["alpha", "b"] + (["mu", "k_star"] if eigen else ["P1", "P2"])
    cols += ["K_I_plus", "K_II_plus", "D11", "D12", "D21", "D22", "quad_error"]
    _emit([row], cols, cfg)


_RESULT_COLUMNS = ["alpha", "a", "b", "delta", "P1", "P2", "K_I_minus", "K_II_minus", "K_I_plus", "K_II_plus",
                   "dU_minus", "dU_plus", "roots", "truncation", "residual", "quad_error", "closure_defect",
                   "transform_identity"]


@main.command()
@click.option("--alpha", required=True, help="Wedge angle with unit.")
@click.option("--a", type=float, required=True, help="Crack start (distance from the vertex).")
@click.option("--b", type=float, required=True, help="Crack end.")
@click.option("--load", default="1,0", show_default=True, help="Constant crack-face load 'P1,P2'.")
@_common
def internal(alpha, a, b, load, fmt, output, tol, cache_dir, no_timestamp):
    """Crack a < r < b along a wedge side; a = 0 gives the edge crack."""
    def check():
        ang = parse_angle(alpha)
        _check_alpha(ang)
        _check_crack(a, b)
        vals = _parse_floats(load)
        if len(vals) != 2:
            raise ValueError("--load expects two values 'P1,P2'")
        return ang, tuple(vals)

    ang, vals = _validated(check)
    cfg = _config("internal", {"alpha": ang, "a": a, "b": b, "load": vals}, fmt, output, tol, cache_dir, no_timestamp)
    row = _run(lambda: _internal_row(ang, a, b, vals, tol))
    _emit([row], _RESULT_COLUMNS, cfg)


@main.command()
@click.option("--a", type=float, required=True, help="Crack start (distance from the boundary).")
@click.option("--b", type=float, required=True, help="Crack end.")
@click.option("--P", "P", type=float, default=1.0, show_default=True, help="Normal crack-face pressure.")
@_common
def halfplane(a, b, P, fmt, output, tol, cache_dir, no_timestamp):
    """Crack a < r < b orthogonal to a half-plane boundary; a = 0 gives the edge crack."""
    _validated(lambda: _check_crack(a, b))
    cfg = _config("halfplane", {"a": a, "b": b, "P": P}, fmt, output, tol, cache_dir, no_timestamp)
    row = _run(lambda: _halfplane_row(a, b, P, tol))
    _emit([row], _RESULT_COLUMNS, cfg)


def table_rows(number: int) -> list[dict]:
    """Computed values next to the published ones for table ``number``."""
    from .edge import sif_edge_constant, sif_edge_eigen

    refs = [r for r in reference_tables() if r["table"] == number]
    computed = {}
    out = []
    for ref in refs:
        key = ref["alpha_over_pi"]
        if key not in computed:
            alpha = float(Fraction(key)) * np.pi
            if number == 1:
                _, D = sif_edge_constant(alpha, 1.0, (1.0, 0.0))
                vals = {}
            else:
                K, D, eig = sif_edge_eigen(alpha, 1.0, 1.0, "first" if number == 2 else "second")
                vals = {"mu": eig.mu, "k_star": eig.k_star, "mu0": eig.mu, "K_I": K[0], "K_II": K[1]}
            vals.update(D11=D[0, 0], D12=D[0, 1], D21=D[1, 0], D22=D[1, 1])
            computed[key] = vals
        value = float(computed[key][ref["quantity"]])
        out.append({"table": number, "alpha_over_pi": key, "quantity": ref["quantity"], "computed": value,
                    "reference": ref["value"], "rel_err": abs(value - ref["value"]) / abs(ref["value"])})
    return out


@main.command()
@click.argument("number", type=click.IntRange(1, 3))
@_common
def tables(number, fmt, output, tol, cache_dir, no_timestamp):
    """Compare table NUMBER (1, 2 or 3) with the shipped reference values."""
    cfg = _config("tables", {"number": number}, fmt, output, tol, cache_dir, no_timestamp)
    rows = _run(lambda: table_rows(number))
    _emit(rows, ["table", "alpha_over_pi", "quantity", "computed", "reference", "rel_err"], cfg)
    click.echo(f"max rel err {max(r['rel_err'] for r in rows):.3g}", err=True)


@main.command()
@click.option("--problem", type=click.Choice(["edge", "internal", "halfplane"]), default="internal",
              show_default=True)
@click.option("--alpha", default="90deg", show_default=True, help="Angle or range 'start:stop:step<unit>'.")
@click.option("--delta", default="1e-4", show_default=True, help="Comma-separated values of a / b.")
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--load", default="1,0", show_default=True, help="Constant crack-face load 'P1,P2'.")
@click.option("--workers", type=click.IntRange(1, None), default=1, show_default=True)
@_common
def sweep(problem, alpha, delta, b, load, workers, fmt, output, tol, cache_dir, no_timestamp):
    """Grid of solves; failures are recorded per row."""
    def check():
        angles = [np.pi / 2] if problem == "halfplane" else parse_angle_range(alpha)
        for ang in angles:
            _check_alpha(ang)
        deltas = [0.0] if problem == "edge" else _parse_floats(delta)
        for d in deltas:
            if problem != "edge" and not 0.0 <= d < 1.0:
                raise ValueError(f"delta must lie in [0, 1), got {d!r}")
        vals = _parse_floats(load)
        if len(vals) != 2:
            raise ValueError("--load expects two values 'P1,P2'")
        return angles, deltas, tuple(vals)

    angles, deltas, vals = _validated(check)
    cfg = _config("sweep", {"problem": problem}, fmt, output, tol, cache_dir, no_timestamp)
    jobs = [(problem, ang, d * b, b, vals, tol) for ang in angles for d in deltas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))     # map keeps grid order
    else:
        rows = [_sweep_point(j) for j in jobs]
    _emit(rows, SWEEP_COLUMNS, cfg)
    if any(r["status"] != "ok" for r in rows):
        click.echo(f"{sum(r['status'] != 'ok' for r in rows)} point(s) failed", err=True)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
