"""Command-line front door.

Every compute command reads an optional JSON config document and applies
the precedence flags > config file > defaults.  Trajectories and structure
tables are emitted as CSV, reports and certificates as JSON; every artifact
embeds the tolerance set that produced it.  Exit codes: 0 success, 2 a
computation ended Inconclusive (the partial evidence is still emitted),
1 error (the failing condition is named in the output).
"""

from __future__ import annotations

import dataclasses
import io
import json
import sys
from typing import Optional

import click
import numpy as np

from . import catalog, classify, geometry, nullflow, spin, spinorfield, validation
from .errors import ConfigError, Inconclusive, NullTorusError, WrongFamily
from .spin import SpinStructure
from .tolerances import DEFAULT, Tolerances

STRUCTURE_ORDER = ((1, 1), (1, -1), (-1, 1), (-1, -1))

_STRUCTURE_ALIASES = {
    "trivial": (1, 1), "++": (1, 1), "+-": (1, -1), "-+": (-1, 1),
    "--": (-1, -1),
}


def parse_structure(text: str) -> SpinStructure:
    t = str(text).strip().lower()
    if t in _STRUCTURE_ALIASES:
        return SpinStructure(*_STRUCTURE_ALIASES[t])
    parts = t.replace("+1", "1").split(",")
    if len(parts) == 2:
        try:
            a1, a2 = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError(f"cannot parse spin structure {text!r}") from None
        if a1 in (-1, 1) and a2 in (-1, 1):
            return SpinStructure(a1, a2)
    raise ConfigError(
        f"cannot parse spin structure {text!r}; use trivial, ++, +-, -+, -- "
        "or 'a1,a2' with a_i in {-1, 1}")


def parse_point(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return (float(text[0]), float(text[1]))
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"point must be 'x1,x2', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigError(f"point must be 'x1,x2', got {text!r}") from None


class Settings:
    """Resolved run configuration (flags > config file > defaults)."""

    def __init__(self, config_path: Optional[str], output: Optional[str],
                 fmt: Optional[str], tol_overrides: tuple[str, ...]):
        self.file: dict = {}
        if config_path:
            try:
                with open(config_path) as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ConfigError("config must be a single JSON object")
            self.file = doc
        self.output = output if output is not None else self.file.get("output")
        self.fmt = fmt if fmt is not None else self.file.get("format")
        if self.fmt not in (None, "csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        self.tol = self._build_tol(tol_overrides)

    def _build_tol(self, overrides: tuple[str, ...]) -> Tolerances:
        merged: dict = {}
        file_tol = self.file.get("tol", {})
        if not isinstance(file_tol, dict):
            raise ConfigError("config key 'tol' must be an object")
        merged.update(file_tol)
        for item in overrides:
            key, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"--tol expects KEY=VALUE, got {item!r}")
            merged[key.strip()] = val
        if not merged:
            return DEFAULT
        valid = {f.name for f in dataclasses.fields(Tolerances)}
        clean = {}
        for key, val in merged.items():
            if key not in valid:
                raise ConfigError(f"unknown tolerance {key!r}")
            try:
                clean[key] = int(val) if key == "rational_cap" else float(val)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"tolerance {key} must be numeric, got {val!r}") from None
        return DEFAULT.with_(**clean)

    def get(self, key: str, flag=None, default=None):
        if flag is not None:
            return flag
        if key in self.file:
            return self.file[key]
        return default

    def step(self, flag: Optional[float]) -> float:
        value = float(self.get("step", flag, self.tol.ode_step))
        if not 0.0 < value <= 0.1:
            raise ConfigError(f"step must lie in (0, 0.1], got {value}")
        return value

    def count(self, key: str, flag: Optional[int], default: int) -> int:
        value = int(self.get(key, flag, default))
        if not 1 <= value <= 4096:
            raise ConfigError(f"{key} must lie in [1, 4096], got {value}")
        return value

    def metric(self, flag: Optional[str], grid_n_flag: Optional[int]):
        source = self.get("metric", flag)
        if source is None:
            raise ConfigError("a metric is required (--metric or config key)")
        grid_n = self.get("grid_n", grid_n_flag)
        if grid_n is not None:
            grid_n = self.count("grid_n", int(grid_n), 256)
        return catalog.load_metric(source, grid_n=grid_n)

    def structure(self, flag: Optional[str]) -> SpinStructure:
        return parse_structure(self.get("structure", flag, "trivial"))


# ---------------------------------------------------------------------------
# artifact emission


def _json_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return str(obj)


def _tol_dict(tol: Tolerances) -> dict:
    return dataclasses.asdict(tol)


def _write(text: str, output: Optional[str]):
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def emit_json(payload: dict, settings: Optional[Settings]):
    tol = settings.tol if settings else DEFAULT
    payload.setdefault("tolerances", _tol_dict(tol))
    text = json.dumps(payload, indent=2, sort_keys=True,
                      default=_json_default) + "\n"
    _write(text, settings.output if settings else None)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    if value is None:
        return ""
    return str(value)


def emit_csv(fieldnames: list[str], rows: list[dict], settings: Settings):
    buf = io.StringIO()
    buf.write("# tolerances "
              + json.dumps(_tol_dict(settings.tol), sort_keys=True) + "\n")
    buf.write(",".join(fieldnames) + "\n")
    for row in rows:
        buf.write(",".join(_cell(row.get(name)) for name in fieldnames) + "\n")
    _write(buf.getvalue(), settings.output)


def emit(kind: str, result, settings: Settings):
    if kind == "json":
        if settings.fmt == "csv":
            raise ConfigError("this command produces a JSON report; "
                              "csv format is not available")
        emit_json(result, settings)
    else:
        fieldnames, rows = result
        if settings.fmt == "json":
            emit_json({"columns": fieldnames, "rows": rows}, settings)
        else:
            emit_csv(fieldnames, rows, settings)


def dispatch(ctx: click.Context, worker):
    settings: Optional[Settings] = None
    try:
        settings = Settings(**ctx.obj)
        kind, result = worker(settings)
        emit(kind, result, settings)
    except Inconclusive as exc:
        payload = {"status": "inconclusive", "error": type(exc).__name__,
                   "message": str(exc)}
        if exc.measured is not None:
            payload["measured"] = exc.measured
        if exc.band is not None:
            payload["band"] = list(exc.band)
        emit_json(payload, settings)
        ctx.exit(2)
    except NullTorusError as exc:
        payload = {"status": "error", "error": type(exc).__name__,
                   "message": str(exc)}
        for attr in ("obstruction", "location"):
            value = getattr(exc, attr, None)
            if value is not None:
                payload[attr] = value
        emit_json(payload, settings)
        ctx.exit(1)
    ctx.exit(0)


# ---------------------------------------------------------------------------
# the command group


def artifact_options(fn):
    """--config/--output/--format/--tol, accepted before or after the command."""
    fn = click.option("--tol", "tol_overrides", multiple=True,
                      metavar="KEY=VALUE", help="Override a tolerance.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                      default=None)(fn)
    fn = click.option("--output", "-o", "output", default=None,
                      help="Write the artifact to this path.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(),
                      default=None, help="JSON config document.")(fn)
    return fn


def _merge_obj(ctx, config_path, output, fmt, tol_overrides):
    if config_path is not None:
        ctx.obj["config_path"] = config_path
    if output is not None:
        ctx.obj["output"] = output
    if fmt is not None:
        ctx.obj["fmt"] = fmt
    if tol_overrides:
        ctx.obj["tol_overrides"] += tuple(tol_overrides)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config document; flags override its fields.")
@click.option("--output", "-o", default=None,
              help="Write the artifact to this path instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default=None, help="Force the artifact format where sensible.")
@click.option("--tol", "tol_overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a tolerance, e.g. --tol scf_accept=1e-5.")
@click.version_option(package_name="nulltorus")
@click.pass_context
def main(ctx, config_path, output, fmt, tol_overrides):
    """Null-line flows, spin holonomy and kernel dimensions on Lorentzian tori."""
    ctx.obj = {"config_path": config_path, "output": output, "fmt": fmt,
               "tol_overrides": tuple(tol_overrides)}


@main.command()
@click.option("--metric", default=None, help="Shorthand, inline JSON or path.")
@click.option("--from", "from_", default=None, metavar="X1,X2",
              help="Starting point on the torus (default 0,0).")
@click.option("--family", type=click.Choice(["X", "Y"]), default=None)
@click.option("--tmax", type=float, default=None,
              help="Axis-coordinate length of the sweep (default 10).")
@click.option("--step", type=float, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def flow(ctx, metric, from_, family, tmax, step, grid_n,
         config_path, output, fmt, tol_overrides):
    """Integrate one null line; emit the trajectory as CSV."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        p0 = parse_point(s.get("from", from_, "0,0"))
        fam = s.get("family", family, "X")
        t_max = float(s.get("tmax", tmax, 10.0))
        rec = nullflow.integrate_null_line(spec, p0, fam, t_max=t_max,
                                           step=s.step(step), tol=s.tol)
        rows = [{"t": float(t),
                 "x1_cover": float(p[0]), "x2_cover": float(p[1]),
                 "x1_torus": float(p[0] % 1.0), "x2_torus": float(p[1] % 1.0)}
                for t, p in zip(rec.ts, rec.points)]
        return "csv", (["t", "x1_cover", "x2_cover", "x1_torus", "x2_torus"],
                       rows)
    dispatch(ctx, worker)


@main.command()
@click.option("--metric", default=None)
@click.option("--from", "from_", default=None, metavar="X1,X2")
@click.option("--family", type=click.Choice(["X", "Y"]), default=None)
@click.option("--n-returns", type=int, default=None)
@click.option("--step", type=float, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def rotation(ctx, metric, from_, family, n_returns, step, grid_n,
             config_path, output, fmt, tol_overrides):
    """Rotation number of the null flow, with a rational certificate."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        fam = s.get("family", family, "X")
        p0 = parse_point(s.get("from", from_, "0,0"))
        est = nullflow.rotation_number(
            spec, fam, p0, n_returns=s.count("n_returns", n_returns, 1000),
            step=s.step(step), tol=s.tol)
        payload = {"command": "rotation", "family": est.family,
                   "value": est.value, "n_returns": est.n_returns,
                   "step": est.step, "method": est.method,
                   "rational": None if est.rational is None else
                   {"p": est.rational.p, "q": est.rational.q,
                    "residual": est.rational.residual}}
        return "json", payload
    dispatch(ctx, worker)


@main.command("classify-line")
@click.option("--metric", default=None)
@click.option("--from", "from_", default=None, metavar="X1,X2")
@click.option("--family", type=click.Choice(["X", "Y"]), default=None)
@click.option("--n-returns", type=int, default=None)
@click.option("--step", type=float, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def classify_line(ctx, metric, from_, family, n_returns, step, grid_n,
                  config_path, output, fmt, tol_overrides):
    """Closed / Dense / Asymptotic verdict for one null line."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        fam = s.get("family", family, "X")
        p0 = parse_point(s.get("from", from_, "0,0"))
        cls = nullflow.classify_line(
            spec, p0, fam, step=s.step(step),
            n_returns=s.count("n_returns", n_returns, 256), tol=s.tol)
        payload = {"command": "classify-line", "family": fam,
                   "from": list(p0), "kind": cls.kind}
        for name in ("winding", "period", "rotation", "limit_winding",
                     "displacement"):
            value = getattr(cls, name)
            if value is not None:
                payload[name] = list(value) if isinstance(value, tuple) else value
        return "json", payload
    dispatch(ctx, worker)


@main.command()
@click.option("--metric", default=None)
@click.option("--family", type=click.Choice(["X", "Y"]), default=None)
@click.option("--resolution", type=int, default=None,
              help="Transversal seeds scanned (default 1024).")
@click.option("--step", type=float, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def decompose(ctx, metric, family, resolution, step, grid_n,
              config_path, output, fmt, tol_overrides):
    """Cylinder decomposition of the torus under one null family."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        fam = s.get("family", family, "X")
        res = s.count("resolution", resolution, 1024)
        raw_step = s.get("step", step)
        try:
            dec = nullflow.cylinder_decomposition(
                spec, fam, resolution=res,
                step=None if raw_step is None else s.step(step), tol=s.tol)
        except nullflow.DenseFlow as exc:
            return "json", {"command": "decompose", "family": fam,
                            "verdict": "Dense", "message": str(exc)}
        payload = {
            "command": "decompose", "family": dec.family, "axis": dec.axis,
            "verdict": "CylinderDecomposition",
            "rotation": {"p": dec.rotation.p, "q": dec.rotation.q,
                         "residual": dec.rotation.residual},
            "intervals": [{"kind": iv.kind, "lo": iv.lo, "hi": iv.hi,
                           "width": iv.width} for iv in dec.intervals],
            "isolated_closed": list(dec.isolated_closed),
            "resolution": dec.resolution, "scan_step": dec.scan_step,
        }
        return "json", payload
    dispatch(ctx, worker)


@main.command()
@click.option("--metric", default=None)
@click.option("--family", type=click.Choice(["X", "Y"]), default=None)
@click.option("--seed-w", type=float, default=None,
              help="Transversal coordinate of the closed line (default 0).")
@click.option("--n-returns", type=int, default=None)
@click.option("--step", type=float, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def holonomy(ctx, metric, family, seed_w, n_returns, step, grid_n,
             config_path, output, fmt, tol_overrides):
    """Spin holonomy table of a closed null line (one row per structure)."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        fam = s.get("family", family, "X")
        w = float(s.get("seed_w", seed_w, 0.0))
        h = s.step(step)
        est = nullflow.rotation_number(
            spec, fam, n_returns=s.count("n_returns", n_returns, 1000),
            step=h, tol=s.tol)
        if est.rational is None:
            raise WrongFamily(
                f"the {fam} flow has irrational rotation number "
                f"{est.value:.9f}; no closed lines to transport around")
        rec = nullflow.closed_line_through(spec, fam, w, est.rational,
                                           step=h, tol=s.tol)
        table = spin.holonomy_table(spec, rec, tol=s.tol)
        rows = []
        for ab in STRUCTURE_ORDER:
            r = table[ab]
            rows.append({"a1": ab[0], "a2": ab[1],
                         "winding1": r.winding[0], "winding2": r.winding[1],
                         "character": r.character, "sheet": r.sheet,
                         "boost": r.boost, "x_trivial": r.x_trivial})
        return "csv", (["a1", "a2", "winding1", "winding2", "character",
                        "sheet", "boost", "x_trivial"], rows)
    dispatch(ctx, worker)


def _field_summary(f) -> dict:
    return {"sup_norm": f.sup_norm(),
            "residual": spinorfield.residual_norm(f, "harmonic"
                                                  if f.chirality == 1
                                                  else "twistor")}


@main.command()
@click.option("--metric", default=None)
@click.option("--structure", default=None)
@click.option("--chirality", type=click.Choice(["1", "-1"]), default=None)
@click.option("--n-fields", type=int, default=None)
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def solve(ctx, metric, structure, chirality, n_fields, grid_n,
          config_path, output, fmt, tol_overrides):
    """Kernel of the transport equation (constant or closed diagonal)."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        struct = s.structure(structure)
        chi = int(s.get("chirality", chirality, 1))
        nf = s.count("n_fields", n_fields, 4)
        if isinstance(spec, geometry.LeftInvariant):
            sol = spinorfield.solve_left_invariant(
                spec, struct, chirality=chi, n_fields=nf, tol=s.tol)
            payload = {"command": "solve", "solver": "left_invariant",
                       "structure": struct.label, "chirality": chi,
                       "count_class": sol.count_class,
                       "ratio": None if sol.ratio is None else str(sol.ratio),
                       "exact": sol.exact,
                       "congruence_obstructed": sol.congruence_obstructed,
                       "modes": [list(m) for m in sol.modes],
                       "fields": [_field_summary(f) for f in sol.fields]}
        elif geometry.is_closed_diagonal(spec, s.tol):
            sol = spinorfield.solve_closed_diagonal(
                spec, struct, chirality=chi, n_fields=nf, tol=s.tol)
            payload = {"command": "solve", "solver": "closed_diagonal",
                       "structure": struct.label, "chirality": chi,
                       "count_class": sol.count_class,
                       "l1": sol.l1, "l2": sol.l2,
                       "ratio": None if sol.ratio is None else
                       {"p": sol.ratio.p, "q": sol.ratio.q,
                        "residual": sol.ratio.residual},
                       "solvable": sol.solvable,
                       "congruence_obstructed": sol.congruence_obstructed,
                       "t_parity": sol.t_parity,
                       "alphas": list(sol.alphas),
                       "fields": [_field_summary(f) for f in sol.fields]}
        else:
            raise WrongFamily(
                "solve handles constant-coefficient and closed diagonal "
                f"metrics; got {type(spec).__name__}")
        return "json", payload
    dispatch(ctx, worker)


@main.command("classify")
@click.option("--metric", default=None)
@click.option("--structure", default=None)
@click.option("--quantity", default=None,
              type=click.Choice(sorted(classify.QUANTITIES)))
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def classify_cmd(ctx, metric, structure, quantity, grid_n,
                 config_path, output, fmt, tol_overrides):
    """Dimension report for one conformal invariant and spin structure."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        struct = s.structure(structure)
        q = s.get("quantity", quantity, "delta_plus")
        report = classify.classify_dimension(spec, struct, q, tol=s.tol)
        payload = report.as_dict()
        payload["command"] = "classify"
        payload["metric"] = str(s.get("metric", metric))
        return "json", payload
    dispatch(ctx, worker)


def _spectral_count(spec, structure: SpinStructure, quantity: str, tol
                    ) -> Optional[str]:
    family, chirality = classify.QUANTITIES[quantity]
    if family != "X":
        return None
    if isinstance(spec, geometry.LeftInvariant):
        return spinorfield.solve_left_invariant(
            spec, structure, chirality=chirality, n_fields=0, tol=tol
        ).count_class
    if geometry.is_closed_diagonal(spec, tol):
        return spinorfield.solve_closed_diagonal(
            spec, structure, chirality=chirality, n_fields=0, tol=tol
        ).count_class
    return None


@main.command()
@click.option("--metric", default=None)
@click.option("--quantity", "quantities", default=None,
              help="Comma list of invariants (default delta_plus).")
@click.option("--grid-n", type=int, default=None)
@artifact_options
@click.pass_context
def table(ctx, metric, quantities, grid_n,
          config_path, output, fmt, tol_overrides):
    """Structure table: one row per spin structure and invariant."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        spec = s.metric(metric, grid_n)
        raw = s.get("quantity", quantities, "delta_plus")
        qs = tuple(q.strip() for q in str(raw).split(",") if q.strip())
        for q in qs:
            if q not in classify.QUANTITIES:
                raise ConfigError(f"unknown quantity {q!r}; choose from "
                                  + ", ".join(sorted(classify.QUANTITIES)))
        reports = classify.classify_table(spec, qs, tol=s.tol)
        rows = []
        for ab in STRUCTURE_ORDER:
            for q in qs:
                rep = reports[ab][q]
                rows.append({"a1": ab[0], "a2": ab[1], "quantity": q,
                             "value": rep.value,
                             "certificate": rep.certificate,
                             "family": rep.family,
                             "spectral_count":
                             _spectral_count(spec, SpinStructure(*ab), q,
                                             s.tol)})
        return "csv", (["a1", "a2", "quantity", "value", "certificate",
                        "family", "spectral_count"], rows)
    dispatch(ctx, worker)


@main.command()
@click.option("--step", type=float, default=None,
              help="Degrade the integrator step used by criterion 3.")
@click.option("--grid-n", type=int, default=None,
              help="Truncation for the criterion-1 solver grid.")
@click.option("--criterion", type=int, default=None,
              help="Run a single criterion (1-10) instead of the suite.")
@artifact_options
@click.pass_context
def validate(ctx, step, grid_n, criterion,
             config_path, output, fmt, tol_overrides):
    """Run the acceptance suite; failures are reported, never raised."""
    _merge_obj(ctx, config_path, output, fmt, tol_overrides)

    def worker(s: Settings):
        h = None
        if s.get("step", step) is not None:
            h = s.step(step)
        n = s.get("grid_n", grid_n)
        if n is not None:
            n = s.count("grid_n", int(n), 64)
        which = s.get("criterion", criterion)
        if which is None:
            results = validation.run_all(step=h, grid_n=n, tol=s.tol)
        else:
            results = [validation.run_criterion(int(which), step=h,
                                                grid_n=n, tol=s.tol)]
        for r in results:
            click.echo(r.line, err=(s.output is None))
        passed = sum(r.passed for r in results)
        payload = {"command": "validate", "passed": passed,
                   "failed": len(results) - passed,
                   "overrides": {"step": h, "grid_n": n},
                   "criteria": [r.as_dict() for r in results]}
        return "json", payload
    dispatch(ctx, worker)


if __name__ == "__main__":
    main()
