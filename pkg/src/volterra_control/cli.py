"""Batch front-end for the analysis modules.

Subcommands mirror the analysis tasks (``admissibility``,
``controllability``, ``simulate``, ``carleson``, ``resolvent``,
``example``) plus ``selfcheck``.  Each run writes ``report.json``,
plot-ready CSV files, rendered figures, and ``manifest.json`` into the
output directory.  ``report.json`` depends only on the config document
(byte-identical across reruns and thread counts); wall time and
timestamps live in the manifest.  All files are written atomically via
temp-and-rename.  Exit codes: 0 for pass/complete, 2 when an analysis
reaches a failure verdict, 1 for configuration or numerical errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from typing import Any, Callable

import numpy as np

from . import __version__
from .admissibility import (
    empirical_admissibility,
    necessary_condition_sup,
    sufficient_condition,
    system_measure,
)
from .carleson import DiscreteMeasure, geometric_carleson_constant
from .config import SCHEMA_VERSION, ConfigDocument, ConfigError, canonical_json, parse_config
from .controllability import (
    exact_controllability_measure,
    mcphail_verdict,
    null_controllability_measure,
)
from .heat_examples import HeatSystemSpec, carleson_scaling_experiment
from .reports import (
    VERDICT_FAIL,
    VERDICT_INCONCLUSIVE,
    VERDICT_PASS,
    AnalysisReport,
    encode_value,
)
from .resolvent import ScalarResolvent, resolvent_residual_profile
from .selfcheck import run_selfcheck
from .simulate import simulate_state

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ANALYSIS_FAIL = 2


class CliError(RuntimeError):
    """User-facing failure outside the config schema (files, inputs)."""


@dataclass
class RunOutput:
    """Everything one task handler produces for the writers."""

    report: AnalysisReport
    top_level: dict[str, Any] = field(default_factory=dict)
    csvs: dict[str, tuple[list[str], list[list[Any]]]] = field(default_factory=dict)
    figures: list[Callable[[str], str]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# serialization helpers


def _sanitize(obj: Any) -> Any:
    """Strict-JSON floats: NaN becomes null, infinities become strings."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    return obj


def _json_bytes(obj: Any) -> bytes:
    payload = json.dumps(_sanitize(obj), indent=2, sort_keys=True, allow_nan=False)
    return (payload + "\n").encode("utf-8")


def _csv_bytes(header: list[str], rows: list[list[Any]]) -> bytes:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer)  # excel dialect: RFC-4180 quoting and CRLF
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue().encode("utf-8")


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def _write_atomic(out_dir: str, name: str, data: bytes) -> str:
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".tmp-{name}-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, os.path.join(out_dir, name))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return name


def _measure_rows(measure: DiscreteMeasure) -> list[list[Any]]:
    return [[z.real, z.imag, m] for z, m in measure.atoms]


def _merge_verdicts(parts: list[str]) -> str:
    if VERDICT_FAIL in parts:
        return VERDICT_FAIL
    if VERDICT_INCONCLUSIVE in parts:
        return VERDICT_INCONCLUSIVE
    return VERDICT_PASS


# ---------------------------------------------------------------------------
# task handlers


def _run_admissibility(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    sys_, kernel = doc.system, doc.kernel
    p = doc.params
    necessary = necessary_condition_sup(sys_, kernel, omega=p["omega"])

    skipped_sufficient = p["beta"] is None and kernel.growth_exponent_hint is None
    if skipped_sufficient:
        sufficient = None
        sufficient_json: dict[str, Any] = {
            "one_regular_c": None,
            "sector_angle": None,
            "growth_const": None,
            "carleson": {"beta1_const": None, "beta2_const": None},
        }
    else:
        sufficient = sufficient_condition(
            sys_, kernel, beta=p["beta"], beta1=p["beta1"], beta2=p["beta2"]
        )
        sufficient_json = {
            "one_regular_c": sufficient.constants.get("one_regular_c"),
            "sector_angle": sufficient.constants.get("sector_angle"),
            "growth_const": sufficient.constants.get("growth_const"),
            "carleson": sufficient.constants.get(
                "carleson", {"beta1_const": None, "beta2_const": None}
            ),
        }

    empirical = empirical_admissibility(
        sys_,
        kernel,
        horizon=p["horizon"],
        grid_points=p["grid_points"],
        threads=threads,
    )

    parts = [necessary.verdict, empirical.verdict]
    notes = [f"necessary: {n}" for n in necessary.notes]
    notes += [f"empirical: {n}" for n in empirical.notes]
    if sufficient is None:
        parts.append(VERDICT_INCONCLUSIVE)
        notes.append(
            "sufficient: skipped, kernel has no natural growth exponent "
            "(pass analysis.beta)"
        )
    else:
        parts.append(sufficient.verdict)
        notes += [f"sufficient: {n}" for n in sufficient.notes]

    verdict = _merge_verdicts(parts)
    top = {
        "necessary_sup": necessary.constants.get("sup"),
        "sufficient": sufficient_json,
        "empirical_M": empirical.constants.get("empirical_M"),
        "N": sys_.n_modes,
    }
    report = AnalysisReport(
        task="admissibility",
        verdict=verdict,
        constants={
            "necessary_sup": top["necessary_sup"],
            "empirical_M": top["empirical_M"],
            "N": top["N"],
            "omega": p["omega"],
            "verdicts": {
                "necessary": necessary.verdict,
                "sufficient": None if sufficient is None else sufficient.verdict,
                "empirical": empirical.verdict,
            },
        },
        witnesses={**necessary.witnesses, **empirical.witnesses},
        checks=[] if sufficient is None else sufficient.checks,
        notes=notes,
    )
    measure = system_measure(sys_)
    figures = [
        lambda out_dir: _measure_fig(measure, None, out_dir, "spectral measure")
    ]
    return RunOutput(report, top, {}, figures)


def _run_controllability(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    p = doc.params
    if p["mode"] == "exact":
        cm = exact_controllability_measure(
            doc.system, p["xi"], p["s"], k_trunc=p["k_trunc"], threads=threads
        )
    else:
        cm = null_controllability_measure(
            doc.system, p["xi"], p["s"], p["tau"], k_trunc=p["k_trunc"], threads=threads
        )
    report = mcphail_verdict(cm, threads=threads)
    top = {
        "constant": report.constants.get("constant"),
        "trend": {
            "N_doubling_ratio": report.constants.get("N_doubling_ratio"),
            "K_doubling_ratio": report.constants.get("K_doubling_ratio"),
        },
        "verdict": report.verdict,
        "epsilon_min": report.constants.get("epsilon_min"),
        "epsilon_log_min": report.constants.get("epsilon_log_min"),
    }
    csvs = {"measure": (["re", "im", "mass"], _measure_rows(cm.measure))}
    trend_rows = report.tables.get("truncation_constants")
    if trend_rows:
        csvs["trend"] = (
            ["n_modes", "constant"],
            [[row["n_modes"], row["constant"]] for row in trend_rows],
        )
    witness = None
    if "worst_square_center" in report.witnesses:
        witness = (
            report.witnesses["worst_square_center"],
            report.witnesses["worst_square_side"],
        )
    figures = [
        lambda out_dir: _measure_fig(
            cm.measure, witness, out_dir, f"{cm.kind} controllability measure"
        )
    ]
    return RunOutput(report, top, csvs, figures)


def _run_simulate(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    p = doc.params
    u = doc.signal("input")
    x0 = None if p["x0"] is None else np.array(p["x0"], dtype=complex)
    t = np.linspace(0.0, p["horizon"], p["points"])
    result = simulate_state(doc.system, doc.kernel, x0, u, t)
    peak = int(np.argmax(result.state_norm)) if result.state_norm.size else 0
    top = {
        "sup_norm": float(result.state_norm[peak]) if result.state_norm.size else 0.0,
        "at_t": float(t[peak]) if result.state_norm.size else 0.0,
        "error_estimate": result.error_estimate,
    }
    report = AnalysisReport(
        task="simulate",
        verdict=VERDICT_PASS,
        constants={
            **top,
            "horizon": p["horizon"],
            "points": p["points"],
            "sup_forced": result.sup_forced,
        },
    )
    header = ["t", "state_norm"]
    columns: list[np.ndarray] = [t, result.state_norm]
    if p["per_modes"]:
        for k in range(doc.system.n_modes):
            header += [f"mode_{k + 1}_re", f"mode_{k + 1}_im"]
            columns += [
                result.mode_trajectories[k].real,
                result.mode_trajectories[k].imag,
            ]
    rows = [
        [float(col[i]) for col in columns] for i in range(t.size)
    ]
    csvs = {"trajectory": (header, rows)}
    t_arr, norms = t, result.state_norm
    figures = [lambda out_dir: _trajectory_fig(t_arr, norms, out_dir)]
    return RunOutput(report, top, csvs, figures)


def _read_measure_csv(path: str) -> DiscreteMeasure:
    if not os.path.exists(path):
        raise CliError(f"measure file not found: {path}")
    atoms: list[tuple[complex, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for index, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            cells = [cell.strip() for cell in row]
            if index == 0 and not _is_number(cells[0]):
                expected = ["re", "im", "mass"]
                if [c.lower() for c in cells[:3]] != expected:
                    raise CliError(
                        f"{path}: header must be re,im,mass, got {','.join(cells)}"
                    )
                continue
            if len(cells) < 3:
                raise CliError(f"{path}:{index + 1}: need re,im,mass columns")
            try:
                re_part, im_part, mass = (float(c) for c in cells[:3])
            except ValueError as exc:
                raise CliError(f"{path}:{index + 1}: {exc}") from exc
            atoms.append((complex(re_part, im_part), mass))
    try:
        return DiscreteMeasure(tuple(atoms))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _run_carleson(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    p = doc.params
    if p["measure_csv"] is not None:
        measure = _read_measure_csv(p["measure_csv"])
        source = p["measure_csv"]
    else:
        measure = system_measure(doc.system)
        source = "system"
    h_max = math.inf if p["h_max"] is None else p["h_max"]
    constant, witness = geometric_carleson_constant(measure, p["gamma"], h_max)
    top = {
        "constant": constant,
        "witness_center": None if witness is None else witness.center,
        "witness_side": None if witness is None else witness.side,
    }
    report = AnalysisReport(
        task="carleson",
        verdict=VERDICT_PASS,
        constants={
            **top,
            "gamma": p["gamma"],
            "h_max": h_max,
            "atoms": len(measure),
            "total_mass": measure.total_mass,
        },
        notes=[f"measure source: {source}"],
    )
    csvs = {"measure": (["re", "im", "mass"], _measure_rows(measure))}
    pair = None if witness is None else (witness.center, witness.side)
    figures = [
        lambda out_dir: _measure_fig(measure, pair, out_dir, "measure under test")
    ]
    return RunOutput(report, top, csvs, figures)


def _run_resolvent(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    p = doc.params
    eigenvalue = p["eigenvalue"]
    if eigenvalue is None:
        eigenvalue = doc.system.eigenvalues[0]
    resolvent = ScalarResolvent(
        doc.kernel,
        eigenvalue,
        method=p["method"],
        tol=1e-8 if tol is None else tol,
    )
    t = np.linspace(0.0, p["t_max"], p["points"])
    values = resolvent(t)
    notes = []
    try:
        residual = resolvent_residual_profile(doc.kernel, eigenvalue, resolvent, t)
        max_residual: float | None = float(np.max(residual))
    except Exception as exc:
        residual = None
        max_residual = None
        notes.append(f"residual unavailable: {exc}")
    top = {"eigenvalue": eigenvalue, "max_residual": max_residual}
    report = AnalysisReport(
        task="resolvent",
        verdict=VERDICT_PASS,
        constants={
            "eigenvalue": eigenvalue,
            "max_residual": max_residual,
            "method": resolvent.method,
            "t_max": p["t_max"],
            "points": p["points"],
        },
        notes=notes,
    )
    rows = []
    for i in range(t.size):
        row: list[Any] = [float(t[i]), float(values[i].real), float(values[i].imag)]
        row.append(float(residual[i]) if residual is not None else "")
        rows.append(row)
    csvs = {"resolvent": (["t", "re_c", "im_c", "residual"], rows)}
    figures = [lambda out_dir: _resolvent_fig(t, values, residual, out_dir)]
    return RunOutput(report, top, csvs, figures)


def _run_example(doc: ConfigDocument, threads: int, tol: float | None) -> RunOutput:
    p = doc.params
    boundary = "dirichlet_rod" if p["bc"] == "dirichlet" else "neumann"
    spec = HeatSystemSpec(
        boundary, p["alpha"], p["delta"], p["n_modes"], p["dim"], p["c_mid"]
    )
    if not p["h_min"] < p["h_max"]:
        raise CliError(
            f"need h_min < h_max, got {p['h_min']} and {p['h_max']}"
        )
    h = np.geomspace(p["h_min"], p["h_max"], p["h_count"])
    report = carleson_scaling_experiment(spec, h, threads=threads)
    top = {
        "threshold": report.constants.get("threshold"),
        "measured_slope": report.constants.get("measured_slope"),
        "predicted_slope": report.constants.get("predicted_slope"),
    }
    scaling = report.tables["scaling"]
    csvs = {
        "scaling": (
            ["h", "mu_Qh", "ratio"],
            [[row["h"], row["mu_Qh"], row["ratio"]] for row in scaling],
        )
    }
    h_arr = np.array([row["h"] for row in scaling])
    ratios = np.array([row["ratio"] for row in scaling])
    measured = report.constants["measured_slope"]
    predicted = report.constants["predicted_slope"]
    figures = [
        lambda out_dir: _scaling_fig(h_arr, ratios, measured, predicted, out_dir)
    ]
    return RunOutput(report, top, csvs, figures)


_HANDLERS: dict[str, Callable[[ConfigDocument, int, float | None], RunOutput]] = {
    "admissibility": _run_admissibility,
    "controllability": _run_controllability,
    "simulate": _run_simulate,
    "carleson": _run_carleson,
    "resolvent": _run_resolvent,
    "example": _run_example,
}


# ---------------------------------------------------------------------------
# figure adapters (import matplotlib only when actually rendering)


def _measure_fig(measure, witness, out_dir, title):
    from . import figures

    center, side = witness if witness is not None else (None, None)
    return figures.measure_figure(
        measure.positions,
        measure.masses,
        out_dir,
        "measure.png",
        witness_center=center,
        witness_side=side,
        title=title,
    )


def _trajectory_fig(t, norms, out_dir):
    from . import figures

    return figures.trajectory_figure(t, norms, out_dir, "trajectory.png")


def _resolvent_fig(t, values, residual, out_dir):
    from . import figures

    if residual is None:
        residual = np.zeros(len(t))
    return figures.resolvent_figure(t, values, residual, out_dir, "resolvent.png")


def _scaling_fig(h, ratios, measured, predicted, out_dir):
    from . import figures

    return figures.scaling_figure(
        h, ratios, measured, predicted, out_dir, "scaling.png"
    )


# ---------------------------------------------------------------------------
# run pipeline


def run(
    raw_config: dict,
    out_dir: str,
    task: str | None = None,
    threads: int = 1,
    tol: float | None = None,
    render_figures: bool = True,
    argv: list[str] | None = None,
) -> int:
    """Validate, dispatch, and write one analysis run; returns the exit code.

    ``raw_config`` is the JSON config object; ``task`` the subcommand name
    when invoked from the CLI.  Raises :class:`ConfigError` or
    :class:`CliError` for rejected inputs.
    """
    started = time.perf_counter()
    doc = parse_config(raw_config, task)
    handler = _HANDLERS[doc.task]
    output = handler(doc, threads, tol)
    os.makedirs(out_dir, exist_ok=True)

    written: dict[str, str] = {}
    report_json = {
        **output.report.to_json(),
        **{key: encode_value(val) for key, val in output.top_level.items()},
        "config_hash": doc.config_hash,
        "schema_version": SCHEMA_VERSION,
    }
    report_bytes = _json_bytes(report_json)
    written["report.json"] = hashlib.sha256(report_bytes).hexdigest()
    _write_atomic(out_dir, "report.json", report_bytes)

    for stem, (header, rows) in sorted(output.csvs.items()):
        data = _csv_bytes(header, rows)
        name = f"{stem}.csv"
        written[name] = hashlib.sha256(data).hexdigest()
        _write_atomic(out_dir, name, data)

    if render_figures:
        for renderer in output.figures:
            name = renderer(out_dir)
            if name:
                with open(os.path.join(out_dir, name), "rb") as fh:
                    written[name] = hashlib.sha256(fh.read()).hexdigest()

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "task": doc.task,
        "config_hash": doc.config_hash,
        "config": doc.normalized,
        "versions": _versions(),
        "threads": threads,
        "wall_time_s": round(time.perf_counter() - started, 6),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "argv": list(argv) if argv is not None else None,
        "outputs": written,
    }
    _write_atomic(out_dir, "manifest.json", _json_bytes(manifest))

    print(f"{doc.task}: verdict {output.report.verdict}")
    for name in sorted(written):
        print(f"  wrote {os.path.join(out_dir, name)}")
    print(f"  wrote {os.path.join(out_dir, 'manifest.json')}")
    return EXIT_ANALYSIS_FAIL if output.report.verdict == VERDICT_FAIL else EXIT_OK


def _versions() -> dict[str, str]:
    versions = {
        "volterra-control": __version__,
        "python": platform.python_version(),
    }
    for dist in ("numpy", "scipy", "mpmath", "matplotlib"):
        try:
            versions[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            versions[dist] = "absent"
    return versions


def _run_selfcheck_command(args: argparse.Namespace) -> int:
    report = run_selfcheck(tol=args.tol)
    for row in report.tables["items"]:
        status = "pass" if row["passed"] else "FAIL"
        detail = (
            f"value={row['value']:.12g} expected={row['expected']:.12g} "
            f"tol={row['tol']:g}"
        )
        if row.get("note"):
            detail = row["note"]
        print(f"[{status}] {row['name']}: {detail}")
    failures = report.constants["failures"]
    print(
        f"selfcheck: {report.constants['items'] - failures}/"
        f"{report.constants['items']} oracle items passed"
    )
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        pseudo_config = {
            "schema_version": SCHEMA_VERSION,
            "analysis": {"task": "selfcheck", "tol_override": args.tol},
        }
        config_hash = hashlib.sha256(
            canonical_json(pseudo_config).encode("ascii")
        ).hexdigest()
        payload = {
            **report.to_json(),
            "config_hash": config_hash,
            "schema_version": SCHEMA_VERSION,
        }
        _write_atomic(args.out, "report.json", _json_bytes(payload))
        print(f"  wrote {os.path.join(args.out, 'report.json')}")
    return EXIT_OK if failures == 0 else EXIT_ANALYSIS_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _add_globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="JSON config document",
        **({"default": None} if not suppress else kw),
    )
    parser.add_argument(
        "--out",
        metavar="DIR",
        help="output directory (default: current directory)",
        **({"default": None} if not suppress else kw),
    )
    parser.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help="worker threads for parallel sections (default 1)",
        **({"default": 1} if not suppress else kw),
    )
    parser.add_argument(
        "--tol",
        type=float,
        metavar="X",
        help="tolerance override (inversion tolerance; selfcheck comparisons)",
        **({"default": None} if not suppress else kw),
    )
    parser.add_argument(
        "--no-figures",
        action="store_true" if not suppress else "store_const",
        help="skip figure rendering",
        **({} if not suppress else {"const": True, "default": argparse.SUPPRESS}),
    )


def _complex_flag(text: str) -> dict:
    try:
        z = complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc
    return {"re": z.real, "im": z.imag}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra",
        description=(
            "Admissibility, controllability, and simulation toolkit for "
            "diagonal Volterra control systems with memory kernels."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_globals(p, suppress=True)
        return p

    p = command("admissibility", "necessary, sufficient, and empirical checks")
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=None, dest="grid_points")

    p = command("controllability", "interpolation-measure Carleson verdicts")
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--mode", choices=["exact", "null"], default=None)
    p.add_argument("--k-trunc", type=int, default=None, dest="k_trunc")

    p = command("simulate", "evolve the controlled state on a uniform grid")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument(
        "--per-modes",
        action="store_const",
        const=True,
        default=None,
        dest="per_modes",
        help="include per-mode trajectory columns in the CSV",
    )

    p = command("carleson", "geometric Carleson constant of a measure")
    p.add_argument("--measure", metavar="CSV", default=None, dest="measure_csv")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--hmax", type=float, default=None, dest="h_max")

    p = command("resolvent", "evaluate one mode's scalar resolvent")
    p.add_argument("action", choices=["eval"])
    p.add_argument("--eigenvalue", type=_complex_flag, default=None)
    p.add_argument("--tmax", type=float, default=None, dest="t_max")
    p.add_argument("--points", type=int, default=None)
    p.add_argument(
        "--method",
        choices=["auto", "closed_form", "mittag_leffler", "numeric_inversion"],
        default=None,
    )

    p = command("example", "bundled model systems")
    p.add_argument("name", choices=["heat"])
    p.add_argument("--bc", choices=["dirichlet", "neumann"], default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--N", type=int, default=None, dest="n_modes")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--c-mid", type=float, default=None, dest="c_mid")
    p.add_argument("--h-min", type=float, default=None, dest="h_min")
    p.add_argument("--h-max", type=float, default=None, dest="h_max")
    p.add_argument("--h-count", type=int, default=None, dest="h_count")

    command("selfcheck", "run the built-in oracle suite")
    return parser


_FLAG_PARAMS: dict[str, tuple[str, ...]] = {
    "admissibility": ("omega", "beta", "beta1", "beta2", "horizon", "grid_points"),
    "controllability": ("xi", "s", "tau", "mode", "k_trunc"),
    "simulate": ("horizon", "points", "per_modes"),
    "carleson": ("measure_csv", "gamma", "h_max"),
    "resolvent": ("eigenvalue", "t_max", "points", "method"),
    "example": (
        "name",
        "bc",
        "alpha",
        "delta",
        "n_modes",
        "dim",
        "c_mid",
        "h_min",
        "h_max",
        "h_count",
    ),
}


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CliError(f"{path} must contain a JSON object")
    return raw


def _effective_config(args: argparse.Namespace) -> dict:
    if args.config is not None:
        raw = _load_config_file(args.config)
    else:
        raw = {"schema_version": SCHEMA_VERSION}
    analysis = raw.setdefault("analysis", {})
    if not isinstance(analysis, dict):
        raise ConfigError("analysis", "expected an object")
    for name in _FLAG_PARAMS[args.command]:
        value = getattr(args, name, None)
        if value is not None:
            analysis[name] = value
    return raw


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "tol", None) is not None and args.tol <= 0.0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.command == "selfcheck":
            return _run_selfcheck_command(args)
        raw = _effective_config(args)
        return run(
            raw,
            out_dir=args.out if args.out is not None else ".",
            task=args.command,
            threads=args.threads,
            tol=args.tol,
            render_figures=not getattr(args, "no_figures", False),
            argv=list(sys.argv[1:]) if argv is None else list(argv),
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError, TypeError) as exc:
        print(f"{args.command} error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
