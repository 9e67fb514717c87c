"""Command-line front end: config parsing, study orchestration, CSV and manifest output.

Config files are flat ``key = value`` lines.  Values are read as JSON when
possible (numbers, ``true``/``false``, lists, objects, quoted strings) and as
bare strings otherwise; ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import noise as nz
from .analysis import (convergence_study, gagliardo_seminorm, moment_study, occupancy_study,
                       uniqueness_experiment)
from .operators import CATALOG_NAMES, get_operator
from .properties import full_suite
from .solver import (InitialCondition, LEDGER_COLUMNS, Problem, SimulationAborted, SolverConfig,
                     operator_of, simulate)
from .spaces import Domain

log = logging.getLogger("levygal")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_PROPERTY = 0, 2, 3, 4
SUBCOMMANDS = ("simulate", "properties", "converge", "uniqueness", "moments", "occupancy", "seminorm")

REQUIRED = object()

# key -> (kind, default); kinds: float, int, bool, str, floats (list of numbers), objects (list of dicts)
SCHEMA: dict[str, tuple[str, object]] = {
    "operator": ("str", REQUIRED),
    "T": ("float", REQUIRED),
    "dt": ("float", REQUIRED),
    "n": ("int", REQUIRED),
    "seed": ("int", REQUIRED),
    "gamma": ("float", 1.0),
    "convection": ("bool", False),
    "implicit_F": ("bool", False),
    "implicit_method": ("str", "newton"),
    "max_iter": ("int", 100),
    "tol": ("float", 1e-12),
    "n_quad": ("int", 0),
    "operator.p": ("float", 4.0),
    "operator.coefficients": ("floats", [0.0, -1.0, 0.0, 1.0]),
    "operator.with_laplacian": ("bool", False),
    "truncation.R": ("float", 0.0),
    "cutoff.R_tilde": ("float", 0.0),
    "domain.dim": ("int", 1),
    "domain.lengths": ("floats", [1.0]),
    "domain.boundary": ("str", "dirichlet"),
    "noise.q0": ("float", 0.0),
    "noise.s": ("float", 1.0),
    "noise.modes": ("int", 0),
    "noise.sigma": ("float", 1.0),
    "noise.g_kind": ("str", nz.ADDITIVE),
    "noise.marks": ("objects", []),
    "noise.large_jumps": ("objects", []),
    "initial.kind": ("str", "zero"),
    "initial.coeffs": ("floats", []),
    "initial.r": ("float", 1.0),
    "initial.amplitude": ("float", 1.0),
    "study.axis": ("str", "n"),
    "study.values": ("floats", [8, 16, 32, 64]),
    "study.delta0": ("float", 0.0),
    "study.M": ("float", 0.0),
    "study.paths": ("int", 200),
    "study.R_values": ("floats", [2, 4, 8, 16]),
    "study.alpha": ("float", 0.25),
    "study.m": ("float", 0.0),
    "study.norm": ("str", "H"),
    "study.pairs": ("int", 10_000),
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# parsing

def _convert(kind: str, raw):
    if kind == "float":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise TypeError
        return float(raw)
    if kind == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise TypeError
        return raw
    if kind == "bool":
        if not isinstance(raw, bool):
            raise TypeError
        return raw
    if kind == "str":
        if not isinstance(raw, str):
            raise TypeError
        return raw
    if kind == "floats":
        if not isinstance(raw, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in raw):
            raise TypeError
        return [float(x) for x in raw]
    if kind == "objects":
        if not isinstance(raw, list) or any(not isinstance(x, dict) for x in raw):
            raise TypeError
        return raw
    raise AssertionError(kind)


def parse_values(text: str) -> tuple[dict, dict]:
    """Raw key/value pairs and the line each key came from."""
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        kind = SCHEMA[key][0]
        try:
            values[key] = _convert(kind, val)
        except TypeError:
            raise ConfigError(f"type mismatch for {key!r}: expected {kind}, got {raw!r}", lineno) from None
        lines[key] = lineno
    return values, lines


@dataclass
class ParsedConfig:
    solver: SolverConfig
    study: dict
    resolved: dict  # every key with defaults applied
    text: str


def _marks(objs, key, line) -> tuple[nz.Mark, ...]:
    out = []
    for o in objs:
        try:
            out.append(nz.Mark(float(o["intensity"]), np.asarray(o.get("a", []), dtype=float), float(o.get("b", 0.0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad mark in {key!r}: {exc}", line) from None
    return tuple(out)


def parse_config(text: str) -> ParsedConfig:
    values, lines = parse_values(text)
    for key, (_, default) in SCHEMA.items():
        if default is REQUIRED and key not in values:
            raise ConfigError(f"missing required key {key!r}")
    r = {k: values.get(k, d) for k, (_, d) in SCHEMA.items()}

    def fail(msg, key):
        raise ConfigError(msg, lines.get(key))

    if r["operator.p"] <= 2:
        fail("p must exceed 2", "operator.p")
    name = r["operator"]
    if name not in CATALOG_NAMES and name != "none":
        fail(f"unknown operator {name!r}; choose from {', '.join(CATALOG_NAMES)} or none", "operator")
    n = r["n"]
    modes = r["noise.modes"] or n
    q = np.zeros(0) if r["noise.q0"] == 0 else None
    try:
        marks = _marks(r["noise.marks"], "noise.marks", lines.get("noise.marks"))
        large = _marks(r["noise.large_jumps"], "noise.large_jumps", lines.get("noise.large_jumps"))
        if q is None:
            noise = nz.NoiseDescriptor.power_law(r["noise.q0"], r["noise.s"], modes, r["noise.sigma"],
                                                 r["noise.g_kind"], marks, large)
        else:
            noise = nz.NoiseDescriptor(g_kind=r["noise.g_kind"], marks=marks, large_jumps=large)
        init = InitialCondition(r["initial.kind"], tuple(r["initial.coeffs"]), r["initial.r"], r["initial.amplitude"])
        init.sample(1, 0)
        domain = Domain(r["domain.dim"], tuple(r["domain.lengths"]), r["domain.boundary"])
        solver = SolverConfig(
            T=r["T"], dt=r["dt"], n=n, operator=name, p=r["operator.p"],
            coefficients=tuple(r["operator.coefficients"]), with_laplacian=r["operator.with_laplacian"],
            gamma=r["gamma"], truncation=r["truncation.R"] or None, cutoff=r["cutoff.R_tilde"] or None,
            convection=r["convection"], noise=noise, initial=init, implicit_F=r["implicit_F"],
            implicit_method=r["implicit_method"], max_iter=r["max_iter"], tol=r["tol"], seed=r["seed"],
            domain=domain, n_quad=r["n_quad"] or None)
        operator_of(solver)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if r["study.axis"] not in ("n", "R", "R_tilde"):
        fail("study.axis must be n, R or R_tilde", "study.axis")
    study = {k.split(".", 1)[1]: v for k, v in r.items() if k.startswith("study.")}
    if not study["m"]:
        study["m"] = 0.9 * r["operator.p"] / (r["operator.p"] - 1.0)
    return ParsedConfig(solver, study, r, text)


# ---------------------------------------------------------------------------
# CSV

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if v is None:
        return ""
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def parse_cell(s: str):
    """Inverse of :func:`format_value` for numeric cells; strings pass through."""
    if s == "":
        return None
    if s == "-0":
        return -0.0
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(text: str) -> tuple[list[str], list[list]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[parse_cell(c) for c in r] for r in rows[1:]]


# ---------------------------------------------------------------------------
# subcommands; each returns (files {name: text}, summary dict, exit code)

def _simulate(pc: ParsedConfig, args):
    traj = simulate(pc.solver)
    prob = Problem.from_config(pc.solver)
    s = traj.states
    H = np.sqrt(np.sum(s * s, axis=1))
    V = np.sqrt(np.sum(traj.basis.eigenvalues * s * s, axis=1))
    p = prob.op.p if prob.op is not None else pc.solver.p
    X = prob.x_norm_p(s) ** (1.0 / p)
    flags = traj.jump_flags()
    n = s.shape[1]
    header = ["t"] + [f"coeff_{j}" for j in range(1, n + 1)] + ["H_norm", "V_norm", "X_norm", "jump_flag"]
    rows = [[traj.times[i], *s[i], H[i], V[i], X[i], int(flags[i])] for i in range(s.shape[0])]
    lrows = [[k, traj.times[k + 1], *traj.ledger[k]] for k in range(traj.ledger.shape[0])]
    files = {"trajectory.csv": csv_text(header, rows),
             "ledger.csv": csv_text(["step", "t", *LEDGER_COLUMNS], lrows)}
    res = traj.relative_residuals()
    return files, {"steps": int(traj.ledger.shape[0]), "max_relative_residual": float(res.max()) if res.size else 0.0}, EXIT_OK


def _properties(pc: ParsedConfig, args):
    cfg = pc.solver
    if cfg.operator is None:
        raise ConfigError("properties needs an operator")
    op = get_operator(cfg.operator, p=cfg.p, coefficients=cfg.coefficients, with_laplacian=cfg.with_laplacian)
    checks, fitted = full_suite(op, pairs=pc.study["pairs"], seed=cfg.seed)
    rows = [[c.name, bool(c.passed), float(c.value), float(c.threshold), json.dumps(c.constants, sort_keys=True)]
            for c in checks]
    frows = [[k, float(v)] for k, v in fitted.items()]
    files = {"properties.csv": csv_text(["check", "passed", "value", "threshold", "constants"], rows),
             "constants.csv": csv_text(["constant", "value"], frows)}
    failed = [c.name for c in checks if not c.passed]
    if not args.quiet:
        for c in checks:
            print(c.line())
    return files, {"failed": failed}, EXIT_PROPERTY if failed else EXIT_OK


def _converge(pc: ParsedConfig, args):
    values = pc.study["values"]
    if pc.study["axis"] == "n":
        values = [int(v) for v in values]
    rep = convergence_study(pc.solver, pc.study["axis"], values)
    rows = [[a, b, d, t] for a, b, d, t in zip(values, values[1:], rep.distances, rep.terminal_distances)]
    files = {"converge.csv": csv_text(["value_lo", "value_hi", "l2_distance", "terminal_distance"], rows)}
    summary = {"axis": rep.axis, "monotone_cauchy": rep.monotone_cauchy, "complete": rep.complete}
    return files, summary, EXIT_OK if rep.complete else EXIT_ABORT


def _uniqueness(pc: ParsedConfig, args):
    M = pc.study["M"] or None
    rep = uniqueness_experiment(pc.solver, pc.study["delta0"], M)
    t = np.arange(rep.distances.size) * pc.solver.dt
    files = {"uniqueness.csv": csv_text(["t", "distance"], zip(t, rep.distances)),
             "uniqueness_summary.csv": csv_text(
                 ["sup_distance", "identical", "gronwall_weight", "M", "tau_M"],
                 [[rep.sup_distance, rep.identical, rep.gronwall_weight, M,
                   rep.tau_M if rep.tau_M is not None else math.nan]])}
    return files, {"sup_distance": rep.sup_distance, "identical": rep.identical}, EXIT_OK


def _moments(pc: ParsedConfig, args):
    rep = moment_study(pc.solver, pc.study["paths"])
    rows = [[k, m, se, rep.paths] for k, (m, se) in rep.estimates.items()]
    return {"moments.csv": csv_text(["quantity", "mean", "std_error", "paths"], rows)}, {}, EXIT_OK


def _occupancy(pc: ParsedConfig, args):
    rep = occupancy_study(pc.solver, pc.study["R_values"])
    rows = [[R, o, s] for R, o, s in zip(rep.R, rep.occupancy, rep.scaled)]
    return ({"occupancy.csv": csv_text(["R", "occupancy", "occupancy_times_R_p"], rows)},
            {"monotone": rep.monotone}, EXIT_OK)


def _seminorm(pc: ParsedConfig, args):
    traj = simulate(pc.solver)
    st = pc.study
    val = gagliardo_seminorm(traj, st["alpha"], st["m"], st["norm"])
    return ({"seminorm.csv": csv_text(["alpha", "m", "norm", "seminorm"], [[st["alpha"], st["m"], st["norm"], val]])},
            {"seminorm": val}, EXIT_OK)


HANDLERS = {"simulate": _simulate, "properties": _properties, "converge": _converge,
            "uniqueness": _uniqueness, "moments": _moments, "occupancy": _occupancy, "seminorm": _seminorm}


def _apply_overrides(text: str, seed: int | None, paths: int | None) -> str:
    """Append override lines after dropping the keys they replace."""
    drop = {k for k, v in (("seed", seed), ("study.paths", paths)) if v is not None}
    kept = [ln for ln in text.splitlines() if ln.split("#", 1)[0].split("=", 1)[0].strip() not in drop]
    if seed is not None:
        kept.append(f"seed = {int(seed)}")
    if paths is not None:
        kept.append(f"study.paths = {int(paths)}")
    return "\n".join(kept) + "\n"


def execute(subcommand: str, config_text: str, out: Path, args) -> int:
    if subcommand not in HANDLERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    start = time.time()
    text = _apply_overrides(config_text, args.seed, args.paths)
    pc = parse_config(text)
    out.mkdir(parents=True, exist_ok=True)
    try:
        files, summary, code = HANDLERS[subcommand](pc, args)
    except SimulationAborted as exc:
        log.error("numerical abort: %s", exc)
        (out / "abort.txt").write_text(f"{exc}\n")
        return EXIT_ABORT
    digests = {}
    for name, content in sorted(files.items()):
        (out / name).write_text(content, encoding="utf-8")
        digests[name] = hashlib.sha256(content.encode("utf-8")).hexdigest()
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": pc.solver.seed,
        "config_text": text,
        "config": pc.resolved,
        "wall_clock_seconds": time.time() - start,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(start)),
        "outputs": [{"file": k, "sha256": v} for k, v in digests.items()],
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    if not args.quiet:
        print(json.dumps({"subcommand": subcommand, "exit": code, **summary}, default=_jsonable))
    return code


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(type(o).__name__)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levygal", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS + ("rerun",))
    ap.add_argument("manifest", nargs="?", help="manifest.json to replay (rerun only)")
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--paths", type=int)
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.subcommand == "rerun":
            if not args.manifest:
                raise ConfigError("rerun needs a manifest path")
            try:
                man = json.loads(Path(args.manifest).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read manifest: {exc}") from None
            args.seed = args.paths = None
            return execute(man["subcommand"], man["config_text"], args.out, args)
        if args.config is None:
            raise ConfigError("--config is required")
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return execute(args.subcommand, text, args.out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
