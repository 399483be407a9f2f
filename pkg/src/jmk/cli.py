"""``jmk`` command: coefficient tables, wavefunctions, verification and phase shifts.

Output is CSV (RFC 4180, 17 significant digits) or JSON with a ``meta``
object carrying only the version, command and parameters, so identical
invocations produce identical bytes.  Failures print a single line
``error[CODE]: message`` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import Channel, JMKError, UsageError, make_energy_point
from .jmatrix import cosine_coefficients, j_matrix, sine_coefficients
from .scatter import PotentialModel, assign_branches, phase_shift
from .synth import chi_irr, chi_reg, synthesize
from .verify import SUITES, run_suite

THREADS_ENV = "JMK_THREADS"


class Command(enum.Enum):
    COEFFS = "coeffs"
    WAVEFUNCTION = "wavefunction"
    VERIFY = "verify"
    PHASESHIFT = "phaseshift"
    JMATRIX = "jmatrix"


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class RunConfig:
    command: Command
    ell: int = 0
    lam: float = 1.0
    energies: tuple = ()
    N: int = 10
    potential: str | None = None
    suite: str = "all"
    rgrid: tuple = ()
    fmt: OutputFormat = OutputFormat.CSV
    output: str = "-"
    params: dict = field(default_factory=dict, compare=False)


@dataclass
class Table:
    columns: list
    rows: list


# -- serialization -------------------------------------------------------------


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_csv(columns, rows) -> bytes:
    """Header row plus one line per row; floats keep 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise UsageError(f"row has {len(row)} fields, schema has {len(columns)}")
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue().encode("ascii")


def emit_json(columns, rows, meta) -> bytes:
    """``{"meta": ..., "columns": [...], "rows": [{column: value}, ...]}``.

    Floats are written by ``repr``, which round-trips every double exactly.
    """
    records = []
    for row in rows:
        if len(row) != len(columns):
            raise UsageError(f"row has {len(row)} fields, schema has {len(columns)}")
        records.append(dict(zip(columns, row)))
    doc = {"meta": meta, "columns": list(columns), "rows": records}
    return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")


# -- argument handling -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _triple(text, what):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what} must be min:max:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"{what} must be min:max:count, got {text!r}") from None
    if count < 1:
        raise UsageError(f"{what} count must be >= 1")
    if count > 1 and not hi > lo:
        raise UsageError(f"{what} needs max > min")
    return [lo] if count == 1 else [float(v) for v in np.linspace(lo, hi, count)]


def _thread_count():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jmk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"jmk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--ell", type=int, default=0, help="angular momentum (default 0)")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="basis scale (default 1)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")
    common.add_argument("--output", default="-", help="output path ('-' for stdout)")

    def energy_args(p, grid, required):
        group = p.add_mutually_exclusive_group(required=required)
        group.add_argument("--energy", type=float, help="scattering energy E > 0")
        if grid:
            group.add_argument("--egrid", help="energy grid min:max:count")

    p = sub.add_parser("coeffs", parents=[common], help="s_n and c_n for n < N")
    energy_args(p, False, True)
    p.add_argument("--n", type=int, default=10)

    p = sub.add_parser("wavefunction", parents=[common], help="synthesized and analytic solutions on a radial grid")
    energy_args(p, False, True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--rgrid", default="0.1:20:200", help="radial grid min:max:count (default 0.1:20:200)")

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    energy_args(p, True, False)
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--n", type=int, default=50)

    p = sub.add_parser("phaseshift", parents=[common], help="J-matrix phase shifts")
    energy_args(p, True, True)
    p.add_argument("--pot", required=True, help="potential kind:V0:size, e.g. squarewell:-2:1")
    p.add_argument("--n", type=int, default=40)

    p = sub.add_parser("jmatrix", parents=[common], help="nonzero elements of J(E) for n, m < N")
    energy_args(p, False, True)
    p.add_argument("--n", type=int, default=10)
    return parser


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    energies = ()
    if getattr(args, "egrid", None):
        energies = tuple(_triple(args.egrid, "--egrid"))
    elif args.energy is not None:
        energies = (args.energy,)
    rgrid = tuple(_triple(args.rgrid, "--rgrid")) if args.command == "wavefunction" else ()
    if args.n < 1:
        raise UsageError("--n must be positive")
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "format", "output")}
    return RunConfig(
        command=Command(args.command),
        ell=args.ell,
        lam=args.lam,
        energies=energies,
        N=args.n,
        potential=getattr(args, "pot", None),
        suite=getattr(args, "suite", "all"),
        rgrid=rgrid,
        fmt=OutputFormat(args.format),
        output=args.output,
        params=params,
    )


# -- commands ---------------------------------------------------------------------


def _coeffs(cfg, channel):
    en = make_energy_point(cfg.energies[0], channel)
    N = max(cfg.N, 2)
    s = sine_coefficients(channel, en, N).values
    c = cosine_coefficients(channel, en, N).values
    rows = [[n, float(s[n]), float(c[n])] for n in range(cfg.N)]
    return Table(["n", "s_n", "c_n"], rows), True


def _wavefunction(cfg, channel):
    en = make_energy_point(cfg.energies[0], channel)
    grid = np.array(cfg.rgrid)
    if grid[0] <= 0:
        raise UsageError("--rgrid must start above 0 (chi_irr is singular at the origin)")
    N = max(cfg.N, 2)
    sin_vals = synthesize(sine_coefficients(channel, en, N), grid).values
    cos_vals = synthesize(cosine_coefficients(channel, en, N), grid).values
    reg, irr = chi_reg(grid, channel, en), chi_irr(grid, channel, en)
    rows = [
        [float(r), float(a), float(b), float(c), float(d)]
        for r, a, b, c, d in zip(grid, sin_vals, cos_vals, reg, irr)
    ]
    return Table(["r", "chi_sin_N", "chi_cos_N", "chi_reg", "chi_irr"], rows), True


def _verify(cfg, channel):
    energies = [make_energy_point(E, channel) for E in cfg.energies] or None
    checks = run_suite(cfg.suite, channel, energies, max(cfg.N, 3))
    rows = [[c.suite, c.name, c.value, c.threshold, c.passed] for c in checks]
    return Table(["suite", "check", "value", "threshold", "passed"], rows), all(c.passed for c in checks)


def _phaseshift(cfg, channel):
    pot = PotentialModel.parse(cfg.potential)
    points = [make_energy_point(E, channel) for E in cfg.energies]
    if any(b.E <= a.E for a, b in zip(points, points[1:])):
        raise UsageError("energy grid must be increasing")
    N = max(cfg.N, 2)
    workers = min(_thread_count(), len(points))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda en: phase_shift(pot, channel, en, N), points))
    else:
        results = [phase_shift(pot, channel, en, N) for en in points]
    rows = [
        [r.energy.E, r.energy.k, r.delta, r.branch, r.N, r.convergence_delta]
        for r in assign_branches(results)
    ]
    return Table(["E", "k", "delta", "branch", "N", "convergence_delta"], rows), True


def _jmatrix(cfg, channel):
    en = make_energy_point(cfg.energies[0], channel)
    J = j_matrix(channel, en, cfg.N)
    rows = []
    for n in range(J.size):
        if n > 0:
            rows.append([n, n - 1, float(J.sub[n - 1])])
        rows.append([n, n, float(J.diag[n])])
        if n + 1 < J.size:
            rows.append([n, n + 1, float(J.sup[n])])
    return Table(["n", "m", "J_nm"], rows), True


_HANDLERS = {
    Command.COEFFS: _coeffs,
    Command.WAVEFUNCTION: _wavefunction,
    Command.VERIFY: _verify,
    Command.PHASESHIFT: _phaseshift,
    Command.JMATRIX: _jmatrix,
}


def render(cfg: RunConfig, table: Table) -> bytes:
    if cfg.fmt is OutputFormat.CSV:
        return emit_csv(table.columns, table.rows)
    meta = {"version": __version__, "command": cfg.command.value, "params": cfg.params}
    return emit_json(table.columns, table.rows, meta)


def _write(path, payload):
    if path == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


class _IOFailure(JMKError):
    code = "E_IO"


class _VerificationFailure(JMKError):
    code = "E_VERIFY"


def run(cfg: RunConfig) -> int:
    """Execute one command and write its artifact; returns the exit status."""
    channel = Channel(cfg.ell, cfg.lam)
    table, ok = _HANDLERS[cfg.command](cfg, channel)
    _write(cfg.output, render(cfg, table))
    if not ok:
        failed = sum(1 for row in table.rows if not row[-1])
        raise _VerificationFailure(f"{failed} of {len(table.rows)} checks failed")
    return 0


def _report(exc: JMKError) -> int:
    message = " ".join(str(exc).split())
    print(f"error[{exc.code}]: {message}", file=sys.stderr)
    return 2 if isinstance(exc, UsageError) else 1


def main(argv=None) -> int:
    try:
        return run(config_from_args(argv))
    except JMKError as exc:
        return _report(exc)
    except ValueError as exc:  # e.g. argparse type conversion surfaced through a custom action
        return _report(UsageError(str(exc)))
