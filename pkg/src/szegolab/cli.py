"""Batch command-line front-end.

Subcommands
-----------
rate           convergence study of sampled MI rate toward the spectral target
equivalence    same study, reported for the Toeplitz/circulant equivalence diagnostics
power-sum      circulant eigenvalue power sum vs its integral limit
sandwich       polynomial bracket of the eigenvalue log-moment at each schedule point
mc-validate    Monte-Carlo check of the analytic Gram coefficients
dump-gram      table of Gram coefficients gamma_l and wrapped gammaHat_l
dump-spectrum  table of circulant eigenvalues vs the scaled spectral density

Configuration may come from flags or from a flat ``key = value`` file
(``--config``); flags override file values, unknown keys are rejected.  All
numeric output uses 9 significant digits in a fixed column order, so identical
configurations produce byte-identical reports.  Exit codes: 0 success,
1 a runtime invariant failed, 2 usage error, 3 numerical failure.  The
environment variable SZGL_THREADS caps schedule-point parallelism (0 = auto);
output is assembled in schedule order regardless.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, NumericalError, SzegolabError, UsageError
from .gram import SamplingGrid, gamma_sequence, toeplitz_matrix
from .mc import empirical_gram, noise_variance_ratio, sample_paths, write_batch
from .models import SpectralModel
from .spectra import circulant_eigs, toeplitz_eigs
from .szego import (
    DEFAULT_SCHEDULE,
    RATE_COLUMNS,
    ConvergenceSchedule,
    default_domain_max,
    power_sum_check,
    rate_convergence,
    sandwich_polynomials,
    sandwich_rate_bounds,
)

__all__ = ["RunConfig", "parse_config", "run", "main", "console_main"]

_COMMANDS = (
    "rate",
    "equivalence",
    "power-sum",
    "sandwich",
    "mc-validate",
    "dump-gram",
    "dump-spectrum",
)

# Per-command defaults for the study point, chosen to match the documented
# diagnostic operating points (h = 0.05 resolution for the dumps).
_POINT_DEFAULTS = {
    "power-sum": (100.0, 4000),
    "mc-validate": (10.0, 100),
    "dump-gram": (10.0, 200),
    "dump-spectrum": (10.0, 200),
}

# Relative + absolute slack applied to runtime bound checks, so that a bound
# holding in exact arithmetic is not reported as violated because of the last
# two or three bits of double rounding in the summed coefficients.
_GUARD_REL = 1e-12
_GUARD_ABS = 1e-12


# ---------------------------------------------------------------------------
# option table (single source for flags and config-file keys)
# ---------------------------------------------------------------------------
def _conv_model(text: str) -> str:
    name = text.strip().lower()
    if name not in ("ou", "gauss", "tri"):
        raise UsageError(f"model must be one of ou, gauss, tri; got {text!r}")
    return name


def _conv_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"expected a finite number, got {text!r}")
    return value


def _conv_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _conv_format(text: str) -> str:
    name = text.strip().lower()
    if name not in ("text", "csv"):
        raise UsageError(f"format must be text or csv, got {text!r}")
    return name


def _conv_schedule(text: str) -> ConvergenceSchedule:
    points = []
    for item in text.split(","):
        item = item.strip()
        head, sep, tail = item.partition(":")
        if not item or not sep:
            raise UsageError(f"schedule entry {item!r} must have the form T:n")
        try:
            points.append((float(head), int(tail)))
        except ValueError:
            raise UsageError(
                f"schedule entry {item!r} must have the form T:n with numeric T, integer n"
            ) from None
    try:
        return ConvergenceSchedule(tuple(points))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _conv_lags(text: str) -> tuple[int, ...]:
    try:
        lags = tuple(int(item.strip()) for item in text.split(","))
    except ValueError:
        raise UsageError(f"lags must be a comma list of integers, got {text!r}") from None
    if not lags:
        raise UsageError("lags list must be non-empty")
    return lags


@dataclass(frozen=True)
class _Opt:
    name: str  # flag / config-file key (kebab-case)
    conv: object
    commands: tuple[str, ...]
    help: str

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_OPTS = (
    _Opt("model", _conv_model, _COMMANDS, "input model kind: ou | gauss | tri (default ou)"),
    _Opt("power", _conv_float, _COMMANDS, "stationary variance P >= 0 (default 1)"),
    _Opt("rate-param", _conv_float, _COMMANDS, "decay rate of the ou model (default 1)"),
    _Opt("width", _conv_float, _COMMANDS, "kernel width of the gauss model (default 1)"),
    _Opt("support", _conv_float, _COMMANDS, "support radius of the tri model (default 1)"),
    _Opt("tol", _conv_float, _COMMANDS, "spectral quadrature tolerance (default 1e-8)"),
    _Opt("seed", _conv_int, _COMMANDS, "64-bit random seed (default 42)"),
    _Opt("format", _conv_format, _COMMANDS, "report format: text | csv (default text)"),
    _Opt("out", str, _COMMANDS, "write the report to this path instead of stdout"),
    _Opt(
        "schedule",
        _conv_schedule,
        ("rate", "equivalence", "sandwich"),
        "comma list of T:n study points (default 25:500,50:1000,100:2000)",
    ),
    _Opt("T", _conv_float, tuple(_POINT_DEFAULTS), "time horizon of the study point"),
    _Opt("n", _conv_int, tuple(_POINT_DEFAULTS), "sample count of the study point"),
    _Opt("q", _conv_int, ("power-sum",), "power exponent, 1..4 (default 2)"),
    _Opt("degree", _conv_int, ("sandwich",), "base approximant degree (default 64)"),
    _Opt(
        "domain-max",
        _conv_float,
        ("sandwich",),
        "eigenvalue domain cap (default: twice the absolute autocovariance integral)",
    ),
    _Opt("refine", _conv_int, ("mc-validate",), "sub-steps per sampling cell, >= 4 (default 8)"),
    _Opt("paths", _conv_int, ("mc-validate",), "number of simulated paths, >= 100 (default 10000)"),
    _Opt("lags", _conv_lags, ("mc-validate",), "comma list of lags to validate (default 0,1,2,5)"),
    _Opt("dump-batch", str, ("mc-validate",), "write the binary increment dump to this path"),
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters for one subcommand invocation."""

    command: str
    model: SpectralModel
    tol: float
    seed: int
    fmt: str
    out: str | None
    workers: int
    schedule: ConvergenceSchedule | None = None
    T: float | None = None
    n: int | None = None
    q: int | None = None
    degree: int | None = None
    domain_max: float | None = None
    refine: int | None = None
    paths: int | None = None
    lags: tuple[int, ...] | None = None
    dump_batch: str | None = None


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="szegolab", description="Szego-limit study front-end")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for command in _COMMANDS:
        p = sub.add_parser(command, prog=f"szegolab {command}")
        p.add_argument("--config", help="flat key = value configuration file")
        for opt in _OPTS:
            if command in opt.commands:
                p.add_argument(f"--{opt.name}", dest=opt.dest, type=opt.conv, default=None,
                               help=opt.help)
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in entries:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _workers_from_env() -> int:
    raw = os.environ.get("SZGL_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"SZGL_THREADS must be an integer >= 0, got {raw!r}") from None
    if value < 0:
        raise UsageError(f"SZGL_THREADS must be an integer >= 0, got {raw!r}")
    return value if value > 0 else (os.cpu_count() or 1)


def _build_model(values: dict, provided: set[str]) -> SpectralModel:
    name = values["model"]
    scale_key = {"ou": "rate-param", "gauss": "width", "tri": "support"}[name]
    for key, owner in (("rate-param", "ou"), ("width", "gauss"), ("support", "tri")):
        if key != scale_key and key in provided:
            raise UsageError(f"--{key} applies only to --model {owner}")
    power = values["power"] if "power" in provided else 1.0
    scale = values[scale_key.replace("-", "_")] if scale_key in provided else 1.0
    try:
        if name == "ou":
            return SpectralModel.ornstein_uhlenbeck(power, scale)
        if name == "gauss":
            return SpectralModel.gaussian_kernel(power, scale)
        return SpectralModel.triangular(power, scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_config(argv) -> RunConfig:
    """Resolve argv (plus an optional config file) into a RunConfig.

    Precedence: command-line flag, then config-file value, then default.
    Unknown config-file keys — including keys that do not apply to the chosen
    subcommand — are rejected.
    """
    args = _build_parser().parse_args(list(argv))
    command = args.command

    file_entries: dict[str, str] = {}
    if args.config is not None:
        file_entries = _read_config_file(args.config)

    allowed = {opt.name: opt for opt in _OPTS if command in opt.commands}
    for key in file_entries:
        if key not in allowed:
            raise UsageError(f"unknown config key {key!r} for command {command!r}")

    values: dict[str, object] = {}
    provided: set[str] = set()
    for opt in _OPTS:
        if command not in opt.commands:
            continue
        flag_value = getattr(args, opt.dest)
        if flag_value is not None:
            values[opt.dest] = flag_value
            provided.add(opt.name)
        elif opt.name in file_entries:
            values[opt.dest] = opt.conv(file_entries[opt.name])
            provided.add(opt.name)
        else:
            values[opt.dest] = None

    model = _build_model(
        {"model": values["model"] or "ou", "power": values["power"],
         "rate_param": values.get("rate_param"), "width": values.get("width"),
         "support": values.get("support")},
        provided,
    )

    tol = values["tol"] if "tol" in provided else 1e-8
    if not tol > 0.0:
        raise UsageError(f"tol must be > 0, got {tol!r}")
    seed = values["seed"] if "seed" in provided else 42
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be in [0, 2^64), got {seed}")
    fmt = values["format"] if "format" in provided else "text"
    out = values["out"]

    kwargs: dict[str, object] = {}
    if command in ("rate", "equivalence", "sandwich"):
        kwargs["schedule"] = values["schedule"] if "schedule" in provided else DEFAULT_SCHEDULE
    if command in _POINT_DEFAULTS:
        default_T, default_n = _POINT_DEFAULTS[command]
        T = values["T"] if "T" in provided else default_T
        n = values["n"] if "n" in provided else default_n
        if not (math.isfinite(T) and T > 0.0):
            raise UsageError(f"T must be finite and > 0, got {T}")
        if n < 1:
            raise UsageError(f"n must be >= 1, got {n}")
        kwargs["T"], kwargs["n"] = float(T), int(n)
    if command == "power-sum":
        q = values["q"] if "q" in provided else 2
        if not 1 <= q <= 4:
            raise UsageError(f"power exponent q must be in 1..4, got {q}")
        kwargs["q"] = int(q)
    if command == "sandwich":
        degree = values["degree"] if "degree" in provided else 64
        if degree < 1:
            raise UsageError(f"degree must be >= 1, got {degree}")
        kwargs["degree"] = int(degree)
        domain_max = values["domain_max"] if "domain-max" in provided else None
        if domain_max is not None and not domain_max > 0.0:
            raise UsageError(f"domain-max must be > 0, got {domain_max}")
        kwargs["domain_max"] = domain_max
    if command == "mc-validate":
        refine = values["refine"] if "refine" in provided else 8
        if refine < 4:
            raise UsageError(f"refine must be >= 4, got {refine}")
        paths = values["paths"] if "paths" in provided else 10_000
        if paths < 100:
            raise UsageError(f"paths must be >= 100, got {paths}")
        lags = values["lags"] if "lags" in provided else (0, 1, 2, 5)
        for lag in lags:
            if not 0 <= lag < kwargs["n"]:
                raise UsageError(f"lag must be in [0, n={kwargs['n']}), got {lag}")
        kwargs["refine"], kwargs["paths"], kwargs["lags"] = int(refine), int(paths), lags
        kwargs["dump_batch"] = values["dump_batch"]

    return RunConfig(
        command=command, model=model, tol=float(tol), seed=int(seed), fmt=fmt, out=out,
        workers=_workers_from_env(), **kwargs,
    )


# ---------------------------------------------------------------------------
# report formatting
# ---------------------------------------------------------------------------
def _fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean report cells are not supported")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.8e}"
    return str(value)


def _write_table(headers, rows, fmt: str, stream) -> None:
    cells = [[_fmt_cell(v) for v in row] for row in rows]
    if fmt == "csv":
        stream.write(",".join(headers) + "\n")
        for row in cells:
            stream.write(",".join(row) + "\n")
        return
    widths = [
        max(len(header), *(len(row[i]) for row in cells)) if cells else len(header)
        for i, header in enumerate(headers)
    ]
    stream.write("  ".join(h.rjust(w) for h, w in zip(headers, widths)) + "\n")
    for row in cells:
        stream.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")


def _slacked(bound: float) -> float:
    return bound * (1.0 + _GUARD_REL) + _GUARD_ABS


# ---------------------------------------------------------------------------
# subcommand bodies — each returns (headers, rows, violations, stderr_lines)
# ---------------------------------------------------------------------------
def _run_rate_like(config: RunConfig):
    report = rate_convergence(
        config.model, config.schedule, tol=config.tol, workers=config.workers
    )
    violations: list[str] = []
    stderr_lines: list[str] = []
    eig_cap = _slacked(2.0 * config.model.abs_acf_integral())
    frob_cap = _slacked(config.model.abs_acf_integral() * config.model.power)
    for p in report.points:
        tag = f"(T={p.T:g}, n={p.n})"
        if p.max_abs_circulant_eig > eig_cap:
            violations.append(
                f"circulant eigenvalue bound exceeded at {tag}: "
                f"{p.max_abs_circulant_eig:.8e} > {eig_cap:.8e}"
            )
        if p.op_norm_bound > eig_cap:
            violations.append(
                f"operator-norm bound exceeded at {tag}: {p.op_norm_bound:.8e} > {eig_cap:.8e}"
            )
        if p.frob_sq_over_t > frob_cap:
            violations.append(
                f"scaled Frobenius bound exceeded at {tag}: "
                f"{p.frob_sq_over_t:.8e} > {frob_cap:.8e}"
            )
        if p.route_rel_diff > 1e-8:
            violations.append(
                f"log-det routes disagree at {tag}: relative difference "
                f"{p.route_rel_diff:.8e} > 1.0e-08"
            )
        if config.command == "rate":
            stderr_lines.append(
                f"[rate] T={p.T:g} n={p.n} sampledRate={p.sampled_rate:.8e} "
                f"relErr={p.rel_err:.8e}"
            )
        else:
            stderr_lines.append(
                f"[equivalence] T={p.T:g} n={p.n} logSumGap={p.log_sum_gap:.8e} "
                f"wrapDiff={p.wrap_diff_frob_sq_over_t:.8e} "
                f"traceGap_k2={p.trace_gaps[1]:.8e}"
            )
    return RATE_COLUMNS, report.table_rows(), violations, stderr_lines


def _run_power_sum(config: RunConfig):
    res = power_sum_check(config.model, config.T, config.n, config.q, tol=config.tol)
    headers = ["q", "T", "n", "lhs", "rhs", "gap"]
    row = [res.q, res.T, res.n, res.lhs, res.rhs, res.gap]
    if res.q == 2:
        headers += ["s1", "s2"]
        row += [res.s1, res.s2]
    violations = []
    if not all(math.isfinite(v) for v in (res.lhs, res.rhs, res.gap)):
        violations.append(f"non-finite power-sum result: lhs={res.lhs} rhs={res.rhs}")
    stderr_lines = [
        f"[power-sum] q={res.q} T={res.T:g} n={res.n} gap={res.gap:.8e}"
    ]
    return headers, [row], violations, stderr_lines


def _run_sandwich(config: RunConfig):
    C = config.domain_max if config.domain_max is not None else default_domain_max(config.model)
    pair = sandwich_polynomials(C, config.degree)
    headers = ["T", "n", "h", "lowerBound", "eigLogSum", "upperBound", "bracketWidth"]
    rows = []
    violations = []
    stderr_lines = [f"[sandwich] degree={pair.degree} domainMax={C:.8e} epsHat={pair.eps_hat:.8e}"]
    for grid in config.schedule.grids():
        gs = gamma_sequence(config.model, grid)
        spectrum = toeplitz_eigs(toeplitz_matrix(gs), grid)
        low_eig = float(spectrum.eigenvalues.min())
        if low_eig <= -1.0:
            raise NotPositiveDefinite(
                f"Toeplitz eigenvalue {low_eig:.6e} <= -1 at (T={grid.T:g}, n={grid.n})"
            )
        eig_log_sum = float(np.sum(np.log1p(spectrum.eigenvalues))) / grid.T
        lower, upper = sandwich_rate_bounds(pair, spectrum, grid.T)
        rows.append([grid.T, grid.n, grid.h, lower, eig_log_sum, upper, upper - lower])
        if not lower <= eig_log_sum <= upper:
            violations.append(
                f"bracket misses the eigenvalue log-moment at (T={grid.T:g}, n={grid.n}): "
                f"{lower:.8e} .. {upper:.8e} vs {eig_log_sum:.8e}"
            )
        stderr_lines.append(
            f"[sandwich] T={grid.T:g} n={grid.n} bracketWidth={upper - lower:.8e}"
        )
    return headers, rows, violations, stderr_lines


def _run_mc_validate(config: RunConfig):
    grid = SamplingGrid(T=config.T, n=config.n)
    batch = sample_paths(
        config.model, grid, refine=config.refine, paths=config.paths, seed=config.seed
    )
    gamma = gamma_sequence(config.model, grid).gamma
    empirical, se = empirical_gram(batch, config.lags)
    headers = ["lag", "empirical", "analytic", "stdErr", "zScore"]
    rows = []
    violations = []
    for pos, lag in enumerate(config.lags):
        diff = empirical[pos] - gamma[lag]
        z = 0.0 if diff == 0.0 else (math.inf if se[pos] == 0.0 else diff / se[pos])
        rows.append([lag, empirical[pos], gamma[lag], se[pos], z])
        if abs(z) > 3.0:
            violations.append(
                f"empirical coefficient at lag {lag} is {abs(z):.3f} standard errors "
                "from the analytic value (limit 3)"
            )
    ratio = noise_variance_ratio(batch)
    if not 0.9 <= ratio <= 1.1:
        violations.append(f"channel noise variance ratio {ratio:.8e} outside [0.9, 1.1]")
    stderr_lines = [
        f"[mc-validate] paths={batch.paths} refine={batch.refine} seed={batch.seed} "
        f"varianceRatio={ratio:.8e} jitter={batch.jitter:.8e}"
    ]
    if config.dump_batch is not None:
        write_batch(batch, config.dump_batch)
        stderr_lines.append(f"[mc-validate] wrote increment dump to {config.dump_batch}")
    return headers, rows, violations, stderr_lines


def _run_dump_gram(config: RunConfig):
    gs = gamma_sequence(config.model, SamplingGrid(T=config.T, n=config.n))
    rows = [[l, gs.gamma[l], gs.gamma_hat[l]] for l in range(config.n)]
    return ["l", "gamma", "gammaHat"], rows, [], [f"[dump-gram] T={config.T:g} n={config.n}"]


def _run_dump_spectrum(config: RunConfig):
    grid = SamplingGrid(T=config.T, n=config.n)
    gs = gamma_sequence(config.model, grid)
    psi_hat = circulant_eigs(gs.gamma_hat, grid).dft_values
    m = np.arange(config.n)
    lam = 2.0 * math.pi * m / config.T
    target = 2.0 * math.pi * np.asarray(config.model.psd(lam), dtype=float)
    rows = [
        [int(i), psi_hat[i], target[i], abs(psi_hat[i] - target[i])] for i in range(config.n)
    ]
    headers = ["m", "psiHat", "twoPiPsd", "absDiff"]
    return headers, rows, [], [f"[dump-spectrum] T={config.T:g} n={config.n}"]


_RUNNERS = {
    "rate": _run_rate_like,
    "equivalence": _run_rate_like,
    "power-sum": _run_power_sum,
    "sandwich": _run_sandwich,
    "mc-validate": _run_mc_validate,
    "dump-gram": _run_dump_gram,
    "dump-spectrum": _run_dump_spectrum,
}


def run(config: RunConfig) -> int:
    """Execute the configured subcommand; returns the process exit code."""
    headers, rows, violations, stderr_lines = _RUNNERS[config.command](config)
    if config.out is None:
        _write_table(headers, rows, config.fmt, sys.stdout)
    else:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            _write_table(headers, rows, config.fmt, fh)
    for line in stderr_lines:
        print(line, file=sys.stderr)
    for violation in violations:
        print(f"invariant violated: {violation}", file=sys.stderr)
    return 1 if violations else 0


def main(argv=None) -> int:
    """Entry point; maps package errors to the documented exit codes."""
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        return run(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except SzegolabError as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main(None))
