"""Command-line benchmark harness.

Subcommands:

* ``run CONFIG``: every ``variant x seed`` run of an experiment, written to
  ``<output_dir>/<run_id>/results.csv`` plus ``summary.json`` and
  ``manifest.json`` in ``output_dir``.
* ``plot-data DIR...``: long-format table of final log-GD, log-IGD and LRHD.
* ``front NAME``: export a discretized true Pareto front as CSV.
* ``validate-config CONFIG``: parse and print the resolved configuration.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import logging
import math
import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, benchmarks, driver, gp
from .acquisition import VARIANTS, AcquisitionSpec, MaximizerConfig
from .constraints import ExpressionConstraint, KnownConstraintSet, LinearConstraint
from .metrics import default_reference, evaluate_front, hypervolume

log = logging.getLogger("srmobo")

WORKERS_ENV = "SRMOBO_WORKERS"
EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
EXACT = "exact"


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field and line."""


@dataclass
class EvaluatorSpec:
    command: list[str]
    bounds: np.ndarray
    n_objectives: int
    timeout: float = 3600.0


@dataclass
class ExperimentConfig:
    benchmark: str | None
    evaluator: EvaluatorSpec | None
    d: int
    M: int
    form: str = "scaled"
    alpha: float = 100.0
    n_init: int = 5
    budget: int = 1500
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    variants: list[str] = field(default_factory=lambda: ["Reg-UCB-EI"])
    rho: float = 0.65
    lam: float = 0.01
    kappa: float = 2.0
    kernel: str = "matern52"
    fit_starts: int = 5
    metric_cadence: int = 10
    reference: list[float] | None = None
    front_resolution: int = 500
    maximizer: MaximizerConfig = field(default_factory=MaximizerConfig)
    linear_constraints: list[dict] = field(default_factory=list)
    expression_constraints: list[str] = field(default_factory=list)
    output_dir: str = "results"
    workers: int | None = None

    @property
    def problem_name(self) -> str:
        return self.benchmark if self.benchmark else "external"

    def benchmark_spec(self) -> benchmarks.BenchmarkSpec:
        return benchmarks.BenchmarkSpec(self.benchmark, self.d, self.M, self.alpha, self.form)

    def bounds(self) -> np.ndarray:
        if self.evaluator is not None:
            return self.evaluator.bounds
        return np.array(self.benchmark_spec().bounds)

    def known_constraints(self) -> KnownConstraintSet:
        evs = [LinearConstraint(np.asarray(c["coef"], dtype=float), float(c["rhs"])) for c in self.linear_constraints]
        evs += [ExpressionConstraint(src) for src in self.expression_constraints]
        return KnownConstraintSet(tuple(evs))

    def run_config(self, variant: str, seed: int) -> driver.RunConfig:
        return driver.RunConfig(
            bounds=self.bounds(),
            n_objectives=self.M,
            n_init=self.n_init,
            budget=self.budget,
            seed=seed,
            acquisition=AcquisitionSpec.from_name(variant, self.kappa),
            rho=self.rho,
            lam=self.lam,
            kernel=gp.KernelKind(self.kernel),
            fit_starts=self.fit_starts,
            known_constraints=self.known_constraints(),
            metric_cadence=self.metric_cadence,
            maximizer=self.maximizer,
        )

    def to_dict(self) -> dict:
        """Plain mapping that parses back to an identical configuration."""
        out: dict = {}
        if self.evaluator is not None:
            out["evaluator"] = {
                "command": list(self.evaluator.command),
                "bounds": self.evaluator.bounds.tolist(),
                "n_objectives": self.evaluator.n_objectives,
                "timeout": self.evaluator.timeout,
            }
        else:
            out.update(benchmark=self.benchmark, d=self.d, M=self.M, form=self.form, alpha=self.alpha)
            out["front_resolution"] = self.front_resolution
        out.update(
            n_init=self.n_init,
            budget=self.budget,
            seeds=list(self.seeds),
            variants=list(self.variants),
            rho=self.rho,
            **{"lambda": self.lam},
            kappa=self.kappa,
            kernel=self.kernel,
            fit_starts=self.fit_starts,
            metric_cadence=self.metric_cadence,
            reference=self.reference,
            maximizer={
                "n_probes": self.maximizer.n_probes,
                "restarts": self.maximizer.restarts,
                "max_evals": self.maximizer.max_evals,
                "sigma0": self.maximizer.sigma0,
            },
            known_constraints={"linear": self.linear_constraints, "expressions": self.expression_constraints},
            output_dir=self.output_dir,
        )
        if self.workers is not None:
            out["workers"] = self.workers
        return out


_TOP_KEYS = {
    "benchmark", "evaluator", "d", "M", "form", "alpha", "n_init", "budget", "seed", "seeds", "repeats",
    "variant", "variants", "rho", "lambda", "kappa", "kernel", "fit_starts", "metric_cadence", "reference",
    "front_resolution", "maximizer", "known_constraints", "output_dir", "workers",
}  # fmt: skip


class _Fields:
    """Typed access to a mapping with line-aware error messages."""

    def __init__(self, data: dict, lines: dict[str, int], prefix: str = ""):
        self.data = data
        self.lines = lines
        self.prefix = prefix

    def error(self, key: str, msg: str) -> ConfigError:
        line = self.lines.get(key)
        where = f" (line {line})" if line else ""
        return ConfigError(f"field '{self.prefix}{key}'{where}: {msg}")

    def get(self, key, kind, default=None, check=None, msg=""):
        if key not in self.data or self.data[key] is None:
            return default
        value = self.data[key]
        try:
            if kind is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise TypeError
            elif kind is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise TypeError
                value = float(value)
            elif kind is str:
                if not isinstance(value, str):
                    raise TypeError
        except TypeError:
            raise self.error(key, f"expected {kind.__name__}, got {value!r}") from None
        if check is not None and not check(value):
            raise self.error(key, msg or f"invalid value {value!r}")
        return value


def _key_lines(text: str) -> dict[str, int]:
    """1-based line of every top-level and ``parent.child`` key."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            lines[k.value] = k.start_mark.line + 1
            if isinstance(v, yaml.MappingNode):
                for k2, _ in v.value:
                    lines[f"{k.value}.{k2.value}"] = k2.start_mark.line + 1
    return lines


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse a YAML (or JSON) experiment description.

    A manifest written by ``run`` is accepted too; its ``config`` entry is used.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"cannot parse configuration{where}: {getattr(exc, 'problem', exc)}") from None
    lines = _key_lines(text)
    if isinstance(data, dict) and "config" in data and "srmobo_version" in data:
        data = data["config"]
        lines = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of fields")
    f = _Fields(data, lines)
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise f.error(unknown[0], f"unknown field; valid fields: {', '.join(sorted(_TOP_KEYS))}")

    benchmark = f.get("benchmark", str)
    evaluator = None
    if ("evaluator" in data) == (benchmark is not None):
        raise ConfigError("exactly one of 'benchmark' or 'evaluator' must be given")
    form = f.get("form", str, "scaled", lambda v: v in benchmarks.FORMS, f"must be one of {benchmarks.FORMS}")
    alpha = f.get("alpha", float, 100.0, lambda v: v > 0, "must be positive")
    if benchmark is not None:
        if benchmark.upper() not in benchmarks.NAMES:
            raise f.error("benchmark", f"unknown benchmark {benchmark!r}; valid names: {', '.join(benchmarks.NAMES)}")
        benchmark = benchmark.upper()
        try:
            spec = benchmarks.BenchmarkSpec(benchmark, f.get("d", int), f.get("M", int), alpha, form)
        except ValueError as exc:
            raise f.error("d" if "d" in data else "benchmark", str(exc)) from None
        d, m = spec.d, spec.M
    else:
        ev = data["evaluator"]
        if not isinstance(ev, dict):
            raise f.error("evaluator", "must be a mapping with command, bounds and n_objectives")
        fe = _Fields(ev, {k.split(".", 1)[1]: v for k, v in lines.items() if k.startswith("evaluator.")}, "evaluator.")
        cmd = ev.get("command")
        if isinstance(cmd, str):
            cmd = shlex.split(cmd)
        if not isinstance(cmd, list) or not cmd or not all(isinstance(c, str) for c in cmd):
            raise fe.error("command", "must be a non-empty string or list of strings")
        try:
            bounds = np.asarray(ev.get("bounds"), dtype=float)
        except (TypeError, ValueError):
            raise fe.error("bounds", "must be a list of [lower, upper] pairs") from None
        if bounds.ndim != 2 or bounds.shape[1] != 2 or np.any(bounds[:, 1] <= bounds[:, 0]):
            raise fe.error("bounds", "must be a list of [lower, upper] pairs with lower < upper")
        m = fe.get("n_objectives", int, None, lambda v: v >= 1, "must be >= 1")
        if m is None:
            raise fe.error("n_objectives", "is required")
        timeout = fe.get("timeout", float, 3600.0, lambda v: v > 0, "must be positive")
        evaluator = EvaluatorSpec(cmd, bounds, m, timeout)
        d = bounds.shape[0]

    if "seeds" in data and ("seed" in data or "repeats" in data):
        raise f.error("seeds", "give either 'seeds' or 'seed'/'repeats', not both")
    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
            raise f.error("seeds", "must be a non-empty list of nonnegative integers")
    else:
        seed = f.get("seed", int, 0, lambda v: v >= 0, "must be >= 0")
        repeats = f.get("repeats", int, 5, lambda v: v >= 1, "must be >= 1")
        seeds = list(range(seed, seed + repeats))

    if "variant" in data and "variants" in data:
        raise f.error("variants", "give either 'variant' or 'variants', not both")
    variants = data.get("variants", data.get("variant", ["Reg-UCB-EI"]))
    if isinstance(variants, str):
        variants = [variants]
    vkey = "variants" if "variants" in data else "variant"
    if not isinstance(variants, list) or not variants:
        raise f.error(vkey, "must be a variant name or a non-empty list of names")
    for v in variants:
        if v not in VARIANTS:
            raise f.error(vkey, f"unknown variant {v!r}; valid: {', '.join(VARIANTS)}")
    if len(set(variants)) != len(variants) or len(set(seeds)) != len(seeds):
        raise ConfigError("variants and seeds must not repeat")

    kernel = f.get("kernel", str, "matern52", lambda v: v in [k.value for k in gp.KernelKind],
                   f"must be one of {[k.value for k in gp.KernelKind]}")  # fmt: skip
    reference = data.get("reference")
    if reference is not None:
        if not isinstance(reference, list) or len(reference) != m:
            raise f.error("reference", f"must be a list of {m} numbers")
        reference = [float(r) for r in reference]

    mx = data.get("maximizer") or {}
    if not isinstance(mx, dict):
        raise f.error("maximizer", "must be a mapping")
    fm = _Fields(mx, {k.split(".", 1)[1]: v for k, v in lines.items() if k.startswith("maximizer.")}, "maximizer.")
    unknown = sorted(set(mx) - {"n_probes", "restarts", "max_evals", "sigma0"})
    if unknown:
        raise fm.error(unknown[0], "unknown field; valid: n_probes, restarts, max_evals, sigma0")
    maximizer = MaximizerConfig(
        n_probes=fm.get("n_probes", int, 1024, lambda v: v >= 1, "must be >= 1"),
        restarts=fm.get("restarts", int, 3, lambda v: v >= 0, "must be >= 0"),
        max_evals=fm.get("max_evals", int, 300, lambda v: v >= 1, "must be >= 1"),
        sigma0=fm.get("sigma0", float, 0.2, lambda v: v > 0, "must be positive"),
    )

    kc = data.get("known_constraints") or {}
    if not isinstance(kc, dict) or set(kc) - {"linear", "expressions"}:
        raise f.error("known_constraints", "must be a mapping with optional 'linear' and 'expressions' lists")
    linear = []
    for item in kc.get("linear") or []:
        coef = item.get("coef") if isinstance(item, dict) else None
        if not isinstance(coef, list) or len(coef) != d or not isinstance(item.get("rhs"), (int, float)):
            raise f.error("known_constraints", f"linear constraints need 'coef' ({d} numbers) and numeric 'rhs'")
        linear.append({"coef": [float(c) for c in coef], "rhs": float(item["rhs"])})
    expressions = kc.get("expressions") or []
    for src in expressions:
        try:
            ExpressionConstraint(src)
        except (ValueError, SyntaxError, TypeError) as exc:
            raise f.error("known_constraints", f"bad expression {src!r}: {exc}") from None

    output_dir = f.get("output_dir", str, "results")
    if base_dir is not None and not os.path.isabs(output_dir):
        output_dir = str(base_dir / output_dir)

    return ExperimentConfig(
        benchmark=benchmark,
        evaluator=evaluator,
        d=d,
        M=m,
        form=form,
        alpha=alpha,
        n_init=f.get("n_init", int, 5, lambda v: v >= 1, "must be >= 1"),
        budget=f.get("budget", int, 1500, lambda v: v >= 1, "must be >= 1"),
        seeds=seeds,
        variants=variants,
        rho=f.get("rho", float, 0.65, lambda v: v >= 0, "must be >= 0"),
        lam=f.get("lambda", float, 0.01, lambda v: v >= 0, "must be >= 0"),
        kappa=f.get("kappa", float, 2.0, lambda v: v > 0, "must be positive"),
        kernel=kernel,
        fit_starts=f.get("fit_starts", int, 5, lambda v: v >= 1, "must be >= 1"),
        metric_cadence=f.get("metric_cadence", int, 10, lambda v: v >= 1, "must be >= 1"),
        reference=reference,
        front_resolution=f.get("front_resolution", int, 500, lambda v: v >= 2, "must be >= 2"),
        maximizer=maximizer,
        linear_constraints=linear,
        expression_constraints=list(expressions),
        output_dir=output_dir,
        workers=f.get("workers", int, None, lambda v: v >= 1, "must be >= 1"),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


# external evaluator ---------------------------------------------------------


def external_evaluate(command, x, timeout: float = 3600.0) -> np.ndarray | None:
    """Evaluate ``x`` with a child process speaking one-line JSON.

    Writes ``{"x": [...]}`` to the child's stdin and reads
    ``{"objectives": [...], "feasible": true}`` or ``{"feasible": false}``
    from its stdout. Returns the objectives, or ``None`` for an infeasible
    point: an explicit infeasible reply, a nonzero exit, a timeout, or
    malformed output. A command that cannot be launched raises ``OSError``.
    """
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    payload = json.dumps({"x": [float(v) for v in np.asarray(x, dtype=float).reshape(-1)]}) + "\n"
    try:
        proc = subprocess.run(argv, input=payload, capture_output=True, text=True, timeout=timeout, check=False)
    except subprocess.TimeoutExpired:
        log.warning("evaluator timed out after %g s; recording as infeasible", timeout)
        return None
    if proc.returncode != 0:
        log.warning("evaluator exited with status %d; recording as infeasible. stderr: %s",
                    proc.returncode, proc.stderr.strip()[-500:])  # fmt: skip
        return None
    line = next((ln for ln in proc.stdout.splitlines() if ln.strip()), "")
    try:
        reply = json.loads(line)
    except json.JSONDecodeError:
        reply = None
    if isinstance(reply, dict) and reply.get("feasible") is False:
        return None
    if isinstance(reply, dict) and reply.get("feasible") is True:
        obj = reply.get("objectives")
        if isinstance(obj, list) and obj and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return np.asarray(obj, dtype=float)
    log.warning("malformed evaluator output; recording as infeasible. raw output: %r", proc.stdout[:1000])
    return None


class ExternalEvaluator:
    """Picklable callable wrapping :func:`external_evaluate`."""

    def __init__(self, spec: EvaluatorSpec):
        self.spec = spec

    def __call__(self, x):
        return external_evaluate(self.spec.command, x, self.spec.timeout)


class BenchmarkEvaluator:
    def __init__(self, spec: benchmarks.BenchmarkSpec):
        self.spec = spec

    def __call__(self, x):
        return benchmarks.evaluate(self.spec, x)


# results --------------------------------------------------------------------


def format_float(value) -> str:
    """Shortest round-trip text for a float; empty for missing values."""
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def csv_columns(d: int, m: int) -> list[str]:
    return (
        ["run_id", "variant", "benchmark", "seed", "eval_index", "feasible"]
        + [f"x_{i + 1}" for i in range(d)]
        + [f"f_{j + 1}" for j in range(m)]
        + ["scalarized", "gd", "igd", "hv", "lrhd"]
    )


def run_id(benchmark: str, variant: str, seed: int) -> str:
    return f"{benchmark}_{variant}_seed{seed}"


def result_rows(rid: str, variant: str, benchmark: str, seed: int, result: driver.RunResult, m: int) -> list[list[str]]:
    checkpoints = {c.evaluations: c.report for c in result.checkpoints}
    rows = []
    for rec in result.records:
        idx = rec.iteration + 1
        objs = rec.objectives if rec.feasible else [None] * m
        rep = checkpoints.get(idx)
        metrics = [rep.gd, rep.igd, rep.hv, rep.lrhd] if rep else [None] * 4
        rows.append(
            [rid, variant, benchmark, str(seed), str(idx), "1" if rec.feasible else "0"]
            + [format_float(v) for v in rec.x]
            + [format_float(v) for v in objs]
            + [format_float(rec.scalarized)]
            + [format_float(v) for v in metrics]
        )
    return rows


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _json_float(v: float):
    return v if math.isfinite(v) else format_float(v)


@dataclass
class _Job:
    config: ExperimentConfig
    variant: str
    seed: int


def _true_front(cfg: ExperimentConfig):
    if cfg.evaluator is not None:
        return None, None
    points = benchmarks.true_front(cfg.benchmark_spec(), cfg.front_resolution).points
    ref = np.asarray(cfg.reference) if cfg.reference is not None else default_reference(points)
    return points, ref


def _execute(job: _Job) -> dict:
    """One run; everything it writes lives under its own directory."""
    cfg = job.config
    name = cfg.problem_name
    rid = run_id(name, job.variant, job.seed)
    out = Path(cfg.output_dir) / rid
    out.mkdir(parents=True, exist_ok=True)
    entry = {"run_id": rid, "variant": job.variant, "benchmark": name, "seed": job.seed}
    try:
        rc = cfg.run_config(job.variant, job.seed)
        evaluator = ExternalEvaluator(cfg.evaluator) if cfg.evaluator else BenchmarkEvaluator(cfg.benchmark_spec())
        points, ref = _true_front(cfg)
        result = driver.run(rc, evaluator, points, ref)
        rows = result_rows(rid, job.variant, name, job.seed, result, cfg.M)
        write_csv(out / "results.csv", csv_columns(cfg.d, cfg.M), rows)
        final = {"gd": math.nan, "igd": math.nan, "hv": math.nan, "lrhd": math.nan}
        front = result.front()
        if points is not None and front.size:
            rep = evaluate_front(front, points, ref, hv_ideal=hypervolume(points, ref))
            final = {"gd": rep.gd, "igd": rep.igd, "hv": rep.hv, "lrhd": rep.lrhd}
        entry.update(
            status="ok",
            evaluations=len(result.records),
            feasible=int(sum(r.feasible for r in result.records)),
            front_size=int(len(result.front_indices)),
            **{k: _json_float(v) for k, v in final.items()},
        )
    except Exception as exc:  # noqa: BLE001 - recorded per run, other runs continue
        log.error("run %s failed: %s", rid, exc)
        (out / "error.json").write_text(json.dumps({"run_id": rid, "error": f"{type(exc).__name__}: {exc}"}) + "\n")
        entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return entry


def worker_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={env!r} is not an integer") from None
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1")
        return n
    return cfg.workers or os.cpu_count() or 1


def _manifest(cfg: ExperimentConfig, jobs: list[_Job]) -> dict:
    points, ref = _true_front(cfg)
    return {
        "srmobo_version": __version__,
        "config": cfg.to_dict(),
        "runs": [run_id(cfg.problem_name, j.variant, j.seed) for j in jobs],
        "resolved": {
            "reference_point": None if ref is None else [float(v) for v in ref],
            "true_front_points": None if points is None else int(points.shape[0]),
            "objective_normalization": "min-max over feasible observations before scalarization",
            "scalarization": "regularized augmented Tchebycheff for Reg variants, augmented Tchebycheff for NoReg",
            "initial_design": "uniform random in the box, rejection-sampled against known constraints",
            "gp_prior_mean": "constant, equal to the mean of the training targets",
            "ucb_shift": "minimum of mean + kappa * sd over the probe set",
            "metrics": "GD and IGD as sqrt(sum of distances) / count; HV excludes points outside the reference",
        },
    }


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run every variant x seed of ``cfg``; returns the exit code."""
    jobs = [_Job(cfg, v, s) for v in cfg.variants for s in cfg.seeds]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(_manifest(cfg, jobs), indent=2) + "\n")
    workers = min(worker_count(cfg), len(jobs))
    if workers <= 1:
        entries = [_execute(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_execute, jobs))
    (out / "summary.json").write_text(json.dumps({"runs": entries}, indent=2) + "\n")
    failed = [e["run_id"] for e in entries if e["status"] != "ok"]
    if failed:
        log.error("%d of %d runs failed: %s", len(failed), len(entries), ", ".join(failed))
        return EXIT_RUNTIME
    return EXIT_OK


# plot data ------------------------------------------------------------------

PLOT_METRICS = ("log_gd", "log_igd", "lrhd")


def _log_or_exact(value) -> str:
    v = float(value)
    if v == 0:
        return EXACT
    return format_float(math.log(v))


def emit_plot_data(run_dirs) -> list[tuple[str, str, int, str, str]]:
    """Rows ``(variant, benchmark, seed, metric, value)`` of final metrics.

    Each directory is an experiment output directory holding
    ``summary.json``; directories without one are skipped with a warning.
    Zero GD/IGD and an exact hypervolume match are written as ``exact``.
    """
    rows = []
    for d in run_dirs:
        path = Path(d) / "summary.json"
        if not path.is_file():
            log.warning("no summary.json in %s; skipping", d)
            continue
        for e in json.loads(path.read_text())["runs"]:
            if e.get("status") != "ok":
                continue
            lr = e["lrhd"]
            lr_text = EXACT if lr in ("-inf", None) else format_float(lr)
            values = {"log_gd": _log_or_exact(e["gd"]), "log_igd": _log_or_exact(e["igd"]), "lrhd": lr_text}
            for metric in PLOT_METRICS:
                rows.append((e["variant"], e["benchmark"], int(e["seed"]), metric, values[metric]))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows


# entry point ----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srmobo", description="Three-GP multi-objective Bayesian optimization harness")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and warnings")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment described by a YAML config")
    r.add_argument("config")
    r.add_argument("--output-dir", help="override the config's output_dir")
    r.add_argument("--budget", type=int, help="override the config's budget")

    pd = sub.add_parser("plot-data", help="long-format final metrics from experiment directories")
    pd.add_argument("dirs", nargs="+")
    pd.add_argument("-o", "--output", help="write CSV here instead of stdout")

    f = sub.add_parser("front", help="export a discretized true Pareto front")
    f.add_argument("benchmark")
    f.add_argument("--d", type=int)
    f.add_argument("--M", type=int)
    f.add_argument("--form", choices=benchmarks.FORMS, default="scaled")
    f.add_argument("--alpha", type=float, default=100.0)
    f.add_argument("--resolution", type=int, default=500)
    f.add_argument("-o", "--output")

    v = sub.add_parser("validate-config", help="check a config and print it with defaults filled in")
    v.add_argument("config")
    return p


def _write_text(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate-config":
            cfg = load_config(args.config)
            sys.stdout.write(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
            return EXIT_OK
        if args.command == "run":
            cfg = load_config(args.config)
            if args.output_dir:
                cfg.output_dir = args.output_dir
            if args.budget is not None:
                if args.budget < 1:
                    raise ConfigError("--budget must be >= 1")
                cfg.budget = args.budget
            return run_experiment(cfg)
        if args.command == "front":
            try:
                spec = benchmarks.BenchmarkSpec(args.benchmark, args.d, args.M, args.alpha, args.form)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            if args.resolution < 2:
                raise ConfigError("--resolution must be >= 2")
            pts = benchmarks.true_front(spec, args.resolution).points
            rows = [[format_float(v) for v in p] for p in pts]
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow([f"f_{j + 1}" for j in range(spec.M)])
            w.writerows(rows)
            _write_text(buf.getvalue(), args.output)
            return EXIT_OK
        if args.command == "plot-data":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["variant", "benchmark", "seed", "metric", "value"])
            w.writerows(emit_plot_data(args.dirs))
            _write_text(buf.getvalue(), args.output)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
