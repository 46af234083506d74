"""Command-line experiment runner and verification harness.

Usage:  depthlab <command> --config <file> [--seed N] [--out DIR] [--threads N]

Commands: generate, depth, median, line-search, landscape, verify, bench.
Every run writes a CSV of per-check rows plus a JSON summary to the output
directory.  Exit codes: 0 all checks pass, 1 a verification failed,
2 usage/config error.  The DEPTHLAB_SEED environment variable overrides the
config seed; the --seed flag overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import line, sample_directions
from .measures import MeasureSpec, generate_measure, load_measure, save_measure
from .depth import deep_line_search, direction_profile, flat_depth, line_depth_thresholds, point_depth
from .median import tukey_median
from . import suites as _suites

COMMANDS = ("generate", "depth", "median", "line-search", "landscape", "verify", "bench")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    out: str = "depthlab_out"
    threads: int = 1
    raw: dict = field(default_factory=dict)

    @staticmethod
    def from_file(path: str, command: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config: file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: malformed JSON at line {e.lineno}: {e.msg}")
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be an object")
        cfg_cmd = raw.get("command", command)
        if cfg_cmd != command:
            raise ConfigError(f"config.command: {cfg_cmd!r} does not match CLI command {command!r}")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("config.seed: must be an integer")
        return ExperimentConfig(command, seed, raw.get("out", "depthlab_out"), int(raw.get("threads", 1)), raw)

    def measure(self, seed_override: int | None = None):
        spec = self.raw.get("measure")
        if spec is None:
            raise ConfigError("config.measure: missing")
        if "path" in spec:
            try:
                return load_measure(spec["path"])
            except (OSError, ValueError) as e:
                raise ConfigError(f"config.measure.path: {e}")
        try:
            ms = MeasureSpec(
                kind=spec["kind"],
                dim=int(spec["dim"]),
                n=int(spec.get("n", 1)),
                params=spec.get("params", {}),
                seed=int(spec.get("seed", seed_override if seed_override is not None else self.seed)),
            )
        except KeyError as e:
            raise ConfigError(f"config.measure.{e.args[0]}: missing")
        except ValueError as e:
            raise ConfigError(f"config.measure: {e}")
        return generate_measure(ms)


def _result_row(check: str, observed: float, cfg: ExperimentConfig, d: int, n: int,
                instance="cli", use_expected: bool = True):
    has_exp = use_expected and "expected" in cfg.raw
    expected = cfg.raw["expected"] if has_exp else observed
    tolerance = cfg.raw.get("tolerance", 1e-9)
    ok = abs(observed - expected) <= tolerance if has_exp else True
    return _suites._row("cli", check, instance, d, n, cfg.seed, expected, observed,
                        observed - expected, ok)


def _run_command(cfg: ExperimentConfig) -> list[dict]:
    cmd = cfg.command
    if cmd == "generate":
        m = cfg.measure()
        out_path = cfg.raw.get("out_measure")
        if not out_path:
            raise ConfigError("config.out_measure: missing (where to write the measure)")
        save_measure(m, out_path)
        return [_result_row("generate_n", float(m.n), cfg, m.dim, m.n)]
    if cmd == "depth":
        m = cfg.measure()
        if "query" not in cfg.raw:
            raise ConfigError("config.query: missing")
        q = np.asarray(cfg.raw["query"], dtype=float)
        mode = cfg.raw.get("mode", "exact")
        res = point_depth(m, q, mode=mode, sample_count=int(cfg.raw.get("sample_count", 512)), seed=cfg.seed)
        return [_result_row("depth", res.depth, cfg, m.dim, m.n)]
    if cmd == "median":
        m = cfg.measure()
        budget = cfg.raw.get("budget", {})
        res = tukey_median(m, mode=budget.get("mode", "auto"),
                           starts=int(budget.get("starts", 16)),
                           iters=int(budget.get("iters", 30)), seed=cfg.seed)
        rows = [_result_row("median_depth", res.depth, cfg, m.dim, m.n)]
        for j, c in enumerate(res.point):
            rows.append(_result_row(f"median_x{j}", float(c), cfg, m.dim, m.n, use_expected=False))
        return rows
    if cmd == "line-search":
        m = cfg.measure()
        res = deep_line_search(
            m,
            grid_count=int(cfg.raw.get("grid_count", 512)),
            refine_iters=int(cfg.raw.get("refine_iters", 3)),
            seed=cfg.seed,
        )
        th = line_depth_thresholds(m.dim)
        rows = [
            _result_row("line_depth", res.depth, cfg, m.dim, m.n),
            _suites._row("cli", "line_vs_rado", "cli", m.dim, m.n, cfg.seed,
                         th["rado"], res.depth, res.depth - th["rado"], res.depth >= th["rado"]),
            _suites._row("cli", "line_vs_improved", "cli", m.dim, m.n, cfg.seed,
                         th["improved"], res.depth, res.depth - th["improved"],
                         res.depth >= th["improved"]),
        ]
        return rows
    if cmd == "landscape":
        m = cfg.measure()
        count = int(cfg.raw.get("grid_count", 64))
        dirs = sample_directions(m.dim, count, mode="grid")
        budget = {"starts": 8, "iters": 12, "seed": cfg.seed}
        rows = []
        for i, u in enumerate(dirs):
            a, _ = direction_profile(m, u, budget)
            rows.append(_result_row("profile_depth", a, cfg, m.dim, m.n, instance=f"dir{i}"))
        return rows
    if cmd == "verify":
        suite = cfg.raw.get("suite")
        if suite not in _suites.SUITES:
            raise ConfigError(f"config.suite: {suite!r} invalid; valid: {', '.join(_suites.SUITES)}")
        return _suites.run_suite(suite, cfg.raw.get("params"), threads=cfg.threads)
    if cmd == "bench":
        m = cfg.measure()
        reps = int(cfg.raw.get("reps", 3))
        t0 = time.perf_counter()
        for _ in range(reps):
            point_depth(m, np.zeros(m.dim), mode="exact" if m.dim <= 3 else "sampled")
        dt = (time.perf_counter() - t0) / reps
        return [_result_row("depth_seconds", dt, cfg, m.dim, m.n)]
    raise ConfigError(f"unknown command {cmd!r}")


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute a configured command, write CSV and JSON summary, and return
    the process exit code."""
    t0 = time.perf_counter()
    rows = _run_command(cfg)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_text = _suites.rows_to_csv(rows)
    name = cfg.raw.get("suite", cfg.command).replace("-", "_")
    (out_dir / f"{name}.csv").write_text(csv_text, encoding="utf-8", newline="")
    passed = sum(1 for r in rows if r["pass"])
    summary = {
        "command": cfg.command,
        "suite": cfg.raw.get("suite"),
        "rows": len(rows),
        "passed": passed,
        "failed": len(rows) - passed,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "elapsed_s": round(time.perf_counter() - t0, 3),
    }
    exit_code = 0 if passed == len(rows) else 1
    summary["exit_code"] = exit_code
    (out_dir / f"{name}_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="depthlab",
        description="Half-space depth experiments and verification suites.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config, args.command)
        env_seed = os.environ.get("DEPTHLAB_SEED")
        if env_seed is not None:
            try:
                cfg.seed = int(env_seed)
            except ValueError:
                raise ConfigError("DEPTHLAB_SEED: must be an integer")
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        if args.threads is not None:
            cfg.threads = args.threads
        return run_experiment(cfg)
    except (ConfigError, ValueError) as e:
        # ValueError here means a user-supplied parameter violated an
        # operation's precondition: a config-class failure
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
