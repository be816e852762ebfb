"""Command line front end: ``run`` one experiment or ``verify`` the acceptance suite.

Exit codes for ``run``: 0 success, 2 invalid configuration or input,
3 enumeration cap exceeded, 1 anything else.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import math
import os
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, execute
from .intlinalg import EnumerationCapError
from .output import Table, parse_output, read_output, render, write_atomic

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oppenheim-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    r.add_argument("--config", help="strict-schema JSON config file")
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    r.add_argument("--output", help="output path (overrides the config)")
    r.add_argument("--format", choices=["csv", "json"])

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--suite", choices=["quick", "full"], default="quick")
    v.add_argument("--golden", help="directory of golden tables to compare against")
    v.add_argument("--emit", help="directory under which dated golden tables are written")
    v.add_argument("--only", help="comma-separated criterion ids")
    return p


def load_config(args) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config '{args.config}': {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config '{args.config}' is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    if args.experiment:
        if "experiment" in raw and raw["experiment"] != args.experiment:
            raise ConfigError(
                f"--experiment {args.experiment} disagrees with key 'experiment' = {raw['experiment']!r}"
            )
        raw = {**raw, "experiment": args.experiment}
    if args.seed is not None:
        raw["seed"] = args.seed
    out = dict(raw.get("output") or {})
    if args.output:
        out["path"] = args.output
    if args.format:
        out["format"] = args.format
    elif args.output and "format" not in out:
        out["format"] = "json" if args.output.endswith(".json") else "csv"
    if out:
        raw["output"] = out
    return ExperimentConfig.from_dict(raw)


def cmd_run(args, err) -> int:
    try:
        config = load_config(args)
        resolved = config.resolved()
        table = execute(config, max(1, args.threads))
        data = render(resolved, table, config.output["format"])
        write_atomic(config.output["path"], data)
    except EnumerationCapError as exc:
        print(f"error: enumeration cap exceeded: {exc}", file=err)
        return EXIT_CAP
    except (ValueError, ArithmeticError) as exc:
        # ConfigError, IntervalError and form errors all land here
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG
    return EXIT_OK


# ---------------------------------------------------------------- verify


def _golden_name(cid: int) -> str:
    return f"criterion_{cid:02d}.csv"


def _golden_bytes(res, scale: str) -> bytes:
    return render({"criterion": res.id, "name": res.name, "suite": scale}, res.table, "csv")


def _same(a, b, rtol: float = 1e-9) -> bool:
    if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, (int, float)) or not isinstance(b, (int, float)):
        if isinstance(a, dict) and isinstance(b, dict):
            return a.keys() == b.keys() and all(_same(a[k], b[k], rtol) for k in a)
        if isinstance(a, list) and isinstance(b, list):
            return len(a) == len(b) and all(_same(x, y, rtol) for x, y in zip(a, b))
        return a == b
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    return a == b or abs(a - b) <= rtol * max(abs(a), abs(b))


def table_drift(golden: Table, fresh: Table) -> list[str]:
    """Human-readable differences between two tables."""
    out = []
    if golden.columns != fresh.columns:
        return [f"columns {golden.columns} != {fresh.columns}"]
    if len(golden.rows) != len(fresh.rows):
        out.append(f"{len(golden.rows)} golden rows, {len(fresh.rows)} fresh rows")
    for i, (g, f) in enumerate(zip(golden.rows, fresh.rows)):
        for c, x, y in zip(golden.columns, g, f):
            if not _same(x, y):
                out.append(f"row {i} column {c}: golden {x!r}, now {y!r}")
    if not _same(golden.summary, fresh.summary):
        out.append(f"summary: golden {golden.summary}, now {fresh.summary}")
    return out


def cmd_verify(args, out, err) -> int:
    from .acceptance import run_suite

    only = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_suite(args.suite, only, echo=lambda line: print(line, file=out, flush=True))
    failed = [r.id for r in results if not r.passed]
    drifted = []
    if args.golden:
        gdir = Path(args.golden)
        for r in results:
            path = gdir / _golden_name(r.id)
            if not path.exists():
                print(f"[DRIFT] {r.id:2d} no golden table at {path}", file=out)
                drifted.append(r.id)
                continue
            try:
                _, golden = read_output(path)
            except (ValueError, KeyError, StopIteration) as exc:
                print(f"[DRIFT] {r.id:2d} unreadable golden table {path}: {exc}", file=out)
                drifted.append(r.id)
                continue
            # normalize the fresh table through the same text round trip
            _, fresh = parse_output(_golden_bytes(r, args.suite).decode())
            diffs = table_drift(golden, fresh)
            if diffs:
                drifted.append(r.id)
                for d in diffs[:5]:
                    print(f"[DRIFT] {r.id:2d} {d}", file=out)
    # compare first so a same-day golden directory is not overwritten before use
    emit = args.emit or ("golden" if args.suite == "full" else None)
    if emit:
        day = Path(emit) / dt.date.today().isoformat()
        for r in results:
            write_atomic(day / _golden_name(r.id), _golden_bytes(r, args.suite))
        print(f"golden tables written to {day}", file=out)
    print(
        f"{len(results) - len(failed)}/{len(results)} criteria passed"
        + (f"; failed: {failed}" if failed else "")
        + (f"; drift in: {drifted}" if drifted else ""),
        file=out,
    )
    return EXIT_OK if not failed and not drifted else EXIT_ERROR


def main(argv: list[str] | None = None, quiet: bool = False) -> int:
    args = _parser().parse_args(argv)
    out = open(os.devnull, "w") if quiet else sys.stdout
    err = open(os.devnull, "w") if quiet else sys.stderr
    try:
        if args.command == "run":
            return cmd_run(args, err)
        return cmd_verify(args, out, err)
    finally:
        if quiet:
            out.close()
            err.close()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
