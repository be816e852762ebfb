"""Run every config in scripts/configs (or the ones named) through the CLI."""

import argparse
import sys
import time
from pathlib import Path

from oppenheim_lab.cli import main

HERE = Path(__file__).resolve().parent


def run_all(names: list[str], out_dir: Path, threads: int) -> int:
    configs = sorted((HERE / "configs").glob("*.json"))
    if names:
        configs = [c for c in configs if c.stem in names]
    worst = 0
    for cfg in configs:
        out = out_dir / f"{cfg.stem}.csv"
        t0 = time.perf_counter()
        code = main(["run", "--config", str(cfg), "--output", str(out), "--threads", str(threads)])
        print(f"{cfg.stem:18s} exit {code}  {time.perf_counter() - t0:6.1f} s  -> {out}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("names", nargs="*", help="config names without .json")
    p.add_argument("--out", default="results")
    p.add_argument("--threads", type=int, default=1)
    a = p.parse_args()
    sys.exit(run_all(a.names, Path(a.out), a.threads))
