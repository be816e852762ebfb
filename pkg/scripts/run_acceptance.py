"""Run the acceptance suite and compare against the newest golden directory."""

import argparse
import sys
from pathlib import Path

from oppenheim_lab.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--suite", choices=["quick", "full"], default="quick")
    p.add_argument("--only", help="comma-separated criterion ids")
    a = p.parse_args()
    argv = ["verify", "--suite", a.suite]
    dated = sorted(d for d in (ROOT / "golden").glob("*") if d.is_dir())
    # golden tables are recorded at full scale, so only compare full runs
    if a.suite == "full" and dated:
        argv += ["--golden", str(dated[-1]), "--emit", str(ROOT / "golden")]
    if a.only:
        argv += ["--only", a.only]
    sys.exit(main(argv))
