"""Acceptance suite: every criterion at its stated tolerance.

Runs at full scale by default; set ACCEPTANCE_SCALE=quick for the reduced
sizes.  Each criterion prints one [PASS]/[FAIL] line to the terminal.
"""

import os

import pytest

from oppenheim_lab.acceptance import CRITERIA, run_criterion

SCALE = os.environ.get("ACCEPTANCE_SCALE", "full")


@pytest.mark.slow
@pytest.mark.parametrize("cid", [cid for cid, _ in CRITERIA], ids=lambda c: f"criterion_{c:02d}")
def test_criterion(cid, capsys):
    res = run_criterion(cid, SCALE)
    with capsys.disabled():
        print("\n" + res.line(), flush=True)
    assert res.passed, res.line()
