"""
E2E acceptance runs on the default grid (N = 4096, R = 40).

Deselected by default; run with: pytest -m e2e
The full suite solves two rate studies over c = 10 .. 160 and takes minutes.
"""

import json
import os
from pathlib import Path

import pytest

from relhartree.cli import EXIT_OK, run
from relhartree.config import RuntimeSettings
from relhartree.models import Verdict
from relhartree.verification import run_suite

pytestmark = pytest.mark.e2e

WORKERS = int(os.environ.get("RELHARTREE_MAX_WORKERS", "1"))


def _failures(verdicts: list[Verdict]) -> list[str]:
    return [f"{v.name}: observed {v.observed}, {v.note}" for v in verdicts if not v.passed]


@pytest.fixture(scope="module")
def full_verdicts() -> list[Verdict]:
    return run_suite("full", max_workers=WORKERS)


class TestFastSuite:
    """Identities, symbols, limit states and first coefficients."""

    def test_all_checks_pass(self) -> None:
        verdicts = run_suite("fast")
        assert verdicts
        assert _failures(verdicts) == []

    def test_cli_verify(self, tmp_path: Path) -> None:
        """relhartree verify exits 0 and writes the verdicts."""
        output = tmp_path / "verdicts.json"
        settings = RuntimeSettings(cache_dir=tmp_path / "cache")
        assert run(["verify", "--suite", "fast", "--output", str(output)], settings) == EXIT_OK
        written = json.loads(output.read_text())
        assert all(entry["passed"] for entry in written)


class TestFullSuite:
    """Grid refinement, rate studies and the negative control."""

    def test_all_checks_pass(self, full_verdicts: list[Verdict]) -> None:
        assert _failures(full_verdicts) == []

    def test_rates_were_checked(self, full_verdicts: list[Verdict]) -> None:
        """Both rate studies and the negative control contributed verdicts."""
        names = [v.name for v in full_verdicts]
        assert any(name.startswith("R_1 slope") for name in names)
        assert any("Nehari scale slope" in name for name in names)
        assert any(name.startswith("negative control") for name in names)
        assert any("limit" in name for name in names)

    def test_refinement_was_checked(self, full_verdicts: list[Verdict]) -> None:
        """Both limit states and the first corrections were checked for grid independence."""
        names = {v.name for v in full_verdicts}
        for kind in ("action", "energy"):
            assert f"{kind} grid refinement shift (2N, 2R)" in names
            assert f"{kind} domain doubling shift (2R, fixed dr)" in names
        assert {"f_1 grid refinement shift", "a_2 grid refinement", "b_2 grid refinement"} <= names
        assert "g_1 spectral tail" in names
        assert any("non-increasing" in name for name in names)
        assert "negative control: zeroed g_1 fails 'R_1 slope in H^1'" in names
