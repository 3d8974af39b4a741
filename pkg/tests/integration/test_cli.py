"""
Integration tests for the CLI subcommands on the reduced grid.

Each command writes its artifacts under tmp_path and prints a JSON summary.
"""

import json
from pathlib import Path

import pytest

from relhartree.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_VERIFY_FAILED, run
from relhartree.config import RuntimeSettings
from relhartree.expansion import correction_residuals
from relhartree.ground_state import GroundStateResult
from relhartree.models import Expectation, SweepReport
from relhartree.persistence import load_profile, load_report, load_series, read_report_csv
from relhartree.radial_core import RadialGrid
from tests.conftest import SMALL_N, SMALL_RADIUS

pytestmark = pytest.mark.integration

GRID_FLAGS = [
    "--n", str(SMALL_N), "--radius", str(SMALL_RADIUS), "--tol", "1e-12", "--residual-tol", "1e-10"
]


@pytest.fixture
def settings(tmp_path: Path) -> RuntimeSettings:
    return RuntimeSettings(cache_dir=tmp_path / "cache")


def _summary(captured: str, key: str) -> dict:
    """The JSON line the command printed that contains ``key``."""
    for line in reversed(captured.splitlines()):
        if line.startswith("{") and f'"{key}"' in line:
            return json.loads(line)
    raise AssertionError(f"no summary with {key!r} in output")


class TestGroundStateCommand:
    """relhartree groundstate."""

    def test_limit_state_round_trip(
        self,
        tmp_path: Path,
        settings: RuntimeSettings,
        grid: RadialGrid,
        limit_energy: GroundStateResult,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """The written profile reloads to the solved limit state."""
        output = tmp_path / "w.profile"
        args = ["groundstate", "--kind", "energy", *GRID_FLAGS, "--output", str(output)]
        assert run(args, settings) == EXIT_OK
        summary = _summary(capsys.readouterr().out, "sha256")
        record = load_profile(output, expected_grid=grid)
        assert record.digest == summary["sha256"]
        assert record.level == pytest.approx(limit_energy.level, rel=1e-9)
        assert summary["residual_l2"] < 1e-9

    def test_cache_is_reused(
        self,
        tmp_path: Path,
        settings: RuntimeSettings,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        """A second run reads the cached limit state instead of solving."""
        args = ["groundstate", "--kind", "action", "--lambda", "1", *GRID_FLAGS]
        assert run([*args, "--output", str(tmp_path / "first.profile")], settings) == EXIT_OK
        assert len(list(settings.cache_dir.glob("*.profile"))) == 1

        def no_solve(*args, **kwargs):
            raise AssertionError("cache miss")

        monkeypatch.setattr("relhartree.cache.solve", no_solve)
        assert run([*args, "--output", str(tmp_path / "second.profile")], settings) == EXIT_OK
        first = load_profile(tmp_path / "first.profile")
        second = load_profile(tmp_path / "second.profile")
        assert first.field.values.tolist() == second.field.values.tolist()

    def test_relativistic_state(
        self, tmp_path: Path, settings: RuntimeSettings, limit_energy: GroundStateResult
    ) -> None:
        """--c selects a finite speed of light; nothing is cached."""
        output = tmp_path / "wc.profile"
        code = run(["groundstate", "--c", "40", *GRID_FLAGS, "--output", str(output)], settings)
        assert code == EXIT_OK
        record = load_profile(output)
        assert record.params.c == 40.0
        assert record.level < limit_energy.level
        assert not settings.cache_dir.exists() or not any(settings.cache_dir.iterdir())

    def test_subcritical_c_is_a_computation_failure(
        self, tmp_path: Path, settings: RuntimeSettings
    ) -> None:
        """c below c_min exits with 5."""
        args = ["groundstate", "--c", "3", *GRID_FLAGS, "--output", str(tmp_path / "w.profile")]
        assert run(args, settings) == EXIT_COMPUTATION


class TestExpandCommand:
    """relhartree expand."""

    def test_series_directory(
        self,
        tmp_path: Path,
        settings: RuntimeSettings,
        grid: RadialGrid,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """The series directory reloads and its corrections still solve their equations."""
        output = tmp_path / "series"
        args = ["expand", "--kind", "energy", "--order", "1", *GRID_FLAGS, "--output", str(output)]
        assert run(args, settings) == EXIT_OK
        summary = _summary(capsys.readouterr().out, "manifest")
        assert summary["order"] == 1
        assert len(summary["a"]) == 2
        series = load_series(output, expected_grid=grid)
        assert series.a == tuple(summary["a"])
        assert max(correction_residuals(series)) < 1e-8


class TestSweepCommand:
    """relhartree sweep."""

    def test_report_and_plots(
        self,
        tmp_path: Path,
        settings: RuntimeSettings,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """CSV, JSON and SVG artifacts are written and agree."""
        config = tmp_path / "run.cfg"
        config.write_text(
            "kind = action\n"
            "lambda = 1.0\n"
            "c_list = 10, 14.142135623730951, 20, 28.284271247461902, 40\n"
            "order = 1\n"
            "sobolev = 1\n"
        )
        output = tmp_path / "sweep"
        args = ["sweep", "--config", str(config), *GRID_FLAGS, "--plot", "--output", str(output)]
        assert run(args, settings) == EXIT_OK

        summary = _summary(capsys.readouterr().out, "written")
        assert summary["fits"]["residual_k0_s1"] == pytest.approx(-2.0, abs=0.1)
        assert summary["fits"]["residual_k1_s1"] == pytest.approx(-4.0, abs=0.2)
        names = {Path(path).name for path in summary["written"]}
        assert {"report.csv", "fits.csv", "report.json", "residual_k0_s1.svg"} <= names

        report = load_report(output / "report.json")
        frame = read_report_csv(output / "report.csv")
        assert list(frame["c"]) == pytest.approx(report.c_values)
        assert report.grid.n == SMALL_N

    def test_failed_expectation_sets_exit_code(
        self,
        tmp_path: Path,
        settings: RuntimeSettings,
        monkeypatch: pytest.MonkeyPatch,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """A sweep whose expectations fail exits 1 and still writes its report."""

        def rising(report: SweepReport) -> list[Expectation]:
            return [
                Expectation(
                    name="R_0 rises", quantity="residual_k0_s1", expected=2.0, tolerance=0.1
                )
            ]

        monkeypatch.setattr("relhartree.cli.default_expectations", rising)
        config = tmp_path / "run.cfg"
        config.write_text(
            "kind = action\nlambda = 1.0\nc_list = 10, 20, 40\norder = 0\nsobolev = 1\n"
        )
        output = tmp_path / "sweep"
        args = ["sweep", "--config", str(config), *GRID_FLAGS, "--output", str(output)]
        assert run(args, settings) == EXIT_VERIFY_FAILED

        summary = _summary(capsys.readouterr().out, "written")
        assert summary["expectations"] == {"passed": 0, "failed": 1}
        assert (output / "report.json").exists()
