"""SVG log-log plots of sweep residuals with their fitted lines."""

from pathlib import Path
from typing import Any

import numpy as np

from .errors import RelHartreeError
from .models import SweepReport


def _pyplot() -> Any:
    try:
        import matplotlib
    except ImportError as exc:
        raise RelHartreeError(
            "Plotting needs matplotlib; install the 'plot' extra", error_code="MISSING_EXTRA"
        ) from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_report(report: SweepReport, directory: str | Path) -> list[Path]:
    """One ``<quantity>.svg`` per fitted quantity with at least one positive point."""
    plt = _pyplot()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for fit in report.fits:
        xs, ys = report.series(fit.quantity)
        points = [(x, y) for x, y in zip(xs, ys, strict=True) if y > 0]
        if not points:
            continue
        cs = np.array([x for x, _ in points])
        values = np.array([y for _, y in points])

        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.loglog(cs, values, "o", label=fit.quantity)
        if fit.slope is not None and fit.intercept is not None:
            line = np.exp(fit.intercept) * cs**fit.slope
            ax.loglog(cs, line, "--", label=f"slope {fit.slope:.3f}")
        ax.set_xlabel("c")
        ax.set_ylabel(fit.quantity)
        ax.set_title(f"{report.kind.value}: {fit.quantity}")
        ax.legend()
        fig.tight_layout()

        path = directory / f"{fit.quantity}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
