"""
Result persistence.

Profiles are plain text, one ``key = value`` header line per metadata
field, a ``[values]`` section with one value per line (17 significant
digits, so floats round-trip exactly), and a ``sha256 = <hex>`` footer
covering every byte before it.

Series are directories of profiles plus a ``series.json`` manifest.
Reports are CSV tables (records and fits) mirrored by a JSON document.
"""

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .config import CODE_VERSION
from .errors import (
    GridMismatchError,
    ProfileFormatError,
    ProfileIntegrityError,
    RelHartreeError,
)
from .expansion import ExpansionSeries
from .ground_state import GroundStateResult
from .models import GridSpec, PhysicalParams, ProblemKind, SweepReport
from .radial_core import RadialField, RadialGrid

PROFILE_FORMAT = "relhartree-profile/1"
VALUES_MARKER = "[values]"
HASH_PREFIX = "sha256 = "
SERIES_MANIFEST = "series.json"
HEADER_KEYS = (
    "format",
    "role",
    "kind",
    "n",
    "radius",
    "m",
    "lambda",
    "c",
    "level",
    "multiplier",
    "residual_l2",
    "iterations",
    "code_version",
)

ROLE_GROUND_STATE = "ground_state"
ROLE_CORRECTION = "correction"


def _format_float(value: float) -> str:
    return format(value, ".17g")


def _digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


# =============================================================================
# Profiles
# =============================================================================


@dataclass(frozen=True)
class ProfileRecord:
    """A radial profile with the metadata needed to reuse it."""

    field: RadialField
    kind: ProblemKind
    params: PhysicalParams
    role: str = ROLE_GROUND_STATE
    level: float = math.nan
    multiplier: float = math.nan
    residual_l2: float = math.nan
    iterations: int = 0
    code_version: str = CODE_VERSION
    digest: str = ""

    @property
    def grid(self) -> RadialGrid:
        return self.field.grid

    @classmethod
    def from_result(cls, result: GroundStateResult) -> "ProfileRecord":
        return cls(
            field=result.profile,
            kind=result.kind,
            params=result.params,
            level=result.level,
            multiplier=result.multiplier,
            residual_l2=result.residual_l2,
            iterations=result.iterations,
        )

    def to_result(self) -> GroundStateResult:
        return GroundStateResult(
            profile=self.field,
            kind=self.kind,
            params=self.params,
            level=self.level,
            multiplier=self.multiplier,
            residual_l2=self.residual_l2,
            iterations=self.iterations,
            converged=True,
        )


def _header(record: ProfileRecord) -> list[tuple[str, str]]:
    params = record.params
    return [
        ("format", PROFILE_FORMAT),
        ("role", record.role),
        ("kind", record.kind.value),
        ("n", str(record.grid.n)),
        ("radius", _format_float(record.grid.radius)),
        ("m", _format_float(params.m)),
        ("lambda", "none" if params.lam is None else _format_float(params.lam)),
        ("c", _format_float(params.c)),
        ("level", _format_float(record.level)),
        ("multiplier", _format_float(record.multiplier)),
        ("residual_l2", _format_float(record.residual_l2)),
        ("iterations", str(record.iterations)),
        ("code_version", record.code_version),
    ]


def render_profile(record: ProfileRecord) -> bytes:
    """Serialized bytes of a profile, hash footer included."""
    lines = [f"{key} = {value}" for key, value in _header(record)]
    lines.append(VALUES_MARKER)
    lines.extend(_format_float(float(v)) for v in record.field.values)
    body = ("\n".join(lines) + "\n").encode("utf-8")
    return body + f"{HASH_PREFIX}{_digest(body)}\n".encode("utf-8")


def save_profile(record: ProfileRecord, path: str | Path) -> str:
    """Write ``record`` to ``path``; returns the content hash."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = render_profile(record)
    path.write_bytes(payload)
    return _digest(payload[: payload.rindex(HASH_PREFIX.encode("utf-8"))])


def _parse_header(path: Path, lines: list[str]) -> dict[str, str]:
    header: dict[str, str] = {}
    for line in lines:
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ProfileFormatError(path, f"expected 'key = value', got {line!r}")
        header[key.strip()] = value.strip()
    missing = set(HEADER_KEYS) - header.keys()
    if missing:
        raise ProfileFormatError(path, f"missing header keys {sorted(missing)}")
    if header["format"] != PROFILE_FORMAT:
        raise ProfileFormatError(path, f"unsupported format {header['format']!r}")
    return header


def load_profile(path: str | Path, expected_grid: RadialGrid | None = None) -> ProfileRecord:
    """
    Read and verify a profile.

    Raises:
        ProfileFormatError: missing file or unparsable content
        ProfileIntegrityError: the hash footer does not match
        GridMismatchError: the stored grid differs from ``expected_grid``
    """
    path = Path(path)
    try:
        payload = path.read_bytes()
    except FileNotFoundError as exc:
        raise ProfileFormatError(path, "no such file") from exc

    body, sep, footer = payload.rstrip(b"\n").rpartition(b"\n")
    footer_text = footer.decode("utf-8", errors="replace")
    if not sep or not footer_text.startswith(HASH_PREFIX):
        raise ProfileFormatError(path, "missing hash footer")
    body += b"\n"
    if _digest(body) != footer_text.removeprefix(HASH_PREFIX).strip():
        raise ProfileIntegrityError(path)

    text = body.decode("utf-8").splitlines()
    if VALUES_MARKER not in text:
        raise ProfileFormatError(path, f"missing {VALUES_MARKER} section")
    marker = text.index(VALUES_MARKER)
    header = _parse_header(path, text[:marker])

    try:
        grid = RadialGrid(int(header["n"]), float(header["radius"]))
        values = np.array([float(v) for v in text[marker + 1 :]], dtype=np.float64)
        lam = None if header["lambda"] == "none" else float(header["lambda"])
        params = PhysicalParams(m=float(header["m"]), lam=lam, c=float(header["c"]))
        record = ProfileRecord(
            field=RadialField(grid, values),
            kind=ProblemKind(header["kind"]),
            params=params,
            role=header["role"],
            level=float(header["level"]),
            multiplier=float(header["multiplier"]),
            residual_l2=float(header["residual_l2"]),
            iterations=int(header["iterations"]),
            code_version=header["code_version"],
            digest=footer_text.removeprefix(HASH_PREFIX).strip(),
        )
    except (ValueError, ValidationError, RelHartreeError) as exc:
        raise ProfileFormatError(path, str(exc)) from exc

    if expected_grid is not None and record.grid != expected_grid:
        raise GridMismatchError(
            f"{path} holds grid (n={record.grid.n}, R={record.grid.radius:g}); "
            f"expected (n={expected_grid.n}, R={expected_grid.radius:g})"
        )
    return record


# =============================================================================
# Series
# =============================================================================


class SeriesManifest(BaseModel):
    """Contents of ``series.json``."""

    model_config = ConfigDict(ser_json_inf_nan="strings")

    kind: ProblemKind
    order: int = Field(..., ge=0)
    params: PhysicalParams
    grid: GridSpec
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()
    files: dict[str, str] = Field(..., description="Profile file name -> sha256")
    code_version: str = CODE_VERSION


def _term_file(index: int) -> str:
    return "base.profile" if index == 0 else f"correction_{index}.profile"


def save_series(series: ExpansionSeries, directory: str | Path) -> Path:
    """Write the base, every correction and the manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    base = series.base
    files: dict[str, str] = {}
    for index, term in enumerate(series.terms):
        name = _term_file(index)
        if index == 0:
            record = ProfileRecord.from_result(base)
        else:
            record = ProfileRecord(
                field=term, kind=series.kind, params=base.params, role=ROLE_CORRECTION
            )
        files[name] = save_profile(record, directory / name)

    manifest = SeriesManifest(
        kind=series.kind,
        order=series.order,
        params=base.params,
        grid=GridSpec.of(base.grid),
        a=series.a,
        b=series.b,
        files=files,
    )
    path = directory / SERIES_MANIFEST
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def load_series(directory: str | Path, expected_grid: RadialGrid | None = None) -> ExpansionSeries:
    """
    Rebuild a series saved by :func:`save_series`.

    Raises:
        ProfileFormatError: missing or invalid manifest
        ProfileIntegrityError: a profile's hash differs from the manifest
    """
    directory = Path(directory)
    path = directory / SERIES_MANIFEST
    try:
        manifest = SeriesManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ProfileFormatError(path, "no such file") from exc
    except ValidationError as exc:
        raise ProfileFormatError(path, str(exc)) from exc

    grid = expected_grid or manifest.grid.to_grid()
    terms: list[RadialField] = []
    base: GroundStateResult | None = None
    for index in range(manifest.order + 1):
        name = _term_file(index)
        if name not in manifest.files:
            raise ProfileFormatError(path, f"manifest does not list {name}")
        record = load_profile(directory / name, grid)
        if record.digest != manifest.files[name]:
            raise ProfileIntegrityError(directory / name)
        if index == 0:
            base = record.to_result()
        terms.append(record.field)
    assert base is not None
    return ExpansionSeries(
        kind=manifest.kind, base=base, terms=tuple(terms), a=manifest.a, b=manifest.b
    )


# =============================================================================
# Reports
# =============================================================================

RECORD_COLUMNS = {
    "c": "speed of light",
    "level": "energy level e_c (energy) or action level J_c (action)",
    "multiplier": "omega_c (energy) or lambda (action)",
    "iterations": "solver iterations",
}


def report_frame(report: SweepReport) -> pd.DataFrame:
    """One row per c; quantity columns in sorted key order."""
    keys = sorted({key for record in report.records for key in record.quantities})
    rows = [
        {
            "c": record.c,
            "level": record.level,
            "multiplier": record.multiplier,
            "iterations": record.iterations,
            **{key: record.quantities.get(key, math.nan) for key in keys},
        }
        for record in report.records
    ]
    return pd.DataFrame(rows, columns=[*RECORD_COLUMNS, *keys])


def fits_frame(report: SweepReport) -> pd.DataFrame:
    return pd.DataFrame(
        [fit.model_dump() for fit in report.fits],
        columns=["quantity", "slope", "intercept", "r_squared", "points", "excluded"],
    )


def _column_doc(column: str) -> str:
    if column in RECORD_COLUMNS:
        return RECORD_COLUMNS[column]
    if column.startswith("residual_k"):
        return "H^s norm of u_c minus the series truncated at k"
    if column.startswith("energy_gap_k"):
        return "|e_c - e_inf - sum_{j<=k} a_j c^-2j|"
    if column.startswith("multiplier_gap_k"):
        return "|omega_c - omega_inf - sum_{j<=k} b_j c^-2j|"
    return column.replace("_", " ")


def save_report(report: SweepReport, directory: str | Path, plot: bool = False) -> list[Path]:
    """
    Write ``report.csv`` (records, columns described in ``#`` header lines),
    ``fits.csv`` and ``report.json``; with ``plot`` also one SVG per residual.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    records = report_frame(report)
    records_path = directory / "report.csv"
    with records_path.open("w", encoding="utf-8", newline="") as handle:
        kind, version = report.kind.value, report.code_version
        handle.write(f"# relhartree {kind} sweep, code version {version}\n")
        for column in records.columns:
            handle.write(f"# {column}: {_column_doc(column)}\n")
        records.to_csv(handle, index=False, float_format="%.17g")

    fits_path = directory / "fits.csv"
    fits_frame(report).to_csv(fits_path, index=False, float_format="%.17g")

    json_path = directory / "report.json"
    json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")

    written = [records_path, fits_path, json_path]
    if plot:
        from .plotting import plot_report

        written.extend(plot_report(report, directory))
    return written


def load_report(path: str | Path) -> SweepReport:
    path = Path(path)
    try:
        return SweepReport.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ProfileFormatError(path, "no such file") from exc
    except ValidationError as exc:
        raise ProfileFormatError(path, str(exc)) from exc


def read_report_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
