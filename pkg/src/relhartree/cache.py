"""Content-addressed cache of limit ground states."""

import hashlib
import json
from pathlib import Path

from .config import CODE_VERSION
from .errors import InvalidParameterError, ProfileFormatError, ProfileIntegrityError
from .ground_state import GroundStateResult, solve
from .logger import logger
from .models import GridSpec, PhysicalParams, ProblemKind, SolverOptions
from .persistence import ProfileRecord, load_profile, save_profile
from .radial_core import RadialGrid


class GroundStateCache:
    """
    Stores solved c = INFINITY ground states as profile files named by the
    hash of everything that determines them.

    Example:
        cache = GroundStateCache(settings.cache_dir)
        base = cache.get_or_solve(ProblemKind.ENERGY, PhysicalParams(), grid)
    """

    def __init__(self, directory: str | Path, code_version: str = CODE_VERSION) -> None:
        self.directory = Path(directory)
        self.code_version = code_version

    def key(
        self,
        kind: ProblemKind,
        params: PhysicalParams,
        grid: RadialGrid,
        options: SolverOptions,
    ) -> str:
        payload = {
            "kind": kind.value,
            "params": params.model_dump(mode="json"),
            "grid": GridSpec.of(grid).model_dump(mode="json"),
            "options": options.model_dump(mode="json"),
            "code_version": self.code_version,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.profile"

    def get_or_solve(
        self,
        kind: ProblemKind,
        params: PhysicalParams,
        grid: RadialGrid,
        options: SolverOptions | None = None,
    ) -> GroundStateResult:
        """
        Return the cached ground state, solving and storing it on a miss.

        A corrupted entry is logged and recomputed.

        Raises:
            InvalidParameterError: params is not at c = INFINITY
        """
        if params.is_relativistic:
            raise InvalidParameterError("Only limit ground states are cached", "c")
        options = options or SolverOptions()
        key = self.key(kind, params, grid, options)
        path = self.path_for(key)

        if path.exists():
            try:
                record = load_profile(path, grid)
            except (ProfileFormatError, ProfileIntegrityError) as exc:
                logger.warning(
                    "Discarding unreadable cache entry",
                    extra={"context": {"path": str(path), "error_code": exc.error_code}},
                )
            else:
                logger.info("Ground-state cache hit", extra={"context": {"key": key}})
                return record.to_result()

        logger.info("Ground-state cache miss", extra={"context": {"key": key}})
        result = solve(kind, params, grid, options)
        save_profile(ProfileRecord.from_result(result), path)
        return result
