"""Run configuration shared by the CLI subcommands."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import InvalidParameterError
from .grids import (
    DEFAULT_RADIAL_COUNT,
    DEFAULT_SIGMA_COUNT,
    DEFAULT_SIGMA_MAX,
    DEFAULT_SIGMA_MIN,
    make_quadrature_vector,
    make_radial_grid,
    make_sigma_grid,
)

REPORT_SCHEMA = "v1"


@dataclass
class RunConfig:
    """Grid and matching parameters for a pipeline run."""

    sigma_count: int = DEFAULT_SIGMA_COUNT
    radial_count: int = DEFAULT_RADIAL_COUNT
    sigma_min: float = DEFAULT_SIGMA_MIN
    sigma_max: float = DEFAULT_SIGMA_MAX
    tie_tol: float = 1e-4
    eq_tol: float = 1e-6
    decimation_factor: int = 1
    worker_count: int = 1
    output_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.decimation_factor < 1:
            raise InvalidParameterError("decimation factor must be >= 1")
        if self.worker_count < 1:
            raise InvalidParameterError("worker count must be >= 1")
        if self.tie_tol < 0 or self.eq_tol < 0:
            raise InvalidParameterError("tolerances must be non-negative")
        # grid construction validates the remaining fields
        self.sigma_grid()
        self.radial_grid()

    def sigma_grid(self):
        return make_sigma_grid(self.sigma_count, self.sigma_min, self.sigma_max)

    def radial_grid(self):
        return make_radial_grid(self.radial_count)

    def quadrature(self):
        return make_quadrature_vector(self.radial_grid())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["output_dir"] = str(self.output_dir)
        return d
