# config.py
from __future__ import annotations

from dataclasses import dataclass, field

from errors import InvalidConfig

SCHEMA_VERSION = 1

# ----------------- GRID -----------------

DEFAULT_GRID = 200
MIN_GRID = 16                 # integrator refuses coarser grids
DEFAULT_JET_ORDER = 1
MAX_JET_ORDER = 4             # sampled curves cannot go beyond this

# ----------------- LIE GROUP NUMERICS -----------------

ANGLE_CUT_MARGIN = 1e-8       # log refuses angles >= pi - margin
ROTATION_TOL = 1e-8           # orthogonality accepted on path construction
PROJECTION_INTERVAL = 64      # integrator re-projects onto O(n) this often

# ----------------- SHOOTING -----------------

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 50
JACOBIAN_STEP = 1e-6
MAX_HALVINGS = 20
SINGULAR_CONDITION = 1e12
DEFAULT_STARTS = 8
DEDUP_TOL = 1e-4              # sup-distance below which two paths are the same critical point
INTEGRATOR_SCHEMES = ("leapfrog", "midpoint", "rk4")
SCAN_ANGLES = 256            # theta(0) samples bracketing planar shooting roots
WINDING_PHASES = 4            # start angles per winding direction for planar descent

# ----------------- DIRECT MINIMIZER -----------------

DIRECT_TOL = 1e-9
DIRECT_MAX_ITER = 2000
ARMIJO_C = 1e-4
ARMIJO_MAX_HALVINGS = 40
STALL_RTOL = 1e-15            # accepted decrease this small relative to E is rounding

# ----------------- DISTANCE -----------------

AGREEMENT_RTOL = 1e-6
AGREEMENT_ATOL = 1e-12

KINETIC_FORMS = ("log", "chord")
QUADRATURES = ("trapezoid", "uniform")
COMPONENTS = ("so", "o")


def default_weights(k: int) -> tuple[float, ...]:
    """lambda = (1, 0, ..., 0) for a k-jet."""
    return (1.0,) + (0.0,) * (k - 1)


def parse_weights(text: str) -> tuple[float, ...]:
    """Parse a comma list like ``"1,0.5"`` into a weight tuple."""
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise InvalidConfig(f"cannot parse weights {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    k: int = DEFAULT_JET_ORDER
    weights: tuple[float, ...] = field(default=())
    grid: int = DEFAULT_GRID
    tol: float = DEFAULT_TOL
    starts: int = DEFAULT_STARTS
    component: str = "so"
    seed: int = 0
    scheme: str = "leapfrog"
    kinetic: str = "log"
    quadrature: str = "trapezoid"
    max_iter: int = DEFAULT_MAX_ITER
    direct_tol: float = DIRECT_TOL
    direct_max_iter: int = DIRECT_MAX_ITER
    scan: int = SCAN_ANGLES
    workers: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= MAX_JET_ORDER:
            raise InvalidConfig(f"jet order k must be in [1, {MAX_JET_ORDER}], got {self.k}")
        if not self.weights:
            object.__setattr__(self, "weights", default_weights(self.k))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != self.k:
            raise InvalidConfig(f"{len(self.weights)} weights given for jet order {self.k}")
        if not self.weights[0] > 0:
            raise InvalidConfig(
                f"lambda_1 must be positive (got {self.weights[0]}); "
                "without it the distance is not definite"
            )
        if any(w < 0 for w in self.weights[1:]):
            raise InvalidConfig(f"higher-order weights must be non-negative, got {self.weights}")
        if self.grid < MIN_GRID:
            raise InvalidConfig(f"grid N must be at least {MIN_GRID}, got {self.grid}")
        if not self.tol > 0 or not self.direct_tol > 0:
            raise InvalidConfig("tolerances must be positive")
        if self.starts < 1:
            raise InvalidConfig("at least one shooting start is required")
        if self.component not in COMPONENTS:
            raise InvalidConfig(f"component must be one of {COMPONENTS}, got {self.component!r}")
        if self.scheme not in INTEGRATOR_SCHEMES:
            raise InvalidConfig(f"scheme must be one of {INTEGRATOR_SCHEMES}, got {self.scheme!r}")
        if self.kinetic not in KINETIC_FORMS:
            raise InvalidConfig(f"kinetic must be one of {KINETIC_FORMS}, got {self.kinetic!r}")
        if self.quadrature not in QUADRATURES:
            raise InvalidConfig(f"quadrature must be one of {QUADRATURES}, got {self.quadrature!r}")
        if self.max_iter < 1 or self.direct_max_iter < 0:
            raise InvalidConfig("iteration caps must be positive")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")
        if self.scan < 0:
            raise InvalidConfig(f"scan must be >= 0, got {self.scan}")

    @property
    def include_reflections(self) -> bool:
        return self.component == "o"

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "weights": list(self.weights),
            "grid": self.grid,
            "tol": self.tol,
            "starts": self.starts,
            "component": self.component,
            "seed": self.seed,
            "scheme": self.scheme,
            "kinetic": self.kinetic,
            "quadrature": self.quadrature,
            "scan": self.scan,
        }
