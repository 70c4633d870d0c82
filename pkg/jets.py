# jets.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from config import MAX_JET_ORDER, default_weights
from curves import Curve
from errors import DimensionMismatch, GridTooCoarse, InvalidConfig, UnsupportedOrder

logger = logging.getLogger("curvedist.jets")


# ------- weights / jet-space geometry -------

def validate_weights(weights: Optional[Sequence[float]], k: int) -> np.ndarray:
    """Weight vector lambda for a k-jet: lambda_1 > 0, the rest >= 0."""
    w = np.asarray(default_weights(k) if weights is None else weights, dtype=float).reshape(-1)
    if w.size != k:
        raise InvalidConfig(f"{w.size} weights given for jet order {k}")
    if not w[0] > 0:
        raise InvalidConfig(f"lambda_1 must be positive, got {w[0]}")
    if np.any(w[1:] < 0):
        raise InvalidConfig(f"higher-order weights must be non-negative, got {w.tolist()}")
    return w


def _check_jets(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionMismatch(f"jet shapes differ: {A.shape} vs {B.shape}")
    if A.shape[-1] != weights.shape[-1]:
        raise DimensionMismatch(f"jets have {A.shape[-1]} columns but {weights.shape[-1]} weights")


def inner_L(A, B, weights):
    """sum_i lambda_i <a_i, b_i> = tr(L A^T B), batched over leading axes."""
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    weights = np.asarray(weights, dtype=float)
    _check_jets(A, B, weights)
    val = np.einsum("...ik,...ik,k->...", A, B, weights)
    return float(val) if np.ndim(val) == 0 else val


def norm_L(A, weights):
    return np.sqrt(inner_L(A, A, weights))


def flat(A, weights) -> np.ndarray:
    """A L: column i scaled by lambda_i."""
    A = np.asarray(A, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if A.shape[-1] != weights.shape[-1]:
        raise DimensionMismatch(f"jets have {A.shape[-1]} columns but {weights.shape[-1]} weights")
    return A * weights


# ------- finite differences -------

@lru_cache(maxsize=None)
def _stencil_weights(order: int, offsets: tuple[int, ...]) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) / h^order ~ f^(order)(x)."""
    o = np.asarray(offsets, dtype=float)
    V = np.vander(o, increasing=True).T
    rhs = np.zeros(len(o))
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs)


def _stencil(m: int, N: int, order: int) -> tuple[int, ...]:
    """Second-order stencil for node m: central when it fits, else shifted to the grid."""
    half = (order + 1) // 2
    if half <= m <= N - half:
        return tuple(range(-half, half + 1))
    width = order + 2
    start = max(-m, min(0, N - m - width + 1))
    return tuple(range(start, start + width))


def finite_difference_jets(values: np.ndarray, k: int) -> np.ndarray:
    """Derivatives 1..k of grid samples on [0, 1], shape (N+1, n, k)."""
    values = np.asarray(values, dtype=float)
    N = values.shape[0] - 1
    h = 1.0 / N
    out = np.empty(values.shape + (k,))
    for d in range(1, k + 1):
        for m in range(N + 1):
            offs = _stencil(m, N, d)
            w = _stencil_weights(d, offs)
            idx = m + np.asarray(offs)
            out[m, :, d - 1] = w @ values[idx] / h ** d
    return out


def _interp_nodes(values: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of node data (N+1, ...) at parameters s."""
    N = values.shape[0] - 1
    pos = np.clip(np.asarray(s, dtype=float), 0.0, 1.0) * N
    lo = np.minimum(np.floor(pos).astype(int), N - 1)
    t = (pos - lo).reshape((-1,) + (1,) * (values.ndim - 1))
    return (1.0 - t) * values[lo] + t * values[lo + 1]


# ------- jet fields -------

@dataclass(frozen=True, eq=False)
class JetField:
    """Per-node (1,k)-jets A_m of a curve on s_m = m / N."""

    values: np.ndarray            # (N+1, n, k)
    weights: np.ndarray           # (k,)
    curve: Optional[Curve] = None

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def k(self) -> int:
        return self.values.shape[2]

    @property
    def ds(self) -> float:
        return 1.0 / self.N

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    def at(self, s: float) -> np.ndarray:
        """Jet at an arbitrary parameter: exact for analytic curves, linear between nodes otherwise."""
        if self.curve is not None and not self.curve.is_sampled:
            return self.curve.derivatives([s], self.k)[0]
        return _interp_nodes(self.values, [s])[0]

    def check_compatible(self, other: "JetField") -> None:
        if self.values.shape != other.values.shape:
            raise DimensionMismatch(f"jet fields differ in (N+1, n, k): {self.values.shape} vs {other.values.shape}")
        if not np.array_equal(self.weights, other.weights):
            raise DimensionMismatch("jet fields carry different weights")


def jet_field(c: Curve, k: int, N: int, weights: Optional[Sequence[float]] = None) -> JetField:
    """(1,k)-jets of c on the uniform grid with N intervals."""
    if k < 1:
        raise UnsupportedOrder(f"jet order must be >= 1, got {k}")
    w = validate_weights(weights, k)
    if N < 1:
        raise GridTooCoarse(f"grid needs at least one interval, got N = {N}")
    grid = np.linspace(0.0, 1.0, N + 1)
    if not c.is_sampled:
        return JetField(c.derivatives(grid, k), w, c)

    if k > MAX_JET_ORDER:
        raise UnsupportedOrder(f"sampled curves support jets up to order {MAX_JET_ORDER}, got {k}")
    samples = c.num_intervals
    if samples < k + 1:
        raise GridTooCoarse(f"{samples + 1} samples cannot carry order-{k} jets (need {k + 2})")
    jets = finite_difference_jets(c.values, k)
    if samples != N:
        logger.debug("interpolating sampled jets from N=%d onto N=%d", samples, N)
        jets = _interp_nodes(jets, grid)
    return JetField(jets, w, c)
