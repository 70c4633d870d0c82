# curves.py
"""Curve generators, the rigid-motion action, and curve file I/O.

Curves live on the normalized parameter interval [0, 1].  Analytic curves are
a generator name plus JSON-friendly parameters and evaluate exact derivatives;
sampled curves carry values on a uniform grid (their jets come from
``jets.jet_field``).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from numpy.polynomial import hermite_e

from errors import (
    CurveDistanceError,
    DimensionMismatch,
    MalformedFile,
    NonMonotoneProfile,
    NonUniformGrid,
    NotARotation,
    UnsupportedOrder,
    UnsupportedProfile,
)
from liegroup import is_rotation

logger = logging.getLogger("curvedist.curves")

TWO_PI = 2.0 * np.pi
MAX_ANALYTIC_ORDER = 4
GRID_RTOL = 1e-9             # relative spacing tolerance for "uniform"
CSV_FLOAT_FORMAT = "%.17g"


# ------- rigid transforms -------

@dataclass(frozen=True, eq=False)
class RigidTransform:
    g: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] != x.shape[0]:
            raise DimensionMismatch(f"rigid transform needs n x n rotation and n-vector, got {g.shape}, {x.shape}")
        if not is_rotation(g, 1e-10):
            raise NotARotation("rigid transform rotation part is not orthogonal")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @classmethod
    def identity(cls, n: int) -> "RigidTransform":
        return cls(np.eye(n), np.zeros(n))

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """self after inner: p -> g (g_i p + x_i) + x."""
        if inner.n != self.n:
            raise DimensionMismatch(f"cannot compose transforms of dimension {self.n} and {inner.n}")
        return RigidTransform(self.g @ inner.g, self.g @ inner.x + self.x)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.g.T + self.x

    def to_dict(self) -> dict:
        return {"g": self.g.tolist(), "x": self.x.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RigidTransform":
        return cls(np.array(d["g"], dtype=float), np.array(d["x"], dtype=float))


# ------- profiles -------

def _profile_derivatives(profile: dict, s: np.ndarray, order: int) -> np.ndarray:
    """Rows f(s), f'(s), ..., f^(order)(s) of a scalar profile, shape (order + 1, len(s))."""
    name = profile.get("name")
    out = np.zeros((order + 1, s.size))
    if name == "linear":
        v = float(profile["v"])
        out[0] = v * s
        if order >= 1:
            out[1] = v
    elif name == "polynomial":
        p = Polynomial(np.asarray(profile.get("coeffs", [0.0]), dtype=float))
        for j in range(order + 1):
            out[j] = p.deriv(j)(s) if j else p(s)
    elif name == "sinusoidal":
        v, eps = float(profile["v"]), float(profile["eps"])
        for j in range(order + 1):
            out[j] = eps * TWO_PI ** j * np.sin(TWO_PI * s + j * np.pi / 2)
        out[0] += v * s
        if order >= 1:
            out[1] += v
    elif name == "gaussian":
        amp, mu, w = float(profile["amplitude"]), float(profile["center"]), float(profile["width"])
        u = (s - mu) / w
        bump = np.exp(-0.5 * u * u)
        for j in range(order + 1):
            coeffs = np.zeros(j + 1)
            coeffs[j] = 1.0
            out[j] = amp * (-1) ** j * hermite_e.hermeval(u, coeffs) * bump / w ** j
    else:
        raise UnsupportedProfile(f"unknown profile {name!r}")
    return out


def _min_speed(profile: dict) -> float:
    """Minimum of f' over [0, 1]."""
    name = profile.get("name")
    if name == "linear":
        return float(profile["v"])
    if name == "sinusoidal":
        return float(profile["v"]) - TWO_PI * abs(float(profile["eps"]))
    if name == "polynomial":
        df = Polynomial(np.asarray(profile.get("coeffs", [0.0]), dtype=float)).deriv()
        candidates = [0.0, 1.0]
        if df.degree() >= 2:
            roots = df.deriv().roots()
            candidates += [r.real for r in roots if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0]
        return float(min(df(c) for c in candidates))
    raise UnsupportedProfile(f"unknown speed profile {name!r}")


# ------- generators -------
# each returns derivatives 0..order as an array (len(s), n_base, order + 1)

def _line_jets(params: dict, s: np.ndarray, order: int) -> np.ndarray:
    a = np.asarray(params["a"], dtype=float)
    b = np.asarray(params["b"], dtype=float)
    f = _profile_derivatives(params["profile"], s, order)
    out = a[None, :, None] * f.T[:, None, :]
    out[:, :, 0] += b
    return out


def _circle_jets(params: dict, s: np.ndarray, order: int) -> np.ndarray:
    r = float(params["r"])
    out = np.zeros((s.size, 2, order + 1))
    for j in range(order + 1):
        phase = TWO_PI * s + j * np.pi / 2
        out[:, 0, j] = r * TWO_PI ** j * np.cos(phase)
        out[:, 1, j] = r * TWO_PI ** j * np.sin(phase)
    return out


def _graph_jets(params: dict, s: np.ndarray, order: int) -> np.ndarray:
    h = _profile_derivatives(params["profile"], s, order)
    out = np.zeros((s.size, 2, order + 1))
    out[:, 0, 0] = s
    if order >= 1:
        out[:, 0, 1] = 1.0
    out[:, 1, :] = h.T
    return out


def _helix_jets(params: dict, s: np.ndarray, order: int) -> np.ndarray:
    r, pitch, turns = float(params["r"]), float(params["pitch"]), float(params["turns"])
    w = TWO_PI * turns
    out = np.zeros((s.size, 3, order + 1))
    for j in range(order + 1):
        phase = w * s + j * np.pi / 2
        out[:, 0, j] = r * w ** j * np.cos(phase)
        out[:, 1, j] = r * w ** j * np.sin(phase)
    out[:, 2, 0] = pitch * s
    if order >= 1:
        out[:, 2, 1] = pitch
    return out


GENERATORS: dict[str, tuple[Callable[[dict, np.ndarray, int], np.ndarray], Callable[[dict], int]]] = {
    "line": (_line_jets, lambda p: len(p["a"])),
    "circle": (_circle_jets, lambda p: 2),
    "graph": (_graph_jets, lambda p: 2),
    "helix": (_helix_jets, lambda p: 3),
}


# ------- curve -------

@dataclass(frozen=True, eq=False)
class Curve:
    kind: str
    n: int
    params: dict = field(default_factory=dict)
    values: Optional[np.ndarray] = None
    domain: tuple[float, float] = (0.0, 1.0)
    transform: Optional[RigidTransform] = None

    @property
    def is_sampled(self) -> bool:
        return self.kind == "sampled"

    @property
    def num_intervals(self) -> int:
        if not self.is_sampled:
            raise UnsupportedOrder("analytic curves have no intrinsic grid")
        return self.values.shape[0] - 1

    def _base_jets(self, s: np.ndarray, order: int) -> np.ndarray:
        jets_fn, base_dim = GENERATORS[self.kind]
        base = jets_fn(self.params, s, order)
        if self.n > base_dim(self.params):
            pad = np.zeros((s.size, self.n - base.shape[1], order + 1))
            base = np.concatenate([base, pad], axis=1)
        return base

    def evaluate(self, s) -> np.ndarray:
        """Positions at parameters s, shape (len(s), n)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.is_sampled:
            grid = np.linspace(0.0, 1.0, self.values.shape[0])
            return np.stack([np.interp(s, grid, self.values[:, i]) for i in range(self.n)], axis=1)
        pos = self._base_jets(s, 0)[:, :, 0]
        if self.transform is not None:
            pos = self.transform.apply_points(pos)
        return pos

    def derivatives(self, s, k: int) -> np.ndarray:
        """Exact jets (c', ..., c^(k)) at s, shape (len(s), n, k)."""
        if self.is_sampled:
            raise UnsupportedOrder("sampled curves are differentiated through jets.jet_field")
        if not 1 <= k <= MAX_ANALYTIC_ORDER:
            raise UnsupportedOrder(f"analytic jets are available for 1 <= k <= {MAX_ANALYTIC_ORDER}, got {k}")
        s = np.atleast_1d(np.asarray(s, dtype=float))
        jets = self._base_jets(s, k)[:, :, 1:]
        if self.transform is not None:
            jets = np.einsum("ij,mjk->mik", self.transform.g, jets)
        return jets


# ------- constructors -------

def make_line(a, b, profile: Optional[dict] = None) -> Curve:
    """c(s) = f(s) a + b for a strictly increasing speed profile f."""
    profile = dict(profile or {"name": "linear", "v": 1.0})
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatch(f"line direction and offset differ in dimension: {a.shape} vs {b.shape}")
    if _min_speed(profile) <= 0:
        raise NonMonotoneProfile(f"speed profile {profile} is not strictly increasing on [0, 1]")
    return Curve("line", a.size, {"a": a.tolist(), "b": b.tolist(), "profile": profile})


def make_circle(r: float, n: int = 2) -> Curve:
    if not r > 0:
        raise UnsupportedProfile(f"circle radius must be positive, got {r}")
    if n < 2:
        raise DimensionMismatch("a circle needs n >= 2")
    return Curve("circle", n, {"r": float(r)})


def make_graph(profile: Optional[dict] = None, n: int = 2) -> Curve:
    """c(s) = (s, h(s)) for a polynomial or Gaussian-bump height profile."""
    profile = dict(profile or {"name": "polynomial", "coeffs": [0.0]})
    if profile.get("name") not in ("polynomial", "gaussian"):
        raise UnsupportedProfile(f"graph profiles are 'polynomial' or 'gaussian', got {profile.get('name')!r}")
    if profile["name"] == "gaussian" and not float(profile.get("width", 0.0)) > 0:
        raise UnsupportedProfile("gaussian width must be positive")
    if n < 2:
        raise DimensionMismatch("a graph needs n >= 2")
    return Curve("graph", n, {"profile": profile})


def make_helix(r: float, pitch: float, turns: float = 1.0) -> Curve:
    if not r > 0:
        raise UnsupportedProfile(f"helix radius must be positive, got {r}")
    return Curve("helix", 3, {"r": float(r), "pitch": float(pitch), "turns": float(turns)})


def make_sampled(values, domain: tuple[float, float] = (0.0, 1.0)) -> Curve:
    values = np.array(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 2:
        raise MalformedFile(f"sampled curve needs an (N+1, n) array with N >= 1, got {values.shape}")
    return Curve("sampled", values.shape[1], values=values, domain=(float(domain[0]), float(domain[1])))


def sample_curve(c: Curve, N: int) -> Curve:
    """Sampled copy of c on the grid s_m = m / N."""
    return make_sampled(c.evaluate(np.linspace(0.0, 1.0, N + 1)))


def apply_rigid(t: RigidTransform, c: Curve) -> Curve:
    """The curve s -> g c(s) + x."""
    if t.n != c.n:
        raise DimensionMismatch(f"transform of dimension {t.n} applied to curve in R^{c.n}")
    if c.is_sampled:
        return make_sampled(t.apply_points(c.values), c.domain)
    composed = t if c.transform is None else t.compose(c.transform)
    return Curve(c.kind, c.n, c.params, domain=c.domain, transform=composed)


# ------- serialization -------

def curve_to_dict(c: Curve) -> dict:
    if c.is_sampled:
        return {"kind": "sampled", "n": c.n, "values": c.values.tolist(), "domain": list(c.domain)}
    d = {"kind": c.kind, "n": c.n, "params": c.params}
    if c.transform is not None:
        d["transform"] = c.transform.to_dict()
    return d


def curve_from_dict(d: dict) -> Curve:
    if not isinstance(d, dict) or "kind" not in d:
        raise MalformedFile("curve JSON needs a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "sampled":
            c = make_sampled(d["values"], tuple(d.get("domain", (0.0, 1.0))))
            if "n" in d and int(d["n"]) != c.n:
                raise DimensionMismatch(f"declared n = {d['n']} but rows have {c.n} entries")
            return c
        params = d.get("params", {})
        if kind == "line":
            c = make_line(params["a"], params["b"], params.get("profile"))
        elif kind == "circle":
            c = make_circle(params["r"], int(d.get("n", 2)))
        elif kind == "graph":
            c = make_graph(params.get("profile"), int(d.get("n", 2)))
        elif kind == "helix":
            c = make_helix(params["r"], params["pitch"], params.get("turns", 1.0))
        else:
            raise MalformedFile(f"unknown curve kind {kind!r}")
        if "transform" in d:
            c = apply_rigid(RigidTransform.from_dict(d["transform"]), c)
    except (KeyError, TypeError) as exc:
        raise MalformedFile(f"incomplete parameters for curve kind {kind!r}: {exc}") from exc
    except CurveDistanceError:
        raise
    except ValueError as exc:
        raise MalformedFile(f"bad values in curve JSON: {exc}") from exc
    return c


def _format_for(path: Path, fmt: Optional[str]) -> str:
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in ("csv", "json"):
        raise MalformedFile(f"unsupported curve format {fmt!r} (use csv or json)")
    return fmt


def save_curve(c: Curve, path, fmt: Optional[str] = None) -> None:
    path = Path(path)
    fmt = _format_for(path, fmt)
    if fmt == "json":
        path.write_text(json.dumps(curve_to_dict(c), indent=2, sort_keys=True))
        return
    if not c.is_sampled:
        raise MalformedFile("only sampled curves can be written as CSV; use sample_curve first")
    a, b = c.domain
    s = a + (b - a) * np.linspace(0.0, 1.0, c.values.shape[0])
    df = pd.DataFrame(c.values, columns=[f"x{i + 1}" for i in range(c.n)])
    df.insert(0, "s", s)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def _read_csv(path: Path) -> Curve:
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"cannot parse {path}: {exc}") from exc
    cols = [str(col).strip() for col in df.columns]
    n = len(cols) - 1
    if n < 1 or cols != ["s"] + [f"x{i + 1}" for i in range(n)]:
        raise MalformedFile(f"{path}: header must be s,x1,...,xn, got {','.join(cols)}")
    try:
        data = df.to_numpy(dtype=float)
    except ValueError as exc:
        raise MalformedFile(f"{path}: non-numeric entries") from exc
    if data.shape[0] < 2 or not np.all(np.isfinite(data)):
        raise MalformedFile(f"{path}: need at least two finite rows")
    s = data[:, 0]
    ds = np.diff(s)
    step = (s[-1] - s[0]) / (len(s) - 1)
    if step <= 0 or np.any(ds <= 0) or np.max(np.abs(ds - step)) > GRID_RTOL * abs(step):
        raise NonUniformGrid(f"{path}: rows must be sorted by s on a uniform grid")
    if (s[0], s[-1]) != (0.0, 1.0):
        logger.info("rescaling %s from [%g, %g] to [0, 1]", path, s[0], s[-1])
    return make_sampled(data[:, 1:], (float(s[0]), float(s[-1])))


def load_curve(path, fmt: Optional[str] = None) -> Curve:
    path = Path(path)
    fmt = _format_for(path, fmt)
    if not path.is_file():
        raise MalformedFile(f"no such curve file: {path}")
    if fmt == "csv":
        return _read_csv(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: invalid JSON ({exc})") from exc
    return curve_from_dict(d)


def parse_curve_spec(spec: str) -> Curve:
    """A curve from inline generator JSON or from a file path."""
    text = spec.strip()
    if text.startswith("{"):
        try:
            return curve_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MalformedFile(f"invalid inline curve JSON: {exc}") from exc
    return load_curve(text)
