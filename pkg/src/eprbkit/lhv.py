"""Local hidden-variable models: a weighted lambda domain plus four +/-1
response functions, one per polarizer setting.

Every model is evaluated on a fixed grid of lambda points (the points of a
finite domain, or the midpoints of a composite midpoint rule on an interval),
so correlations are exact weighted sums over that grid and sampling draws grid
points by inverse CDF.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .labels import (
    ALL_PAIRS,
    PORT_A,
    PORT_B,
    SETTINGS,
    CorrelationSet,
    ShotRecord,
    check_setting,
    pair_label,
    split_pair,
)

NORMALIZATION_TOL = 1e-9
DEFAULT_QUADRATURE_POINTS = 4096


class FiniteDomain:
    """Finitely many lambda points with explicit probabilities.

    ``points`` may be numbers (needed by :class:`SignCosine` responses) or
    arbitrary labels; they default to ``0, 1, ..., n-1``.
    """

    kind = "finite"

    def __init__(self, weights: Sequence[float], points: Sequence | None = None):
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("finite domain needs at least one point")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("domain weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"domain weights sum to {w.sum()!r}, not 1")
        self.labels = list(range(w.size)) if points is None else list(points)
        if len(self.labels) != w.size:
            raise ValueError("points and weights differ in length")
        try:
            grid = np.asarray(self.labels, dtype=float)
        except (TypeError, ValueError):
            grid = None
        self.grid = grid
        self.weights = w / w.sum()
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.weights.size

    def bin_index(self, n_bins: int) -> np.ndarray:
        if n_bins != self.size:
            raise ValueError(f"lookup table has {n_bins} entries for a {self.size}-point domain")
        return np.arange(self.size)

    def to_dict(self) -> dict:
        return {"kind": "finite", "points": list(self.labels), "weights": self.weights.tolist()}


class IntervalDomain:
    """Interval ``[lo, hi)`` with a density, discretized by the midpoint rule.

    ``weight_fn`` must be a probability density on the interval unless
    ``normalize`` is set, in which case any nonnegative function is rescaled by
    its quadrature total.
    """

    kind = "interval"

    def __init__(self, lo: float, hi: float, weight_fn: Callable | None = None,
                 quadrature_points: int = DEFAULT_QUADRATURE_POINTS, normalize: bool = False,
                 _spec: dict | None = None):
        lo, hi = float(lo), float(hi)
        if not hi > lo:
            raise ValueError(f"empty interval [{lo}, {hi})")
        n = int(quadrature_points)
        if n < 1:
            raise ValueError("quadrature_points must be positive")
        self.lo, self.hi, self.quadrature_points = lo, hi, n
        h = (hi - lo) / n
        self.grid = lo + h * (np.arange(n) + 0.5)
        if weight_fn is None:
            dens = np.full(n, 1.0 / (hi - lo))
            _spec = _spec or {"kind": "uniform"}
        else:
            dens = np.asarray(weight_fn(self.grid), dtype=float) * np.ones(n)
        if np.any(dens < 0) or not np.all(np.isfinite(dens)):
            raise ValueError("weight function must be finite and nonnegative")
        w = dens * h
        total = w.sum()
        if normalize:
            if total <= 0:
                raise ValueError("weight function integrates to zero")
        elif abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"weight function integrates to {total!r}, not 1")
        self.weights = w / total
        self.weights.setflags(write=False)
        self.grid.setflags(write=False)
        self._spec = _spec

    @classmethod
    def piecewise(cls, lo, hi, values, quadrature_points=DEFAULT_QUADRATURE_POINTS):
        """Histogram density: ``values`` are relative weights on equal sub-intervals."""
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("piecewise weights must be a nonempty list")
        k = vals.size
        lo_, span = float(lo), float(hi) - float(lo)

        def fn(x):
            idx = np.minimum((k * (x - lo_) / span).astype(int), k - 1)
            return vals[idx]

        return cls(lo, hi, fn, quadrature_points, normalize=True,
                   _spec={"kind": "piecewise", "values": vals.tolist()})

    @property
    def size(self) -> int:
        return self.quadrature_points

    def bin_index(self, n_bins: int) -> np.ndarray:
        idx = (n_bins * (self.grid - self.lo) / (self.hi - self.lo)).astype(int)
        return np.minimum(idx, n_bins - 1)

    def to_dict(self) -> dict:
        if self._spec is None:
            raise ValueError("interval domain with a custom weight function is not serializable")
        return {"kind": "interval", "lo": self.lo, "hi": self.hi,
                "quadrature_points": self.quadrature_points, "weight": dict(self._spec)}


@dataclass(frozen=True)
class SignCosine:
    """Response ``sign(cos(lambda - offset))`` with ``sign(0) = +1``."""

    offset: float

    def values(self, domain) -> np.ndarray:
        if domain.grid is None:
            raise ValueError("sign_cos responses need numeric lambda points")
        return np.where(np.cos(domain.grid - self.offset) >= 0, 1, -1)

    def to_dict(self):
        return {"family": "sign_cos", "offset": self.offset}


@dataclass(frozen=True)
class LookupTable:
    """One +/-1 value per finite point, or per equal bin of an interval."""

    table: tuple

    def values(self, domain) -> np.ndarray:
        table = np.asarray(self.table)
        return table[domain.bin_index(table.size)]

    def to_dict(self):
        return {"family": "table", "values": [int(v) for v in self.table]}


@dataclass(frozen=True)
class Constant:
    value: int

    def values(self, domain) -> np.ndarray:
        return np.full(domain.size, self.value)

    def to_dict(self):
        return {"family": "constant", "value": int(self.value)}


class LhvModel:
    """A lambda domain with responses for all four settings."""

    def __init__(self, domain, responses: Mapping[str, object]):
        missing = [s for s in SETTINGS if s not in responses]
        if missing:
            raise ValueError(f"model lacks responses for {missing}")
        extra = [s for s in responses if s not in SETTINGS]
        if extra:
            raise ValueError(f"unknown setting labels {extra}")
        self.domain = domain
        self.responses = {s: responses[s] for s in SETTINGS}
        table = np.empty((4, domain.size), dtype=np.int8)
        for i, s in enumerate(SETTINGS):
            vals = np.asarray(self.responses[s].values(domain))
            if vals.shape != (domain.size,) or not np.all((vals == 1) | (vals == -1)):
                raise ValueError(f"response {s} is not +/-1 valued on every domain point")
            table[i] = vals
        table.setflags(write=False)
        self._table = table
        self._cdf = np.cumsum(domain.weights)

    def response_values(self, setting: str) -> np.ndarray:
        return self._table[SETTINGS.index(check_setting(setting))]

    def correlations(self) -> CorrelationSet:
        """All six correlations, including the never co-measured AA' and BB'."""
        return CorrelationSet({p: lhv_correlation(self, *split_pair(p)) for p in ALL_PAIRS})

    def draw_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = np.searchsorted(self._cdf, rng.random(n) * self._cdf[-1], side="right")
        return np.minimum(idx, self.domain.size - 1)

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(),
                "responses": {s: r.to_dict() for s, r in self.responses.items()}}


def lhv_correlation(model: LhvModel, x: str, y: str) -> float:
    """``sum_lambda rho(lambda) X(lambda) Y(lambda)`` over the model grid."""
    pair_label(x, y)
    prod = model.response_values(x) * model.response_values(y)
    return float(np.dot(model.domain.weights, prod))


def sample_outcomes(model: LhvModel, xa: str, yb: str, n: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` lambdas and return the readings at both ports as int8 arrays."""
    if xa not in PORT_A:
        raise ValueError(f"port-alpha setting must be one of {PORT_A}, got {xa!r}")
    if yb not in PORT_B:
        raise ValueError(f"port-beta setting must be one of {PORT_B}, got {yb!r}")
    idx = model.draw_indices(n, rng)
    return model.response_values(xa)[idx], model.response_values(yb)[idx]


def sample_shot(model: LhvModel, xa: str, yb: str, rng: np.random.Generator,
                run_index: int = 0) -> ShotRecord:
    a, b = sample_outcomes(model, xa, yb, 1, rng)
    return ShotRecord(run_index, xa, yb, int(a[0]), int(b[0]))


def strategy_assignments() -> list[tuple[int, int, int, int]]:
    """All 16 value assignments to ``(A, A', B, B')``."""
    return list(itertools.product((1, -1), repeat=4))


def deterministic_strategies() -> list[CorrelationSet]:
    out = []
    for assignment in strategy_assignments():
        value = dict(zip(SETTINGS, assignment))
        out.append(CorrelationSet({p: value[split_pair(p)[0]] * value[split_pair(p)[1]]
                                   for p in ALL_PAIRS}))
    return out


def deterministic_model(assignment: Sequence[int]) -> LhvModel:
    """Single-point model that always returns the given ``(A, A', B, B')``."""
    return LhvModel(FiniteDomain([1.0]),
                    {s: Constant(int(v)) for s, v in zip(SETTINGS, assignment)})


def mixture(models: Sequence[LhvModel], weights: Sequence[float]) -> LhvModel:
    """Convex combination of models as one finite-domain model."""
    w = np.asarray(weights, dtype=float)
    if len(models) != w.size or w.size == 0:
        raise ValueError("need one weight per model")
    if np.any(w < 0) or abs(w.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    all_w = np.concatenate([wk * m.domain.weights for wk, m in zip(w, models)])
    responses = {}
    for s in SETTINGS:
        responses[s] = LookupTable(tuple(int(v) for v in
                                         np.concatenate([m.response_values(s) for m in models])))
    return LhvModel(FiniteDomain(all_w / all_w.sum()), responses)


def _response_from_dict(d: dict):
    family = d.get("family")
    if family == "sign_cos":
        return SignCosine(float(d["offset"]))
    if family == "table":
        return LookupTable(tuple(int(v) for v in d["values"]))
    if family == "constant":
        return Constant(int(d["value"]))
    raise ValueError(f"unknown response family {family!r}")


def model_from_dict(d: dict) -> LhvModel:
    dom = d["domain"]
    kind = dom.get("kind")
    if kind == "finite":
        domain = FiniteDomain(dom["weights"], dom.get("points"))
    elif kind == "interval":
        weight = dom.get("weight", {"kind": "uniform"})
        n = int(dom.get("quadrature_points", DEFAULT_QUADRATURE_POINTS))
        if weight.get("kind") == "uniform":
            domain = IntervalDomain(dom["lo"], dom["hi"], quadrature_points=n)
        elif weight.get("kind") == "piecewise":
            domain = IntervalDomain.piecewise(dom["lo"], dom["hi"], weight["values"], n)
        else:
            raise ValueError(f"unknown weight kind {weight.get('kind')!r}")
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    return LhvModel(domain, {s: _response_from_dict(r) for s, r in d["responses"].items()})


def load_model(path) -> LhvModel:
    with open(Path(path)) as f:
        return model_from_dict(json.load(f))


def random_model(rng: np.random.Generator, kind: str | None = None) -> LhvModel:
    """Random serializable model, for property tests and demos.

    ``kind`` is one of ``sign_cos``, ``table``, ``interval_table`` or
    ``mixture``; picked at random when omitted.
    """
    kinds = ("sign_cos", "table", "interval_table", "mixture")
    kind = kinds[rng.integers(len(kinds))] if kind is None else kind
    two_pi = 2 * np.pi
    if kind == "sign_cos":
        n = int(rng.choice([256, 1024, 4096]))
        if rng.random() < 0.5:
            domain = IntervalDomain(0.0, two_pi, quadrature_points=n)
        else:
            domain = IntervalDomain.piecewise(0.0, two_pi, rng.random(int(rng.integers(1, 9))), n)
        return LhvModel(domain, {s: SignCosine(float(rng.uniform(0, two_pi))) for s in SETTINGS})
    if kind == "table":
        k = int(rng.integers(1, 13))
        domain = FiniteDomain(rng.dirichlet(np.ones(k)))
        return LhvModel(domain, {s: LookupTable(tuple(int(v) for v in rng.choice([-1, 1], k)))
                                 for s in SETTINGS})
    if kind == "interval_table":
        domain = IntervalDomain.piecewise(-1.0, 1.0, rng.random(int(rng.integers(1, 6))), 512)
        return LhvModel(domain, {s: LookupTable(tuple(int(v) for v in
                                                      rng.choice([-1, 1], int(rng.integers(1, 9)))))
                                 for s in SETTINGS})
    if kind == "mixture":
        parts = [random_model(rng, kinds[rng.integers(3)]) for _ in range(int(rng.integers(2, 4)))]
        return mixture(parts, rng.dirichlet(np.ones(len(parts))))
    raise ValueError(f"unknown model kind {kind!r}")
