"""Setting and pair labels plus the record types shared across modules.

Settings are the ASCII strings ``A``, ``A'`` (port alpha) and ``B``, ``B'``
(port beta).  A two-point correlation is named by concatenating its settings
in canonical order, e.g. ``AB'`` or ``BB'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

SETTINGS = ("A", "A'", "B", "B'")
PORT_A = ("A", "A'")
PORT_B = ("B", "B'")

MEASURED_PAIRS = ("AB", "AB'", "A'B", "A'B'")
UNMEASURED_PAIRS = ("AA'", "BB'")
ALL_PAIRS = MEASURED_PAIRS + UNMEASURED_PAIRS

_ORDER = {s: i for i, s in enumerate(SETTINGS)}
_PRETTY = {"A": "A", "A'": "A′", "B": "B", "B'": "B′"}

CORRELATION_TOL = 1e-9


class UnmeasuredCorrelationError(LookupError):
    """A correlation needed by a computation is absent from the set."""


def check_setting(label: str) -> str:
    if label not in _ORDER:
        raise ValueError(f"unknown setting label {label!r}; expected one of {SETTINGS}")
    return label


def pair_label(x: str, y: str) -> str:
    """Canonical pair name for two settings, independent of argument order."""
    check_setting(x)
    check_setting(y)
    if x == y:
        raise ValueError(f"a pair needs two distinct settings, got {x!r} twice")
    first, second = sorted((x, y), key=_ORDER.__getitem__)
    return first + second


def split_pair(pair: str) -> tuple[str, str]:
    for x in SETTINGS:
        if pair.startswith(x):
            rest = pair[len(x):]
            if rest in _ORDER and pair_label(x, rest) == pair:
                return x, rest
    raise ValueError(f"unknown pair label {pair!r}; expected one of {ALL_PAIRS}")


def pretty_pair(pair: str) -> str:
    x, y = split_pair(pair)
    return f"⟨{_PRETTY[x]}{_PRETTY[y]}⟩"


def file_tag(pair: str) -> str:
    """Filesystem-safe pair name (``'`` becomes ``p``)."""
    return split_pair(pair)[0].replace("'", "p") + "_" + split_pair(pair)[1].replace("'", "p")


@dataclass(frozen=True)
class CorrelationSet:
    """Partial map from pair label to a correlation in [-1, 1].

    Absent labels are *unmeasured*, which is different from a zero
    correlation; asking for one raises :class:`UnmeasuredCorrelationError`.
    """

    values: Mapping[str, float]
    errors: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        vals = {}
        for pair, v in self.values.items():
            split_pair(pair)
            v = float(v)
            if not math.isfinite(v) or abs(v) > 1 + CORRELATION_TOL:
                raise ValueError(f"correlation {pair}={v!r} outside [-1, 1]")
            vals[pair] = v
        errs = {}
        for pair, e in self.errors.items():
            if pair not in vals:
                raise ValueError(f"standard error given for absent pair {pair!r}")
            errs[pair] = float(e)
        object.__setattr__(self, "values", MappingProxyType(_ordered(vals)))
        object.__setattr__(self, "errors", MappingProxyType(_ordered(errs)))

    def __getitem__(self, pair: str) -> float:
        try:
            return self.values[pair]
        except KeyError:
            split_pair(pair)
            raise UnmeasuredCorrelationError(f"correlation {pair} is not available") from None

    def __contains__(self, pair: str) -> bool:
        return pair in self.values

    def __len__(self):
        return len(self.values)

    def measured_vector(self) -> tuple[float, float, float, float]:
        """``(AB, AB', A'B, A'B')``; raises if any is missing."""
        return tuple(self[p] for p in MEASURED_PAIRS)

    @classmethod
    def from_measured(cls, values, errors=None) -> "CorrelationSet":
        values = list(values)
        if len(values) != 4:
            raise ValueError(f"expected 4 values (AB, AB', A'B, A'B'), got {len(values)}")
        errs = {} if errors is None else dict(zip(MEASURED_PAIRS, errors))
        return cls(dict(zip(MEASURED_PAIRS, values)), errs)

    def restrict(self, pairs) -> "CorrelationSet":
        keep = [p for p in pairs if p in self.values]
        return CorrelationSet({p: self.values[p] for p in keep},
                              {p: self.errors[p] for p in keep if p in self.errors})

    def to_dict(self) -> dict:
        return {"values": dict(self.values), "errors": dict(self.errors)}


def _ordered(d: dict) -> dict:
    return {p: d[p] for p in ALL_PAIRS if p in d}


@dataclass(frozen=True)
class ShotRecord:
    """One run: the active setting at each port and the two +/-1 readings."""

    run_index: int
    setting_a: str
    setting_b: str
    outcome_a: int
    outcome_b: int

    def __post_init__(self):
        if self.setting_a not in PORT_A:
            raise ValueError(f"setting_a must be one of {PORT_A}, got {self.setting_a!r}")
        if self.setting_b not in PORT_B:
            raise ValueError(f"setting_b must be one of {PORT_B}, got {self.setting_b!r}")
        for name in ("outcome_a", "outcome_b"):
            v = getattr(self, name)
            if isinstance(v, bool) or v not in (1, -1):
                raise ValueError(f"{name} must be +1 or -1, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "run_index", int(self.run_index))

    @property
    def pair(self) -> str:
        return pair_label(self.setting_a, self.setting_b)

    @property
    def product(self) -> int:
        return self.outcome_a * self.outcome_b
