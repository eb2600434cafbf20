"""Equal/unequal event probabilities, the three-correlation consistency
inequalities, their reduction to the eight CHSH facets, and membership in the
local polytope.

Inequalities are stored in the normal form ``sum_k c_k <pair_k> >= bound``
with integer coefficients over :data:`~eprbkit.labels.ALL_PAIRS`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .labels import (
    ALL_PAIRS,
    MEASURED_PAIRS,
    SETTINGS,
    CorrelationSet,
    ShotRecord,
    pretty_pair,
    split_pair,
)
from .lhv import strategy_assignments

PROB_TOL = 1e-12
CORRELATION_TOL = 1e-9
MEMBERSHIP_TOL = 1e-7

EQUAL, UNEQUAL = "=", "x"
COMBINATIONS = ((EQUAL, EQUAL), (EQUAL, UNEQUAL), (UNEQUAL, EQUAL), (UNEQUAL, UNEQUAL))
_SIGN = {EQUAL: 1, UNEQUAL: -1}

# (first pair, second pair, pair implied by their joint complement)
PAIRINGS = (
    ("AB", "AB'", "BB'"),
    ("A'B", "A'B'", "BB'"),
    ("AB", "A'B", "AA'"),
    ("AB'", "A'B'", "AA'"),
)


class ConsistencyError(RuntimeError):
    """The facet derivation or the membership cross-check disagreed with itself."""


# -- probabilities and correlations ---------------------------------------------------------

@dataclass(frozen=True)
class EqualityProbabilities:
    """Probabilities of equal and unequal readings for one pair of settings."""

    p_equal: float
    p_unequal: float

    def __post_init__(self):
        for name in ("p_equal", "p_unequal"):
            v = getattr(self, name)
            if not (-PROB_TOL <= v <= 1 + PROB_TOL):
                raise ValueError(f"{name}={v!r} is not a probability")
        if abs(self.p_equal + self.p_unequal - 1.0) > PROB_TOL:
            raise ValueError("p_equal + p_unequal must be 1")


def prob_from_correlation(e: float) -> EqualityProbabilities:
    e = float(e)
    if not abs(e) <= 1 + CORRELATION_TOL:
        raise ValueError(f"correlation {e!r} outside [-1, 1]")
    return EqualityProbabilities((1 + e) / 2, (1 - e) / 2)


def correlation_from_prob(p: EqualityProbabilities) -> float:
    return p.p_equal - p.p_unequal


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    n: int
    se: float


def standard_error(e: float, n: int) -> float:
    return math.sqrt(max(0.0, 1.0 - e * e) / n)


def estimate_from_products(products) -> CorrelationEstimate:
    products = np.asarray(products)
    n = products.size
    if n == 0:
        raise ValueError("cannot estimate a correlation from zero shots")
    e = float(np.mean(products, dtype=float))
    return CorrelationEstimate(e, n, standard_error(e, n))


def correlation_from_shots(records: Sequence[ShotRecord]) -> CorrelationEstimate:
    """Mean of ``a_i * b_i`` over runs taken at one setting pair."""
    records = list(records)
    if not records:
        raise ValueError("no shot records")
    pairs = {r.pair for r in records}
    if len(pairs) > 1:
        raise ValueError(f"records mix setting pairs {sorted(pairs)}")
    return estimate_from_products([r.product for r in records])


# -- inequalities -----------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyInequality:
    """``sum coeffs[k] * <ALL_PAIRS[k]> >= bound``.

    Base inequalities carry their ``pairing`` (1-4) and ``combination`` of
    equal/unequal events; CHSH facets carry the two base inequalities whose
    sum produced them in ``parents``.
    """

    coeffs: tuple[int, ...]
    bound: int
    pairing: int | None = field(default=None, compare=False)
    combination: tuple[str, str] | None = field(default=None, compare=False)
    parents: tuple | None = field(default=None, compare=False, repr=False)
    eliminated: str | None = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return "base" if self.pairing is not None else "chsh"

    @property
    def coefficients(self) -> dict[str, int]:
        return {p: c for p, c in zip(ALL_PAIRS, self.coeffs) if c}

    @property
    def combination_index(self) -> int | None:
        return None if self.combination is None else COMBINATIONS.index(self.combination) + 1

    @property
    def name(self) -> str:
        if self.kind == "base":
            return f"P{self.pairing}({','.join(self.combination)})"
        signs = ",".join("+" if c > 0 else "-" for c in self.coeffs[:4])
        return f"CHSH({signs})"

    def lhs_text(self, negate: bool = False) -> str:
        parts = []
        for pair, c in self.coefficients.items():
            c = -c if negate else c
            sign = "−" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append((sign, f"{mag}{pretty_pair(pair)}"))
        text = "".join(s + t for s, t in parts)
        return text[1:] if text.startswith("+") else text

    def text(self) -> str:
        return f"{self.lhs_text()} ≥ {_num(self.bound)}"

    def upper_text(self) -> str:
        """The equivalent ``... <= -bound`` form."""
        return f"{self.lhs_text(negate=True)} ≤ {_num(-self.bound)}"

    def value(self, c: CorrelationSet) -> float:
        total = 0.0
        for pair, coef in self.coefficients.items():
            total += coef * c[pair]
        return total

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "coefficients": self.coefficients,
               "bound": self.bound, "text": self.text()}
        if self.kind == "base":
            out["pairing"] = self.pairing
            out["combination"] = list(self.combination)
            out["combination_index"] = self.combination_index
        else:
            out["parents"] = [p.name for p in self.parents]
            out["eliminated"] = self.eliminated
            out["upper_form"] = self.upper_text()
        return out


def _num(x) -> str:
    return f"−{abs(x)}" if x < 0 else str(x)


def generate_consistency_inequalities() -> tuple[ConsistencyInequality, ...]:
    """The 16 inequalities ``s1<X> + s2<Y> + s1 s2 <Z> >= -1``.

    ``s = +1`` for the equal-readings event and ``-1`` for its complement, over
    the four pairings and four event combinations.
    """
    out = []
    index = {p: i for i, p in enumerate(ALL_PAIRS)}
    for k, (x, y, z) in enumerate(PAIRINGS, start=1):
        for combo in COMBINATIONS:
            s1, s2 = _SIGN[combo[0]], _SIGN[combo[1]]
            coeffs = [0] * len(ALL_PAIRS)
            coeffs[index[x]] = s1
            coeffs[index[y]] = s2
            coeffs[index[z]] = s1 * s2
            out.append(ConsistencyInequality(tuple(coeffs), -1, pairing=k, combination=combo))
    return tuple(out)


class BooleanCheck(NamedTuple):
    assignment: tuple[int, int, int, int]
    inequality: str
    subset_holds: bool
    probability_sum: int
    slack: int

    @property
    def passed(self) -> bool:
        return self.subset_holds and self.probability_sum >= 1 and self.slack >= 0


@dataclass(frozen=True)
class BooleanReport:
    checks: tuple[BooleanCheck, ...]

    @property
    def n_checks(self) -> int:
        return len(self.checks)

    @property
    def failures(self) -> list[BooleanCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def subset_failures(self) -> list[BooleanCheck]:
        return [c for c in self.checks if not c.subset_holds]

    @property
    def passed(self) -> bool:
        return not self.failures

    def min_slack(self, assignment) -> int:
        return min(c.slack for c in self.checks if c.assignment == tuple(assignment))


def verify_boolean_derivation() -> BooleanReport:
    """Check every inequality on every deterministic assignment of (A, A', B, B').

    For a pairing (X, Y | Z) and event combination (s1, s2), the joint
    complement of the two chosen events must lie inside the event with sign
    ``s1 * s2`` on Z, and the three event probabilities (0 or 1 here) must sum
    to at least 1.
    """
    inequalities = generate_consistency_inequalities()
    plan = []
    for ineq in inequalities:
        x, y, z = PAIRINGS[ineq.pairing - 1]
        s1, s2 = _SIGN[ineq.combination[0]], _SIGN[ineq.combination[1]]
        plan.append((ineq.name, split_pair(x), split_pair(y), split_pair(z), s1, s2, s1 * s2))
    checks = []
    for assignment in strategy_assignments():
        v = dict(zip(SETTINGS, assignment))
        for name, (x1, x2), (y1, y2), (z1, z2), s1, s2, s3 in plan:
            # event with sign s occurs iff s * product == +1
            e1 = s1 * v[x1] * v[x2] == 1
            e2 = s2 * v[y1] * v[y2] == 1
            e3 = s3 * v[z1] * v[z2] == 1
            subset = e1 or e2 or e3
            psum = e1 + e2 + e3
            slack = (s1 * v[x1] * v[x2] + s2 * v[y1] * v[y2] + s3 * v[z1] * v[z2]) + 1
            checks.append(BooleanCheck(assignment, name, subset, psum, slack))
    return BooleanReport(tuple(checks))


def derive_chsh_facets(base: Iterable[ConsistencyInequality] | None = None
                       ) -> tuple[ConsistencyInequality, ...]:
    """Add pairs of base inequalities whose unmeasured terms cancel.

    Only sums with four unit coefficients on the measured pairs are kept; the
    first pair (in scan order) producing a facet is recorded as its parents.
    """
    base = tuple(generate_consistency_inequalities() if base is None else base)
    n_measured = len(MEASURED_PAIRS)
    facets: dict[tuple, ConsistencyInequality] = {}
    for i, first in enumerate(base):
        for second in base[i + 1:]:
            summed = tuple(a + b for a, b in zip(first.coeffs, second.coeffs))
            if any(summed[n_measured:]):
                continue
            if not all(abs(c) == 1 for c in summed[:n_measured]):
                continue
            eliminated = [p for p, a in zip(ALL_PAIRS, first.coeffs) if a and p not in MEASURED_PAIRS]
            facet = ConsistencyInequality(summed, first.bound + second.bound,
                                          parents=(first, second), eliminated=eliminated[0])
            facets.setdefault(summed, facet)
    out = tuple(sorted(facets.values(), key=lambda f: _facet_order(f.coeffs)))
    if len(out) != 8:
        raise ConsistencyError(f"facet scan produced {len(out)} facets instead of 8")
    return out


def _facet_order(coeffs):
    # one minus sign before three, then lexicographic with + first
    return (sum(c < 0 for c in coeffs), tuple(-c for c in coeffs))


def evaluate(ineq: ConsistencyInequality, c: CorrelationSet) -> float:
    """Slack ``lhs - bound``; negative means the inequality is violated."""
    return ineq.value(c) - ineq.bound


def evaluable(ineq: ConsistencyInequality, c: CorrelationSet) -> bool:
    return all(p in c for p in ineq.coefficients)


# -- CHSH value -------------------------------------------------------------------------

CHSH_PATTERNS = ("upper", "lower")


def chsh_value(c: CorrelationSet, pattern: str = "upper") -> float:
    """``|AB - A'B| + |AB' + A'B'|`` (upper signs) or ``|AB + A'B| + |AB' - A'B'|``."""
    ab, abp, apb, apbp = c.measured_vector()
    if pattern == "upper":
        return abs(ab - apb) + abs(abp + apbp)
    if pattern == "lower":
        return abs(ab + apb) + abs(abp - apbp)
    raise ValueError(f"pattern must be one of {CHSH_PATTERNS}, got {pattern!r}")


def chsh_s(c: CorrelationSet) -> tuple[float, str]:
    """Largest CHSH value over both sign patterns, with the pattern that attains it."""
    values = {p: chsh_value(c, p) for p in CHSH_PATTERNS}
    best = max(CHSH_PATTERNS, key=values.__getitem__)
    return values[best], best


# -- local polytope membership ----------------------------------------------------------

def strategy_vertices() -> np.ndarray:
    """16 x 4 array of deterministic correlation vectors over the measured pairs."""
    rows = []
    for a, ap, b, bp in strategy_assignments():
        rows.append((a * b, a * bp, ap * b, ap * bp))
    return np.array(rows, dtype=float)


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of the local-polytope test for one correlation vector.

    ``weights`` (convex weights over :func:`strategy_vertices`) is the
    certificate of membership; ``violated_facet`` with ``facet_slack`` is the
    certificate of non-membership.  Within ``MEMBERSHIP_TOL`` of the boundary
    both are attached and ``boundary`` is set.
    """

    is_member: bool
    weights: np.ndarray | None
    violated_facet: ConsistencyInequality | None
    facet_slack: float
    residual: float
    boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "is_member": self.is_member,
            "boundary": self.boundary,
            "weights": None if self.weights is None else [float(w) for w in self.weights],
            "violated_facet": None if self.violated_facet is None else self.violated_facet.name,
            "violated_facet_text": None if self.violated_facet is None
            else self.violated_facet.upper_text(),
            "min_facet_slack": self.facet_slack,
            "lp_residual": self.residual,
        }


def _facet_matrix(facets) -> np.ndarray:
    return np.array([f.coeffs[:4] for f in facets], dtype=float)


def _lp_block() -> np.ndarray:
    # [V^T; 1] w + u - v = [c; 1], minimize sum(u + v)
    a = np.vstack([strategy_vertices().T, np.ones(16)])
    return np.hstack([a, np.eye(5), -np.eye(5)])


_LP_COST = np.r_[np.zeros(16), np.ones(10)]


def _solve_block_lp(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weights and L1 residuals for each row of ``points``.

    The problems are independent, so a batch is solved as one block-diagonal
    LP; the separable objective makes each block optimal on its own.
    """
    n = len(points)
    block = sp.csr_matrix(_lp_block())
    a_eq = sp.block_diag([block] * n, format="csr")
    b_eq = np.hstack([points, np.ones((n, 1))]).ravel()
    res = linprog(np.tile(_LP_COST, n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise ConsistencyError(f"membership LP failed: {res.message}")
    z = res.x.reshape(n, 26)
    return z[:, :16], z[:, 16:].sum(axis=1)


def _combine(point, weights, residual, facets, fmat) -> MembershipResult:
    slacks = fmat @ point + 2.0
    k = int(np.argmin(slacks))
    min_slack = float(slacks[k])
    lp_member = residual <= MEMBERSHIP_TOL
    boundary = abs(min_slack) <= MEMBERSHIP_TOL
    if not boundary and lp_member != (min_slack > 0):
        raise ConsistencyError(
            f"LP (residual {residual:.3e}) and facet check (slack {min_slack:.3e}) disagree "
            f"for {point.tolist()}")
    w = np.clip(weights, 0.0, None)
    w = w / w.sum() if w.sum() > 0 else w
    return MembershipResult(
        is_member=bool(lp_member),
        weights=w if (lp_member or boundary) else None,
        violated_facet=facets[k] if (not lp_member or boundary) else None,
        facet_slack=min_slack,
        residual=float(residual),
        boundary=bool(boundary),
    )


def _as_point(c) -> np.ndarray:
    if isinstance(c, CorrelationSet):
        vec = c.measured_vector()
    else:
        vec = c
    point = np.asarray(vec, dtype=float).ravel()
    if point.shape != (4,):
        raise ValueError("membership needs the four measured correlations")
    if np.any(np.abs(point) > 1 + CORRELATION_TOL):
        raise ValueError(f"correlations {point.tolist()} outside [-1, 1]")
    return point


def lhv_membership(c: CorrelationSet | Sequence[float]) -> MembershipResult:
    """Decide whether ``(AB, AB', A'B, A'B')`` is a mixture of deterministic strategies.

    The LP answer is cross-checked against the eight facets and any
    disagreement away from the boundary raises :class:`ConsistencyError`.
    """
    return lhv_membership_batch([_as_point(c)])[0]


def lhv_membership_batch(points, chunk: int = 2000) -> list[MembershipResult]:
    pts = np.array([_as_point(p) for p in points]) if len(points) else np.empty((0, 4))
    facets = derive_chsh_facets()
    fmat = _facet_matrix(facets)
    out = []
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        weights, residuals = _solve_block_lp(block)
        for p, w, r in zip(block, weights, residuals):
            out.append(_combine(p, w, r, facets, fmat))
    return out


def facet_satisfied(points) -> np.ndarray:
    """Boolean mask: all eight facets hold (slack >= 0) for each row of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.all(pts @ _facet_matrix(derive_chsh_facets()).T + 2.0 >= 0, axis=1)

