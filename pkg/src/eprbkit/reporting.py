"""Inequality reports built from a correlation set: JSON, CSV and plain text."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .consistency import (
    ConsistencyInequality,
    MembershipResult,
    chsh_s,
    derive_chsh_facets,
    evaluable,
    evaluate,
    generate_consistency_inequalities,
    lhv_membership,
)
from .labels import MEASURED_PAIRS, UNMEASURED_PAIRS, CorrelationSet, pretty_pair

SATISFIED = "satisfied"
VIOLATED = "violated"
UNMEASURED = "not evaluable: unmeasured"
NOT_EVALUABLE = "not evaluable"


@dataclass(frozen=True)
class InequalityResult:
    inequality: ConsistencyInequality
    slack: float | None
    status: str

    def to_dict(self) -> dict:
        return {"name": self.inequality.name, "kind": self.inequality.kind,
                "coefficients": self.inequality.coefficients, "bound": self.inequality.bound,
                "slack": self.slack, "status": self.status, "text": self.inequality.text()}


@dataclass(frozen=True)
class ReportBundle:
    correlations: CorrelationSet
    inequality_results: tuple[InequalityResult, ...]
    chsh: dict
    membership: MembershipResult | None

    @property
    def violated(self) -> bool:
        return any(r.status == VIOLATED for r in self.inequality_results)

    def to_dict(self) -> dict:
        return {
            "correlations": dict(self.correlations.values),
            "standard_errors": dict(self.correlations.errors),
            "unmeasured": [p for p in UNMEASURED_PAIRS if p not in self.correlations],
            "inequalities": [r.to_dict() for r in self.inequality_results],
            "chsh": dict(self.chsh),
            "membership": None if self.membership is None else self.membership.to_dict(),
            "violated": self.violated,
        }


def _result(ineq: ConsistencyInequality, c: CorrelationSet) -> InequalityResult:
    if not evaluable(ineq, c):
        missing = [p for p in ineq.coefficients if p not in c]
        status = UNMEASURED if all(p in UNMEASURED_PAIRS for p in missing) else NOT_EVALUABLE
        return InequalityResult(ineq, None, status)
    slack = evaluate(ineq, c)
    return InequalityResult(ineq, slack, VIOLATED if slack < 0 else SATISFIED)


def build_report(c: CorrelationSet, membership: bool = True) -> ReportBundle:
    """Evaluate the 16 base inequalities, the 8 facets, S, and local-polytope membership."""
    ineqs = generate_consistency_inequalities() + derive_chsh_facets()
    results = tuple(_result(i, c) for i in ineqs)
    complete = all(p in c for p in MEASURED_PAIRS)
    if complete:
        s, pattern = chsh_s(c)
        facet_violated = any(r.status == VIOLATED for r in results if r.inequality.kind == "chsh")
        chsh = {"S": s, "pattern": pattern, "bound": 2,
                "status": VIOLATED if facet_violated else SATISFIED}
    else:
        chsh = {"S": None, "pattern": None, "bound": 2, "status": NOT_EVALUABLE}
    member = lhv_membership(c) if (complete and membership) else None
    return ReportBundle(c, results, chsh, member)


CSV_FIELDS = ("name", "kind", "coefficients", "bound", "slack", "status")


def report_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in bundle.inequality_results:
        coeffs = ";".join(f"{p}:{c:+d}" for p, c in r.inequality.coefficients.items())
        slack = "" if r.slack is None else f"{r.slack:.17g}"
        writer.writerow((r.inequality.name, r.inequality.kind, coeffs, r.inequality.bound,
                         slack, r.status))
    return buf.getvalue()


def report_text(bundle: ReportBundle) -> str:
    lines = ["Correlations"]
    c = bundle.correlations
    for p in MEASURED_PAIRS + UNMEASURED_PAIRS:
        if p in c:
            se = c.errors.get(p)
            se_text = f"  ± {se:.6f}" if se is not None else ""
            lines.append(f"  {pretty_pair(p):8s} {c[p]: .6f}{se_text}")
        else:
            lines.append(f"  {pretty_pair(p):8s} unmeasured")
    lines.append("")
    lines.append("Inequalities")
    for r in bundle.inequality_results:
        slack = "" if r.slack is None else f"slack {r.slack: .6f}  "
        lines.append(f"  {r.inequality.name:16s} {r.inequality.text():40s} {slack}{r.status}")
    lines.append("")
    if bundle.chsh["S"] is None:
        lines.append("CHSH: not evaluable (missing setting pairs)")
    else:
        lines.append(f"CHSH: S = {bundle.chsh['S']:.6f} ({bundle.chsh['pattern']} signs), bound 2")
    m = bundle.membership
    if m is not None:
        lines.append(membership_text(m))
    return "\n".join(lines)


def membership_text(m: MembershipResult) -> str:
    if m.is_member:
        weights = ", ".join(f"{w:.6f}" for w in m.weights)
        text = f"local polytope: member (certificate weights [{weights}])"
    else:
        text = (f"local polytope: non-member, violated facet {m.violated_facet.upper_text()} "
                f"(slack {m.facet_slack:.6f})")
    if m.boundary:
        text += "; boundary case within tolerance"
    return text
