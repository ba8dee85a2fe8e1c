"""Theta-alignment between discovered concepts and a human ontology.

A concept C_e is theta-aligned when some label's occurrences cover at least
a theta fraction of it: |C_e intersect C_h| / |C_e| >= theta. A label C_h is
covered when some concept satisfies the same test; note the denominator is
|C_e| in both directions, which is the definition as printed. The variant
that divides by |C_h| instead is available behind coverage_denominator=
"human" and is never the default.

The score is lambda = (aligned fraction + covered fraction) / 2. All theta
comparisons run in exact rational arithmetic, so theta=0.95 admits a 19-of-20
concept with nothing owed to floating point. Float inputs for theta are read
as their shortest decimal spelling (0.95 means 95/100 exactly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction

from .concepts import ConceptSet
from .dataset import HumanOntology
from .errors import ValidationError


def as_theta(value) -> Fraction:
    if isinstance(value, Fraction):
        theta = value
    elif isinstance(value, float):
        theta = Fraction(str(value))   # shortest decimal spelling, not the binary value
    elif isinstance(value, (int, str)):
        theta = Fraction(value)
    else:
        raise ValidationError(f"cannot read theta from {value!r}")
    if not (0 < theta <= 1):
        raise ValidationError(f"theta must be in (0, 1], got {theta}")
    return theta


def _pct(frac: Fraction) -> str:
    """Percentage with one decimal, ties to even."""
    d = Decimal(frac.numerator * 100) / Decimal(frac.denominator)
    return str(d.quantize(Decimal("0.1"), rounding=ROUND_HALF_EVEN))


@dataclass
class AlignmentReport:
    theta: Fraction
    alignment_rational: Fraction
    coverage_rational: Fraction
    lambda_rational: Fraction
    aligned_concept_ids: list[int]
    covered_labels: list[str]
    per_label_aligned_counts: dict[str, int]
    settings: dict

    @property
    def alignment_fraction(self) -> float:
        return float(self.alignment_rational)

    @property
    def coverage_fraction(self) -> float:
        return float(self.coverage_rational)

    @property
    def lambda_score(self) -> float:
        return float(self.lambda_rational)

    def to_json(self) -> str:
        obj = {
            "theta": float(self.theta),
            "theta_rational": str(self.theta),
            "alignment_fraction": self.alignment_fraction,
            "alignment_rational": str(self.alignment_rational),
            "alignment_pct": _pct(self.alignment_rational),
            "coverage_fraction": self.coverage_fraction,
            "coverage_rational": str(self.coverage_rational),
            "coverage_pct": _pct(self.coverage_rational),
            "lambda_score": self.lambda_score,
            "lambda_rational": str(self.lambda_rational),
            "aligned_concept_ids": self.aligned_concept_ids,
            "covered_labels": self.covered_labels,
            "per_label_aligned_counts": self.per_label_aligned_counts,
            "settings": self.settings,
        }
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        head = f"{'Align. %':>10} {'Cov. %':>10} {'lambda':>10}"
        row = (f"{_pct(self.alignment_rational):>10} {_pct(self.coverage_rational):>10} "
               f"{float(self.lambda_rational):>10.4f}")
        return head + "\n" + row + "\n"


def theta_alignment(cs: ConceptSet, ont: HumanOntology, theta,
                    coverage_denominator: str = "encoded") -> AlignmentReport:
    """Score a concept set against an ontology at the given theta."""
    theta = as_theta(theta)
    if coverage_denominator not in ("encoded", "human"):
        raise ValidationError(
            f"coverage_denominator must be 'encoded' or 'human', got {coverage_denominator!r}")
    if not cs.concepts:
        raise ValidationError("empty concept set")
    if not ont.concepts:
        raise ValidationError("empty ontology")
    labels = list(ont.concepts.keys())
    label_sizes = {lab: len(ids) for lab, ids in ont.concepts.items()}
    # token id -> label lookup; intersections count occurrences, not types
    id_label: dict[int, str] = {}
    for lab, ids in ont.concepts.items():
        for i in ids:
            id_label[i] = lab
    num, den = theta.numerator, theta.denominator
    aligned_ids: list[int] = []
    covered: set[str] = set()
    per_label: dict[str, int] = {lab: 0 for lab in labels}
    for c in cs.concepts:
        size = c.size
        inter: dict[str, int] = {}
        for i in c.member_ids:
            lab = id_label.get(int(i))
            if lab is not None:
                inter[lab] = inter.get(lab, 0) + 1
        hits = 0
        for lab, cnt in inter.items():
            if cnt * den >= num * size:
                hits += 1
                per_label[lab] += 1
                if coverage_denominator == "encoded":
                    covered.add(lab)
            if coverage_denominator == "human" and cnt * den >= num * label_sizes[lab]:
                covered.add(lab)
        if 2 * num > den:
            # past one half, two labels cannot both dominate the same concept
            assert hits <= 1, f"concept {c.concept_id} aligned to {hits} labels"
        if hits:
            aligned_ids.append(c.concept_id)
    alignment = Fraction(len(aligned_ids), len(cs.concepts))
    coverage = Fraction(len(covered), len(ont.concepts))
    lam = (alignment + coverage) / 2
    report = AlignmentReport(
        theta=theta,
        alignment_rational=alignment,
        coverage_rational=coverage,
        lambda_rational=lam,
        aligned_concept_ids=aligned_ids,
        covered_labels=sorted(covered),
        per_label_aligned_counts=per_label,
        settings={
            "filtered": cs.filtered,
            "min_types": cs.min_types,
            "theta": str(theta),
            "coverage_denominator": coverage_denominator,
            "n_concepts": len(cs.concepts),
            "n_labels": len(ont.concepts),
        },
    )
    return report


def per_label_breakdown(report: AlignmentReport, ont: HumanOntology) -> str:
    """Aligned-concept count per label, highest first."""
    rows = sorted(report.per_label_aligned_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    width = max((len(lab) for lab in ont.concepts), default=5)
    lines = [f"{'label':<{width}}  aligned_concepts"]
    for lab, cnt in rows:
        lines.append(f"{lab:<{width}}  {cnt}")
    return "\n".join(lines) + "\n"
