"""Section counting through chains of degree-2 quotients.

For a sigma-invariant theta characteristic L on a curve with involution
sigma, the pushforward to B = C/sigma splits and

    h^0(C, L) = h^0(B, L') + h^0(B, K_B - L')

for the decomposition L = pi^*(L')(E) with E inside the ramification of pi.
A reduction script applies this repeatedly down to a genus-0 terminal where
dimensions are read off degrees.  Every side condition -- sigma an
involution on the current quotient, E a fixed point set, the class identity,
and the theta condition at each level -- is certified in the derived
relation lattice before the identity is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .covering import Curve, Tower
from .divlat import (
    DivisorClass,
    RelationSet,
    canonical_class,
    derive_relations,
    gp_class,
    is_equivalent,
    pullback,
)
from .groups import Subgroup, subgroup_generate


class BeauvilleError(ValueError):
    """Raised when a reduction step's side conditions fail."""


@dataclass(frozen=True)
class QuotientStep:
    """One degree-2 descent: involution word, base class, correction points."""

    sigma: int  # element acting as the involution on the current quotient
    lprime: DivisorClass  # on the quotient curve
    ram_points: DivisorClass  # E: reduced point set on the current curve
    label: str = ""


@dataclass(frozen=True)
class VerifiedStep:
    step: QuotientStep
    current: Curve
    quotient: Curve
    theta_checked: bool
    residual: DivisorClass  # K_B - L' on the quotient


@dataclass(frozen=True)
class SectionCount:
    value: int
    trace: tuple[str, ...]


@dataclass(frozen=True)
class ReductionScript:
    """An ordered chain of quotient steps ending on a genus-0 curve."""

    tower: Tower
    start: DivisorClass  # L on the top curve of the tower
    steps: tuple[QuotientStep, ...]
    relation_subgroups: tuple[Subgroup, ...] = ()
    name: str = "L"


def _relations(
    tower: Tower, curve: Curve, subgroups: Sequence[Subgroup], declared=()
) -> RelationSet:
    return derive_relations(tower, curve, list(subgroups), declared=declared)


def verify_step(
    tower: Tower,
    current: Curve,
    cls: DivisorClass,
    step: QuotientStep,
    rels: RelationSet,
    require_theta: bool = True,
) -> VerifiedStep:
    """Check all side conditions of one descent; raises on any failure."""
    group = current.group
    h = current.subgroup
    sigma = step.sigma
    if sigma in h.members:
        raise BeauvilleError("sigma acts trivially on the current quotient")
    if group.mul(sigma, sigma) not in h.members:
        raise BeauvilleError("sigma is not an involution modulo the acting subgroup")
    if not current.acts(sigma):
        raise BeauvilleError("sigma does not normalize the acting subgroup")
    quotient_sub = subgroup_generate(group, sorted(h.members) + [sigma])
    if quotient_sub.order != 2 * h.order:
        raise BeauvilleError("quotient step does not have degree 2")
    quotient = tower.curve(quotient_sub)

    e_cls = step.ram_points
    if not e_cls.is_effective_points():
        raise BeauvilleError("E must be a reduced set of fiber points")
    for sym, _ in e_cls.coeffs:
        p = current.fibers[sym[1]][sym[2]]
        if current.point_image(sigma, p) != p:
            raise BeauvilleError("E contains a point not fixed by sigma")

    if step.lprime.curve.subgroup.members != quotient_sub.members:
        raise BeauvilleError("L' does not live on the quotient curve")
    pulled = pullback(current, quotient, step.lprime)
    identity = cls - pulled - e_cls
    if not rels.derivable_zero(identity):
        raise BeauvilleError("class identity L ~ pi^*(L') + E is not derivable")

    theta_checked = False
    if require_theta:
        if not is_equivalent(2 * cls, canonical_class(current), rels):
            raise BeauvilleError("theta condition 2L ~ K is not derivable")
        theta_checked = True

    residual = canonical_class(quotient) - step.lprime
    return VerifiedStep(step, current, quotient, theta_checked, residual)


def evaluate_script(script: ReductionScript) -> SectionCount:
    """Run the chain, certifying every step, and return h^0 with its trace."""
    tower = script.tower
    curve = tower.top()
    if script.start.curve.subgroup.members != curve.subgroup.members:
        raise BeauvilleError("start class does not live on the top curve")
    return _evaluate(tower, curve, script.start, list(script.steps), script)


def _evaluate(
    tower: Tower,
    curve: Curve,
    cls: DivisorClass,
    steps: list[QuotientStep],
    script: ReductionScript,
) -> SectionCount:
    if not steps:
        raise BeauvilleError("script has no terminal step")
    rels = _relations(tower, curve, script.relation_subgroups)
    step, rest = steps[0], steps[1:]
    verified = verify_step(tower, curve, cls, step, rels)
    quotient = verified.quotient
    label = step.label or script.name
    if not rest:
        if quotient.genus != 0:
            raise BeauvilleError("terminal curve must have genus 0")
        d1 = step.lprime.degree()
        d2 = verified.residual.degree()
        h0 = max(0, d1 + 1) + max(0, d2 + 1)
        trace = (
            f"h0({label}) = h0(P1, O({d1})) + h0(P1, O({d2})) = {h0}",
        )
        return SectionCount(h0, trace)
    rels_quot = _relations(tower, quotient, script.relation_subgroups)
    if not is_equivalent(verified.residual, step.lprime, rels_quot):
        raise BeauvilleError(
            "K_B - L' ~ L' is not derivable; the doubled recursion does not apply"
        )
    inner = _evaluate(tower, quotient, step.lprime, rest, script)
    value = 2 * inner.value
    trace = (f"h0({label}) = 2*h0({rest[0].label or 'next'})",) + inner.trace + (
        f"total at this level: {value}",
    )
    return SectionCount(value, trace)


@dataclass(frozen=True)
class AcyclicityCertificate:
    curve: Curve
    cls: DivisorClass
    h0: int
    h1: int
    degree: int
    genus: int

    @property
    def acyclic(self) -> bool:
        return self.h0 == 0 and self.h1 == 0


def acyclicity_certificate(
    curve: Curve, cls: DivisorClass, count: SectionCount
) -> AcyclicityCertificate:
    """Certify h^0 = h^1 = 0; requires deg = g - 1 so that chi = 0."""
    deg = cls.degree()
    if count.value != 0:
        raise BeauvilleError("bundle has sections; not acyclic")
    if deg != curve.genus - 1:
        raise BeauvilleError(
            f"deg = {deg} != g - 1 = {curve.genus - 1}: chi != 0 so h1 != 0"
        )
    return AcyclicityCertificate(curve, cls, 0, 0, deg, curve.genus)
