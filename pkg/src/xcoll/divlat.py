"""Divisor classes on covering curves and derivable linear equivalence.

Classes are integer combinations of two kinds of symbols on a fixed curve:

* ``("pt", j, i)`` -- the i-th point of the reduced fiber over branch j;
* ``("gp", K)`` -- the pullback of a generic point of the genus-0 quotient
  by the subgroup with sorted member tuple K (so ``gp(G)`` is the generic
  fiber over P^1, and a generic fiber of a hyperelliptic map is ``gp(<s>)``).

Relations are derived from genus-0 quotients: the pullbacks of any two
points of a genus-0 curve are linearly equivalent.  Equivalence of classes
is decided by exact integer lattice membership, so torsion distinctions
(2D ~ 0 with D not ~ 0) are preserved.  Derived relation sets certify
equivalence only; inequivalence is meaningful only inside relation modules
declared complete by case data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .covering import Curve, FiberPoint, Tower, cached_curve
from .groups import Subgroup, full_subgroup, subgroup_is_normal
from .intlat import IntLattice

Sym = tuple


class DivisorError(ValueError):
    """Raised for ill-formed divisor classes or misused relation sets."""


def _check_same_curve(a: "DivisorClass", b: "DivisorClass") -> None:
    if a.curve.datum is not b.curve.datum or a.curve.subgroup.members != b.curve.subgroup.members:
        raise DivisorError("divisor classes live on different curves")


@dataclass(frozen=True)
class DivisorClass:
    """A finite integer combination of divisor symbols on one curve."""

    curve: Curve
    coeffs: tuple[tuple[Sym, int], ...]  # sorted, nonzero coefficients

    @classmethod
    def make(cls, curve: Curve, data: dict[Sym, int]) -> "DivisorClass":
        items = tuple(sorted((s, c) for s, c in data.items() if c != 0))
        return cls(curve, items)

    @classmethod
    def zero(cls, curve: Curve) -> "DivisorClass":
        return cls(curve, ())

    def as_dict(self) -> dict[Sym, int]:
        return dict(self.coeffs)

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        _check_same_curve(self, other)
        out = self.as_dict()
        for s, c in other.coeffs:
            out[s] = out.get(s, 0) + c
        return DivisorClass.make(self.curve, out)

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.curve, tuple((s, -c) for s, c in self.coeffs))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __rmul__(self, n: int) -> "DivisorClass":
        if n == 0:
            return DivisorClass.zero(self.curve)
        return DivisorClass(self.curve, tuple((s, n * c) for s, c in self.coeffs))

    def degree(self) -> int:
        return sum(c * symbol_degree(self.curve, s) for s, c in self.coeffs)

    def support(self) -> frozenset[Sym]:
        return frozenset(s for s, _ in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_effective_points(self) -> bool:
        """All coefficients 1 on point symbols (a reduced point set)."""
        return all(s[0] == "pt" and c == 1 for s, c in self.coeffs)

    def render(self, names: Optional[dict[Sym, str]] = None) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for s, c in self.coeffs:
            label = (names or {}).get(s) or _default_sym_name(s)
            if c == 1:
                term = label
            elif c == -1:
                term = f"-{label}"
            else:
                term = f"{c}*{label}"
            parts.append(term)
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text


def _default_sym_name(s: Sym) -> str:
    if s[0] == "pt":
        return f"pt({s[1] + 1},{s[2]})"
    return f"gfiber[{len(s[1])}]"


def symbol_degree(curve: Curve, s: Sym) -> int:
    if s[0] == "pt":
        return 1
    if s[0] == "gp":
        if len(s[1]) % curve.subgroup.order != 0:
            raise DivisorError("inconsistent generic-fiber degree")
        return len(s[1]) // curve.subgroup.order
    raise DivisorError(f"unknown symbol kind {s[0]!r}")


def pt_class(curve: Curve, p: FiberPoint) -> DivisorClass:
    return DivisorClass.make(curve, {("pt", p.branch, p.index): 1})


def points_class(curve: Curve, pts: Iterable[FiberPoint]) -> DivisorClass:
    out: dict[Sym, int] = {}
    for p in pts:
        key = ("pt", p.branch, p.index)
        out[key] = out.get(key, 0) + 1
    return DivisorClass.make(curve, out)


def fiber_class(curve: Curve, j: int) -> DivisorClass:
    return points_class(curve, curve.fiber_points(j))


def gp_subgroup_key(sub: Subgroup) -> tuple[int, ...]:
    return tuple(sorted(sub.members))


def gp_class(curve: Curve, sub: Subgroup) -> DivisorClass:
    """Pullback of a generic point of the genus-0 quotient C/sub."""
    if not curve.subgroup.members <= sub.members:
        raise DivisorError("generic fiber subgroup must contain the acting subgroup")
    if cached_curve(curve.datum, sub).genus != 0:
        raise DivisorError("generic fibers are classes only over genus-0 quotients")
    return DivisorClass.make(curve, {("gp", gp_subgroup_key(sub)): 1})


def generic_fiber(curve: Curve) -> DivisorClass:
    return gp_class(curve, full_subgroup(curve.group))


def canonical_class(curve: Curve) -> DivisorClass:
    """-2 * (generic fiber) + sum (e_p - 1) p over all branch fibers."""
    out = (-2) * generic_fiber(curve)
    for fiber in curve.fibers:
        for p in fiber:
            if p.e_over_base > 1:
                out = out + (p.e_over_base - 1) * pt_class(curve, p)
    if out.degree() != 2 * curve.genus - 2:
        raise DivisorError("canonical class degree mismatch")
    return out


# -- relations ----------------------------------------------------------------

PROVENANCES = (
    "PullbackOfPoint",
    "RiemannHurwitzCanonical",
    "GenusZeroQuotient",
    "CaseDeclared",
)


@dataclass(frozen=True)
class Relation:
    vector: DivisorClass
    provenance: str
    citation: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DivisorError(f"unknown provenance {self.provenance!r}")
        if self.vector.degree() != 0:
            raise DivisorError("relations must have degree 0")
        if self.provenance == "CaseDeclared" and not self.citation:
            raise DivisorError("declared relations must carry a citation")


@dataclass
class RelationSet:
    """Relations on one curve, with an optional declared-complete span."""

    curve: Curve
    relations: list[Relation] = field(default_factory=list)
    complete_for: Optional[frozenset[Sym]] = None
    _lattice: Optional[tuple[dict[Sym, int], IntLattice]] = field(
        default=None, repr=False
    )

    def add(self, rel: Relation) -> None:
        self.relations.append(rel)
        self._lattice = None

    def _symbols(self) -> list[Sym]:
        syms: set[Sym] = set()
        for r in self.relations:
            syms |= r.vector.support()
        return sorted(syms)

    def _vector(self, cls: DivisorClass, index: dict[Sym, int], width: int) -> Optional[list[int]]:
        v = [0] * width
        for s, c in cls.coeffs:
            if s not in index:
                return None
            v[index[s]] = c
        return v

    def lattice(self) -> tuple[dict[Sym, int], IntLattice]:
        if self._lattice is None:
            syms = self._symbols()
            index = {s: i for i, s in enumerate(syms)}
            lat = IntLattice(len(syms))
            for r in self.relations:
                lat.add(self._vector(r.vector, index, len(syms)))
            self._lattice = (index, lat)
        return self._lattice

    def derivable_zero(self, cls: DivisorClass) -> bool:
        """Whether cls ~ 0 is derivable from the relations."""
        if cls.is_zero():
            return True
        if cls.degree() != 0:
            return False
        index, lat = self.lattice()
        v = self._vector(cls, index, len(index))
        if v is None:
            return False
        return v in lat


def is_equivalent(a: DivisorClass, b: DivisorClass, rels: RelationSet) -> bool:
    """One-sided certificate: True means a - b lies in the relation lattice.

    False means "not derivable from these relations"; it proves inequality
    only when the relation set is declared complete for the symbols involved.
    """
    _check_same_curve(a, b)
    if a.degree() != b.degree():
        return False
    return rels.derivable_zero(a - b)


def derive_relations(
    tower: Tower,
    curve: Curve,
    subgroups: Sequence[Subgroup],
    declared: Sequence[Relation] = (),
) -> RelationSet:
    """Relations on ``curve`` from the quotients listed in ``subgroups``.

    Two sound rules are applied to every listed subgroup H' that contains
    the acting subgroup (the full group and the acting subgroup itself are
    always included):

    * genus(C/H') = 0: pullbacks of all points of C/H' are equivalent to
      the generic fiber gp(H'), and generic fibers of nested genus-0
      quotients are related by the covering degree;
    * genus(C/H') = 1: the canonical class of C/H' is trivial, so its
      Riemann-Hurwitz expression pulls back to a relation.
    """
    rels = RelationSet(curve)
    group = curve.group
    genus0: dict[tuple[int, ...], Subgroup] = {}
    genus1: dict[tuple[int, ...], Subgroup] = {}
    for sub in list(subgroups) + [full_subgroup(group), curve.subgroup]:
        if not curve.subgroup.members <= sub.members:
            continue
        key = gp_subgroup_key(sub)
        if key in genus0 or key in genus1:
            continue
        g = tower.curve(sub).genus
        if g == 0:
            genus0[key] = sub
        elif g == 1:
            genus1[key] = sub
    full_key = gp_subgroup_key(full_subgroup(group))
    for key, sub in genus0.items():
        quotient = tower.curve(sub)
        gp = gp_class(curve, sub)
        provenance = "PullbackOfPoint" if key == full_key else "GenusZeroQuotient"
        for j in range(curve.datum.n_branches):
            images: dict[int, dict[Sym, int]] = {}
            for p in curve.fiber_points(j):
                q = curve.project(quotient, p)
                e = curve.local_degree_over(quotient, p)
                vec = images.setdefault(q.index, {})
                vec[("pt", j, p.index)] = e
            for q_idx in sorted(images):
                cls = DivisorClass.make(curve, images[q_idx]) - gp
                rels.add(Relation(cls, provenance))
    # generic fibers of nested genus-0 quotients
    keys = sorted(genus0)
    for k1 in keys:
        for k2 in keys:
            if k1 == k2 or not set(k1) <= set(k2):
                continue
            ratio = len(k2) // len(k1)
            cls = gp_class(curve, genus0[k2]) - ratio * gp_class(curve, genus0[k1])
            rels.add(Relation(cls, "GenusZeroQuotient"))
    # trivial canonical class of genus-1 quotients, pulled back
    for key in sorted(genus1):
        quotient = tower.curve(genus1[key])
        k_formula = canonical_class(quotient)
        rels.add(Relation(pullback(curve, quotient, k_formula), "RiemannHurwitzCanonical"))
    for rel in declared:
        rels.add(rel)
    return rels


def pullback(curve: Curve, quotient: Curve, cls: DivisorClass) -> DivisorClass:
    """Pull a class on a deeper quotient back to ``curve``."""
    if cls.curve.subgroup.members != quotient.subgroup.members:
        raise DivisorError("class does not live on the quotient curve")
    if not curve.subgroup.members <= quotient.subgroup.members:
        raise DivisorError("pullback requires a deeper quotient")
    out: dict[Sym, int] = {}
    for s, c in cls.coeffs:
        if s[0] == "gp":
            out[s] = out.get(s, 0) + c
            continue
        j, q_idx = s[1], s[2]
        q = quotient.fibers[j][q_idx]
        for p in curve.fiber_points(j):
            if curve.project(quotient, p).index == q_idx:
                e = curve.local_degree_over(quotient, p)
                key = ("pt", j, p.index)
                out[key] = out.get(key, 0) + c * e
    result = DivisorClass.make(curve, out)
    ratio = quotient.subgroup.order // curve.subgroup.order
    if result.degree() != ratio * cls.degree():
        raise DivisorError("pullback degree mismatch")
    return result


def reduced_image(curve: Curve, quotient: Curve, cls: DivisorClass) -> DivisorClass:
    """Image of a point-supported class on a deeper quotient, without multiplicities."""
    out: dict[Sym, int] = {}
    for s, c in cls.coeffs:
        if s[0] != "pt":
            raise DivisorError("reduced image requires a point-supported class")
        p = curve.fibers[s[1]][s[2]]
        q = curve.project(quotient, p)
        out[("pt", q.branch, q.index)] = c
    return DivisorClass.make(quotient, out)


def act_on_class(curve: Curve, w: int, cls: DivisorClass) -> DivisorClass:
    """The deck action of w on a class; generic fibers require normal subgroups."""
    out: dict[Sym, int] = {}
    for s, c in cls.coeffs:
        if s[0] == "pt":
            p = curve.fibers[s[1]][s[2]]
            img = curve.point_image(w, p)
            key = ("pt", img.branch, img.index)
        else:
            sub = Subgroup(curve.group, frozenset(s[1]), tuple(s[1]))
            if not subgroup_is_normal(sub):
                raise DivisorError(
                    "group action on a generic fiber of a non-normal quotient"
                )
            key = s
        out[key] = out.get(key, 0) + c
    return DivisorClass.make(curve, out)


def is_invariant_class(
    curve: Curve, cls: DivisorClass, rels: RelationSet
) -> bool:
    """Whether the class is fixed by every group generator up to equivalence."""
    return all(
        is_equivalent(act_on_class(curve, g, cls), cls, rels)
        for g in curve.group.generator_indices
    )


def is_fixed_divisor(curve: Curve, cls: DivisorClass) -> bool:
    """Whether the divisor is fixed pointwise-as-a-divisor by the group."""
    return all(
        act_on_class(curve, g, cls) == cls for g in curve.group.generator_indices
    )


def count_distinct_classes(
    classes: Sequence[DivisorClass], rels: RelationSet
) -> int:
    """Number of equivalence classes; requires a declared-complete module."""
    if rels.complete_for is None:
        raise DivisorError("counting requires a declared-complete relation set")
    for cls in classes:
        if not cls.support() <= rels.complete_for:
            raise DivisorError("class outside the declared-complete span")
    span_rels = RelationSet(rels.curve)
    for r in rels.relations:
        if r.vector.support() <= rels.complete_for:
            span_rels.add(r)
    reps: list[DivisorClass] = []
    for cls in classes:
        if not any(is_equivalent(cls, r, span_rels) for r in reps):
            reps.append(cls)
    return len(reps)


def clifford_bound(d: int, g: int) -> int:
    """Upper bound floor(d/2) + 1 for h^0 of a special divisor of degree d."""
    if not 0 <= d <= 2 * g - 2:
        raise DivisorError("degree outside the special range [0, 2g-2]")
    return d // 2 + 1
