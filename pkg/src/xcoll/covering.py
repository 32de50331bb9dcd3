"""Galois coverings of the line given by ramification data, and their quotients.

A covering C -> P^1 with group G is encoded by a tuple (g_1, ..., g_n) of
branch elements with product one that generate G.  For a subgroup H the
quotient curve C/H is modeled on the right cosets H\\G: the loop around the
j-th branch point acts by right multiplication by g_j, deck transformations
act by left multiplication.  Points of C/H over branch j are the cycles of
that action, i.e. double cosets H\\G/<g_j>; the cycle length is the local
degree over P^1.  Genera come from Riemann-Hurwitz on these cycle types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .groups import FiniteGroup, GroupError, GroupMorphism, Subgroup, subgroup_generate, trivial_subgroup

FreeWord = tuple[tuple[str, int], ...]  # ((symbol, +1/-1), ...)


class CoveringError(ValueError):
    """Raised for invalid ramification data or misused quotients."""


def parse_ram_type(text: str) -> tuple[int, ...]:
    """Parse a type string like "2^3,4" into the positional tuple (2,2,2,4)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "^" in part:
            base, exp = part.split("^")
            out.extend([int(base)] * int(exp))
        else:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class RamificationDatum:
    """Branch monodromy tuple with its declared ramification type."""

    group: FiniteGroup
    branches: tuple[int, ...]
    ram_type: tuple[int, ...]

    def __post_init__(self):
        if len(self.branches) != len(self.ram_type):
            raise CoveringError("one type entry per branch element required")

    @property
    def n_branches(self) -> int:
        return len(self.branches)


@dataclass(frozen=True)
class DatumReport:
    product_one: bool
    generates: bool
    type_matches: bool

    @property
    def ok(self) -> bool:
        return self.product_one and self.generates and self.type_matches

    def failures(self) -> list[str]:
        out = []
        if not self.product_one:
            out.append("branch product is not the identity")
        if not self.generates:
            out.append("branch elements do not generate the group")
        if not self.type_matches:
            out.append("element orders do not match the declared type")
        return out


def validate_datum(d: RamificationDatum) -> DatumReport:
    g = d.group
    prod = 0
    for b in d.branches:
        prod = g.mul(prod, b)
    generated = subgroup_generate(g, d.branches)
    orders_ok = all(
        g.element_order(b) == m for b, m in zip(d.branches, d.ram_type)
    )
    return DatumReport(prod == 0, generated.order == g.order, orders_ok)


def datum_conjugate(d: RamificationDatum, h: int) -> RamificationDatum:
    """Replace every branch element g_i by h g_i h^-1."""
    g = d.group
    return RamificationDatum(
        g, tuple(g.conjugate(b, h) for b in d.branches), d.ram_type
    )


def apply_automorphism_to_datum(
    phi: GroupMorphism, d: RamificationDatum
) -> RamificationDatum:
    from .groups import check_morphism

    if phi.source is not d.group or phi.target is not d.group:
        raise CoveringError("automorphism must act on the datum's group")
    is_hom, is_auto = check_morphism(phi)
    if not (is_hom and is_auto):
        raise CoveringError("map is not an automorphism")
    return RamificationDatum(
        d.group, tuple(phi.apply(b) for b in d.branches), d.ram_type
    )


# -- quotient curves -------------------------------------------------------


@dataclass(frozen=True)
class FiberPoint:
    """A point of C/H over branch j: a cycle of H-cosets (a double coset)."""

    branch: int  # 0-based branch index
    index: int  # position within the fiber, canonical order
    cosets: tuple[int, ...]  # coset indices forming the monodromy cycle
    members: frozenset[int]  # all group elements in the double coset
    e_over_base: int  # local degree over P^1 (the cycle length)

    @property
    def key(self) -> tuple[int, int]:
        return (self.branch, self.index)


class Curve:
    """The quotient C/H of the covering curve for a ramification datum.

    H trivial gives the curve itself; H = G gives P^1.  Construction is
    deterministic; instances are immutable and cached via :class:`Tower`.
    """

    def __init__(self, datum: RamificationDatum, subgroup: Subgroup):
        if subgroup.group is not datum.group:
            raise CoveringError("subgroup belongs to a different group")
        self.datum = datum
        self.group = datum.group
        self.subgroup = subgroup
        g = self.group
        members = sorted(subgroup.members)
        coset_of: list[Optional[int]] = [None] * g.order
        reps: list[int] = []
        for a in g.elements():
            if coset_of[a] is None:
                idx = len(reps)
                reps.append(a)
                for h in members:
                    coset_of[g.mul(h, a)] = idx
        self.coset_reps = reps
        self.coset_of = coset_of  # element -> coset index
        self.degree = len(reps)  # degree over P^1

        self.fibers: list[list[FiberPoint]] = []
        correction = 0
        for j, branch_el in enumerate(datum.branches):
            action = [coset_of[g.mul(reps[c], branch_el)] for c in range(self.degree)]
            seen = [False] * self.degree
            points: list[FiberPoint] = []
            for start in range(self.degree):
                if seen[start]:
                    continue
                cycle = []
                cur = start
                while not seen[cur]:
                    seen[cur] = True
                    cycle.append(cur)
                    cur = action[cur]
                mem = frozenset(
                    g.mul(h, reps[c]) for c in cycle for h in members
                )
                points.append(
                    FiberPoint(j, len(points), tuple(cycle), mem, len(cycle))
                )
                correction += len(cycle) - 1
            self.fibers.append(points)

        two_g_minus_2 = -2 * self.degree + correction
        if two_g_minus_2 % 2 != 0:
            raise CoveringError("Riemann-Hurwitz value is odd; inconsistent data")
        self.genus = (two_g_minus_2 + 2) // 2
        if self.genus < 0:
            raise CoveringError("negative genus; inconsistent data")

    def fiber_points(self, j: int) -> list[FiberPoint]:
        return self.fibers[j]

    def point_containing(self, j: int, element: int) -> FiberPoint:
        for p in self.fibers[j]:
            if element in p.members:
                return p
        raise CoveringError("element not found in fiber")

    def acts(self, w: int) -> bool:
        """Whether group element w induces an action on this quotient."""
        from .groups import normalizes

        return normalizes(self.group, w, self.subgroup)

    def point_image(self, w: int, p: FiberPoint) -> FiberPoint:
        """The deck action of w (must normalize H): H a J -> H (w a) J."""
        if not self.acts(w):
            raise CoveringError("element does not normalize the acting subgroup")
        rep = min(p.members)
        return self.point_containing(p.branch, self.group.mul(w, rep))

    def fixed_points(self, w: int) -> list[FiberPoint]:
        """Branch-fiber points fixed by w; the action is free elsewhere."""
        return [
            p
            for fiber in self.fibers
            for p in fiber
            if self.point_image(w, p) == p
        ]

    def project(self, deeper: "Curve", p: FiberPoint) -> FiberPoint:
        """Image of p on a deeper quotient (H' >= H) of the same datum."""
        if deeper.datum is not self.datum:
            raise CoveringError("curves belong to different data")
        if not self.subgroup.members <= deeper.subgroup.members:
            raise CoveringError("projection requires a larger acting subgroup")
        return deeper.point_containing(p.branch, min(p.members))

    def local_degree_over(self, deeper: "Curve", p: FiberPoint) -> int:
        q = self.project(deeper, p)
        if p.e_over_base % q.e_over_base != 0:
            raise CoveringError("inconsistent local degrees in the tower")
        return p.e_over_base // q.e_over_base

    def __repr__(self) -> str:
        return (
            f"Curve(genus={self.genus}, degree={self.degree}, "
            f"|H|={self.subgroup.order})"
        )


_CURVE_CACHE: dict[tuple[RamificationDatum, frozenset[int]], Curve] = {}


def cached_curve(datum: RamificationDatum, subgroup: Optional[Subgroup] = None) -> Curve:
    if subgroup is None:
        subgroup = trivial_subgroup(datum.group)
    key = (datum, subgroup.members)
    if key not in _CURVE_CACHE:
        _CURVE_CACHE[key] = Curve(datum, subgroup)
    return _CURVE_CACHE[key]


class Tower:
    """Access point for the quotient curves of one ramification datum."""

    def __init__(self, datum: RamificationDatum):
        report = validate_datum(datum)
        if not report.ok:
            raise CoveringError(
                "invalid ramification datum: " + "; ".join(report.failures())
            )
        self.datum = datum

    def curve(self, subgroup: Optional[Subgroup] = None) -> Curve:
        return cached_curve(self.datum, subgroup)

    def top(self) -> Curve:
        return self.curve()


def quotient_genus(d: RamificationDatum, h: Optional[Subgroup] = None) -> int:
    """Genus of C/H by Riemann-Hurwitz on the coset action."""
    return cached_curve(d, h).genus


# -- fibers with orbit decomposition ----------------------------------------


@dataclass(frozen=True)
class FiberOrbit:
    point_indices: tuple[int, ...]
    free: bool
    local_degrees: tuple[int, ...]  # degree of each point over the quotient


@dataclass(frozen=True)
class FiberSet:
    """The reduced fiber over branch j with its decomposition under h."""

    branch: int
    points: tuple[FiberPoint, ...]
    stabilizer_order: int
    orbits: tuple[FiberOrbit, ...]


def fiber(d: RamificationDatum, j: int, h: Optional[Subgroup] = None) -> FiberSet:
    """Points of C over branch j, decomposed into h-orbits."""
    g = d.group
    if h is None:
        h = trivial_subgroup(g)
    curve = cached_curve(d)
    points = curve.fiber_points(j)
    quotient = cached_curve(d, h)
    by_index = {p.index: p for p in points}
    assigned: set[int] = set()
    orbits: list[FiberOrbit] = []
    h_members = sorted(h.members)
    for p in points:
        if p.index in assigned:
            continue
        orbit = set()
        frontier = [p]
        while frontier:
            cur = frontier.pop()
            if cur.index in orbit:
                continue
            orbit.add(cur.index)
            for w in h_members:
                img = curve.point_image(w, cur)
                if img.index not in orbit:
                    frontier.append(img)
        assigned |= orbit
        idxs = tuple(sorted(orbit))
        degs = tuple(
            curve.local_degree_over(quotient, by_index[i]) for i in idxs
        )
        orbits.append(
            FiberOrbit(idxs, free=(len(idxs) == h.order and all(e == 1 for e in degs)), local_degrees=degs)
        )
    m = g.element_order(d.branches[j])
    return FiberSet(j, tuple(points), m, tuple(orbits))


# -- freeness and surface invariants ----------------------------------------


def stabilizer_union(d: RamificationDatum) -> frozenset[int]:
    """All elements with a fixed point: conjugates of the <g_j>, minus 1."""
    g = d.group
    out: set[int] = set()
    for b in d.branches:
        powers = []
        cur = b
        while cur != 0:
            powers.append(cur)
            cur = g.mul(cur, b)
        for a in g.elements():
            for p in powers:
                out.add(g.conjugate(p, a))
    out.discard(0)
    return frozenset(out)


def check_free_diagonal(d1: RamificationDatum, d2: RamificationDatum) -> bool:
    """Whether the diagonal action on C_1 x C_2 is free."""
    if d1.group is not d2.group:
        raise CoveringError("data over different groups")
    return not (stabilizer_union(d1) & stabilizer_union(d2))


@dataclass(frozen=True)
class SurfaceInvariants:
    chi_o: int
    euler: int
    k_squared: int
    q: int
    p_g: int
    rank_k0: int


def surface_invariants(d1: RamificationDatum, d2: RamificationDatum) -> SurfaceInvariants:
    """Numerical invariants of S = (C1 x C2)/G for a free diagonal action."""
    if not check_free_diagonal(d1, d2):
        raise CoveringError("diagonal action is not free")
    g = d1.group
    g1 = quotient_genus(d1)
    g2 = quotient_genus(d2)
    num = (g1 - 1) * (g2 - 1)
    if num % g.order != 0:
        raise CoveringError("chi(O) is not an integer; inconsistent data")
    chi = num // g.order
    euler = 4 * chi
    q = Curve(d1, _full(g)).genus + Curve(d2, _full(g)).genus
    p_g = chi - 1 + q
    return SurfaceInvariants(chi, euler, 8 * chi, q, p_g, euler)


def _full(g: FiniteGroup) -> Subgroup:
    from .groups import full_subgroup

    return full_subgroup(g)


# -- fundamental-group transport ---------------------------------------------


@dataclass(frozen=True)
class FreeGroupSubstitution:
    """A map between punctured-sphere groups given on free generators.

    Both source and target generators satisfy a single product-one relation
    (in the declared order); the substitution must respect it.
    """

    source_symbols: tuple[str, ...]
    target_symbols: tuple[str, ...]
    images: tuple[tuple[str, FreeWord], ...]  # aligned with source_symbols

    def image(self, sym: str) -> FreeWord:
        for s, w in self.images:
            if s == sym:
                return w
        raise CoveringError(f"undefined source symbol {sym!r}")

    def respects_relation(self) -> bool:
        """Check that the product of the images reduces to 1 in the target.

        The target's product-one relation is used by eliminating the last
        target symbol as the inverse of the product of the earlier ones.
        """
        concat: list[tuple[str, int]] = []
        for s in self.source_symbols:
            concat.extend(self.image(s))
        last = self.target_symbols[-1]
        rest = self.target_symbols[:-1]
        expansion: list[tuple[str, int]] = []
        for sym, sign in concat:
            if sym != last:
                expansion.append((sym, sign))
                continue
            rep = [(t, -1) for t in reversed(rest)]
            expansion.extend(rep if sign == 1 else [(t, 1) for t in rest])
        return not _free_reduce(expansion)


def _free_reduce(word: Sequence[tuple[str, int]]) -> list[tuple[str, int]]:
    out: list[tuple[str, int]] = []
    for sym, sign in word:
        if out and out[-1][0] == sym and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((sym, sign))
    return out


def parse_free_word(text: str) -> FreeWord:
    """Parse words like "t0 t1 t0^-1" over whitespace-separated symbols."""
    out: list[tuple[str, int]] = []
    for chunk in text.split():
        if "^" in chunk:
            sym, exp = chunk.split("^")
            e = int(exp)
        else:
            sym, e = chunk, 1
        sign = 1 if e > 0 else -1
        out.extend([(sym, sign)] * abs(e))
    return tuple(out)


def transport_monodromy(
    sub: FreeGroupSubstitution, assignment: dict[str, int], group: FiniteGroup
) -> dict[str, int]:
    """Evaluate the substituted words under a target-symbol assignment."""
    if not sub.respects_relation():
        raise CoveringError("substitution violates the product-one relation")
    out: dict[str, int] = {}
    for s in sub.source_symbols:
        cur = group.identity
        for sym, sign in sub.image(s):
            if sym not in assignment:
                raise CoveringError(f"undefined target symbol {sym!r}")
            el = assignment[sym]
            cur = group.mul(cur, el if sign == 1 else group.inv(el))
        out[s] = cur
    return out
