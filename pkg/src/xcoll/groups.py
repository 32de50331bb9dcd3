"""Concrete finite groups from presentations or permutation generators.

Groups are realized as index tables: elements are 0..order-1 with 0 the
identity, indices assigned by breadth-first search from the identity in the
declared generator order, so element numbering is deterministic and reports
are reproducible.  Presentations are realized by coset enumeration over the
trivial subgroup (the regular representation); permutation groups by closure.

Products compose right to left throughout: ``mul(a, b)`` applies ``b`` first.
A hard bound on the enumeration (default 10000) guards against wrong or
unbounded presentations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import lcm
from typing import Callable, Optional, Sequence

from .intlat import smith_normal_form
from .words import (
    Perm,
    Word,
    cycles_to_str,
    invert_word,
    letter,
    parse_cycles,
    parse_signed_perm,
    parse_word,
    perm_identity,
    perm_inv,
    perm_mul,
    signed_perm_to_str,
    word_to_str,
)

ENUMERATION_BOUND = 10000


class GroupError(ValueError):
    """Raised for invalid presentations, bounds, or inconsistent group data."""


@dataclass(frozen=True)
class Presentation:
    """A finite presentation: generator names plus relator words."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]

    @classmethod
    def parse(cls, generators: Sequence[str], relators: Sequence[str]) -> "Presentation":
        gens = tuple(generators)
        rels = []
        for r in relators:
            w = parse_word(r, gens)
            if not w:
                raise GroupError(f"empty relator {r!r}")
            rels.append(w)
        return cls(gens, tuple(rels))


class _CosetTable:
    """Todd-Coxeter coset enumeration over the trivial subgroup (HLT)."""

    def __init__(self, ngens: int, bound: int):
        self.ncols = 2 * ngens
        self.bound = bound
        self.tab: list[list[Optional[int]]] = [[None] * self.ncols]
        self.p = [0]  # union-find for coincidences

    def rep(self, c: int) -> int:
        while self.p[c] != c:
            self.p[c] = self.p[self.p[c]]
            c = self.p[c]
        return c

    def is_alive(self, c: int) -> bool:
        return self.p[c] == c

    def n_alive(self) -> int:
        return sum(1 for c in range(len(self.tab)) if self.p[c] == c)

    def define(self, a: int, x: int) -> None:
        if len(self.tab) >= self.bound * 2 or self.n_alive() >= self.bound:
            raise GroupError(f"coset enumeration exceeded bound {self.bound}")
        b = len(self.tab)
        self.tab.append([None] * self.ncols)
        self.p.append(b)
        self.tab[a][x] = b
        self.tab[b][x ^ 1] = a

    def _merge(self, a: int, b: int, queue: list[int]) -> None:
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        self.p[b] = a
        queue.append(b)

    def coincidence(self, a: int, b: int) -> None:
        queue: list[int] = []
        self._merge(a, b, queue)
        while queue:
            dead = queue.pop()
            for x in range(self.ncols):
                d = self.tab[dead][x]
                if d is None:
                    continue
                # undo the inverse entry pointing back at the dead coset
                self.tab[d][x ^ 1] = None
                mu, nu = self.rep(dead), self.rep(d)
                if self.tab[mu][x] is not None:
                    self._merge(nu, self.tab[mu][x], queue)
                elif self.tab[nu][x ^ 1] is not None:
                    self._merge(mu, self.tab[nu][x ^ 1], queue)
                else:
                    self.tab[mu][x] = nu
                    self.tab[nu][x ^ 1] = mu

    def scan_and_fill(self, a: int, w: Word) -> None:
        f, i = a, 0
        b, j = a, len(w) - 1
        while True:
            while i <= j and self.tab[f][w[i]] is not None:
                f = self.tab[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and self.tab[b][w[j] ^ 1] is not None:
                b = self.tab[b][w[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if j == i:
                self.tab[f][w[i]] = b
                self.tab[b][w[i] ^ 1] = f
                return
            self.define(f, w[i])

    def enumerate(self, relators: Sequence[Word]) -> list[list[int]]:
        a = 0
        while a < len(self.tab):
            if not self.is_alive(a):
                a += 1
                continue
            for rel in relators:
                self.scan_and_fill(a, rel)
                if not self.is_alive(a):
                    break
            if self.is_alive(a):
                for x in range(self.ncols):
                    if self.tab[a][x] is None:
                        self.define(a, x)
            a += 1
        # compress to live cosets
        live = [c for c in range(len(self.tab)) if self.is_alive(c)]
        index = {c: i for i, c in enumerate(live)}
        out = []
        for c in live:
            row = []
            for x in range(self.ncols):
                d = self.tab[c][x]
                if d is None:
                    raise GroupError("incomplete coset table after enumeration")
                row.append(index[self.rep(d)])
            out.append(row)
        return out


@dataclass(frozen=True)
class GroupElement:
    """An element of a realized group, by index."""

    group: "FiniteGroup"
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.group.order:
            raise GroupError(f"element index {self.index} out of range")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if other.group is not self.group:
            raise GroupError("elements of different groups")
        return GroupElement(self.group, self.group.mul(self.index, other.index))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group.inv(self.index))

    def __str__(self) -> str:
        return self.group.element_name(self.index)


class FiniteGroup:
    """A finite group as an indexed element set with exact multiplication.

    Construct via :meth:`from_presentation`, :meth:`from_permutations` or
    :meth:`from_signed_permutations`.  Instances are immutable after
    construction and safe to share.
    """

    def __init__(
        self,
        name: str,
        gen_names: tuple[str, ...],
        gen_action: list[list[int]],
        render: Optional[Callable[[int], str]] = None,
        presentation: Optional[Presentation] = None,
    ):
        # gen_action[e][x]: image of element e under right multiplication by
        # column x (columns alternate generator, inverse as in words.letter)
        self.name = name
        self.gen_names = gen_names
        self.order = len(gen_action)
        self._action = gen_action
        self.presentation = presentation
        self._render = render
        self._reindex_bfs()
        self._table = [
            [self._apply_word(a, self._words[b]) for b in range(self.order)]
            for a in range(self.order)
        ]
        self._inv = [self._table[a].index(0) for a in range(self.order)]
        self.generator_indices = tuple(
            self._action[0][letter(i)] for i in range(len(gen_names))
        )
        self._std_forms: Optional[dict[int, tuple[int, int, int]]] = None
        if presentation is not None:
            self._check_relators()

    # -- construction ----------------------------------------------------

    @classmethod
    def from_presentation(
        cls, pres: Presentation, name: str = "", bound: int = ENUMERATION_BOUND
    ) -> "FiniteGroup":
        table = _CosetTable(len(pres.generators), bound)
        action = table.enumerate(pres.relators)
        return cls(name or "G", pres.generators, action, presentation=pres)

    @classmethod
    def from_permutations(
        cls, gens: Sequence[tuple[str, Perm]], name: str = ""
    ) -> "FiniteGroup":
        n = len(gens[0][1])
        return cls._from_concrete(
            [(nm, p) for nm, p in gens],
            mul=perm_mul,
            inv=perm_inv,
            identity=perm_identity(n),
            render=cycles_to_str,
            name=name or "PermGroup",
        )

    @classmethod
    def from_signed_permutations(
        cls, gens: Sequence[tuple[str, tuple[Perm, int]]], name: str = ""
    ) -> "FiniteGroup":
        n = len(gens[0][1][0])

        def mul(a, b):
            return (perm_mul(a[0], b[0]), (a[1] + b[1]) % 2)

        def inv(a):
            return (perm_inv(a[0]), a[1])

        return cls._from_concrete(
            list(gens),
            mul=mul,
            inv=inv,
            identity=(perm_identity(n), 0),
            render=signed_perm_to_str,
            name=name or "SignedPermGroup",
        )

    @classmethod
    def _from_concrete(cls, gens, mul, inv, identity, render, name) -> "FiniteGroup":
        elems = [identity]
        pos = {identity: 0}
        queue = [identity]
        while queue:
            cur = queue.pop(0)
            for _, g in gens:
                nxt = mul(cur, g)
                if nxt not in pos:
                    if len(elems) >= ENUMERATION_BOUND:
                        raise GroupError("closure exceeded enumeration bound")
                    pos[nxt] = len(elems)
                    elems.append(nxt)
                    queue.append(nxt)
        action = []
        for e in elems:
            row = []
            for _, g in gens:
                row.append(pos[mul(e, g)])
                row.append(pos[mul(e, inv(g))])
            action.append(row)
        names = [render(e) for e in elems]
        return cls(
            name,
            tuple(nm for nm, _ in gens),
            action,
            render=lambda i: names[i],
        )

    def _reindex_bfs(self) -> None:
        order = self.order
        new_of_old: list[Optional[int]] = [None] * order
        new_of_old[0] = 0
        bfs = [0]
        words: list[Word] = [()]
        head = 0
        while head < len(bfs):
            cur = bfs[head]
            head += 1
            for x in range(2 * len(self.gen_names)):
                nxt = self._action[cur][x]
                if new_of_old[nxt] is None:
                    new_of_old[nxt] = len(bfs)
                    bfs.append(nxt)
                    words.append(words[head - 1] + (x,))
        if any(v is None for v in new_of_old):
            raise GroupError("generators do not generate the realized group")
        old_of_new = [0] * order
        for old, new in enumerate(new_of_old):
            old_of_new[new] = old
        self._action = [
            [new_of_old[self._action[old_of_new[e]][x]] for x in range(2 * len(self.gen_names))]
            for e in range(order)
        ]
        self._words = words
        if self._render is not None:
            ren = self._render
            names = [ren(old_of_new[e]) for e in range(order)]
            self._render = lambda i: names[i]

    def _apply_word(self, start: int, w: Word) -> int:
        cur = start
        for x in w:
            cur = self._action[cur][x]
        return cur

    def _check_relators(self) -> None:
        assert self.presentation is not None
        for rel in self.presentation.relators:
            for e in range(self.order):
                if self._apply_word(e, rel) != e:
                    raise GroupError("relator violated in realized group")

    # -- arithmetic --------------------------------------------------------

    @property
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return self._table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def conjugate(self, g: int, h: int) -> int:
        """h g h^-1."""
        return self.mul(self.mul(h, g), self.inv(h))

    def commutator(self, a: int, b: int) -> int:
        """a b a^-1 b^-1 (the convention of the source constructions)."""
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def element_order(self, a: int) -> int:
        n, cur = 1, a
        while cur != 0:
            cur = self.mul(cur, a)
            n += 1
        return n

    def evaluate_word(self, w: Word) -> int:
        return self._apply_word(0, w)

    def evaluate(self, text: str) -> int:
        """Evaluate a word string over the declared generator names."""
        return self.evaluate_word(parse_word(text, self.gen_names))

    def element_name(self, a: int) -> str:
        if self._render is not None:
            return self._render(a)
        if self._std_basis_ok():
            k, l, m = self.standard_form(a)
            return word_to_str((0,) * k + (2,) * l + (4,) * m, self.gen_names)
        return word_to_str(self._words[a], self.gen_names)

    def elements(self) -> range:
        return range(self.order)

    # -- standard form x^k y^l z^m ----------------------------------------

    def _std_basis_ok(self) -> bool:
        return self.presentation is not None and self.gen_names == ("x", "y", "z")

    def standard_form(self, a: int) -> tuple[int, int, int]:
        """The unique (k, l, m), 0<=k<=3, 0<=l,m<=1, with x^k y^l z^m = a."""
        if not self._std_basis_ok():
            raise GroupError("group has no declared x,y,z standard basis")
        if self._std_forms is None:
            forms: dict[int, tuple[int, int, int]] = {}
            for k in range(4):
                for l in range(2):
                    for m in range(2):
                        e = self.evaluate_word((0,) * k + (2,) * l + (4,) * m)
                        if e in forms:
                            raise GroupError("standard form is not unique")
                        forms[e] = (k, l, m)
            if len(forms) != self.order:
                raise GroupError("standard form does not cover the group")
            self._std_forms = forms
        return self._std_forms[a]

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"


# -- subgroups -----------------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    group: FiniteGroup
    members: frozenset[int]
    gens: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __contains__(self, a: int) -> bool:
        return a in self.members

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return other.members <= self.members


def subgroup_generate(group: FiniteGroup, gens: Sequence[int]) -> Subgroup:
    """Closure of the given elements; always contains the identity."""
    members = {0}
    queue = [0]
    gens = tuple(dict.fromkeys(gens))
    while queue:
        cur = queue.pop()
        for g in gens:
            for nxt in (group.mul(cur, g), group.mul(cur, group.inv(g))):
                if nxt not in members:
                    members.add(nxt)
                    queue.append(nxt)
    sub = Subgroup(group, frozenset(members), gens)
    if group.order % sub.order != 0:
        raise GroupError("subgroup order does not divide group order")
    return sub


def trivial_subgroup(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, frozenset({0}), ())


def full_subgroup(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, frozenset(group.elements()), group.generator_indices)


def subgroup_is_normal(sub: Subgroup) -> bool:
    g = sub.group
    return all(
        g.conjugate(h, a) in sub.members for a in g.elements() for h in sub.gens
    ) if sub.gens else True


def normalizes(group: FiniteGroup, g: int, sub: Subgroup) -> bool:
    return all(group.conjugate(h, g) in sub.members for h in sub.members)


def commutator_subgroup(group: FiniteGroup, sub: Optional[Subgroup] = None) -> Subgroup:
    members = sub.sorted_members() if sub else list(group.elements())
    comms = {group.commutator(a, b) for a in members for b in members}
    return subgroup_generate(group, sorted(comms))


def all_subgroups(group: FiniteGroup) -> list[Subgroup]:
    """Every subgroup, as closure of cyclic subgroups under pairwise joins.

    Exhaustive and deterministic; meant for the small groups here (order
    at most a few dozen), as used when scanning for genus-0 quotients.
    """
    seen: dict[frozenset[int], Subgroup] = {}
    frontier: list[Subgroup] = [trivial_subgroup(group)]
    seen[frozenset({0})] = frontier[0]
    for a in group.elements():
        sub = subgroup_generate(group, [a])
        if sub.members not in seen:
            seen[sub.members] = sub
            frontier.append(sub)
    cyclics = list(frontier)
    while frontier:
        nxt: list[Subgroup] = []
        for sub in frontier:
            for cyc in cyclics:
                if cyc.members <= sub.members:
                    continue
                joined = subgroup_generate(group, list(sub.gens) + list(cyc.gens))
                if joined.members not in seen:
                    seen[joined.members] = joined
                    nxt.append(joined)
        frontier = nxt
    return sorted(seen.values(), key=lambda s: (s.order, s.sorted_members()))


# -- characters ----------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """A homomorphism H -> mu_n stored as exponents mod n per element of H."""

    group: FiniteGroup
    domain: tuple[int, ...]  # sorted element indices of H
    modulus: int
    exps: tuple[int, ...]  # aligned with domain

    def __call__(self, a: int) -> int:
        return self.exps[self._pos(a)]

    def _pos(self, a: int) -> int:
        lo, hi = 0, len(self.domain)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.domain[mid] < a:
                lo = mid + 1
            else:
                hi = mid
        if lo == len(self.domain) or self.domain[lo] != a:
            raise GroupError(f"element {a} not in character domain")
        return lo

    def is_multiplicative(self) -> bool:
        g, n = self.group, self.modulus
        return all(
            (self(g.mul(a, b)) - self(a) - self(b)) % n == 0
            for a in self.domain
            for b in self.domain
        )


def character_group(group: FiniteGroup, sub: Optional[Subgroup] = None) -> list[Character]:
    """All homomorphisms H -> roots of unity, |result| = |H/[H,H]|.

    The modulus is the exponent of the abelianization (so A4 yields cube
    roots of unity, not a forced mu_4).
    """
    if sub is None:
        sub = full_subgroup(group)
    elems = sub.sorted_members()
    derived = commutator_subgroup(group, sub)
    # quotient Q = H / [H,H] as coset tables
    cosets: list[frozenset[int]] = []
    coset_of: dict[int, int] = {}
    for e in elems:
        if e in coset_of:
            continue
        cs = frozenset(group.mul(e, k) for k in derived.members)
        idx = len(cosets)
        cosets.append(cs)
        for x in cs:
            coset_of[x] = idx
    q_order = len(cosets)
    rep = [min(cs) for cs in cosets]

    def q_mul(i: int, j: int) -> int:
        return coset_of[group.mul(rep[i], rep[j])]

    # greedy generating set of Q
    gens: list[int] = []
    span = {0}
    for i in range(q_order):
        if i in span:
            continue
        gens.append(i)
        span = {0}
        frontier = [0]
        while frontier:
            cur = frontier.pop()
            for gq in gens:
                nxt = q_mul(cur, gq)
                if nxt not in span:
                    span.add(nxt)
                    frontier.append(nxt)
        if len(span) == q_order:
            break
    k = len(gens)
    if k == 0:
        chars = [Character(group, elems, 1, tuple(0 for _ in elems))]
        return chars

    # exponent-vector word for each coset by BFS over gens
    words: list[Optional[tuple[int, ...]]] = [None] * q_order
    words[0] = tuple(0 for _ in range(k))
    frontier = [0]
    while frontier:
        cur = frontier.pop(0)
        for gi, gq in enumerate(gens):
            nxt = q_mul(cur, gq)
            if words[nxt] is None:
                w = list(words[cur])
                w[gi] += 1
                words[nxt] = tuple(w)
                frontier.append(nxt)
    # relation lattice: schreier-style kernel generators of Z^k -> Q
    relations = []
    for i in range(q_order):
        for gi, gq in enumerate(gens):
            tgt = q_mul(i, gq)
            vec = list(words[i])
            vec[gi] += 1
            rel = [a - b for a, b in zip(vec, words[tgt])]
            if any(rel):
                relations.append(rel)
    if not relations:
        raise GroupError("finite abelian quotient yielded no relations")
    D, _, V = smith_normal_form(relations)
    divisors = [D[i][i] if i < len(D) else 0 for i in range(k)]
    if any(d == 0 for d in divisors):
        raise GroupError("abelianization relation lattice not full rank")
    modulus = lcm(*divisors) if divisors else 1

    chars: list[Character] = []
    for combo in itertools.product(*(range(d) for d in divisors)):
        exps = []
        for e in elems:
            w = words[coset_of[e]]
            image = [sum(w[i] * V[i][j] for i in range(k)) for j in range(k)]
            val = sum(image[j] * combo[j] * (modulus // divisors[j]) for j in range(k))
            exps.append(val % modulus)
        chars.append(Character(group, elems, modulus, tuple(exps)))
    chars.sort(key=lambda c: c.exps)
    if len(chars) != q_order:
        raise GroupError("character count does not match abelianization order")
    return chars


# -- morphisms -----------------------------------------------------------------


@dataclass(frozen=True)
class GroupMorphism:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple[int, ...]  # image of each source generator, by index
    mapping: tuple[int, ...] = field(repr=False, default=())

    def apply(self, a: int) -> int:
        return self.mapping[a]

    @classmethod
    def from_images(
        cls, source: FiniteGroup, target: FiniteGroup, images: Sequence[int]
    ) -> "GroupMorphism":
        if len(images) != len(source.gen_names):
            raise GroupError("one image per source generator required")
        mapping = []
        for e in source.elements():
            cur = target.identity
            for x in source._words[e]:
                img = images[x // 2]
                cur = target.mul(cur, img if x % 2 == 0 else target.inv(img))
            mapping.append(cur)
        return cls(source, target, tuple(images), tuple(mapping))


def check_morphism(m: GroupMorphism) -> tuple[bool, bool]:
    """Return (is_homomorphism, is_automorphism).

    Homomorphy is checked exhaustively on all pairs; when the source carries
    a presentation the relators are verified as well (the two agree).
    """
    src, tgt = m.source, m.target
    is_hom = all(
        m.apply(src.mul(a, b)) == tgt.mul(m.apply(a), m.apply(b))
        for a in src.elements()
        for b in src.elements()
    )
    if src.presentation is not None:
        relator_ok = all(
            _eval_image_word(m, rel) == tgt.identity for rel in src.presentation.relators
        )
        if relator_ok != is_hom:
            raise GroupError("relator check disagrees with exhaustive check")
    is_auto = (
        is_hom
        and src is tgt
        and len(set(m.mapping)) == src.order
    )
    return is_hom, is_auto


def _eval_image_word(m: GroupMorphism, w: Word) -> int:
    tgt = m.target
    cur = tgt.identity
    for x in w:
        img = m.images[x // 2]
        cur = tgt.mul(cur, img if x % 2 == 0 else tgt.inv(img))
    return cur
