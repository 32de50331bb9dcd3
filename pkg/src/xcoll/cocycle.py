"""Exact algebra of mu_n-valued cochains on a finite group with trivial action.

Values are roots of unity stored as exponents mod n (default n = 4, enough
for all the obstruction classes that appear here); nothing is ever
represented in floating point.  Provides cocycle tests, products,
differentials, coboundary solving with witnesses, class orders in H^2, and
evaluation of closed-form obstruction formulas given on standard forms
x^k y^l z^m.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

import numpy as np

from .groups import FiniteGroup
from .intlat import _unit_lift, solve_mod, xgcd

DEFAULT_MODULUS = 4


class CocycleError(ValueError):
    """Raised for modulus mismatches or misused cochains."""


@dataclass(frozen=True)
class Cochain1:
    """beta: G -> mu_n as an exponent table indexed by element."""

    group: FiniteGroup
    modulus: int
    exps: tuple[int, ...]

    def __post_init__(self):
        if len(self.exps) != self.group.order:
            raise CocycleError("one exponent per group element required")

    @classmethod
    def make(cls, group: FiniteGroup, modulus: int, exps: Sequence[int]) -> "Cochain1":
        return cls(group, modulus, tuple(int(e) % modulus for e in exps))

    @classmethod
    def trivial(cls, group: FiniteGroup, modulus: int = DEFAULT_MODULUS) -> "Cochain1":
        return cls(group, modulus, (0,) * group.order)

    def __call__(self, g: int) -> int:
        return self.exps[g]

    def is_character(self) -> bool:
        g, n = self.group, self.modulus
        return all(
            (self.exps[g.mul(a, b)] - self.exps[a] - self.exps[b]) % n == 0
            for a in g.elements()
            for b in g.elements()
        )


@dataclass(frozen=True)
class Cochain2:
    """eta: G x G -> mu_n as an exponent table indexed by element pairs."""

    group: FiniteGroup
    modulus: int
    exps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.group.order
        if len(self.exps) != n or any(len(row) != n for row in self.exps):
            raise CocycleError("exponent table must be |G| x |G|")

    @classmethod
    def make(cls, group: FiniteGroup, modulus: int, table) -> "Cochain2":
        return cls(
            group,
            modulus,
            tuple(tuple(int(v) % modulus for v in row) for row in table),
        )

    @classmethod
    def trivial(cls, group: FiniteGroup, modulus: int = DEFAULT_MODULUS) -> "Cochain2":
        row = (0,) * group.order
        return cls(group, modulus, (row,) * group.order)

    def __call__(self, g: int, h: int) -> int:
        return self.exps[g][h]

    def array(self) -> np.ndarray:
        return np.array(self.exps, dtype=np.int64)

    def is_trivial(self) -> bool:
        return all(v == 0 for row in self.exps for v in row)


def _check_compatible(a, b) -> None:
    if a.group is not b.group:
        raise CocycleError("cochains on different groups")
    if a.modulus != b.modulus:
        raise CocycleError("modulus mismatch")


def _mul_table(group: FiniteGroup) -> np.ndarray:
    cached = getattr(group, "_numpy_mul", None)
    if cached is None:
        cached = np.array(
            [[group.mul(a, b) for b in group.elements()] for a in group.elements()],
            dtype=np.int64,
        )
        group._numpy_mul = cached
    return cached


def differential1(b: Cochain1) -> Cochain2:
    """d(beta)(g, h) = beta(g) + beta(h) - beta(gh) in exponents mod n."""
    g = b.group
    n = b.modulus
    beta = np.array(b.exps, dtype=np.int64)
    mul = _mul_table(g)
    table = (beta[:, None] + beta[None, :] - beta[mul]) % n
    return Cochain2.make(g, n, table)


def is_cocycle(e: Cochain2) -> bool:
    """Full 2-cocycle identity over all triples (no normalization assumed)."""
    n = e.modulus
    t = e.array()
    mul = _mul_table(e.group)
    lhs = t[:, :, None] + t[mul, :]  # e(g,h) + e(gh,k)
    rhs = t[None, :, :] + t[:, mul]  # e(h,k) + e(g,hk)
    return bool(np.all((lhs - rhs) % n == 0))


def multiply(a: Cochain2, b: Cochain2) -> Cochain2:
    _check_compatible(a, b)
    return Cochain2.make(a.group, a.modulus, (a.array() + b.array()) % a.modulus)


def invert(a: Cochain2) -> Cochain2:
    return Cochain2.make(a.group, a.modulus, (-a.array()) % a.modulus)


def power(a: Cochain2, t: int) -> Cochain2:
    return Cochain2.make(a.group, a.modulus, (t * a.array()) % a.modulus)


def is_coboundary(e: Cochain2) -> Optional[Cochain1]:
    """A witness beta with d(beta) = e exactly, or None if there is none.

    Solved as an exact linear system over Z/n: |G| unknowns, |G|^2 equations.
    """
    if not is_cocycle(e):
        raise CocycleError("coboundary test requires a cocycle")
    g = e.group
    n = e.modulus
    order = g.order
    mul = _mul_table(g)
    columns = []
    for w in range(order):
        col = np.zeros((order, order), dtype=np.int64)
        col[w, :] += 1
        col[:, w] += 1
        col -= (mul == w).astype(np.int64)
        columns.append([int(v) % n for v in col.ravel()])
    target = [int(v) for v in e.array().ravel()]
    sol = solve_mod(columns, target, n)
    if sol is None:
        return None
    witness = Cochain1.make(g, n, sol)
    if differential1(witness).exps != e.exps:
        raise CocycleError("internal error: witness differential mismatch")
    return witness


def class_order(e: Cochain2) -> int:
    """Smallest t >= 1 with e^t a coboundary; divides the modulus."""
    if not is_cocycle(e):
        raise CocycleError("class order requires a cocycle")
    n = e.modulus
    for t in sorted(d for d in range(1, n + 1) if n % d == 0):
        if is_coboundary(power(e, t)) is not None:
            return t
    raise CocycleError("internal error: e^n must be a coboundary")


# -- closed-form obstruction formulas -----------------------------------------

_ALLOWED_VARS = ("k", "l", "m", "kp", "lp", "mp")


def _eval_expr(node: ast.AST, env: dict[str, int]) -> int:
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, env)
    if isinstance(node, ast.BinOp):
        left = _eval_expr(node.left, env)
        right = _eval_expr(node.right, env)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Mod):
            return left % right
        if isinstance(node.op, ast.Pow):
            if right < 0:
                raise CocycleError("negative powers not allowed in formulas")
            return left**right
    if isinstance(node, ast.UnaryOp):
        val = _eval_expr(node.operand, env)
        if isinstance(node.op, ast.USub):
            return -val
        if isinstance(node.op, ast.UAdd):
            return val
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name) and node.id in _ALLOWED_VARS:
        return env[node.id]
    raise CocycleError(f"disallowed syntax in exponent formula: {ast.dump(node)}")


@dataclass(frozen=True)
class ObstructionFormula:
    """Closed-form exponent rule on standard-form pairs, e.g. "2*m*(kp+lp) - l*kp".

    The expression is an integer polynomial in k, l, m (first element) and
    kp, lp, mp (second element); the value of the cochain is zeta_n^expr.
    """

    expression: str
    modulus: int = DEFAULT_MODULUS
    citation: str = ""

    def __post_init__(self):
        tree = ast.parse(self.expression, mode="eval")
        env = {v: 0 for v in _ALLOWED_VARS}
        _eval_expr(tree, env)  # validates the syntax
        object.__setattr__(self, "_tree", tree)

    def exponent(self, first: tuple[int, int, int], second: tuple[int, int, int]) -> int:
        k, l, m = first
        kp, lp, mp = second
        env = {"k": k, "l": l, "m": m, "kp": kp, "lp": lp, "mp": mp}
        return _eval_expr(self._tree, env) % self.modulus  # type: ignore[attr-defined]


def evaluate_formula(f: ObstructionFormula, group: FiniteGroup) -> Cochain2:
    """Expand a standard-form rule to a full exponent table."""
    forms = [group.standard_form(a) for a in group.elements()]
    table = [
        [f.exponent(forms[a], forms[b]) for b in group.elements()]
        for a in group.elements()
    ]
    return Cochain2.make(group, f.modulus, table)


def evaluate_formula_1(f: ObstructionFormula, group: FiniteGroup) -> Cochain1:
    """Expand a one-variable rule (k, l, m only) to a 1-cochain table."""
    forms = [group.standard_form(a) for a in group.elements()]
    exps = [f.exponent(forms[a], (0, 0, 0)) for a in group.elements()]
    return Cochain1.make(group, f.modulus, exps)


# -- H^2(G, mu_n) --------------------------------------------------------------


def _howell_reduce(
    rows: list[np.ndarray], width: int, n: int
) -> tuple[dict[int, np.ndarray], list[np.ndarray]]:
    """Howell-style echelon on the first ``width`` columns of numpy rows mod n.

    Returns (pivots by column, rows fully reduced to zero on those columns).
    """
    pivots: dict[int, np.ndarray] = {}
    zero_rows: list[np.ndarray] = []
    stack = [r % n for r in rows]
    while stack:
        v = stack.pop()
        while True:
            nz = np.nonzero(v[:width])[0]
            if not nz.size:
                zero_rows.append(v)
                break
            j = int(nz[0])
            if j not in pivots:
                u, _ = _unit_lift(int(v[j]), n)
                if u != 1:
                    v = (u * v) % n
                pivots[j] = v
                piv = int(v[j])
                ann = n // gcd(piv, n)
                if ann != n:
                    av = (ann * v) % n
                    av[j] = 0
                    stack.append(av)
                break
            pv = pivots[j]
            a, b = int(pv[j]), int(v[j])
            if b % a == 0:
                v = (v - (b // a) * pv) % n
            else:
                g, s, t = xgcd(a, b)
                new_pv = (s * pv + t * v) % n
                v = ((a // g) * v - (b // g) * pv) % n
                del pivots[j]
                stack.append(new_pv)
    return pivots, zero_rows


def _span_size(rows: list[np.ndarray], n: int) -> int:
    if not rows:
        return 1
    width = rows[0].shape[0]
    pivots, _ = _howell_reduce([r.copy() for r in rows], width, n)
    size = 1
    for j, row in pivots.items():
        size *= n // gcd(int(row[j]), n)
    return size


def _d2_kernel(group: FiniteGroup, n: int) -> list[np.ndarray]:
    """Generators of the 2-cocycle space Z^2(G, Z/n) as flat |G|^2-vectors."""
    order = group.order
    q = order * order
    mul = _mul_table(group)
    rows = []
    for a in range(order):
        for b in range(order):
            # d2 of the unit cochain at (a, b), over triples (g, h, k):
            # [h=a][k=b] - [gh=a][k=b] + [g=a][hk=b] - [g=a][h=b]
            col = np.zeros((order, order, order), dtype=np.int64)
            col[:, a, b] += 1
            col[mul == a, b] -= 1
            col[a, :, :] += (mul == b).astype(np.int64)
            col[a, b, :] -= 1
            aug = np.zeros(order**3 + q, dtype=np.int64)
            aug[: order**3] = col.reshape(-1) % n
            aug[order**3 + a * order + b] = 1
            rows.append(aug)
    _, zero = _howell_reduce(rows, order**3, n)
    return [r[order**3 :] % n for r in zero]


def h2_group(group: FiniteGroup, n: int = DEFAULT_MODULUS) -> list[int]:
    """Invariant factors of H^2(G, mu_n) = Z^2/B^2, exactly.

    The structure is read off from exact span sizes of p-power multiples of
    the cocycle space relative to the coboundary space.
    """
    order = group.order
    kernel = _d2_kernel(group, n)
    boundary = []
    for w in range(order):
        beta = [0] * order
        beta[w] = 1
        b2 = differential1(Cochain1.make(group, n, beta))
        boundary.append(b2.array().reshape(-1) % n)
    primes = []
    nn = n
    p = 2
    while nn > 1:
        if nn % p == 0:
            e = 0
            while nn % p == 0:
                nn //= p
                e += 1
            primes.append((p, e))
        p += 1
    factors: dict[int, list[int]] = {}
    for p, e in primes:
        sizes = []
        for i in range(e + 1):
            gens = [((p**i) * k) % n for k in kernel] + boundary
            sizes.append(_span_size(gens, n))
        cs = []
        for i in range(e):
            ratio = sizes[i] // sizes[i + 1]
            c = 0
            while ratio > 1:
                if ratio % p:
                    raise CocycleError("internal error: non p-power layer ratio")
                ratio //= p
                c += 1
            cs.append(c)
        cs.append(0)
        for j in range(1, e + 1):
            count = cs[j - 1] - cs[j]
            if count:
                factors.setdefault(p, []).extend([p**j] * count)
    parts = [sorted(v, reverse=True) for v in factors.values()]
    length = max((len(v) for v in parts), default=0)
    invariants = []
    for i in range(length):
        d = 1
        for v in parts:
            if i < len(v):
                d *= v[i]
        invariants.append(d)
    return sorted(invariants)
