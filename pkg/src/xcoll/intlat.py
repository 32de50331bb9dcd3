"""Exact linear algebra over Z and Z/n.

Three tools, all based on integer row reduction with exact arithmetic:

* ``IntLattice`` -- a sublattice of Z^n kept in echelon form, with exact
  membership tests (divisor-class equivalence is lattice membership).
* ``smith_normal_form`` -- SNF with transformation matrices for small
  integer matrices (abelianization structure, character enumeration).
* ``ModMatrix`` -- Howell-style reduction over Z/n for solving linear
  systems mod n with witnesses, and for exact span sizes (cocycle algebra).
"""

from __future__ import annotations

from math import gcd
from typing import Iterable, Optional, Sequence


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with g = gcd(a, b) >= 0 and s*a + t*b = g."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


class IntLattice:
    """Sublattice of Z^n with incremental generators and membership tests.

    The basis is kept in row-echelon form; adding a vector and testing
    membership are both exact integer reductions (no rationals anywhere),
    so torsion phenomena like 2D ~ 0 with D != 0 are preserved.
    """

    def __init__(self, n: int):
        self.n = n
        self.rows: list[list[int]] = []
        self.pivot_cols: list[int] = []

    def add(self, vec: Sequence[int]) -> None:
        if len(vec) != self.n:
            raise ValueError("vector length mismatch")
        v = list(vec)
        j = 0
        while True:
            while j < self.n and v[j] == 0:
                j += 1
            if j == self.n:
                return
            idx = self._row_at(j)
            if idx is None:
                if v[j] < 0:
                    v = [-c for c in v]
                pos = self._insert_pos(j)
                self.rows.insert(pos, v)
                self.pivot_cols.insert(pos, j)
                return
            row = self.rows[idx]
            a, b = row[j], v[j]
            if b % a == 0:
                q = b // a
                for t in range(j, self.n):
                    v[t] -= q * row[t]
            else:
                g, s, t = xgcd(a, b)
                ag, bg = a // g, b // g
                for c in range(j, self.n):
                    rc, vc = row[c], v[c]
                    row[c] = s * rc + t * vc
                    v[c] = -bg * rc + ag * vc

    def extend(self, vecs: Iterable[Sequence[int]]) -> None:
        for v in vecs:
            self.add(v)

    def _insert_pos(self, col: int) -> int:
        lo, hi = 0, len(self.pivot_cols)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.pivot_cols[mid] < col:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _row_at(self, col: int) -> Optional[int]:
        pos = self._insert_pos(col)
        if pos < len(self.pivot_cols) and self.pivot_cols[pos] == col:
            return pos
        return None

    def reduce(self, vec: Sequence[int]) -> list[int]:
        """Reduce ``vec`` against the basis; a zero result means membership."""
        v = list(vec)
        for idx, j in enumerate(self.pivot_cols):
            if v[j] == 0 or v[j] % self.rows[idx][j] != 0:
                continue
            row = self.rows[idx]
            q = v[j] // row[j]
            for t in range(j, self.n):
                v[t] -= q * row[t]
        return v

    def __contains__(self, vec: Sequence[int]) -> bool:
        return all(c == 0 for c in self.reduce(vec))

    def rank(self) -> int:
        return len(self.rows)


def _identity(k: int) -> list[list[int]]:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def smith_normal_form(
    mat: Sequence[Sequence[int]],
) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (D, U, V) with U*mat*V = D, D diagonal with d_i | d_{i+1} >= 0.

    U and V are unimodular.  Intended for the small matrices arising from
    abelianization and relation lattices (dimensions well under 100).
    """
    A = [list(row) for row in mat]
    m = len(A)
    n = len(A[0]) if m else 0
    U, V = _identity(m), _identity(n)

    def swap_rows(i1: int, i2: int) -> None:
        A[i1], A[i2] = A[i2], A[i1]
        U[i1], U[i2] = U[i2], U[i1]

    def swap_cols(j1: int, j2: int) -> None:
        for M in (A, V):
            for row in M:
                row[j1], row[j2] = row[j2], row[j1]

    def negate_row(i: int) -> None:
        A[i] = [-c for c in A[i]]
        U[i] = [-c for c in U[i]]

    def rot_rows(i1: int, i2: int, col: int) -> None:
        # clear A[i2][col] against the pivot A[i1][col]; when the pivot does
        # not divide, a unimodular 2x2 turns the pair into (gcd, 0)
        a, b = A[i1][col], A[i2][col]
        if b % a == 0:
            q = b // a
            for M in (A, U):
                r1, r2 = M[i1], M[i2]
                for c in range(len(r1)):
                    r2[c] -= q * r1[c]
            return
        g, s, t = xgcd(a, b)
        ag, bg = a // g, b // g
        for M in (A, U):
            r1, r2 = M[i1], M[i2]
            for c in range(len(r1)):
                x, y = r1[c], r2[c]
                r1[c] = s * x + t * y
                r2[c] = -bg * x + ag * y

    def rot_cols(j1: int, j2: int, row: int) -> None:
        a, b = A[row][j1], A[row][j2]
        if b % a == 0:
            q = b // a
            for M in (A, V):
                for r in M:
                    r[j2] -= q * r[j1]
            return
        g, s, t = xgcd(a, b)
        ag, bg = a // g, b // g
        for M in (A, V):
            for r in M:
                x, y = r[j1], r[j2]
                r[j1] = s * x + t * y
                r[j2] = -bg * x + ag * y

    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        if pivot[0] != t:
            swap_rows(t, pivot[0])
        if pivot[1] != t:
            swap_cols(t, pivot[1])
        while True:
            for i in range(t + 1, m):
                if A[i][t]:
                    rot_rows(t, i, t)
            for j in range(t + 1, n):
                if A[t][j]:
                    rot_cols(t, j, t)
            if all(A[i][t] == 0 for i in range(t + 1, m)) and all(
                A[t][j] == 0 for j in range(t + 1, n)
            ):
                # enforce divisibility of the whole remaining block
                bad = None
                d = A[t][t]
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % d != 0:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                # fold the offending row into row t and re-clear
                for M in (A, U):
                    for c in range(len(M[t])):
                        M[t][c] += M[bad][c]
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    return A, U, V


# -- arithmetic over Z/n -------------------------------------------------------


def _inv_mod(a: int, n: int) -> int:
    g, s, _ = xgcd(a, n)
    if g != 1:
        raise ValueError(f"{a} not invertible mod {n}")
    return s % n


def _unit_lift(a: int, n: int) -> tuple[int, int]:
    """Return (u, g) with u a unit mod n and u*a = g = gcd(a, n) mod n."""
    g = gcd(a, n)
    if g == 0:
        return 1, 0
    step = n // g
    g0, s, _ = xgcd(a, n)
    u = s % n
    while gcd(u, n) != 1:
        u = (u + step) % n
    return u, g0


class ModMatrix:
    """Row span of vectors over Z/n in Howell-style echelon form.

    Pivot entries are kept as divisors of n (normalized by unit multiples)
    and annihilator rows are retained, so membership tests with witness
    coefficients and span sizes are exact for composite n.
    """

    def __init__(self, width: int, n: int, tail_len: int = 0):
        if n < 1:
            raise ValueError("modulus must be positive")
        self.width = width
        self.n = n
        self.tail_len = tail_len
        self.rows: list[list[int]] = []
        self.tails: list[list[int]] = []
        self.pivot_cols: list[int] = []

    def add(self, vec: Sequence[int], tail: Optional[Sequence[int]] = None) -> None:
        t = [c % self.n for c in tail] if tail is not None else [0] * self.tail_len
        if len(t) != self.tail_len:
            raise ValueError("tail length mismatch")
        self._insert([c % self.n for c in vec], t)

    def _insert(self, v: list[int], tail: list[int]) -> None:
        n = self.n
        j = 0
        while True:
            while j < self.width and v[j] == 0:
                j += 1
            if j == self.width:
                return
            idx = self._row_at(j)
            if idx is None:
                u, _ = _unit_lift(v[j], n)
                if u != 1:
                    v = [(u * c) % n for c in v]
                    tail = [(u * c) % n for c in tail]
                # pivot is now gcd(old pivot, n), a divisor of n
                pos = self._insert_pos(j)
                self.rows.insert(pos, v)
                self.tails.insert(pos, tail)
                self.pivot_cols.insert(pos, j)
                piv = v[j]
                ann = n // gcd(piv, n)
                if ann != n:
                    av = [(ann * c) % n for c in v]
                    at = [(ann * c) % n for c in tail]
                    av[j] = 0
                    self._insert(av, at)
                return
            row, rtail = self.rows[idx], self.tails[idx]
            a, b = row[j], v[j]
            if b % a == 0:
                q = (b // a) % n
                v = [(vc - q * rc) % n for vc, rc in zip(v, row)]
                tail = [(vc - q * rc) % n for vc, rc in zip(tail, rtail)]
            else:
                g, s, t = xgcd(a, b)
                new_row = [(s * rc + t * vc) % n for rc, vc in zip(row, v)]
                new_tail = [(s * rc + t * vc) % n for rc, vc in zip(rtail, tail)]
                bg, ag = b // g, a // g
                v = [(ag * vc - bg * rc) % n for rc, vc in zip(row, v)]
                tail = [(ag * vc - bg * rc) % n for rc, vc in zip(rtail, tail)]
                self.rows.pop(idx)
                self.tails.pop(idx)
                self.pivot_cols.pop(idx)
                self._insert(new_row, new_tail)

    def _insert_pos(self, col: int) -> int:
        lo, hi = 0, len(self.pivot_cols)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.pivot_cols[mid] < col:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _row_at(self, col: int) -> Optional[int]:
        pos = self._insert_pos(col)
        if pos < len(self.pivot_cols) and self.pivot_cols[pos] == col:
            return pos
        return None

    def reduce(self, vec: Sequence[int]) -> tuple[list[int], list[int]]:
        """Reduce vec mod the span; returns (residue, coefficient tail).

        A zero residue means membership, and the tail gives coefficients of
        the original generators (in the order they were added) expressing vec.
        """
        n = self.n
        v = [c % n for c in vec]
        acc = [0] * self.tail_len
        for idx, j in enumerate(self.pivot_cols):
            if v[j] == 0:
                continue
            a = self.rows[idx][j]  # a divides n by normalization
            if v[j] % a != 0:
                continue
            q = (v[j] // a) % (n // a) if a < n else 0
            row, rtail = self.rows[idx], self.tails[idx]
            v = [(vc - q * rc) % n for vc, rc in zip(v, row)]
            acc = [(ac + q * rc) % n for ac, rc in zip(acc, rtail)]
        return v, acc

    def __contains__(self, vec: Sequence[int]) -> bool:
        residue, _ = self.reduce(vec)
        return all(c == 0 for c in residue)

    def span_size(self) -> int:
        size = 1
        for idx in range(len(self.rows)):
            piv = self.rows[idx][self.pivot_cols[idx]]
            size *= self.n // gcd(piv, self.n)
        return size


def solve_mod(
    columns: Sequence[Sequence[int]], target: Sequence[int], n: int
) -> Optional[list[int]]:
    """Solve sum_i x_i * columns[i] = target over Z/n; None if infeasible."""
    width = len(target)
    k = len(columns)
    mm = ModMatrix(width, n, tail_len=k)
    for i, col in enumerate(columns):
        tail = [0] * k
        tail[i] = 1
        mm.add(col, tail)
    residue, coeffs = mm.reduce(target)
    if any(residue):
        return None
    return coeffs
