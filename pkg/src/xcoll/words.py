"""Parsing of group words and permutations used in presentations and case files.

Words are flat tuples of word *letters*: letter ``2*i`` is generator ``i``,
letter ``2*i + 1`` its inverse.  The concrete grammar (juxtaposition for
products, ``^`` for integer powers and conjugation, ``[u,v]`` for commutators)
follows the conventions the source constructions are written in:

    a^b   = b^-1 a b
    [a,b] = a b a^-1 b^-1

Permutations are stored as tuples ``p`` with ``p[i]`` the image of point ``i``
(0-based); products compose right to left, ``(p*q)(i) = p(q(i))``.
"""

from __future__ import annotations

import re
from typing import Sequence

Word = tuple[int, ...]


class WordError(ValueError):
    """Raised for malformed words or permutation strings."""


def letter(gen_index: int, inverse: bool = False) -> int:
    return 2 * gen_index + (1 if inverse else 0)


def letter_inv(lt: int) -> int:
    return lt ^ 1


def invert_word(w: Sequence[int]) -> Word:
    return tuple(letter_inv(lt) for lt in reversed(w))


_TOKEN = re.compile(r"\s*([A-Za-z_]\w*|\^|-?\d+|[()\[\],*])")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise WordError(f"cannot tokenize word at ...{text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _WordParser:
    def __init__(self, tokens: list[str], gens: dict[str, int]):
        self.tokens = tokens
        self.gens = gens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise WordError("unexpected end of word")
        self.pos += 1
        return tok

    def parse_word(self, stop: tuple[str, ...] = ()) -> Word:
        out: list[int] = []
        while True:
            tok = self.peek()
            if tok is None or tok in stop:
                break
            if tok == "*":  # optional explicit product sign
                self.take()
                continue
            out.extend(self.parse_factor())
        return tuple(out)

    def parse_factor(self) -> Word:
        base = self.parse_primary()
        while self.peek() == "^":
            self.take()
            tok = self.peek()
            if tok is not None and re.fullmatch(r"-?\d+", tok):
                n = int(self.take())
                base = _word_power(base, n)
            else:
                by = self.parse_primary()
                base = invert_word(by) + base + by
        return base

    def parse_primary(self) -> Word:
        tok = self.take()
        if tok == "(":
            w = self.parse_word(stop=(")",))
            if self.take() != ")":
                raise WordError("unbalanced parenthesis")
            return w
        if tok == "[":
            u = self.parse_word(stop=(",",))
            if self.take() != ",":
                raise WordError("expected ',' in commutator")
            v = self.parse_word(stop=("]",))
            if self.take() != "]":
                raise WordError("unbalanced commutator bracket")
            return u + v + invert_word(u) + invert_word(v)
        if tok in self.gens:
            return (letter(self.gens[tok]),)
        raise WordError(f"unknown symbol {tok!r} in word")


def _word_power(w: Word, n: int) -> Word:
    if n >= 0:
        return w * n
    return invert_word(w) * (-n)


def parse_word(text: str, generators: Sequence[str]) -> Word:
    """Parse ``text`` into a word over ``generators``.

    The empty string (or "1") denotes the empty word.
    """
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    gens = {name: i for i, name in enumerate(generators)}
    parser = _WordParser(_tokenize(text), gens)
    w = parser.parse_word()
    if parser.peek() is not None:
        raise WordError(f"trailing input in word {text!r}")
    return w


def word_to_str(w: Word, generators: Sequence[str]) -> str:
    """Render a word with collected adjacent powers, e.g. ``x^2 y^-1``."""
    if not w:
        return "1"
    parts: list[str] = []
    i = 0
    while i < len(w):
        gen, inv = w[i] // 2, w[i] % 2
        run = 1
        while i + run < len(w) and w[i + run] == w[i]:
            run += 1
        exp = -run if inv else run
        name = generators[gen]
        parts.append(name if exp == 1 else f"{name}^{exp}")
        i += run
    return " ".join(parts)


# -- permutations -------------------------------------------------------------

Perm = tuple[int, ...]


def perm_mul(p: Perm, q: Perm) -> Perm:
    """Right-to-left composition: apply q first, then p."""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, img in enumerate(p):
        out[img] = i
    return tuple(out)


def perm_identity(n: int) -> Perm:
    return tuple(range(n))


def parse_cycles(text: str, n: int) -> Perm:
    """Parse cycle notation like ``(12)(34)`` on points 1..n (single digits).

    ``e``, ``1``, ``id`` and ``()`` all denote the identity.
    """
    text = text.strip()
    if text in ("", "e", "id", "1", "()"):
        return perm_identity(n)
    if not re.fullmatch(r"(\(\d+\))+", text.replace(" ", "")):
        raise WordError(f"bad cycle notation {text!r}")
    images = list(range(n))
    for cyc in re.findall(r"\((\d+)\)", text.replace(" ", "")):
        pts = [int(ch) - 1 for ch in cyc]
        if len(set(pts)) != len(pts):
            raise WordError(f"repeated point in cycle ({cyc})")
        if any(not 0 <= p < n for p in pts):
            raise WordError(f"point out of range in cycle ({cyc})")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            images[a] = b
    return tuple(images)


def cycles_to_str(p: Perm) -> str:
    seen, parts = set(), []
    for start in range(len(p)):
        if start in seen or p[start] == start:
            seen.add(start)
            continue
        cyc, cur = [], start
        while cur not in seen:
            seen.add(cur)
            cyc.append(cur)
            cur = p[cur]
        parts.append("(" + "".join(str(c + 1) for c in cyc) + ")")
    return "".join(parts) if parts else "e"


_PAIR = re.compile(r"\(\s*(.*?)\s*,\s*([01])\s*\)\s*$")


def parse_signed_perm(text: str, n: int) -> tuple[Perm, int]:
    """Parse an element of Sym(n) x Z/2 written like ``((12)(34), 1)``."""
    m = _PAIR.match(text.strip())
    if not m:
        raise WordError(f"bad signed permutation {text!r}")
    return parse_cycles(m.group(1), n), int(m.group(2))


def signed_perm_to_str(el: tuple[Perm, int]) -> str:
    return f"({cycles_to_str(el[0])}, {el[1]})"
