"""Case file schema: parsing one family's data into a resolved bundle.

Case files are TOML.  Group elements are written as words over the declared
generators (presentation groups) or in cycle notation (permutation groups,
with ``((12)(34), 1)`` for signed permutations).  Divisor expressions use a
small term language evaluated against a specific quotient curve:

    fiber(j)            whole reduced fiber over branch j (1-based)
    pt(j, 'rep')        the fiber-j point whose double coset contains rep
    orbit(H, j, 'rep')  H-orbit of the fiber-j point containing rep
    fixpart(j, 'w')     points of fiber j fixed by the element w
    freepart(j, 'w')    points of fiber j not fixed by w
    gfiber(H)           generic fiber of the genus-0 quotient by H
    gpoint              a point class of the current genus-0 curve
    pull(H, j, 'rep')   pullback of the fiber-j point of C/H containing rep
    img(expr)           reduced image on the current curve of a top-curve class

joined by ``+``, ``-`` and integer multiples like ``2*W``.  Named divisors
defined earlier in the same [divisors.*] table can be referenced by name.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from ..covering import (
    Curve,
    RamificationDatum,
    Tower,
    parse_ram_type,
)
from ..divlat import (
    DivisorClass,
    Relation,
    fiber_class,
    gp_class,
    points_class,
    pullback,
    pt_class,
    reduced_image,
)
from ..groups import (
    FiniteGroup,
    Presentation,
    Subgroup,
    full_subgroup,
    subgroup_generate,
)
from ..words import parse_cycles, parse_signed_perm, parse_word

SCHEMA_VERSION = 1


class CaseError(ValueError):
    """Raised for unparsable or unresolvable case files."""


# -- group and element resolution ---------------------------------------------


def _realize_group(spec: dict) -> FiniteGroup:
    kind = spec.get("kind")
    name = spec.get("name", "G")
    if kind == "presentation":
        pres = Presentation.parse(spec["generators"], spec["relators"])
        return FiniteGroup.from_presentation(pres, name)
    if kind == "permutation":
        points = int(spec["points"])
        gens = [(nm, parse_cycles(p, points)) for nm, p in spec["generators"]]
        return FiniteGroup.from_permutations(gens, name)
    if kind == "signed_permutation":
        points = int(spec["points"])
        gens = [(nm, parse_signed_perm(p, points)) for nm, p in spec["generators"]]
        return FiniteGroup.from_signed_permutations(gens, name)
    raise CaseError(f"unknown group kind {kind!r}")


@dataclass
class GroupContext:
    group: FiniteGroup
    kind: str
    points: int = 0
    _names: Optional[dict[str, int]] = None

    def element(self, text: str) -> int:
        text = text.strip()
        if self.kind == "presentation":
            return self.group.evaluate_word(parse_word(text, self.group.gen_names))
        if self._names is None:
            self._names = {
                self.group.element_name(i): i for i in self.group.elements()
            }
        if self.kind == "permutation":
            from ..words import cycles_to_str

            key = cycles_to_str(parse_cycles(text, self.points))
        else:
            from ..words import signed_perm_to_str

            key = signed_perm_to_str(parse_signed_perm(text, self.points))
        if key not in self._names:
            raise CaseError(f"element {text!r} not found in group")
        return self._names[key]


# -- divisor expression language -----------------------------------------------

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_]\w*|'[^']*'|[()+\-*,])")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise CaseError(f"cannot tokenize divisor expression at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


@dataclass
class DivisorContext:
    """Everything a divisor expression may refer to."""

    gctx: GroupContext
    tower: Tower
    curve: Curve  # the curve the class lives on
    top: Curve  # top curve of the tower (for img)
    subgroups: dict[str, Subgroup]
    named: dict[str, DivisorClass]  # named classes on the *top* curve


class _DivisorParser:
    def __init__(self, tokens: list[str], ctx: DivisorContext):
        self.tokens = tokens
        self.ctx = ctx
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expect: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise CaseError("unexpected end of divisor expression")
        if expect is not None and tok != expect:
            raise CaseError(f"expected {expect!r}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> DivisorClass:
        out = self.parse_term(negate=False)
        while self.peek() in ("+", "-"):
            op = self.take()
            term = self.parse_term(negate=(op == "-"))
            out = out + term
        if self.peek() is not None:
            raise CaseError(f"trailing input {self.peek()!r} in divisor expression")
        return out

    def parse_term(self, negate: bool) -> DivisorClass:
        sign = -1 if negate else 1
        tok = self.peek()
        if tok == "-":
            self.take()
            sign, tok = -sign, self.peek()
        coeff = 1
        if tok is not None and tok.isdigit():
            coeff = int(self.take())
            self.take("*")
        atom = self.parse_atom()
        return (sign * coeff) * atom

    def parse_atom(self) -> DivisorClass:
        tok = self.take()
        ctx = self.ctx
        if tok == "(":
            inner = self.parse_inner_expr()
            self.take(")")
            return inner
        if tok == "gpoint":
            return gp_class(ctx.curve, ctx.curve.subgroup)
        if tok == "img":
            self.take("(")
            toks = self._collect_expr_arg()
            self.take(")")
            top_ctx = DivisorContext(
                ctx.gctx, ctx.tower, ctx.top, ctx.top, ctx.subgroups, ctx.named
            )
            inner = _DivisorParser(list(toks), top_ctx).parse_inner_only()
            return reduced_image(ctx.top, ctx.curve, inner)
        if self.peek() != "(":
            if tok in ctx.named:
                cls = ctx.named[tok]
                if cls.curve.subgroup.members != ctx.curve.subgroup.members:
                    raise CaseError(
                        f"named divisor {tok!r} lives on a different curve;"
                        " wrap it in img(...)"
                    )
                return cls
            raise CaseError(f"unresolved divisor reference {tok!r}")
        self.take("(")
        args = self.parse_args()
        self.take(")")
        return self.apply(tok, args)

    def parse_inner_expr(self) -> DivisorClass:
        out = self.parse_term(negate=False)
        while self.peek() in ("+", "-"):
            op = self.take()
            out = out + self.parse_term(negate=(op == "-"))
        return out

    def parse_args(self) -> list:
        args: list = []
        depth_guard = 0
        while self.peek() != ")":
            depth_guard += 1
            if depth_guard > 64:
                raise CaseError("runaway argument list")
            tok = self.peek()
            if tok.isdigit():
                args.append(("int", int(self.take())))
            elif tok.startswith("'"):
                args.append(("str", self.take()[1:-1]))
            else:
                args.append(("name", self.take()))
            if self.peek() == ",":
                self.take()
        return args

    def _collect_expr_arg(self):
        start = self.pos
        depth = 0
        while self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            if tok == "(":
                depth += 1
            elif tok == ")":
                if depth == 0:
                    break
                depth -= 1
            elif tok == "," and depth == 0:
                break
            self.pos += 1
        return self.tokens[start : self.pos]

    def apply(self, func: str, args: list) -> DivisorClass:
        ctx = self.ctx
        curve = ctx.curve

        def arg_int(i: int) -> int:
            kind, val = args[i]
            if kind != "int":
                raise CaseError(f"{func}: argument {i + 1} must be an integer")
            return val

        def arg_str(i: int) -> str:
            kind, val = args[i]
            if kind not in ("str", "name"):
                raise CaseError(f"{func}: argument {i + 1} must be quoted text or a name")
            return val

        def arg_sub(i: int) -> Subgroup:
            kind, val = args[i]
            if kind != "name" or val not in ctx.subgroups:
                raise CaseError(f"{func}: unknown subgroup reference in argument {i + 1}")
            return ctx.subgroups[val]

        if func == "fiber":
            return fiber_class(curve, arg_int(0) - 1)
        if func == "pt":
            j = arg_int(0) - 1
            rep = ctx.gctx.element(arg_str(1))
            return pt_class(curve, curve.point_containing(j, rep))
        if func == "orbit":
            sub = arg_sub(0)
            j = arg_int(1) - 1
            rep_point = curve.point_containing(j, ctx.gctx.element(arg_str(2)))
            orbit = {rep_point.index}
            frontier = [rep_point]
            while frontier:
                cur = frontier.pop()
                for w in sorted(sub.members):
                    img = curve.point_image(w, cur)
                    if img.index not in orbit:
                        orbit.add(img.index)
                        frontier.append(img)
            pts = [curve.fiber_points(j)[i] for i in sorted(orbit)]
            return points_class(curve, pts)
        if func in ("fixpart", "freepart"):
            j = arg_int(0) - 1
            w = ctx.gctx.element(arg_str(1))
            pts = [
                p
                for p in curve.fiber_points(j)
                if (curve.point_image(w, p) == p) == (func == "fixpart")
            ]
            return points_class(curve, pts)
        if func == "gfiber":
            return gp_class(curve, arg_sub(0))
        if func == "pull":
            sub = arg_sub(0)
            j = arg_int(1) - 1
            quotient = ctx.tower.curve(sub)
            q = quotient.point_containing(j, ctx.gctx.element(arg_str(2)))
            return pullback(curve, quotient, pt_class(quotient, q))
        if func == "img":
            kind, toks = args[0]
            if kind != "expr":
                raise CaseError("img takes a divisor expression")
            top_ctx = DivisorContext(
                ctx.gctx, ctx.tower, ctx.top, ctx.top, ctx.subgroups, ctx.named
            )
            inner = _DivisorParser(list(toks), top_ctx).parse_inner_only()
            return reduced_image(ctx.top, curve, inner)
        raise CaseError(f"unknown divisor function {func!r}")

    def parse_inner_only(self) -> DivisorClass:
        out = self.parse_inner_expr(stop=None)
        if self.peek() is not None:
            raise CaseError("trailing input in nested divisor expression")
        return out


def eval_divisor(text: str, ctx: DivisorContext) -> DivisorClass:
    return _DivisorParser(_tokenize(text), ctx).parse()


# -- case bundle ----------------------------------------------------------------


@dataclass(frozen=True)
class SequenceMemberSpec:
    c1: str
    c2: str
    twist: int
    equivariance: str


@dataclass(frozen=True)
class ReductionStepSpec:
    sigma: str
    e_expr: str
    lprime_expr: str
    label: str


@dataclass(frozen=True)
class CocycleSuiteSpec:
    modulus: int
    formulas: dict[str, str]
    cochains1: dict[str, str]


@dataclass(frozen=True)
class DeclaredRelationSpec:
    curve: str
    expr: str
    citation: str
    complete_for_fibers: bool


@dataclass(frozen=True)
class ExpectedValue:
    check: str
    value: object
    citation: str


@dataclass
class CaseBundle:
    """One family: realized group, curve towers, named data, and check inputs."""

    case_id: str
    name: str
    source_path: Optional[Path]
    source_sha256: str
    gctx: GroupContext
    group: FiniteGroup
    data: dict[str, RamificationDatum]  # keys "C1", "C2"
    towers: dict[str, Tower]
    subgroups: dict[str, Subgroup]
    divisors: dict[str, dict[str, DivisorClass]]  # per curve: name -> class
    reductions: dict[str, tuple[str, tuple[ReductionStepSpec, ...]]]
    declared_relations: list[DeclaredRelationSpec]
    complete_fiber_curves: frozenset[str]
    sequence: tuple[SequenceMemberSpec, ...]
    sequence_l: str  # curve key and divisor name of L
    sequence_n: str
    cocycles: Optional[CocycleSuiteSpec]
    expected: tuple[ExpectedValue, ...]
    raw: dict = field(repr=False, default_factory=dict)

    def curve(self, key: str) -> Curve:
        return self.towers[key].top()

    def element(self, text: str) -> int:
        return self.gctx.element(text)

    def subgroup(self, name: str) -> Subgroup:
        if name not in self.subgroups:
            raise CaseError(f"unresolved subgroup reference {name!r}")
        return self.subgroups[name]


def _data_dir():
    return resources.files("xcoll.cases") / "data"


def bundled_case_ids() -> list[str]:
    out = []
    for entry in sorted(_data_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".toml"):
            out.append(entry.name[: -len(".toml")])
    return out


def locate_case(ref: str, cases_dir: Optional[Path] = None) -> Optional[Path]:
    """Resolve a case id or path; user directories shadow bundled cases."""
    p = Path(ref)
    if p.suffix == ".toml" and p.exists():
        return p
    if cases_dir is not None:
        candidate = Path(cases_dir) / f"{ref}.toml"
        if candidate.exists():
            return candidate
    entry = _data_dir() / f"{ref}.toml"
    if entry.is_file():
        return Path(str(entry))
    return None


def load_case(ref: str | Path, cases_dir: Optional[Path] = None) -> CaseBundle:
    path = locate_case(str(ref), cases_dir)
    if path is None:
        raise CaseError(f"case {ref!r} not found")
    blob = path.read_bytes()
    try:
        doc = tomllib.loads(blob.decode("utf-8"))
    except tomllib.TOMLDecodeError as ex:
        raise CaseError(f"cannot parse case file {path}: {ex}") from ex
    return _resolve(doc, path, hashlib.sha256(blob).hexdigest())


def _resolve(doc: dict, path: Optional[Path], digest: str) -> CaseBundle:
    if doc.get("schema") != SCHEMA_VERSION:
        raise CaseError(f"unsupported schema version {doc.get('schema')!r}")
    case_id = doc["id"]
    gspec = doc["group"]
    group = _realize_group(gspec)
    gctx = GroupContext(group, gspec["kind"], int(gspec.get("points", 0)))

    subgroups: dict[str, Subgroup] = {}
    for name, words in doc.get("subgroups", {}).items():
        gens = [gctx.element(w) for w in str(words).split(",")]
        subgroups[name] = subgroup_generate(group, gens)

    data: dict[str, RamificationDatum] = {}
    towers: dict[str, Tower] = {}
    for key, cspec in doc.get("curves", {}).items():
        branches = tuple(gctx.element(w) for w in cspec["branches"])
        datum = RamificationDatum(group, branches, parse_ram_type(cspec["ram_type"]))
        data[key] = datum
        towers[key] = Tower(datum)

    divisors: dict[str, dict[str, DivisorClass]] = {}
    for key in data:
        named: dict[str, DivisorClass] = {}
        table = doc.get("divisors", {}).get(key, {})
        top = towers[key].top()
        for name, expr in table.items():
            ctx = DivisorContext(gctx, towers[key], top, top, subgroups, named)
            try:
                named[name] = eval_divisor(str(expr), ctx)
            except (CaseError, ValueError) as ex:
                raise CaseError(f"divisor {key}.{name}: {ex}") from ex
        divisors[key] = named

    reductions: dict[str, tuple[str, tuple[ReductionStepSpec, ...]]] = {}
    for key, steps in doc.get("reductions", {}).items():
        if key not in data:
            raise CaseError(f"reduction for unknown curve {key!r}")
        specs = []
        bundle_name = None
        for step in steps:
            bundle_name = bundle_name or step.get("bundle")
            specs.append(
                ReductionStepSpec(
                    sigma=step["sigma"],
                    e_expr=step["E"],
                    lprime_expr=step["Lprime"],
                    label=step.get("label", ""),
                )
            )
        if bundle_name is None:
            raise CaseError(f"reduction for {key} does not name its bundle")
        if bundle_name not in divisors.get(key, {}):
            raise CaseError(f"reduction bundle {key}.{bundle_name} is not defined")
        reductions[key] = (bundle_name, tuple(specs))

    declared: list[DeclaredRelationSpec] = []
    complete_curves: set[str] = set()
    for key, dspec in doc.get("relations", {}).items():
        if key not in data:
            raise CaseError(f"declared relations for unknown curve {key!r}")
        for item in dspec.get("declared", []):
            declared.append(
                DeclaredRelationSpec(
                    key, item["vector"], item["citation"], False
                )
            )
        if dspec.get("complete_for_fibers"):
            complete_curves.add(key)

    seq_members: list[SequenceMemberSpec] = []
    seq = doc.get("sequence", {})
    for member in seq.get("members", []):
        seq_members.append(
            SequenceMemberSpec(
                c1=member["c1"],
                c2=member["c2"],
                twist=int(member.get("twist", 0)),
                equivariance=member["equivariance"],
            )
        )

    cocycles = None
    if "cocycles" in doc:
        cspec = doc["cocycles"]
        cocycles = CocycleSuiteSpec(
            modulus=int(cspec.get("modulus", 4)),
            formulas=dict(cspec.get("formulas", {})),
            cochains1=dict(cspec.get("cochains1", {})),
        )

    expected: list[ExpectedValue] = []
    for item in doc.get("expected", []):
        expected.append(
            ExpectedValue(item["check"], item["value"], item.get("citation", ""))
        )

    bundle = CaseBundle(
        case_id=case_id,
        name=doc.get("name", case_id),
        source_path=path,
        source_sha256=digest,
        gctx=gctx,
        group=group,
        data=data,
        towers=towers,
        subgroups=subgroups,
        divisors=divisors,
        reductions=reductions,
        declared_relations=declared,
        complete_fiber_curves=frozenset(complete_curves),
        sequence=tuple(seq_members),
        sequence_l=seq.get("l", "C1.L"),
        sequence_n=seq.get("n", "C2.N"),
        cocycles=cocycles,
        expected=tuple(expected),
        raw=doc,
    )
    _validate_bundle(bundle)
    return bundle


def _validate_bundle(bundle: CaseBundle) -> None:
    for key in ("C1", "C2"):
        if key not in bundle.data:
            raise CaseError(f"case must define curve {key}")
    for ref in (bundle.sequence_l, bundle.sequence_n):
        ck, _, dn = ref.partition(".")
        if ck not in bundle.divisors or dn not in bundle.divisors[ck]:
            raise CaseError(f"sequence bundle reference {ref!r} does not resolve")
    if bundle.sequence and len(bundle.sequence) != 4:
        raise CaseError("sequence must have exactly four members")


def declared_relations_for(bundle: CaseBundle, key: str) -> list[Relation]:
    """Materialize the declared relations of one curve with citations."""
    out = []
    top = bundle.towers[key].top()
    for spec in bundle.declared_relations:
        if spec.curve != key:
            continue
        ctx = DivisorContext(
            bundle.gctx, bundle.towers[key], top, top, bundle.subgroups,
            bundle.divisors[key],
        )
        cls = eval_divisor(spec.expr, ctx)
        out.append(Relation(cls, "CaseDeclared", spec.citation))
    return out
