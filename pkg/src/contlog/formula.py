"""Signatures and formulas.

The language is relational: atomic formulas apply a relation symbol to
variables, connectives combine formulas, and three quantifiers bind a
variable over the structure's universe:

    sup x. body     largest value of a real-valued body
    inf x. body     smallest value
    Q x. body       the *set* of all values the body takes, a point of the
                    body space's hyperspace

Concrete syntax (also produced by str()):

    formula := quant | apply | atom
    quant   := ("sup" | "inf" | "Q") IDENT "." formula
    apply   := IDENT "(" formula ("," formula)* ")"
    atom    := IDENT "(" IDENT ("," IDENT)* ")"
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence, Union

from .connective import Connective
from .errors import ParseError, TypeCheckError, ValidationError
from .hyperspace import hyper
from .valuespace import Rational, ValueSpace, frac

KEYWORDS = ("sup", "inf", "Q")


@dataclass(frozen=True)
class Relation:
    """A relation symbol: a name, an arity, and the space its values live in."""

    name: str
    arity: int
    space: ValueSpace

    def __post_init__(self):
        if self.arity < 1:
            raise ValidationError(f"relation {self.name} needs arity >= 1")
        if not self.name or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.name):
            raise ValidationError(f"relation name {self.name!r} is not an identifier")
        if self.name in KEYWORDS:
            raise ValidationError(f"relation name {self.name!r} is a reserved keyword")


@dataclass(frozen=True, eq=True)
class Signature:
    """Relation symbols, optionally one of them designated as a distance.

    When a distance symbol is present, every other symbol carries a modulus:
    the Lipschitz constant it is promised to respect with respect to the
    distance.  The moduli map exists exactly when the distance does.
    """

    relations: tuple[Relation, ...]
    distance_symbol: str | None = None
    moduli: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation names in signature")
        if self.distance_symbol is not None:
            d = self.by_name.get(self.distance_symbol)
            if d is None:
                raise ValidationError(f"distance symbol {self.distance_symbol!r} is not a relation")
            if d.arity != 2 or d.space.dimension != 1:
                raise ValidationError("the distance symbol must be binary and real-valued")
            expected = {n for n in names if n != self.distance_symbol}
            got = {n for n, _ in self.moduli}
            if got != expected:
                raise ValidationError(
                    f"moduli must cover exactly the non-distance symbols; "
                    f"missing {sorted(expected - got)}, extra {sorted(got - expected)}"
                )
            for _, m in self.moduli:
                if m < 0:
                    raise ValidationError("moduli must be nonnegative")
        elif self.moduli:
            raise ValidationError("moduli are only meaningful with a distance symbol")

    @cached_property
    def by_name(self) -> dict[str, Relation]:
        return {r.name: r for r in self.relations}

    @cached_property
    def moduli_map(self) -> dict[str, Fraction]:
        return dict(self.moduli)

    def modulus(self, name: str) -> Fraction:
        return self.moduli_map[name]


def signature(relations: Sequence[Relation], distance_symbol: str | None = None,
              moduli: Mapping[str, Rational] | None = None) -> Signature:
    """Convenience constructor normalizing the moduli mapping."""
    pairs = tuple(sorted((k, frac(v)) for k, v in (moduli or {}).items()))
    return Signature(tuple(relations), distance_symbol, pairs)


class QuantKind(enum.Enum):
    SUP = "sup"
    INF = "inf"
    SET = "Q"

    @property
    def keyword(self) -> str:
        return self.value


class Formula:
    """Base class; concrete nodes are Atomic, Apply, Quant and CauchyLimit."""

    @cached_property
    def value_space(self) -> ValueSpace:
        return self._space()

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return self._free()

    def _space(self) -> ValueSpace:
        raise NotImplementedError

    def _free(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Atomic(Formula):
    symbol: str
    args: tuple[str, ...]
    space: ValueSpace

    def _space(self) -> ValueSpace:
        return self.space

    def _free(self) -> frozenset[str]:
        return frozenset(self.args)

    def __str__(self) -> str:
        return f"{self.symbol}({', '.join(self.args)})"


@dataclass(frozen=True, eq=False)
class Apply(Formula):
    conn: Connective
    children: tuple[Formula, ...]

    def _space(self) -> ValueSpace:
        if len(self.children) != self.conn.arity:
            raise TypeCheckError(
                f"{self.conn.name} expects {self.conn.arity} arguments, "
                f"got {len(self.children)}"
            )
        for i, (child, want) in enumerate(zip(self.children, self.conn.domain)):
            got = child.value_space
            if got != want:
                raise TypeCheckError(
                    f"argument {i} of {self.conn.name} has value space {got.label} "
                    f"(dim {got.dimension}), expected {want.label} (dim {want.dimension})"
                )
        return self.conn.codomain

    def _free(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for c in self.children:
            out |= c.free_vars
        return out

    def __str__(self) -> str:
        return f"{self.conn.name}({', '.join(str(c) for c in self.children)})"


@dataclass(frozen=True, eq=False)
class Quant(Formula):
    kind: QuantKind
    var: str
    body: Formula

    def _space(self) -> ValueSpace:
        inner = self.body.value_space
        if self.kind is QuantKind.SET:
            return hyper(inner)
        if inner.dimension != 1 or not inner.standard_metric:
            raise TypeCheckError(
                f"{self.kind.keyword} needs a real-valued body, got {inner.label}"
            )
        return inner

    def _free(self) -> frozenset[str]:
        return self.body.free_vars - {self.var}

    def __str__(self) -> str:
        return f"{self.kind.keyword} {self.var}. {self.body}"


@dataclass(frozen=True, eq=False)
class CauchyLimit(Formula):
    """Marker for a truncated uniformly Cauchy sequence of formulas.

    Evaluates as its body (the chosen truncation); records the index it was
    cut at, the declared rate there, and the tolerance that was requested.
    """

    body: Formula
    index: int
    rate_at_index: Fraction
    tol: Fraction
    rate: Callable[[int], Fraction] = field(repr=False)

    def _space(self) -> ValueSpace:
        return self.body.value_space

    def _free(self) -> frozenset[str]:
        return self.body.free_vars

    def __str__(self) -> str:
        return str(self.body)


def atom(sig: Signature, name: str, *variables: str) -> Atomic:
    """Atomic formula over a signature, with arity checked."""
    rel = sig.by_name.get(name)
    if rel is None:
        raise TypeCheckError(f"unknown relation {name!r}")
    if len(variables) != rel.arity:
        raise TypeCheckError(f"{name} has arity {rel.arity}, got {len(variables)} variables")
    return Atomic(name, tuple(variables), rel.space)


def value_space_of(phi: Formula) -> ValueSpace:
    """The space a formula's values live in; typechecks the whole tree."""
    return phi.value_space


def validate(phi: Formula) -> ValueSpace:
    """Force a full typecheck of the tree (children included)."""
    if isinstance(phi, Apply):
        for c in phi.children:
            validate(c)
    elif isinstance(phi, Quant):
        validate(phi.body)
    elif isinstance(phi, CauchyLimit):
        validate(phi.body)
    return phi.value_space


RateLike = Union[Callable[[int], Fraction], Sequence[Rational], Mapping[int, Rational]]


def cauchy_limit(rate: RateLike, formulas: Sequence[Formula], tol: Rational) -> CauchyLimit:
    """Truncate a uniformly Cauchy sequence of formulas at certified accuracy.

    rate(n) bounds the distance from the n-th formula to the limit and must be
    nonincreasing.  Picks the least N with rate(N) <= tol and wraps formulas[N]
    in a marker carrying the certificate.  Fails if no such N exists within
    the provided list.
    """
    tol = frac(tol)
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    if not formulas:
        raise ValidationError("cauchy_limit needs at least one formula")

    if callable(rate):
        rate_fn = lambda n: frac(rate(n))  # noqa: E731
    elif isinstance(rate, Mapping):
        rate_fn = lambda n: frac(rate[n])  # noqa: E731
    else:
        seq = [frac(r) for r in rate]
        if len(seq) < len(formulas):
            raise ValidationError("rate sequence shorter than the formula list")
        rate_fn = lambda n: seq[n]  # noqa: E731

    for phi in formulas:
        space = phi.value_space
        if space.dimension != 1 or not space.standard_metric:
            raise TypeCheckError("cauchy_limit needs real-valued formulas")

    prev = None
    for n in range(len(formulas)):
        r = rate_fn(n)
        if r < 0:
            raise ValidationError(f"rate({n}) = {r} is negative")
        if prev is not None and r > prev:
            raise ValidationError(f"rate is not nonincreasing at {n}: {prev} then {r}")
        if r <= tol:
            return CauchyLimit(formulas[n], n, r, tol, rate_fn)
        prev = r
    raise ValidationError(
        f"rate never reaches tolerance {tol} within the {len(formulas)} provided formulas"
    )


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),.]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[at]!r}", at, text)
        if m.group("ident"):
            out.append(("ident", m.group("ident"), m.start("ident")))
        else:
            out.append((m.group("punct"), m.group("punct"), m.start("punct")))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature, library: Mapping[str, Connective]):
        self.text = text
        self.sig = sig
        self.library = dict(library)
        overlap = set(self.library) & set(sig.by_name)
        if overlap:
            raise ValidationError(
                f"names defined as both relation and connective: {sorted(overlap)}"
            )
        for bad in set(self.library) & set(KEYWORDS):
            raise ValidationError(f"connective name {bad!r} is a reserved keyword")
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str, what: str):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2], self.text)
        self.i += 1
        return tok

    def formula(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "ident" and value in KEYWORDS:
            self.i += 1
            var = self.take("ident", "a variable")[1]
            if var in KEYWORDS:
                raise ParseError(f"{var!r} cannot be used as a variable", pos, self.text)
            self.take(".", "'.'")
            body = self.formula()
            node = Quant(QuantKind(value), var, body)
            self._typecheck(node, pos)
            return node
        if kind == "ident":
            self.i += 1
            self.take("(", "'('")
            if value in self.sig.by_name:
                args = [self.take("ident", "a variable")[1]]
                while self.peek()[0] == ",":
                    self.i += 1
                    args.append(self.take("ident", "a variable")[1])
                self.take(")", "')' or ','")
                rel = self.sig.by_name[value]
                if len(args) != rel.arity:
                    raise ParseError(
                        f"{value} has arity {rel.arity}, got {len(args)} arguments",
                        pos, self.text,
                    )
                return Atomic(value, tuple(args), rel.space)
            if value in self.library:
                children = [self.formula()]
                while self.peek()[0] == ",":
                    self.i += 1
                    children.append(self.formula())
                self.take(")", "')' or ','")
                node = Apply(self.library[value], tuple(children))
                self._typecheck(node, pos)
                return node
            raise ParseError(f"unknown symbol {value!r}", pos, self.text)
        raise ParseError("expected a formula", pos, self.text)

    def _typecheck(self, node: Formula, pos: int):
        try:
            node.value_space
        except TypeCheckError as err:
            raise ParseError(str(err), pos, self.text) from None

    def run(self) -> Formula:
        node = self.formula()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError("trailing input after formula", tok[2], self.text)
        return node


def parse(text: str, sig: Signature, library: Mapping[str, Connective] | None = None) -> Formula:
    """Parse and typecheck formula text against a signature and connective library."""
    return _Parser(text, sig, library or {}).run()
