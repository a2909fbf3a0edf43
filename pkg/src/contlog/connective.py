"""Connectives: Lipschitz-bounded maps between value spaces.

A connective takes one point from each of its domain spaces and returns a
point of its codomain.  Every connective carries a Lipschitz constant with
respect to the l-infinity combination of its domain metrics; constructors
either derive the constant structurally or validate a declared one
exhaustively on the net.

Outputs must always stay inside the unit cube, so the constructors for maps
that could leave it (`affine`, `add`) reject domains whose image escapes.
`table` is the general escape hatch: any map on a finite net, with any valid
declared constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Union

from .errors import EvalError, SpaceMismatch, ValidationError
from .valuespace import (
    ONE,
    ZERO,
    Point,
    Rational,
    ValueSpace,
    frac,
    make_interval,
    membership,
    point,
)

SpaceOrSpaces = Union[ValueSpace, Sequence[ValueSpace]]


def _spaces(x: SpaceOrSpaces) -> tuple[ValueSpace, ...]:
    if isinstance(x, ValueSpace):
        return (x,)
    out = tuple(x)
    if not all(isinstance(s, ValueSpace) for s in out):
        raise SpaceMismatch("expected a ValueSpace or a sequence of them")
    return out


def flat_coords(pts: Sequence[Point]) -> tuple[Fraction, ...]:
    """Concatenated coordinates of a tuple of points."""
    out: list[Fraction] = []
    for p in pts:
        out.extend(p.coords)
    return tuple(out)


def flat_distance(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return max(abs(x - y) for x, y in zip(a, b))


def product_distance(spaces: Sequence[ValueSpace], ps: Sequence[Point], qs: Sequence[Point]) -> Fraction:
    """Product metric: the max of the component metrics."""
    return max(s.metric(p, q) for s, p, q in zip(spaces, ps, qs))


def product_net(spaces: Sequence[ValueSpace]):
    return itertools.product(*(s.net for s in spaces))


def as_point(value) -> Point:
    if isinstance(value, Point):
        return value
    return point(frac(value))


def as_scalar(value) -> Fraction:
    if isinstance(value, Point):
        return value.scalar
    return frac(value)


@dataclass(frozen=True, eq=False)
class Connective:
    """A named Lipschitz map from a product of value spaces to a value space.

    Compares by identity: two connectives are the same connective only if they
    are the same object.
    """

    name: str
    domain: tuple[ValueSpace, ...]
    codomain: ValueSpace
    lipschitz: Fraction
    evaluator: Callable[..., Point] = field(repr=False)

    def __post_init__(self):
        if self.lipschitz < ZERO:
            raise ValidationError("Lipschitz constant must be nonnegative")

    @property
    def arity(self) -> int:
        return len(self.domain)

    def __call__(self, *points: Point) -> Point:
        if len(points) != len(self.domain):
            raise EvalError(
                f"{self.name} expects {len(self.domain)} arguments, got {len(points)}"
            )
        for p, s in zip(points, self.domain):
            if p.dimension != s.dimension:
                raise EvalError(
                    f"{self.name}: argument {p} does not fit {s.dimension}-dimensional {s.label}"
                )
        out = self.evaluator(*points)
        if out.dimension != self.codomain.dimension:
            raise EvalError(
                f"{self.name}: output {out} does not fit codomain {self.codomain.label}"
            )
        return out

    def __repr__(self) -> str:
        doms = ", ".join(s.label for s in self.domain)
        return f"Connective({self.name!r}: [{doms}] -> {self.codomain.label}, L={self.lipschitz})"


@lru_cache(maxsize=1)
def unit_interval() -> ValueSpace:
    """The default real codomain: a net of {0,1} whose resolution 1/2 covers [0,1]."""
    return make_interval(0, 1, 1, label="[0,1]")


def _check_unit_range(values, what: str):
    for v in values:
        if v < ZERO or v > ONE:
            raise ValidationError(f"{what} leaves the unit interval (value {v})")


def _covers_unit_interval(space: ValueSpace) -> bool:
    """Whether every value in [0,1] is within `resolution` of the net."""
    if space.dimension != 1:
        return False
    xs = sorted(p.scalar for p in space.net)
    if xs[0] > space.resolution or ONE - xs[-1] > space.resolution:
        return False
    return all((b - a) / 2 <= space.resolution for a, b in zip(xs, xs[1:]))


def const(value, space: ValueSpace, name: str | None = None) -> Connective:
    """Zero-ary connective returning a fixed member of the space."""
    v = as_point(value)
    if not membership(space, v, ZERO):
        raise ValidationError(f"constant {v} is not a member of {space.label}")
    if name is None:
        name = f"const{v}"
    return Connective(name, (), space, ZERO, lambda: v)


def identity(space: ValueSpace, name: str = "id") -> Connective:
    return Connective(name, (space,), space, Fraction(1), lambda p: p)


def proj(space: ValueSpace, i: int, name: str | None = None) -> Connective:
    """Coordinate projection onto the i-th coordinate.

    1-Lipschitz on plain l-infinity spaces.  On a space with an overridden
    metric the tight constant is computed from the net instead.
    """
    if not (0 <= i < space.dimension):
        raise SpaceMismatch(f"no coordinate {i} in {space.dimension}-dimensional space")
    coords = sorted({p.coords[i] for p in space.net})
    if space.standard_metric:
        lip = Fraction(1)
    else:
        lip = ZERO
        n = len(space.net)
        m = space.distance_matrix
        for a in range(n):
            for b in range(a + 1, n):
                gap = abs(space.net[a].coords[i] - space.net[b].coords[i])
                if gap > ZERO:
                    lip = max(lip, gap / m[a][b])
    codomain = ValueSpace(
        1,
        tuple(point(c) for c in coords),
        lip * space.resolution,
        f"{space.label}[{i}]",
    )
    if name is None:
        name = f"pi{i}"
    return Connective(name, (space,), codomain, lip, lambda p, _i=i: point(p.coords[_i]))


def neg(space: ValueSpace, codomain: ValueSpace | None = None, name: str = "neg") -> Connective:
    """x -> 1 - x on a one-dimensional space."""
    _require_dim1(space, "neg")
    if codomain is None:
        codomain = ValueSpace(
            1,
            tuple(point(ONE - p.scalar) for p in space.net),
            space.resolution,
            f"neg({space.label})",
        )
    _check_entries_fit(codomain, [point(ONE - p.scalar) for p in space.net], "neg")
    return Connective(name, (space,), codomain, Fraction(1), lambda p: point(ONE - p.scalar))


def clamp01(space: ValueSpace, codomain: ValueSpace | None = None, name: str = "clamp01") -> Connective:
    """x -> min(1, max(0, x)); the identity on anything already in [0,1]."""
    _require_dim1(space, "clamp01")
    if codomain is None:
        codomain = space
    _check_entries_fit(codomain, list(space.net), "clamp01")

    def run(p: Point) -> Point:
        x = p.scalar
        return point(min(ONE, max(ZERO, x)))

    return Connective(name, (space,), codomain, Fraction(1), run)


def affine(space: ValueSpace, a: Rational, b: Rational, codomain: ValueSpace | None = None,
           name: str | None = None) -> Connective:
    """x -> a*x + b on a one-dimensional space; the image must stay in [0,1].

    Monotone, so checking the net (which for covering grids includes the
    endpoints) bounds the image.  Lipschitz constant |a|.
    """
    _require_dim1(space, "affine")
    a, b = frac(a), frac(b)
    image = [a * p.scalar + b for p in space.net]
    _check_unit_range(image, f"affine({a},{b}) on {space.label}")
    if codomain is None:
        codomain = ValueSpace(
            1,
            tuple(point(v) for v in sorted(set(image))),
            abs(a) * space.resolution,
            f"affine({space.label})",
        )
    _check_entries_fit(codomain, [point(v) for v in image], "affine")
    if name is None:
        name = f"affine[{a},{b}]"
    return Connective(name, (space,), codomain, abs(a), lambda p: point(a * p.scalar + b))


def _binary_images(x: ValueSpace, y: ValueSpace, op) -> list[Fraction]:
    return [op(p.scalar, q.scalar) for p in x.net for q in y.net]


def add(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None, name: str = "add") -> Connective:
    """Pointwise sum of two one-dimensional spaces; the sums must stay in [0,1]."""
    _require_dim1(x, "add")
    _require_dim1(y, "add")
    image = _binary_images(x, y, lambda p, q: p + q)
    _check_unit_range(image, "add")
    if codomain is None:
        codomain = ValueSpace(1, tuple(point(v) for v in sorted(set(image))),
                              x.resolution + y.resolution, f"add({x.label},{y.label})")
    _check_entries_fit(codomain, [point(v) for v in image], "add")
    return Connective(name, (x, y), codomain, Fraction(2),
                      lambda p, q: point(p.scalar + q.scalar))


def bounded_add(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None,
                name: str = "badd") -> Connective:
    """Truncated sum min(1, p + q); always lands in [0,1]."""
    _require_dim1(x, "bounded_add")
    _require_dim1(y, "bounded_add")
    image = _binary_images(x, y, lambda p, q: min(Fraction(1), p + q))
    if codomain is None:
        codomain = ValueSpace(1, tuple(point(v) for v in sorted(set(image))),
                              x.resolution + y.resolution, f"badd({x.label},{y.label})")
    _check_entries_fit(codomain, [point(v) for v in image], "bounded_add")
    return Connective(name, (x, y), codomain, Fraction(2),
                      lambda p, q: point(min(Fraction(1), p.scalar + q.scalar)))


def truncated_sub(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None,
                  name: str = "tsub") -> Connective:
    """Truncated difference max(0, p - q)."""
    _require_dim1(x, "truncated_sub")
    _require_dim1(y, "truncated_sub")
    image = _binary_images(x, y, lambda p, q: max(Fraction(0), p - q))
    if codomain is None:
        codomain = ValueSpace(1, tuple(point(v) for v in sorted(set(image))),
                              x.resolution + y.resolution, f"tsub({x.label},{y.label})")
    _check_entries_fit(codomain, [point(v) for v in image], "truncated_sub")
    return Connective(name, (x, y), codomain, Fraction(2),
                      lambda p, q: point(max(Fraction(0), p.scalar - q.scalar)))


def mul(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None, name: str = "mul") -> Connective:
    """Pointwise product; 2-Lipschitz on the unit square."""
    _require_dim1(x, "mul")
    _require_dim1(y, "mul")
    image = _binary_images(x, y, lambda p, q: p * q)
    if codomain is None:
        codomain = ValueSpace(1, tuple(point(v) for v in sorted(set(image))),
                              x.resolution + y.resolution, f"mul({x.label},{y.label})")
    _check_entries_fit(codomain, [point(v) for v in image], "mul")
    return Connective(name, (x, y), codomain, Fraction(2),
                      lambda p, q: point(p.scalar * q.scalar))


def max_of(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None, name: str = "max") -> Connective:
    return _lattice_binary(x, y, codomain, name, max)


def min_of(x: ValueSpace, y: ValueSpace, codomain: ValueSpace | None = None, name: str = "min") -> Connective:
    return _lattice_binary(x, y, codomain, name, min)


def _lattice_binary(x, y, codomain, name, op) -> Connective:
    _require_dim1(x, name)
    _require_dim1(y, name)
    image = _binary_images(x, y, op)
    if codomain is None:
        codomain = ValueSpace(1, tuple(point(v) for v in sorted(set(image))),
                              max(x.resolution, y.resolution), f"{name}({x.label},{y.label})")
    _check_entries_fit(codomain, [point(v) for v in image], name)
    return Connective(name, (x, y), codomain, Fraction(1),
                      lambda p, q, _op=op: point(_op(p.scalar, q.scalar)))


def compose(outer: Connective, inners: Sequence[Connective], shared: bool = False,
            name: str | None = None) -> Connective:
    """outer after the inners.

    With shared=False the composite consumes the inners' argument lists
    concatenated; with shared=True all inners must have identical domains and
    the composite feeds the same arguments to each.  Lipschitz constant is the
    product of outer's constant with the largest inner constant.
    """
    inners = tuple(inners)
    if len(inners) != outer.arity:
        raise SpaceMismatch(
            f"{outer.name} expects {outer.arity} inputs, got {len(inners)} inner connectives"
        )
    for i, (inner, want) in enumerate(zip(inners, outer.domain)):
        if inner.codomain != want:
            raise SpaceMismatch(
                f"inner {inner.name} produces {inner.codomain.label}, "
                f"but {outer.name} wants {want.label} at slot {i}"
            )
    if name is None:
        name = f"{outer.name}({', '.join(c.name for c in inners)})"
    inner_lip = max((c.lipschitz for c in inners), default=ZERO)
    lip = outer.lipschitz * inner_lip

    if shared:
        if not inners:
            raise SpaceMismatch("shared composition needs at least one inner connective")
        dom = inners[0].domain
        for c in inners[1:]:
            if c.domain != dom:
                raise SpaceMismatch("shared composition requires identical inner domains")

        def run_shared(*pts: Point) -> Point:
            return outer.evaluator(*(c.evaluator(*pts) for c in inners))

        return Connective(name, dom, outer.codomain, lip, run_shared)

    dom = tuple(s for c in inners for s in c.domain)
    arities = [c.arity for c in inners]

    def run(*pts: Point) -> Point:
        vals = []
        k = 0
        for c, n in zip(inners, arities):
            vals.append(c.evaluator(*pts[k : k + n]))
            k += n
        return outer.evaluator(*vals)

    return Connective(name, dom, outer.codomain, lip, run)


def _normalize_key(key) -> tuple[Point, ...]:
    if isinstance(key, Point):
        return (key,)
    return tuple(key)


def table(domains: SpaceOrSpaces, mapping: Mapping, lipschitz: Rational,
          codomain: ValueSpace, name: str = "table") -> Connective:
    """A connective given pointwise on the product net, with a declared constant.

    Validates totality, that entries land within the codomain's resolution of
    its net, and the declared Lipschitz bound on every pair of net points
    (under the product of the domain metrics).
    """
    doms = _spaces(domains)
    lip = frac(lipschitz)
    entries: dict[tuple[Point, ...], Point] = {}
    for k, v in mapping.items():
        entries[_normalize_key(k)] = as_point(v)
    keys = list(product_net(doms))
    for k in keys:
        if k not in entries:
            raise ValidationError(f"{name}: no entry for net point {tuple(map(str, k))}")
        if not membership(codomain, entries[k], ZERO):
            raise ValidationError(
                f"{name}: entry {entries[k]} is not within resolution of {codomain.label}"
            )
    if len(entries) != len(keys):
        extra = set(entries) - set(keys)
        raise ValidationError(f"{name}: {len(extra)} entries are off the product net")
    for i, p in enumerate(keys):
        for q in keys[i + 1 :]:
            d = product_distance(doms, p, q)
            gap = codomain.metric(entries[p], entries[q])
            if gap > lip * d:
                raise ValidationError(
                    f"{name}: declared Lipschitz {lip} violated: "
                    f"|f{tuple(map(str, p))} - f{tuple(map(str, q))}| = {gap} > {lip} * {d}"
                )

    def run(*pts: Point) -> Point:
        try:
            return entries[pts]
        except KeyError:
            raise EvalError(f"{name}: input {tuple(map(str, pts))} is off the table net") from None

    return Connective(name, doms, codomain, lip, run)


def tight_lipschitz(domains: SpaceOrSpaces, mapping: Mapping, codomain: ValueSpace | None = None) -> Fraction:
    """Smallest constant valid for the mapping on the product net."""
    doms = _spaces(domains)
    entries = {_normalize_key(k): as_point(v) for k, v in mapping.items()}
    keys = list(entries)
    best = ZERO
    for i, p in enumerate(keys):
        for q in keys[i + 1 :]:
            d = product_distance(doms, p, q)
            gap = codomain.metric(entries[p], entries[q]) if codomain else _default_gap(entries[p], entries[q])
            if gap > ZERO:
                if d == ZERO:
                    raise ValidationError("mapping differs on points at distance zero")
                best = max(best, gap / d)
    return best


def _default_gap(a: Point, b: Point) -> Fraction:
    return max(abs(x - y) for x, y in zip(a.coords, b.coords))


def mcshane_extend(theta: Mapping, lipschitz: Rational, x: SpaceOrSpaces,
                   ambient: SpaceOrSpaces, codomain: ValueSpace | None = None,
                   name: str | None = None) -> Connective:
    """Extend a real-valued map from a net to an ambient cube, keeping its constant.

    theta maps the product net of x into [0,1]; the extension is

        y  ->  clamp01( min over net points p of  theta(p) + L * d(p, y) )

    with d the flat l-infinity distance on concatenated coordinates.  It agrees
    with theta exactly on the net and is L-Lipschitz on the whole ambient cube.
    The declared L is validated exhaustively on the net.
    """
    xs = _spaces(x)
    amb = _spaces(ambient)
    lip = frac(lipschitz)
    xdim = sum(s.dimension for s in xs)
    adim = sum(s.dimension for s in amb)
    if xdim != adim:
        raise SpaceMismatch(f"net dimension {xdim} does not match ambient dimension {adim}")

    entries: dict[tuple[Point, ...], Fraction] = {}
    for k, v in theta.items():
        entries[_normalize_key(k)] = as_scalar(v)
    keys = list(product_net(xs))
    for k in keys:
        if k not in entries:
            raise ValidationError(f"extension: no value for net point {tuple(map(str, k))}")
    _check_unit_range(entries.values(), "extension values")

    flats = [(flat_coords(k), entries[k]) for k in keys]
    for i in range(len(flats)):
        for j in range(i + 1, len(flats)):
            (fp, vp), (fq, vq) = flats[i], flats[j]
            d = flat_distance(fp, fq)
            if abs(vp - vq) > lip * d:
                raise ValidationError(
                    f"declared Lipschitz {lip} violated on the net: "
                    f"|{vp} - {vq}| > {lip} * {d}"
                )

    if codomain is None:
        codomain = unit_interval()
    if not _covers_unit_interval(codomain):
        raise ValidationError(
            f"extension codomain {codomain.label} does not cover [0,1] within its resolution"
        )
    if name is None:
        name = f"ext:{len(flats)}p"

    def run(*pts: Point) -> Point:
        y = flat_coords(pts)
        best = None
        for fp, vp in flats:
            cand = vp + lip * flat_distance(fp, y)
            if best is None or cand < best:
                best = cand
        return point(min(ONE, max(ZERO, best)))

    return Connective(name, amb, codomain, lip, run)


def validate_lipschitz(conn: Connective) -> tuple | None:
    """Exhaustively check a connective's constant on its product net.

    Returns None when the bound holds, else a witness
    (inputs_p, inputs_q, gap, distance).
    """
    keys = list(product_net(conn.domain))
    outs = {k: conn.evaluator(*k) for k in keys}
    for i, p in enumerate(keys):
        for q in keys[i + 1 :]:
            d = product_distance(conn.domain, p, q)
            gap = conn.codomain.metric(outs[p], outs[q])
            if gap > conn.lipschitz * d:
                return (p, q, gap, d)
    return None


def _require_dim1(space: ValueSpace, who: str):
    if space.dimension != 1:
        raise SpaceMismatch(f"{who} needs a one-dimensional space, got {space.label}")


def _check_entries_fit(codomain: ValueSpace, entries, who: str):
    for e in entries:
        if not membership(codomain, e, ZERO):
            raise ValidationError(
                f"{who}: image point {e} is not within resolution of {codomain.label}"
            )
