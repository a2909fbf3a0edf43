"""Translation between the set-valued and real-valued semantics.

A signature whose symbols take values in arbitrary finite-net spaces is
translated to one whose symbols are all valued on a single [0,1] grid: each
source symbol P valued in X becomes one grid symbol per coordinate of a
separating embedding of X into the unit cube.  Structures transport by
embedding each value and snapping the coordinates to the grid (error at most
half the grid step per coordinate), and decode back by nearest net point.

Formulas translate by *coding*: for a source formula phi and a real-valued
observable theta on phi's value space, code(phi, theta) is a formula over the
target signature whose value on the transported structure tracks
theta(value of phi) within an explicit budget.  The budget is zero whenever
the embedded source nets already sit on the grid, so on aligned instances the
translation is exact and the two semantics are interchangeable.

Set quantifiers go through a finite lattice interpolation: every function on
a hyperspace's net is reproduced exactly as a min-max of affine functions of
"how far into the forbidden region" observables, built from separators on
the base space when the supplied generators cannot tell two sets apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

from .connective import (Connective, affine, clamp01, const, identity, max_of,
                         min_of, mcshane_extend, table)
from .errors import CapacityError, SpaceMismatch, ValidationError
from .formula import (Apply, Atomic, CauchyLimit, Formula, Quant, QuantKind,
                      Relation, Signature)
from .hyperspace import (CompactSet, HyperSpace, compact, encode_subset, hyper,
                         urysohn_separator)
from .semantics import CheckReport, Structure
from .valuespace import (ONE, ZERO, Embedding, Point, Rational, ValueSpace,
                         embed_cube, frac, linf, make_finite, make_interval,
                         nearest, point)

MAX_SET_CODING_POINTS = 8

_BIT = make_finite([point(0), point(1)], label="bit")


def snap_to_grid(grid: ValueSpace, value: Rational) -> Fraction:
    """Nearest grid value; ties resolve downward."""
    q, _ = nearest(grid, point(frac(value)))
    return q.scalar


def _is_identity(conn: Connective) -> bool:
    if conn.arity != 1 or conn.codomain != conn.domain[0]:
        return False
    return all(conn(p) == p for p in conn.domain[0].net)


class TranslationContext:
    """Holds the grid, the target signature, and all per-space caches."""

    def __init__(self, source: Signature, step: Rational):
        step = frac(step)
        if not 0 < step <= 1:
            raise ValidationError(f"grid step must be in (0,1], got {step}")
        self.source = source
        self.step = step
        self.grid = make_interval(0, 1, step, label=f"grid[{step}]")
        self._embeddings: dict[ValueSpace, Embedding] = {}
        self._identities: dict[ValueSpace, Connective] = {}
        self._separators: dict = {}
        self._hits: dict = {}

        components: dict[str, tuple[str, ...]] = {}
        targets: list[Relation] = []
        taken = set(source.by_name)
        for rel in source.relations:
            emb = self.embedding(rel.space)
            names = tuple(f"{rel.name}_{i}" for i in range(emb.ambient_dimension))
            for n in names:
                if n in taken:
                    raise ValidationError(
                        f"target symbol {n!r} collides with an existing name"
                    )
                taken.add(n)
                targets.append(Relation(n, rel.arity, self.grid))
            components[rel.name] = names
        self.components = components
        self.target = Signature(tuple(targets), None, ())

    def embedding(self, space: ValueSpace) -> Embedding:
        emb = self._embeddings.get(space)
        if emb is None:
            emb = embed_cube(space)
            self._embeddings[space] = emb
        return emb

    def identity_on(self, space: ValueSpace) -> Connective:
        conn = self._identities.get(space)
        if conn is None:
            conn = identity(space)
            self._identities[space] = conn
        return conn

    def separator(self, space: ValueSpace, k: CompactSet, f: CompactSet) -> Connective:
        key = (space, k.members, f.members)
        conn = self._separators.get(key)
        if conn is None:
            conn = urysohn_separator(space, k, f)
            self._separators[key] = conn
        return conn

    def point_hit(self, space: ValueSpace, i: int) -> Connective:
        """Observable that is 1 exactly on the i-th net point and 0 elsewhere.

        Its sup over a set reads off membership of that point, so the family
        over all i separates any two distinct sets.
        """
        key = (space, i)
        conn = self._hits.get(key)
        if conn is None:
            target = space.net[i]
            mapping = {(p,): point(1 if p == target else 0) for p in space.net}
            if len(space.net) > 1:
                sep = min(space.metric(target, p) for p in space.net if p != target)
                if sep == 0:
                    raise ValidationError(
                        f"{space.label}: net point {target} is at distance zero "
                        f"from another net point; no observable can single it out"
                    )
                lip = Fraction(1) / sep
            else:
                lip = ZERO
            conn = table([space], mapping, lip, codomain=_BIT,
                         name=f"hit[{i}]")
            self._hits[key] = conn
        return conn

    def snap_bound(self, symbol: str) -> Fraction:
        """Largest per-coordinate snap a value of this symbol can suffer."""
        rel = self.source.by_name[symbol]
        return self.space_snap_bound(rel.space)

    def space_snap_bound(self, space: ValueSpace) -> Fraction:
        emb = self.embedding(space)
        worst = ZERO
        for q in space.net:
            for c in emb.coordinates(q).coords:
                worst = max(worst, abs(c - snap_to_grid(self.grid, c)))
        return worst

    @cached_property
    def aligned(self) -> bool:
        """True when every embedded source net sits exactly on the grid."""
        return all(self.snap_bound(r.name) == 0 for r in self.source.relations)


def translate_signature(sig: Signature, step: Rational) -> TranslationContext:
    return TranslationContext(sig, step)


def transport_structure(ctx: TranslationContext, M: Structure) -> Structure:
    """Embed every value and snap its coordinates onto the grid."""
    if M.signature != ctx.source:
        raise SpaceMismatch("structure is not over the source signature")
    interp: dict[str, dict] = {name: {} for r in ctx.source.relations
                               for name in ctx.components[r.name]}
    for rel in ctx.source.relations:
        emb = ctx.embedding(rel.space)
        names = ctx.components[rel.name]
        for t, v in M.interp[rel.name].items():
            coords = emb.coordinates(v).coords
            for name, c in zip(names, coords):
                interp[name][t] = point(snap_to_grid(ctx.grid, c))
    return Structure(ctx.target, M.universe, interp)


def decode_structure(ctx: TranslationContext, N: Structure) -> Structure:
    """Read a source structure back: nearest embedded net point, coordinatewise."""
    if N.signature != ctx.target:
        raise SpaceMismatch("structure is not over the target signature")
    interp: dict[str, dict] = {}
    for rel in ctx.source.relations:
        emb = ctx.embedding(rel.space)
        names = ctx.components[rel.name]
        entries = {}
        for t in N.interp[names[0]]:
            vec = tuple(N.interp[name][t].scalar for name in names)
            best = None
            for q in rel.space.net:
                d = linf(emb.coordinates(q), Point(vec))
                if best is None or d < best[0]:
                    best = (d, q)
            entries[t] = best[1]
        interp[rel.name] = entries
    return Structure(ctx.source, N.universe, interp)


def t0_violations(ctx: TranslationContext, N: Structure, tol: Rational = 0) -> list[str]:
    """Membership conditions: each transported value vector must lie within
    grid resolution (+ tol) of the embedded image of some source net point."""
    if N.signature != ctx.target:
        raise SpaceMismatch("structure is not over the target signature")
    tol = frac(tol)
    bound = ctx.grid.resolution + tol
    out = []
    for rel in ctx.source.relations:
        emb = ctx.embedding(rel.space)
        names = ctx.components[rel.name]
        for t in N.interp[names[0]]:
            vec = Point(tuple(N.interp[name][t].scalar for name in names))
            d = min(linf(emb.coordinates(q), vec) for q in rel.space.net)
            if d > bound:
                out.append(
                    f"{rel.name}{t}: embedded distance {d} to the nearest "
                    f"net point of {rel.space.label} exceeds {bound}"
                )
    return out


def check_T0(ctx: TranslationContext, N: Structure, tol: Rational = 0) -> CheckReport:
    failures = t0_violations(ctx, N, tol)
    return CheckReport(not failures, tuple(failures))


# ---------------------------------------------------------------------------
# Lattice expressions: min-max of affine images of generator values

@dataclass(frozen=True)
class Gen:
    index: int


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class AffineOf:
    a: Fraction
    b: Fraction
    sub: "LatticeExpr"


@dataclass(frozen=True)
class ClampOf:
    sub: "LatticeExpr"


@dataclass(frozen=True)
class MinOf:
    left: "LatticeExpr"
    right: "LatticeExpr"


@dataclass(frozen=True)
class MaxOf:
    left: "LatticeExpr"
    right: "LatticeExpr"


LatticeExpr = object  # Gen | Const | AffineOf | ClampOf | MinOf | MaxOf


def eval_expr(expr, values: Sequence[Fraction]) -> Fraction:
    if isinstance(expr, Gen):
        return values[expr.index]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, AffineOf):
        return expr.a * eval_expr(expr.sub, values) + expr.b
    if isinstance(expr, ClampOf):
        return min(ONE, max(ZERO, eval_expr(expr.sub, values)))
    if isinstance(expr, MinOf):
        return min(eval_expr(expr.left, values), eval_expr(expr.right, values))
    if isinstance(expr, MaxOf):
        return max(eval_expr(expr.left, values), eval_expr(expr.right, values))
    raise ValidationError(f"not a lattice expression: {expr!r}")


def expr_generators(expr) -> frozenset[int]:
    """Indices of the generators the expression actually reads."""
    if isinstance(expr, Gen):
        return frozenset([expr.index])
    if isinstance(expr, Const):
        return frozenset()
    if isinstance(expr, (AffineOf, ClampOf)):
        return expr_generators(expr.sub)
    if isinstance(expr, (MinOf, MaxOf)):
        return expr_generators(expr.left) | expr_generators(expr.right)
    raise ValidationError(f"not a lattice expression: {expr!r}")


def expr_lipschitz(expr) -> Fraction:
    """Constant of the expression as a map from generator vectors (sup metric)."""
    if isinstance(expr, Gen):
        return Fraction(1)
    if isinstance(expr, Const):
        return ZERO
    if isinstance(expr, AffineOf):
        return abs(expr.a) * expr_lipschitz(expr.sub)
    if isinstance(expr, ClampOf):
        return expr_lipschitz(expr.sub)
    if isinstance(expr, (MinOf, MaxOf)):
        return max(expr_lipschitz(expr.left), expr_lipschitz(expr.right))
    raise ValidationError(f"not a lattice expression: {expr!r}")


# Connectives are immutable, so structurally identical ones can be shared.
# Lattice expressions repeat the same few shapes thousands of times.
_cached_const = lru_cache(maxsize=None)(const)
_cached_affine = lru_cache(maxsize=None)(affine)
_cached_clamp = lru_cache(maxsize=None)(clamp01)
_cached_min = lru_cache(maxsize=None)(min_of)
_cached_max = lru_cache(maxsize=None)(max_of)


def expr_to_formula(expr, gen_formulas: Sequence[Formula],
                    codomain: ValueSpace | None = None) -> Formula:
    """Realize the expression as a formula combining the generator formulas.

    With a codomain given, every connective is pinned to it (it must cover
    the values within its resolution); otherwise image spaces are derived
    per node.
    """
    if isinstance(expr, Gen):
        return gen_formulas[expr.index]
    if isinstance(expr, Const):
        space = codomain or make_finite([point(expr.value)], label=f"const[{expr.value}]")
        return Apply(_cached_const(point(expr.value), space), ())
    if isinstance(expr, AffineOf):
        sub = expr_to_formula(expr.sub, gen_formulas, codomain)
        return Apply(_cached_affine(sub.value_space, expr.a, expr.b, codomain=codomain), (sub,))
    if isinstance(expr, ClampOf):
        sub = expr_to_formula(expr.sub, gen_formulas, codomain)
        return Apply(_cached_clamp(sub.value_space, codomain=codomain), (sub,))
    if isinstance(expr, (MinOf, MaxOf)):
        left = expr_to_formula(expr.left, gen_formulas, codomain)
        right = expr_to_formula(expr.right, gen_formulas, codomain)
        make = _cached_min if isinstance(expr, MinOf) else _cached_max
        return Apply(make(left.value_space, right.value_space, codomain=codomain),
                     (left, right))
    raise ValidationError(f"not a lattice expression: {expr!r}")


@dataclass(frozen=True, eq=False)
class Generator:
    """An observable on the base space with its sup over each net set."""

    theta: Connective
    values: Mapping[Point, Fraction] = field(repr=False)


def sup_generator(H: HyperSpace, theta: Connective) -> Generator:
    """Tabulate max of theta over the members of every point of H."""
    if theta.arity != 1 or theta.domain[0] != H.base or theta.codomain.dimension != 1:
        raise SpaceMismatch("generator observable must be real-valued on the base space")
    values = {}
    for k in H.net:
        members = [H.base.net[i] for i in sorted(H.member_indices(k))]
        values[k] = max(theta(m).scalar for m in members)
    return Generator(theta, values)


@dataclass(frozen=True, eq=False)
class LatticeApprox:
    """Exact min-max-affine reproduction of a function on a hyperspace net."""

    space: HyperSpace
    expr: object
    generators: tuple[Generator, ...]

    @cached_property
    def lipschitz(self) -> Fraction:
        return expr_lipschitz(self.expr)

    def evaluate(self, k: Point) -> Fraction:
        vals = [g.values[k] for g in self.generators]
        return eval_expr(self.expr, vals)

    def as_connective(self, name: str = "lattice") -> Connective:
        mapping = {(k,): point(self.evaluate(k)) for k in self.space.net}
        gen_lip = max((g.theta.lipschitz for g in self.generators), default=ZERO)
        codomain = make_finite(sorted(set(mapping.values())), label=f"{name}-values")
        return table([self.space], mapping, self.lipschitz * gen_lip,
                     codomain=codomain, name=name)


def _fold(make, items):
    # Balanced reduction: min/max are associative, and a tree of logarithmic
    # depth keeps deeply nested codings within the interpreter's stack.
    items = list(items)
    while len(items) > 1:
        items = [make(items[k], items[k + 1]) if k + 1 < len(items) else items[k]
                 for k in range(0, len(items), 2)]
    return items[0]


def _check_set_capacity(base: ValueSpace) -> None:
    if len(base.net) > MAX_SET_CODING_POINTS:
        raise CapacityError(
            f"set-quantifier coding is capped at base nets of size "
            f"{MAX_SET_CODING_POINTS}; {base.label} has {len(base.net)}"
        )


def lattice_approx(H: HyperSpace, g: Mapping[Point, Fraction],
                   generators: Sequence[Generator] = ()) -> LatticeApprox:
    """Reproduce g: H.net -> [0,1] exactly as a min-max of affines of sups.

    For each ordered pair of net sets with different g-values some generator
    must take different sups on them through an affine that stays in [0,1];
    when none of the supplied generators qualifies, a separator observable is
    synthesized from the base space.  The result is checked exactly on every
    net point before being returned.
    """
    _check_set_capacity(H.base)
    gvals = {}
    for k in H.net:
        if k not in g:
            raise ValidationError("g must be defined on every point of the hyperspace net")
        gvals[k] = frac(g[k])
        if not ZERO <= gvals[k] <= ONE:
            raise ValidationError(f"g value {gvals[k]} is outside [0,1]")

    gens = list(generators)
    for gen in gens:
        for k in H.net:
            if k not in gen.values:
                raise ValidationError("generator sup table misses a net point")

    def members(k: Point) -> CompactSet:
        return compact(H.base, *(H.base.net[i] for i in sorted(H.member_indices(k))))

    def pair_expr(k: Point, f: Point):
        gk, gf = gvals[k], gvals[f]
        if gk == gf:
            return Const(gk)
        for j, gen in enumerate(gens):
            wk, wf = gen.values[k], gen.values[f]
            if wk == wf:
                continue
            a = (gf - gk) / (wf - wk)
            b = gk - a * wk
            lo, hi = min(b, a + b), max(b, a + b)
            if ZERO <= lo and hi <= ONE:
                return AffineOf(a, b, Gen(j))
        sep = urysohn_separator(H.base, members(k), members(f))
        gen = sup_generator(H, sep)
        gens.append(gen)
        j = len(gens) - 1
        wk, wf = gen.values[k], gen.values[f]
        if wk == wf:
            raise ValidationError("separator failed to separate two distinct net sets")
        a = (gf - gk) / (wf - wk)
        b = gk - a * wk
        return AffineOf(a, b, Gen(j))

    rows = []
    for k in H.net:
        terms = [pair_expr(k, f) for f in H.net if f != k]
        rows.append(_fold(MaxOf, terms) if terms else Const(gvals[k]))
    expr = _fold(MinOf, rows)

    approx = LatticeApprox(H, expr, tuple(gens))
    for k in H.net:
        got = approx.evaluate(k)
        if got != gvals[k]:
            raise ValidationError(
                f"lattice interpolation failed at {k}: got {got}, wanted {gvals[k]}"
            )
    return approx


# ---------------------------------------------------------------------------
# Formula coding

@dataclass(frozen=True)
class Coded:
    formula: Formula
    budget: Fraction


class CodedFormula:
    """Lazy coder of one source formula against real-valued observables.

    codes(theta) returns a target-signature formula agreeing with
    theta(value of the source formula) within budget(theta) on transported
    structures; both are memoized per observable.
    """

    def __init__(self, ctx: TranslationContext, source: Formula):
        self.ctx = ctx
        self.source = source
        source.value_space
        self._memo: dict[tuple[int, int], Coded] = {}
        self.error_budget = ZERO

    def codes(self, theta: Connective | None = None) -> Formula:
        return self._code(self.source, self._default(theta)).formula

    def budget_of(self, theta: Connective | None = None) -> Fraction:
        return self._code(self.source, self._default(theta)).budget

    def _default(self, theta: Connective | None) -> Connective:
        if theta is not None:
            self._check_observable(self.source, theta)
            return theta
        space = self.source.value_space
        if space.dimension != 1 or not space.standard_metric:
            raise ValidationError(
                "a real-valued observable is required for set-valued formulas"
            )
        return self.ctx.identity_on(space)

    @staticmethod
    def _check_observable(phi: Formula, theta: Connective):
        if theta.arity != 1 or theta.domain[0] != phi.value_space:
            raise SpaceMismatch(
                f"observable {theta.name} does not accept values of {phi.value_space.label}"
            )
        if theta.codomain.dimension != 1:
            raise SpaceMismatch(f"observable {theta.name} is not real-valued")

    def _code(self, phi: Formula, theta: Connective) -> Coded:
        key = (id(phi), id(theta))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._build(phi, theta)
            self._memo[key] = hit
            self.error_budget = max(self.error_budget, hit.budget)
        return hit

    def _build(self, phi: Formula, theta: Connective) -> Coded:
        space = phi.value_space
        if isinstance(space, HyperSpace):
            # refuse before any embedding or metric of the hyperspace is
            # touched: those are exponential in the base net
            _check_set_capacity(space.base)
        if isinstance(phi, Atomic):
            return self._build_atomic(phi, theta)
        if isinstance(phi, Apply):
            return self._build_apply(phi, theta)
        if isinstance(phi, CauchyLimit):
            return self._code(phi.body, theta)
        if isinstance(phi, Quant):
            if phi.kind is QuantKind.SET:
                return self._build_set(phi, theta)
            return self._build_extremum(phi, theta)
        raise ValidationError(f"cannot code {type(phi).__name__}")

    def _extension(self, keys: Sequence[tuple[Point, ...]],
                   values: Mapping[tuple[Point, ...], Fraction],
                   label: str, name: str) -> tuple[Connective, Fraction]:
        """McShane-extend a finite table over the flat grid cube; returns the
        connective and its (tight) constant."""
        flat_keys = [Point(sum((p.coords for p in k), ())) for k in keys]
        lip = ZERO
        for i, p in enumerate(flat_keys):
            for j in range(i + 1, len(flat_keys)):
                q = flat_keys[j]
                gap = abs(values[keys[i]] - values[keys[j]])
                if gap > 0:
                    d = linf(p, q)
                    if d == 0:
                        raise ValidationError(
                            f"{name}: embedding does not separate two net points "
                            f"with different observable values"
                        )
                    lip = max(lip, gap / d)
        net_space = make_finite(flat_keys, label=label)
        mapping = {(fk,): point(values[k]) for fk, k in zip(flat_keys, keys)}
        dim = net_space.dimension
        ext = mcshane_extend(mapping, lip, net_space, [self.ctx.grid] * dim,
                             codomain=self.ctx.grid, name=name)
        return ext, lip

    def _build_atomic(self, phi: Atomic, theta: Connective) -> Coded:
        ctx = self.ctx
        emb = ctx.embedding(phi.space)
        keys = [(emb.coordinates(q),) for q in phi.space.net]
        values = {k: theta(q).scalar for k, q in zip(keys, phi.space.net)}
        ext, lip = self._extension(
            keys, values,
            label=f"emb({phi.space.label})", name=f"~{theta.name}@{phi.symbol}",
        )
        children = tuple(
            Atomic(nm, phi.args, ctx.grid) for nm in ctx.components[phi.symbol]
        )
        formula = Apply(ext, children)
        budget = lip * ctx.space_snap_bound(phi.space)
        return Coded(formula, budget)

    def _build_apply(self, phi: Apply, theta: Connective) -> Coded:
        ctx = self.ctx
        conn = phi.conn
        if conn.arity == 0:
            v = theta(conn()).scalar
            return Coded(Apply(const(point(v), ctx.grid), ()), ZERO)

        child_spaces = [c.value_space for c in phi.children]
        for s in child_spaces:
            if isinstance(s, HyperSpace):
                _check_set_capacity(s.base)
        embs = [ctx.embedding(s) for s in child_spaces]

        # every child enters through its embedding coordinates
        coded_children: list[Coded] = []
        for child, emb in zip(phi.children, embs):
            for obs in emb.separating_family:
                coded_children.append(self._code(child, obs))

        # tabulate theta(conn(..)) over the product of the child nets
        def tuples(spaces):
            out = [()]
            for s in spaces:
                out = [t + (q,) for t in out for q in s.net]
            return out

        keys = []
        values = {}
        for combo in tuples(child_spaces):
            flat_key = tuple(
                emb.coordinates(q) for emb, q in zip(embs, combo)
            )
            out = conn(*combo)
            values[flat_key] = theta(out).scalar
            keys.append(flat_key)
        ext, lip = self._extension(
            keys, values,
            label=f"emb({conn.name})", name=f"~{theta.name}@{conn.name}",
        )
        formula = Apply(ext, tuple(c.formula for c in coded_children))
        budget = lip * sum((c.budget for c in coded_children), start=ZERO)
        return Coded(formula, budget)

    def _build_extremum(self, phi: Quant, theta: Connective) -> Coded:
        ctx = self.ctx
        body_space = phi.body.value_space
        if _is_identity(theta):
            inner = self._code(phi.body, ctx.identity_on(body_space))
            return Coded(Quant(phi.kind, phi.var, inner.formula), inner.budget)
        # theta(extremum of the collected values) factors through the value set
        _check_set_capacity(body_space)
        H = hyper(body_space)
        pick = max if phi.kind is QuantKind.SUP else min
        g = {}
        for k in H.net:
            chosen = pick(
                (body_space.net[i] for i in sorted(H.member_indices(k))),
                key=lambda p: p.scalar,
            )
            g[k] = theta(chosen).scalar
        virtual = Quant(QuantKind.SET, phi.var, phi.body)
        coded = self._build_from_lattice(virtual, H, g)
        return Coded(coded.formula, coded.budget + theta.lipschitz * body_space.resolution)

    def _build_set(self, phi: Quant, theta: Connective) -> Coded:
        H = phi.value_space
        g = {k: theta(k).scalar for k in H.net}
        return self._build_from_lattice(phi, H, g)

    def _build_from_lattice(self, phi: Quant, H: HyperSpace,
                            g: Mapping[Point, Fraction]) -> Coded:
        ctx = self.ctx
        base = H.base
        # the point-hit observables separate any two distinct sets, so no
        # per-pair separator synthesis is needed and the body is only ever
        # coded against len(base.net) distinct observables (shared via memo)
        hits = [sup_generator(H, ctx.point_hit(base, i)) for i in range(len(base.net))]
        approx = lattice_approx(H, g, hits)
        used = expr_generators(approx.expr)
        gen_formulas: list = [None] * len(approx.generators)
        drift = ZERO
        for j in sorted(used):
            gen = approx.generators[j]
            inner = self._code(phi.body, gen.theta)
            gen_formulas[j] = Quant(QuantKind.SUP, phi.var, inner.formula)
            drift = max(drift, inner.budget + gen.theta.lipschitz * base.resolution)
        formula = expr_to_formula(approx.expr, gen_formulas, ctx.grid)
        return Coded(formula, approx.lipschitz * drift)


def code_formula(ctx: TranslationContext, phi: Formula) -> CodedFormula:
    return CodedFormula(ctx, phi)


@dataclass(frozen=True, eq=False)
class CodedCondition:
    formula: Formula
    budget: Fraction
    observable: Connective


def code_condition(ctx: TranslationContext, phi: Formula, target) -> CodedCondition:
    """Code the condition "value of phi lies in the target set".

    The observable is the distance to the target (truncated at 1); the coded
    formula is its coding, so the source condition holds exactly when the
    coded formula evaluates within budget of zero on the transported
    structure.
    """
    space = phi.value_space
    if isinstance(target, CompactSet):
        if isinstance(space, HyperSpace):
            members = [encode_subset(space, target.members)]
        else:
            members = list(target.members)
    else:
        members = [m if isinstance(m, Point) else point(frac(m)) for m in target]
    if not members:
        raise ValidationError("condition target is empty")
    for m in members:
        space.net_index(m)  # raises if the target is off the net
    mapping = {}
    for q in space.net:
        d = min(space.metric(q, m) for m in members)
        mapping[(q,)] = point(min(ONE, d))
    codomain = make_finite(sorted(set(mapping.values())), label="dist-values")
    dist = table([space], mapping, Fraction(1), codomain=codomain,
                 name="dist-to-target")
    coder = CodedFormula(ctx, phi)
    return CodedCondition(coder.codes(dist), coder.budget_of(dist), dist)
