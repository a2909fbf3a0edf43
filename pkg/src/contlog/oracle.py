"""Brute-force ground truth and a randomized property harness.

Everything here is recomputed by direct enumeration — quantifiers as loops
over the universe, set values as explicit member lists, budgets compared
against exhaustively evaluated differences — sharing nothing with the
translation pipeline except `evaluate` itself.  The generators produce
well-typed formulas and structures by construction; all randomness flows
from explicit seeds, so every trial is reproducible from its record.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .connective import (Connective, affine, clamp01, identity, max_of,
                         min_of, mul, neg, table, tight_lipschitz,
                         truncated_sub, bounded_add, const)
from .errors import EvalError, ValidationError
from .formula import (Apply, Atomic, CauchyLimit, Formula, Quant, QuantKind,
                      Relation, Signature, atom, cauchy_limit, signature)
from .hyperspace import (MAX_BASE_POINTS, CompactSet, encode_subset, hyper,
                         inf_theta, sup_theta)
from .semantics import (Structure, check_pseudometric, evaluate,
                        eval_error_bound, quotient, structure,
                        zero_distance_classes)
from .translate import TranslationContext, code_formula, t0_violations, \
    decode_structure, transport_structure
from .valuespace import (ONE, ZERO, Point, Rational, ValueSpace, frac,
                         make_finite, make_interval, nearest, point)

#: Exact coordinates are drawn from the eighths so that a step-1/8 grid
#: carries them without snapping.
EXACT_POOL = tuple(Fraction(k, 8) for k in range(9))
EXACT_STEP = Fraction(1, 8)

#: Grid presentations deliberately misaligned with the translation grid.
GRID_STEPS = (Fraction(1, 3), Fraction(1, 5), Fraction(1, 6), Fraction(1, 7))
GRID_TRANSLATION_STEP = Fraction(1, 4)

#: Set-quantifier bodies keep at most this many net points (the coding
#: enumerates every nonempty subset, so this caps the lattice size).
MAX_SET_BODY_POINTS = 4

_NAMES = ("R", "S", "T")


@dataclass(frozen=True)
class FuzzConfig:
    """Knobs for the random generators, with hard caps to stay tractable."""

    seed: int
    universe_size: int = 4
    formula_depth: int = 2
    net_size: int = 4
    trials: int = 100
    tol: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "tol", frac(self.tol))
        if not isinstance(self.seed, int):
            raise ValidationError("seed must be an integer")
        if not 1 <= self.universe_size <= 6:
            raise ValidationError("universe_size must be in 1..6")
        if not 0 <= self.formula_depth <= 4:
            raise ValidationError("formula_depth must be in 0..4")
        if not 1 <= self.net_size <= 5:
            raise ValidationError("net_size must be in 1..5")
        if self.trials < 1:
            raise ValidationError("trials must be positive")
        if self.tol < 0:
            raise ValidationError("tol must be nonnegative")


@dataclass(frozen=True)
class TrialRecord:
    """One line of a fuzz report; witness values are pre-stringified."""

    kind: str
    trial: int
    ok: bool
    detail: str = ""
    sizes: Mapping[str, int] = field(default_factory=dict)
    witness: Mapping[str, str] | None = None

    def as_json(self) -> dict:
        doc = {"kind": self.kind, "trial": self.trial, "ok": self.ok,
               "detail": self.detail, "sizes": dict(self.sizes)}
        if self.witness is not None:
            doc["witness"] = dict(self.witness)
        return doc


def _rng(cfg: FuzzConfig, kind: str, trial: int) -> random.Random:
    return random.Random(f"{kind}:{cfg.seed}:{trial}")


# ---------------------------------------------------------------------------
# Random spaces, signatures, structures


def random_space(rng: random.Random, cfg: FuzzConfig, *, grid: bool = False,
                 dim: int = 1, max_points: int | None = None) -> ValueSpace:
    """An exact finite space on the eighths, or a misaligned interval grid."""
    if grid:
        return make_interval(0, 1, rng.choice(GRID_STEPS))
    cap = min(cfg.net_size, max_points or cfg.net_size)
    k = rng.randint(1, cap)
    if dim == 1:
        return make_finite([point(c) for c in rng.sample(EXACT_POOL, k)])
    pts: list[Point] = []
    seen: set[tuple] = set()
    while len(pts) < k:
        coords = tuple(rng.choice(EXACT_POOL) for _ in range(dim))
        if coords not in seen:
            seen.add(coords)
            pts.append(Point(coords))
    return make_finite(pts)


def random_signature(rng: random.Random, cfg: FuzzConfig, *,
                     grid: bool = False) -> Signature:
    """One to three relation symbols; exact mode occasionally vector-valued."""
    count = rng.randint(1, 3)
    relations = []
    for i in range(count):
        arity = rng.choice((1, 1, 2))
        dim = 2 if (not grid and rng.random() < 0.2) else 1
        if grid and i == 0:
            # keep one small-net grid relation so set quantifiers stay codable
            space = make_interval(0, 1, Fraction(1, 3))
        else:
            space = random_space(rng, cfg, grid=grid, dim=dim,
                                 max_points=MAX_SET_BODY_POINTS)
        relations.append(Relation(_NAMES[i], arity, space))
    return signature(relations)


def random_structure(cfg: FuzzConfig, sig: Signature,
                     rng: random.Random | None = None) -> Structure:
    """Uniform interpretations from each symbol's net; deterministic per seed."""
    rng = rng or random.Random(f"structure:{cfg.seed}")
    n = rng.randint(1, cfg.universe_size)
    universe = tuple(f"e{i}" for i in range(n))
    interp: dict[str, dict[tuple[str, ...], Point]] = {}
    for rel in sig.relations:
        tab = {}
        for t in itertools.product(universe, repeat=rel.arity):
            tab[t] = rng.choice(rel.space.net)
        interp[rel.name] = tab
    return Structure(sig, universe, interp)


def random_theta(rng: random.Random, space: ValueSpace, *,
                 stable: bool = False) -> Connective:
    """A random real-valued observable on the given space."""
    if not space.standard_metric:  # hyperspace: extremum of a base observable
        base = space.base  # type: ignore[attr-defined]
        inner = random_theta(rng, base, stable=stable)
        return rng.choice((sup_theta, inf_theta))(inner)
    if space.dimension == 1 and stable:
        return rng.choice((identity, neg))(space)
    if space.dimension == 1:
        pick = rng.random()
        if pick < 0.25:
            return identity(space)
        if pick < 0.5:
            return neg(space)
    mapping = {p: point(rng.choice(EXACT_POOL)) for p in space.net}
    lip = tight_lipschitz(space, mapping)
    codomain = make_finite(sorted(set(mapping.values())))
    return table(space, mapping, lip, codomain, name="obs")


# ---------------------------------------------------------------------------
# Random formulas


def _safe_affine(rng: random.Random, space: ValueSpace) -> Connective | None:
    a = rng.choice((Fraction(1, 2), Fraction(-1, 2), Fraction(1, 4), ONE))
    values = [a * p.coords[0] for p in space.net]
    b_lo, b_hi = -min(values), ONE - max(values)
    if b_lo > b_hi:
        return None
    b = b_lo + (b_hi - b_lo) * rng.choice((ZERO, Fraction(1, 2), ONE))
    return affine(space, a, b)


class _FormulaBuilder:
    """Recursive generator of well-typed formulas over a signature.

    In stable mode every choice depends only on the shape of the signature
    (names, arities, dimensions), never on net contents, so the same seed
    yields parallel formulas over refined presentations of the same spaces.
    """

    def __init__(self, cfg: FuzzConfig, sig: Signature, rng: random.Random,
                 grid: bool, stable: bool, max_free: int = 2,
                 set_cap: int = MAX_SET_BODY_POINTS):
        self.cfg, self.sig, self.rng = cfg, sig, rng
        self.grid, self.stable = grid, stable
        self.max_free = max_free
        self.set_cap = set_cap
        self.frees: list[str] = []
        self.bound = 0
        self.set_quota = 1 if grid else 2
        if not any(len(r.space.net) <= set_cap for r in sig.relations):
            self.set_quota = 0

    def build(self) -> Formula:
        depth = self.rng.randint(0, self.cfg.formula_depth)
        return self._node(depth, ())

    # -- variable supply

    def _var(self, scope: tuple[str, ...]) -> str:
        choices = list(scope) + self.frees
        if len(self.frees) < self.max_free:
            choices.append("<new>")
        pick = self.rng.choice(choices)
        if pick == "<new>":
            pick = f"x{len(self.frees)}"
            self.frees.append(pick)
        return pick

    def _fresh_bound(self) -> str:
        self.bound += 1
        return f"v{self.bound}"

    # -- node production

    def _atomic(self, scope: tuple[str, ...]) -> Formula:
        rel = self.rng.choice(self.sig.relations)
        return atom(self.sig, rel.name, *(self._var(scope) for _ in range(rel.arity)))

    def _node(self, depth: int, scope: tuple[str, ...]) -> Formula:
        if depth == 0:
            return self._atomic(scope)
        kinds = ["atomic", "unary", "binary", "extremum", "extremum"]
        if self.set_quota > 0:
            kinds.append("set")
        kind = self.rng.choice(kinds)
        if kind == "atomic":
            return self._atomic(scope)
        if kind == "unary":
            return self._shrink(self._unary(self._node(depth - 1, scope)))
        if kind == "binary":
            return self._shrink(self._binary(self._node(depth - 1, scope),
                                             self._node(depth - 1, scope)))
        if kind == "extremum":
            var = self._fresh_bound()
            body = self._as_real(self._node(depth - 1, scope + (var,)))
            return Quant(self.rng.choice((QuantKind.SUP, QuantKind.INF)), var, body)
        # set quantifier: body restricted to atomic so its value set stays small
        self.set_quota -= 1
        var = self._fresh_bound()
        body = self._set_body(scope + (var,))
        q = Quant(QuantKind.SET, var, body)
        if self.stable or self.rng.random() < 0.6:
            inner = random_theta(self.rng, body.value_space, stable=self.stable)
            wrapped = Apply(self.rng.choice((sup_theta, inf_theta))(inner), (q,))
            return self._shrink(wrapped)
        return q

    def _set_body(self, scope: tuple[str, ...]) -> Formula:
        codable = [r for r in self.sig.relations
                   if len(r.space.net) <= self.set_cap]
        rel = self.rng.choice(codable)
        body: Formula = atom(self.sig, rel.name,
                             *(self._var(scope) for _ in range(rel.arity)))
        if not self.stable and rel.space.dimension == 1 and self.rng.random() < 0.3:
            body = self._unary(body)
        return body

    def _unary(self, child: Formula) -> Formula:
        space = child.value_space
        if not space.standard_metric or space.dimension > 1:
            return self._as_real(child)
        if self.stable:
            return Apply(self.rng.choice((neg, clamp01))(space), (child,))
        pick = self.rng.random()
        if pick < 0.3:
            return Apply(neg(space), (child,))
        if pick < 0.45:
            return Apply(clamp01(space), (child,))
        if pick < 0.65:
            conn = _safe_affine(self.rng, space)
            if conn is not None:
                return Apply(conn, (child,))
        return Apply(random_theta(self.rng, space), (child,))

    def _binary(self, a: Formula, b: Formula) -> Formula:
        a, b = self._as_real(a), self._as_real(b)
        ops = [min_of, max_of, bounded_add, truncated_sub]
        if not self.stable:
            ops.append(mul)
        op = self.rng.choice(ops)
        return Apply(op(a.value_space, b.value_space), (a, b))

    def _as_real(self, node: Formula) -> Formula:
        """Coerce any node to a real-valued one with a random observable."""
        space = node.value_space
        if space.standard_metric and space.dimension == 1:
            return self._shrink(node)
        wrapped = Apply(random_theta(self.rng, space, stable=self.stable), (node,))
        return self._shrink(wrapped)

    def _shrink(self, node: Formula) -> Formula:
        """Keep value sets small: extrema may be coded over their hyperspace.

        Derived images of binary connectives can outgrow the set-coding cap;
        squashing them through a few-valued table preserves well-typedness
        while keeping every lattice the coder might build enumerable.  Never
        fires in stable mode (net contents must not steer the generator) —
        stable callers evaluate only and face no coding caps.
        """
        space = node.value_space
        if self.stable or not space.standard_metric or space.dimension != 1:
            return node
        if len(space.net) <= MAX_SET_BODY_POINTS:
            return node
        vals = self.rng.sample(EXACT_POOL, MAX_SET_BODY_POINTS)
        mapping = {p: point(self.rng.choice(vals)) for p in space.net}
        lip = tight_lipschitz(space, mapping)
        codomain = make_finite(sorted(set(mapping.values())))
        return Apply(table(space, mapping, lip, codomain, name="squash"), (node,))


def random_formula(cfg: FuzzConfig, sig: Signature,
                   rng: random.Random | None = None, *, grid: bool = False,
                   stable: bool = False,
                   set_cap: int = MAX_SET_BODY_POINTS) -> Formula:
    """A well-typed formula of depth at most cfg.formula_depth.

    set_cap bounds the net size of set-quantifier bodies; the default keeps
    them codable, while evaluation-only callers may raise it to the
    hyperspace capacity.
    """
    rng = rng or random.Random(f"formula:{cfg.seed}")
    return _FormulaBuilder(cfg, sig, rng, grid, stable, set_cap=set_cap).build()


def _assignments(M: Structure, frees, fixed: Mapping[str, str] | None):
    """All total assignments of the free variables, or just the given one."""
    if fixed is not None:
        return [dict(fixed)]
    names = sorted(frees)
    return [dict(zip(names, combo))
            for combo in itertools.product(M.universe, repeat=len(names))]


def _as_point(space: ValueSpace, v) -> Point:
    return encode_subset(space, v.members) if isinstance(v, CompactSet) else v


# ---------------------------------------------------------------------------
# The two central verifiers


@dataclass(frozen=True)
class CodingCheck:
    ok: bool
    checked: int
    budget: Fraction
    max_difference: Fraction
    witness: dict | None = None


def verify_coding(ctx: TranslationContext, M: Structure, phi: Formula,
                  theta: Connective | None = None, tol: Rational = ZERO,
                  assignment: Mapping[str, str] | None = None) -> CodingCheck:
    """Compare the coded formula against theta of the source value.

    Both sides are evaluated directly: the source formula in M, the coded
    formula in the transported structure.  With no assignment given, every
    assignment of the free variables is checked.
    """
    tol = frac(tol)
    space = phi.value_space
    if theta is None and (space.dimension != 1 or not space.standard_metric):
        raise ValidationError("a formula that is not real-valued needs an observable")
    coded = code_formula(ctx, phi)
    target = coded.codes(theta)
    budget = coded.budget_of(theta)
    N = transport_structure(ctx, M)

    worst = ZERO
    witness = None
    asgs = _assignments(M, phi.free_vars, assignment)
    for asg in asgs:
        src = evaluate(M, phi, asg).value
        p = _as_point(space, src)
        rhs = theta(p).scalar if theta is not None else p.scalar
        lhs = evaluate(N, target, asg).scalar
        diff = abs(lhs - rhs)
        if diff > worst:
            worst = diff
        if diff > budget + tol and witness is None:
            witness = {
                "assignment": dict(asg),
                "target_value": str(lhs),
                "source_value": str(rhs),
                "difference": str(diff),
                "budget": str(budget),
            }
    return CodingCheck(witness is None, len(asgs), budget, worst, witness)


@dataclass(frozen=True)
class IdentityCheck:
    ok: bool
    checked: int
    witness: dict | None = None


def _single_free_var(body: Formula, var: str | None) -> str:
    if var is not None:
        return var
    frees = sorted(body.free_vars)
    if len(frees) != 1:
        raise ValidationError(
            f"cannot infer the quantified variable from free vars {frees}; pass var="
        )
    return frees[0]


def verify_quantifier_identity(M: Structure, body: Formula,
                               theta: Connective | None = None,
                               var: str | None = None,
                               assignment: Mapping[str, str] | None = None) -> IdentityCheck:
    """sup of theta over the set quantifier's value equals the direct sup.

    The left side collects the compact value set of `Q var. body` and takes
    the maximum of theta over its members; the right side maximizes theta of
    the body value over universe elements directly.  Exact equality.
    """
    var = _single_free_var(body, var)
    space = body.value_space
    if theta is None:
        if space.dimension != 1 or not space.standard_metric:
            raise ValidationError("a non-real body needs an explicit observable")
        theta = identity(space)
    q = Quant(QuantKind.SET, var, body)
    witness = None
    asgs = _assignments(M, body.free_vars - {var}, assignment)
    for asg in asgs:
        kset = evaluate(M, q, asg).value
        lhs = max(theta(m).scalar for m in kset.members)
        rhs = max(
            theta(_as_point(space, evaluate(M, body, {**asg, var: a}).value)).scalar
            for a in M.universe
        )
        if lhs != rhs and witness is None:
            witness = {"assignment": dict(asg), "via_set": str(lhs), "direct": str(rhs)}
    return IdentityCheck(witness is None, len(asgs), witness)


def verify_primordial_bounds(M: Structure, body: Formula, var: str | None = None,
                             assignment: Mapping[str, str] | None = None) -> IdentityCheck:
    """max/min member of the primordial value set equal the sup/inf values."""
    var = _single_free_var(body, var)
    space = body.value_space
    if space.dimension != 1 or not space.standard_metric:
        raise ValidationError("sup/inf comparison needs a real-valued body")
    q = Quant(QuantKind.SET, var, body)
    witness = None
    asgs = _assignments(M, body.free_vars - {var}, assignment)
    for asg in asgs:
        members = [m.scalar for m in evaluate(M, q, asg).value.members]
        sup_val = evaluate(M, Quant(QuantKind.SUP, var, body), asg).scalar
        inf_val = evaluate(M, Quant(QuantKind.INF, var, body), asg).scalar
        if (max(members) != sup_val or min(members) != inf_val) and witness is None:
            witness = {
                "assignment": dict(asg),
                "set_max": str(max(members)), "sup": str(sup_val),
                "set_min": str(min(members)), "inf": str(inf_val),
            }
    return IdentityCheck(witness is None, len(asgs), witness)


# ---------------------------------------------------------------------------
# Negative controls: corrupted codings and broken pseudometrics


def _bump_table(conn: Connective, delta: Fraction, grid: ValueSpace) -> Connective:
    """The same connective with every entry shifted by delta (clamped)."""
    if conn.arity == 0:
        v = conn().scalar + delta
        return const(point(min(ONE, max(ZERO, v))), grid, name=f"{conn.name}~bump")
    mapping = {}
    for key in itertools.product(*(d.net for d in conn.domain)):
        v = conn(*key).scalar + delta
        mapping[key] = point(min(ONE, max(ZERO, v)))
    return table(tuple(conn.domain), mapping, conn.lipschitz, grid,
                 name=f"{conn.name}~bump")


def _bump_first_apply(node: Formula, delta: Fraction, grid: ValueSpace) -> Formula:
    if isinstance(node, Apply):
        return Apply(_bump_table(node.conn, delta, grid), node.children)
    if isinstance(node, Quant):
        return Quant(node.kind, node.var, _bump_first_apply(node.body, delta, grid))
    if isinstance(node, CauchyLimit):
        return _bump_first_apply(node.body, delta, grid)
    raise EvalError(f"nothing to corrupt under {node}")


def verify_corruption_detected(ctx: TranslationContext, M: Structure,
                               phi: Formula, theta: Connective | None = None,
                               tol: Rational = ZERO) -> CodingCheck:
    """Mutate one table of the coded formula and demand the check fails.

    The bump is a uniform 1/4 shift, directed away from the clamping
    boundary of the uncorrupted value so extrema cannot mask it.  `ok`
    means the corruption WAS detected.
    """
    tol = frac(tol)
    space = phi.value_space
    coded = code_formula(ctx, phi)
    target = coded.codes(theta)
    budget = coded.budget_of(theta)
    N = transport_structure(ctx, M)
    asgs = _assignments(M, phi.free_vars, None)

    base = evaluate(N, target, asgs[0]).scalar
    delta = Fraction(1, 4) if base <= Fraction(1, 2) else Fraction(-1, 4)
    bad = _bump_first_apply(target, delta, ctx.grid)

    worst = ZERO
    caught = None
    for asg in asgs:
        src = evaluate(M, phi, asg).value
        p = _as_point(space, src)
        rhs = theta(p).scalar if theta is not None else p.scalar
        lhs = evaluate(N, bad, asg).scalar
        diff = abs(lhs - rhs)
        worst = max(worst, diff)
        if diff > budget + tol and caught is None:
            caught = {"assignment": dict(asg), "difference": str(diff),
                      "budget": str(budget), "shift": str(delta)}
    return CodingCheck(caught is not None, len(asgs), budget, worst, caught)


PSEUDOMETRIC_LAWS = ("reflexivity", "symmetry", "triangle", "modulus")


def random_metric_structure(cfg: FuzzConfig, rng: random.Random, *,
                            min_universe: int = 2,
                            force_classes: bool = False) -> Structure:
    """A structure with a genuine pseudometric: distances between placements.

    Every element is placed on the eighths; the distance symbol reads off
    placement gaps and the remaining symbol is a function of placements, so
    zero-distance elements agree and the tight modulus is honest.
    """
    n = rng.randint(max(2, min_universe), max(cfg.universe_size, min_universe, 2))
    universe = tuple(f"e{i}" for i in range(n))
    placement = {e: rng.choice(EXACT_POOL) for e in universe}
    if force_classes:
        placement[universe[1]] = placement[universe[0]]
    pool_space = make_finite([point(c) for c in EXACT_POOL])

    dtab = {(a, b): point(abs(placement[a] - placement[b]))
            for a in universe for b in universe}
    fn = {c: rng.choice(EXACT_POOL) for c in set(placement.values())}
    rtab = {(a,): point(fn[placement[a]]) for a in universe}

    tight = ZERO
    for a in universe:
        for b in universe:
            gap = abs(fn[placement[a]] - fn[placement[b]])
            move = abs(placement[a] - placement[b])
            if move > 0 and gap / move > tight:
                tight = gap / move
    sig = signature(
        [Relation("d", 2, pool_space), Relation("R", 1, pool_space)],
        distance_symbol="d", moduli={"R": max(tight, ONE)},
    )
    return Structure(sig, universe, {"d": dtab, "R": rtab})


def pseudometric_violation(cfg: FuzzConfig, rng: random.Random,
                           law: str | None = None) -> tuple[Structure, str]:
    """A structure breaking one pseudometric law, named so checks can match."""
    law = law or rng.choice(PSEUDOMETRIC_LAWS)
    M = random_metric_structure(cfg, rng, min_universe=3 if law == "triangle" else 2)
    dtab = dict(M.interp["d"])
    rtab = dict(M.interp["R"])
    sig = M.signature
    a, b, c = (M.universe + M.universe)[:3]
    bump = Fraction(1, 4)
    if law == "reflexivity":
        dtab[(a, a)] = point(bump)
    elif law == "symmetry":
        back = dtab[(b, a)].scalar
        dtab[(a, b)] = point(back + bump if back + bump <= ONE else back - bump)
    elif law == "triangle":
        for s, t in ((a, c), (c, a)):
            dtab[(s, t)] = point(ONE)
        for s, t in ((a, b), (b, a), (b, c), (c, b)):
            dtab[(s, t)] = point(bump)
    elif law == "modulus":
        # distinct placements with maximally different values, then lie about L
        dtab[(a, b)] = dtab[(b, a)] = point(Fraction(1, 2))
        dtab[(a, a)] = dtab[(b, b)] = point(ZERO)
        rtab[(a,)] = point(ZERO)
        rtab[(b,)] = point(ONE)
        sig = signature(sig.relations, distance_symbol="d", moduli={"R": ONE})
    else:
        raise ValidationError(f"unknown pseudometric law {law!r}")
    return Structure(sig, M.universe, {"d": dtab, "R": rtab}), law


# ---------------------------------------------------------------------------
# Cauchy-limit declarations


def verify_limit_declaration(M: Structure, formulas: Sequence[Formula],
                             rate: Callable[[int], Fraction], tol: Rational,
                             true_limit: Fraction | None = None,
                             assignment: Mapping[str, str] | None = None) -> IdentityCheck:
    """Spot-check a declared uniformly Cauchy sequence against brute force.

    Verifies the pairwise rate bound on the whole provided prefix, that the
    wrapper picked the least adequate index, and (when the true limit is
    known) that the truncation is within tolerance of it.
    """
    tol = frac(tol)
    asg = dict(assignment or {})
    vals = [evaluate(M, f, asg).scalar for f in formulas]
    witness = None
    for i, vi in enumerate(vals):
        for j in range(i + 1, len(vals)):
            bound = frac(rate(i))
            if abs(vi - vals[j]) > bound and witness is None:
                witness = {"pair": f"{i},{j}", "gap": str(abs(vi - vals[j])),
                           "rate": str(bound)}
    lim = cauchy_limit(rate, formulas, tol)
    expected_index = next(n for n in range(len(formulas)) if frac(rate(n)) <= tol)
    if lim.index != expected_index and witness is None:
        witness = {"index": str(lim.index), "expected": str(expected_index)}
    chosen = evaluate(M, lim, asg).scalar
    if chosen != vals[lim.index] and witness is None:
        witness = {"wrapped": str(chosen), "direct": str(vals[lim.index])}
    if true_limit is not None and abs(chosen - true_limit) > tol and witness is None:
        witness = {"value": str(chosen), "limit": str(true_limit), "tol": str(tol)}
    return IdentityCheck(witness is None, len(vals), witness)


# ---------------------------------------------------------------------------
# Trial drivers


def _sizes(M: Structure, phi: Formula | None = None) -> dict[str, int]:
    out = {"universe": len(M.universe), "relations": len(M.signature.relations),
           "net": max(len(r.space.net) for r in M.signature.relations)}
    if phi is not None:
        out["free_vars"] = len(phi.free_vars)
    return out


def _record(kind: str, trial: int, ok: bool, detail: str,
            sizes: dict, witness) -> TrialRecord:
    return TrialRecord(kind, trial, ok, detail, sizes,
                       None if witness is None else witness)


def run_coding_trials(cfg: FuzzConfig, *, grid: bool = False,
                      trials: int | None = None) -> list[TrialRecord]:
    """Criterion: the coded formula tracks theta of the source value.

    Exact mode also insists the budget is zero and the agreement literal;
    grid mode checks the difference against the (positive) budget.
    """
    kind = "coding-grid" if grid else "coding-exact"
    step = GRID_TRANSLATION_STEP if grid else EXACT_STEP
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, kind, i)
        sig = random_signature(rng, cfg, grid=grid)
        M = random_structure(cfg, sig, rng)
        phi = random_formula(cfg, sig, rng, grid=grid)
        theta = random_theta(rng, phi.value_space)
        ctx = TranslationContext(sig, step)
        check = verify_coding(ctx, M, phi, theta, tol=cfg.tol)
        ok, witness = check.ok, check.witness
        detail = f"|diff| {check.max_difference} <= budget {check.budget}"
        if not grid and ok and (check.budget != 0 or check.max_difference != 0):
            ok = False
            witness = {"budget": str(check.budget),
                       "difference": str(check.max_difference)}
            detail = "exact trial must have zero budget and zero difference"
        out.append(_record(kind, i, ok, detail, _sizes(M, phi), witness))
    return out


def run_quantifier_trials(cfg: FuzzConfig, *, trials: int | None = None,
                          checks: Sequence[str] = ("identity", "primordial"),
                          ) -> list[TrialRecord]:
    """Criteria: the set-quantifier identity and its sup/inf refinements.

    `checks` selects which verifications run — the instances generated are
    the same either way, so the two criteria can be reported separately.
    """
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "quantifier", i)
        sig = random_signature(rng, cfg)
        M = random_structure(cfg, sig, rng)
        builder = _FormulaBuilder(cfg, sig, rng, grid=False, stable=False)
        var = "q"
        body = builder._as_real(builder._node(min(cfg.formula_depth, 2), (var,)))
        if var not in body.free_vars:  # ensure the quantified variable matters
            rel = next(r for r in sig.relations)
            extra = atom(sig, rel.name, *([var] * rel.arity))
            extra = builder._as_real(extra)
            body = Apply(max_of(body.value_space, extra.value_space), (body, extra))
        theta = random_theta(rng, body.value_space)
        results = []
        if "identity" in checks:
            results.append(verify_quantifier_identity(M, body, theta, var=var))
        if "primordial" in checks:
            results.append(verify_primordial_bounds(M, body, var=var))
        if not results:
            raise ValidationError(f"no known checks among {checks!r}")
        ok = all(r.ok for r in results)
        witness = next((r.witness for r in results if r.witness), None)
        out.append(_record("quantifier", i, ok,
                           f"checked {results[0].checked} assignments",
                           _sizes(M, body), witness))
    return out


def run_corruption_trials(cfg: FuzzConfig, *,
                          trials: int | None = None) -> list[TrialRecord]:
    """Criterion: mutated translations are detected on exact spaces."""
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "corruption", i)
        sig = random_signature(rng, cfg)
        M = random_structure(cfg, sig, rng)
        shape = rng.choice(("atomic", "sup", "infsup", "set"))
        rel = rng.choice([r for r in sig.relations if r.space.dimension == 1]
                         or list(sig.relations))
        args = ["u", "w"][: rel.arity]
        base: Formula = atom(sig, rel.name, *args)
        theta = None
        if rel.space.dimension != 1:
            base = Apply(random_theta(rng, rel.space), (base,))
        if shape == "sup":
            phi: Formula = Quant(QuantKind.SUP, "u", base)
        elif shape == "infsup":
            phi = Quant(QuantKind.INF, "w", Quant(QuantKind.SUP, "u", base)) \
                if rel.arity == 2 else Quant(QuantKind.INF, "u", base)
        elif shape == "set" and len(rel.space.net) <= MAX_SET_BODY_POINTS:
            phi = Quant(QuantKind.SET, "u", base)
            theta = sup_theta(identity(base.value_space))
        else:
            phi = base
        ctx = TranslationContext(sig, EXACT_STEP)
        check = verify_corruption_detected(ctx, M, phi, theta, tol=cfg.tol)
        out.append(_record("corruption", i, check.ok,
                           f"shift detected at difference {check.max_difference}",
                           _sizes(M, phi), check.witness if check.ok else
                           {"max_difference": str(check.max_difference)}))
    return out


def run_metric_violation_trials(cfg: FuzzConfig, *,
                                trials: int | None = None) -> list[TrialRecord]:
    """Criterion: broken pseudometric laws are reported with a witness."""
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "metric-violation", i)
        M, law = pseudometric_violation(cfg, rng)
        report = check_pseudometric(M)
        caught = (not report.ok) and any(f.startswith(law) for f in report.failures)
        witness = {"law": law, "failures": "; ".join(report.failures)}
        out.append(_record("metric-violation", i, caught,
                           f"planted {law} violation", _sizes(M), witness))
    return out


def run_roundtrip_trials(cfg: FuzzConfig, *,
                         trials: int | None = None) -> list[TrialRecord]:
    """Criterion: aligned transport passes the base-theory check and decodes back."""
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "roundtrip", i)
        sig = random_signature(rng, cfg)
        M = random_structure(cfg, sig, rng)
        ctx = TranslationContext(sig, EXACT_STEP)
        N = transport_structure(ctx, M)
        violations = t0_violations(ctx, N, tol=0)
        back = decode_structure(ctx, N)
        same = back.universe == M.universe and back.interp == M.interp
        ok = not violations and same
        witness = None if ok else {"violations": "; ".join(violations),
                                   "decoded_equal": str(same)}
        out.append(_record("roundtrip", i, ok, "transport, base check, decode",
                           _sizes(M), witness))
    return out


def run_quotient_trials(cfg: FuzzConfig, *,
                        trials: int | None = None) -> list[TrialRecord]:
    """Criterion: collapsing zero-distance classes never moves a value."""
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "quotient", i)
        M = random_metric_structure(cfg, rng, force_classes=True)
        classes = zero_distance_classes(M)
        rep = {e: cls[0] for cls in classes for e in cls}
        Mq = quotient(M)
        phi = random_formula(cfg, M.signature, rng, set_cap=MAX_BASE_POINTS)
        witness = None
        for asg in _assignments(M, phi.free_vars, None):
            v1 = evaluate(M, phi, asg).value
            v2 = evaluate(Mq, phi, {k: rep[v] for k, v in asg.items()}).value
            if isinstance(v1, CompactSet):
                same = set(v1.members) == set(v2.members)
            else:
                same = v1 == v2
            if not same and witness is None:
                witness = {"assignment": dict(asg), "value": str(v1),
                           "quotient_value": str(v2)}
        ok = witness is None and any(len(c) > 1 for c in classes)
        if witness is None and ok is False:
            witness = {"classes": str(classes)}
        out.append(_record("quotient", i, ok,
                           f"{len(M.universe)} elements in {len(classes)} classes",
                           _sizes(M, phi), witness))
    return out


def run_refinement_trials(cfg: FuzzConfig, *,
                          trials: int | None = None) -> list[TrialRecord]:
    """Criterion: halving every grid moves values at most the coarse bound.

    The same underlying rational values are presented on a step-s grid and a
    step-s/2 grid; parallel formulas are generated shape-deterministically
    from one seed; the evaluation drift must respect the coarse error bound.
    """
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        srng = _rng(cfg, "refinement-sig", i)
        step = srng.choice((Fraction(1, 2), Fraction(1, 3)))
        count = srng.randint(1, 2)
        arities = [srng.choice((1, 1, 2)) for _ in range(count)]
        sigs = []
        for s in (step, step / 2):
            space = make_interval(0, 1, s)
            sigs.append(signature([Relation(_NAMES[k], arities[k], space)
                                   for k in range(count)]))
        coarse_sig, fine_sig = sigs

        phi_c = random_formula(cfg, coarse_sig, _rng(cfg, "refinement-formula", i),
                               stable=True, set_cap=MAX_BASE_POINTS)
        phi_f = random_formula(cfg, fine_sig, _rng(cfg, "refinement-formula", i),
                               stable=True, set_cap=MAX_BASE_POINTS)

        vrng = _rng(cfg, "refinement-structure", i)
        n = vrng.randint(1, cfg.universe_size)
        universe = tuple(f"e{k}" for k in range(n))
        interp_c: dict = {}
        interp_f: dict = {}
        for rel_c, rel_f in zip(coarse_sig.relations, fine_sig.relations):
            tab_c, tab_f = {}, {}
            for t in itertools.product(universe, repeat=rel_c.arity):
                true_value = point(Fraction(vrng.randint(0, 16), 16))
                tab_c[t] = nearest(rel_c.space, true_value)[0]
                tab_f[t] = nearest(rel_f.space, true_value)[0]
            interp_c[rel_c.name] = tab_c
            interp_f[rel_f.name] = tab_f
        M_c = Structure(coarse_sig, universe, interp_c)
        M_f = Structure(fine_sig, universe, interp_f)

        bound = eval_error_bound(phi_c)
        witness = None
        worst = ZERO
        for asg in _assignments(M_c, phi_c.free_vars, None):
            drift = abs(evaluate(M_c, phi_c, asg).scalar
                        - evaluate(M_f, phi_f, asg).scalar)
            worst = max(worst, drift)
            if drift > bound and witness is None:
                witness = {"assignment": dict(asg), "drift": str(drift),
                           "bound": str(bound)}
        out.append(_record("refinement", i, witness is None,
                           f"drift {worst} <= bound {bound} at step {step}",
                           _sizes(M_c, phi_c), witness))
    return out


def run_limit_trials(cfg: FuzzConfig, *,
                     trials: int | None = None) -> list[TrialRecord]:
    """Spot-check declared convergence rates of truncated limit formulas."""
    out = []
    for i in range(trials if trials is not None else cfg.trials):
        rng = _rng(cfg, "limit", i)
        c = Fraction(rng.randint(2, 6), 8)
        length = rng.randint(3, 6)
        vals = [c + (1 if k % 2 == 0 else -1) * Fraction(1, 2 ** (k + 3))
                for k in range(length)]
        space = make_finite([point(v) for v in vals])
        formulas = [Apply(const(point(v), space), ()) for v in vals]
        rate = lambda n: Fraction(1, 2 ** (n + 2))  # noqa: E731
        tol = rng.choice((Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)))
        sig = signature([Relation("R", 1, space)])
        M = structure(sig, ["e0"], {"R": {("e0",): vals[0]}})
        try:
            check = verify_limit_declaration(M, formulas, rate, tol, true_limit=c)
            ok, witness = check.ok, check.witness
        except ValidationError as err:  # rate never adequate for this prefix
            ok = frac(rate(length - 1)) > tol
            witness = None if ok else {"error": str(err)}
        out.append(_record("limit", i, ok, f"prefix {length}, tol {tol}",
                           {"universe": 1, "relations": 1, "net": length}, witness))
    return out


# ---------------------------------------------------------------------------
# The full suite


SUITES: tuple[tuple[str, Callable, int], ...] = (
    ("coding-exact", run_coding_trials, 30),
    ("coding-grid", lambda cfg, trials=None: run_coding_trials(cfg, grid=True, trials=trials), 10),
    ("quantifier", run_quantifier_trials, 20),
    ("roundtrip", run_roundtrip_trials, 10),
    ("corruption", run_corruption_trials, 7),
    ("metric-violation", run_metric_violation_trials, 7),
    ("quotient", run_quotient_trials, 6),
    ("refinement", run_refinement_trials, 6),
    ("limit", run_limit_trials, 4),
)


def fuzz(cfg: FuzzConfig, kinds: Sequence[str] | None = None) -> list[TrialRecord]:
    """Run every suite, splitting cfg.trials across them by fixed weights.

    Every selected suite runs at least once; the largest slice absorbs the
    rounding so the total matches cfg.trials whenever that is possible.
    """
    chosen = [(name, fn, w) for name, fn, w in SUITES
              if kinds is None or name in kinds]
    if not chosen:
        raise ValidationError(f"no such suites: {kinds}")
    total_weight = sum(w for _, _, w in chosen)
    shares = [max(1, (cfg.trials * w) // total_weight) for _, _, w in chosen]
    slack = cfg.trials - sum(shares)
    if slack:
        top = max(range(len(shares)), key=lambda j: shares[j])
        shares[top] = max(1, shares[top] + slack)
    records: list[TrialRecord] = []
    for (name, fn, _), n in zip(chosen, shares):
        records.extend(fn(cfg, trials=n))
    return records


def summarize(records: Sequence[TrialRecord]) -> dict:
    by_kind: dict[str, dict[str, int]] = {}
    for r in records:
        slot = by_kind.setdefault(r.kind, {"trials": 0, "failures": 0})
        slot["trials"] += 1
        slot["failures"] += 0 if r.ok else 1
    return {
        "trials": len(records),
        "failures": sum(1 for r in records if not r.ok),
        "by_kind": by_kind,
    }
