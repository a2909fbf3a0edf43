"""Hyperspaces: spaces of nonempty compact subsets under the Hausdorff metric.

For a finitely presented space X the hyperspace enumerates every nonempty
subset of X's net, encoded as a 0/1 indicator point whose i-th coordinate says
whether the i-th net point belongs.  The metric is Hausdorff distance computed
through the base space's metric, so hyperspaces nest.

Open behaviour is visible through the two generating families of the Vietoris
topology: "every member inside U" and "some member meets V".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .connective import Connective, table
from .errors import CapacityError, EvalError, SpaceMismatch, ValidationError
from .valuespace import ONE, ZERO, Point, Rational, ValueSpace, frac, nearest, point

#: hyper() refuses bases beyond this many net points (2^16 subsets).
MAX_BASE_POINTS = 16


@dataclass(frozen=True)
class HyperSpace(ValueSpace):
    """The space of nonempty subsets of a base space's net.

    Points are 0/1 indicator vectors over the base net (in net order); the
    metric is Hausdorff distance over the base metric.  The resolution equals
    the base resolution: a net that presents X to within eps presents the
    subsets of X to within eps in Hausdorff distance.
    """

    base: ValueSpace = None

    standard_metric = False

    def __post_init__(self):
        super().__post_init__()
        if self.base is None:
            raise ValidationError("a hyperspace needs a base space")

    def member_indices(self, p: Point) -> frozenset[int]:
        """Decode an indicator point into base-net indices."""
        if p.dimension != self.dimension:
            raise SpaceMismatch(f"indicator {p} does not fit {self.label}")
        idx = []
        for i, c in enumerate(p.coords):
            if c == ONE:
                idx.append(i)
            elif c != ZERO:
                raise SpaceMismatch(f"{p} is not a 0/1 indicator point")
        if not idx:
            raise SpaceMismatch("indicator encodes the empty set")
        return frozenset(idx)

    def metric(self, p: Point, q: Point) -> Fraction:
        return _hausdorff_by_index(self.base, self.member_indices(p), self.member_indices(q))


def _hausdorff_by_index(base: ValueSpace, ks: Iterable[int], fs: Iterable[int]) -> Fraction:
    m = base.distance_matrix
    ks, fs = tuple(ks), tuple(fs)
    forward = max(min(m[k][f] for f in fs) for k in ks)
    backward = max(min(m[k][f] for k in ks) for f in fs)
    return max(forward, backward)


@lru_cache(maxsize=None)
def hyper(space: ValueSpace) -> HyperSpace:
    """The hyperspace of a finitely presented space.

    Enumerates all 2^n - 1 nonempty subsets of the net; refuses nets beyond
    MAX_BASE_POINTS.
    """
    n = len(space.net)
    if n > MAX_BASE_POINTS:
        raise CapacityError(
            f"hyperspace of {space.label} would enumerate 2^{n} subsets; "
            f"the cap is 2^{MAX_BASE_POINTS}"
        )
    net = []
    for bits in itertools.product((ZERO, ONE), repeat=n):
        if any(b == ONE for b in bits):
            net.append(Point(bits))
    return HyperSpace(n, tuple(net), space.resolution, f"K({space.label})", space)


@dataclass(frozen=True)
class CompactSet:
    """A nonempty finite subset of a space's net."""

    space: ValueSpace
    members: tuple[Point, ...]

    def __post_init__(self):
        if not self.members:
            raise ValidationError("a compact set needs at least one member")
        canonical = tuple(sorted(set(self.members)))
        object.__setattr__(self, "members", canonical)
        for p in canonical:
            self.space.net_index(p)  # raises if off the net

    @cached_property
    def member_indices(self) -> frozenset[int]:
        return frozenset(self.space.net_index(p) for p in self.members)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.members) + "}"


def compact(space: ValueSpace, *members: Point) -> CompactSet:
    return CompactSet(space, tuple(members))


def hausdorff(space: ValueSpace, k: CompactSet, f: CompactSet) -> Fraction:
    """Hausdorff distance between two compact subsets of the same space."""
    if k.space != space or f.space != space:
        raise SpaceMismatch("hausdorff needs both sets to live on the given space")
    return _hausdorff_by_index(space, k.member_indices, f.member_indices)


def encode_subset(h: HyperSpace, members: Iterable[Point]) -> Point:
    """Indicator point of a subset of the base net."""
    idx = {h.base.net_index(p) for p in members}
    if not idx:
        raise ValidationError("cannot encode the empty set")
    return Point(tuple(ONE if i in idx else ZERO for i in range(len(h.base.net))))


def decode_subset(h: HyperSpace, p: Point) -> CompactSet:
    idx = h.member_indices(p)
    return CompactSet(h.base, tuple(h.base.net[i] for i in sorted(idx)))


@dataclass(frozen=True)
class OpenRegion:
    """A finite union of open balls in a space."""

    space: ValueSpace
    balls: tuple[tuple[Point, Fraction], ...]

    def __post_init__(self):
        if not self.balls:
            raise ValidationError("an open region needs at least one ball")
        for center, radius in self.balls:
            if center.dimension != self.space.dimension:
                raise SpaceMismatch(f"ball center {center} does not fit {self.space.label}")
            if radius <= ZERO:
                raise ValidationError("ball radius must be positive")

    def contains(self, p: Point) -> bool:
        return any(self.space.metric(p, c) < r for c, r in self.balls)

    def depth(self, p: Point) -> Fraction:
        """Largest slack r - d(p, center) over the balls; positive iff p is inside."""
        return max(r - self.space.metric(p, c) for c, r in self.balls)


def ball(space: ValueSpace, center: Point, radius: Rational) -> OpenRegion:
    return OpenRegion(space, ((center, frac(radius)),))


def vietoris_member(k: CompactSet, u: OpenRegion, vs: Sequence[OpenRegion] = ()) -> bool:
    """Whether k lies in the basic Vietoris open set determined by u and vs.

    True iff every member of k is inside u and k meets every region in vs.
    """
    _check_region_spaces(k, u, vs)
    if not all(u.contains(p) for p in k.members):
        return False
    return all(any(v.contains(p) for p in k.members) for v in vs)


def vietoris_slack(k: CompactSet, u: OpenRegion, vs: Sequence[OpenRegion] = ()) -> Fraction:
    """How deep k sits inside the basic open set; positive implies membership.

    Any set within Hausdorff distance strictly less than the slack is also a
    member — the stability that makes these sets open in Hausdorff metric.
    """
    _check_region_spaces(k, u, vs)
    slack = min(u.depth(p) for p in k.members)
    for v in vs:
        slack = min(slack, max(v.depth(p) for p in k.members))
    return slack


def _check_region_spaces(k: CompactSet, u: OpenRegion, vs: Sequence[OpenRegion]):
    for region in (u, *vs):
        if region.space != k.space:
            raise SpaceMismatch("regions must live on the set's space")


def lift(theta: Connective, name: str | None = None) -> Connective:
    """The direct-image action on subsets: K -> theta[K].

    Takes a unary connective X -> Y to a unary connective K(X) -> K(Y) with the
    same Lipschitz constant (now with respect to Hausdorff distances).  Images
    are snapped to Y's net when within Y's resolution; anything farther is an
    error.
    """
    if theta.arity != 1:
        raise SpaceMismatch("lift needs a unary connective")
    hx = hyper(theta.domain[0])
    hy = hyper(theta.codomain)
    y = theta.codomain
    if name is None:
        name = f"K({theta.name})"

    def run(p: Point) -> Point:
        out = []
        for i in sorted(hx.member_indices(p)):
            img = theta.evaluator(hx.base.net[i])
            snapped, d = nearest(y, img)
            if d > y.resolution:
                raise EvalError(
                    f"{name}: image {img} is farther than resolution from the net of {y.label}"
                )
            out.append(snapped)
        return encode_subset(hy, out)

    return Connective(name, (hx,), hy, theta.lipschitz, run)


def sup_theta(theta: Connective, name: str | None = None) -> Connective:
    """K -> max of theta over K, as a connective on the hyperspace.

    Keeps theta's Lipschitz constant: sup respects Hausdorff distance.
    """
    return _extremum_theta(theta, max, name or f"sup({theta.name})")


def inf_theta(theta: Connective, name: str | None = None) -> Connective:
    """K -> min of theta over K; the dual of sup_theta."""
    return _extremum_theta(theta, min, name or f"inf({theta.name})")


def _extremum_theta(theta: Connective, pick, name: str) -> Connective:
    if theta.arity != 1:
        raise SpaceMismatch("hyperspace extrema need a unary connective")
    if theta.codomain.dimension != 1:
        raise SpaceMismatch("hyperspace extrema need a real-valued connective")
    hx = hyper(theta.domain[0])

    def run(p: Point) -> Point:
        vals = [theta.evaluator(hx.base.net[i]).scalar for i in hx.member_indices(p)]
        return point(pick(vals))

    return Connective(name, (hx,), theta.codomain, theta.lipschitz, run)


def urysohn_separator(space: ValueSpace, k: CompactSet, f: CompactSet) -> Connective:
    """A [0,1]-valued connective whose sup over one set is 0 and over the other is 1.

    Built as  p -> min(1, d(p, K) / d(x, K))  for a witness x in F \\ K, so it
    vanishes on K and reaches 1 inside F.  When F is a subset of K the roles
    swap (then no function can vanish on all of K while reaching 1 on F, but
    the swapped one still separates with |difference| = 1).  Identical sets
    cannot be separated.
    """
    if k.space != space or f.space != space:
        raise SpaceMismatch("separator needs both sets on the given space")
    if k.members == f.members:
        raise ValidationError("identical sets cannot be separated")
    outside = set(f.member_indices) - set(k.member_indices)
    if outside:
        vanish, witness_pool = k, outside
    else:
        vanish, witness_pool = f, set(k.member_indices) - set(f.member_indices)
    witness = min(witness_pool)
    m = space.distance_matrix
    vanish_idx = sorted(vanish.member_indices)
    den = min(m[witness][i] for i in vanish_idx)
    if den <= ZERO:
        raise ValidationError("witness at distance zero from the vanishing set")
    values = {}
    for j, p in enumerate(space.net):
        dist = min(m[j][i] for i in vanish_idx)
        values[(p,)] = point(min(ONE, dist / den))
    codomain = ValueSpace(
        1,
        tuple(sorted(set(values[(p,)] for p in space.net))),
        ZERO,
        "sep-values",
    )
    name = f"usep[{'.'.join(map(str, sorted(k.member_indices)))}|{'.'.join(map(str, sorted(f.member_indices)))}]"
    return table((space,), values, ONE / den, codomain, name=name)
