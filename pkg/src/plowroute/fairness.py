"""Complaint-based route fairness and necklace fair division.

Around every crossing the residents agree on a fixed cyclic order of
the incident streets, and they expect the vehicle to service adjacent
streets in adjacent positions of that order.  Whenever the route moves
through a crossing, the street one step ahead of the arrival street and
the street one step behind the departure street each raise a complaint
if they have not been serviced yet.  The unfairness index of a route
counts the complained-about streets, ahead and behind separately.

Minimizing the index is entangled with splitting a necklace of colored
beads fairly between several shares: a necklace turns into a weighted
star whose optimal routes encode minimal-cut splittings, with bead
weights built from a superincreasing recursion so that a trip's load
identifies its bead multiset.  The weight construction in turn raises
the question how small the largest element of an integer set with
pairwise distinct subset sums can be; a small exhaustive searcher for
that quantity lives here as well.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .model import (
    Arc,
    CapacitySemantics,
    EdgeKey,
    GuardExceeded,
    InputError,
    PriorityLimits,
    RoadEdge,
    RoadInstance,
    ServiceParams,
    Vertex,
    VehicleRoute,
    check_structure,
    edge_key,
    validate_route,
)


class Infeasible(RuntimeError):
    """Raised when an exhaustive search proves that no valid route exists."""


# ---------------------------------------------------------------------------
# cyclic neighbor orders and the unfairness index
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicOrders:
    """A fixed cyclic arrangement of the neighbors of each vertex.

    ``orders[v]`` lists the neighbors of ``v`` once each, in ring order;
    the successor of the last entry is the first entry again.
    """

    orders: Mapping[Vertex, Tuple[Vertex, ...]]

    def check(self, instance: RoadInstance) -> None:
        """Raise InputError unless every vertex carries a permutation of
        its neighbor set."""
        for v in instance.vertices:
            ring = self.orders.get(v)
            if ring is None:
                raise InputError(f"no cyclic order for vertex {v!r}")
            expected = sorted(w for w, _ in instance.neighbors(v))
            if sorted(ring) != expected:
                raise InputError(
                    f"cyclic order at {v!r} is {list(ring)}, expected a "
                    f"permutation of {expected}"
                )

    def successor(self, v: Vertex, neighbor: Vertex) -> Vertex:
        ring = self.orders[v]
        try:
            i = ring.index(neighbor)
        except ValueError:
            raise InputError(f"{neighbor!r} is not a neighbor of {v!r}") from None
        return ring[(i + 1) % len(ring)]

    def predecessor(self, v: Vertex, neighbor: Vertex) -> Vertex:
        ring = self.orders[v]
        try:
            i = ring.index(neighbor)
        except ValueError:
            raise InputError(f"{neighbor!r} is not a neighbor of {v!r}") from None
        return ring[i - 1]


def _complaint_sets(
    orders: CyclicOrders, route: VehicleRoute
) -> Tuple[Set[EdgeKey], Set[EdgeKey]]:
    """Edges complained about ahead of and behind the route's turns.

    At the turn between consecutive arcs a and b (sharing vertex p), the
    edge one ring step past a at p is flagged ahead, and the edge one
    ring step before b at p is flagged behind, each unless some
    orientation of it already occurs in the route up to and including b.
    """
    ahead: Set[EdgeKey] = set()
    behind: Set[EdgeKey] = set()
    arcs = route.arcs
    seen: Set[EdgeKey] = {arcs[0].edge_key} if arcs else set()
    for i in range(len(arcs) - 1):
        nxt = arcs[i + 1]
        seen.add(nxt.edge_key)
        pivot = arcs[i].head
        plus = edge_key(pivot, orders.successor(pivot, arcs[i].tail))
        minus = edge_key(pivot, orders.predecessor(pivot, nxt.head))
        if plus not in seen:
            ahead.add(plus)
        if minus not in seen:
            behind.add(minus)
    return ahead, behind


def unfairness_index(
    instance: RoadInstance, orders: CyclicOrders, route: VehicleRoute
) -> int:
    """Number of ahead-complaints plus behind-complaints of the route.

    Each edge counts at most once per direction of complaint, so an
    edge flagged both ways contributes two.  Requires a degree-one
    depot and a structurally valid route.
    """
    if instance.degree(instance.depot) != 1:
        raise InputError("the unfairness index needs a depot of degree 1")
    orders.check(instance)
    check_structure(instance, route)
    ahead, behind = _complaint_sets(orders, route)
    return len(ahead) + len(behind)


# ---------------------------------------------------------------------------
# exhaustive unfairness minimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnfairnessResult:
    route: VehicleRoute
    uf: int


def _scaled_alphas(instance: RoadInstance) -> Tuple[int, Dict[EdgeKey, int]]:
    scale = math.lcm(*(e.alpha.denominator for e in instance.edges))
    return scale, {e.key: int(e.alpha * scale) for e in instance.edges}


def _home_distances(
    instance: RoadInstance, alpha: Mapping[EdgeKey, int]
) -> Dict[Vertex, int]:
    dist = {v: None for v in instance.vertices}
    heap: List[Tuple[int, Vertex]] = [(0, instance.depot)]
    while heap:
        d, v = heapq.heappop(heap)
        if dist[v] is not None:
            continue
        dist[v] = d
        for w, e in instance.neighbors(v):
            if dist[w] is None:
                heapq.heappush(heap, (d + alpha[e.key], w))
    far = sum(alpha.values()) + 1
    return {v: (d if d is not None else far) for v, d in dist.items()}


def minimize_unfairness(
    instance: RoadInstance,
    orders: CyclicOrders,
    params: ServiceParams,
    budget: int = 5_000_000,
) -> UnfairnessResult:
    """Exact minimum unfairness over all valid vehicle routes.

    Depth-first enumeration of closed depot walks within the frequency,
    length, and trip-capacity budgets; every full-coverage return to the
    depot is revalidated against all service constraints.  Complaint
    sets only ever grow along a walk, so branches whose running count
    already matches the best known route are cut.  Candidate moves are
    tried in order of added complaints, which finds a good incumbent
    early and keeps the exhaustion shallow.

    Raises GuardExceeded once ``budget`` search nodes are expanded and
    Infeasible when the exhausted space contains no valid route.
    """
    if instance.degree(instance.depot) != 1:
        raise InputError("the unfairness index needs a depot of degree 1")
    orders.check(instance)
    depot = instance.depot
    scale, alpha = _scaled_alphas(instance)
    L_int = math.floor(params.L * scale)
    cap_int = math.floor(params.c * params.L * scale)
    serviced = params.capacity_semantics is CapacitySemantics.SERVICED
    home = _home_distances(instance, alpha)
    moves: Dict[Vertex, List[Tuple[Vertex, Arc, int, EdgeKey]]] = {
        v: [
            (w, Arc(v, w), alpha[e.key], e.key)
            for w, e in sorted(instance.neighbors(v))
        ]
        for v in instance.vertices
    }
    limit = dict(params.f)

    cnt: Dict[Arc, int] = {}
    seen: Set[EdgeKey] = set()
    ahead: Set[EdgeKey] = set()
    behind: Set[EdgeKey] = set()
    prefix: List[Arc] = []
    uncovered: Set[EdgeKey] = {e.key for e in instance.edges}
    uncovered_alpha = sum(alpha.values())

    best_uf: Optional[int] = None
    best_route: Optional[Tuple[Arc, ...]] = None
    nodes = 0

    def turn_flags(arc: Arc) -> Tuple[Optional[EdgeKey], Optional[EdgeKey]]:
        # complaints raised by appending ``arc``, given the current prefix
        if not prefix:
            return None, None
        pivot = arc.tail
        plus = edge_key(pivot, orders.successor(pivot, prefix[-1].tail))
        minus = edge_key(pivot, orders.predecessor(pivot, arc.head))
        key = arc.edge_key
        plus_new = plus if plus not in seen and plus != key and plus not in ahead else None
        minus_new = minus if minus not in seen and minus != key and minus not in behind else None
        return plus_new, minus_new

    def search(pos: Vertex, length: int, trip: int) -> None:
        nonlocal nodes, best_uf, best_route, uncovered_alpha
        nodes += 1
        if nodes > budget:
            raise GuardExceeded(
                f"unfairness minimization exceeded {budget} search nodes"
            )
        ranked = []
        for w, arc, a, key in moves[pos]:
            if cnt.get(arc, 0) >= limit.get(arc, 0):
                continue
            covering = key in uncovered
            remaining = uncovered_alpha - (a if covering else 0)
            if length + a + max(home[w], remaining) > L_int:
                continue
            load = trip + (a if not serviced or key not in seen else 0)
            if load > cap_int:
                continue
            plus_new, minus_new = turn_flags(arc)
            delta = (plus_new is not None) + (minus_new is not None)
            if best_uf is not None and len(ahead) + len(behind) + delta >= best_uf:
                continue
            ranked.append((delta, arc, w, a, key, load, plus_new, minus_new))
        ranked.sort(key=lambda item: (item[0], item[1]))
        for delta, arc, w, a, key, load, plus_new, minus_new in ranked:
            # the incumbent may have improved since ranking
            if best_uf is not None and len(ahead) + len(behind) + delta >= best_uf:
                continue
            cnt[arc] = cnt.get(arc, 0) + 1
            prefix.append(arc)
            fresh = key not in seen
            if fresh:
                seen.add(key)
            if plus_new is not None:
                ahead.add(plus_new)
            if minus_new is not None:
                behind.add(minus_new)
            covering = key in uncovered
            if covering:
                uncovered.discard(key)
                uncovered_alpha -= a
            if w == depot:
                if not uncovered and (
                    best_uf is None or len(ahead) + len(behind) < best_uf
                ):
                    candidate = VehicleRoute(tuple(prefix))
                    if validate_route(instance, params, candidate).ok:
                        best_uf = len(ahead) + len(behind)
                        best_route = tuple(prefix)
                search(w, length + a, 0)
            else:
                search(w, length + a, load)
            if covering:
                uncovered.add(key)
                uncovered_alpha += a
            if plus_new is not None:
                ahead.discard(plus_new)
            if minus_new is not None:
                behind.discard(minus_new)
            if fresh:
                seen.discard(key)
            prefix.pop()
            cnt[arc] -= 1

    search(depot, 0, 0)
    if best_route is None:
        raise Infeasible("no valid vehicle route within the given limits")
    return UnfairnessResult(VehicleRoute(best_route), best_uf)


# ---------------------------------------------------------------------------
# necklaces, splittings, and the star reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Necklace:
    """An open string of colored beads to be divided into ``k`` shares.

    Colors are 1-based and contiguous; each color's bead count must be
    divisible by ``k``, the per-share quota being the quotient.
    """

    k: int
    colors: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InputError("share count k must be >= 1")
        if not self.colors:
            raise InputError("a necklace needs at least one bead")
        s = max(self.colors)
        counts = [0] * s
        for c in self.colors:
            if c < 1:
                raise InputError(f"bead color {c} is not a positive index")
            counts[c - 1] += 1
        for c, n in enumerate(counts, start=1):
            if n == 0:
                raise InputError(f"color {c} never occurs but color {s} does")
            if n % self.k:
                raise InputError(
                    f"color {c} occurs {n} times, not divisible by k={self.k}"
                )

    @property
    def s(self) -> int:
        return max(self.colors)

    @property
    def beads(self) -> int:
        return len(self.colors)

    @property
    def quotas(self) -> Tuple[int, ...]:
        """Beads of each color that every share must receive."""
        counts = [0] * self.s
        for c in self.colors:
            counts[c - 1] += 1
        return tuple(n // self.k for n in counts)


@dataclass(frozen=True)
class Splitting:
    """Cut positions and the share owning each resulting interval.

    ``cuts`` are strictly increasing positions in 1..beads-1; cutting at
    position p separates beads p and p+1 (1-based).  ``shares`` assigns
    each of the ``len(cuts) + 1`` intervals to a share in 0..k-1.
    """

    cuts: Tuple[int, ...]
    shares: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.cuts)

    def intervals(self, beads: int) -> List[Tuple[int, int]]:
        """Half-open bead index ranges (0-based) of the intervals."""
        bounds = (0,) + self.cuts + (beads,)
        return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    def check(self, neck: Necklace) -> None:
        """Raise InputError unless this is a valid splitting of ``neck``."""
        n = neck.beads
        if list(self.cuts) != sorted(set(self.cuts)):
            raise InputError("cut positions must be strictly increasing")
        if self.cuts and not (1 <= self.cuts[0] and self.cuts[-1] < n):
            raise InputError(f"cut positions must lie in 1..{n - 1}")
        if len(self.shares) != len(self.cuts) + 1:
            raise InputError(
                f"{len(self.cuts) + 1} intervals but {len(self.shares)} share labels"
            )
        if any(not 0 <= j < neck.k for j in self.shares):
            raise InputError(f"share labels must lie in 0..{neck.k - 1}")
        got = [[0] * neck.s for _ in range(neck.k)]
        for (lo, hi), share in zip(self.intervals(n), self.shares):
            for b in range(lo, hi):
                got[share][neck.colors[b] - 1] += 1
        quotas = list(neck.quotas)
        for share, counts in enumerate(got):
            if counts != quotas:
                raise InputError(
                    f"share {share} receives color counts {counts}, "
                    f"expected {quotas}"
                )


def split_necklace_min(neck: Necklace, guard: int = 16) -> Splitting:
    """A fewest-cuts splitting, by exhaustive search over cut counts.

    Tries every cut set of each size in increasing order and, for each,
    every assignment of intervals to shares (the first interval's share
    is pinned, shares being interchangeable).  Raises GuardExceeded for
    necklaces longer than ``guard`` beads.
    """
    n = neck.beads
    if n > guard:
        raise GuardExceeded(f"necklace of {n} beads exceeds the {guard}-bead guard")
    quotas = list(neck.quotas)
    for size in range(n):
        for cuts in combinations(range(1, n), size):
            trial = Splitting(cuts, (0,) * (size + 1))
            spans = trial.intervals(n)
            for rest in product(range(neck.k), repeat=size):
                shares = (0,) + rest
                got = [[0] * neck.s for _ in range(neck.k)]
                for (lo, hi), share in zip(spans, shares):
                    for b in range(lo, hi):
                        got[share][neck.colors[b] - 1] += 1
                if all(counts == quotas for counts in got):
                    return Splitting(cuts, shares)
    raise Infeasible("no splitting exists")  # unreachable: one share per bead run


def color_weights(neck: Necklace) -> Tuple[int, ...]:
    """Per-color edge weights for the star reduction.

    The recursion makes each weight exceed the total of everything the
    other colors can contribute, so a trip load determines how many
    beads of each color the trip served.
    """
    n = neck.beads // neck.k
    weights: List[int] = []
    for _ in range(neck.s):
        weights.append(1 + n * sum(weights) if weights else 1 + n)
    return tuple(weights)


def necklace_to_star(
    neck: Necklace,
) -> Tuple[RoadInstance, CyclicOrders, ServiceParams]:
    """Weighted star whose minimal-unfairness routes encode splittings.

    One leaf per bead, in necklace order around the center; a unit
    depot edge closes the ring.  Leaf weights depend only on bead
    color.  The length budget admits exactly ``k`` trips and the
    capacity makes every trip carry one share's worth of beads.
    """
    nk = neck.beads
    weights = color_weights(neck)
    leaves = [f"u{i}" for i in range(1, nk + 1)]
    edges = [RoadEdge("x", "d", Fraction(1))]
    f: Dict[Arc, int] = {Arc("x", "d"): neck.k, Arc("d", "x"): neck.k}
    for leaf, color in zip(leaves, neck.colors):
        edges.append(RoadEdge("x", leaf, Fraction(weights[color - 1])))
        f[Arc("x", leaf)] = 1
        f[Arc(leaf, "x")] = 1
    instance = RoadInstance(
        kind="tree", vertices=["d", "x", *leaves], edges=edges, depot="d"
    )
    orders = CyclicOrders(
        {
            "x": ("d", *leaves),
            "d": ("x",),
            **{leaf: ("x",) for leaf in leaves},
        }
    )
    share_load = 1 + sum(q * w for q, w in zip(neck.quotas, weights))
    params = ServiceParams(
        L=Fraction(2 * neck.k * share_load),
        c=Fraction(1, neck.k),
        t=PriorityLimits.constant(Fraction(1)),
        f=f,
        capacity_semantics=CapacitySemantics.TRAVERSED,
    )
    return instance, orders, params


def complaint_cuts(neck: Necklace, route: VehicleRoute) -> Tuple[int, ...]:
    """Cut positions read off a route's complaints on the reduced star.

    An ahead-complaint at the i-th leaf cuts before bead i, a
    behind-complaint cuts after bead i; positions outside the open
    interior of the necklace are dropped.
    """
    _, orders, _ = necklace_to_star(neck)
    ahead, behind = _complaint_sets(orders, route)
    bead_of = {edge_key("x", f"u{i}"): i for i in range(1, neck.beads + 1)}
    cuts: Set[int] = set()
    for key in ahead:
        if key in bead_of:
            cuts.add(bead_of[key] - 1)
    for key in behind:
        if key in bead_of:
            cuts.add(bead_of[key])
    cuts.discard(0)
    cuts.discard(neck.beads)
    return tuple(sorted(cuts))


def splitting_from_route(neck: Necklace, route: VehicleRoute) -> Splitting:
    """Extract the splitting encoded by a valid route on the reduced star.

    Complaints give the cuts; the depot-to-depot trips give the shares.
    The route must validate on the reduced instance, and each trip must
    serve exactly one share's per-color bead quota; the first violating
    trip is reported otherwise.
    """
    instance, orders, params = necklace_to_star(neck)
    report = validate_route(instance, params, route)
    if not report.ok:
        raise InputError(
            "route is invalid on the reduced star: "
            + "; ".join(v.message for v in report.violations[:3])
        )
    bead_of = {edge_key("x", f"u{i}"): i for i in range(1, neck.beads + 1)}
    trips: List[List[int]] = [[]]
    for arc in route.arcs:
        bead = bead_of.get(arc.edge_key)
        if bead is not None and arc.tail == "x":
            trips[-1].append(bead)
        if arc.head == "d":
            trips.append([])
    trips = [t for t in trips if t]
    quotas = list(neck.quotas)
    for index, beads in enumerate(trips):
        got = [0] * neck.s
        for b in beads:
            got[neck.colors[b - 1] - 1] += 1
        if got != quotas:
            raise InputError(
                f"trip {index + 1} serves color counts {got}, expected {quotas}"
            )
    cuts = complaint_cuts(neck, route)
    trip_of = {b: i for i, beads in enumerate(trips) for b in beads}
    shares = []
    bounds = (0,) + cuts + (neck.beads,)
    for i in range(len(bounds) - 1):
        owners = {trip_of[b] for b in range(bounds[i] + 1, bounds[i + 1] + 1)}
        if len(owners) != 1:
            raise InputError(
                f"beads {bounds[i] + 1}..{bounds[i + 1]} fall in different "
                "trips but no complaint separates them"
            )
        shares.append(owners.pop())
    result = Splitting(cuts, tuple(shares))
    result.check(neck)
    return result


# ---------------------------------------------------------------------------
# distinct subset sums
# ---------------------------------------------------------------------------


def has_distinct_subset_sums(values: Iterable[int]) -> bool:
    """Whether all subset sums of the given positive integers differ.

    Incremental bitset sieve: adding an element may not make any old
    sum land on another old sum shifted by it.  Limited to 30 elements.
    """
    items = sorted(values)
    if len(items) > 30:
        raise GuardExceeded(f"{len(items)} elements exceed the 30-element guard")
    if items and items[0] < 1:
        raise InputError("subset-sum elements must be positive integers")
    sums = 1
    for a in items:
        shifted = sums << a
        if sums & shifted:
            return False
        sums |= shifted
    return True


def min_max_distinct_sums(
    n: int, guard: int = 500_000_000
) -> Tuple[int, Tuple[int, ...]]:
    """Least possible maximum of an n-set with distinct subset sums.

    Searches maxima in increasing order; for each, a descending
    depth-first construction with bitset collision tests and two
    counting prunes: the unchosen part must still fit below the last
    element, and its own subset sums already need room 2^r - 1.

    Returns the minimum together with one witness set (ascending).
    """
    if n < 1:
        raise InputError("need at least one element")
    target = (1 << n) - 1
    nodes = 0

    def extend(
        chosen: List[int], sums: int, total: int
    ) -> Optional[Tuple[int, ...]]:
        nonlocal nodes
        nodes += 1
        if nodes > guard:
            raise GuardExceeded(f"distinct-sum search exceeded {guard} nodes")
        r = n - len(chosen)
        if r == 0:
            return tuple(reversed(chosen))
        last = chosen[-1]
        room = r * (last - 1) - r * (r - 1) // 2
        if total + room < target or room < (1 << r) - 1:
            return None
        for a in range(last - 1, r - 1, -1):
            if sums & (sums << a):
                continue
            chosen.append(a)
            got = extend(chosen, sums | (sums << a), total + a)
            chosen.pop()
            if got is not None:
                return got
        return None

    floor_by_sum = -(-(target + n * (n - 1) // 2) // n)
    m = max(n, floor_by_sum)
    while True:
        witness = extend([m], 1 | 1 << m, m)
        if witness is not None:
            return m, witness
        m += 1
