"""Core data model: road networks, service parameters, routes, validation.

A road network is an undirected graph with positive rational edge lengths,
a priority level per edge, and a distinguished depot vertex.  Vehicles move
on the symmetric orientation of the network: every undirected edge yields
two opposite arcs, and a route is a closed walk over those arcs that starts
and ends at the depot.

All arithmetic on lengths, deadlines, and capacities is exact
(:class:`fractions.Fraction`); no tolerances are involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Vertex = str
EdgeKey = Tuple[Vertex, Vertex]  # endpoints in sorted order


class InputError(ValueError):
    """Raised when an instance, parameter set, or route is malformed.

    Distinct from a *violation*: a violation is a well-formed route that
    breaks a service constraint, and is reported, not raised.
    """


class GuardExceeded(RuntimeError):
    """Raised when an exhaustive search exceeds its node/state budget."""


class CapacitySemantics(str, Enum):
    """How the per-trip capacity budget is charged.

    TRAVERSED charges every arc of the trip, including repeats.
    SERVICED charges each edge once, on the trip containing its first
    traversal in the whole route.
    """

    TRAVERSED = "traversed"
    SERVICED = "serviced"


# ---------------------------------------------------------------------------
# arcs and edges
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Arc:
    """A directed traversal ``tail -> head`` of an undirected edge."""

    tail: Vertex
    head: Vertex

    def reverse(self) -> "Arc":
        return Arc(self.head, self.tail)

    @property
    def edge_key(self) -> EdgeKey:
        u, v = self.tail, self.head
        return (u, v) if u <= v else (v, u)

    def __str__(self) -> str:
        return f"{self.tail}>{self.head}"

    @classmethod
    def parse(cls, text: str) -> "Arc":
        parts = text.strip().split(">")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise InputError(f"malformed arc {text!r}, expected 'tail>head'")
        return cls(parts[0], parts[1])


def edge_key(u: Vertex, v: Vertex) -> EdgeKey:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class RoadEdge:
    """One undirected road segment.

    Attributes:
        u, v: endpoint vertices (order irrelevant).
        alpha: traversal length, a positive rational.
        priority: service priority level, 1 (highest) .. z.
        material: optional label for the spreading material; carried
            through serialization, ignored by all solvers.
    """

    u: Vertex
    v: Vertex
    alpha: Fraction
    priority: int = 1
    material: Optional[str] = None

    @property
    def key(self) -> EdgeKey:
        return edge_key(self.u, self.v)


# ---------------------------------------------------------------------------
# the network
# ---------------------------------------------------------------------------


@dataclass
class RoadInstance:
    """An undirected road network with a depot.

    ``kind`` is "tree" or "graph"; tree instances are verified to be
    connected and acyclic on construction.  The graph must be simple
    (no loops, no parallel edges).
    """

    kind: str
    vertices: List[Vertex]
    edges: List[RoadEdge]
    depot: Vertex
    z: int = 1

    _edge_by_key: Dict[EdgeKey, RoadEdge] = field(init=False, repr=False)
    _adj: Dict[Vertex, List[Tuple[Vertex, RoadEdge]]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("tree", "graph"):
            raise InputError(f"unknown instance kind {self.kind!r}")
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("duplicate vertex names")
        vset = set(self.vertices)
        if self.depot not in vset:
            raise InputError(f"depot {self.depot!r} is not a vertex")
        if self.z < 1:
            raise InputError("z must be >= 1")
        self._edge_by_key = {}
        self._adj = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.u not in vset or e.v not in vset:
                raise InputError(f"edge {e.u}-{e.v} has unknown endpoint")
            if e.u == e.v:
                raise InputError(f"self-loop at {e.u}")
            if e.key in self._edge_by_key:
                raise InputError(f"parallel edge {e.u}-{e.v}")
            if e.alpha <= 0:
                raise InputError(f"edge {e.u}-{e.v} has non-positive length")
            if not 1 <= e.priority <= self.z:
                raise InputError(
                    f"edge {e.u}-{e.v} priority {e.priority} outside 1..{self.z}"
                )
            self._edge_by_key[e.key] = e
            self._adj[e.u].append((e.v, e))
            self._adj[e.v].append((e.u, e))
        if self.kind == "tree":
            if len(self.edges) != len(self.vertices) - 1 or not self.is_connected():
                raise InputError("kind 'tree' but the graph is not a tree")

    # -- lookups ------------------------------------------------------------

    def edge(self, u: Vertex, v: Vertex) -> RoadEdge:
        try:
            return self._edge_by_key[edge_key(u, v)]
        except KeyError:
            raise InputError(f"no edge between {u!r} and {v!r}") from None

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return edge_key(u, v) in self._edge_by_key

    def edge_of_arc(self, arc: Arc) -> RoadEdge:
        return self.edge(arc.tail, arc.head)

    def neighbors(self, v: Vertex) -> List[Tuple[Vertex, RoadEdge]]:
        try:
            return self._adj[v]
        except KeyError:
            raise InputError(f"unknown vertex {v!r}") from None

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj.values()), default=0)

    def symmetric_arcs(self) -> List[Arc]:
        """Both orientations of every edge, in a deterministic order."""
        arcs: List[Arc] = []
        for e in sorted(self.edges, key=lambda e: e.key):
            arcs.append(Arc(e.u, e.v))
            arcs.append(Arc(e.v, e.u))
        return arcs

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w, _ in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def total_alpha(self) -> Fraction:
        return sum((e.alpha for e in self.edges), Fraction(0))

    def unit_lengths(self) -> bool:
        return all(e.alpha == 1 for e in self.edges)


# ---------------------------------------------------------------------------
# service parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorityLimits:
    """Per-priority, per-occurrence recurrence factors.

    ``table[p]`` is a non-empty tuple of rationals; the factor for the
    i-th recurrence gap of a priority-p edge is ``table[p][min(i, len) - 1]``,
    i.e. the last entry repeats for all later occurrences.
    """

    table: Mapping[int, Tuple[Fraction, ...]]

    def __post_init__(self) -> None:
        for level, row in self.table.items():
            if not row:
                raise InputError(f"empty recurrence row for priority {level}")
            if any(x <= 0 for x in row):
                raise InputError(f"non-positive recurrence factor at priority {level}")

    def factor(self, priority: int, occurrence: int) -> Fraction:
        """Factor for the given 1-based occurrence index."""
        if occurrence < 1:
            raise InputError("occurrence index must be >= 1")
        try:
            row = self.table[priority]
        except KeyError:
            raise InputError(f"no recurrence factors for priority {priority}") from None
        return row[min(occurrence, len(row)) - 1]

    def constant_value(self) -> Optional[Fraction]:
        """The single factor if the table is constant, else None."""
        values = {x for row in self.table.values() for x in row}
        return next(iter(values)) if len(values) == 1 else None

    @classmethod
    def constant(cls, value: Fraction, levels: int = 1) -> "PriorityLimits":
        return cls({p: (Fraction(value),) for p in range(1, levels + 1)})


@dataclass(frozen=True)
class ServiceParams:
    """External constraint parameters for one planning horizon.

    Attributes:
        L: route length budget (rational, > 0).
        c: capacity factor in (0, 1]; each trip gets budget c*L.
        t: recurrence factors by priority and occurrence.
        f: per-arc traversal limits (both orientations must be present).
        capacity_semantics: how trips are charged, see CapacitySemantics.
    """

    L: Fraction
    c: Fraction
    t: PriorityLimits
    f: Mapping[Arc, int]
    capacity_semantics: CapacitySemantics = CapacitySemantics.TRAVERSED

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise InputError("L must be positive")
        if not 0 < self.c <= 1:
            raise InputError("c must lie in (0, 1]")
        for arc, limit in self.f.items():
            if limit < 1:
                raise InputError(f"frequency limit for {arc} must be >= 1")

    def frequency(self, arc: Arc) -> int:
        try:
            return self.f[arc]
        except KeyError:
            raise InputError(f"no frequency limit for arc {arc}") from None

    def gap_bound(self, priority: int, occurrence: int) -> Fraction:
        return self.t.factor(priority, occurrence) * self.L


def uniform_frequency(instance: RoadInstance, limit: int) -> Dict[Arc, int]:
    """The same traversal limit on every arc of the symmetric orientation."""
    return {arc: limit for arc in instance.symmetric_arcs()}


# ---------------------------------------------------------------------------
# routes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VehicleRoute:
    """A closed walk over the symmetric orientation, as a sequence of arcs."""

    arcs: Tuple[Arc, ...]

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Vertex, Vertex]]) -> "VehicleRoute":
        return cls(tuple(Arc(u, v) for u, v in pairs))

    @classmethod
    def from_vertices(cls, walk: Sequence[Vertex]) -> "VehicleRoute":
        if len(walk) < 2:
            return cls(())
        return cls(tuple(Arc(walk[i], walk[i + 1]) for i in range(len(walk) - 1)))

    def length(self, instance: RoadInstance) -> Fraction:
        return sum((instance.edge_of_arc(a).alpha for a in self.arcs), Fraction(0))

    def rotate_to(self, position: int) -> "VehicleRoute":
        """Cyclic shift so the arc at ``position`` (0-based) comes first."""
        return VehicleRoute(self.arcs[position:] + self.arcs[:position])


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


class ConstraintKind(str, Enum):
    LENGTH = "length"
    COVERAGE = "coverage"
    FREQUENCY = "frequency"
    PRIORITY_GAP = "priority_gap"
    CAPACITY = "capacity"


@dataclass(frozen=True)
class Violation:
    kind: ConstraintKind
    message: str


@dataclass
class ValidationReport:
    """Outcome of checking one route against all five constraint families."""

    ok: bool
    violations: List[Violation]
    route_length: Fraction
    trip_loads: List[Fraction]

    def by_kind(self, kind: ConstraintKind) -> List[Violation]:
        return [v for v in self.violations if v.kind == kind]


def check_structure(instance: RoadInstance, route: VehicleRoute) -> None:
    """Raise InputError unless the route is a closed depot walk on roads
    of the instance.  Service constraints are not inspected."""
    arcs = route.arcs
    if not arcs:
        if instance.edges:
            raise InputError("empty route on a network with edges")
        return
    if arcs[0].tail != instance.depot:
        raise InputError(f"route starts at {arcs[0].tail!r}, not the depot")
    if arcs[-1].head != instance.depot:
        raise InputError(f"route ends at {arcs[-1].head!r}, not the depot")
    for i, arc in enumerate(arcs):
        if not instance.has_edge(arc.tail, arc.head):
            raise InputError(f"arc {arc} at position {i + 1} is not a road")
        if i + 1 < len(arcs) and arc.head != arcs[i + 1].tail:
            raise InputError(
                f"walk broken between positions {i + 1} and {i + 2}: "
                f"{arc} then {arcs[i + 1]}"
            )


def validate_route(
    instance: RoadInstance, params: ServiceParams, route: VehicleRoute
) -> ValidationReport:
    """Check a closed depot walk against all service constraints.

    Structural defects (not a closed walk at the depot, unknown arcs)
    raise InputError.  Constraint breaches are collected and returned;
    the report lists every violation, not just the first.

    The recurrence check is cyclic: for an edge traversed j times at
    route positions q_1 < ... < q_j, the i-th gap (i < j) is the length
    of the walk strictly between traversal i and traversal i+1, and the
    j-th gap wraps around the route end.  An edge traversed once gets
    the single wrap gap (route length minus its own length) at
    occurrence index 1.

    Trips are the maximal depot-free segments of the route; a depot
    visit is the route start plus every position whose arc ends at the
    depot.
    """
    check_structure(instance, route)
    arcs = route.arcs
    violations: List[Violation] = []

    # prefix[i] = alpha-length of the first i arcs
    prefix: List[Fraction] = [Fraction(0)]
    for arc in arcs:
        prefix.append(prefix[-1] + instance.edge_of_arc(arc).alpha)
    total = prefix[-1]

    if total > params.L:
        violations.append(
            Violation(ConstraintKind.LENGTH, f"route length {total} exceeds L={params.L}")
        )

    # coverage and frequency are per arc (per orientation)
    counts: Dict[Arc, int] = {}
    for arc in arcs:
        counts[arc] = counts.get(arc, 0) + 1
    for arc in instance.symmetric_arcs():
        n = counts.get(arc, 0)
        if n == 0:
            violations.append(
                Violation(ConstraintKind.COVERAGE, f"arc {arc} is never traversed")
            )
        limit = params.frequency(arc)
        if n > limit:
            violations.append(
                Violation(
                    ConstraintKind.FREQUENCY,
                    f"arc {arc} traversed {n} times, limit {limit}",
                )
            )

    # recurrence gaps, cyclic per edge
    positions: Dict[EdgeKey, List[int]] = {}
    for i, arc in enumerate(arcs):
        positions.setdefault(arc.edge_key, []).append(i)
    for key, pos in positions.items():
        e = instance._edge_by_key[key]
        j = len(pos)
        for i in range(1, j):
            gap = prefix[pos[i]] - prefix[pos[i - 1] + 1]
            bound = params.gap_bound(e.priority, i)
            if gap > bound:
                violations.append(
                    Violation(
                        ConstraintKind.PRIORITY_GAP,
                        f"edge {key[0]}-{key[1]} gap {gap} after occurrence {i} "
                        f"exceeds {bound}",
                    )
                )
        wrap = (total - prefix[pos[-1] + 1]) + prefix[pos[0]]
        bound = params.gap_bound(e.priority, j)
        if wrap > bound:
            violations.append(
                Violation(
                    ConstraintKind.PRIORITY_GAP,
                    f"edge {key[0]}-{key[1]} wrap-around gap {wrap} at occurrence "
                    f"{j} exceeds {bound}",
                )
            )

    # trips: split at depot visits
    trip_loads: List[Fraction] = []
    if arcs:
        budget = params.c * params.L
        boundaries = [0] + [i + 1 for i, a in enumerate(arcs) if a.head == instance.depot]
        serviced: set = set()
        for s, epos in zip(boundaries, boundaries[1:]):
            if params.capacity_semantics is CapacitySemantics.TRAVERSED:
                load = prefix[epos] - prefix[s]
            else:
                load = Fraction(0)
                for arc in arcs[s:epos]:
                    if arc.edge_key not in serviced:
                        serviced.add(arc.edge_key)
                        load += instance.edge_of_arc(arc).alpha
            trip_loads.append(load)
            if load > budget:
                violations.append(
                    Violation(
                        ConstraintKind.CAPACITY,
                        f"trip over arcs {s + 1}..{epos} loads {load}, budget {budget}",
                    )
                )

    return ValidationReport(
        ok=not violations,
        violations=violations,
        route_length=total,
        trip_loads=trip_loads,
    )
