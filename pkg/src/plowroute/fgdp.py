"""Interval-set dynamic program for step-counted closed walks on trees.

A walk instance fixes, per edge, how many times each direction must be
traversed (exactly, or at most) and how many steps may pass between
consecutive traversals of the edge, cyclically.  The DP roots the tree
at the depot and stores, per vertex, the sets of walk positions that
steps inside the subtree can occupy.  Interval structure makes the sets
sparse: a subtree is entered and left through its parent edge, so the
positions strictly below a vertex form maximal intervals flanked by the
parent-edge traversals.

The same machinery decides full vehicle-route instances on unit-length
trees by attaching a pendant reload vertex at the depot whose gap
bounds encode the per-trip capacity budget.  That encoding is one-sided
(see ``decide_vehicle_route_tree``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .model import (
    Arc,
    CapacitySemantics,
    EdgeKey,
    InputError,
    RoadInstance,
    RoadEdge,
    ServiceParams,
    VehicleRoute,
    edge_key,
)
from .trees import RootedTree


class FgMode(Enum):
    EXACT = "exact"
    AT_MOST = "atmost"


@dataclass
class FgInstance:
    """Step-walk instance: per-edge traversal counts and cyclic gap bounds.

    Attributes:
        instance: underlying road network (the DP itself requires a tree;
            graph instances are carried for the treewidth solver and the
            brute-force oracle).
        f: per-edge traversal count (applies to each direction).
        g: (edge, occurrence index y) -> max steps between the y-th and
            (y+1)-st traversal of the edge, cyclically; y runs 1..2f(e).
        mode: EXACT (each direction exactly f times) or AT_MOST (between
            1 and f times, any closing length).
        max_frequency, max_degree: declared bounds; actual values above
            the declared bounds are an input error.
    """

    instance: RoadInstance
    f: Mapping[EdgeKey, int]
    g: Mapping[Tuple[EdgeKey, int], int]
    mode: FgMode = FgMode.EXACT
    max_frequency: Optional[int] = None
    max_degree: Optional[int] = None

    def __post_init__(self) -> None:
        for e in self.instance.edges:
            if e.key not in self.f:
                raise InputError(f"missing traversal count for edge {e.key}")
            fe = self.f[e.key]
            if not isinstance(fe, int) or fe < 1:
                raise InputError(f"traversal count for {e.key} must be >= 1")
            for y in range(1, 2 * fe + 1):
                bound = self.g.get((e.key, y))
                if bound is None:
                    raise InputError(f"missing gap bound for {e.key} index {y}")
                if bound < 0:
                    raise InputError(f"negative gap bound for {e.key} index {y}")
        if self.max_frequency is None:
            self.max_frequency = max(self.f.values(), default=1)
        if self.max_degree is None:
            self.max_degree = self.instance.max_degree()
        if max(self.f.values(), default=1) > self.max_frequency:
            raise InputError("traversal count exceeds declared frequency bound")
        if self.instance.max_degree() > self.max_degree:
            raise InputError("vertex degree exceeds declared degree bound")

    def gap(self, key: EdgeKey, y: int) -> int:
        return self.g[(key, y)]

    def total_count(self) -> int:
        return sum(self.f[e.key] for e in self.instance.edges)

    @classmethod
    def with_uniform_gaps(
        cls,
        instance: RoadInstance,
        f: Mapping[EdgeKey, int],
        bound,
        mode: FgMode = FgMode.EXACT,
    ) -> "FgInstance":
        """Broadcast a single per-edge (or global) gap bound across indices."""
        g: Dict[Tuple[EdgeKey, int], int] = {}
        for e in instance.edges:
            per_edge = bound[e.key] if isinstance(bound, Mapping) else bound
            for y in range(1, 2 * f[e.key] + 1):
                g[(e.key, y)] = per_edge
        return cls(instance=instance, f=f, g=g, mode=mode)


@dataclass
class FgResult:
    exists: bool
    witness: Optional[VehicleRoute]
    states: int
    length: Optional[int] = None


# ---------------------------------------------------------------------------
# mask helpers (bit p-1 represents walk position p)
# ---------------------------------------------------------------------------


def _intervals(mask: int) -> List[Tuple[int, int]]:
    """Maximal runs of set bits, as 1-indexed position pairs (a, b)."""
    out = []
    m = mask
    while m:
        start = (m & -m).bit_length() - 1
        end = start
        while (m >> (end + 1)) & 1:
            end += 1
        out.append((start + 1, end + 1))
        m &= ~((1 << (end + 1)) - 1)
    return out


def _mask_of(positions: Iterable[int]) -> int:
    m = 0
    for p in positions:
        m |= 1 << (p - 1)
    return m


def _combine_prune(mask: int, l: int, hi_parent: int) -> bool:
    """Sound pruning of partial child unions at a non-root vertex.

    Rejects masks that no later sibling contribution or parent-edge
    extension can repair: positions touching the walk boundary (the
    forced entry/exit would fall outside 1..l), single free positions
    between intervals (visit intervals have length >= 2, and the
    extension would need an exit and an entry at the same position),
    and interval counts that exceed the parent-edge visit budget even
    if every wider gap were later filled.
    """
    if mask & 1 or (mask >> (l - 1)) & 1:
        return False
    iv = _intervals(mask)
    mergeable = 0
    for i in range(1, len(iv)):
        gap = iv[i][0] - iv[i - 1][1] - 1
        if gap == 1:
            return False
        if gap >= 2:
            mergeable += 1
    return len(iv) - mergeable <= hi_parent


def _gap_check(xs: Sequence[int], l: int, gap_of) -> bool:
    n = len(xs)
    for i in range(n - 1):
        if xs[i + 1] - xs[i] - 1 > gap_of(i + 1):
            return False
    return (l - xs[-1]) + (xs[0] - 1) <= gap_of(n)


def _bounce_pairs(free: List[int], need: int) -> Iterator[Tuple[int, ...]]:
    """Choose ``need`` disjoint (x, x+1) pairs from the sorted free list."""
    free_set = set(free)

    def rec(start: int, left: int, acc: List[int]) -> Iterator[Tuple[int, ...]]:
        if left == 0:
            yield tuple(acc)
            return
        for i in range(start, len(free)):
            x = free[i]
            if x + 1 in free_set:
                acc.append(x)
                j = i
                while j < len(free) and free[j] <= x + 1:
                    j += 1
                yield from rec(j, left - 1, acc)
                acc.pop()

    yield from rec(0, need, [])


# ---------------------------------------------------------------------------
# fixed-length tree DP
# ---------------------------------------------------------------------------


class _TreeRun:
    """One DP pass for a fixed walk length and per-edge count ranges."""

    def __init__(
        self,
        fg: FgInstance,
        tree: RootedTree,
        ranges: Mapping[EdgeKey, Tuple[int, int]],
        l: int,
    ):
        self.fg = fg
        self.tree = tree
        self.ranges = ranges
        self.l = l
        self.states = 0
        # per-vertex extended sets: mask -> (base_mask, stage) for witnesses
        self.ext: Dict[str, Dict[int, Tuple[int, int]]] = {}
        # per-vertex, per-stage combination backpointers:
        # chain[v][stage][mask] = (prev_mask, child, child_ext_mask)
        self.chain: Dict[str, List[Dict[int, Optional[Tuple[int, str, int]]]]] = {}

    def run(self) -> Tuple[bool, Optional[List[Arc]]]:
        root = self.tree.root
        order = [v for v in self.tree.postorder()]
        for v in order:
            if v == root:
                return self._solve_root()
            self._build_vertex(v)
            if not self.ext[v]:
                return False, None
        raise AssertionError("postorder must end at the root")

    # -- non-root vertices ------------------------------------------------

    def _parent_range(self, v: str) -> Tuple[int, int]:
        return self.ranges[self.tree.parent_edge(v)]

    def _build_vertex(self, v: str) -> None:
        lo, hi = self._parent_range(v)
        stages: List[Dict[int, Optional[Tuple[int, str, int]]]] = [{0: None}]
        acc: Dict[int, Optional[Tuple[int, str, int]]] = {0: None}
        children = sorted(self.tree.children[v], key=lambda c: len(self.ext[c]))
        for ch in children:
            nxt: Dict[int, Optional[Tuple[int, str, int]]] = {}
            for m_acc in acc:
                for m_ch in self.ext[ch]:
                    if m_acc & m_ch:
                        continue
                    u = m_acc | m_ch
                    if u in nxt:
                        continue
                    if not _combine_prune(u, self.l, hi):
                        continue
                    nxt[u] = (m_acc, ch, m_ch)
            acc = nxt
            stages.append(acc)
            if not acc:
                break
        self.chain[v] = stages
        out: Dict[int, Tuple[int, int]] = {}
        stage_idx = len(stages) - 1
        key = self.tree.parent_edge(v)
        for base in acc:
            for mask in self._extend(base, key, lo, hi):
                out.setdefault(mask, (base, stage_idx))
        self.ext[v] = out
        self.states += len(out)
        bound = hi * max(self.l, 1) ** (2 * hi)
        assert len(out) <= bound, (
            f"state count {len(out)} above {bound} at vertex {v}"
        )

    def _extend(self, base: int, key: EdgeKey, lo: int, hi: int) -> Iterator[int]:
        """All parent-edge position sets wrapping the base interior mask."""
        iv = _intervals(base)
        q0 = len(iv)
        if q0 > hi:
            return
        forced: Set[int] = set()
        ok = True
        for a, b in iv:
            if a - 1 < 1 or b + 1 > self.l:
                ok = False
                break
            forced.add(a - 1)
            forced.add(b + 1)
        if not ok or len(forced) < 2 * q0:
            return
        forced_mask = _mask_of(forced)
        if forced_mask & base:
            return
        occupied = base | forced_mask
        free = [p for p in range(1, self.l + 1) if not (occupied >> (p - 1)) & 1]
        gap_of = lambda y: self.fg.gap(key, y)
        for q in range(max(lo, q0, 1), hi + 1):
            need = q - q0
            for combo in _bounce_pairs(free, need):
                xs = sorted(
                    list(forced) + [x for x in combo] + [x + 1 for x in combo]
                )
                if not _gap_check(xs, self.l, gap_of):
                    continue
                yield occupied | _mask_of(
                    [x for x in combo] + [x + 1 for x in combo]
                )

    # -- root tiling -------------------------------------------------------

    def _solve_root(self) -> Tuple[bool, Optional[List[Arc]]]:
        root = self.tree.root
        children = list(self.tree.children[root])
        if not children:
            return (self.l == 0), ([] if self.l == 0 else None)
        if self.l == 0:
            return False, None
        full = (1 << self.l) - 1
        by_start: Dict[str, Dict[int, List[int]]] = {}
        klass: Dict[str, int] = {}
        sig_ids: Dict[frozenset, int] = {}
        for ch in children:
            index: Dict[int, List[int]] = {}
            for mask in self.ext[ch]:
                index.setdefault((mask & -mask).bit_length(), []).append(mask)
            by_start[ch] = index
            sig = frozenset(self.ext[ch].keys())
            klass[ch] = sig_ids.setdefault(sig, len(sig_ids))
        chosen: List[Tuple[str, int]] = []

        def dfs(used: int, acc: int) -> bool:
            if acc == full:
                return used == (1 << len(children)) - 1
            p = ((~acc) & -(~acc)).bit_length()
            tried: Set[int] = set()
            for i, ch in enumerate(children):
                if (used >> i) & 1 or klass[ch] in tried:
                    continue
                tried.add(klass[ch])
                for mask in by_start[ch].get(p, ()):
                    if mask & acc:
                        continue
                    chosen.append((ch, mask))
                    if dfs(used | (1 << i), acc | mask):
                        return True
                    chosen.pop()
            return False

        if not dfs(0, 0):
            return False, None
        arcs_at: Dict[int, Arc] = {}
        for ch, mask in chosen:
            self._emit(ch, mask, arcs_at)
        return True, [arcs_at[p] for p in sorted(arcs_at)]

    def _emit(self, v: str, ext_mask: int, arcs_at: Dict[int, Arc]) -> None:
        parent = self.tree.parent[v]
        base, stage = self.ext[v][ext_mask]
        # edge traversal positions alternate strictly: downward, upward, ...
        # in sorted order (the walk must resurface before re-entering)
        xs = sorted(p + 1 for p in range(self.l) if ((ext_mask & ~base) >> p) & 1)
        for i, x in enumerate(xs):
            arcs_at[x] = Arc(parent, v) if i % 2 == 0 else Arc(v, parent)
        mask = base
        while stage > 0:
            entry = self.chain[v][stage][mask]
            assert entry is not None
            prev, ch, m_ch = entry
            self._emit(ch, m_ch, arcs_at)
            mask = prev
            stage -= 1


def _count_ranges(
    fg: FgInstance, overrides: Optional[Mapping[EdgeKey, Tuple[int, int]]] = None
) -> Dict[EdgeKey, Tuple[int, int]]:
    ranges: Dict[EdgeKey, Tuple[int, int]] = {}
    for e in fg.instance.edges:
        fe = fg.f[e.key]
        if fg.mode is FgMode.EXACT:
            ranges[e.key] = (fe, fe)
        else:
            ranges[e.key] = (1, fe)
    if overrides:
        for key, (lo, hi) in overrides.items():
            if key not in ranges:
                raise InputError(f"count range for unknown edge {key}")
            base_lo, base_hi = ranges[key]
            ranges[key] = (max(lo, 1), min(hi, base_hi))
    return ranges


def decide_fg_walk(
    fg: FgInstance,
    count_ranges: Optional[Mapping[EdgeKey, Tuple[int, int]]] = None,
) -> FgResult:
    """Decide existence of a closed depot walk meeting the f/g constraints.

    EXACT mode solves the fixed length l = 2*sum(f); AT_MOST iterates
    over candidate even lengths (closed tree walks traverse each edge
    equally often in both directions, so odd lengths cannot occur).
    Returns a witness walk when one exists.
    """
    if fg.instance.kind != "tree":
        raise InputError("the interval DP requires a tree instance")
    if count_ranges is not None and fg.mode is FgMode.EXACT:
        raise InputError("count ranges only narrow AT_MOST instances")
    tree = RootedTree(fg.instance, fg.instance.depot)
    ranges = _count_ranges(fg, count_ranges)
    if not fg.instance.edges:
        return FgResult(True, VehicleRoute(()), 0, 0)
    total_states = 0
    if fg.mode is FgMode.EXACT:
        lengths: Iterable[int] = [2 * sum(hi for _, hi in ranges.values())]
    else:
        lo_total = 2 * sum(lo for lo, _ in ranges.values())
        hi_total = 2 * sum(hi for _, hi in ranges.values())
        lengths = range(lo_total, hi_total + 1, 2)
    for l in lengths:
        run = _TreeRun(fg, tree, ranges, l)
        found, arcs = run.run()
        total_states += run.states
        if found:
            witness = VehicleRoute(tuple(arcs))
            return FgResult(True, witness, total_states, l)
    return FgResult(False, None, total_states, None)


# ---------------------------------------------------------------------------
# vehicle-route encoding (unit-length trees)
# ---------------------------------------------------------------------------


def _fresh_vertex(instance: RoadInstance, base: str) -> str:
    name = base
    while name in instance.vertices:
        name += "'"
    return name


def encode_vehicle_route_as_fg(
    instance: RoadInstance,
    params: ServiceParams,
    max_trips: Optional[int] = None,
) -> FgInstance:
    """Rewrite a unit-length tree vehicle instance as an AT_MOST walk
    instance with a pendant reload vertex at the depot.

    The pendant becomes the new depot; the steps between its consecutive
    traversals cover exactly one depot-free stretch of the original
    route, so bounding them by floor(c*L) enforces the traversed-load
    trip budget.  Priority gap rows translate directly since steps equal
    lengths on unit trees.

    The encoding is sound but not complete: pendant visits occupy walk
    positions, widening the original edges' step gaps, so some valid
    routes have no encoded counterpart.
    """
    if instance.kind != "tree":
        raise InputError("encoding requires a tree instance")
    if any(e.alpha != 1 for e in instance.edges):
        raise InputError("encoding requires unit-length roads")
    if params.capacity_semantics is not CapacitySemantics.TRAVERSED:
        raise InputError("encoding models traversed-load capacity only")
    stop = _fresh_vertex(instance, "reload")
    vertices = list(instance.vertices) + [stop]
    edges = list(instance.edges) + [RoadEdge(instance.depot, stop, Fraction(1))]
    encoded = RoadInstance("tree", vertices, edges, depot=stop)
    trips = max_trips if max_trips is not None else math.ceil(1 / params.c)
    f: Dict[EdgeKey, int] = {}
    g: Dict[Tuple[EdgeKey, int], int] = {}
    for e in instance.edges:
        fe = min(
            params.frequency(Arc(e.u, e.v)), params.frequency(Arc(e.v, e.u))
        )
        f[e.key] = fe
        for y in range(1, 2 * fe + 1):
            g[(e.key, y)] = math.floor(params.gap_bound(e.priority, y))
    pendant = edge_key(instance.depot, stop)
    f[pendant] = trips
    budget = math.floor(params.c * params.L)
    for y in range(1, 2 * trips + 1):
        g[(pendant, y)] = budget
    return FgInstance(instance=encoded, f=f, g=g, mode=FgMode.AT_MOST)


def decide_vehicle_route_tree(
    instance: RoadInstance,
    params: ServiceParams,
    max_trips: Optional[int] = None,
) -> FgResult:
    """One-sided vehicle-route decision through the pendant encoding.

    A returned witness is always a valid route (strip the reload visits
    and the remaining arc sequence anchors at the original depot); a
    False result does NOT certify infeasibility, because the encoding
    is length-inflating (see encode_vehicle_route_as_fg).
    """
    fg = encode_vehicle_route_as_fg(instance, params, max_trips)
    tree = RootedTree(fg.instance, fg.instance.depot)
    pendant = edge_key(instance.depot, fg.instance.depot)
    n_edges = len(fg.instance.edges)
    l_cap = math.floor(params.L)
    total_states = 0
    base_ranges = _count_ranges(fg)
    for l in range(2 * n_edges, 2 * fg.total_count() + 1, 2):
        lo_p = max(1, -(-(l - l_cap) // 2))
        if lo_p > fg.f[pendant]:
            continue
        ranges = dict(base_ranges)
        ranges[pendant] = (lo_p, fg.f[pendant])
        run = _TreeRun(fg, tree, ranges, l)
        found, arcs = run.run()
        total_states += run.states
        if found:
            route = VehicleRoute(
                tuple(a for a in arcs if a.edge_key != pendant)
            )
            return FgResult(True, route, total_states, l)
    return FgResult(False, None, total_states, None)
