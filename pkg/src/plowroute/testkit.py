"""Brute-force oracles, instance generators, and corpus enumerators.

The searches here are deliberately plain: depth-first enumeration with
*sound* pruning only (bounds that provably cannot cut off a feasible
completion).  They share no solver code, so agreement between a solver
and an oracle is meaningful evidence of correctness.

Performance notes: the route/walk oracles integerize all thresholds up
front (exact rational scaling, then integer comparisons in the inner
loop) and skip symmetric moves into interchangeable untouched subtrees,
which is what makes exhaustive search on 9-edge trees affordable.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

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
    VehicleRoute,
    edge_key,
    uniform_frequency,
    validate_route,
)
from .fgdp import FgInstance, FgMode


@dataclass
class OracleResult:
    exists: bool
    route: Optional[VehicleRoute]
    explored: int


# ---------------------------------------------------------------------------
# shared indexing helpers
# ---------------------------------------------------------------------------


class _Indexed:
    """Integer-indexed view of an instance for tight search loops.

    Edge i has arcs 2i (u->v, endpoints sorted) and 2i+1 (v->u).
    """

    def __init__(self, instance: RoadInstance):
        self.instance = instance
        self.vid = {v: i for i, v in enumerate(instance.vertices)}
        self.vertices = list(instance.vertices)
        self.edges = sorted(instance.edges, key=lambda e: e.key)
        self.eid = {e.key: i for i, e in enumerate(self.edges)}
        self.m = len(self.edges)
        self.depot = self.vid[instance.depot]
        # adj[v] = list of (w, edge_index, arc_index)
        self.adj: List[List[Tuple[int, int, int]]] = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            u, v = self.vid[e.key[0]], self.vid[e.key[1]]
            self.adj[u].append((v, i, 2 * i))
            self.adj[v].append((u, i, 2 * i + 1))

    def arc_of(self, arc_index: int) -> Arc:
        e = self.edges[arc_index // 2]
        u, v = e.key
        return Arc(u, v) if arc_index % 2 == 0 else Arc(v, u)

    def arc_tails(self) -> List[int]:
        tails = [0] * (2 * self.m)
        for i, e in enumerate(self.edges):
            tails[2 * i] = self.vid[e.key[0]]
            tails[2 * i + 1] = self.vid[e.key[1]]
        return tails

    def tree_parents(self) -> Tuple[List[int], List[int], List[int]]:
        """(parent vertex, parent edge index, rootward arc index) per vertex.

        Root entries are -1.  Requires a tree instance.
        """
        par = [-1] * len(self.vertices)
        pedge = [-1] * len(self.vertices)
        parc = [-1] * len(self.vertices)
        seen = [False] * len(self.vertices)
        stack = [self.depot]
        seen[self.depot] = True
        while stack:
            v = stack.pop()
            for w, ei, ai in self.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    par[w] = v
                    pedge[w] = ei
                    # arc from w back toward the root is the reverse of ai
                    parc[w] = ai ^ 1
                    stack.append(w)
        return par, pedge, parc


def _stranded(
    ix: _Indexed,
    cnt_arc: List[int],
    fa: List[int],
    tails: List[int],
    v: int,
    require_all: bool,
) -> bool:
    """Residual-reachability prune, sound for both oracles.

    BFS from the current vertex over arcs with remaining budget.  The
    walk is dead if the depot is unreachable, or if some arc that must
    still be traversed (per-direction quota under EXACT, first coverage
    otherwise) has an unreachable tail.  Shared arc budgets make this a
    relaxation, so pruning on its failure never cuts a feasible branch.
    """
    seen = 1 << v
    stack = [v]
    while stack:
        x = stack.pop()
        for w, _, ai in ix.adj[x]:
            if cnt_arc[ai] < fa[ai] and not (seen >> w) & 1:
                seen |= 1 << w
                stack.append(w)
    if not (seen >> ix.depot) & 1:
        return True
    for ai in range(2 * ix.m):
        if cnt_arc[ai] < (fa[ai] if require_all else 1):
            if not (seen >> tails[ai]) & 1:
                return True
    return False


def _subtree_shape_classes(ix: _Indexed, extra_of_edge) -> List[int]:
    """Class labels such that two child vertices with equal labels root
    isomorphic subtrees (edge attributes included via ``extra_of_edge``)."""
    par, pedge, _ = ix.tree_parents()
    children: List[List[int]] = [[] for _ in ix.vertices]
    order = []
    for v in range(len(ix.vertices)):
        if par[v] >= 0:
            children[par[v]].append(v)
    # postorder via depths
    depth = [0] * len(ix.vertices)
    stack = [ix.depot]
    topo = []
    while stack:
        v = stack.pop()
        topo.append(v)
        for w in children[v]:
            depth[w] = depth[v] + 1
            stack.append(w)
    labels: Dict[Tuple, int] = {}
    cls = [0] * len(ix.vertices)
    for v in reversed(topo):
        e = ix.edges[pedge[v]] if pedge[v] >= 0 else None
        attrs = None if e is None else (e.alpha, e.priority, extra_of_edge(pedge[v]))
        key = (attrs, tuple(sorted(cls[w] for w in children[v])))
        cls[v] = labels.setdefault(key, len(labels))
    return cls


# ---------------------------------------------------------------------------
# vehicle-route oracle
# ---------------------------------------------------------------------------


def _min_rooted_cover(
    ix: _Indexed,
    alpha: List[int],
    cap_int: int,
    par: List[int],
    pedge: List[int],
    order: List[int],
) -> Optional[Tuple[int, Tuple[int, ...]]]:
    """Cheapest cover of a tree by depot-rooted subtrees, one per trip.

    A trip is a closed depot walk; on a tree its edge support is a
    depot-rooted subtree and every support edge is crossed an even
    number of times, so the trip costs at least twice the subtree
    weight, with equality for a depth-first tour.  The minimum total
    doubled weight over covers whose trips respect the capacity is
    therefore a length lower bound for every route, under traversal
    charging, regardless of recurrence limits.

    Returns (minimal doubled weight, trip edge-masks), or None when
    some edge fits in no capacity-respecting rooted subtree.
    """
    cap2 = cap_int // 2
    kids: List[List[int]] = [[] for _ in ix.vertices]
    for v in order[1:]:
        kids[par[v]].append(v)

    def subtrees(v: int) -> List[Tuple[int, int]]:
        # rooted subtrees hanging at v as (edge mask, weight), empty included
        out = [(0, 0)]
        for c in kids[v]:
            opts = [(0, 0)] + [
                (sm | 1 << pedge[c], sa + alpha[pedge[c]])
                for sm, sa in subtrees(c)
            ]
            out = [
                (m0 | m1, a0 + a1)
                for m0, a0 in out
                for m1, a1 in opts
                if a0 + a1 <= cap2
            ]
        return out

    trips = [t for t in subtrees(ix.depot) if t[0]]
    by_edge: List[List[Tuple[int, int]]] = [[] for _ in range(ix.m)]
    for tm, ta in trips:
        for e in range(ix.m):
            if tm >> e & 1:
                by_edge[e].append((tm, ta))
    if any(not b for b in by_edge):
        return None

    memo: Dict[int, Tuple[int, Tuple[int, ...]]] = {0: (0, ())}

    def best(mask: int) -> Tuple[int, Tuple[int, ...]]:
        got = memo.get(mask)
        if got is None:
            pivot = (mask & -mask).bit_length() - 1
            got = min(
                (
                    best(mask & ~tm)[0] + 2 * ta,
                    best(mask & ~tm)[1] + (tm,),
                )
                for tm, ta in by_edge[pivot]
            )
            memo[mask] = got
        return got

    return best((1 << ix.m) - 1)


def _cover_route(ix: _Indexed, trip_masks: Sequence[int]) -> VehicleRoute:
    """Concatenated depth-first tours of rooted subtrees, one per trip."""
    par, pedge, _ = ix.tree_parents()
    kids: List[List[int]] = [[] for _ in ix.vertices]
    for w in range(len(ix.vertices)):
        if par[w] >= 0:
            kids[par[w]].append(w)
    pairs: List[Tuple[int, int]] = []

    def go(v: int, mask: int) -> None:
        for c in kids[v]:
            if mask >> pedge[c] & 1:
                pairs.append((v, c))
                go(c, mask)
                pairs.append((c, v))

    for tm in trip_masks:
        go(ix.depot, tm)
    names = ix.vertices
    return VehicleRoute(tuple(Arc(names[a], names[b]) for a, b in pairs))


def brute_force_route(
    instance: RoadInstance,
    params: ServiceParams,
    guard: int = 5_000_000,
    shortcuts: bool = True,
) -> OracleResult:
    """Exhaustively decide vehicle-route existence.

    Depth-first search over arc sequences, pruning only on provably
    violated or unrecoverable states: length/return-distance bounds,
    per-arc frequency, running trip load, interior recurrence gaps, and
    edges whose next-traversal deadline has already passed.  On trees,
    moves into untouched, mutually isomorphic sibling subtrees are
    deduplicated (a relabeling argument maps completions onto each other).

    With ``shortcuts`` enabled, tree instances under traversal charging
    are first compared against the rooted-cover bound: below it the
    search is skipped outright, and when no recurrence factor is under
    one the cover's own tour is returned after revalidation.  Disabling
    shortcuts forces the plain search; results must agree.

    Raises GuardExceeded after ``guard`` search nodes.
    """
    ix = _Indexed(instance)
    m = ix.m
    if m == 0:
        return OracleResult(True, VehicleRoute(()), 0)

    scale = math.lcm(*[e.alpha.denominator for e in ix.edges])
    alpha = [int(e.alpha * scale) for e in ix.edges]
    L_int = _floor_scaled(params.L, scale)
    if 2 * sum(alpha) > L_int:
        # coverage alone needs every arc once
        return OracleResult(False, None, 0)
    cap_int = _floor_scaled(params.c * params.L, scale)
    fa = [0] * (2 * m)
    for i in range(m):
        u, v = ix.edges[i].key
        fa[2 * i] = params.frequency(Arc(u, v))
        fa[2 * i + 1] = params.frequency(Arc(v, u))
    # gap bounds per edge and occurrence (1-based); occurrences are capped
    # by the frequency budget of both arcs
    gb: List[List[int]] = []
    for i in range(m):
        occ_max = fa[2 * i] + fa[2 * i + 1]
        row = [0] * (occ_max + 1)
        for occ in range(1, occ_max + 1):
            row[occ] = _floor_scaled(
                params.gap_bound(ix.edges[i].priority, occ), scale
            )
        gb.append(row)

    serviced_mode = params.capacity_semantics is CapacitySemantics.SERVICED
    is_tree = instance.kind == "tree"
    tails = ix.arc_tails()

    # gap-budget counting: with j traversals, edge e's cyclic gaps sum to
    # X - j*alpha(e) for a route of total length X, and gap i is capped
    # by gb[e][i].  Both orientations are needed, so j >= 2; tree edges
    # keep j even (side-crossing parity); a degree-one endpoint forces
    # every other gap to zero, leaving only one parity class of caps.
    # The class with odd gaps zeroed puts the first traversal at the very
    # start of the route and the last at its end, so it needs the depot
    # on the edge.
    bounce = [
        len(ix.adj[ix.vid[ix.edges[i].key[0]]]) == 1
        or len(ix.adj[ix.vid[ix.edges[i].key[1]]]) == 1
        for i in range(m)
    ]
    at_depot = [instance.depot in ix.edges[i].key for i in range(m)]
    jopts: List[List[Tuple[int, int]]] = []
    for e in range(m):
        row = gb[e]
        opts: List[Tuple[int, int]] = []
        for j in range(2, len(row)):
            if (is_tree or bounce[e]) and j % 2:
                continue
            if bounce[e]:
                room = sum(row[2 : j + 1 : 2])
                if at_depot[e]:
                    room = max(room, sum(row[1 : j + 1 : 2]))
            else:
                room = sum(row[1 : j + 1])
            opts.append((j * alpha[e] + room, j))
        jopts.append(opts)
    jopt_x = [[o[0] for o in opts] for opts in jopts]
    par, pedge, parc = (ix.tree_parents() if is_tree else ([], [], []))
    if is_tree:
        classes = _subtree_shape_classes(
            ix, lambda ei: (fa[2 * ei], fa[2 * ei + 1])
        )
        depth_alpha = [0] * len(ix.vertices)
        order = [ix.depot]
        for v in order:
            for w, ei, _ in ix.adj[v]:
                if par[w] == v:
                    depth_alpha[w] = depth_alpha[v] + alpha[ei]
                    order.append(w)
        dist_back = depth_alpha
    else:
        dist_back = _dijkstra(ix, alpha, ix.depot)
    # vertex-to-vertex distances, for the traversal-deadline prune
    dist_from = [_dijkstra(ix, alpha, s) for s in range(len(ix.vertices))]
    if not serviced_mode:
        # every edge must fit inside one depot-closed trip
        for i in range(m):
            round_trip = dist_back[tails[2 * i]] + alpha[i] + dist_back[tails[2 * i + 1]]
            if round_trip > cap_int:
                return OracleResult(False, None, 0)
    if not serviced_mode and is_tree:
        # subtree packing: a visit below edge e = (u, v) crosses e twice
        # and its inner work fits in cap - 2*dist(u) - 2*alpha(e), so the
        # coverage work under v forces a minimum traversal count on e
        inner = [0] * len(ix.vertices)
        n_floor = [2] * m
        for x in reversed(order):
            if x == ix.depot:
                continue
            e, u = pedge[x], par[x]
            slack = cap_int - 2 * dist_back[u] - 2 * alpha[e]
            visits = 1 if inner[x] == 0 else -(-inner[x] // slack)
            n_floor[e] = max(2, 2 * visits)
            inner[u] += n_floor[e] * alpha[e] + inner[x]
        if inner[ix.depot] > L_int:
            return OracleResult(False, None, 0)
        jopts = [
            [o for o in jopts[e] if o[1] >= n_floor[e]] for e in range(m)
        ]
        jopt_x = [[o[0] for o in opts] for opts in jopts]
        if shortcuts:
            cover = _min_rooted_cover(ix, alpha, cap_int, par, pedge, order)
            if cover is None or cover[0] > L_int:
                return OracleResult(False, None, 0)
            if all(x >= 1 for row in params.t.table.values() for x in row):
                route = _cover_route(ix, cover[1])
                if validate_route(instance, params, route).ok:
                    return OracleResult(True, route, 0)

    cnt_arc = [0] * (2 * m)
    cnt_edge = [0] * m
    first_start = [0] * m
    last_end = [0] * m
    touched = [0] * len(ix.vertices)
    stack_arcs: List[int] = []
    total_alpha_arcs = 2 * sum(alpha)
    state = {"uncov": total_alpha_arcs, "covered": 0, "explored": 0}

    def lower_bound(v: int, prefix: int) -> int:
        uncov = state["uncov"]
        if not is_tree:
            return max(dist_back[v], uncov)
        overlap = 0
        x = v
        while x != ix.depot:
            if cnt_arc[parc[x]] == 0:
                overlap += alpha[pedge[x]]
            x = par[x]
        return uncov + dist_back[v] - overlap

    found: List[Optional[Tuple[int, ...]]] = [None]

    def counting_dead(prefix: int, floor: int, cap: int) -> bool:
        # no admissible total length X: the traversal counts forced by
        # the gap budgets always overshoot X itself
        X = max(total_alpha_arcs, floor)
        while X <= cap:
            need = prefix
            for e in range(m):
                pos = bisect.bisect_left(jopt_x[e], X)
                if pos == len(jopt_x[e]):
                    return True
                extra = jopts[e][pos][1] - cnt_edge[e]
                if extra > 0:
                    need += extra * alpha[e]
            if need <= X:
                return False
            X = need
        return True

    def dfs(v: int, prefix: int, seg: int) -> bool:
        state["explored"] += 1
        if state["explored"] > guard:
            raise GuardExceeded(
                f"route search exceeded {guard} nodes on {m}-edge instance"
            )
        if v == ix.depot and state["covered"] == 2 * m:
            ok = True
            for e in range(m):
                wrap = (prefix - last_end[e]) + first_start[e]
                if wrap > gb[e][cnt_edge[e]]:
                    ok = False
                    break
            if ok:
                found[0] = tuple(stack_arcs)
                return True
        lb = lower_bound(v, prefix)
        if prefix + lb > L_int:
            return False
        # dead-edge scan: an edge whose interior deadline passed can never
        # be traversed again; it must be fully covered and its wrap gap
        # caps the total route length.  An uncovered edge that cannot be
        # reached before its deadline is just as dead.
        total_cap = L_int
        for e in range(m):
            ce = cnt_edge[e]
            if ce == 0:
                continue
            bound = gb[e][ce]
            if cnt_arc[2 * e] == 0 or cnt_arc[2 * e + 1] == 0:
                # must be traversed again; the next traversal may use
                # either direction that still has frequency budget
                reach = dist_from[v]
                d = L_int + 1
                if cnt_arc[2 * e] < fa[2 * e]:
                    d = reach[tails[2 * e]]
                if cnt_arc[2 * e + 1] < fa[2 * e + 1]:
                    d = min(d, reach[tails[2 * e + 1]])
                if prefix + d - last_end[e] > bound:
                    return False
            elif prefix - last_end[e] > bound:
                cap_e = bound + last_end[e] - first_start[e]
                if cap_e < total_cap:
                    total_cap = cap_e
        if prefix + lb > total_cap:
            return False
        if _stranded(ix, cnt_arc, fa, tails, v, require_all=False):
            return False
        if counting_dead(prefix, prefix + lb, total_cap):
            return False

        moves = []
        for w, ei, ai in ix.adj[v]:
            if cnt_arc[ai] >= fa[ai]:
                continue
            ce = cnt_edge[ei]
            if ce and prefix - last_end[ei] > gb[ei][ce]:
                continue
            a = alpha[ei]
            if prefix + a > L_int:
                continue
            if serviced_mode:
                add = a if ce == 0 else 0
                if seg + add > cap_int:
                    continue
            else:
                if seg + a > cap_int:
                    continue
            moves.append((cnt_arc[ai], ai, w, ei, a))
        moves.sort()
        seen_classes: Set[Tuple[int, bool]] = set()
        for _, ai, w, ei, a in moves:
            if is_tree and par[w] == v and touched[w] == 0:
                key = (classes[w], True)
                if key in seen_classes:
                    continue
                seen_classes.add(key)
            ce = cnt_edge[ei]
            if serviced_mode:
                new_seg = seg + (a if ce == 0 else 0)
            else:
                new_seg = seg + a
            # apply
            cnt_arc[ai] += 1
            if cnt_arc[ai] == 1:
                state["covered"] += 1
                state["uncov"] -= a
            cnt_edge[ei] += 1
            old_first, old_last = first_start[ei], last_end[ei]
            if ce == 0:
                first_start[ei] = prefix
            last_end[ei] = prefix + a
            if is_tree:
                x = w if par[w] == v else v
                y = x
                while y != -1:
                    touched[y] += 1
                    y = par[y]
            stack_arcs.append(ai)
            hit = dfs(w, prefix + a, 0 if w == ix.depot else new_seg)
            stack_arcs.pop()
            if is_tree:
                y = x
                while y != -1:
                    touched[y] -= 1
                    y = par[y]
            cnt_edge[ei] -= 1
            first_start[ei], last_end[ei] = old_first, old_last
            cnt_arc[ai] -= 1
            if cnt_arc[ai] == 0:
                state["covered"] -= 1
                state["uncov"] += a
            if hit:
                return True
        return False

    hit = dfs(ix.depot, 0, 0)
    route = None
    if hit and found[0] is not None:
        route = VehicleRoute(tuple(ix.arc_of(ai) for ai in found[0]))
    return OracleResult(hit, route, state["explored"])


def _floor_scaled(value: Fraction, scale: int) -> int:
    return math.floor(Fraction(value) * scale)


def _dijkstra(ix: _Indexed, alpha: List[int], source: int) -> List[int]:
    import heapq

    dist = [None] * len(ix.vertices)
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if dist[v] is not None:
            continue
        dist[v] = d
        for w, ei, _ in ix.adj[v]:
            if dist[w] is None:
                heapq.heappush(heap, (d + alpha[ei], w))
    return [d if d is not None else 0 for d in dist]


# ---------------------------------------------------------------------------
# step-count walk oracle (f/g instances)
# ---------------------------------------------------------------------------


def brute_force_fg_walk(fg: FgInstance, guard: int = 5_000_000) -> OracleResult:
    """Exhaustive search for a closed depot walk meeting per-arc traversal
    counts and cyclic per-occurrence step-gap bounds.

    EXACT mode: every arc of the symmetric orientation exactly f(e) times
    (walk length fixed at 2*sum(f)).  AT_MOST mode: between 1 and f(e)
    times per arc, any closing length.  Works on trees and graphs; on
    trees, untouched isomorphic sibling subtrees are deduplicated.
    """
    ix = _Indexed(fg.instance)
    m = ix.m
    if m == 0:
        return OracleResult(True, VehicleRoute(()), 0)
    f_edge = [fg.f[ix.edges[i].key] for i in range(m)]
    exact = fg.mode is FgMode.EXACT
    l_total = 2 * sum(f_edge)
    # gap bound rows per edge, occurrence 1..2f
    gb = [
        [0] + [fg.gap(ix.edges[i].key, y) for y in range(1, 2 * f_edge[i] + 1)]
        for i in range(m)
    ]
    is_tree = fg.instance.kind == "tree"
    fa = [f_edge[i // 2] for i in range(2 * m)]
    tails = ix.arc_tails()
    par = pedge = parc = None
    if is_tree:
        par, pedge, parc = ix.tree_parents()
        classes = _subtree_shape_classes(
            ix, lambda ei: (f_edge[ei], tuple(gb[ei]))
        )
        touched = [0] * len(ix.vertices)

    cnt_arc = [0] * (2 * m)
    cnt_edge = [0] * m
    first_pos = [0] * m
    last_pos = [0] * m
    stack_arcs: List[int] = []
    state = {"explored": 0, "covered": 0}

    def wrap_ok(e: int, l_final: int) -> bool:
        return (l_final - last_pos[e]) + (first_pos[e] - 1) <= gb[e][cnt_edge[e]]

    def dfs(v: int, pos: int) -> bool:
        state["explored"] += 1
        if state["explored"] > guard:
            raise GuardExceeded(f"walk search exceeded {guard} nodes")
        if v == ix.depot:
            if exact:
                if pos == l_total:
                    return all(wrap_ok(e, l_total) for e in range(m))
            elif state["covered"] == 2 * m:
                if all(wrap_ok(e, pos) for e in range(m)):
                    return True
        if exact and pos >= l_total:
            return False
        if not exact and pos >= l_total:
            return False
        # deadline pruning
        for e in range(m):
            ce = cnt_edge[e]
            if ce == 0:
                continue
            needs_more = (
                cnt_arc[2 * e] < f_edge[e] or cnt_arc[2 * e + 1] < f_edge[e]
            ) if exact else (cnt_arc[2 * e] == 0 or cnt_arc[2 * e + 1] == 0)
            overdue = pos + 1 > last_pos[e] + gb[e][ce] + 1
            if needs_more and overdue:
                return False
            if not needs_more and overdue:
                # edge is closed; wrap gap caps the final length
                cap = gb[e][ce] + last_pos[e] - first_pos[e] + 1
                if exact:
                    if l_total > cap:
                        return False
                elif pos >= cap:
                    return False
        if _stranded(ix, cnt_arc, fa, tails, v, require_all=exact):
            return False
        moves = []
        for w, ei, ai in ix.adj[v]:
            if cnt_arc[ai] >= f_edge[ei]:
                continue
            ce = cnt_edge[ei]
            if ce and (pos + 1) - last_pos[ei] - 1 > gb[ei][ce]:
                continue
            moves.append((cnt_arc[ai], ai, w, ei))
        moves.sort()
        seen_classes: Set[int] = set()
        for _, ai, w, ei in moves:
            if is_tree and par[w] == v and touched[w] == 0:
                if classes[w] in seen_classes:
                    continue
                seen_classes.add(classes[w])
            cnt_arc[ai] += 1
            if cnt_arc[ai] == 1:
                state["covered"] += 1
            ce = cnt_edge[ei]
            cnt_edge[ei] += 1
            old_first, old_last = first_pos[ei], last_pos[ei]
            if ce == 0:
                first_pos[ei] = pos + 1
            last_pos[ei] = pos + 1
            if is_tree:
                x = w if par[w] == v else v
                y = x
                while y != -1:
                    touched[y] += 1
                    y = par[y]
            stack_arcs.append(ai)
            hit = dfs(w, pos + 1)
            if hit:
                return True
            stack_arcs.pop()
            if is_tree:
                y = x
                while y != -1:
                    touched[y] -= 1
                    y = par[y]
            cnt_edge[ei] -= 1
            first_pos[ei], last_pos[ei] = old_first, old_last
            cnt_arc[ai] -= 1
            if cnt_arc[ai] == 0:
                state["covered"] -= 1

        return False

    hit = dfs(ix.depot, 0)
    route = None
    if hit:
        route = VehicleRoute(tuple(ix.arc_of(ai) for ai in stack_arcs))
    return OracleResult(hit, route, state["explored"])


def check_fg_walk(fg: FgInstance, walk: VehicleRoute) -> List[str]:
    """Standalone checker for f/g walks; returns human-readable defects.

    Written independently of both the DP and the search oracle so a
    witness can be audited by a third party.
    """
    problems: List[str] = []
    arcs = walk.arcs
    if not arcs:
        return ["empty walk"] if fg.instance.edges else []
    if arcs[0].tail != fg.instance.depot or arcs[-1].head != fg.instance.depot:
        problems.append("walk is not anchored at the depot")
    for i in range(len(arcs) - 1):
        if arcs[i].head != arcs[i + 1].tail:
            problems.append(f"broken at step {i + 1}")
    counts: Dict[Arc, int] = {}
    for a in arcs:
        counts[a] = counts.get(a, 0) + 1
    for e in fg.instance.edges:
        limit = fg.f[e.key]
        for arc in (Arc(e.u, e.v), Arc(e.v, e.u)):
            n = counts.get(arc, 0)
            if fg.mode is FgMode.EXACT and n != limit:
                problems.append(f"arc {arc}: {n} traversals, expected {limit}")
            if fg.mode is FgMode.AT_MOST and not 1 <= n <= limit:
                problems.append(f"arc {arc}: {n} traversals, allowed 1..{limit}")
    l = len(arcs)
    positions: Dict[EdgeKey, List[int]] = {}
    for i, a in enumerate(arcs, start=1):
        positions.setdefault(a.edge_key, []).append(i)
    for key, pos in positions.items():
        for y in range(1, len(pos)):
            gap = pos[y] - pos[y - 1] - 1
            if gap > fg.gap(key, y):
                problems.append(f"edge {key}: gap {gap} at occurrence {y}")
        wrap = (l - pos[-1]) + (pos[0] - 1)
        if wrap > fg.gap(key, len(pos)):
            problems.append(f"edge {key}: wrap gap {wrap}")
    return problems


# ---------------------------------------------------------------------------
# rooted-subgraph cover oracle (tree cutting / graph cutting)
# ---------------------------------------------------------------------------


def _root_connected_sets(instance: RoadInstance, root: str) -> Tuple[List[int], List[EdgeKey]]:
    """All edge subsets forming a connected subgraph containing ``root``.

    Returned as bitmasks over the sorted edge list (empty set included).
    Standard enumeration: grow by frontier edges, banning previously
    offered choices so each subset appears exactly once.
    """
    ix = _Indexed(instance)
    keys = [e.key for e in ix.edges]
    root_i = ix.vid[root]
    incident: List[List[int]] = [[] for _ in ix.vertices]
    endpoints: List[Tuple[int, int]] = []
    for i, e in enumerate(ix.edges):
        u, v = ix.vid[e.key[0]], ix.vid[e.key[1]]
        incident[u].append(i)
        incident[v].append(i)
        endpoints.append((u, v))
    out: List[int] = []

    def grow(mask: int, verts: int, banned: int) -> None:
        out.append(mask)
        frontier = []
        for v in _bits(verts):
            for ei in incident[v]:
                b = 1 << ei
                if not (mask & b) and not (banned & b):
                    frontier.append(ei)
        seen = set()
        new_ban = banned
        for ei in frontier:
            if ei in seen:
                continue
            seen.add(ei)
            u, v = endpoints[ei]
            grow(mask | (1 << ei), verts | (1 << u) | (1 << v), new_ban)
            new_ban |= 1 << ei

    grow(0, 1 << root_i, 0)
    return out, keys


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def brute_cut_size_vectors(instance: RoadInstance, root: str, k: int) -> Set[Tuple[int, ...]]:
    """All size vectors of k-tuples of root-connected subgraphs covering E.

    Direct enumeration over root-connected subsets; the k=3 case folds
    pair unions through a superset-closure table to stay polynomial in
    the number of subsets.
    """
    masks, keys = _root_connected_sets(instance, root)
    m = len(keys)
    full = (1 << m) - 1
    sizes = {mask: bin(mask).count("1") for mask in masks}
    if k == 1:
        return {(m,)} if full in sizes else set()
    if k == 2:
        out = set()
        for a in masks:
            sa = sizes[a]
            for b in masks:
                if a | b == full:
                    out.add((sa, sizes[b]))
        return out
    if k == 3:
        width = m + 1
        pair_bits: Dict[int, int] = {}
        for a in masks:
            sa = sizes[a] * width
            for b in masks:
                u = a | b
                pair_bits[u] = pair_bits.get(u, 0) | (1 << (sa + sizes[b]))
        # superset closure: closed[M] = union of pair_bits[U] over U >= M
        closed = [0] * (full + 1)
        for u, bits in pair_bits.items():
            closed[u] |= bits
        for bit in range(m):
            b = 1 << bit
            for mask in range(full + 1):
                if not mask & b:
                    closed[mask] |= closed[mask | b]
        out = set()
        for c in masks:
            bits = closed[full & ~c]
            sc = sizes[c]
            idx = 0
            while bits:
                if bits & 1:
                    out.add((idx // width, idx % width, sc))
                bits >>= 1
                idx += 1
        return out
    raise InputError(f"oracle supports k <= 3, got {k}")


def brute_force_cut(
    instance: RoadInstance,
    root: str,
    sizes: Sequence[int],
    mode: str = "exact",
    guard: int = 20_000_000,
) -> Optional[List[Set[EdgeKey]]]:
    """Exhaustively find k root-connected subgraphs of the given sizes
    covering all edges (parts may overlap).  ``mode`` is "exact" or
    "atmost".  Returns the parts as edge-key sets, or None.

    The last part is resolved through a superset-closure table (can any
    candidate cover a given remainder?), which keeps the search linear
    in 2^|E| instead of quadratic in the candidate pool.
    """
    k = len(sizes)
    if k < 1 or k > 3:
        raise InputError("brute_force_cut supports 1 <= k <= 3")
    if mode not in ("exact", "atmost"):
        raise InputError(f"unknown mode {mode!r}")
    masks, keys = _root_connected_sets(instance, root)
    m = len(keys)
    full = (1 << m) - 1
    by_size: Dict[int, List[int]] = {}
    for mask in masks:
        by_size.setdefault(bin(mask).count("1"), []).append(mask)

    def candidates(t: int) -> List[int]:
        if mode == "exact":
            return by_size.get(t, [])
        return [mk for s, lst in by_size.items() if s <= t for mk in lst]

    pools = [candidates(t) for t in sizes]
    if any(not pool for pool in pools):
        return None
    # coverable[M] == 1 iff some last-pool candidate is a superset of M
    coverable = bytearray(full + 1)
    for mask in pools[-1]:
        coverable[mask] = 1
    for bit in range(m):
        b = 1 << bit
        for mask in range(full + 1):
            if not mask & b and coverable[mask | b]:
                coverable[mask] = 1

    checked = 0

    def rec(i: int, acc: int, chosen: List[int]) -> Optional[List[int]]:
        nonlocal checked
        if i == k - 1:
            if not coverable[full & ~acc]:
                return None
            need = full & ~acc
            for mask in pools[i]:
                if mask & need == need:
                    return list(chosen) + [mask]
            raise AssertionError("closure table disagrees with the pool")
        for mask in pools[i]:
            checked += 1
            if checked > guard:
                raise GuardExceeded("cut search exceeded guard")
            chosen.append(mask)
            hit = rec(i + 1, acc | mask, chosen)
            if hit is not None:
                return hit
            chosen.pop()
        return None

    hit = rec(0, 0, [])
    if hit is None:
        return None
    return [{keys[b] for b in _bits(mask)} for mask in hit]


# ---------------------------------------------------------------------------
# rooted tree enumeration (non-isomorphic) and random corpora
# ---------------------------------------------------------------------------


def rooted_tree_parent_lists(n_vertices: int) -> Iterable[List[int]]:
    """All non-isomorphic rooted trees on ``n_vertices`` vertices.

    Yields parent lists (parent[0] == -1), via the Beyer-Hedetniemi
    level-sequence successor algorithm.
    """
    n = n_vertices
    if n <= 0:
        return
    if n == 1:
        yield [-1]
        return
    levels = list(range(n))
    while True:
        yield _parents_from_levels(levels)
        p = max((i for i in range(n) if levels[i] > 1), default=None)
        if p is None:
            return
        q = p - 1
        while levels[q] != levels[p] - 1:
            q -= 1
        for i in range(p, n):
            levels[i] = levels[i - (p - q)]


def _parents_from_levels(levels: List[int]) -> List[int]:
    parents = [-1] * len(levels)
    for i in range(1, len(levels)):
        for j in range(i - 1, -1, -1):
            if levels[j] == levels[i] - 1:
                parents[i] = j
                break
    return parents


def instance_from_parents(parents: List[int], alpha: int = 1) -> RoadInstance:
    names = [f"v{i}" for i in range(len(parents))]
    edges = [
        RoadEdge(names[parents[i]], names[i], Fraction(alpha))
        for i in range(1, len(parents))
    ]
    return RoadInstance("tree", names, edges, depot=names[0])


def random_tree_parents(rng: random.Random, n_vertices: int, max_degree: int) -> List[int]:
    if max_degree < 2 and n_vertices > 2:
        raise InputError("max_degree < 2 only admits a single edge")
    parents = [-1] * n_vertices
    degree = [0] * n_vertices
    for i in range(1, n_vertices):
        options = [j for j in range(i) if degree[j] < max_degree]
        j = rng.choice(options)
        parents[i] = j
        degree[j] += 1
        degree[i] += 1
    return parents


def random_fg_tree(
    rng: random.Random,
    max_edges: int = 8,
    max_degree: int = 3,
    max_f: int = 2,
    mode: FgMode = FgMode.EXACT,
) -> FgInstance:
    """Seeded random f/g instance for oracle cross-validation.

    Gap bounds are drawn from mixed tightness bands so the corpus holds
    both feasible and infeasible instances.
    """
    n = rng.randint(2, max_edges + 1)
    parents = random_tree_parents(rng, n, max_degree)
    inst = instance_from_parents(parents)
    f = {e.key: rng.randint(1, max_f) for e in inst.edges}
    return FgInstance(
        instance=inst, f=f, g=random_gap_rows(rng, inst, f), mode=mode
    )


def random_gap_rows(
    rng: random.Random, inst: RoadInstance, f: Mapping[EdgeKey, int]
) -> Dict[Tuple[EdgeKey, int], int]:
    """Per-occurrence gap bounds drawn from mixed tightness bands."""
    l = 2 * sum(f.values())
    g: Dict[Tuple[EdgeKey, int], int] = {}
    for e in inst.edges:
        for y in range(1, 2 * f[e.key] + 1):
            band = rng.random()
            if band < 0.30:
                g[(e.key, y)] = rng.randint(0, max(l // 3, 1))
            elif band < 0.70:
                g[(e.key, y)] = rng.randint(l // 3, 2 * l // 3)
            else:
                g[(e.key, y)] = rng.randint(2 * l // 3, l)
    return g


def random_width2_graph(
    rng: random.Random, max_edges: int = 8
) -> Tuple[RoadInstance, "object"]:
    """Random connected partial 2-tree plus a width-<=2 decomposition.

    Built by attaching each new vertex to either one existing vertex or
    both endpoints of an existing edge; both operations preserve
    treewidth <= 2 and the decomposition is recorded alongside.
    """
    from .twdp import TreeDecomposition

    names = ["v0", "v1"]
    edges = [("v0", "v1")]
    bags: Dict[str, Set[str]] = {"n0": {"v0", "v1"}}
    children: Dict[str, List[str]] = {"n0": []}
    node_of_edge: Dict[EdgeKey, str] = {edge_key("v0", "v1"): "n0"}
    target = rng.randint(3, max_edges)
    while len(edges) < target:
        vnew = f"v{len(names)}"
        if rng.random() < 0.55 and edges:
            u, w = rng.choice(edges)
            host = node_of_edge[edge_key(u, w)]
            bag = {vnew, u, w}
            new_edges = [(u, vnew), (w, vnew)]
            if len(edges) + 2 > max_edges:
                continue
        else:
            u = rng.choice(names)
            host = next(nid for nid, b in bags.items() if u in b)
            bag = {vnew, u}
            new_edges = [(u, vnew)]
        nid = f"n{len(bags)}"
        bags[nid] = bag
        children.setdefault(host, []).append(nid)
        children[nid] = []
        names.append(vnew)
        for a, b in new_edges:
            edges.append((a, b))
            node_of_edge[edge_key(a, b)] = nid
    inst = RoadInstance(
        "graph",
        names,
        [RoadEdge(a, b, Fraction(1)) for a, b in edges],
        depot="v0",
    )
    dec = TreeDecomposition(
        bags={k: frozenset(v) for k, v in bags.items()},
        children={k: tuple(v) for k, v in children.items()},
        root="n0",
    )
    return inst, dec


# ---------------------------------------------------------------------------
# 3-partition instances and generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThreePartitionInstance:
    """3n positive integers to split into n triples of equal sum S."""

    values: Tuple[int, ...]
    target: int

    @property
    def n(self) -> int:
        return len(self.values) // 3

    def validate(self, strict_window: bool = True) -> None:
        if len(self.values) % 3 != 0 or not self.values:
            raise InputError("need exactly 3n integers")
        if any(a <= 0 for a in self.values):
            raise InputError("values must be positive")
        if sum(self.values) != self.n * self.target:
            raise InputError(
                f"sum {sum(self.values)} != n*S = {self.n * self.target}"
            )
        if strict_window:
            for a in self.values:
                if not self.target / 4 < a < self.target / 2:
                    raise InputError(
                        f"value {a} outside (S/4, S/2) = "
                        f"({self.target}/4, {self.target}/2)"
                    )


def solve_3partition_brute(inst: ThreePartitionInstance) -> Optional[List[Tuple[int, int, int]]]:
    """Exact 3-partition by recursive triple assignment (n <= 4).

    Returns index triples into ``inst.values``, or None.
    """
    inst.validate(strict_window=False)
    if inst.n > 4:
        raise GuardExceeded("3-partition oracle limited to n <= 4")
    order = sorted(range(len(inst.values)), key=lambda i: -inst.values[i])
    vals = [inst.values[i] for i in order]
    used = [False] * len(vals)
    groups: List[Tuple[int, int, int]] = []

    def rec(remaining: int) -> bool:
        if remaining == 0:
            return True
        first = next(i for i in range(len(vals)) if not used[i])
        used[first] = True
        tried: Set[int] = set()
        for j in range(first + 1, len(vals)):
            if used[j] or vals[j] in tried:
                continue
            need = inst.target - vals[first] - vals[j]
            # values are in descending order, so the third element cannot
            # exceed vals[j]
            if need < 1 or need > vals[j]:
                continue
            tried.add(vals[j])
            used[j] = True
            for k in range(j + 1, len(vals)):
                if not used[k] and vals[k] == need:
                    used[k] = True
                    groups.append((order[first], order[j], order[k]))
                    if rec(remaining - 1):
                        return True
                    groups.pop()
                    used[k] = False
                    break
            used[j] = False
        used[first] = False
        return False

    if rec(inst.n):
        return groups
    return None


def _check_grouping(inst: ThreePartitionInstance, groups: Sequence[Tuple[int, int, int]]) -> None:
    flat = sorted(i for trip in groups for i in trip)
    if flat != list(range(3 * inst.n)):
        raise InputError("groups must partition the value indices into triples")
    for trip in groups:
        if sum(inst.values[i] for i in trip) != inst.target:
            raise InputError(f"group {trip} does not sum to {inst.target}")


def restricted_3partition_instances(max_n: int, max_s: int) -> List[ThreePartitionInstance]:
    """Every restricted instance (S/4 < a_i < S/2, sum = nS) in range."""
    out = []
    for n in range(1, max_n + 1):
        for s in range(1, max_s + 1):
            lo = s // 4 + 1
            hi = (s - 1) // 2 if s % 2 else s // 2 - 1
            if hi < lo:
                continue
            pool = list(range(lo, hi + 1))
            for combo in _multisets(pool, 3 * n):
                if sum(combo) == n * s:
                    out.append(ThreePartitionInstance(tuple(combo), s))
    return out


def _multisets(pool: List[int], size: int) -> Iterable[Tuple[int, ...]]:
    if size == 0:
        yield ()
        return
    for i, x in enumerate(pool):
        for rest in _multisets(pool[i:], size - 1):
            yield (x,) + rest


def gen_partition_star(weights: Sequence[int]) -> Tuple[RoadInstance, ServiceParams]:
    """Weighted star whose route feasibility encodes equal-sum partition.

    Center x, depot d pendant at alpha 1, one leaf per weight.  Two
    depot round trips are allowed (f = 2 on the depot edge) and the trip
    budget c*L = sum(weights) + 2 admits exactly half the leaf weight
    per trip, so a route exists iff the weights split into two equal
    halves.
    """
    if not weights or any(w <= 0 for w in weights):
        raise InputError("weights must be positive")
    total = sum(weights)
    verts = ["d", "x"] + [f"w{i}" for i in range(len(weights))]
    edges = [RoadEdge("d", "x", Fraction(1))] + [
        RoadEdge("x", f"w{i}", Fraction(w)) for i, w in enumerate(weights)
    ]
    inst = RoadInstance("tree", verts, edges, depot="d")
    f = uniform_frequency(inst, 1)
    f[Arc("d", "x")] = 2
    f[Arc("x", "d")] = 2
    params = ServiceParams(
        L=Fraction(2 * total + 4),
        c=Fraction(1, 2),
        t=PriorityLimits.constant(Fraction(1)),
        f=f,
        capacity_semantics=CapacitySemantics.TRAVERSED,
    )
    return inst, params


def _threep_fan_height(n: int) -> int:
    return max(1, math.ceil(math.log2(3 * n)))


def _threep_anchor_chain(addr: str) -> List[str]:
    """Vertex names from the gateway down to the anchor for a bit address."""
    return ["d2"] + ["f" + addr[: k + 1] for k in range(len(addr))]


def gen_3partition_tree(inst: ThreePartitionInstance) -> FgInstance:
    """Degree-3 f/g tree whose EXACT walk exists iff the restricted
    3-partition instance is solvable.

    Shape: depot d, a single gateway d2, a balanced binary fan of height
    h = ceil(log2(3n)) whose leaves anchor one descent path of B*a_i
    edges per value (B = 3h).  Fan edges are traversed once per anchor
    below them, so every anchor is toured separately.  The only binding
    gap bound sits on the d-d2 edge: the walk makes n excursions below
    the gateway, and each must fit within 2*B*(S+1) + 2 steps, which is
    one triple's three separate anchor tours (6h fan steps + 2*B*S path
    steps) plus nothing else.  The strict value window (S/4, S/2) makes
    any budget-respecting assignment of values to excursions a perfect
    3-partition, and conversely.
    """
    inst.validate(strict_window=True)
    n = inst.n
    h = _threep_fan_height(n)
    B = 3 * h
    s_prime = B * (inst.target + 1)
    addrs = [format(i, f"0{h}b") for i in range(3 * n)]

    vertices = ["d", "d2"]
    edges: List[RoadEdge] = [RoadEdge("d", "d2", Fraction(1))]
    f: Dict[EdgeKey, int] = {edge_key("d", "d2"): n}
    seen: Set[str] = set()
    for addr in addrs:
        chain = _threep_anchor_chain(addr)
        for parent, child in zip(chain, chain[1:]):
            if child in seen:
                continue
            seen.add(child)
            prefix = child[1:]
            vertices.append(child)
            edges.append(RoadEdge(parent, child, Fraction(1)))
            f[edge_key(parent, child)] = sum(
                1 for a in addrs if a.startswith(prefix)
            )
    for i, addr in enumerate(addrs):
        prev = _threep_anchor_chain(addr)[-1]
        for step in range(B * inst.values[i]):
            node = f"q{i}.{step}"
            vertices.append(node)
            edges.append(RoadEdge(prev, node, Fraction(1)))
            f[edge_key(prev, node)] = 1
            prev = node
    road = RoadInstance("tree", vertices, edges, depot="d")
    l = 2 * sum(f[e.key] for e in road.edges)
    g: Dict[Tuple[EdgeKey, int], int] = {
        (e.key, y): l for e in road.edges for y in range(1, 2 * f[e.key] + 1)
    }
    for y in range(1, 2 * n + 1):
        g[(edge_key("d", "d2"), y)] = 2 * s_prime + 2
    return FgInstance(instance=road, f=f, g=g, mode=FgMode.EXACT)


def threep_tree_walk(
    inst: ThreePartitionInstance, groups: Sequence[Tuple[int, int, int]]
) -> VehicleRoute:
    """The intended witness walk for ``gen_3partition_tree`` under a given
    index grouping: one excursion below the gateway per triple, each
    anchor toured separately (down the fan, down the path, and back)."""
    _check_grouping(inst, groups)
    h = _threep_fan_height(inst.n)
    B = 3 * h
    arcs: List[Arc] = []
    for group in groups:
        arcs.append(Arc("d", "d2"))
        for i in sorted(group):
            addr = format(i, f"0{h}b")
            down = _threep_anchor_chain(addr) + [
                f"q{i}.{s}" for s in range(B * inst.values[i])
            ]
            arcs.extend(Arc(down[t], down[t + 1]) for t in range(len(down) - 1))
            arcs.extend(
                Arc(down[t + 1], down[t]) for t in reversed(range(len(down) - 1))
            )
        arcs.append(Arc("d2", "d"))
    return VehicleRoute(tuple(arcs))


def gen_spider(inst: ThreePartitionInstance) -> FgInstance:
    """Spider whose EXACT walk exists iff the 3-partition is solvable.

    Depot at the center; one 2-visit pendant per group acting as a
    clock, and one once-traversed path of B*a_i edges per value.  The
    pendant gap bounds force the walk between a pendant's two visits to
    hold exactly one group's worth of path tours.  Degree at the center
    is 4n, deliberately outside any bounded-degree solver contract.
    """
    inst.validate(strict_window=True)
    n = inst.n
    B = n
    b = [B * a for a in inst.values]
    vertices = ["d"] + [f"u{j}" for j in range(n)]
    edges: List[RoadEdge] = [
        RoadEdge("d", f"u{j}", Fraction(1)) for j in range(n)
    ]
    f: Dict[EdgeKey, int] = {edge_key("d", f"u{j}"): 2 for j in range(n)}
    for i, bi in enumerate(b):
        prev = "d"
        for step in range(bi):
            node = f"p{i}.{step}"
            vertices.append(node)
            edges.append(RoadEdge(prev, node, Fraction(1)))
            f[edge_key(prev, node)] = 1
            prev = node
    road = RoadInstance("tree", vertices, edges, depot="d")
    l = 2 * (B * n * inst.target + 2 * n)
    window = 2 * B * inst.target
    g: Dict[Tuple[EdgeKey, int], int] = {}
    for e in road.edges:
        for y in range(1, 2 * f[e.key] + 1):
            g[(e.key, y)] = l
    for j in range(n):
        key = edge_key("d", f"u{j}")
        g[(key, 1)] = 0
        g[(key, 2)] = window
        g[(key, 3)] = 0
        g[(key, 4)] = l - 4 - window
    return FgInstance(instance=road, f=f, g=g, mode=FgMode.EXACT)


def spider_walk(
    inst: ThreePartitionInstance, groups: Sequence[Tuple[int, int, int]]
) -> VehicleRoute:
    """The intended witness walk for ``gen_spider``: per group, a pendant
    visit, the group's three path tours, and the closing pendant visit."""
    _check_grouping(inst, groups)
    B = inst.n
    arcs: List[Arc] = []
    for j, group in enumerate(groups):
        pendant = f"u{j}"
        arcs.extend([Arc("d", pendant), Arc(pendant, "d")])
        for i in sorted(group):
            down = ["d"] + [f"p{i}.{s}" for s in range(B * inst.values[i])]
            arcs.extend(Arc(down[t], down[t + 1]) for t in range(len(down) - 1))
            arcs.extend(
                Arc(down[t + 1], down[t]) for t in reversed(range(len(down) - 1))
            )
        arcs.extend([Arc("d", pendant), Arc(pendant, "d")])
    return VehicleRoute(tuple(arcs))


def fg_as_vehicle(fg: FgInstance) -> Tuple[RoadInstance, ServiceParams]:
    """Vehicle-route view of an f/g instance (AT_MOST semantics).

    On unit-length roads, steps equal lengths, so per-occurrence gap
    bounds translate into per-edge priority rows with factors g/L over
    L = 2*sum(f).  Capacity is disabled (c = 1) and frequency limits
    mirror f, so a valid vehicle route is exactly a walk traversing each
    arc between 1 and f(e) times within the cyclic step bounds.
    """
    if any(e.alpha != 1 for e in fg.instance.edges):
        raise InputError("translation requires unit-length roads")
    L = 2 * sum(fg.f[e.key] for e in fg.instance.edges)
    edges = sorted(fg.instance.edges, key=lambda e: e.key)
    relabeled = [
        RoadEdge(e.u, e.v, e.alpha, priority=i + 1) for i, e in enumerate(edges)
    ]
    def factor(bound: int) -> Fraction:
        # a zero step bound means "adjacent traversals"; factors must be
        # positive, and any bound below 1 pins an integer gap to 0
        return Fraction(bound, L) if bound >= 1 else Fraction(1, 2 * L)

    table = {
        i + 1: tuple(
            factor(fg.gap(e.key, y)) for y in range(1, 2 * fg.f[e.key] + 1)
        )
        for i, e in enumerate(edges)
    }
    inst = RoadInstance(
        fg.instance.kind,
        list(fg.instance.vertices),
        relabeled,
        depot=fg.instance.depot,
        z=len(edges),
    )
    freq = {}
    for e in edges:
        freq[Arc(e.u, e.v)] = fg.f[e.key]
        freq[Arc(e.v, e.u)] = fg.f[e.key]
    params = ServiceParams(
        L=Fraction(L),
        c=Fraction(1),
        t=PriorityLimits(table),
        f=freq,
        capacity_semantics=CapacitySemantics.TRAVERSED,
    )
    return inst, params


# ---------------------------------------------------------------------------
# Steiner cut reduction
# ---------------------------------------------------------------------------


def gen_steiner_cut_instance(
    graph: RoadInstance, terminals: Sequence[str], x: int
) -> Tuple[RoadInstance, str, int, int]:
    """Attach an |E|-edge path to every non-depot terminal; the resulting
    two-part cut instance (sizes t1, t2) is feasible iff the original
    graph has a connected subgraph of at most x edges containing all
    terminals.

    Returns (augmented graph, depot, t1, t2).
    """
    if len(terminals) < 2:
        raise InputError("need at least two terminals")
    if len(set(terminals)) != len(terminals):
        raise InputError("duplicate terminals")
    for t in terminals:
        if t not in graph.vertices:
            raise InputError(f"terminal {t!r} not in graph")
    depot = terminals[0]
    m = len(graph.edges)
    vertices = list(graph.vertices)
    edges = list(graph.edges)
    for t in terminals[1:]:
        prev = t
        for step in range(m):
            node = f"{t}.tail{step}"
            vertices.append(node)
            edges.append(RoadEdge(prev, node, Fraction(1)))
            prev = node
    aug = RoadInstance("graph", vertices, edges, depot=depot)
    t1 = (len(terminals) - 1) * m + x
    t2 = m
    return aug, depot, t1, t2


def brute_steiner_min_edges(graph: RoadInstance, terminals: Sequence[str]) -> Optional[int]:
    """Minimum edge count of a connected subgraph containing all terminals,
    by direct enumeration of connected subsets around the first terminal."""
    masks, keys = _root_connected_sets(graph, terminals[0])
    need = set(terminals)
    best: Optional[int] = None
    for mask in masks:
        verts = {terminals[0]}
        for b in _bits(mask):
            verts.add(keys[b][0])
            verts.add(keys[b][1])
        if need <= verts:
            size = bin(mask).count("1")
            if best is None or size < best:
                best = size
    return best
