"""Walk-existence decision parameterized by tree decomposition width.

A tree decomposition is first rewritten into canonical form (singleton
leaves, one-vertex introduce/forget steps, binary joins with equal
bags, root bag pinned to the depot).  The decision procedure then runs
one pass per candidate walk length l and fills the l positions of the
walk bottom-up: each edge of the network is placed at the unique
highest canonical node whose bag contains both endpoints, choosing the
positions and directions of all its traversals at once so its cyclic
step-gap row can be checked locally.

States record which positions are occupied, grouped into maximal runs
of consecutive positions.  Interior positions of a run are already
chained head-to-tail and never interact with later placements, so a
run is summarized by its span plus the two exposed vertices (the tail
of its first arc, the head of its last arc).  Forgetting a vertex
discards states that still expose it: once a vertex leaves the bag no
later edge can continue the walk there.  A join merges two children
over disjoint position sets, checking that abutting runs agree on the
junction vertex.  The walk exists iff the root holds the single run
spanning all positions with both ends at the depot.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .fgdp import FgInstance, FgMode
from .model import (
    EdgeKey,
    GuardExceeded,
    InputError,
    RoadInstance,
    edge_key,
)

__all__ = [
    "TreeDecomposition",
    "CanonicalNode",
    "CanonicalDecomposition",
    "verify_decomposition",
    "canonicalize",
    "tree_edge_decomposition",
    "decide_fg_walk_tw",
]


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted tree of bags; node ids are arbitrary strings."""

    bags: Mapping[str, FrozenSet[str]]
    children: Mapping[str, Tuple[str, ...]]
    root: str

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=1) - 1


def _decomposition_tree(dec: TreeDecomposition) -> List[str]:
    """Return nodes in preorder; raise InputError on malformed structure."""
    if dec.root not in dec.bags:
        raise InputError("decomposition root is not a node")
    order: List[str] = []
    seen: Set[str] = set()
    stack = [dec.root]
    while stack:
        u = stack.pop()
        if u in seen:
            raise InputError(f"decomposition node {u!r} reached twice")
        seen.add(u)
        order.append(u)
        for w in dec.children.get(u, ()):
            if w not in dec.bags:
                raise InputError(f"decomposition child {w!r} has no bag")
            stack.append(w)
    if len(seen) != len(dec.bags):
        raise InputError("decomposition has nodes unreachable from the root")
    return order


def verify_decomposition(instance: RoadInstance, dec: TreeDecomposition) -> bool:
    """Check the three tree-decomposition axioms against ``instance``.

    Structural damage (unknown node references, cycles, bags naming
    vertices outside the graph) raises InputError; a well-formed tree
    that fails vertex coverage, edge coverage, or per-vertex
    connectedness returns False.
    """
    order = _decomposition_tree(dec)
    vertex_set = set(instance.vertices)
    for u in order:
        for v in dec.bags[u]:
            if v not in vertex_set:
                raise InputError(f"bag {u!r} names unknown vertex {v!r}")
    covered = set()
    for u in order:
        covered |= dec.bags[u]
    if covered != vertex_set:
        return False
    for e in instance.edges:
        if not any({e.u, e.v} <= dec.bags[u] for u in order):
            return False
    # Each vertex must occupy a connected subtree: counting tree edges
    # inside every vertex's bag set detects fragmentation.
    for v in vertex_set:
        holding = [u for u in order if v in dec.bags[u]]
        internal = sum(
            1
            for u in holding
            for w in dec.children.get(u, ())
            if v in dec.bags[w]
        )
        if internal != len(holding) - 1:
            return False
    return True


@dataclass(frozen=True)
class CanonicalNode:
    """One step of a canonical decomposition.

    kind is "leaf" (singleton bag), "introduce" / "forget" (bag differs
    from the single child's by the named vertex), or "join" (two
    children with bags equal to this node's).
    """

    kind: str
    bag: FrozenSet[str]
    vertex: Optional[str]
    children: Tuple[int, ...]


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Canonical decomposition; children precede parents in ``nodes``."""

    nodes: Tuple[CanonicalNode, ...]
    root: int
    width: int

    def as_tree_decomposition(self) -> TreeDecomposition:
        return TreeDecomposition(
            bags={f"n{i}": nd.bag for i, nd in enumerate(self.nodes)},
            children={
                f"n{i}": tuple(f"n{c}" for c in nd.children)
                for i, nd in enumerate(self.nodes)
            },
            root=f"n{self.root}",
        )


def canonicalize(
    instance: RoadInstance,
    dec: TreeDecomposition,
    depot: Optional[str] = None,
) -> CanonicalDecomposition:
    """Rewrite ``dec`` into canonical form rooted at a bag holding the depot.

    The result keeps every original bag (as some node's bag), so the
    width is unchanged, and its node count is linear in the input size
    times the width.
    """
    home = instance.depot if depot is None else depot
    if home not in instance.vertices:
        raise InputError(f"unknown depot {home!r}")
    if not verify_decomposition(instance, dec):
        raise InputError("not a valid tree decomposition of the instance")

    adj: Dict[str, Set[str]] = {u: set() for u in dec.bags}
    for u in dec.bags:
        for w in dec.children.get(u, ()):
            adj[u].add(w)
            adj[w].add(u)
    bags: Dict[str, FrozenSet[str]] = {u: frozenset(dec.bags[u]) for u in dec.bags}
    # Splice out empty bags; their neighbors share no vertex through
    # them (connectedness), so re-wiring cannot break the axioms.
    for u in [u for u in bags if not bags[u]]:
        nb = sorted(adj[u])
        for w in nb:
            adj[w].discard(u)
        for w in nb[1:]:
            adj[nb[0]].add(w)
            adj[w].add(nb[0])
        del adj[u], bags[u]
    if not bags:
        raise InputError("decomposition has no non-empty bags")

    # Start from the depot-holding node nearest the input root; this
    # keeps re-canonicalization stable node-for-node.
    depth0: Dict[str, int] = {dec.root: 0}
    for u in _decomposition_tree(dec):
        for w in dec.children.get(u, ()):
            depth0[w] = depth0[u] + 1
    root0 = min(
        (u for u in bags if home in bags[u]),
        key=lambda u: (depth0.get(u, 0), u),
    )
    nodes: List[CanonicalNode] = []

    def emit(kind: str, bag: Iterable[str], vertex: Optional[str],
             children: Tuple[int, ...]) -> int:
        nodes.append(CanonicalNode(kind, frozenset(bag), vertex, children))
        return len(nodes) - 1

    def leaf_chain(bag: FrozenSet[str]) -> int:
        vs = sorted(bag)
        cur = {vs[0]}
        idx = emit("leaf", cur, vs[0], ())
        for v in vs[1:]:
            cur.add(v)
            idx = emit("introduce", cur, v, (idx,))
        return idx

    def morph(idx: int, frm: FrozenSet[str], to: FrozenSet[str]) -> int:
        cur = set(frm)
        for v in sorted(frm - to):
            cur.discard(v)
            idx = emit("forget", cur, v, (idx,))
        for v in sorted(to - frm):
            cur.add(v)
            idx = emit("introduce", cur, v, (idx,))
        return idx

    def build(u: str, parent: Optional[str]) -> int:
        kids = sorted(w for w in adj[u] if w != parent)
        if not kids:
            return leaf_chain(bags[u])
        tops = [morph(build(w, u), bags[w], bags[u]) for w in kids]
        cur = tops[0]
        for t in tops[1:]:
            cur = emit("join", bags[u], None, (cur, t))
        return cur

    top = build(root0, None)
    cur_bag = set(bags[root0])
    for v in sorted(cur_bag - {home}):
        cur_bag.discard(v)
        top = emit("forget", cur_bag, v, (top,))
    width = max(len(nd.bag) for nd in nodes) - 1
    return CanonicalDecomposition(nodes=tuple(nodes), root=top, width=width)


def tree_edge_decomposition(instance: RoadInstance) -> TreeDecomposition:
    """Width-1 decomposition of a tree: one bag per edge, rooted at the depot.

    Every depot-incident edge bag hangs under the first one so the
    depot's bags stay connected.
    """
    if instance.kind != "tree":
        raise InputError("edge decomposition requires a tree instance")
    if not instance.edges:
        return TreeDecomposition(
            bags={"n0": frozenset([instance.depot])},
            children={"n0": ()},
            root="n0",
        )
    name: Dict[EdgeKey, str] = {
        e.key: f"n{i}" for i, e in enumerate(instance.edges)
    }
    children: Dict[str, List[str]] = {n: [] for n in name.values()}
    root: Optional[str] = None
    stack = [(instance.depot, None)]
    while stack:
        v, via = stack.pop()
        for w, e in instance.neighbors(v):
            if via is not None and e.key == via:
                continue
            node = name[e.key]
            if v == instance.depot:
                if root is None:
                    root = node
                elif node != root:
                    children[root].append(node)
            else:
                children[name[via]].append(node)
            stack.append((w, e.key))
    return TreeDecomposition(
        bags={name[k]: frozenset(k) for k in name},
        children={n: tuple(c) for n, c in children.items()},
        root=root,
    )


# ---------------------------------------------------------------------------
# walk-existence DP
# ---------------------------------------------------------------------------

# A state is a tuple of runs sorted by start position.  Each run is
# (start, end, tail_id, head_id): positions start..end are occupied and
# internally chained; tail_id / head_id are the vertices exposed at the
# run's open ends.
Run = Tuple[int, int, int, int]
State = Tuple[Run, ...]


def _assign_edges(
    canon: CanonicalDecomposition, edge_keys: Sequence[EdgeKey]
) -> Dict[int, List[EdgeKey]]:
    """Map each edge to the highest canonical node holding both endpoints.

    The edge's traversals are placed right after that node's own
    transition, so everything below (including both sides of any join)
    is already pinned, which is what lets the exposure prunes bite.
    """
    nodes = canon.nodes
    depth = [0] * len(nodes)
    for i in range(canon.root, -1, -1):
        for c in nodes[i].children:
            depth[c] = depth[i] + 1
    at: Dict[int, List[EdgeKey]] = {}
    for key in edge_keys:
        u, v = key
        tops = [i for i, nd in enumerate(nodes) if u in nd.bag and v in nd.bag]
        if not tops:
            raise InputError(f"decomposition covers no bag with edge {key}")
        at.setdefault(min(tops, key=lambda n: depth[n]), []).append(key)
    for lst in at.values():
        lst.sort()
    return at


def _place(runs: State, x: int, tail: int, head: int, l: int,
           depot: int) -> Optional[State]:
    """Occupy position x with an arc tail->head; None when incompatible."""
    if x == 1 and tail != depot:
        return None
    if x == l and head != depot:
        return None
    left = right = None
    li = ri = -1
    for i, r in enumerate(runs):
        if r[1] == x - 1:
            left, li = r, i
        elif r[0] == x + 1:
            right, ri = r, i
    if left is not None and left[3] != tail:
        return None
    if right is not None and right[2] != head:
        return None
    s, t = (left[0], left[2]) if left is not None else (x, tail)
    e, h = (right[1], right[3]) if right is not None else (x, head)
    out = [r for i, r in enumerate(runs) if i != li and i != ri]
    out.append((s, e, t, h))
    out.sort()
    return tuple(out)


def _mask(runs: State) -> int:
    m = 0
    for s, e, _, _ in runs:
        m |= ((1 << (e - s + 1)) - 1) << s
    return m


def _bridge_edges(vertices: Iterable[str],
                  keys: Iterable[EdgeKey]) -> FrozenSet[EdgeKey]:
    """Bridges of the undirected simple graph, by lowlink search."""
    adj: Dict[str, List[Tuple[str, EdgeKey]]] = {v: [] for v in vertices}
    for key in keys:
        u, v = key
        adj[u].append((v, key))
        adj[v].append((u, key))
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    out: Set[EdgeKey] = set()
    counter = count()

    def visit(root: str) -> None:
        stack = [(root, None, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        while stack:
            v, in_key, it = stack[-1]
            for w, key in it:
                if key == in_key:
                    continue
                if w in index:
                    low[v] = min(low[v], index[w])
                    continue
                index[w] = low[w] = next(counter)
                stack.append((w, key, iter(adj[w])))
                break
            else:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[v])
                    if low[v] > index[p]:
                        out.add(in_key)

    for v in adj:
        if v not in index:
            visit(v)
    return frozenset(out)


class _Dp:
    def __init__(self, fg: FgInstance, canon: CanonicalDecomposition,
                 guard: Optional[int]) -> None:
        inst = fg.instance
        self.fg = fg
        self.canon = canon
        self.guard = guard
        self.steps = 0
        self.vid = {v: i for i, v in enumerate(inst.vertices)}
        self.depot = self.vid[inst.depot]
        self.keys = sorted(e.key for e in inst.edges)
        self.intro_at = _assign_edges(canon, self.keys)
        # Tightest gap rows first: their narrow windows pin positions
        # early and cut the branching of looser edges at the same node.
        # A single near-zero row forces adjacency, so the minimum row
        # outranks the overall sum.
        def tightness(k: EdgeKey) -> Tuple[int, int, EdgeKey]:
            rows = [fg.gap(k, y) for y in range(1, 2 * fg.f[k] + 1)]
            return (min(rows), sum(rows), k)

        for lst in self.intro_at.values():
            lst.sort(key=tightness)
        self.keys_by_tightness = sorted(self.keys, key=tightness)
        delta = inst.max_degree()
        self.k = canon.width + 1
        self.f_max = max(fg.f.values())
        self.delta = max(delta, 1)
        self.degree = {v: 0 for v in inst.vertices}
        for u, v in self.keys:
            self.degree[u] += 1
            self.degree[v] += 1
        self.bridges = _bridge_edges(inst.vertices, self.keys)
        # Incidence tallies of edges placed at or below each node: a
        # hole boundary exposing a vertex with no incidences left
        # outside the subtree can never be continued.
        below: List[Dict[EdgeKey, bool]] = [dict() for _ in canon.nodes]
        for i, nd in enumerate(canon.nodes):
            own = {k: True for k in self.intro_at.get(i, ())}
            for c in nd.children:
                own.update(below[c])
            below[i] = own
        self.total_inc = [0] * len(self.vid)
        for u, v in self.keys:
            self.total_inc[self.vid[u]] += 1
            self.total_inc[self.vid[v]] += 1
        self.outside_inc: List[List[int]] = []
        for i in range(len(canon.nodes)):
            inc = [0] * len(self.vid)
            for key in self.keys:
                if key not in below[i]:
                    inc[self.vid[key[0]]] += 1
                    inc[self.vid[key[1]]] += 1
            self.outside_inc.append(inc)
        self.outside_count = [
            len(self.keys) - len(below[i]) for i in range(len(canon.nodes))
        ]
        self.outside_fsum = [
            sum(fg.f[k] for k in self.keys if k not in below[i])
            for i in range(len(canon.nodes))
        ]
        self.outside_keys = [
            tuple(k for k in self.keys if k not in below[i])
            for i in range(len(canon.nodes))
        ]
        self._dist_cache: Dict[Tuple[EdgeKey, ...], List[List[List[int]]]] = {}

    def _distances(self, rest: Tuple[EdgeKey, ...]) -> List[List[List[int]]]:
        """Parity-split hole-filling distances over the remaining edges.

        ``dist[p][a][b]`` is the shortest a-to-b walk length of parity p
        using only edges still to be placed; a hole of width w between
        exposed vertices can only be filled when dist[w % 2][a][b] <= w.
        """
        key = tuple(sorted(rest))
        hit = self._dist_cache.get(key)
        if hit is not None:
            return hit
        n = len(self.vid)
        adj: List[List[int]] = [[] for _ in range(n)]
        for u, v in key:
            a, b = self.vid[u], self.vid[v]
            adj[a].append(b)
            adj[b].append(a)
        inf = 1 << 30
        dist = [[[inf] * n for _ in range(n)], [[inf] * n for _ in range(n)]]
        for s in range(n):
            dist[0][s][s] = 0
            frontier = [(s, 0)]
            while frontier:
                nxt = []
                for v, p in frontier:
                    d = dist[p][s][v] + 1
                    q = 1 - p
                    for w in adj[v]:
                        if d < dist[q][s][w]:
                            dist[q][s][w] = d
                            nxt.append((w, q))
                frontier = nxt
        self._dist_cache[key] = dist
        return dist

    def _tick(self, n: int = 1) -> None:
        self.steps += n
        if self.guard is not None and self.steps > self.guard:
            raise GuardExceeded(f"treewidth walk DP exceeded {self.guard} steps")

    def _viable(self, runs: State, l: int, inc: List[int],
                min_rest: int, max_rest: int,
                dist: List[List[List[int]]]) -> bool:
        used = sum(e - s + 1 for s, e, _, _ in runs)
        free = l - used
        if min_rest > free or used + max_rest < l:
            return False
        if len(runs) - 1 > free:
            return False
        for s, e, t, h in runs:
            if s > 1 and inc[t] == 0:
                return False
            if e < l and inc[h] == 0:
                return False
        if not runs:
            return True
        # every hole must admit an exact-width chained filling
        first = runs[0]
        if first[0] > 1:
            w = first[0] - 1
            if dist[w & 1][self.depot][first[2]] > w:
                return False
        last = runs[-1]
        if last[1] < l:
            w = l - last[1]
            if dist[w & 1][last[3]][self.depot] > w:
                return False
        for i in range(len(runs) - 1):
            w = runs[i + 1][0] - runs[i][1] - 1
            if dist[w & 1][runs[i][3]][runs[i + 1][2]] > w:
                return False
        return True

    def _count_options(self, key: EdgeKey, l: int) -> List[Tuple[int, int]]:
        """Direction-count pairs whose cyclic gap budget can span length l.

        T traversals of one edge split the cyclic walk into T gaps, so
        l <= T + sum of the first T gap rows is necessary for any
        placement to exist.  A bridge is crossed in strictly alternating
        directions, forcing equal counts; when one endpoint has no other
        incidences, crossings pair up back-to-back, so only every other
        gap row is usable.
        """
        fg = self.fg
        fe = fg.f[key]
        rows = [fg.gap(key, y) for y in range(1, 2 * fe + 1)]
        bridge = key in self.bridges
        bounce = self.degree[key[0]] == 1 or self.degree[key[1]] == 1
        if fg.mode is FgMode.EXACT:
            opts = [(fe, fe)]
        else:
            opts = [(j1, j2) for j1 in range(1, fe + 1)
                    for j2 in range(1, fe + 1)
                    if not (bridge and j1 != j2)]
        at_depot = self.depot in (self.vid[key[0]], self.vid[key[1]])
        out = []
        for j1, j2 in opts:
            total = j1 + j2
            if bounce:
                # zeroing the odd gaps instead pins the first crossing to
                # position 1 and the last to position l, a depot-only move
                room = sum(rows[1:total:2])
                if at_depot:
                    room = max(room, sum(rows[0:total:2]))
            else:
                room = sum(rows[:total])
            if l <= total + room:
                out.append((j1, j2))
        return out

    def _extend_edge(self, states: Iterable[State], key: EdgeKey, l: int,
                     inc: List[int], min_rest: int, max_rest: int,
                     dist: List[List[List[int]]],
                     stop_first: bool = False) -> Set[State]:
        fg = self.fg
        fe = fg.f[key]
        a, b = self.vid[key[0]], self.vid[key[1]]
        count_opts = self._count_options(key, l)
        rows = [fg.gap(key, y) for y in range(1, 2 * fe + 1)]
        out: Set[State] = set()
        depot = self.depot

        for st in states:
            base_mask = _mask(st)
            base_used = sum(e - s + 1 for s, e, _, _ in st)
            for j1, j2 in count_opts:
                total = j1 + j2
                # Global fill budget once this edge contributes `total`
                # positions and the remaining edges at least/at most
                # min_rest/max_rest.
                if base_used + total + min_rest > l:
                    continue
                if base_used + total + max_rest < l:
                    continue
                wrap_row = rows[total - 1]

                def rec(occ: int, prev: int, first: int, r1: int, r2: int,
                        runs: State, mask: int) -> None:
                    if stop_first and out:
                        return
                    self._tick()
                    if occ == total:
                        if (l - prev) + (first - 1) <= wrap_row and \
                                self._viable(runs, l, inc,
                                             min_rest, max_rest, dist):
                            out.add(runs)
                        return
                    if len(runs) - 1 > l - base_used - occ:
                        return
                    if occ == 0:
                        lo, hi = 1, min(l - total + 1, wrap_row + 1)
                    else:
                        lo = prev + 1
                        hi = min(l - (total - occ - 1), prev + rows[occ - 1] + 1)
                        if occ == total - 1:
                            # wrap budget already spent on the front gap
                            lo = max(lo, l - wrap_row + first - 1)
                        # If the run ending at prev exposes a vertex no
                        # later edge touches, only this edge can close
                        # it, and only at the very next position.
                        for r in runs:
                            if r[1] == prev:
                                if prev < l and inc[r[3]] == 0:
                                    hi = min(hi, prev + 1)
                                break
                    for x in range(lo, hi + 1):
                        if mask >> x & 1:
                            continue
                        for tail, head, n1, n2 in (
                            (a, b, r1 - 1, r2),
                            (b, a, r1, r2 - 1),
                        ):
                            if (n1 < 0) or (n2 < 0):
                                continue
                            nxt = _place(runs, x, tail, head, l, depot)
                            if nxt is None:
                                continue
                            # Positions are placed in ascending order, so
                            # a still-free slot left of x can only be
                            # filled by later edges; its junction vertex
                            # must keep an incidence.
                            if x > 1 and not (mask >> (x - 1) & 1) \
                                    and inc[tail] == 0:
                                continue
                            rec(occ + 1, x, first or x, n1, n2,
                                nxt, mask | 1 << x)

                rec(0, 0, 0, j1, j2, st, base_mask)
        return out

    def run(self, l: int) -> bool:
        fg = self.fg
        canon = self.canon
        min_tot = max_tot = 0
        for key in self.keys:
            opts = self._count_options(key, l)
            if not opts:
                return False
            totals = [j1 + j2 for j1, j2 in opts]
            min_tot += min(totals)
            max_tot += max(totals)
        if not min_tot <= l <= max_tot:
            return False
        exact = fg.mode is FgMode.EXACT
        # every edge must place on its own before anything else is tried;
        # tight rows plus the depot pins at positions 1 and l often rule
        # a length out edge-locally
        for key in self.keys_by_tightness:
            rest = tuple(k for k in self.keys if k != key)
            inc_o = list(self.total_inc)
            inc_o[self.vid[key[0]]] -= 1
            inc_o[self.vid[key[1]]] -= 1
            fsum_o = sum(fg.f[k] for k in rest)
            min_o = 2 * fsum_o if exact else 2 * len(rest)
            max_o = 2 * fsum_o
            dist_o = self._distances(rest)
            if not self._extend_edge(
                {()}, key, l, inc_o, min_o, max_o, dist_o, stop_first=True
            ):
                return False
        bound = (2 * self.k * l * self.delta) ** (
            2 * self.f_max * self.k * self.delta
        )
        states_at: List[Optional[Set[State]]] = [None] * len(canon.nodes)
        for i, nd in enumerate(canon.nodes):
            inc = self.outside_inc[i]
            min_rest = (
                self.outside_fsum[i] * 2 if exact else self.outside_count[i] * 2
            )
            max_rest = self.outside_fsum[i] * 2
            edges = self.intro_at.get(i, ())
            if nd.kind == "leaf":
                states: Set[State] = {()}
            elif nd.kind == "forget":
                v = self.vid[nd.vertex]
                states = {
                    st
                    for st in states_at[nd.children[0]]
                    if all(
                        (t != v or s == 1) and (h != v or e == l)
                        for s, e, t, h in st
                    )
                }
            elif nd.kind == "introduce":
                states = states_at[nd.children[0]]
            else:  # join
                # This node's own edges are still unplaced here, so they
                # count as remaining alongside everything outside.
                inc_n = list(inc)
                for u, w in edges:
                    inc_n[self.vid[u]] += 1
                    inc_n[self.vid[w]] += 1
                fsum_n = sum(fg.f[k] for k in edges)
                min_n = min_rest + (2 * fsum_n if exact else 2 * len(edges))
                max_n = max_rest + 2 * fsum_n
                dist_n = self._distances(tuple(edges) + self.outside_keys[i])
                states = {
                    st
                    for st in self._join(
                        states_at[nd.children[0]], states_at[nd.children[1]], l
                    )
                    if self._viable(st, l, inc_n, min_n, max_n, dist_n)
                }
            for j, key in enumerate(edges):
                # Remaining-placement tallies once this edge is in: the
                # node's outside plus edges placed after it here.
                later = edges[j + 1:]
                inc_j = list(inc)
                for u, w in later:
                    inc_j[self.vid[u]] += 1
                    inc_j[self.vid[w]] += 1
                fsum = sum(fg.f[k] for k in later)
                min_j = min_rest + (2 * fsum if exact else 2 * len(later))
                max_j = max_rest + 2 * fsum
                dist_j = self._distances(tuple(later) + self.outside_keys[i])
                states = self._extend_edge(
                    states, key, l, inc_j, min_j, max_j, dist_j
                )
            assert len(states) <= bound
            if not states:
                # states only flow upward, so the root is empty too
                return False
            for c in nd.children:
                states_at[c] = None
            states_at[i] = states
        goal: State = ((1, l, self.depot, self.depot),)
        return goal in states_at[canon.root]

    def _join(self, s1: Set[State], s2: Set[State], l: int) -> Set[State]:
        if len(s1) > len(s2):
            s1, s2 = s2, s1
        m2 = [(st, _mask(st)) for st in s2]
        out: Set[State] = set()
        for st1 in s1:
            k1 = _mask(st1)
            for st2, k2 in m2:
                self._tick()
                if k1 & k2:
                    continue
                merged = self._coalesce(st1, st2)
                if merged is not None:
                    out.add(merged)
        return out

    @staticmethod
    def _coalesce(st1: State, st2: State) -> Optional[State]:
        runs = sorted(st1 + st2)
        out: List[Run] = []
        for r in runs:
            if out and out[-1][1] + 1 == r[0]:
                # Abutting runs from the two sides must agree on the
                # junction vertex, then fuse into one chained run.
                if out[-1][3] != r[2]:
                    return None
                out[-1] = (out[-1][0], r[1], out[-1][2], r[3])
            else:
                out.append(r)
        return tuple(out)


def decide_fg_walk_tw(
    fg: FgInstance,
    dec: Union[TreeDecomposition, CanonicalDecomposition],
    guard: Optional[int] = None,
) -> bool:
    """Decide whether a closed depot walk satisfies ``fg`` on a graph.

    ``dec`` may be a plain tree decomposition (canonicalized here) or a
    prebuilt canonical one.  EXACT mode fixes the walk length at
    2*sum(f); AT_MOST tries every length from one round trip per edge
    upward.  Decision only: no witness walk is produced.
    """
    if isinstance(dec, CanonicalDecomposition):
        canon = dec
    else:
        canon = canonicalize(fg.instance, dec, fg.instance.depot)
    if not fg.instance.edges:
        return True
    dp = _Dp(fg, canon, guard)
    total = 2 * sum(fg.f[e.key] for e in fg.instance.edges)
    if fg.mode is FgMode.EXACT:
        lengths: Iterable[int] = (total,)
    else:
        lengths = range(2 * len(fg.instance.edges), total + 1)
    return any(dp.run(l) for l in lengths)
