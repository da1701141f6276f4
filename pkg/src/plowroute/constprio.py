"""Route decisions on unit-weight trees with one constant recurrence factor.

With the factor at or above one, recurrence gaps can never bind (every
cyclic gap is shorter than the route itself), so feasibility reduces to
covering each depot branch by trips through its top edge within the trip
and length budgets.  That cover question is solved exactly by a small
branch-and-bound per branch; branches only interact through the summed
length, so per-branch minima are enough.

With the factor below one the same cover argument applies to routes no
longer than factor*L, and everything beyond that is settled by an
iterative-deepening search over exact route lengths with recurrence
deadlines.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .model import (
    Arc,
    CapacitySemantics,
    EdgeKey,
    InputError,
    RoadInstance,
    ServiceParams,
    VehicleRoute,
    edge_key,
)
from .trees import RootedTree


class CaseTag(str, Enum):
    """Parameter regime for a constant recurrence factor ``t``.

    CASE1: t >= 1 and full capacity (c = 1).
    CASE2: t >= 1 and split capacity (c < 1).
    CASE3: t < 1, capacity at or above the factor (t <= c).
    CASE4: t < 1, capacity below the factor (c < t).
    """

    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CASE4 = "case4"


def classify_case(t: Fraction, c: Fraction) -> CaseTag:
    if t <= 0:
        raise InputError("recurrence factor must be positive")
    if not 0 < c <= 1:
        raise InputError("c must lie in (0, 1]")
    if t >= 1:
        return CaseTag.CASE1 if c == 1 else CaseTag.CASE2
    return CaseTag.CASE3 if t <= c else CaseTag.CASE4


def dfs_route(tree: RootedTree) -> VehicleRoute:
    """Closed depth-first tour from the root, children in stored order.

    Traverses every edge exactly once in each direction, so its length
    is twice the edge count.
    """
    walk: List[str] = [tree.root]

    def visit(v: str) -> None:
        for w in tree.children[v]:
            walk.append(w)
            visit(w)
            walk.append(v)

    visit(tree.root)
    return VehicleRoute.from_vertices(walk)


# ---------------------------------------------------------------------------
# trip covers (exact whenever gaps cannot bind)
# ---------------------------------------------------------------------------


def _edge_mult_cap(params: ServiceParams, u: str, v: str) -> int:
    # a trip through an edge uses one traversal in each direction
    return min(params.frequency(Arc(u, v)), params.frequency(Arc(v, u)))


def _charge_order(
    parts: Sequence[Set[EdgeKey]], charge_cap: int
) -> Optional[List[int]]:
    """Order the parts so each services at most ``charge_cap`` new edges.

    Greedy is complete here: once a part fits, emitting it only shrinks
    what later parts still have to service.
    """
    emitted: Set[EdgeKey] = set()
    order: List[int] = []
    left = list(range(len(parts)))
    while left:
        pick = next(
            (i for i in left if len(parts[i] - emitted) <= charge_cap), None
        )
        if pick is None:
            return None
        emitted |= parts[pick]
        order.append(pick)
        left.remove(pick)
    return order


def _branch_min_cover(
    tree: RootedTree,
    params: ServiceParams,
    child: str,
    part_cap: Optional[int],
    charge_cap: Optional[int],
    total_cap: int,
) -> Optional[List[Set[EdgeKey]]]:
    """Cheapest cover of one depot branch by trips through its top edge.

    Every trip below the depot follows the branch's top edge down and
    back up, so a cover is a multiset of subtrees all containing that
    edge.  Returns the parts in emission order, or None when no cover
    fits the caps.
    """
    depot = tree.root
    top = edge_key(depot, child)
    below: List[Tuple[str, str]] = []

    def collect(v: str) -> None:
        for w in tree.children[v]:
            below.append((v, w))
            collect(w)

    collect(child)
    if part_cap is not None and part_cap < 1:
        return None
    cap_top = _edge_mult_cap(params, depot, child)
    # one extra top-only part can soak up the top edge's service charge
    r_need = len(below) + (1 if charge_cap is not None else 0)
    r_hi = max(1, min(cap_top, r_need, total_cap))
    best: Optional[Tuple[int, List[Set[EdgeKey]]]] = None

    for r in range(1, r_hi + 1):
        if best is not None and r + len(below) >= best[0]:
            break
        if part_cap is not None and below and r * (part_cap - 1) < len(below):
            continue
        parts: List[Set[EdgeKey]] = [set() for _ in range(r)]

        def assign(i: int, total: int) -> None:
            nonlocal best
            if best is not None and total + (len(below) - i) >= best[0]:
                return
            if total + (len(below) - i) > total_cap:
                return
            if i == len(below):
                full = [{top} | p for p in parts]
                if charge_cap is not None:
                    order = _charge_order(full, charge_cap)
                    if order is None:
                        return
                    full = [full[j] for j in order]
                best = (total, [set(p) for p in full])
                return
            u, w = below[i]
            key = edge_key(u, w)
            ok = [
                j
                for j in range(r)
                if u == child or edge_key(tree.parent[u], u) in parts[j]
            ]
            mult = _edge_mult_cap(params, u, w)
            seen_choices: Set[Tuple[Tuple[EdgeKey, ...], ...]] = set()
            for mask in range(1, 1 << len(ok)):
                chosen = [ok[b] for b in range(len(ok)) if (mask >> b) & 1]
                if len(chosen) > mult:
                    continue
                if part_cap is not None and any(
                    len(parts[j]) + 1 > part_cap - 1 for j in chosen
                ):
                    continue
                # parts with equal current contents are interchangeable
                sig = tuple(sorted(tuple(sorted(parts[j])) for j in chosen))
                if sig in seen_choices:
                    continue
                seen_choices.add(sig)
                for j in chosen:
                    parts[j].add(key)
                assign(i + 1, total + len(chosen))
                for j in chosen:
                    parts[j].remove(key)

        assign(0, r)
    return None if best is None else best[1]


def _part_tour(tree: RootedTree, part: Set[EdgeKey]) -> List[str]:
    walk = [tree.root]

    def visit(v: str) -> None:
        for w in tree.children[v]:
            if edge_key(v, w) in part:
                walk.append(w)
                visit(w)
                walk.append(v)

    visit(tree.root)
    return walk


def _cover_route(
    tree: RootedTree, params: ServiceParams, length_budget: Fraction
) -> Optional[VehicleRoute]:
    cap = params.c * params.L
    if params.capacity_semantics is CapacitySemantics.TRAVERSED:
        part_cap: Optional[int] = math.floor(cap / 2)
        charge_cap: Optional[int] = None
    else:
        part_cap = None
        charge_cap = math.floor(cap)
    total_cap = math.floor(length_budget / 2)
    walk = [tree.root]
    total = 0
    for child in tree.children[tree.root]:
        parts = _branch_min_cover(
            tree, params, child, part_cap, charge_cap, total_cap - total
        )
        if parts is None:
            return None
        total += sum(len(p) for p in parts)
        if total > total_cap:
            return None
        for part in parts:
            walk.extend(_part_tour(tree, part)[1:])
    return VehicleRoute.from_vertices(walk)


# ---------------------------------------------------------------------------
# exhaustive fallback for factors below one
# ---------------------------------------------------------------------------


def _shape_canon(tree: RootedTree) -> Dict[str, str]:
    canon: Dict[str, str] = {}
    for v in tree.postorder():
        canon[v] = "(" + "".join(sorted(canon[w] for w in tree.children[v])) + ")"
    return canon


def _beeline_blocked(tree: RootedTree, g: int) -> bool:
    """True when some edge's subtree is too deep to revisit in time.

    Reaching the deepest edge below e keeps the walk strictly below e
    for twice the remaining drop, and that stretch is one recurrence gap
    of e.
    """
    deepest: Dict[str, int] = {}
    for v in tree.postorder():
        deepest[v] = max(
            (deepest[w] for w in tree.children[v]), default=tree.depth[v]
        )
    return any(
        2 * (deepest[v] - tree.depth[v]) > g
        for v in tree.instance.vertices
        if tree.parent[v] is not None
    )


def _min_traversals(l: int, g: int, leaf: bool) -> int:
    """Fewest traversals of one edge compatible with its gap bound.

    A leaf edge alternates down/up in adjacent positions, so its visits
    pair up: v visits leave v recurrence gaps summing to l - 2v.  An
    internal edge only guarantees one position per traversal.
    """
    if leaf:
        return 2 * -(-l // (g + 2))
    j = -(-l // (g + 1))
    return j + (j & 1)


def _search_route(
    tree: RootedTree, params: ServiceParams
) -> Optional[VehicleRoute]:
    """Exact-length iterative deepening with recurrence deadlines.

    Positions are whole numbers (unit edges).  An edge already seen at
    position x must either recur by x + g + 1 or satisfy the wrap gap
    once the route closes; both are enforced during the walk.
    """
    inst = tree.instance
    depot = tree.root
    m = len(inst.edges)
    tval = params.t.constant_value()
    assert tval is not None
    g = math.floor(tval * params.L)
    l_hi = math.floor(params.L)
    cap_int = math.floor(params.c * params.L)
    serviced = params.capacity_semantics is CapacitySemantics.SERVICED
    freq = {arc: params.frequency(arc) for arc in inst.symmetric_arcs()}
    nbrs = {v: sorted(w for w, _ in inst.neighbors(v)) for v in inst.vertices}
    depth = tree.depth
    shape = _shape_canon(tree)
    keys = [e.key for e in inst.edges]
    kidx = {k: i for i, k in enumerate(keys)}

    if _beeline_blocked(tree, g):
        return None
    is_leaf = [not tree.children[k[1] if tree.parent[k[1]] == k[0] else k[0]]
               for k in keys]

    cnt: Dict[Arc, int] = {arc: 0 for arc in freq}
    first = [0] * m
    last = [0] * m
    times = [0] * m
    touched = {v: 0 for v in inst.vertices}
    path: List[Arc] = []
    jmin = [0] * m

    def wrap_ok(i: int, l: int) -> bool:
        return (l - last[i]) + (first[i] - 1) <= g

    def dfs(p: int, v: str, load: int, uncovered: int, l: int) -> bool:
        if p > l:
            return uncovered == 0 and all(wrap_ok(i, l) for i in range(m))
        remaining = l - p + 1
        if remaining < depth[v] or (remaining - depth[v]) % 2 != 0:
            return False
        if sum(max(0, jmin[i] - times[i]) for i in range(m)) > remaining:
            return False
        urgent: Dict[int, int] = {}
        for i in range(m):
            if times[i] and not wrap_ok(i, l):
                deadline = last[i] + g + 1
                if deadline < p:
                    return False
                urgent[i] = deadline
        cands: List[Tuple[int, int, str]] = []
        seen_shapes: Set[str] = set()
        for w in nbrs[v]:
            key = edge_key(v, w)
            i = kidx[key]
            arc = Arc(v, w)
            if cnt[arc] >= freq[arc]:
                continue
            if times[i] and p - last[i] - 1 > g:
                continue
            if tree.parent.get(w) == v and touched[w] == 0:
                if shape[w] in seen_shapes:
                    continue
                seen_shapes.add(shape[w])
            new_load = load + (1 if not serviced or times[i] == 0 else 0)
            if new_load > cap_int:
                continue
            cands.append((0 if times[i] == 0 else 1, urgent.get(i, l + g), w))
        for _, _, w in sorted(cands):
            key = edge_key(v, w)
            i = kidx[key]
            arc = Arc(v, w)
            was_first = times[i] == 0
            cnt[arc] += 1
            times[i] += 1
            prev_last = last[i]
            last[i] = p
            if was_first:
                first[i] = p
            x = w
            while x != depot:
                touched[x] += 1
                x = tree.parent[x]  # type: ignore[assignment]
            x = v
            while x != depot:
                touched[x] += 1
                x = tree.parent[x]  # type: ignore[assignment]
            path.append(arc)
            new_load = load + (1 if not serviced or was_first else 0)
            if dfs(p + 1, w, 0 if w == depot else new_load,
                   uncovered - (1 if was_first else 0), l):
                return True
            path.pop()
            x = w
            while x != depot:
                touched[x] -= 1
                x = tree.parent[x]  # type: ignore[assignment]
            x = v
            while x != depot:
                touched[x] -= 1
                x = tree.parent[x]  # type: ignore[assignment]
            cnt[arc] -= 1
            times[i] -= 1
            last[i] = prev_last
            if was_first:
                first[i] = 0
        return False

    for l in range(2 * m, l_hi + 1, 2):
        for i in range(m):
            jmin[i] = max(2, _min_traversals(l, g, is_leaf[i]))
        if sum(jmin) > l:
            continue
        if dfs(1, depot, 0, m, l):
            return VehicleRoute(tuple(path))
    return None


def decide_route_const_priority(
    instance: RoadInstance, params: ServiceParams
) -> Optional[VehicleRoute]:
    """Find a valid route on a unit-weight tree with constant factor.

    Returns a route satisfying every constraint, or None when no route
    exists.  Raises InputError off the supported class (non-tree,
    non-unit edge lengths, non-constant recurrence table).
    """
    if instance.kind != "tree":
        raise InputError("constant-factor routing requires a tree instance")
    if not instance.unit_lengths():
        raise InputError("constant-factor routing requires unit edge lengths")
    tval = params.t.constant_value()
    if tval is None:
        raise InputError("recurrence factors must be a single constant")
    tree = RootedTree(instance, instance.depot)
    if not instance.edges:
        return VehicleRoute(())
    tag = classify_case(tval, params.c)
    if tag in (CaseTag.CASE1, CaseTag.CASE2):
        # gaps never bind: any cyclic gap is at most the route length
        # minus two, which stays under t*L
        return _cover_route(tree, params, params.L)
    short = _cover_route(tree, params, tval * params.L)
    if short is not None:
        return short
    return _search_route(tree, params)
