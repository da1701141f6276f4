"""Covering a rooted tree's edges by k root-anchored subtrees.

The size profile of such covers is computed bottom-up: each vertex
holds the set of achievable k-tuples of part sizes for its subtree,
a child edge is distributed to every admissible part subset, and
sibling branches merge by component-wise addition.  Back-pointers make
every retained vector reconstructible into an actual cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .model import EdgeKey, InputError, RoadInstance, edge_key
from .trees import RootedTree

SizeVector = Tuple[int, ...]

# (prev_vector_in_same_merge, child, child_lifted_vector) per merge stage,
# and (base_vector, part_index_set) per edge lift
_MergeBack = Tuple[SizeVector, str, SizeVector]
_LiftBack = Tuple[SizeVector, FrozenSet[int]]


@dataclass
class _Tables:
    merged: Dict[str, List[Dict[SizeVector, Optional[_MergeBack]]]]
    lifted: Dict[str, Dict[SizeVector, _LiftBack]]


def _subsets(indices: Sequence[int]):
    n = len(indices)
    for mask in range(1 << n):
        yield frozenset(indices[i] for i in range(n) if (mask >> i) & 1)


def _compute(tree: RootedTree, k: int) -> _Tables:
    tables = _Tables(merged={}, lifted={})
    zero = (0,) * k
    for v in tree.postorder():
        stages: List[Dict[SizeVector, Optional[_MergeBack]]] = [{zero: None}]
        acc: Dict[SizeVector, Optional[_MergeBack]] = {zero: None}
        for ch in tree.children[v]:
            nxt: Dict[SizeVector, Optional[_MergeBack]] = {}
            for vec_a, _ in acc.items():
                for vec_b in tables.lifted[ch]:
                    merged = tuple(a + b for a, b in zip(vec_a, vec_b))
                    nxt.setdefault(merged, (vec_a, ch, vec_b))
            acc = nxt
            stages.append(acc)
        tables.merged[v] = stages
        if tree.parent[v] is None:
            continue
        # lift over the parent edge: nonempty parts must take it to stay
        # connected to the root, empty parts may start with it
        lifted: Dict[SizeVector, _LiftBack] = {}
        for vec in acc:
            nonempty = [i for i in range(k) if vec[i] > 0]
            empties = [i for i in range(k) if vec[i] == 0]
            for extra in _subsets(empties):
                chosen = frozenset(nonempty) | extra
                if not chosen:
                    continue
                out = tuple(
                    vec[i] + (1 if i in chosen else 0) for i in range(k)
                )
                lifted.setdefault(out, (vec, chosen))
        tables.lifted[v] = lifted
    return tables


def achievable_size_vectors(
    tree: RootedTree, k: int, max_k: int = 4
) -> Set[SizeVector]:
    """All size vectors of k-tuples of root-anchored subtrees covering E.

    Parts may overlap and may be empty; each nonempty part must be a
    connected subgraph containing the root.
    """
    if k <= 0:
        raise InputError("k must be positive")
    if k > max_k:
        raise InputError(f"k={k} above the configured bound {max_k}")
    tables = _compute(tree, k)
    return set(tables.merged[tree.root][-1].keys())


def _reconstruct(
    tree: RootedTree,
    tables: _Tables,
    k: int,
    v: str,
    vec: SizeVector,
    parts: List[Set[EdgeKey]],
) -> None:
    stages = tables.merged[v]
    stage = len(stages) - 1
    cur = vec
    while stage > 0:
        back = stages[stage][cur]
        assert back is not None
        prev, ch, lifted_vec = back
        base, chosen = tables.lifted[ch][lifted_vec]
        key = edge_key(v, ch)
        for i in chosen:
            parts[i].add(key)
        _reconstruct(tree, tables, k, ch, base, parts)
        cur = prev
        stage -= 1


def cut_tree(
    tree: RootedTree,
    sizes: Sequence[int],
    mode: str = "exact",
    max_k: int = 4,
) -> Optional[List[Set[EdgeKey]]]:
    """Find k root-anchored subtrees of the given sizes covering E(T).

    EXACT requires the cover's size vector to equal ``sizes``; AT_MOST
    accepts any achievable vector dominated component-wise.  Returns the
    parts as edge-key sets (possibly empty), or None when infeasible.
    """
    k = len(sizes)
    if k <= 0:
        raise InputError("k must be positive")
    if k > max_k:
        raise InputError(f"k={k} above the configured bound {max_k}")
    if mode not in ("exact", "atmost"):
        raise InputError(f"unknown mode {mode!r}")
    if any(s < 0 for s in sizes):
        raise InputError("sizes must be nonnegative")
    tables = _compute(tree, k)
    achievable = tables.merged[tree.root][-1]
    target: Optional[SizeVector] = None
    if mode == "exact":
        if tuple(sizes) in achievable:
            target = tuple(sizes)
    else:
        dominated = [
            vec
            for vec in achievable
            if all(a <= b for a, b in zip(vec, sizes))
        ]
        if dominated:
            target = min(dominated)
    if target is None:
        return None
    parts: List[Set[EdgeKey]] = [set() for _ in range(k)]
    _reconstruct(tree, tables, k, tree.root, target, parts)
    return parts


def check_subtree_cover(
    instance: RoadInstance, root: str, parts: Sequence[Set[EdgeKey]]
) -> List[str]:
    """Defect list for a claimed cover: union must equal E, and each
    nonempty part must be connected and contain the root."""
    problems: List[str] = []
    all_keys = {e.key for e in instance.edges}
    union: Set[EdgeKey] = set()
    for i, part in enumerate(parts):
        union |= part
        if not part:
            continue
        unknown = part - all_keys
        if unknown:
            problems.append(f"part {i} has unknown edges {sorted(unknown)}")
            continue
        # connectivity from the root over the part's edges only
        seen = {root}
        frontier = [root]
        adj: Dict[str, List[str]] = {}
        for u, w in part:
            adj.setdefault(u, []).append(w)
            adj.setdefault(w, []).append(u)
        while frontier:
            x = frontier.pop()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        touched = {u for u, w in part} | {w for u, w in part}
        if not touched <= seen:
            problems.append(f"part {i} is not connected to the root")
    if union != all_keys:
        missing = sorted(all_keys - union)
        problems.append(f"uncovered edges {missing}")
    return problems
