"""Rooted-tree view of a tree-shaped road network."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .model import EdgeKey, InputError, RoadInstance, Vertex, edge_key


@dataclass
class RootedTree:
    """A tree instance rooted at a chosen vertex (usually the depot).

    Children are ordered deterministically (sorted by vertex name) so
    that dynamic programs and searches are reproducible.
    """

    instance: RoadInstance
    root: Vertex
    parent: Dict[Vertex, Optional[Vertex]] = field(init=False)
    children: Dict[Vertex, List[Vertex]] = field(init=False)
    depth: Dict[Vertex, int] = field(init=False)

    def __post_init__(self) -> None:
        if self.instance.kind != "tree":
            raise InputError("RootedTree requires a tree instance")
        if self.root not in self.instance._adj:
            raise InputError(f"unknown root {self.root!r}")
        self.parent = {self.root: None}
        self.children = {v: [] for v in self.instance.vertices}
        self.depth = {self.root: 0}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for w, _ in sorted(self.instance.neighbors(v)):
                if w not in self.parent:
                    self.parent[w] = v
                    self.children[v].append(w)
                    self.depth[w] = self.depth[v] + 1
                    stack.append(w)

    def parent_edge(self, v: Vertex) -> EdgeKey:
        p = self.parent[v]
        if p is None:
            raise InputError(f"root {v!r} has no parent edge")
        return edge_key(p, v)

    def postorder(self) -> List[Vertex]:
        order: List[Vertex] = []
        stack: List[Tuple[Vertex, bool]] = [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                order.append(v)
            else:
                stack.append((v, True))
                for w in reversed(self.children[v]):
                    stack.append((w, False))
        return order

    def subtree_vertices(self, v: Vertex) -> List[Vertex]:
        out = [v]
        stack = [v]
        while stack:
            x = stack.pop()
            for w in self.children[x]:
                out.append(w)
                stack.append(w)
        return out

    def subtree_edges(self, v: Vertex) -> List[EdgeKey]:
        """Edges of the subtree rooted at v, including v's parent edge."""
        keys = [] if self.parent[v] is None else [self.parent_edge(v)]
        for w in self.subtree_vertices(v):
            for u in self.children[w]:
                keys.append(edge_key(w, u))
        return keys

    def shape_hash(self, v: Vertex, extra=None) -> int:
        """Canonical hash of the subtree below v (including v's parent edge).

        Two vertices get equal hashes iff their subtrees are isomorphic as
        rooted trees with matching edge attributes.  ``extra`` maps an edge
        key to any hashable payload folded into the hash.
        """
        child_hashes = tuple(sorted(self.shape_hash(w, extra) for w in self.children[v]))
        if self.parent[v] is None:
            attrs = None
        else:
            e = self.instance._edge_by_key[self.parent_edge(v)]
            attrs = (e.alpha, e.priority, None if extra is None else extra(self.parent_edge(v)))
        return hash((attrs, child_hashes))
