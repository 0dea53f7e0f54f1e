"""Defining graphs and their clique combinatorics.

A defining graph is a finite simplicial graph: vertex labels are strings,
edges are unordered label pairs, no loops, no multi-edges.  Everything else
in the package (groups, buildings, complexes) is driven by one of these.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class GraphError(ValueError):
    """Base class for defining-graph construction problems."""


class MalformedGraphJSON(GraphError):
    pass


class DuplicateVertexError(GraphError):
    pass


class UnknownEndpointError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


@dataclass(frozen=True)
class DefiningGraph:
    """Finite simplicial graph with an ordered vertex list.

    The declaration order of `vertices` is canonical: vertex indices, clique
    order and every downstream id derive from it.
    """

    vertices: tuple[str, ...]
    edges: frozenset[frozenset[str]]
    _adj: dict = field(
        default=None, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise DuplicateVertexError(f"duplicate vertex {v!r}")
            seen.add(v)
        adj = {v: set() for v in self.vertices}
        for e in self.edges:
            pair = sorted(e)
            if len(pair) != 2:
                raise SelfLoopError(f"self-loop at {pair[0]!r}")
            a, b = pair
            for x in (a, b):
                if x not in seen:
                    raise UnknownEndpointError(f"edge endpoint {x!r} not declared")
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    @staticmethod
    def make(vertices, edges) -> "DefiningGraph":
        return DefiningGraph(
            tuple(vertices),
            frozenset(frozenset(e) for e in edges),
        )

    def index(self, v: str) -> int:
        return self.vertices.index(v)

    def adjacent(self, u: str, v: str) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adj[v]

    def has_vertex(self, v: str) -> bool:
        return v in self._adj

    def sort_key(self, v: str) -> int:
        return self.vertices.index(v)

    def sorted_subset(self, subset) -> tuple[str, ...]:
        """Subset of vertices in canonical (declaration) order."""
        return tuple(sorted(subset, key=self.vertices.index))

    def is_clique(self, subset) -> bool:
        vs = list(subset)
        return all(self.adjacent(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :])

    def to_json(self) -> str:
        return json.dumps(
            {"vertices": list(self.vertices),
             "edges": [sorted(e) for e in sorted(self.edges, key=sorted)]}
        )


@dataclass(frozen=True)
class Clique:
    """A complete subgraph, kept as a canonically sorted vertex tuple."""

    members: tuple[str, ...]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members


@dataclass(frozen=True)
class JoinDecomposition:
    """Partition of the vertex set into join factors."""

    factors: tuple[tuple[str, ...], ...]


def parse_graph(text: str) -> DefiningGraph:
    """Parse the graph JSON format: {"vertices": [...], "edges": [[u,v],...]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraphJSON(str(exc)) from exc
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise MalformedGraphJSON("expected object with 'vertices' and 'edges'")
    vertices = data["vertices"]
    edges = data["edges"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise MalformedGraphJSON("'vertices' must be a list of strings")
    if not isinstance(edges, list):
        raise MalformedGraphJSON("'edges' must be a list of pairs")
    pairs = []
    for e in edges:
        if not isinstance(e, list) or len(e) != 2:
            raise MalformedGraphJSON(f"edge {e!r} is not a pair")
        pairs.append(tuple(e))
    return DefiningGraph.make(vertices, pairs)


def cliques(g: DefiningGraph) -> list[Clique]:
    """All cliques of g, including the empty clique.

    Sorted by (size, lexicographic member indices); the empty clique is
    always index 0.
    """
    found = [()]
    # grow cliques one canonical vertex at a time; each clique is produced
    # exactly once in sorted order
    stack = [((), 0)]
    while stack:
        members, start = stack.pop()
        for i in range(start, len(g.vertices)):
            v = g.vertices[i]
            if all(g.adjacent(u, v) for u in members):
                ext = members + (v,)
                found.append(ext)
                stack.append((ext, i + 1))
    found.sort(key=lambda m: (len(m), tuple(g.index(v) for v in m)))
    return [Clique(m) for m in found]


def orthogonal_complement(g: DefiningGraph, subset) -> tuple[str, ...]:
    """J^perp: vertices adjacent to every vertex of J (disjoint from J)."""
    for v in subset:
        if not g.has_vertex(v):
            raise UnknownEndpointError(f"unknown vertex {v!r}")
    J = set(subset)
    out = [v for v in g.vertices if v not in J and all(g.adjacent(v, j) for j in J)]
    return tuple(out)


def join_decompose(g: DefiningGraph) -> JoinDecomposition:
    """Factors = connected components of the complement graph.

    Two vertices land in different factors exactly when they are adjacent to
    everything in the other factor, so the join of the factors gives back g.
    """
    if not g.vertices:
        raise GraphError("empty graph has no join decomposition")
    unvisited = set(g.vertices)
    factors = []
    while unvisited:
        seed = min(unvisited, key=g.index)
        comp = {seed}
        frontier = [seed]
        unvisited.discard(seed)
        while frontier:
            x = frontier.pop()
            for y in list(unvisited):
                if not g.adjacent(x, y):
                    comp.add(y)
                    unvisited.discard(y)
                    frontier.append(y)
        factors.append(g.sorted_subset(comp))
    factors.sort(key=lambda f: g.index(f[0]))
    return JoinDecomposition(tuple(factors))


def rejoin(g: DefiningGraph, dec: JoinDecomposition) -> DefiningGraph:
    """Rebuild a graph from factors: induced edges plus all cross-factor edges."""
    edges = set()
    where = {}
    for i, f in enumerate(dec.factors):
        for v in f:
            where[v] = i
    for i, u in enumerate(g.vertices):
        for v in g.vertices[i + 1 :]:
            if where[u] != where[v] or g.adjacent(u, v):
                edges.add(frozenset((u, v)))
    # cross-factor edges are total by construction; induced edges come from g
    keep = {e for e in edges
            if len({where[x] for x in e}) == 2 or e in g.edges}
    return DefiningGraph(g.vertices, frozenset(keep))


# Small graphs used throughout the test-suite and docs.

def pentagon() -> DefiningGraph:
    return DefiningGraph.make(
        "abcde", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")]
    )


def k2() -> DefiningGraph:
    return DefiningGraph.make(["u", "v"], [("u", "v")])


def single_vertex() -> DefiningGraph:
    return DefiningGraph.make(["v"], [])


def discrete(n: int) -> DefiningGraph:
    names = [chr(ord("x") + i) if n <= 3 else f"x{i}" for i in range(n)]
    return DefiningGraph.make(names, [])


def path3() -> DefiningGraph:
    return DefiningGraph.make(["p", "q", "r"], [("p", "q"), ("q", "r")])


def square4() -> DefiningGraph:
    return DefiningGraph.make("wxyz", [("w", "x"), ("x", "y"), ("y", "z"), ("z", "w")])
