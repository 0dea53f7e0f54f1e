"""The right-angled building of a RAAG and its Davis realization.

Chambers are group elements; the J-residues are the left cosets of the
clique subgroups G(J), i.e. exactly the standard flats.  The Davis ball is
the cube complex of intervals in the poset of spherical residues whose gate
representative lies within a radius.

Gallery distance is computed algebraically: the Coxeter-valued distance of
chambers c1, c2 is the syllable sequence of nf(c1^-1 c2), whose length is
the gallery metric.  In the Davis realization every gallery step costs two
edges (chamber, up to the shared residue, down), so d_l1 = 2 * gallery;
the one-generator case pins the orientation of this identity and the tests
enforce it on ball geometry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cube_complex import CubeComplexBall, TruncationError
from .graph_core import DefiningGraph, orthogonal_complement
from .raag_geometry import (
    ParallelClass,
    class_of_geodesic,
    coset_coordinates,
    coset_member,
    flat_element,
    gate_representative,
    inv,
    mul,
    normal_form,
    parse_word,
    syllables,
    word_str,
)


@dataclass(frozen=True)
class Residue:
    base: tuple                  # gate representative of base*G(type_J)
    type_J: tuple                # sorted vertex tuple
    spherical: bool = True

    @property
    def rank(self) -> int:
        return len(self.type_J)

    @property
    def id(self) -> str:
        return f"{word_str(self.base)}|{{{','.join(self.type_J)}}}"

    def to_json(self) -> str:
        import json

        return json.dumps({"base": word_str(self.base),
                           "type": list(self.type_J)})


def residue(g: DefiningGraph, base, type_J) -> Residue:
    members = g.sorted_subset(type_J)
    return Residue(gate_representative(g, base, members), members,
                   g.is_clique(members))


def residue_contains(g: DefiningGraph, small: Residue, big: Residue) -> bool:
    return set(small.type_J) <= set(big.type_J) and \
        coset_member(g, small.base, big.base, big.type_J)


@dataclass
class ResiduePoset:
    residues: list

    def grades(self):
        out = {}
        for r in self.residues:
            out.setdefault(r.rank, []).append(r)
        return out


@dataclass
class DavisBall:
    ball: CubeComplexBall
    residue_of: dict            # vertex id -> Residue
    rank_of: dict               # vertex id -> int
    graph: DefiningGraph
    radius: int

    def chambers(self):
        return [v for v, r in self.rank_of.items() if r == 0]


def davis_ball(g: DefiningGraph, radius: int) -> DavisBall:
    """Davis realization ball: spherical residues with short gate reps.

    Vertices are residues with base length <= radius, edges are codimension-1
    containments, squares are the rank-2 intervals.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    from .graph_core import cliques as all_cliques

    elements = {()}
    frontier = [()]
    while frontier:
        nxt = []
        for h in frontier:
            for v in g.vertices:
                for e in (1, -1):
                    h2 = mul(g, h, ((v, e),))
                    if len(h2) <= radius and h2 not in elements:
                        elements.add(h2)
                        nxt.append(h2)
        frontier = nxt
    residues = {}
    for h in elements:
        for cl in all_cliques(g):
            r = residue(g, h, cl.members)
            residues[r.id] = r
    order = sorted(residues.values(), key=lambda r: (r.rank, r.id))
    ids = {r.id: r for r in order}
    edges = []
    squares = []
    for r in order:
        jset = set(r.type_J)
        exts = [w for w in g.vertices
                if w not in jset and all(g.adjacent(w, x) for x in jset)]
        for w in exts:
            parent = residue(g, r.base, r.type_J + (w,))
            if parent.id in ids:
                edges.append((r.id, parent.id, f"h:{w}"))
        for w1, w2 in itertools.combinations(exts, 2):
            if not g.adjacent(w1, w2):
                continue
            m1 = residue(g, r.base, r.type_J + (w1,))
            m2 = residue(g, r.base, r.type_J + (w2,))
            top = residue(g, r.base, r.type_J + (w1, w2))
            if m1.id in ids and m2.id in ids and top.id in ids:
                squares.append((r.id, m1.id, top.id, m2.id))
    depth = {r.id: radius - len(r.base) for r in order}
    ball = CubeComplexBall.make([r.id for r in order], edges, squares, depth)
    return DavisBall(ball, dict(ids), {r.id: r.rank for r in order}, g, radius)


# ---------------------------------------------------------------------------
# gallery metric
# ---------------------------------------------------------------------------

def w_distance(g: DefiningGraph, c1, c2):
    """Coxeter-valued distance: one letter per syllable of nf(c1^-1 c2)."""
    word = [v for v, _ in syllables(mul(g, inv(c1), c2))]
    # canonical shuffle (the word is already reduced in the Coxeter group)
    out = []
    while word:
        best = None
        for i, v in enumerate(word):
            if all(g.adjacent(w, v) for w in word[:i]):
                if best is None or g.index(v) < g.index(word[best]):
                    best = i
        out.append(word.pop(best))
    return tuple(out)


def gallery_distance(g: DefiningGraph, c1, c2) -> int:
    return len(w_distance(g, c1, c2))


# ---------------------------------------------------------------------------
# projections and parallelism
# ---------------------------------------------------------------------------

def chambers_of(g: DefiningGraph, r: Residue, window: int):
    """Chambers base * prod v^k with |k_v| <= window, with coordinates."""
    axes = [range(-window, window + 1)] * len(r.type_J)
    out = []
    for combo in itertools.product(*axes):
        coords = dict(zip(r.type_J, combo))
        out.append((coords, flat_element(g, r.base, coords)))
    return out


def proj_residue(g: DefiningGraph, r: Residue, c):
    """Gate of chamber c on the residue: unique gallery-distance minimizer."""
    if not r.spherical:
        raise ValueError("projection target must be spherical")
    reach = len(mul(g, inv(r.base), c)) + 1
    best = None
    best_d = None
    ties = 0
    for coords, chamber in chambers_of(g, r, reach):
        d = gallery_distance(g, c, chamber)
        if best_d is None or d < best_d:
            best, best_d, ties = chamber, d, 1
        elif d == best_d:
            ties += 1
    if ties != 1:
        raise TruncationError(f"non-unique projection of {word_str(c)}")
    return best


def are_parallel(g: DefiningGraph, r1: Residue, r2: Residue, window: int = 3):
    """Mutual-projection test on a coordinate window.

    Returns (flag, bijection) where the bijection maps window chambers of r1
    to chambers of r2 (as word tuples) when the residues are parallel.
    """
    if r1.type_J != r2.type_J:
        return False, None
    fwd = {}
    for _, c in chambers_of(g, r1, window):
        fwd[c] = proj_residue(g, r2, c)
    back = {}
    for _, c in chambers_of(g, r2, window):
        back[c] = proj_residue(g, r1, c)
    for c, image in fwd.items():
        if back.get(image) != c:
            return False, None
    for c, image in back.items():
        if fwd.get(image) != c:
            return False, None
    return True, dict(fwd)


def parallel_set(g: DefiningGraph, r: Residue) -> Residue:
    """The (J u J-perp)-residue containing r; non-spherical when that set
    is not a clique (returned as a typed coset outside the graded poset)."""
    support = g.sorted_subset(set(r.type_J) |
                              set(orthogonal_complement(g, r.type_J)))
    return Residue(gate_representative(g, r.base, support), support,
                   g.is_clique(support))


def product_decomposition(g: DefiningGraph, r: Residue, window: int = 2):
    """Rank-1 factors and the chamber-coordinates bijection, window-checked."""
    factors = [residue(g, r.base, (v,)) for v in r.type_J]
    for coords, chamber in chambers_of(g, r, window):
        for f, v in zip(factors, r.type_J):
            expected = flat_element(g, f.base, {v: coords[v]})
            got = proj_residue(g, f, chamber)
            if got != expected:
                raise AssertionError(
                    f"projection of {word_str(chamber)} onto factor {f.id} "
                    f"is {word_str(got)}, expected {word_str(expected)}")
    return factors


# ---------------------------------------------------------------------------
# actions on chambers and factor actions
# ---------------------------------------------------------------------------

@dataclass
class ActionTables:
    """A group action on a chamber window, one bijection table per generator.

    Tables are dicts word-tuple -> word-tuple; `inverses` names the inverse
    table of each generator.
    """

    generators: dict
    inverses: dict = field(default_factory=dict)

    def apply(self, name, chamber):
        t = self.generators[name]
        if chamber not in t:
            raise TruncationError(f"{word_str(chamber)} outside action window")
        return t[chamber]

    def apply_word(self, names, chamber):
        for n in reversed(list(names)):
            chamber = self.apply(n, chamber)
        return chamber


def left_translation_action(g: DefiningGraph, elements, h) -> ActionTables:
    fwd = {c: mul(g, h, c) for c in elements}
    bwd = {c: mul(g, inv(h), c) for c in elements}
    return ActionTables({"t": fwd, "t_inv": bwd},
                        {"t": "t_inv", "t_inv": "t"})


def relabel_action(g: DefiningGraph, elements, perm: dict) -> ActionTables:
    """Action of a graph automorphism (a permutation of the vertex labels)."""
    def apply(c):
        return normal_form(g, tuple((perm[v], e) for v, e in c))

    inv_perm = {w: v for v, w in perm.items()}
    fwd = {c: apply(c) for c in elements}
    bwd = {c: normal_form(g, tuple((inv_perm[v], e) for v, e in c))
           for c in elements}
    return ActionTables({"s": fwd, "s_inv": bwd}, {"s": "s_inv", "s_inv": "s"})


def image_class(g: DefiningGraph, tables: ActionTables, name: str,
                pc: ParallelClass) -> ParallelClass:
    """Class of the image of the class representative geodesic."""
    base = gate_representative(g, pc.rep, (pc.direction,))
    c0 = tables.apply(name, base)
    c1 = tables.apply(name, mul(g, base, ((pc.direction, 1),)))
    step = mul(g, inv(c0), c1)
    if len(step) != 1:
        raise ValueError(f"generator {name!r} is not flat-preserving on {pc.id}")
    return class_of_geodesic(g, c0, step[0][0])


@dataclass
class FactorActionSpec:
    parallel_class: ParallelClass
    generator_tables: dict       # name -> {int: int} on the window
    window: int

    def check(self):
        for name, t in self.generator_tables.items():
            vals = [t[n] for n in sorted(t)]
            if len(set(vals)) != len(vals):
                raise AssertionError(f"factor table of {name!r} not injective")
        return True


def extract_factor_action(g: DefiningGraph, tables: ActionTables,
                          pc: ParallelClass, window: int,
                          names=None) -> FactorActionSpec:
    """Induced action on the rank-1 factor of the parallel set of a class.

    For each stabilizing generator, chambers of the representative residue
    are moved by the action and gated back onto the residue; the table read
    off in coordinates identifies the factor with a window of Z.
    """
    r = residue(g, pc.rep, (pc.direction,))
    v = pc.direction
    out = {}
    for name in (names or tables.generators):
        if image_class(g, tables, name, pc).id != pc.id:
            raise ValueError(f"generator {name!r} does not stabilize {pc.id}")
        table = {}
        for n in range(-window, window + 1):
            c = flat_element(g, r.base, {v: n})
            moved = tables.apply(name, c)
            gated = proj_residue(g, r, moved)
            table[n] = coset_coordinates(g, gated, r.base, (v,))[v]
        out[name] = table
    spec = FactorActionSpec(pc, out, window)
    spec.check()
    return spec


def rank_preserving_check(davis: DavisBall, vertex_map: dict,
                          margin: int = 0) -> bool:
    """Does a vertex self-map of the Davis ball preserve ranks?"""
    for v in davis.ball.vertex_ids:
        if davis.ball.depth[v] < margin or v not in vertex_map:
            continue
        if davis.rank_of[vertex_map[v]] != davis.rank_of[v]:
            return False
    return True
