"""The right-angled Artin group of a defining graph and its two covers.

Group elements are kept in a canonical normal form: fully cancelled under
commutation shuffles, then the lexicographically least shuffle (letters
ordered by vertex declaration order, positive exponent first).  Two words
represent the same element iff their canonical forms are equal.

On top of the word algebra this module builds finite balls of the universal
cover X of the Salvetti complex and of the exploded cover X_e, standard
flats, gate projections onto standard geodesics, levels, and adjacency of
parallel classes (the edges of the extension complex).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph_core import Clique, DefiningGraph, UnknownEndpointError
from .cube_complex import CubeComplexBall, TruncationError

# A letter is (generator label, +1 or -1); a word is a tuple of letters.

IDENTITY = ()


def _check_letters(g: DefiningGraph, word):
    for v, e in word:
        if not g.has_vertex(v):
            raise UnknownEndpointError(f"unknown generator {v!r}")
        if e not in (1, -1):
            raise ValueError(f"exponent must be +-1, got {e!r}")


def _reduce(g: DefiningGraph, word):
    """Cancel inverse pairs that can be brought together by commutations."""
    out = []
    for v, e in word:
        j = len(out) - 1
        placed = False
        while j >= 0:
            w, f = out[j]
            if w == v:
                if f == -e:
                    out.pop(j)
                    placed = True
                break
            if not g.adjacent(w, v):
                break
            j -= 1
        if not placed and not (j >= 0 and out[j][0] == v and out[j][1] == -e):
            out.append((v, e))
    return out


def _lex_least(g: DefiningGraph, word):
    """Greedy lexicographically least shuffle of a reduced word."""
    word = list(word)
    out = []
    while word:
        best = None
        best_key = None
        for i, (v, e) in enumerate(word):
            if all(g.adjacent(w, v) for w, _ in word[:i]):
                key = (g.index(v), 0 if e == 1 else 1)
                if best is None or key < best_key:
                    best, best_key = i, key
        out.append(word.pop(best))
    return tuple(out)


def normal_form(g: DefiningGraph, word) -> tuple:
    """Canonical normal form of a raw generator word."""
    _check_letters(g, word)
    return _lex_least(g, _reduce(g, word))


def mul(g: DefiningGraph, a, b) -> tuple:
    return _lex_least(g, _reduce(g, tuple(a) + tuple(b)))


def inv(a) -> tuple:
    return tuple((v, -e) for v, e in reversed(a))


def length(a) -> int:
    return len(a)


def word_str(a) -> str:
    if not a:
        return "1"
    return " ".join(v if e == 1 else f"{v}^-1" for v, e in a)


def parse_word(text: str) -> tuple:
    if text.strip() in ("", "1"):
        return ()
    out = []
    for tok in text.split():
        if tok.endswith("^-1"):
            out.append((tok[:-3], -1))
        else:
            out.append((tok, 1))
    return tuple(out)


def syllables(a):
    """Maximal same-generator runs of a normal form, as (gen, exponent sum)."""
    out = []
    for v, e in a:
        if out and out[-1][0] == v:
            out[-1][1] += e
        else:
            out.append([v, e])
    return [(v, e) for v, e in out if e != 0]


# ---------------------------------------------------------------------------
# cosets of standard subgroups
# ---------------------------------------------------------------------------

def coset_member(g: DefiningGraph, h, base, support) -> bool:
    """Is h in base * G(support)?"""
    rel = mul(g, inv(base), h)
    return all(v in support for v, _ in rel)


_gate_cache: dict = {}


def gate_representative(g: DefiningGraph, base, support) -> tuple:
    """The unique minimal-length element of the coset base*G(support).

    This is the gate of the identity on the (convex) coset; greedy descent
    by right multiplication terminates there.
    """
    key = (id(g), tuple(base), tuple(support))
    hit = _gate_cache.get(key)
    if hit is not None:
        return hit
    rep = normal_form(g, base)
    improved = True
    while improved:
        improved = False
        for v in support:
            for e in (1, -1):
                cand = mul(g, rep, ((v, e),))
                if len(cand) < len(rep):
                    rep = cand
                    improved = True
    _gate_cache[key] = rep
    return rep


def coset_coordinates(g: DefiningGraph, h, base, support):
    """Exponent vector of base^-1 h inside the abelian group G(support)."""
    rel = mul(g, inv(base), h)
    coords = {v: 0 for v in support}
    for v, e in rel:
        if v not in coords:
            raise ValueError(f"{word_str(h)} is not in the coset")
        coords[v] += e
    return coords


def flat_element(g: DefiningGraph, base, coords):
    w = tuple(base)
    for v, k in coords.items():
        if k:
            w = mul(g, w, tuple((v, 1 if k > 0 else -1) for _ in range(abs(k))))
    return w


# ---------------------------------------------------------------------------
# flats, classes, levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StandardFlat:
    base: tuple          # gate representative of base*G(clique)
    clique: Clique

    @property
    def id(self) -> str:
        return f"{word_str(self.base)}|{{{','.join(self.clique.members)}}}"

    def to_json(self) -> str:
        import json

        return json.dumps({"base": word_str(self.base),
                           "clique": list(self.clique.members)})


@dataclass(frozen=True)
class ParallelClass:
    direction: str
    rep: tuple           # gate representative of the ({v} u v-perp)-coset

    @property
    def id(self) -> str:
        return f"{self.direction}@{word_str(self.rep)}"


@dataclass
class VLevel:
    parallel_class: ParallelClass
    height: int
    members: tuple


def standard_flat(g: DefiningGraph, base, clique_members) -> StandardFlat:
    members = g.sorted_subset(clique_members)
    if not g.is_clique(members):
        raise ValueError(f"{members} is not a clique")
    return StandardFlat(gate_representative(g, base, members), Clique(members))


def class_of_geodesic(g: DefiningGraph, base, v: str) -> ParallelClass:
    from .graph_core import orthogonal_complement

    support = (v,) + orthogonal_complement(g, [v])
    return ParallelClass(v, gate_representative(g, base, support))


def flat_contains(g: DefiningGraph, small: StandardFlat, big: StandardFlat) -> bool:
    return set(small.clique.members) <= set(big.clique.members) and \
        coset_member(g, small.base, big.base, big.clique.members)


# ---------------------------------------------------------------------------
# the ball of X
# ---------------------------------------------------------------------------

def ball_X(g: DefiningGraph, radius: int) -> CubeComplexBall:
    """Ball of the universal cover of the Salvetti complex.

    Vertices are canonical-form word strings of length <= radius; edges are
    right multiplications by generators; squares come from commuting pairs.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    elements = {(): None}
    frontier = [()]
    while frontier:
        nxt = []
        for h in frontier:
            for v in g.vertices:
                for e in (1, -1):
                    h2 = mul(g, h, ((v, e),))
                    if len(h2) <= radius and h2 not in elements:
                        elements[h2] = None
                        nxt.append(h2)
        frontier = nxt
    verts = sorted(elements, key=lambda w: (len(w), word_str(w)))
    ids = {w: word_str(w) for w in verts}
    edges = []
    for h in verts:
        for v in g.vertices:
            h2 = mul(g, h, ((v, 1),))
            if h2 in elements:
                edges.append((ids[h], ids[h2], v))
    squares = []
    for h in verts:
        for i, u in enumerate(g.vertices):
            for v in g.vertices[i + 1 :]:
                if not g.adjacent(u, v):
                    continue
                for eu in (1, -1):
                    for ev in (1, -1):
                        a = mul(g, h, ((u, eu),))
                        b = mul(g, h, ((v, ev),))
                        c = mul(g, a, ((v, ev),))
                        if a in elements and b in elements and c in elements:
                            squares.append((ids[h], ids[a], ids[c], ids[b]))
    depth = {ids[w]: radius - len(w) for w in verts}
    ball = CubeComplexBall.make([ids[w] for w in verts], edges, squares, depth)
    return ball


# ---------------------------------------------------------------------------
# the ball of X_e
# ---------------------------------------------------------------------------

def xe_id(word, clique_members) -> str:
    return f"{word_str(word)}|{{{','.join(clique_members)}}}"


def parse_xe_id(vid: str):
    wpart, cpart = vid.rsplit("|", 1)
    members = tuple(x for x in cpart.strip("{}").split(",") if x)
    return parse_word(wpart), members


def ball_Xe(g: DefiningGraph, radius: int) -> CubeComplexBall:
    """Ball of the universal cover of the exploded Salvetti complex.

    Vertices are pairs (group element, clique); a vertex sits in the unique
    standard flat base*G(clique).  Vertical edges move inside the flat,
    horizontal edges drop or add one clique vertex.  Truncation is by l1
    distance from (1, empty clique).
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    start = ((), ())
    dist = {start: 0}
    dq = deque([start])
    while dq:
        h, cl = dq.popleft()
        d = dist[(h, cl)]
        if d == radius:
            continue
        nbrs = []
        for v in cl:
            for e in (1, -1):
                nbrs.append((mul(g, h, ((v, e),)), cl))
        clset = set(cl)
        for w in cl:
            nbrs.append((h, tuple(x for x in cl if x != w)))
        for w in g.vertices:
            if w not in clset and all(g.adjacent(w, x) for x in cl):
                nbrs.append((h, g.sorted_subset(clset | {w})))
        for n in nbrs:
            if n not in dist:
                dist[n] = d + 1
                dq.append(n)
    verts = sorted(dist, key=lambda p: (dist[p], xe_id(*p)))
    ids = {p: xe_id(*p) for p in verts}
    present = set(verts)
    edges = []
    for h, cl in verts:
        for v in cl:
            h2 = (mul(g, h, ((v, 1),)), cl)
            if h2 in present:
                edges.append((ids[(h, cl)], ids[h2], f"v:{v}"))
        for w in cl:
            down = (h, tuple(x for x in cl if x != w))
            if down in present:
                edges.append((ids[(h, cl)], ids[down], f"h:{w}"))
    squares = []
    for h, cl in verts:
        # vertical-vertical
        for i, u in enumerate(cl):
            for v in cl[i + 1 :]:
                for eu in (1, -1):
                    for ev in (1, -1):
                        a = (mul(g, h, ((u, eu),)), cl)
                        b = (mul(g, h, ((v, ev),)), cl)
                        c = (mul(g, a[0], ((v, ev),)), cl)
                        if a in present and b in present and c in present:
                            squares.append((ids[(h, cl)], ids[a], ids[c], ids[b]))
        # vertical-horizontal and horizontal-horizontal
        for w in cl:
            down = tuple(x for x in cl if x != w)
            if (h, down) not in present:
                continue
            for v in down:
                for ev in (1, -1):
                    a = (mul(g, h, ((v, ev),)), cl)
                    b = (mul(g, h, ((v, ev),)), down)
                    if a in present and b in present:
                        squares.append((ids[(h, cl)], ids[a], ids[b], ids[(h, down)]))
            for w2 in down:
                down2 = tuple(x for x in cl if x != w2)
                dd = tuple(x for x in down if x != w2)
                if (h, down2) in present and (h, dd) in present:
                    squares.append((ids[(h, cl)], ids[(h, down)],
                                    ids[(h, dd)], ids[(h, down2)]))
    depth = {ids[p]: radius - dist[p] for p in verts}
    return CubeComplexBall.make([ids[p] for p in verts], edges, squares, depth)


# ---------------------------------------------------------------------------
# flats in a ball
# ---------------------------------------------------------------------------

def standard_flats(ball: CubeComplexBall, g: DefiningGraph, margin: int = 0):
    """All standard flats base*G(clique) meeting the ball at the given margin.

    Returned sorted by (clique size, id); the partial order is available via
    `flat_contains`.
    """
    from .graph_core import cliques as all_cliques

    found = {}
    verts = [v for v in ball.vertex_ids if ball.depth[v] >= margin]
    for vid in verts:
        h = parse_word(vid)
        for cl in all_cliques(g):
            f = StandardFlat(gate_representative(g, h, cl.members), cl)
            found[f.id] = f
    return sorted(found.values(), key=lambda f: (len(f.clique), f.id))


def project_to_geodesic(g: DefiningGraph, x, flat: StandardFlat):
    """Gate of x on a standard geodesic: the unique closest vertex.

    Brute-force argmin over the coset, with the search range bounded by the
    distance from x to the geodesic's base point.
    """
    if len(flat.clique) != 1:
        raise ValueError("projection target must be a standard geodesic")
    v = flat.clique.members[0]
    reach = len(mul(g, inv(flat.base), x)) + 1
    best = None
    best_d = None
    ties = 0
    for k in range(-reach, reach + 1):
        cand = flat_element(g, flat.base, {v: k})
        d = len(mul(g, inv(cand), x))
        if best_d is None or d < best_d:
            best, best_d, ties = (k, cand), d, 1
        elif d == best_d:
            ties += 1
    if ties != 1:
        raise TruncationError(f"non-unique gate for {word_str(x)}")
    return best  # (height, vertex word)


def geodesic_of_class(g: DefiningGraph, pc: ParallelClass) -> StandardFlat:
    return StandardFlat(gate_representative(g, pc.rep, (pc.direction,)),
                        Clique((pc.direction,)))


def height_of(g: DefiningGraph, pc: ParallelClass, x) -> int:
    """Gate height of x on the class geodesic, by the prefix-sum shortcut.

    The gate coordinate equals the exponent sum of the front-movable run of
    direction letters: scanning the normal form of base^-1 x, direction
    letters count until the first non-adjacent blocker (any later direction
    letter can never be shuffled in front of that blocker).  The tests pin
    this against the brute-force gate of project_to_geodesic.
    """
    base = gate_representative(g, pc.rep, (pc.direction,))
    y = mul(g, inv(base), x)
    v = pc.direction
    s = 0
    for w, e in y:
        if w == v:
            s += e
        elif not g.adjacent(w, v):
            break
    return s


def v_levels(g: DefiningGraph, pc: ParallelClass, ball: CubeComplexBall,
             margin: int = 1, verify: bool = True):
    """Partition of the ball's margin-interior by gate height.

    With `verify`, also checks that every standard flat not involving the
    class sits inside a single level.
    """
    levels = {}
    verts = [v for v in ball.vertex_ids if ball.depth[v] >= margin]
    for vid in verts:
        h = parse_word(vid)
        k = height_of(g, pc, h)
        levels.setdefault(k, []).append(vid)
    out = [VLevel(pc, k, tuple(sorted(vs))) for k, vs in sorted(levels.items())]
    if verify:
        for f in standard_flats(ball, g, margin=margin):
            dirs = {class_of_geodesic(g, f.base, v).id for v in f.clique.members}
            if pc.id in dirs:
                continue
            heights = set()
            for vid in verts:
                h = parse_word(vid)
                if coset_member(g, h, f.base, f.clique.members):
                    heights.add(height_of(g, pc, h))
            if len(heights) > 1:
                raise AssertionError(
                    f"flat {f.id} meets several {pc.id}-levels: {sorted(heights)}")
    return out


_ext_adj_cache: dict = {}


def extension_adjacent(g: DefiningGraph, c1: ParallelClass, c2: ParallelClass,
                       search_radius: int | None = None) -> bool:
    """Edge test in the extension complex.

    True iff the directions are adjacent in the graph and some element lies
    in both parallel-set cosets (then representatives through that element
    span a standard 2-flat).
    """
    key = (id(g), c1, c2, search_radius)
    hit = _ext_adj_cache.get(key)
    if hit is None:
        hit = _extension_adjacent(g, c1, c2, search_radius)
        _ext_adj_cache[key] = hit
    return hit


def _extension_adjacent(g, c1, c2, search_radius):
    from .graph_core import orthogonal_complement

    if c1.direction == c2.direction:
        return False
    if not g.adjacent(c1.direction, c2.direction):
        return False
    s1 = (c1.direction,) + orthogonal_complement(g, [c1.direction])
    s2 = (c2.direction,) + orthogonal_complement(g, [c2.direction])
    if search_radius is None:
        search_radius = len(c1.rep) + len(c2.rep) + 2
    seen = {c1.rep}
    dq = deque([c1.rep])
    # walk the coset rep * G(s1); if it meets rep2 * G(s2) the classes span
    while dq:
        h = dq.popleft()
        if coset_member(g, h, c2.rep, s2):
            return True
        for v in s1:
            for e in (1, -1):
                h2 = mul(g, h, ((v, e),))
                if len(h2) <= search_radius and h2 not in seen:
                    seen.add(h2)
                    dq.append(h2)
    return False
