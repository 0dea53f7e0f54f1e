"""Finite wallspaces, Sageev duals, and the invariant wallspace of a RAAG.

Walls are bipartitions of a finite point set, stored one side at a time as
bitmasks for fast pairwise-intersection checks.  The dual complex is built
by breadth-first flipping from a point-realized consistent orientation; for
finite wallspaces this enumerates every 0-cube.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .cube_complex import CubeComplexBall, is_convex
from .graph_core import DefiningGraph


@dataclass
class Wallspace:
    points: tuple
    sides: list                  # bitmask of the stored side, per wall
    tags: list                   # arbitrary per-wall tags (same length)
    _pindex: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._pindex = {p: i for i, p in enumerate(self.points)}
        full = (1 << len(self.points)) - 1
        seen = {}
        for i, s in enumerate(self.sides):
            if s == 0 or s == full:
                raise ValueError(f"wall {self.tags[i]!r} has an empty side")
            key = min(s, full ^ s)
            if key in seen:
                raise ValueError(
                    f"walls {self.tags[seen[key]]!r} and {self.tags[i]!r} "
                    "induce the same partition")
            seen[key] = i

    @staticmethod
    def make(points, walls, tags=None):
        """walls: iterable of point subsets (one side each)."""
        points = tuple(points)
        pi = {p: i for i, p in enumerate(points)}
        sides = []
        for w in walls:
            m = 0
            for p in w:
                m |= 1 << pi[p]
            sides.append(m)
        tags = list(tags) if tags is not None else list(range(len(sides)))
        return Wallspace(points, sides, tags)

    @property
    def full_mask(self):
        return (1 << len(self.points)) - 1

    def n_walls(self):
        return len(self.sides)

    def side_sets(self, i):
        s = self.sides[i]
        return (self._unmask(s), self._unmask(self.full_mask ^ s))

    def _unmask(self, m):
        return frozenset(p for p in self.points if m >> self._pindex[p] & 1)

    def transverse(self, i, j) -> bool:
        a, b = self.sides[i], self.sides[j]
        fa, fb = self.full_mask ^ a, self.full_mask ^ b
        return bool(a & b) and bool(a & fb) and bool(fa & b) and bool(fa & fb)

    def point_orientation(self, p):
        """The 0-cube realized by a point: per wall, the side containing it."""
        bit = 1 << self._pindex[p]
        return tuple(1 if self.sides[i] & bit else 0
                     for i in range(len(self.sides)))

    def to_json(self) -> str:
        return json.dumps({
            "points": [str(p) for p in self.points],
            "walls": [sorted(self._pindex[p] for p in self.side_sets(i)[0])
                      for i in range(len(self.sides))],
        })


def hyperplane_wallspace(ball: CubeComplexBall, margin: int = 1) -> Wallspace:
    """The wallspace of a ball's own non-truncated hyperplanes.

    Points are the margin-interior vertices; walls are the hyperplane sides
    restricted to them, tagged by the hyperplane direction.
    """
    from .cube_complex import hyperplanes

    pts = [v for v in ball.vertex_ids if ball.depth[v] >= margin]
    ptset = set(pts)
    walls = []
    tags = []
    for h in hyperplanes(ball):
        if h.truncated:
            continue
        a = h.sides[0] & ptset
        b = h.sides[1] & ptset
        if a and b:
            walls.append(a)
            tags.append(h.direction)
    return Wallspace.make(pts, walls, tags)


# ---------------------------------------------------------------------------
# the dual cube complex
# ---------------------------------------------------------------------------

def dual_cube_complex(ws: Wallspace, cap: int = 1 << 20) -> CubeComplexBall:
    """All consistent orientations, discovered by BFS wall flips.

    Vertex ids are 'c<bits>' strings over the wall choices (bit i set means
    the stored side of wall i).  Edge labels are the wall tags.
    """
    n = ws.n_walls()
    if not ws.points:
        raise ValueError("empty wallspace")
    masks = []
    for i in range(n):
        masks.append((ws.sides[i], ws.full_mask ^ ws.sides[i]))

    def chosen(state, i):
        return masks[i][0] if state >> i & 1 else masks[i][1]

    def consistent_after_flip(state, i):
        side = masks[i][1] if state >> i & 1 else masks[i][0]
        for j in range(n):
            if j != i and not side & chosen(state, j):
                return False
        return True

    start = 0
    p0 = ws.points[0]
    for i in range(n):
        if ws.sides[i] & (1 << ws._pindex[p0]):
            start |= 1 << i
    seen = {start}
    dq = deque([start])
    edges = []
    while dq:
        state = dq.popleft()
        for i in range(n):
            if not consistent_after_flip(state, i):
                continue
            nxt = state ^ (1 << i)
            edges.append((state, nxt, i))
            if nxt not in seen:
                if len(seen) >= cap:
                    raise MemoryError("orientation enumeration cap exceeded")
                seen.add(nxt)
                dq.append(nxt)
    flippable = {}
    for a, b, i in edges:
        flippable.setdefault(a, set()).add(i)

    def vid(state):
        return f"c{state:0{max(1, n)}b}" if n else "c"

    squares = []
    for state in seen:
        fl = sorted(flippable.get(state, ()))
        for i, j in itertools.combinations(fl, 2):
            s_i, s_j, s_ij = state ^ (1 << i), state ^ (1 << j), \
                state ^ (1 << i) ^ (1 << j)
            if s_ij in seen and (i in flippable.get(s_j, ())) \
               and (j in flippable.get(s_i, ())):
                squares.append((vid(state), vid(s_i), vid(s_ij), vid(s_j)))
    everts = sorted(seen)
    ebody = [(vid(a), vid(b), str(ws.tags[i])) for a, b, i in edges]
    ball = CubeComplexBall.make([vid(s) for s in everts], ebody, squares, None)
    ball._zero_cube_states = {vid(s): s for s in everts}
    ball._wallspace = ws
    return ball


@dataclass(frozen=True)
class ZeroCube:
    """A pairwise-consistent orientation: per wall, the chosen side index
    (1 = the stored side).  The cofinite condition is automatic on finite
    wallspaces."""

    orientation: tuple

    def side(self, i: int) -> int:
        return self.orientation[i]

    def consistent(self, ws: Wallspace) -> bool:
        n = ws.n_walls()
        for i in range(n):
            si = ws.sides[i] if self.orientation[i] else \
                ws.full_mask ^ ws.sides[i]
            for j in range(i + 1, n):
                sj = ws.sides[j] if self.orientation[j] else \
                    ws.full_mask ^ ws.sides[j]
                if not si & sj:
                    return False
        return True


def zero_cubes(dual: CubeComplexBall):
    return dual._zero_cube_states


def zero_cube_of_vertex(dual: CubeComplexBall, vid) -> ZeroCube:
    state = dual._zero_cube_states[vid]
    n = dual._wallspace.n_walls()
    return ZeroCube(tuple(1 if state >> i & 1 else 0 for i in range(n)))


def vertex_of_point(ws: Wallspace, dual: CubeComplexBall, p):
    state = 0
    bit = 1 << ws._pindex[p]
    for i in range(ws.n_walls()):
        if ws.sides[i] & bit:
            state |= 1 << i
    n = ws.n_walls()
    v = f"c{state:0{max(1, n)}b}" if n else "c"
    if v not in dual._zero_cube_states:
        raise KeyError(f"point {p!r} realizes an unseen orientation")
    return v


def _max_transverse_clique(ws: Wallspace):
    n = ws.n_walls()
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if ws.transverse(i, j):
                adj[i].add(j)
                adj[j].add(i)
    best = []

    def grow(current, cands):
        nonlocal best
        if not cands:
            if len(current) > len(best):
                best = list(current)
            return
        if len(current) + len(cands) <= len(best):
            return
        v = max(cands, key=lambda x: len(adj[x] & cands))
        for u in sorted(cands - adj[v]) or [v]:
            grow(current + [u], cands & adj[u])
            cands = cands - {u}
            if len(current) + len(cands) <= len(best):
                return

    grow([], set(range(n)))
    return best, adj


def dual_dimension(ws: Wallspace) -> int:
    """Largest pairwise-transverse wall family; asserted equal to the max
    cube dimension of the dual complex."""
    best, adj = _max_transverse_clique(ws)
    dim = len(best)
    dual = dual_cube_complex(ws)
    assert dim == _max_cube_dimension(ws, dual), \
        "transverse family bound disagrees with the dual's cube dimension"
    return dim


def _flippable_sets(ws: Wallspace, dual: CubeComplexBall):
    states = dual._zero_cube_states
    state_set = set(states.values())
    out = {}
    for v, s in states.items():
        fl = set()
        for i in range(ws.n_walls()):
            if s ^ (1 << i) in state_set and _pair_ok(ws, s, i):
                fl.add(i)
        out[v] = fl
    return out


def _pair_ok(ws, state, i):
    side = (ws.full_mask ^ ws.sides[i]) if state >> i & 1 else ws.sides[i]
    for j in range(ws.n_walls()):
        if j == i:
            continue
        other = ws.sides[j] if state >> j & 1 else ws.full_mask ^ ws.sides[j]
        if not side & other:
            return False
    return True


def _cube_at(ws, states_set, state, walls):
    for bits in range(1 << len(walls)):
        s = state
        for k, i in enumerate(walls):
            if bits >> k & 1:
                s ^= 1 << i
        if s not in states_set:
            return False
    return True


def _max_cube_dimension(ws: Wallspace, dual: CubeComplexBall) -> int:
    states = set(dual._zero_cube_states.values())
    fl = _flippable_sets(ws, dual)
    best = 0
    for v, cand in fl.items():
        s = dual._zero_cube_states[v]
        cand = sorted(cand)
        for r in range(len(cand), best, -1):
            found = False
            for combo in itertools.combinations(cand, r):
                if all(ws.transverse(i, j) for i, j in
                       itertools.combinations(combo, 2)) and \
                   _cube_at(ws, states, s, combo):
                    best = max(best, r)
                    found = True
                    break
            if found:
                break
    return best


def maximal_cubes(ws: Wallspace):
    """Maximal pairwise-transverse families with their cubes in the dual.

    Returns a list of (family, list of cubes); each cube is the frozenset of
    its 0-cube vertex ids.  The correspondence family <-> maximal cube is
    asserted to be a bijection.
    """
    n = ws.n_walls()
    _, adj = _max_transverse_clique(ws)
    families = []

    def bron(R, P, X):
        if not P and not X:
            families.append(frozenset(R))
            return
        for v in sorted(P):
            bron(R | {v}, P & adj[v], X & adj[v])
            P = P - {v}
            X = X | {v}

    bron(set(), set(range(n)), set())
    dual = dual_cube_complex(ws)
    states = set(dual._zero_cube_states.values())
    by_state = {s: v for v, s in dual._zero_cube_states.items()}
    out = []
    used_cubes = set()
    for fam in sorted(families, key=sorted):
        walls = sorted(fam)
        cubes = set()
        for s in states:
            if all(_pair_ok(ws, s, i) and s ^ (1 << i) in states for i in walls) \
               and _cube_at(ws, states, s, walls):
                corner_states = []
                for bits in range(1 << len(walls)):
                    t = s
                    for k, i in enumerate(walls):
                        if bits >> k & 1:
                            t ^= 1 << i
                    corner_states.append(t)
                cubes.add(frozenset(by_state[t] for t in corner_states))
        cubes = {c for c in cubes if c not in used_cubes}
        if len(cubes) != 1:
            raise AssertionError(
                f"family {walls} supports {len(cubes)} maximal cubes")
        used_cubes |= cubes
        out.append((tuple(walls), sorted(next(iter(cubes)))))
    return out


# ---------------------------------------------------------------------------
# branched lines
# ---------------------------------------------------------------------------

@dataclass
class BranchedLine:
    """A line over a window of integers with whisker tips attached.

    tips[m] lists the tip ids attached at base integer m; when a base point
    has no whiskers it is itself a tip (valence 2).
    """

    window: tuple                # (lo, hi) inclusive base range
    tips: dict                   # base int -> tuple of tip ids

    def branching_number(self) -> int:
        worst = 2
        for m in range(self.window[0], self.window[1] + 1):
            k = len(self.tips.get(m, ()))
            if k:
                worst = max(worst, 2 + k)
        return worst

    def tip_list(self):
        out = []
        for m in range(self.window[0], self.window[1] + 1):
            ts = self.tips.get(m, ())
            if ts:
                out.extend((m, t) for t in ts)
            else:
                out.append((m, None))
        return out

    def wall_sides_on_tips(self):
        """Walls of the tip set from the edges of the branched line.

        Line edge (m, m+1) separates tips by base <= m; a whisker edge cuts
        off its single tip.  Returns a list of (tag, side set of tips).
        """
        tips = self.tip_list()
        walls = []
        lo, hi = self.window
        for m in range(lo, hi):
            side = frozenset(t for t in tips if t[0] <= m)
            walls.append((("cut", m), side))
        for m, t in tips:
            if t is not None:
                walls.append((("tip", m, t), frozenset([(m, t)])))
        return walls

    def as_complex(self) -> CubeComplexBall:
        lo, hi = self.window
        verts = [("b", m) for m in range(lo, hi + 1)]
        edges = [(("b", m), ("b", m + 1), "line") for m in range(lo, hi)]
        for m in range(lo, hi + 1):
            for t in self.tips.get(m, ()):
                verts.append(("t", m, t))
                edges.append((("b", m), ("t", m, t), "whisker"))
        depth = {v: (min(v[1] - lo, hi - v[1]) + 1 if v[0] == "b"
                     else min(v[1] - lo, hi - v[1])) for v in verts}
        return CubeComplexBall.make(verts, edges, [], depth)


# ---------------------------------------------------------------------------
# the invariant wallspace of a flat-preserving action
# ---------------------------------------------------------------------------

@dataclass
class InvariantWallspace:
    wallspace: Wallspace
    graph: DefiningGraph
    classes: dict                # class id -> ParallelClass
    branched_lines: dict         # class id -> BranchedLine
    heights: dict                # class id -> {chamber word: height}
    block_maps: dict             # class id -> {height: block}
    wall_window: int
    domain: tuple                # the height-box hull: faithful points

    def point_window(self):
        return self.wallspace.points


def group_ball(g: DefiningGraph, radius: int):
    """All group elements of word length <= radius (BFS, no complex)."""
    from .raag_geometry import mul

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
    return sorted(elements, key=lambda w: (len(w), w))


def invariant_wallspace(g: DefiningGraph, action_tables, resolutions,
                        wall_window: int = 1, class_reach: int = 0,
                        points_radius: int | None = None,
                        orbit_depth: int = 6) -> InvariantWallspace:
    """The H-invariant wallspace of v-walls over a height band.

    Classes are those of geodesics through the ball of radius `class_reach`;
    each contributes block-cut walls (and tip walls where the resolution's
    block map is 2-to-1) for heights within `wall_window` of zero.  The
    points carry a larger ball so that neighbouring quadrants stay inhabited;
    walls are closed under the action and deduplicated by partition.

    `resolutions` maps an orbit-representative class id to a block map
    {height: block}; identity tables give line resolutions.
    """
    from .blowup import class_orbit_word
    from .raag_geometry import class_of_geodesic, height_of

    if points_radius is None:
        points_radius = 2 * (wall_window + 1)
    points = group_ball(g, points_radius)
    pset = set(points)
    classes = {}
    for p in group_ball(g, class_reach):
        for v in g.vertices:
            pc = class_of_geodesic(g, p, v)
            classes.setdefault(pc.id, pc)
    walls = []
    tags = []
    lines = {}
    heights_of = {}
    block_maps = {}
    rep_ids = set(resolutions)
    band = range(-wall_window, wall_window + 1)
    for cid, pc in sorted(classes.items()):
        word, img = class_orbit_word(g, action_tables, pc, rep_ids,
                                     max_depth=orbit_depth) \
            if action_tables is not None else ((), pc)
        if img.id not in resolutions:
            raise KeyError(f"no resolution for orbit of {cid}")
        f_img = resolutions[img.id]
        heights = {p: height_of(g, pc, p) for p in points}
        fmap = {}
        for n in band:
            # transport the height through the chosen word, then collapse
            if action_tables is not None and word:
                from .raag_geometry import flat_element
                from .building import residue

                own = residue(g, pc.rep, (pc.direction,))
                chamber = flat_element(g, own.base, {pc.direction: n})
                moved = action_tables.apply_word(word, chamber)
                n_img = height_of(g, img, moved)
            else:
                n_img = n
            if n_img not in f_img:
                raise KeyError(f"resolution window too small for {cid}")
            fmap[n] = f_img[n_img]
        heights_of[cid] = heights
        block_maps[cid] = fmap
        blocks = {}
        for n in band:
            blocks.setdefault(fmap[n], set()).add(n)
        lo, hi = min(blocks), max(blocks)
        tips = {m: tuple(sorted(ns)) for m, ns in blocks.items()
                if len(ns) >= 2}
        lines[cid] = BranchedLine((lo, hi), tips)
        for m in range(lo, hi):
            # out-of-band heights clamp to the band rim; block maps are
            # monotone so the side assignment matches the infinite wall
            side = frozenset(p for p in points
                             if fmap[_clamp(heights[p], band)] <= m)
            walls.append(side)
            tags.append((cid, "cut", m))
        for m, ns in sorted(tips.items()):
            for n in ns:
                side = frozenset(p for p in points if heights[p] == n)
                walls.append(side)
                tags.append((cid, "tip", m, n))
    # orbit closure at the tag level: transport each wall to the image
    # class and re-derive its side from that class's heights (pushing raw
    # point sets would distort the partition at the window rim)
    state = {"classes": classes, "heights": heights_of, "blocks": block_maps}
    if action_tables is not None:
        from .raag_geometry import flat_element
        from .building import residue as mk_residue

        def ensure_class(pc):
            if pc.id in state["classes"]:
                return
            word, img = class_orbit_word(g, action_tables, pc, rep_ids,
                                         max_depth=orbit_depth)
            f_img = resolutions[img.id]
            hs = {p: height_of(g, pc, p) for p in points}
            attained = sorted(set(hs.values()))
            fmap2 = {}
            own = mk_residue(g, pc.rep, (pc.direction,))
            for n in attained:
                if action_tables is not None and word:
                    chamber = flat_element(g, own.base, {pc.direction: n})
                    n_img = height_of(g, img, action_tables.apply_word(
                        word, chamber))
                else:
                    n_img = n
                if n_img not in f_img:
                    raise KeyError(f"resolution window too small for {pc.id}")
                fmap2[n] = f_img[n_img]
            state["classes"][pc.id] = pc
            state["heights"][pc.id] = hs
            state["blocks"][pc.id] = fmap2

        from .building import image_class

        frontier = list(tags)
        seen_tags = set(tags)
        guard = 0
        while frontier and guard < 10000:
            guard += 1
            nxt = []
            for tag in frontier:
                cid = tag[0]
                pc = state["classes"][cid]
                own = mk_residue(g, pc.rep, (pc.direction,))
                for name in action_tables.generators:
                    try:
                        img_pc = image_class(g, action_tables, name, pc)
                    except Exception:
                        continue
                    try:
                        ensure_class(img_pc)
                    except (KeyError, Exception):
                        continue
                    hs2 = state["heights"][img_pc.id]
                    f2 = state["blocks"][img_pc.id]
                    if tag[1] == "tip":
                        n = tag[3]
                        chamber = flat_element(g, own.base, {pc.direction: n})
                        try:
                            moved = action_tables.apply(name, chamber)
                        except Exception:
                            continue
                        n2 = height_of(g, img_pc, moved)
                        m2 = f2.get(n2)
                        if m2 is None:
                            continue
                        new_tag = (img_pc.id, "tip", m2, n2)
                        side = frozenset(p for p in points if hs2[p] == n2)
                    else:
                        m = tag[2]
                        # transport the block cut through two sample levels
                        pairs = []
                        fmap0 = state["blocks"][cid]
                        for n, blk in sorted(fmap0.items()):
                            chamber = flat_element(g, own.base,
                                                   {pc.direction: n})
                            try:
                                moved = action_tables.apply(name, chamber)
                            except Exception:
                                continue
                            n2 = height_of(g, img_pc, moved)
                            if n2 in f2:
                                pairs.append((blk, f2[n2]))
                        pairs = sorted(set(pairs))
                        if len(pairs) < 2:
                            continue
                        (a1, b1), (a2, b2) = pairs[0], pairs[-1]
                        if abs(b2 - b1) != abs(a2 - a1) or a2 == a1:
                            continue
                        sgn = 1 if b2 - b1 > 0 else -1
                        off = b1 - sgn * a1
                        m2 = sgn * m + off if sgn == 1 else sgn * (m + 1) + off
                        new_tag = (img_pc.id, "cut", m2)
                        attained = sorted(set(f2.values()))
                        if m2 < min(attained) or m2 >= max(attained):
                            continue
                        def blk_of(p):
                            h = hs2[p]
                            ks = sorted(f2)
                            hh = max(ks[0], min(ks[-1], h))
                            return f2[hh]
                        side = frozenset(p for p in points if blk_of(p) <= m2)
                    if new_tag not in seen_tags and side and \
                       len(side) < len(points):
                        seen_tags.add(new_tag)
                        walls.append(side)
                        tags.append(new_tag)
                        nxt.append(new_tag)
            frontier = nxt
    uniq_sides, uniq_tags, seen = [], [], set()
    for w, tag in zip(walls, tags):
        key = min(frozenset(w), frozenset(pset - set(w)), key=sorted)
        if w and key not in seen and len(w) < len(points):
            seen.add(key)
            uniq_sides.append(w)
            uniq_tags.append(tag)
    ws = Wallspace.make(points, uniq_sides, uniq_tags)
    classes = state["classes"]
    heights_of = state["heights"]
    block_maps = state["blocks"]
    domain = tuple(p for p in points
                   if all(-wall_window <= heights_of[cid][p] <= wall_window
                          for cid in classes))
    return InvariantWallspace(ws, g, classes, lines, heights_of, block_maps,
                              wall_window, domain)


def _clamp(n, band):
    return max(band[0], min(band[-1], n))


def direction_labeled_dual(iws: InvariantWallspace,
                           dual: CubeComplexBall | None = None):
    """The dual with each edge relabeled by its wall's class direction."""
    from .cube_complex import relabel_edges

    if dual is None:
        dual = dual_cube_complex(iws.wallspace)
    tag_dir = {str(tag): iws.classes[tag[0]].direction
               for tag in iws.wallspace.tags}
    return relabel_edges(dual, lambda lab: tag_dir[lab])


def transversality(iws: InvariantWallspace, i: int, j: int) -> bool:
    """Set transversality of tagged walls; asserted equivalent to adjacency
    of the class directions in the extension complex."""
    from .raag_geometry import extension_adjacent

    ws = iws.wallspace
    got = ws.transverse(i, j)
    cid1, cid2 = ws.tags[i][0], ws.tags[j][0]
    if cid1 == cid2:
        expected = False
    else:
        expected = extension_adjacent(iws.graph, iws.classes[cid1],
                                      iws.classes[cid2])
    if got != expected:
        raise AssertionError(
            f"walls {ws.tags[i]} / {ws.tags[j]}: transversality {got} but "
            f"class adjacency {expected}")
    return got


def phi_map(iws: InvariantWallspace, dual: CubeComplexBall | None = None):
    """Chambers -> dual vertices by their realized orientations.

    The map is defined on the faithful domain (the height-box hull, where
    the banded walls still separate); injectivity there is asserted and the
    image density is measured by BFS over the dual.
    """
    ws = iws.wallspace
    if dual is None:
        dual = dual_cube_complex(ws)
    vmap = {}
    for p in iws.domain:
        vmap[p] = vertex_of_point(ws, dual, p)
    if len(set(vmap.values())) != len(vmap):
        raise AssertionError("phi is not injective on the window")
    image = set(vmap.values())
    dist = {v: 0 for v in image}
    dq = deque(image)
    while dq:
        x = dq.popleft()
        for y in dual.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                dq.append(y)
    density = max(dist.values()) if dist else 0
    # distortion of word metric vs dual metric on a sample of pairs
    worst = 1.0
    additive = 0
    pts = list(iws.domain)
    from .raag_geometry import inv, mul

    for a in pts[: min(len(pts), 12)]:
        for b in pts[: min(len(pts), 12)]:
            if a == b:
                continue
            dw = len(mul(iws.graph, inv(a), b))
            dc = dual.distance(vmap[a], vmap[b])
            if dw and dc:
                worst = max(worst, dw / dc, dc / dw)
            additive = max(additive, abs(dc - dw))
    return vmap, {"dual": dual, "density": density, "distortion": worst,
                  "additive": additive}


def branched_flat_embed(iws: InvariantWallspace, class_ids,
                        dual: CubeComplexBall | None = None):
    """Embed the dual of the walls tagged by a maximal flat's classes.

    Walls outside the family are oriented to the side containing the flat's
    vertex set; the embedding of 0-cubes is asserted consistent, and its
    image convex in the full dual.
    """
    ws = iws.wallspace
    if dual is None:
        dual = dual_cube_complex(ws)
    sel = [i for i in range(ws.n_walls()) if ws.tags[i][0] in class_ids]
    if not sel:
        raise ValueError("no walls carry the requested classes")
    flat_pts = _flat_points(iws, class_ids)
    if not flat_pts:
        raise ValueError("flat does not meet the window")
    fixed = {}
    for i in range(ws.n_walls()):
        if i in sel:
            continue
        bit0 = all(ws.sides[i] >> ws._pindex[p] & 1 for p in flat_pts)
        bit1 = all(not (ws.sides[i] >> ws._pindex[p] & 1) for p in flat_pts)
        if not bit0 and not bit1:
            raise AssertionError(
                f"flat is split by outside wall {ws.tags[i]}")
        fixed[i] = 1 if bit0 else 0
    sub = Wallspace([p for p in ws.points],
                    [ws.sides[i] for i in sel], [ws.tags[i] for i in sel])
    sub_dual = dual_cube_complex(sub)
    embedded = set()
    for v, s in sub_dual._zero_cube_states.items():
        full_state = 0
        for k, i in enumerate(sel):
            if s >> k & 1:
                full_state |= 1 << i
        for i, bit in fixed.items():
            if bit:
                full_state |= 1 << i
        n = ws.n_walls()
        target = f"c{full_state:0{max(1, n)}b}"
        if target not in dual._zero_cube_states:
            raise AssertionError("embedded orientation is not a 0-cube")
        embedded.add(target)
    if not is_convex(dual, embedded):
        raise AssertionError("embedded branched flat is not convex")
    return sub_dual, embedded, dual


def _flat_points(iws: InvariantWallspace, class_ids):
    """Window vertices of the standard flat spanned by the given classes."""
    from .raag_geometry import coset_member

    g = iws.graph
    pcs = [iws.classes[cid] for cid in class_ids]
    pts = []
    for p in iws.wallspace.points:
        ok = True
        for pc in pcs:
            from .graph_core import orthogonal_complement

            support = (pc.direction,) + orthogonal_complement(g, [pc.direction])
            if not coset_member(g, p, pc.rep, support):
                ok = False
                break
        if not ok:
            continue
        # p lies in every parallel-set; the flat itself is the intersection
        # of the class cosets in the directions of the classes
        pts.append(p)
    if not pts:
        return pts
    base = min(pts, key=len)
    dirs = tuple(sorted({pc.direction for pc in pcs}, key=g.index))
    return [p for p in pts if coset_member(g, p, base, dirs)]
