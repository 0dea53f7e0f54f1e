"""Semiconjugating a quasi-isometric Z-action to an isometric one.

Pipeline: the action's group ball is composed into a finite set of partial
tables; their sup-displacement metric dbar makes the action isometric; the
Rips 2-complex of (Z, dbar) is a thickened line; a family of disjoint,
invariant, essential tracks cuts it into bounded blocks; collapsing blocks
gives the equivariant block map onto Z with an induced isometric action,
packaged as a branched line with one tip per integer.

Tracks are represented by the vertex bipartitions they induce.  An
essential track crosses each edge of its cut once (triangles meet a
bipartition in 0 or 2 sides, so the normal-coordinate conditions hold
automatically), and a minimum-weight essential track can be found among
cuts; minimality is certified independently by max-flow.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .cube_complex import TruncationError
from .wallspace_dual import BranchedLine


class ActionError(ValueError):
    pass


@dataclass
class ZActionSpec:
    """Generator tables of an action on a window of Z by quasi-isometries."""

    window: int
    L: float
    A: float
    generators: dict             # name -> {int: int}, partial on the window
    inverses: dict               # name -> name of the inverse table
    relations: list = field(default_factory=list)

    def validate(self, margin: int = 2):
        for name, t in self.generators.items():
            inv_name = self.inverses.get(name)
            if inv_name is None or inv_name not in self.generators:
                raise ActionError(f"generator {name!r} lacks an inverse table")
            ti = self.generators[inv_name]
            for x, y in t.items():
                if y in ti and ti[y] != x:
                    raise ActionError(f"{name!r} and {inv_name!r} disagree")
            vals = list(t.values())
            if len(set(vals)) != len(vals):
                raise ActionError(f"table {name!r} is not injective")
            for x in t:
                for y in t:
                    if x < y:
                        d, di = y - x, abs(t[y] - t[x])
                        if di > self.L * d + self.A or \
                           di < d / self.L - self.A:
                            raise ActionError(
                                f"table {name!r} breaks the ({self.L},{self.A}) "
                                f"bounds at {x},{y}")
        for rel in self.relations:
            t = self.compose(rel)
            for x, y in t.items():
                if abs(x - y) > self.A + margin:
                    raise ActionError(f"relation {rel} moves {x} to {y}")
        return True

    def compose(self, names):
        """Table of a word in the generators (rightmost acts first)."""
        t = {n: n for n in range(-self.window, self.window + 1)}
        for name in reversed(list(names)):
            g = self.generators[name]
            t = {x: g[y] for x, y in t.items() if y in g}
        return t

    @staticmethod
    def from_json(text: str) -> "ZActionSpec":
        data = json.loads(text)
        gens = {name: {int(k): int(v) for k, v in t.items()}
                for name, t in data["generators"].items()}
        inverses = data.get("inverses")
        if inverses is None:
            inverses = {}
            for name, t in list(gens.items()):
                inv_name = f"{name}_inv"
                if inv_name not in gens:
                    gens[inv_name] = {v: k for k, v in t.items()}
                inverses[name] = inv_name
                inverses[inv_name] = name
        return ZActionSpec(int(data["window"]), float(data["L"]),
                           float(data["A"]), gens, inverses,
                           [list(r) for r in data.get("relations", [])])

    def to_json(self) -> str:
        return json.dumps({
            "window": self.window, "L": self.L, "A": self.A,
            "generators": {n: {str(k): v for k, v in t.items()}
                           for n, t in self.generators.items()},
            "inverses": dict(self.inverses),
            "relations": [list(r) for r in self.relations],
        })


def two_flipping_spec(window: int) -> ZActionSpec:
    """a swaps 2n <-> 2n+1, b translates by 2 (H = Z/2 + Z)."""
    a = {}
    for n in range(-window, window + 1):
        m = n + 1 if n % 2 == 0 else n - 1
        if abs(m) <= window:
            a[n] = m
    b = {n: n + 2 for n in range(-window, window - 1)}
    b_inv = {n: n - 2 for n in range(-window + 2, window + 1)}
    return ZActionSpec(window, 3, 2,
                       {"a": a, "b": b, "b_inv": b_inv},
                       {"a": "a", "b": "b_inv", "b_inv": "b"},
                       relations=[["a", "a"],
                                  ["a", "b", "a", "b_inv"]])


def translation_spec(window: int, step: int = 1) -> ZActionSpec:
    b = {n: n + step for n in range(-window, window + 1) if abs(n + step) <= window}
    bi = {n: n - step for n in range(-window, window + 1) if abs(n - step) <= window}
    return ZActionSpec(window, 1, 0, {"b": b, "b_inv": bi},
                       {"b": "b_inv", "b_inv": "b"})


def identity_spec(window: int) -> ZActionSpec:
    e = {n: n for n in range(-window, window + 1)}
    return ZActionSpec(window, 1, 0, {"e": dict(e)}, {"e": "e"})


def reflection_spec(window: int) -> ZActionSpec:
    r = {n: -n for n in range(-window, window + 1)}
    return ZActionSpec(window, 1, 0, {"r": dict(r)}, {"r": "r"},
                       relations=[["r", "r"]])


# ---------------------------------------------------------------------------
# the invariant metric
# ---------------------------------------------------------------------------

def group_tables(spec: ZActionSpec, B: int):
    """Distinct composition tables of words in the generators, length <= B."""
    ident = tuple((n, n) for n in range(-spec.window, spec.window + 1))
    seen = {ident: {n: n for n in range(-spec.window, spec.window + 1)}}
    frontier = [seen[ident]]
    for _ in range(B):
        nxt = []
        for t in frontier:
            for name, g in spec.generators.items():
                t2 = {x: g[y] for x, y in t.items() if y in g}
                if not t2:
                    raise TruncationError(
                        f"window exhausted before depth {B} "
                        f"(a composition through {name!r} has empty domain)")
                key = tuple(sorted(t2.items()))
                if key not in seen:
                    seen[key] = t2
                    nxt.append(t2)
        frontier = nxt
    return list(seen.values())


def dbar(spec: ZActionSpec, B: int = 8, check_invariance: bool = True):
    """Sup displacement metric over group elements of word length <= B."""
    tables = group_tables(spec, B)
    pts = list(range(-spec.window, spec.window + 1))
    metric = {}
    for i, x in enumerate(pts):
        for y in pts[i + 1 :]:
            best = y - x
            for t in tables:
                if x in t and y in t:
                    d = abs(t[x] - t[y])
                    if d > best:
                        best = d
            metric[(x, y)] = best
    if check_invariance:
        margin = int(spec.L * B + spec.A) + 2
        lim = spec.window - margin
        for name, g in spec.generators.items():
            for (x, y), d in metric.items():
                if abs(x) > lim or abs(y) > lim:
                    continue
                if x in g and y in g:
                    gx, gy = sorted((g[x], g[y]))
                    if abs(gx) <= lim and abs(gy) <= lim:
                        if metric[(gx, gy)] != d:
                            raise TruncationError(
                                f"dbar not {name!r}-invariant at ({x},{y}); "
                                "raise B or the window")
    return metric


def dbar_stable(spec: ZActionSpec, B: int, margin: int | None = None) -> bool:
    """Has the truncated sup stabilized between depths B and B+1?"""
    m1 = dbar(spec, B, check_invariance=False)
    m2 = dbar(spec, B + 1, check_invariance=False)
    margin = margin if margin is not None else int(spec.L * (B + 1) + spec.A) + 2
    lim = spec.window - margin
    return all(m1[(x, y)] == m2[(x, y)] for (x, y) in m1
               if abs(x) <= lim and abs(y) <= lim)


# ---------------------------------------------------------------------------
# the Rips 2-complex
# ---------------------------------------------------------------------------

@dataclass
class Rips2Complex:
    spec: ZActionSpec
    radius: float                # the Rips parameter
    vertices: list
    edges: set                   # frozenset pairs
    triangles: list              # sorted triples
    metric: dict                 # dbar on sorted pairs

    def d(self, x, y):
        if x == y:
            return 0
        a, b = min(x, y), max(x, y)
        return self.metric[(a, b)]

    def edges_at(self, x):
        return [e for e in self.edges if x in e]

    def triangles_of_edge(self, e):
        return [t for t in self.triangles if set(e) <= set(t)]


def rips2(spec: ZActionSpec, B: int = 8, radius: float | None = None) -> Rips2Complex:
    """2-skeleton of the Rips complex of (Z, dbar) at the given radius."""
    if radius is None:
        radius = 3 * (spec.L + spec.A)
    metric = dbar(spec, B)
    pts = list(range(-spec.window, spec.window + 1))
    edges = set()
    for (x, y), d in metric.items():
        if d <= radius:
            edges.add(frozenset((x, y)))
    adj = {x: set() for x in pts}
    for e in edges:
        x, y = tuple(e)
        adj[x].add(y)
        adj[y].add(x)
    triangles = []
    for x in pts:
        for y in sorted(adj[x]):
            if y <= x:
                continue
            for z in sorted(adj[x] & adj[y]):
                if z > y:
                    triangles.append((x, y, z))
    # connectivity
    seen = {pts[0]}
    dq = deque([pts[0]])
    while dq:
        u = dq.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                dq.append(w)
    if len(seen) != len(pts):
        raise ActionError("Rips complex disconnected; the radius is too small")
    K = Rips2Complex(spec, radius, pts, edges, triangles, metric)
    _check_two_ended(K, adj)
    return K


def _check_two_ended(K: Rips2Complex, adj):
    """Removing a middle block must leave the two rim tails separated."""
    span = edge_span(K)
    lo, hi = min(K.vertices), max(K.vertices)
    if hi - lo <= 4 * span:
        return
    middle = {x for x in K.vertices if abs(x) <= span}
    comp = {}
    for start in (lo, hi):
        seen = {start}
        dq = deque([start])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if w not in middle and w not in seen:
                    seen.add(w)
                    dq.append(w)
        comp[start] = seen
    if comp[lo] & comp[hi]:
        raise ActionError("Rips complex is not two-ended on the interior")


# ---------------------------------------------------------------------------
# tracks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Track:
    """An essential track presented by its vertex bipartition.

    The realized curve crosses each cut edge once; triangle arc counts come
    from the normal-coordinate formulas (every triangle meets the cut in 0
    or 2 sides).
    """

    left: frozenset

    def cut_edges(self, K: Rips2Complex):
        out = []
        for e in K.edges:
            x, y = tuple(e)
            if (x in self.left) != (y in self.left):
                out.append(e)
        return frozenset(out)

    def weight(self, K: Rips2Complex) -> int:
        return len(self.cut_edges(K))

    def triangle_matchings(self, K: Rips2Complex):
        """Per-triangle arc counts between side pairs (normal coordinates)."""
        cut = self.cut_edges(K)
        out = {}
        for t in K.triangles:
            x, y, z = t
            sides = [frozenset((x, y)), frozenset((x, z)), frozenset((y, z))]
            w = [1 if s in cut else 0 for s in sides]
            # corners opposite to each side
            a, b, c = w
            arcs = {("xy", "xz"): (a + b - c) // 2,
                    ("xy", "yz"): (a + c - b) // 2,
                    ("xz", "yz"): (b + c - a) // 2}
            if any(v < 0 for v in arcs.values()) or (a + b + c) % 2:
                raise AssertionError(f"invalid normal data on triangle {t}")
            if a + b + c:
                out[t] = arcs
        return out

    def connected(self, K: Rips2Complex) -> bool:
        cut = list(self.cut_edges(K))
        if not cut:
            return False
        adj = {e: set() for e in cut}
        cutset = set(cut)
        for t in K.triangles:
            x, y, z = t
            sides = [s for s in (frozenset((x, y)), frozenset((x, z)),
                                 frozenset((y, z))) if s in cutset]
            for e1, e2 in itertools.combinations(sides, 2):
                adj[e1].add(e2)
                adj[e2].add(e1)
        seen = {cut[0]}
        dq = deque([cut[0]])
        while dq:
            e = dq.popleft()
            for f in adj[e]:
                if f not in seen:
                    seen.add(f)
                    dq.append(f)
        return len(seen) == len(cut)

    def essential(self, K: Rips2Complex) -> bool:
        """Both complement pieces contain a full rim tail of the window.

        Requiring whole tails (of length the longest edge span) rules out
        the spurious cheap cuts that clip a corner off the truncation.
        """
        lo, hi = min(K.vertices), max(K.vertices)
        span = edge_span(K)
        left = self.left
        right = set(K.vertices) - set(left)
        lo_tail = set(range(lo, lo + span + 1))
        hi_tail = set(range(hi - span, hi + 1))
        return (lo_tail <= left and hi_tail <= right) or \
            (lo_tail <= right and hi_tail <= left)

    def is_valid(self, K: Rips2Complex) -> bool:
        try:
            self.triangle_matchings(K)
        except AssertionError:
            return False
        return self.connected(K) and self.essential(K)


def edge_span(K: Rips2Complex) -> int:
    return max((abs(x - y) for e in K.edges for x, y in [tuple(e)]), default=1)


def _min_cut_weight(K: Rips2Complex, left_seed, right_seed) -> int:
    """Max-flow certificate for the minimal cut weight (Edmonds-Karp)."""
    cap = {}
    for e in K.edges:
        x, y = tuple(e)
        cap[(x, y)] = 1
        cap[(y, x)] = 1
    SRC, SNK = "S", "T"
    for s in left_seed:
        cap[(SRC, s)] = 1 << 30
    for t in right_seed:
        cap[(t, SNK)] = 1 << 30
    adj = {}
    for (a, b) in cap:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    flow = 0
    while True:
        parent = {SRC: None}
        dq = deque([SRC])
        while dq and SNK not in parent:
            u = dq.popleft()
            for w in adj.get(u, ()):
                if w not in parent and cap.get((u, w), 0) > 0:
                    parent[w] = u
                    dq.append(w)
        if SNK not in parent:
            return flow
        path = []
        node = SNK
        while parent[node] is not None:
            path.append((parent[node], node))
            node = parent[node]
        push = min(cap[(a, b)] for a, b in path)
        for a, b in path:
            cap[(a, b)] -= push
            cap[(b, a)] = cap.get((b, a), 0) + push
        flow += push


def min_essential_track(K: Rips2Complex, strip: int | None = None,
                        w_max: int | None = None) -> Track:
    """Least-weight essential track, ties broken by canonical cut order.

    Candidate bipartitions differ from a position cut only inside a sliding
    strip; the weight of the winner is certified by an independent max-flow
    minimum-cut computation and the strip is widened if they ever disagree.
    """
    spec = K.spec
    if w_max is None:
        w_max = int(4 * (spec.L * K.radius + spec.A))
    lo, hi = min(K.vertices), max(K.vertices)
    seed = max(edge_span(K), 1)
    certificate = _min_cut_weight(
        K, [v for v in K.vertices if v <= lo + seed],
        [v for v in K.vertices if v >= hi - seed])
    strip0 = strip if strip is not None else min(int(K.radius), 4)
    s = strip0
    while True:
        best = None
        best_key = None
        for theta in range(lo + seed, hi - seed + 1):
            lo_fix = [v for v in K.vertices if v < theta - s]
            strip_verts = [v for v in K.vertices
                           if theta - s <= v <= theta + s]
            for bits in range(1 << len(strip_verts)):
                left = set(lo_fix)
                for k, v in enumerate(strip_verts):
                    if bits >> k & 1:
                        left.add(v)
                tr = Track(frozenset(left))
                cut = tr.cut_edges(K)
                if not cut or len(cut) > min(w_max, certificate):
                    continue
                if len(cut) < certificate:
                    continue
                if not tr.essential(K) or not tr.connected(K):
                    continue
                key = (len(cut), sorted(tuple(sorted(e)) for e in cut))
                if best is None or key < best_key:
                    best, best_key = tr, key
        if best is not None:
            return best
        s += 2
        if s > int(K.radius) * 2 + 4:
            raise ActionError(
                f"no essential track of weight {certificate} found "
                f"(w_max={w_max})")


def _apply_table_to_track(K: Rips2Complex, t, track: Track):
    """Image bipartition under a group table, None where the window clips."""
    img_left = set()
    img_right = set()
    for x in K.vertices:
        if x in t:
            (img_left if x in track.left else img_right).add(t[x])
    if not img_left or not img_right:
        return None
    # extend to the full window by the dominant side at each rim
    lo, hi = min(K.vertices), max(K.vertices)
    left_has_lo = min(img_left) < min(img_right)
    full_left = set(img_left)
    for v in K.vertices:
        if v not in img_left and v not in img_right:
            if (v < min(img_right)) if left_has_lo else (v > max(img_right)):
                full_left.add(v)
    return Track(frozenset(full_left))


def _uncross(tracks, K: Rips2Complex):
    """Replace crossing bipartition pairs by their meet and join."""
    tracks = list(dict.fromkeys(tracks))
    allv = set(K.vertices)
    changed = True
    while changed:
        changed = False
        for i in range(len(tracks)):
            for j in range(i + 1, len(tracks)):
                L1 = set(tracks[i].left)
                L2 = set(tracks[j].left)
                # orient both to contain the window minimum
                lo = min(K.vertices)
                if lo not in L1:
                    L1 = allv - L1
                if lo not in L2:
                    L2 = allv - L2
                if L1 <= L2 or L2 <= L1:
                    continue
                meet, join = L1 & L2, L1 | L2
                cand = []
                for Lc in (meet, join):
                    if Lc and Lc != allv:
                        cand.append(Track(frozenset(Lc)))
                old_w = tracks[i].weight(K) + tracks[j].weight(K)
                new_w = sum(c.weight(K) for c in cand)
                if new_w > old_w:
                    raise AssertionError("uncrossing increased total weight")
                tracks[i : j + 1] = [t for k, t in enumerate(tracks)
                                     if i <= k <= j and k not in (i, j)] + cand
                changed = True
                break
            if changed:
                break
    return list(dict.fromkeys(tracks))


def _orbit_closure(spec: ZActionSpec, K: Rips2Complex, seeds):
    """Close a track set under the generators, inside the window."""
    family = list(dict.fromkeys(seeds))
    seen = {tr.left for tr in family}
    frontier = list(family)
    guard = 0
    while frontier and guard < 16 * len(K.vertices):
        guard += 1
        nxt = []
        for tr in frontier:
            for name in spec.generators:
                g = spec.generators[name]
                img = _apply_table_to_track(K, g, tr)
                if img is None or not img.essential(K) or not img.connected(K):
                    continue
                if img.left not in seen:
                    seen.add(img.left)
                    family.append(img)
                    nxt.append(img)
        frontier = nxt
    return family


def track_family(spec: ZActionSpec, K: Rips2Complex, B: int = 4,
                 D1: float | None = None):
    """Disjoint invariant family: the window orbit of a minimal track,
    greedily filled until every complementary block has small diameter."""
    base = min_essential_track(K)
    if D1 is None:
        D1 = 2 * base.weight(K) + 5 * K.radius
    family = _orbit_closure(spec, K, [base])
    family = _uncross(family, K)
    family = [tr for tr in family if tr.essential(K) and tr.connected(K)]
    # greedy fill of wide blocks
    lo, hi = min(K.vertices), max(K.vertices)
    guard = 0
    while guard < 4 * len(K.vertices):
        guard += 1
        blocks = _blocks_of(family, K)
        wide = [b for b in blocks if len(b) > D1
                and min(b) > lo + K.radius and max(b) < hi - K.radius]
        if not wide:
            break
        b = max(wide, key=len)
        mid = sorted(b)[len(b) // 2]
        cut = Track(frozenset(v for v in K.vertices if v <= mid))
        if not cut.connected(K) or not cut.essential(K):
            break
        family = _uncross(_orbit_closure(spec, K, family + [cut]), K)
        family = [tr for tr in family if tr.essential(K) and tr.connected(K)]
    return sorted(set(family), key=lambda tr: len(tr.left))


def _blocks_of(family, K):
    def f(x):
        return sum(1 for tr in family if x not in tr.left)

    blocks = {}
    for x in K.vertices:
        blocks.setdefault(f(x), []).append(x)
    return list(blocks.values())


# ---------------------------------------------------------------------------
# collapse
# ---------------------------------------------------------------------------

@dataclass
class SemiconjugacyResult:
    spec: ZActionSpec
    block_map: dict              # window int -> block int
    isometric_action: dict       # generator name -> (sign, offset)
    branched_line: BranchedLine
    tip_map: dict                # window int -> (block, tip id or None)
    measured: dict

    def block(self, x):
        return self.block_map[x]


def collapse(spec: ZActionSpec, family, K: Rips2Complex,
             margin: int | None = None) -> SemiconjugacyResult:
    """Collapse complementary blocks to points; the induced generator maps
    must be isometries of the block line, with exact equivariance on the
    interior."""
    lo, hi = min(K.vertices), max(K.vertices)
    allv = set(K.vertices)
    oriented = []
    for tr in family:
        L = set(tr.left)
        if lo not in L:
            L = allv - L
        oriented.append(frozenset(L))
    oriented = sorted(set(oriented), key=len)

    def f_raw(x):
        return sum(1 for L in oriented if x not in L)

    fmap = {x: f_raw(x) for x in K.vertices}
    if margin is None:
        margin = edge_span(K) + int(K.radius) + 2
    interior = [x for x in K.vertices if lo + margin <= x <= hi - margin]
    iso = {}
    for name, g in spec.generators.items():
        pairs = sorted((fmap[x], fmap[g[x]]) for x in interior if x in g)
        if not pairs:
            raise TruncationError(f"window too small for generator {name!r}")
        ks = sorted({a for a, _ in pairs})
        if len(ks) == 1:
            sign, off = 1, pairs[0][1] - pairs[0][0]
        else:
            (a1, b1), (a2, b2) = pairs[0], pairs[-1]
            if abs(b2 - b1) != abs(a2 - a1):
                raise ActionError(f"{name!r} does not act isometrically on blocks")
            sign = 1 if b2 - b1 == a2 - a1 else -1
            off = b1 - sign * a1
        for a, b in pairs:
            if sign * a + off != b:
                raise ActionError(
                    f"{name!r}: block map not equivariant at block {a}")
        iso[name] = (sign, off)
    for rel in spec.relations:
        # rel = g1 g2 ... acts as g1 after g2 after ...
        sign, off = 1, 0
        for name in reversed(rel):
            s, o = iso[name]
            sign, off = s * sign, s * off + o
        if (sign, off) != (1, 0):
            raise ActionError(f"relation {rel} acts as ({sign},{off}) on blocks")
    # measured quasi-isometry constants of f on the interior
    worst_fiber = max(
        len([x for x in interior if fmap[x] == m])
        for m in {fmap[x] for x in interior})
    stretch = 1.0
    for x in interior[:: max(1, len(interior) // 40)]:
        for y in interior[:: max(1, len(interior) // 40)]:
            if x < y and fmap[y] != fmap[x]:
                stretch = max(stretch, abs(x - y) / abs(fmap[y] - fmap[x]))
    measured = {"L": stretch, "A": float(worst_fiber),
                "blocks": len({fmap[x] for x in interior})}
    # branched line over the interior blocks
    fibers = {}
    for x in interior:
        fibers.setdefault(fmap[x], []).append(x)
    blo, bhi = min(fibers), max(fibers)
    tips = {m: tuple(sorted(xs)) for m, xs in fibers.items() if len(xs) >= 2}
    line = BranchedLine((blo, bhi), tips)
    tip_map = {}
    for x in interior:
        m = fmap[x]
        tip_map[x] = (m, x if len(fibers[m]) >= 2 else None)
    if len(set(tip_map.values())) != len(tip_map):
        raise ActionError("tip map failed to be injective")
    return SemiconjugacyResult(spec, fmap, iso, line, tip_map, measured)


def semiconjugate(spec: ZActionSpec, B: int = 8,
                  radius: float | None = None) -> SemiconjugacyResult:
    """End-to-end: dbar, Rips complex, track family, collapse."""
    K = rips2(spec, B, radius)
    family = track_family(spec, K, B=min(B, 4))
    return collapse(spec, family, K)


def result_to_json(res: SemiconjugacyResult) -> str:
    return json.dumps({
        "block_map": {str(k): v for k, v in sorted(res.block_map.items())},
        "isometries": {k: {"sign": s, "offset": o}
                       for k, (s, o) in res.isometric_action.items()},
        "branched_line": {
            "window": list(res.branched_line.window),
            "tips": {str(m): list(t) for m, t in res.branched_line.tips.items()},
        },
        "measured": res.measured,
    })
