"""Z-blow-ups of the right-angled building: data, fiber functor, assembly.

Blow-up data assigns each rank-1 residue a map to Z, compatibly with
parallelism; one table per parallel class of a chosen representative residue
determines everything.  The induced fiber functor over the Davis ball has
window-truncated lattice fibers, and gluing cube-by-cube produces the
restriction quotient q: Y -> |B| together with labels, ranks and the
vertical/horizontal edge split.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .building import (
    ActionTables,
    DavisBall,
    Residue,
    chambers_of,
    image_class,
    proj_residue,
    residue,
)
from .cube_complex import (
    BIG_DEPTH,
    CubeComplexBall,
    CubicalMap,
    TruncationError,
    verify_rq_characterization,
)
from .graph_core import DefiningGraph
from .raag_geometry import (
    ParallelClass,
    class_of_geodesic,
    coset_coordinates,
    flat_element,
    inv,
    mul,
    word_str,
)


def type_map(g: DefiningGraph, r: Residue) -> list:
    """T(R): parallel classes of the rank-1 factors of a spherical residue."""
    if not r.spherical:
        raise ValueError("type map needs a spherical residue")
    return [class_of_geodesic(g, r.base, v) for v in r.type_J]


@dataclass
class BlowUpData:
    """One integer table per parallel class, propagated by parallelism."""

    graph: DefiningGraph
    tables: dict                 # class id -> {coordinate: value}
    classes: dict                # class id -> ParallelClass
    window: int

    def class_of(self, r: Residue) -> ParallelClass:
        return class_of_geodesic(self.graph, r.base, r.type_J[0])

    def value(self, r: Residue, chamber) -> int:
        """h_R(chamber) for a rank-1 residue, via the parallelism map."""
        g = self.graph
        pc = self.class_of(r)
        if pc.id not in self.tables:
            raise TruncationError(f"no table for class {pc.id}")
        rep = residue(g, pc.rep, (pc.direction,))
        gated = proj_residue(g, rep, chamber)
        n = coset_coordinates(g, gated, rep.base, (pc.direction,))[pc.direction]
        t = self.tables[pc.id]
        if n not in t:
            raise TruncationError(f"coordinate {n} outside table window")
        return t[n]

    def to_json(self) -> str:
        import json

        from .raag_geometry import flat_element

        out = []
        for cid in sorted(self.tables):
            pc = self.classes[cid]
            rep = residue(self.graph, pc.rep, (pc.direction,))
            table = {}
            for n, v in sorted(self.tables[cid].items()):
                chamber = flat_element(self.graph, rep.base,
                                       {pc.direction: n})
                table[word_str(chamber)] = v
            out.append({"id": cid, "table": table})
        return json.dumps({"classes": out})

    def check_parallelism_compatibility(self, residues, window: int = 1):
        """h_{R1} = h_{R2} o parallelism, spot-checked on window chambers."""
        from .building import are_parallel

        g = self.graph
        by_class = {}
        for r in residues:
            by_class.setdefault(self.class_of(r).id, []).append(r)
        for rs in by_class.values():
            rep = rs[0]
            for other in rs[1:]:
                ok, fmap = are_parallel(g, rep, other, window)
                if not ok:
                    raise AssertionError("same class but not parallel")
                for c, c2 in fmap.items():
                    if self.value(rep, c) != self.value(other, c2):
                        raise AssertionError("data violates parallelism")
        return True


def bijective_data(g: DefiningGraph, davis: DavisBall, window: int) -> BlowUpData:
    """Identity tables on every class meeting the Davis ball."""
    return data_from_function(g, davis, window, lambda pc, n: n)


def data_from_function(g: DefiningGraph, davis: DavisBall, window: int,
                       fn) -> BlowUpData:
    # table domains must cover every chamber coordinate in the Davis ball,
    # which can exceed the fiber window
    dom = max(window, davis.radius) + 1
    tables = {}
    classes = {}
    for vid, r in davis.residue_of.items():
        if r.rank != 1:
            continue
        pc = class_of_geodesic(g, r.base, r.type_J[0])
        if pc.id not in tables:
            tables[pc.id] = {n: fn(pc, n) for n in range(-dom, dom + 1)}
            classes[pc.id] = pc
    return BlowUpData(g, tables, classes, window)


@dataclass
class FiberFunctor:
    """Window-truncated lattice fibers over the faces of a Davis ball.

    Fibers are indexed by the vertex of minimal rank of each face; the axes
    of the fiber at a vertex are the parallel classes of its factors.
    """

    graph: DefiningGraph
    davis: DavisBall
    data: BlowUpData
    window: int
    axes: dict = field(default_factory=dict)        # vid -> tuple of class ids
    inserted: dict = field(default_factory=dict)    # (child,parent) -> {cid: value}

    def fiber_points(self, vid):
        k = len(self.axes[vid])
        rng = range(-self.window, self.window + 1)
        return itertools.product(*([rng] * k))

    def morphism(self, child, parent, point):
        """Image of a child-fiber point in the parent fiber (or None if the
        inserted constant escapes the window)."""
        cons = self.inserted[(child, parent)]
        caxes = self.axes[child]
        out = []
        for cid in self.axes[parent]:
            if cid in cons:
                val = cons[cid]
            else:
                val = point[caxes.index(cid)]
            if abs(val) > self.window:
                return None
            out.append(val)
        return tuple(out)

    def image_set(self, child, parent):
        out = set()
        for p in self.fiber_points(child):
            q = self.morphism(child, parent, p)
            if q is not None:
                out.add(q)
        return out


def build_fiber_functor(data: BlowUpData, davis: DavisBall,
                        check: bool = True) -> FiberFunctor:
    g = davis.graph
    psi = FiberFunctor(g, davis, data, data.window)
    factor_cache = {}
    for vid, r in davis.residue_of.items():
        cls = type_map(g, r)
        psi.axes[vid] = tuple(pc.id for pc in cls)
        factor_cache[vid] = [residue(g, r.base, (v,)) for v in r.type_J]
    for e in davis.ball.edges:
        u, v = tuple(e)
        child, parent = (u, v) if davis.rank_of[u] < davis.rank_of[v] else (v, u)
        rc, rp = davis.residue_of[child], davis.residue_of[parent]
        cons = {}
        child_classes = set(psi.axes[child])
        for f, cid in zip(factor_cache[parent], psi.axes[parent]):
            if cid in child_classes:
                continue
            anchor = proj_residue(g, f, rc.base)
            cons[cid] = data.value(f, anchor)
        psi.inserted[(child, parent)] = cons
    if check:
        _check_functor_laws(psi)
        _check_one_determined(psi)
    return psi


def _square_corners(davis, s):
    ranked = sorted(s, key=lambda vid: davis.rank_of[vid])
    bottom, m1, m2, top = ranked[0], ranked[1], ranked[2], ranked[3]
    return bottom, m1, m2, top


def _check_functor_laws(psi: FiberFunctor):
    for s in psi.davis.ball.squares:
        bottom, m1, m2, top = _square_corners(psi.davis, s)
        for p in psi.fiber_points(bottom):
            via1 = psi.morphism(bottom, m1, p)
            via1 = psi.morphism(m1, top, via1) if via1 is not None else None
            via2 = psi.morphism(bottom, m2, p)
            via2 = psi.morphism(m2, top, via2) if via2 is not None else None
            if via1 != via2:
                raise AssertionError(
                    f"functor composition differs on square {s} at {p}")


def _check_one_determined(psi: FiberFunctor):
    """Im(Psi(sigma)->Psi(top)) equals the intersection of the edge images."""
    for s in psi.davis.ball.squares:
        bottom, m1, m2, top = _square_corners(psi.davis, s)
        through = set()
        for p in psi.fiber_points(bottom):
            q = psi.morphism(bottom, m1, p)
            q = psi.morphism(m1, top, q) if q is not None else None
            if q is not None:
                through.add(q)
        inter = psi.image_set(m1, top) & psi.image_set(m2, top)
        if through != inter:
            raise AssertionError(f"not 1-determined on square {s}")


# ---------------------------------------------------------------------------
# assembly of Y
# ---------------------------------------------------------------------------

def y_id(vid, point) -> str:
    return f"{vid}#{','.join(map(str, point))}"


@dataclass
class BlowUpComplex:
    Y: CubeComplexBall
    q: CubicalMap
    davis: DavisBall
    psi: FiberFunctor
    vertex_info: dict            # y-vertex id -> (davis vid, point tuple)

    @property
    def graph(self):
        return self.davis.graph

    def rank(self, yv) -> int:
        return self.davis.rank_of[self.vertex_info[yv][0]]

    def clique_label(self, yv):
        return self.davis.residue_of[self.vertex_info[yv][0]].type_J

    def verify(self, samples: int = 20, seed: int = 0):
        rep = verify_rq_characterization(self.q, samples=samples, seed=seed)
        if not rep["all_true"]:
            raise AssertionError(f"blow-up failed the quotient checks: {rep}")
        return rep


def blowup_complex(psi: FiberFunctor) -> BlowUpComplex:
    """Glue sigma x Psi(sigma) over the faces of the Davis ball."""
    davis = psi.davis
    verts = []
    info = {}
    for vid in davis.ball.vertex_ids:
        for p in psi.fiber_points(vid):
            yv = y_id(vid, p)
            info[yv] = (vid, p)
            verts.append(yv)
    present = set(verts)
    edges = []
    squares = []
    dirs = {}
    for vid in davis.ball.vertex_ids:
        r = davis.residue_of[vid]
        dirs[vid] = {cid: pc_dir for cid, pc_dir in
                     zip(psi.axes[vid], r.type_J)}
    # vertical edges and lattice squares inside each fiber
    for vid in davis.ball.vertex_ids:
        axes = psi.axes[vid]
        for p in psi.fiber_points(vid):
            for i, cid in enumerate(axes):
                if p[i] + 1 > psi.window:
                    continue
                p2 = p[:i] + (p[i] + 1,) + p[i + 1 :]
                edges.append((y_id(vid, p), y_id(vid, p2),
                              f"v:{dirs[vid][cid]}"))
                for j in range(i + 1, len(axes)):
                    if p[j] + 1 > psi.window:
                        continue
                    p3 = p2[:j] + (p2[j] + 1,) + p2[j + 1 :]
                    p4 = p[:j] + (p[j] + 1,) + p[j + 1 :]
                    squares.append((y_id(vid, p), y_id(vid, p2),
                                    y_id(vid, p3), y_id(vid, p4)))
    # horizontal edges and the mixed squares over each Davis edge
    for e in davis.ball.edges:
        u, v = tuple(e)
        child, parent = (u, v) if davis.rank_of[u] < davis.rank_of[v] else (v, u)
        dropped = set(davis.residue_of[parent].type_J) - \
            set(davis.residue_of[child].type_J)
        lab = f"h:{next(iter(dropped))}"
        caxes = psi.axes[child]
        for p in psi.fiber_points(child):
            q = psi.morphism(child, parent, p)
            if q is None:
                continue
            edges.append((y_id(child, p), y_id(parent, q), lab))
            for i, cid in enumerate(caxes):
                if p[i] + 1 > psi.window:
                    continue
                p2 = p[:i] + (p[i] + 1,) + p[i + 1 :]
                q2 = psi.morphism(child, parent, p2)
                if q2 is not None:
                    squares.append((y_id(child, p), y_id(child, p2),
                                    y_id(parent, q2), y_id(parent, q)))
    # squares over Davis squares
    for s in davis.ball.squares:
        bottom, m1, m2, top = _square_corners(davis, s)
        for p in psi.fiber_points(bottom):
            q1 = psi.morphism(bottom, m1, p)
            q2 = psi.morphism(bottom, m2, p)
            qt = psi.morphism(m1, top, q1) if q1 is not None else None
            if q1 is not None and q2 is not None and qt is not None:
                squares.append((y_id(bottom, p), y_id(m1, q1),
                                y_id(top, qt), y_id(m2, q2)))
    depth = {}
    for yv in verts:
        vid, p = info[yv]
        fiber_depth = min((psi.window - abs(x) for x in p), default=BIG_DEPTH)
        depth[yv] = min(davis.ball.depth[vid], fiber_depth)
    Y = CubeComplexBall.make(verts, edges, squares, depth)
    vmap = {yv: info[yv][0] for yv in verts}
    q = CubicalMap(vmap, Y, davis.ball)
    return BlowUpComplex(Y, q, davis, psi, info)


# ---------------------------------------------------------------------------
# 1-data extraction and reports
# ---------------------------------------------------------------------------

def one_data(bc: BlowUpComplex, window: int | None = None) -> BlowUpData:
    """Read the tables back off the rank-1 fibers of a blow-up complex.

    Each chamber of a rank-1 residue hangs off the fiber line by exactly one
    horizontal edge; the fiber coordinate it attaches to is the table value.
    Parallelism compatibility across residues of one class is asserted.
    """
    g = bc.graph
    davis = bc.davis
    window = window if window is not None else bc.psi.window
    tables = {}
    classes = {}
    observed = {}
    for vid, r in davis.residue_of.items():
        if r.rank != 1:
            continue
        pc = class_of_geodesic(g, r.base, r.type_J[0])
        classes.setdefault(pc.id, pc)
        rep = residue(g, pc.rep, (pc.direction,))
        v = r.type_J[0]
        for yv in bc.Y.vertex_ids:
            wid, p = bc.vertex_info[yv]
            if wid != vid:
                continue
            for nb, lab in bc.Y.neighbors(yv).items():
                nvid, np_ = bc.vertex_info[nb]
                if davis.rank_of[nvid] != 0:
                    continue
                chamber = davis.residue_of[nvid].base
                gated = proj_residue(g, rep, chamber)
                n = coset_coordinates(g, gated, rep.base,
                                      (pc.direction,))[pc.direction]
                val = p[0]
                prev = observed.setdefault((pc.id, n), val)
                if prev != val:
                    raise AssertionError(
                        f"class {pc.id}: chamber coordinate {n} attaches at "
                        f"both {prev} and {val} (parallelism failure)")
    for (cid, n), val in observed.items():
        tables.setdefault(cid, {})[n] = val
    return BlowUpData(g, tables, classes, window)


def local_finiteness_report(data: BlowUpData):
    """(max fiber preimage size, least D with images D-dense on the span)."""
    max_pre = 0
    density = 0
    for t in data.tables.values():
        vals = sorted(t.values())
        from collections import Counter

        c = Counter(vals)
        max_pre = max(max_pre, max(c.values()))
        lo, hi = vals[0], vals[-1]
        image = sorted(set(vals))
        for x in range(lo, hi + 1):
            density = max(density, min(abs(x - y) for y in image))
    return {"max_preimage": max_pre, "density": density}


def downward_complex_check(bc: BlowUpComplex, vid: str) -> bool:
    """q^{-1}(downward complex of vid) is the product of mapping cylinders.

    The expected model has, per factor, a line of fiber coordinates plus one
    whisker per chamber attached at its table value; the comparison is a
    direct labeled bijection, not a search.
    """
    from .building import residue_contains

    g = bc.graph
    davis = bc.davis
    r = davis.residue_of[vid]
    down_vids = [w for w in davis.ball.vertex_ids
                 if residue_contains(g, davis.residue_of[w], r)]
    down_set = set(down_vids)
    sub_vertices = [yv for yv in bc.Y.vertex_ids
                    if bc.vertex_info[yv][0] in down_set]
    sub = bc.Y.span(sub_vertices)
    factors = [residue(g, r.base, (v,)) for v in r.type_J]

    def model_coord(yv):
        wid, p = bc.vertex_info[yv]
        rw = davis.residue_of[wid]
        waxes = bc.psi.axes[wid]
        coords = []
        for f, v, cid in zip(factors, r.type_J, bc.psi.axes[vid]):
            if v in rw.type_J:
                coords.append(("line", p[waxes.index(cid)]))
            else:
                anchor = proj_residue(g, f, rw.base)
                n = coset_coordinates(g, anchor, f.base, (v,))[v]
                coords.append(("chamber", n))
        return tuple(coords)

    seen = {}
    for yv in sub.vertex_ids:
        key = model_coord(yv)
        if key in seen:
            return False
        seen[key] = yv
    # edges of the product of cylinders: change one coordinate, either a
    # line step or a whisker move chamber<->its table value
    expected_edges = set()
    for key in seen:
        for i, (kind, val) in enumerate(key):
            f = factors[i]
            v = r.type_J[i]
            if kind == "line":
                up = key[:i] + (("line", val + 1),) + key[i + 1 :]
                if up in seen:
                    expected_edges.add(frozenset((seen[key], seen[up])))
            else:
                chamber = flat_element(g, f.base, {v: val})
                hv = bc.psi.data.value(f, chamber)
                mid = key[:i] + (("line", hv),) + key[i + 1 :]
                if mid in seen:
                    expected_edges.add(frozenset((seen[key], seen[mid])))
    actual = set(sub.edges.keys())
    return expected_edges == actual


# ---------------------------------------------------------------------------
# quasi-morphisms of data
# ---------------------------------------------------------------------------

def eta_quasi_morphism(bcA: BlowUpComplex, bcB: BlowUpComplex, f_per_class,
                       L: float, A: float, bound_L: float | None = None,
                       bound_A: float | None = None, sample: int = 60,
                       seed: int = 0):
    """Vertex map Y_A -> Y_B induced by per-class window maps f_lambda.

    Checks the defining diagrams commute up to A on every rank-1 residue,
    builds the coordinatewise vertex map, and measures its metric distortion
    on sampled interior pairs.  When the f_lambda are isometries and A = 0
    the map is required to be a cubical isomorphism.
    """
    g = bcA.graph
    davis = bcA.davis
    dataA, dataB = bcA.psi.data, bcB.psi.data
    for vid, r in davis.residue_of.items():
        if r.rank != 1:
            continue
        pc = dataA.class_of(r)
        f = f_per_class[pc.id]
        for coords, chamber in chambers_of(g, r, 1):
            try:
                va = dataA.value(r, chamber)
                vb = dataB.value(r, chamber)
            except TruncationError:
                continue
            if va in f and abs(f[va] - vb) > A:
                raise AssertionError(
                    f"diagram fails on {pc.id} at {word_str(chamber)}: "
                    f"f({va})={f[va]} vs {vb}")
    vmap = {}
    for yv in bcA.Y.vertex_ids:
        vid, p = bcA.vertex_info[yv]
        img = []
        ok = True
        for cid, x in zip(bcA.psi.axes[vid], p):
            f = f_per_class[cid]
            if x not in f or abs(f[x]) > bcB.psi.window:
                ok = False
                break
            img.append(f[x])
        if ok:
            target = y_id(vid, tuple(img))
            if target in bcB.vertex_info:
                vmap[yv] = target
    rng = random.Random(seed)
    domain = [yv for yv in vmap if bcA.Y.depth[yv] >= 1]
    worst_ratio = 1.0
    pairs = []
    for _ in range(sample):
        a, b = rng.choice(domain), rng.choice(domain)
        if a == b:
            continue
        d1 = bcA.Y.distance(a, b)
        d2 = bcB.Y.distance(vmap[a], vmap[b])
        pairs.append((d1, d2))
        if d1 and d2:
            worst_ratio = max(worst_ratio, d1 / d2, d2 / d1)
    # residual additive error after allowing the multiplicative bound
    L_eff = bound_L if bound_L is not None else worst_ratio
    worst_add = 0
    for d1, d2 in pairs:
        worst_add = max(worst_add, d2 - L_eff * d1, d1 - L_eff * d2, 0)
    exact_iso = None
    if A == 0 and all(_is_window_isometry(f) for f in f_per_class.values()):
        exact_iso = _is_cubical_bijection(bcA, bcB, vmap)
    report = {"vertex_map": vmap, "measured_L": worst_ratio,
              "measured_A": worst_add, "pairs": len(pairs),
              "exact_isomorphism": exact_iso}
    if bound_L is not None and bound_A is not None:
        for d1, d2 in pairs:
            if d2 > bound_L * d1 + bound_A or d1 > bound_L * d2 + bound_A:
                raise AssertionError(
                    f"pair with distances {d1},{d2} violates the "
                    f"({bound_L},{bound_A})-quasi-isometry bound")
    return report


def _is_window_isometry(f):
    keys = sorted(f)
    vals = [f[k] for k in keys]
    steps = {vals[i + 1] - vals[i] for i in range(len(vals) - 1)}
    return steps <= {1} or steps <= {-1}


def _is_cubical_bijection(bcA, bcB, vmap):
    interiorA = [yv for yv in bcA.Y.vertex_ids if bcA.Y.depth[yv] >= 2]
    for yv in interiorA:
        if yv not in vmap:
            return False
        for nb, lab in bcA.Y.neighbors(yv).items():
            if nb in vmap:
                if not bcB.Y.has_edge(vmap[yv], vmap[nb]) or \
                   bcB.Y.edge_label(vmap[yv], vmap[nb]) != lab:
                    return False
    return True


# ---------------------------------------------------------------------------
# the equivariant construction
# ---------------------------------------------------------------------------

def class_orbit_word(g: DefiningGraph, tables: ActionTables,
                     pc: ParallelClass, rep_ids, max_depth: int = 6):
    """Shortest generator word carrying a class into the representative set.

    Returns (word, image class); the identity word if pc is already a
    representative.  Deterministic: BFS in generator declaration order.
    """
    if pc.id in rep_ids:
        return (), pc
    from collections import deque

    seen = {pc.id}
    dq = deque([((), pc)])
    names = sorted(tables.generators)
    while dq:
        word, cur = dq.popleft()
        if len(word) >= max_depth:
            continue
        for name in names:
            try:
                img = image_class(g, tables, name, cur)
            except (TruncationError, ValueError):
                continue
            if img.id in rep_ids:
                return (name,) + word, img
            if img.id not in seen:
                seen.add(img.id)
                dq.append(((name,) + word, img))
    raise TruncationError(f"orbit of {pc.id} does not meet the representatives")


def equivariant_blowup(g: DefiningGraph, tables: ActionTables, resolutions,
                       davis: DavisBall, window: int):
    """Blow up with data propagated through the action.

    `resolutions` maps an orbit-representative class id to an equivariant
    table Z -> Z (the block map of a semiconjugacy, or any isometry table).
    Classes outside the representative set get their data by transporting
    through a deterministically chosen group word.  Returns the blow-up
    complex and, per generator, the induced vertex map on Y, verified to
    commute with q.
    """
    rep_ids = set(resolutions)
    dom = max(window, davis.radius) + 1
    data_tables = {}
    classes = {}
    for vid, r in davis.residue_of.items():
        if r.rank != 1:
            continue
        pc = class_of_geodesic(g, r.base, r.type_J[0])
        if pc.id in data_tables:
            continue
        word, img = class_orbit_word(g, tables, pc, rep_ids)
        f_u = resolutions[img.id]
        rep_res = residue(g, img.rep, (img.direction,))
        own_res = residue(g, pc.rep, (pc.direction,))
        table = {}
        for n in range(-dom, dom + 1):
            chamber = flat_element(g, own_res.base, {pc.direction: n})
            moved = tables.apply_word(word, chamber)
            gated = proj_residue(g, rep_res, moved)
            m = coset_coordinates(g, gated, rep_res.base,
                                  (img.direction,))[img.direction]
            if m not in f_u:
                raise TruncationError("resolution table window too small")
            table[n] = f_u[m]
        data_tables[pc.id] = table
        classes[pc.id] = pc
    data = BlowUpData(g, data_tables, classes, window)
    psi = build_fiber_functor(data, davis)
    bc = blowup_complex(psi)
    actions = {name: _induced_action_on_y(bc, tables, name)
               for name in tables.generators}
    return bc, actions


def _residue_image(g, tables, name, r: Residue) -> Residue:
    base2 = tables.apply(name, r.base)
    dirs = []
    for v in r.type_J:
        c1 = tables.apply(name, mul(g, r.base, ((v, 1),)))
        step = mul(g, inv(base2), c1)
        if len(step) != 1:
            raise ValueError(f"{name!r} is not flat-preserving")
        dirs.append(step[0][0])
    return residue(g, base2, tuple(dirs))


def _factor_isometry(g, tables, name, data: BlowUpData, f_src: Residue,
                     f_dst: Residue, window: int):
    """The isometry of Z fitting f(h_src(c)) = h_dst(g c) on the window."""
    v = f_src.type_J[0]
    pairs = []
    for n in range(-window, window + 1):
        c = flat_element(g, f_src.base, {v: n})
        try:
            a = data.value(f_src, c)
            b = data.value(f_dst, tables.apply(name, c))
        except TruncationError:
            continue
        pairs.append((a, b))
    distinct = {a for a, _ in pairs}
    if len(distinct) >= 2:
        (a1, b1), (a2, b2) = pairs[0], next(p for p in pairs if p[0] != pairs[0][0])
        sign = (b2 - b1) // (a2 - a1) if abs(b2 - b1) == abs(a2 - a1) else None
        if sign not in (1, -1):
            raise AssertionError("factor map is not an isometry")
        off = b1 - sign * a1
        for a, b in pairs:
            if sign * a + off != b:
                raise AssertionError("factor map is not affine")
        return lambda z, s=sign, o=off: s * z + o
    if pairs:
        off = pairs[0][1] - pairs[0][0]
        return lambda z, o=off: z + o   # degenerate data: orientation kept
    return lambda z: z


def _induced_action_on_y(bc: BlowUpComplex, tables: ActionTables, name: str):
    g = bc.graph
    davis = bc.davis
    data = bc.psi.data
    vmap = {}
    iso_cache = {}
    for yv in bc.Y.vertex_ids:
        vid, p = bc.vertex_info[yv]
        r = davis.residue_of[vid]
        try:
            r2 = _residue_image(g, tables, name, r)
        except (TruncationError, KeyError):
            continue
        if r2.id not in davis.residue_of:
            continue
        img_point = []
        ok = True
        for v, x in zip(r.type_J, p):
            f_src = residue(g, r.base, (v,))
            key = (f_src.id, name)
            if key not in iso_cache:
                try:
                    f_dst = _residue_image(g, tables, name, f_src)
                    iso_cache[key] = _factor_isometry(
                        g, tables, name, data, f_src, f_dst, data.window)
                except (TruncationError, KeyError):
                    iso_cache[key] = None
            iso = iso_cache[key]
            if iso is None:
                ok = False
                break
            y = iso(x)
            if abs(y) > bc.psi.window:
                ok = False
                break
            img_point.append(y)
        if not ok:
            continue
        # the image point must be listed in the image residue's axis order
        axes2 = bc.psi.axes[r2.id]
        pairs = []
        for v, val in zip(r.type_J, img_point):
            f_dst = _residue_image(g, tables, name, residue(g, r.base, (v,)))
            cid2 = class_of_geodesic(g, f_dst.base, f_dst.type_J[0]).id
            pairs.append((cid2, val))
        ordered = tuple(dict(pairs)[cid] for cid in axes2)
        target = y_id(r2.id, ordered)
        if target in bc.vertex_info:
            vmap[yv] = target
    # commuting with q on the window
    for yv, tv in vmap.items():
        vid = bc.vertex_info[yv][0]
        r2 = _residue_image(g, tables, name, davis.residue_of[vid])
        if bc.vertex_info[tv][0] != r2.id:
            raise AssertionError("induced action does not commute with q")
    return vmap
