"""Wallspaces, Sageev duals, branched lines, the invariant wallspace."""

import itertools

import pytest

from cubikit import cube_complex as cc
from cubikit import graph_core as gc
from cubikit import raag_geometry as rg
from cubikit import semiconjugacy as sc
from cubikit import wallspace_dual as wd
from cubikit.building import ActionTables, left_translation_action


def enumerate_zero_cubes_oracle(ws):
    """Oracle: brute-force all orientations, keep the pairwise-consistent."""
    n = ws.n_walls()
    out = []
    for bits in range(1 << n):
        ok = True
        for i in range(n):
            si = ws.sides[i] if bits >> i & 1 else ws.full_mask ^ ws.sides[i]
            for j in range(i + 1, n):
                sj = ws.sides[j] if bits >> j & 1 else ws.full_mask ^ ws.sides[j]
                if not si & sj:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(bits)
    return out


def test_two_points_one_wall():
    ws = wd.Wallspace.make(["p", "q"], [["p"]])
    dual = wd.dual_cube_complex(ws)
    assert len(dual.vertex_ids) == 2
    assert len(dual.edges) == 1


def test_square_wallspace():
    pts = [(0, 0), (0, 1), (1, 0), (1, 1)]
    walls = [[(0, 0), (0, 1)], [(0, 0), (1, 0)]]
    ws = wd.Wallspace.make(pts, walls)
    dual = wd.dual_cube_complex(ws)
    assert len(dual.vertex_ids) == 4
    assert len(dual.edges) == 4
    assert len(dual.squares) == 1
    assert len(enumerate_zero_cubes_oracle(ws)) == 4


def test_tripod_wallspace():
    ws = wd.Wallspace.make(["a", "b", "c"], [["a"], ["b"], ["c"]])
    dual = wd.dual_cube_complex(ws)
    assert len(dual.vertex_ids) == 4
    assert len(dual.edges) == 3
    assert not dual.squares
    assert len(enumerate_zero_cubes_oracle(ws)) == 4
    assert wd.dual_dimension(ws) == 1


def test_hypercube():
    pts = list(range(8))
    walls = [[p for p in pts if p >> i & 1] for i in range(3)]
    ws = wd.Wallspace.make(pts, walls)
    assert wd.dual_dimension(ws) == 3
    dual = wd.dual_cube_complex(ws)
    assert len(dual.vertex_ids) == 8
    assert len(dual.squares) == 6


def test_dim_2x2():
    pts = [(0, 0), (0, 1), (1, 0), (1, 1)]
    ws = wd.Wallspace.make(pts, [[(0, 0), (0, 1)], [(0, 0), (1, 0)]])
    assert wd.dual_dimension(ws) == 2


def test_duplicate_partition_rejected():
    with pytest.raises(ValueError):
        wd.Wallspace.make(["a", "b"], [["a"], ["b"]])


def test_maximal_cubes():
    pts = [(0, 0), (0, 1), (1, 0), (1, 1)]
    ws = wd.Wallspace.make(pts, [[(0, 0), (0, 1)], [(0, 0), (1, 0)]])
    mc = wd.maximal_cubes(ws)
    assert len(mc) == 1
    fam, cube = mc[0]
    assert len(fam) == 2 and len(cube) == 4
    ws3 = wd.Wallspace.make(["a", "b", "c"], [["a"], ["b"], ["c"]])
    mc3 = wd.maximal_cubes(ws3)
    assert len(mc3) == 3
    assert all(len(cube) == 2 for _, cube in mc3)


def test_maximal_cubes_random_suite():
    import random

    rng = random.Random(5)
    for trial in range(25):
        npts = rng.randint(3, 7)
        pts = list(range(npts))
        walls = []
        seen = set()
        for _ in range(rng.randint(1, 5)):
            side = frozenset(p for p in pts if rng.random() < 0.5)
            if not side or len(side) == npts:
                continue
            key = min(side, frozenset(pts) - side, key=sorted)
            if key in seen:
                continue
            seen.add(key)
            walls.append(side)
        if not walls:
            continue
        ws = wd.Wallspace.make(pts, walls)
        oracle = enumerate_zero_cubes_oracle(ws)
        dual = wd.dual_cube_complex(ws)
        assert len(dual.vertex_ids) == len(oracle)
        wd.dual_dimension(ws)       # asserts internally
        wd.maximal_cubes(ws)        # asserts the bijection internally


def test_sageev_roundtrip_ball_k2():
    ball = rg.ball_X(gc.k2(), 2)
    ws = wd.hyperplane_wallspace(ball, margin=1)
    dual = wd.dual_cube_complex(ws)
    span = ball.span([v for v in ball.vertex_ids if ball.depth[v] >= 1])
    iso = cc.labeled_isomorphism(dual, span)
    assert iso is not None


def test_sageev_roundtrip_ball_c5():
    ball = rg.ball_X(gc.pentagon(), 2)
    ws = wd.hyperplane_wallspace(ball, margin=1)
    dual = wd.dual_cube_complex(ws)
    span = ball.span([v for v in ball.vertex_ids if ball.depth[v] >= 1])
    iso = cc.labeled_isomorphism(dual, span)
    assert iso is not None


def test_branched_line():
    bl = wd.BranchedLine((-2, 2), {0: ("p", "q"), 1: ("r",)})
    assert bl.branching_number() == 4
    tips = bl.tip_list()
    assert (0, "p") in tips and (-2, None) in tips
    cx = bl.as_complex()
    assert cx.validate()
    walls = bl.wall_sides_on_tips()
    cut0 = next(s for tag, s in walls if tag == ("cut", 0))
    assert (1, "r") not in cut0 and (0, "p") in cut0


def line_resolutions(g):
    """Identity block maps for every class through the identity."""
    return {rg.class_of_geodesic(g, (), v).id: {n: n for n in range(-12, 13)}
            for v in g.vertices}


def trivial_action(g, radius):
    pts = wd.group_ball(g, radius)
    t = {p: p for p in pts}
    return ActionTables({"e": t}, {"e": "e"})


def span_of_domain(g, iws, ambient_radius):
    ball = rg.ball_X(g, ambient_radius)
    ids = [rg.word_str(p) for p in iws.domain]
    return ball.span(ids)


def test_invariant_wallspace_trivial_action_k2():
    g = gc.k2()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    dual = wd.direction_labeled_dual(iws)
    # the dual reproduces the span of the height-box hull (a 3x3 grid patch)
    span = span_of_domain(g, iws, 3)
    assert len(iws.domain) == 9
    assert cc.labeled_isomorphism(dual, span) is not None


def test_invariant_wallspace_translations_c5():
    g = gc.pentagon()
    act = left_translation_action(g, wd.group_ball(g, 3), (("a", 1),))
    iws = wd.invariant_wallspace(g, act, line_resolutions(g), wall_window=1)
    # translations stabilize every through-identity class: the banded wall
    # set is already closed, and no rim artifacts appear
    assert all(len(t) == 3 for t in iws.wallspace.tags)
    dual = wd.dual_cube_complex(iws.wallspace)
    # dimension of the dual = max clique size of the pentagon
    assert wd.dual_dimension(iws.wallspace) == 2
    # the through-identity {a,b}-flat embeds as a grid patch
    ca = rg.class_of_geodesic(g, (), "a").id
    cb = rg.class_of_geodesic(g, (), "b").id
    sub_dual, embedded, _ = wd.branched_flat_embed(iws, [ca, cb], dual=dual)
    assert len(sub_dual.squares) > 0


def test_transversality_k2():
    g = gc.k2()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    ws = iws.wallspace
    u_walls = [i for i in range(ws.n_walls())
               if iws.classes[ws.tags[i][0]].direction == "u"]
    v_walls = [i for i in range(ws.n_walls())
               if iws.classes[ws.tags[i][0]].direction == "v"]
    for i in u_walls:
        for j in v_walls:
            assert wd.transversality(iws, i, j) is True
    assert wd.transversality(iws, u_walls[0], u_walls[1]) is False


def test_transversality_pentagon_exhaustive():
    g = gc.pentagon()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    ws = iws.wallspace
    import itertools as it

    for i, j in it.combinations(range(ws.n_walls()), 2):
        got = wd.transversality(iws, i, j)   # asserts the lemma internally
        d1 = iws.classes[ws.tags[i][0]].direction
        d2 = iws.classes[ws.tags[j][0]].direction
        assert got == (d1 != d2 and g.adjacent(d1, d2))


def test_branched_flat_embed_k2():
    g = gc.k2()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    cu = rg.class_of_geodesic(g, (), "u").id
    cv = rg.class_of_geodesic(g, (), "v").id
    sub_dual, embedded, dual = wd.branched_flat_embed(iws, [cu, cv])
    # the unique maximal flat of K2 fills the entire dual ball
    assert len(embedded) == len(dual.vertex_ids)


def test_branched_flat_embed_pentagon():
    g = gc.pentagon()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    ca = rg.class_of_geodesic(g, (), "a").id
    cb = rg.class_of_geodesic(g, (), "b").id
    sub_dual, embedded, dual = wd.branched_flat_embed(iws, [ca, cb])
    assert cc.is_convex(dual, embedded)
    assert len(embedded) < len(dual.vertex_ids)
    # product structure: the sub-dual is a 2-dimensional grid patch
    assert len(sub_dual.squares) > 0


def test_flats_with_disjoint_windows_are_separated():
    g = gc.pentagon()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    ca = rg.class_of_geodesic(g, (), "a").id
    cb = rg.class_of_geodesic(g, (), "b").id
    ccd = rg.class_of_geodesic(g, (), "c").id
    cd = rg.class_of_geodesic(g, (), "d").id
    _, emb1, dual = wd.branched_flat_embed(iws, [ca, cb])
    _, emb2, _ = wd.branched_flat_embed(iws, [ccd, cd], dual=dual)
    assert emb1 != emb2


def test_phi_map_identity_embedding():
    g = gc.k2()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    vmap, rep = wd.phi_map(iws)
    assert len(set(vmap.values())) == len(iws.domain)
    assert rep["density"] == 0


def test_phi_map_two_flipping_class():
    # the single class resolved by the 2-flipping block map: phi injective
    g = gc.single_vertex()
    res = {rg.class_of_geodesic(g, (), "v").id:
           {n: n // 2 for n in range(-12, 13)}}
    iws = wd.invariant_wallspace(g, trivial_action(g, 8), res, wall_window=3,
                                 points_radius=8)
    vmap, rep = wd.phi_map(iws)
    assert len(set(vmap.values())) == len(iws.domain)
    # the dual is a branched line with paired whiskers
    dual = rep["dual"]
    deg3 = [v for v in dual.vertex_ids if len(dual.neighbors(v)) >= 3]
    assert deg3
    # collapsing pairs stretches distances by at most 2 additively
    assert rep["additive"] <= 2


def test_k_walls_membership():
    # walls of a standard subcomplex: v-walls separate its window vertices
    # iff the class belongs to the subcomplex's simplex of classes
    g = gc.pentagon()
    iws = wd.invariant_wallspace(g, trivial_action(g, 4), line_resolutions(g),
                                 wall_window=1)
    ws = iws.wallspace
    ca = rg.class_of_geodesic(g, (), "a").id
    cb = rg.class_of_geodesic(g, (), "b").id
    flat_pts = set(wd._flat_points(iws, [ca, cb]))
    assert flat_pts
    for i in range(ws.n_walls()):
        side = set(ws.side_sets(i)[0])
        separates = bool(flat_pts & side) and bool(flat_pts - side)
        in_family = ws.tags[i][0] in (ca, cb)
        assert separates == in_family, ws.tags[i]


def test_zero_cube_type():
    ws = wd.Wallspace.make(["a", "b", "c"], [["a"], ["b"], ["c"]])
    dual = wd.dual_cube_complex(ws)
    for vid in dual.vertex_ids:
        zc = wd.zero_cube_of_vertex(dual, vid)
        assert zc.consistent(ws)
    # the all-stored-sides orientation of the tripod is inconsistent
    assert not wd.ZeroCube((1, 1, 1)).consistent(ws)


def test_single_class_dual_is_branched_line():
    # the dual of one class's walls is that class's branched line
    g = gc.single_vertex()
    res = {rg.class_of_geodesic(g, (), "v").id:
           {n: n // 2 for n in range(-12, 13)}}
    iws = wd.invariant_wallspace(g, trivial_action(g, 8), res, wall_window=3,
                                 points_radius=8)
    dual = wd.dual_cube_complex(iws.wallspace)
    cid = next(iter(iws.branched_lines))
    model = iws.branched_lines[cid].as_complex()
    # compare unlabeled shapes: same vertex/edge counts and degree profile
    assert len(dual.vertex_ids) == len(model.vertex_ids)
    assert len(dual.edges) == len(model.edges)
    prof = sorted(len(dual.neighbors(v)) for v in dual.vertex_ids)
    prof_m = sorted(len(model.neighbors(v)) for v in model.vertex_ids)
    assert prof == prof_m
