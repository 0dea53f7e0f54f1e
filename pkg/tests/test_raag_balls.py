"""Balls of X and X_e, flats, projections, levels, extension adjacency."""

import pytest

from cubikit import cube_complex as cc
from cubikit import graph_core as gc
from cubikit import raag_geometry as rg

from .test_raag_words import growth_series


def sphere_sizes(ball, radius):
    by_len = {}
    for vid in ball.vertex_ids:
        w = rg.parse_word(vid)
        by_len[len(w)] = by_len.get(len(w), 0) + 1
    return [by_len.get(k, 0) for k in range(radius + 1)]


def test_ball_x_k2():
    b = rg.ball_X(gc.k2(), 2)
    assert len(b.vertex_ids) == 13
    assert sphere_sizes(b, 2) == [1, 4, 8]
    assert b.validate()
    assert cc.check_flag_links(b)["ok"]


def test_ball_x_f2_tree():
    b = rg.ball_X(gc.discrete(2), 3)
    assert sphere_sizes(b, 3) == [1, 4, 12, 36]
    assert not b.squares


def test_ball_x_c5_radius1():
    b = rg.ball_X(gc.pentagon(), 1)
    assert len(b.vertex_ids) == 11


def test_ball_x_growth_matches_clique_polynomial_oracle():
    for g in (gc.k2(), gc.pentagon(), gc.path3(), gc.discrete(2)):
        b = rg.ball_X(g, 3)
        assert sphere_sizes(b, 3) == growth_series(g, 3)


def test_ball_x_distance_is_word_length():
    g = gc.pentagon()
    b = rg.ball_X(g, 3)
    base = rg.word_str(())
    dist = b.bfs_from(base)
    for vid in b.vertex_ids:
        w = rg.parse_word(vid)
        if len(w) <= 2:   # margin-1 interior: ball distances are exact
            assert dist[vid] == len(w)


def test_ball_x_l1_equals_separating_walls():
    g = gc.k2()
    b = rg.ball_X(g, 3)
    hps = cc.hyperplanes(b)
    inside = [v for v in b.vertex_ids if b.depth[v] >= 1]
    for x in inside:
        for y in inside:
            if x < y:
                assert b.distance(x, y) == \
                    len(cc.separating_hyperplanes(b, hps, x, y))


def test_ball_xe_single_vertex_is_line_with_whiskers():
    g = gc.single_vertex()
    b = rg.ball_Xe(g, 3)
    words = {}
    for vid in b.vertex_ids:
        w, cl = rg.parse_xe_id(vid)
        words.setdefault(cl, []).append(w)
    line = sorted(len(w) for w in words[("v",)])
    tips = sorted(len(w) for w in words[()])
    assert len(line) == 5      # v^-2 .. v^2
    assert len(tips) == 3      # whiskers at v^-1, 1, v
    # every tip hangs off the line by one horizontal edge
    for vid in b.vertex_ids:
        w, cl = rg.parse_xe_id(vid)
        if cl == ():
            nbrs = list(b.neighbors(vid).items())
            assert all(lab == "h:v" for _, lab in nbrs)


def test_ball_xe_k2_flag_and_collapse():
    g = gc.k2()
    be = rg.ball_Xe(g, 4)
    assert be.validate()
    assert cc.check_flag_links(be)["ok"]
    # collapsing all vertical walls leaves only horizontal edges: the image
    # classes are the standard flats (vertex classes of ball_X)
    hps = cc.hyperplanes(be)
    vertical = [h for h in hps if h.direction.startswith("v:") and not h.truncated]
    rq = cc.restriction_quotient(be, [h for h in hps
                                      if h.direction.startswith("h:") and not h.truncated])
    # each fiber collapses to one flat: fibers are single flats' lattice windows
    for tv in rq.target.vertex_ids:
        fiber = rq.map.fiber(tv)
        flats = set()
        for vid in fiber:
            w, cl = rg.parse_xe_id(vid)
            flats.add((rg.word_str(rg.gate_representative(g, w, cl)), cl))
        assert len(flats) == 1


def test_standard_flats_k2():
    g = gc.k2()
    b = rg.ball_X(g, 2)
    flats = rg.standard_flats(b, g)
    by_rank = {}
    for f in flats:
        by_rank.setdefault(len(f.clique), []).append(f)
    assert len(by_rank[0]) == 13          # points = vertices
    assert len(by_rank[2]) == 1           # one 2-flat: the whole grid
    # lines: u-lines v^b<u> and v-lines u^a<v> with |a|,|b| <= 2
    assert len(by_rank[1]) == 10


def test_standard_flats_c5_through_identity():
    g = gc.pentagon()
    b = rg.ball_X(g, 1)
    flats = rg.standard_flats(b, g)
    through_e = [f for f in flats
                 if rg.coset_member(g, (), f.base, f.clique.members)]
    assert len(through_e) == 11   # one per clique


def test_project_to_geodesic():
    g = gc.k2()
    u_axis = rg.standard_flat(g, (), ["u"])
    x = rg.normal_form(g, [("u", 1), ("u", 1), ("v", 1), ("v", 1), ("v", 1)])
    k, vert = rg.project_to_geodesic(g, x, u_axis)
    assert k == 2 and vert == (("u", 1), ("u", 1))
    # a point on the geodesic projects to itself
    k2_, v2 = rg.project_to_geodesic(g, (("u", -1),), u_axis)
    assert k2_ == -1 and v2 == (("u", -1),)
    f2 = gc.discrete(2)
    x_, y_ = f2.vertices
    ell = rg.standard_flat(f2, (), [x_])
    w = rg.normal_form(f2, ((x_, 1), (y_, 1), (x_, 1)))
    k3, v3 = rg.project_to_geodesic(f2, w, ell)
    assert v3 == ((x_, 1),)


def test_v_levels_k2_columns():
    g = gc.k2()
    b = rg.ball_X(g, 2)
    pc = rg.class_of_geodesic(g, (), "u")
    levels = rg.v_levels(g, pc, b, margin=1)
    # heights -1, 0, 1 on the margin-1 interior (the plus shape at radius 1)
    got = {lv.height: set(lv.members) for lv in levels}
    assert set(got) == {-1, 0, 1}
    assert got[0] == {rg.word_str(()), rg.word_str((("v", 1),)),
                      rg.word_str((("v", -1),))}


def test_v_levels_f2_word_start():
    f2 = gc.discrete(2)
    x, y = f2.vertices
    b = rg.ball_X(f2, 3)
    pc = rg.class_of_geodesic(f2, (), x)
    levels = rg.v_levels(f2, pc, b, margin=1, verify=False)
    lvl0 = next(lv for lv in levels if lv.height == 0)
    for vid in lvl0.members:
        w = rg.parse_word(vid)
        assert not w or w[0][0] == y


def test_levels_partition_and_distance():
    g = gc.k2()
    b = rg.ball_X(g, 3)
    pc = rg.class_of_geodesic(g, (), "u")
    levels = rg.v_levels(g, pc, b, margin=1)
    members = [m for lv in levels for m in lv.members]
    assert len(members) == len(set(members)) == \
        len([v for v in b.vertex_ids if b.depth[v] >= 1])
    # distance between levels = height difference
    for l1 in levels:
        for l2 in levels:
            d = min(b.distance(a, bb) for a in l1.members for bb in l2.members)
            assert d == abs(l1.height - l2.height)


def test_extension_adjacent():
    g = gc.k2()
    cu = rg.class_of_geodesic(g, (), "u")
    cv = rg.class_of_geodesic(g, (), "v")
    assert rg.extension_adjacent(g, cu, cv)
    pent = gc.pentagon()
    ca = rg.class_of_geodesic(pent, (), "a")
    ccl = rg.class_of_geodesic(pent, (), "c")
    assert not rg.extension_adjacent(pent, ca, ccl)
    # adjacent directions but disjoint parallel-set cosets
    cb_far = rg.class_of_geodesic(pent, (("d", 1),), "b")
    assert not rg.extension_adjacent(pent, ca, cb_far)
    cb_near = rg.class_of_geodesic(pent, (), "b")
    assert rg.extension_adjacent(pent, ca, cb_near)


def test_height_shortcut_matches_gate_oracle():
    import random

    rng = random.Random(3)
    for g in (gc.pentagon(), gc.k2(), gc.path3(), gc.discrete(2)):
        letters = [(v, e) for v in g.vertices for e in (1, -1)]
        for _ in range(60):
            x = rg.normal_form(
                g, tuple(rng.choice(letters) for _ in range(rng.randint(0, 6))))
            base = rg.normal_form(
                g, tuple(rng.choice(letters) for _ in range(rng.randint(0, 3))))
            v = rng.choice(g.vertices)
            pc = rg.class_of_geodesic(g, base, v)
            k, _ = rg.project_to_geodesic(g, x, rg.geodesic_of_class(g, pc))
            assert rg.height_of(g, pc, x) == k


def test_canonical_quotient_is_davis_ball():
    # collapsing the vertical walls of ball_Xe (keeping the horizontal ones)
    # reproduces the Davis ball near the basepoint, rank labels included
    from cubikit import building as bdg

    g = gc.k2()
    be = rg.ball_Xe(g, 4)
    hps = cc.hyperplanes(be)
    horizontal = [h for h in hps
                  if h.direction.startswith("h:") and not h.truncated]
    rq = cc.restriction_quotient(be, horizontal)

    def qlabel(tv):
        member = rq.map.fiber(tv)[0]
        w, cl = rg.parse_xe_id(member)
        return (len(cl), tuple(cl))

    db = bdg.davis_ball(g, 3)

    def dlabel(vid):
        r = db.residue_of[vid]
        return (r.rank, r.type_J)

    base_q = rq.map.vertex_map[rg.xe_id((), ())]
    base_d = bdg.residue(g, (), ()).id
    sub_q = rq.target.span(rq.target.ball_around(base_q, 2))
    # the building is locally infinite: cut the Davis 2-ball down to the
    # base-length window the exploded ball's truncation can see
    sub_d = db.ball.span([v for v in db.ball.ball_around(base_d, 2)
                          if len(db.residue_of[v].base) <= 2])
    iso = cc.labeled_isomorphism(
        sub_q, sub_d, qlabel, dlabel,
        fix=[(base_q, base_d)])
    assert iso is not None


def test_collapse_horizontal_gives_group_elements():
    # killing the horizontal walls instead leaves one fiber per element of X
    g = gc.k2()
    be = rg.ball_Xe(g, 3)
    hps = cc.hyperplanes(be)
    vertical = [h for h in hps
                if h.direction.startswith("v:") and not h.truncated]
    rq = cc.restriction_quotient(be, vertical)
    for tv in rq.target.vertex_ids:
        words = {rg.parse_xe_id(m)[0] for m in rq.map.fiber(tv)}
        assert len(words) == 1


def test_l1_equals_walls_c5_exhaustive():
    g = gc.pentagon()
    b = rg.ball_X(g, 3)
    hps = cc.hyperplanes(b)
    inside = [v for v in b.vertex_ids if b.depth[v] >= 1]
    for i, x in enumerate(inside):
        for y in inside[i + 1:]:
            assert b.distance(x, y) == \
                len(cc.separating_hyperplanes(b, hps, x, y))


def test_v_levels_pentagon():
    g = gc.pentagon()
    b = rg.ball_X(g, 2)
    pc = rg.class_of_geodesic(g, (), "a")
    levels = rg.v_levels(g, pc, b, margin=1)
    members = [m for lv in levels for m in lv.members]
    assert len(members) == len(set(members)) == \
        len([v for v in b.vertex_ids if b.depth[v] >= 1])
