import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingboundary import lattice as lat


def test_square_enumeration_row_major():
    spec = lat.LatticeSpec("square", 2, 2)
    sites = lat.enumerate_sites(spec)
    assert len(sites) == 4
    assert [(s.x, s.y) for s in sites] == [(0, 1), (1, 1), (0, 2), (1, 2)]
    assert all(s.role == lat.PLAIN for s in sites)


def test_lieb_site_count_formula():
    for Lx, Ly in ((2, 2), (3, 2), (3, 3), (4, 5)):
        spec = lat.LatticeSpec("lieb", Lx, Ly)
        expect = Lx * Ly + (Lx - 1) * Ly + Lx * (Ly - 1)
        assert lat.site_count(spec) == expect


def test_square_site_count():
    assert lat.site_count(lat.LatticeSpec("square", 5, 7)) == 35


def test_rough_bottom_adds_dangling_edges():
    smooth = lat.LatticeSpec("lieb", 3, 3)
    rough = lat.LatticeSpec("lieb", 3, 3, bottom="rough")
    assert lat.site_count(rough) == lat.site_count(smooth) + 3
    dang = [s for s in lat.enumerate_sites(rough) if s.y == 0]
    assert all(s.role == lat.VEDGE for s in dang) and len(dang) == 3
    # dangling edges come first (lowest band) and have exactly one neighbour
    assert [s.index for s in dang] == [0, 1, 2]
    for s in dang:
        assert len(lat.neighbors(rough, s)) == 1


def test_periodic_wraparound_neighbor():
    spec = lat.LatticeSpec("square", 4, 2, x_periodic=True)
    assert lat.site_count(spec) == 8
    lk = lat.site_lookup(spec)
    nbrs = lat.neighbors(spec, lk[(3, 1, lat.PLAIN)])
    assert lk[(0, 1, lat.PLAIN)] in nbrs
    # odd periodic square rings are rejected (bipartition would break)
    with pytest.raises(ValueError):
        lat.LatticeSpec("square", 3, 2, x_periodic=True)


def test_interior_and_corner_neighbor_counts():
    spec = lat.LatticeSpec("square", 4, 4)
    lk = lat.site_lookup(spec)
    assert len(lat.neighbors(spec, lk[(1, 2, lat.PLAIN)])) == 4
    assert len(lat.neighbors(spec, lk[(0, 1, lat.PLAIN)])) == 2


def test_lieb_edge_sites_have_two_vertex_neighbors():
    spec = lat.LatticeSpec("lieb", 3, 3)
    for s in lat.enumerate_sites(spec):
        nbrs = lat.neighbors(spec, s)
        if s.role in (lat.HEDGE, lat.VEDGE):
            assert len(nbrs) == 2
            assert all(n.role == lat.VERTEX for n in nbrs)


def test_unknown_site_rejected():
    spec = lat.LatticeSpec("lieb", 3, 3)
    ghost = lat.SiteId(999, 7, 7, lat.VERTEX)
    with pytest.raises(KeyError):
        lat.neighbors(spec, ghost)


def test_sublattice_convention():
    sq = lat.LatticeSpec("square", 3, 3)
    lk = lat.site_lookup(sq)
    assert lat.sublattice(sq, lk[(0, 1, lat.PLAIN)]) == lat.CIRC
    assert lat.sublattice(sq, lk[(1, 1, lat.PLAIN)]) == lat.BULLET
    lb = lat.LatticeSpec("lieb", 3, 3)
    for s in lat.enumerate_sites(lb):
        want = lat.CIRC if s.role == lat.VERTEX else lat.BULLET
        assert lat.sublattice(lb, s) == want


def test_boundary_sites():
    assert len(lat.boundary_sites(lat.LatticeSpec("square", 4, 4))) == 4
    assert len(lat.boundary_sites(lat.LatticeSpec("lieb", 3, 3))) == 5
    assert len(lat.boundary_sites(lat.LatticeSpec("lieb", 3, 3, x_periodic=True))) == 6


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        lat.LatticeSpec("square", 1, 4)
    with pytest.raises(ValueError):
        lat.LatticeSpec("triangular", 3, 3)
    with pytest.raises(ValueError):
        lat.LatticeSpec("square", 3, 3, bottom="rough")


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["square", "lieb"]), Lx=st.integers(2, 5),
       Ly=st.integers(2, 4), periodic=st.booleans(), rough=st.booleans())
def test_neighbor_symmetry_and_bipartition(kind, Lx, Ly, periodic, rough):
    if periodic and (Lx < 3 or (kind == "square" and Lx % 2)):
        periodic = False
    bottom = "rough" if (rough and kind == "lieb") else "smooth"
    spec = lat.LatticeSpec(kind, Lx, Ly, x_periodic=periodic, bottom=bottom)
    lk = lat.site_lookup(spec)
    for s in lat.enumerate_sites(spec):
        for nb in lat.neighbors(spec, s, _lookup=lk):
            assert s in lat.neighbors(spec, nb, _lookup=lk)
            assert lat.sublattice(spec, s) != lat.sublattice(spec, nb)
