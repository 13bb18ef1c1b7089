import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from reductive.algebra import build_group
from reductive.isotropy import isotropy_algebra, k_conjugacy_search
from reductive.strata import (
    OK,
    assign_label,
    build_catalog,
    classify_point,
    dense_stratum,
    gaussian_samples,
    sphere_samples,
)

from conftest import group, sl2r_mat

E1 = np.array([1.0, 0.0, 0.0, 0.0])


@pytest.fixture(scope="module")
def so22_catalog():
    G = group("so22")
    return G, build_catalog(G, sphere_samples(4, 500, 7), seed=7)


@pytest.fixture(scope="module")
def sl2r_catalog():
    G = group("sl2r-adjoint")
    pts = gaussian_samples(3, 2000, 11)
    return G, pts, build_catalog(G, pts, seed=11)


def test_origin_is_nullcone_class(any_group):
    pc = classify_point(any_group, np.zeros(any_group.dim_v))
    assert pc.in_nullcone
    assert pc.rep.dim_total == any_group.dim_g


def test_so22_big_first_factor_is_conjugate_to_e1(rng):
    G = group("so22")
    h1 = isotropy_algebra(G, E1)
    for _ in range(5):
        v = rng.normal(size=4)
        if np.linalg.norm(v[:2]) <= np.linalg.norm(v[2:]):
            v = np.concatenate([v[2:], v[:2]])
        pc = classify_point(G, v)
        assert k_conjugacy_search(G, pc.rep, h1).conjugate


def test_sl2r_det_classification(rng):
    G = group("sl2r-adjoint")
    for _ in range(20):
        v = rng.normal(size=3)
        det = np.linalg.det(sl2r_mat(v))
        pc = classify_point(G, v)
        if det > 0:
            assert pc.rep.dims == (1, 1, 0)
        else:
            assert pc.rep.dims == (1, 0, 1)
    nil = classify_point(G, [0.0, 1.0, 1.0])  # s + rot is nilpotent
    assert abs(np.linalg.det(sl2r_mat([0.0, 1.0, 1.0]))) < 1e-15
    assert nil.in_nullcone


def test_so22_catalog(so22_catalog):
    G, cat = so22_catalog
    opened = cat.open_entries
    assert len(opened) == 2
    assert all(e.fingerprint.as_list() == [3, 1, 2, 1, 3] for e in opened)
    assert cat.entries[0].is_nullcone_stratum and not cat.entries[0].is_open
    assert sum(cat.fractions.values()) == pytest.approx(1.0)
    for e in opened:
        assert 0.4 < cat.fractions[e.id] < 0.6
    # oracle: the sign of |v1| - |v2|
    side = {}
    for lab, pc in zip(cat.labels, cat.points):
        v = pc.flow.start
        s = np.sign(np.linalg.norm(v[:2]) - np.linalg.norm(v[2:]))
        side.setdefault(lab, set()).add(s)
    assert all(len(sides) == 1 for sides in side.values())
    assert dense_stratum(cat) is None


def test_sl2r_catalog_matches_det_split(sl2r_catalog):
    G, pts, cat = sl2r_catalog
    assert len(cat.open_entries) == 2
    dets = np.array([np.linalg.det(sl2r_mat(v)) for v in pts])
    by_dims = {e.rep_subalgebra.dims: e for e in cat.open_entries}
    split, compact = by_dims[(1, 0, 1)], by_dims[(1, 1, 0)]
    assert split.count == int(np.sum(dets < 0))
    assert compact.count == int(np.sum(dets > 0))
    assert all(f == OK for f in cat.flags)
    assert dense_stratum(cat) is None


def test_single_origin_sample():
    G = group("sl2r-adjoint")
    cat = build_catalog(G, [np.zeros(3)])
    assert len(cat.entries) == 1
    assert cat.entries[0].is_nullcone_stratum and cat.entries[0].count == 1


def test_dense_stratum_complex_case():
    G = group("sl2c-adjoint")
    cat = build_catalog(G, sphere_samples(6, 200, 3), seed=3)
    e = dense_stratum(cat)
    assert e is not None and e.rep_subalgebra.dims == (2, 1, 1)


def test_dense_stratum_trivial_group():
    G = build_group({"dim_v": 2})
    cat = build_catalog(G, sphere_samples(2, 50, 0))
    e = dense_stratum(cat)
    assert e is not None and cat.fractions[e.id] == 1.0


def test_catalog_is_deterministic():
    G = group("so22")
    pts = sphere_samples(4, 60, 5)
    a, b = build_catalog(G, pts, seed=5), build_catalog(G, pts, seed=5)
    assert a.as_dict() == b.as_dict()
    assert a.labels == b.labels


def test_assign_label_matches_catalog(so22_catalog, rng):
    G, cat = so22_catalog
    for lab, pc in list(zip(cat.labels, cat.points))[:10]:
        assert assign_label(cat, G, 3.0 * pc.flow.start) == lab


def test_wall_points_have_larger_isotropy(rng):
    G = group("so22")
    for _ in range(5):
        a, b = rng.normal(size=2), rng.normal(size=2)
        v = np.concatenate([a / np.linalg.norm(a), b / np.linalg.norm(b)])
        pc = classify_point(G, v)
        assert pc.rep.dim_total >= 3 + 1


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint"]), st.integers(0, 10**6))
def test_cone_and_saturation(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    v = r.normal(size=G.dim_v)
    base = classify_point(G, v)
    g = expm(G.realize(np.concatenate([r.normal(size=G.dim_k), np.zeros(G.dim_p)]))) @ expm(
        G.realize(np.concatenate([np.zeros(G.dim_k), 0.5 * r.normal(size=G.dim_p)]))
    )
    for w in (0.5 * v, 2.0 * v, g @ v):
        other = classify_point(G, w)
        assert other.fingerprint == base.fingerprint
        assert k_conjugacy_search(G, other.rep, base.rep, seed=1).conjugate
