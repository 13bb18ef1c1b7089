import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from reductive.isotropy import (
    coset_reps,
    fingerprint,
    fixed_space,
    is_bracket_closed,
    isotropy_algebra,
    k_conjugacy_search,
    make_subalgebra,
    normalizer_algebra,
    subspace_distance,
    whole_algebra,
    zero_algebra,
)
from reductive.kempfness import flow_to_minimal

from conftest import group, sl2r_vec

E1 = np.array([1.0, 0.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0, 0.0])


def _raw_nullity(G, v):
    # oracle: null space of the action matrix over the raw (non-orthonormal) bases
    raw = np.concatenate([G.raw_k, G.raw_p])
    A = np.stack([m @ v for m in raw], axis=1)
    return raw.shape[0] - np.linalg.matrix_rank(A, tol=1e-10)


def _centralizer_dim(mat):
    # oracle: traceless 2x2 X with XA = AX, solved on the 4 matrix entries
    cols = []
    for i in range(4):
        X = np.zeros(4)
        X[i] = 1.0
        X = X.reshape(2, 2)
        cols.append(np.concatenate([(X @ mat - mat @ X).ravel(), [np.trace(X)]]))
    return 4 - np.linalg.matrix_rank(np.array(cols).T, tol=1e-10)


def test_origin_isotropy_is_everything(any_group):
    h = isotropy_algebra(any_group, np.zeros(any_group.dim_v))
    assert h.dim_total == any_group.dim_g


def test_so22_isotropy_of_e1():
    G = group("so22")
    h = isotropy_algebra(G, E1)
    assert h.dim_total == 3 == _raw_nullity(G, E1)
    assert h.theta_stable
    assert h.dims == (3, 1, 2)


def test_sl2r_cartan_isotropies():
    G = group("sl2r-adjoint")
    d = np.diag([1.0, -1.0])
    r = np.array([[0.0, -1.0], [1.0, 0.0]])
    hd = isotropy_algebra(G, sl2r_vec(d))
    hr = isotropy_algebra(G, sl2r_vec(r))
    assert hd.dim_total == _centralizer_dim(d) == 1
    assert hr.dim_total == _centralizer_dim(r) == 1
    assert hd.dims == (1, 0, 1)
    assert hr.dims == (1, 1, 0)


def test_fixed_space_examples():
    G = group("so22")
    np.testing.assert_allclose(fixed_space(G, zero_algebra(G)), np.eye(4))
    F = fixed_space(G, isotropy_algebra(G, E1))
    assert F.shape == (1, 4)
    assert abs(abs(F[0] @ E1) - 1.0) < 1e-12
    S = group("sl2r-adjoint")
    h = isotropy_algebra(S, sl2r_vec(np.diag([1.0, -1.0])))
    F = fixed_space(S, h)
    assert F.shape == (1, 3)
    assert abs(abs(F[0] @ sl2r_vec(np.diag([1.0, -1.0]) / np.sqrt(2))) - 1.0) < 1e-12


def test_fixed_space_with_explicit_reps():
    G = group("so22")
    h = isotropy_algebra(G, E1)
    # the component rep diag(1,-1,1,-1) fixes e1, so imposing it keeps the line
    assert fixed_space(G, h, reps=G.component_reps).shape == (1, 4)
    # the swap does not fix e1
    assert fixed_space(G, h, reps=G.ambient_reps).shape == (0, 4)


def test_fingerprints():
    G = group("so22")
    assert fingerprint(G, isotropy_algebra(G, E1)).as_list() == [3, 1, 2, 1, 3]
    S = group("sl2r-adjoint")
    assert fingerprint(S, isotropy_algebra(S, sl2r_vec(np.diag([1.0, -1.0])))).as_list() == [1, 0, 1, 1, 2]
    assert fingerprint(S, isotropy_algebra(S, [0.0, 0.0, 1.0])).as_list() == [1, 1, 0, 1, 2]


def test_conjugacy_with_itself():
    G = group("so22")
    h = isotropy_algebra(G, E1)
    res = k_conjugacy_search(G, h, h)
    assert res.conjugate
    np.testing.assert_allclose(res.witness.matrix, np.eye(4))


def test_conjugacy_finds_rotated_copy(rng):
    G = group("sl2c-adjoint")
    v = flow_to_minimal(G, rng.normal(size=6)).limit
    k = G.k_matrix(rng.normal(size=3))
    h1, h2 = isotropy_algebra(G, v), isotropy_algebra(G, k @ v)
    res = k_conjugacy_search(G, h1, h2, seed=3)
    assert res.conjugate and res.distance < 1e-6
    moved = np.einsum("ab,ibc,dc->iad", res.witness.matrix, h1.matrices(G), res.witness.matrix)
    h_moved = make_subalgebra(G, moved.reshape(h1.dim_total, -1) @ G.basis_flat.T)
    assert subspace_distance(h_moved.basis, h2.basis) < 1e-5


def _torus_scan_distance(G, h1, h2, step):
    # oracle: brute-force scan of both components of the 2-torus K
    M1 = h1.matrices(G)
    M2 = h2.matrices(G).reshape(h2.dim_total, -1)
    grid = np.arange(0.0, 2 * np.pi, step)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    c1, s1, c2, s2 = np.cos(a).ravel(), np.sin(a).ravel(), np.cos(b).ravel(), np.sin(b).ravel()
    ks = np.zeros((c1.size, 4, 4))
    ks[:, 0, 0], ks[:, 0, 1], ks[:, 1, 0], ks[:, 1, 1] = c1, -s1, s1, c1
    ks[:, 2, 2], ks[:, 2, 3], ks[:, 3, 2], ks[:, 3, 3] = c2, -s2, s2, c2
    best = np.inf
    for c in coset_reps(G):
        kk = c @ ks
        moved = np.einsum("nab,ibc,ndc->niad", kk, M1, kk).reshape(len(kk), M1.shape[0], -1)
        ov = np.einsum("nif,jf->nij", moved, M2)
        d2 = 0.5 * (M1.shape[0] + M2.shape[0]) - np.sum(ov**2, axis=(1, 2))
        best = min(best, float(np.sqrt(max(0.0, d2.min()))))
    return best


def test_so22_factor_isotropies_not_conjugate():
    G = group("so22")
    h1, h2 = isotropy_algebra(G, E1), isotropy_algebra(G, E3)
    assert fingerprint(G, h1) == fingerprint(G, h2)
    res = k_conjugacy_search(G, h1, h2)
    assert not res.conjugate
    assert _torus_scan_distance(G, h1, h2, 0.01) > 0.5
    # allowing the factor swap makes them conjugate
    ext = k_conjugacy_search(G, h1, h2, reps=coset_reps(G, ambient=True))
    assert ext.conjugate


def test_sl2r_split_vs_compact_not_conjugate():
    G = group("sl2r-adjoint")
    res = k_conjugacy_search(G, isotropy_algebra(G, [1.0, 0, 0]), isotropy_algebra(G, [0, 0, 1.0]))
    assert not res.conjugate and res.reason == "fingerprint"


def test_normalizer_examples():
    S = group("sl2r-adjoint")
    assert normalizer_algebra(S, whole_algebra(S)).dim_total == 3
    h = isotropy_algebra(S, [1.0, 0.0, 0.0])
    n = normalizer_algebra(S, h)
    # oracle: xi with [xi, h] in span(h), a 3x3 solve on matrices
    H0 = np.diag([1.0, -1.0])
    basis = [np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([[0.0, -1.0], [1.0, 0.0]])]
    A = np.array([(X @ H0 - H0 @ X).ravel() for X in basis]).T
    P = np.eye(4) - np.outer(H0.ravel(), H0.ravel()) / 2
    assert n.dim_total == 3 - np.linalg.matrix_rank(P @ A) == 1
    O = group("so11")
    assert normalizer_algebra(O, zero_algebra(O)).dim_total == 1


def test_is_bracket_closed():
    G = group("so22")
    assert is_bracket_closed(G, isotropy_algebra(G, E1))
    # span of two p generators is not closed
    assert not is_bracket_closed(G, make_subalgebra(G, np.eye(6)[2:4]))


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint"]), st.integers(0, 10**6))
def test_isotropy_theta_stable_at_minimal_vectors(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    fl = flow_to_minimal(G, r.normal(size=G.dim_v))
    if not fl.in_nullcone:
        assert isotropy_algebra(G, fl.limit).theta_stable


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint"]), st.integers(0, 10**6))
def test_ad_equivariance(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    v = flow_to_minimal(G, r.normal(size=G.dim_v)).limit
    k = G.k_matrix(r.normal(size=G.dim_k))
    h = isotropy_algebra(G, v)
    hk = isotropy_algebra(G, k @ v)
    moved = h.basis @ G.adjoint_orthogonal(k).T
    assert subspace_distance(moved, hk.basis) < 1e-8


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint"]), st.integers(0, 10**6))
def test_normalizer_contains_h_and_is_closed(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    h = isotropy_algebra(G, flow_to_minimal(G, r.normal(size=G.dim_v)).limit)
    n = normalizer_algebra(G, h)
    assert is_bracket_closed(G, n)
    assert np.linalg.norm(h.basis - h.basis @ n.projector) < 1e-8


def test_conjugacy_search_is_symmetric(rng):
    G = group("so22")
    v = flow_to_minimal(G, rng.normal(size=4)).limit
    k = G.k_matrix(rng.normal(size=2)) @ G.component_reps[0]
    h1, h2 = isotropy_algebra(G, v), isotropy_algebra(G, k @ v)
    a, b = k_conjugacy_search(G, h1, h2, seed=5), k_conjugacy_search(G, h2, h1, seed=5)
    assert a.conjugate and b.conjugate
    # the witnesses need not be inverse matrices (the normalizer is nontrivial), but each conjugates
    for res, x, y in ((a, h1, h2), (b, h2, h1)):
        moved = x.basis @ G.adjoint_orthogonal(res.witness.matrix).T
        assert subspace_distance(moved, y.basis) < 1e-5
