import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from reductive.algebra import act, bracket, build_group, exp_action, expm_skew
from reductive.errors import DimensionMismatch, StructureViolation

from conftest import group

XI11 = [[0.0, 1.0], [1.0, 0.0]]


def test_so11_builds_with_zero_residual():
    G = build_group({"dim_v": 2, "k_basis": [], "p_basis": [XI11]})
    assert (G.dim_k, G.dim_p) == (0, 1)
    assert G.structure_residual == 0.0


def test_so22_brackets_land_in_k():
    G = group("so22")
    assert (G.dim_k, G.dim_p) == (2, 4)
    # oracle: least-squares expansion of [p_i, p_j] over the raw k matrices
    K = G.raw_k.reshape(2, -1).T
    for a in G.raw_p:
        for b in G.raw_p:
            c = (a @ b - b @ a).ravel()
            coef, *_ = np.linalg.lstsq(K, c, rcond=None)
            assert np.linalg.norm(K @ coef - c) < 1e-12


def test_nonsymmetric_p_is_rejected():
    with pytest.raises(StructureViolation) as err:
        build_group({"dim_v": 2, "p_basis": [[[0.0, 1.0], [0.0, 0.0]]]})
    assert "symmetric" in str(err.value)
    assert err.value.residual > 0


def test_bracket_closure_violation_names_the_pair():
    # two symmetric generators whose bracket is not in the (empty) k span
    with pytest.raises(StructureViolation) as err:
        build_group({"dim_v": 2, "p_basis": [XI11, [[1.0, 0.0], [0.0, -1.0]]]})
    assert "[p,p]" in err.value.axiom
    assert "(0, 1)" in err.value.detail


def test_dependent_basis_rejected():
    with pytest.raises(StructureViolation):
        build_group({"dim_v": 2, "p_basis": [XI11, [[0.0, 2.0], [2.0, 0.0]]]})


def test_wrong_shape_rejected():
    with pytest.raises(DimensionMismatch):
        build_group({"dim_v": 3, "p_basis": [XI11]})


def test_component_rep_must_normalize():
    bad = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    with pytest.raises(StructureViolation):
        build_group({"dim_v": 2, "p_basis": [XI11], "component_reps": [bad.tolist()]})


def test_builtins_validate(any_group):
    assert any_group.structure_residual < 1e-12
    n = any_group.dim_v
    for c in list(any_group.component_reps) + list(any_group.ambient_reps):
        np.testing.assert_allclose(c @ c.T, np.eye(n), atol=1e-12)


def test_orthonormal_internal_bases(any_group):
    B = any_group.basis_flat
    np.testing.assert_allclose(B @ B.T, np.eye(any_group.dim_g), atol=1e-12)


def test_sl2_bracket_e_f_is_h():
    # gl(2) realized on itself: sl2 with k = rot, p = (h, s)
    h = np.diag([1.0, -1.0])
    s = np.array([[0.0, 1.0], [1.0, 0.0]])
    r = np.array([[0.0, -1.0], [1.0, 0.0]])
    G = build_group({"dim_v": 2, "k_basis": [r], "p_basis": [h, s]})
    e = G.element_from_matrix([[0.0, 1.0], [0.0, 0.0]])
    f = G.element_from_matrix([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose(bracket(e, f), h, atol=1e-14)
    np.testing.assert_allclose(bracket(e, e), 0.0, atol=1e-15)


def test_act_examples():
    G = group("so11")
    xi = G.element_from_matrix(XI11)
    np.testing.assert_allclose(act(xi, [1.0, 0.0]), [0.0, 1.0])
    np.testing.assert_allclose(act(G.element(), [3.0, 4.0]), [0.0, 0.0])


def test_exp_action_closed_form():
    G = group("so11")
    xi = G.element_from_matrix(XI11)
    for t in (0.0, 0.3, -1.7, 2.5):
        np.testing.assert_allclose(exp_action(xi, t, [1.0, 0.0]), [np.cosh(t), np.sinh(t)], rtol=1e-12)


def test_exp_action_derivative_is_act(rng):
    G = group("sl2c-adjoint")
    a = G.element_from_coords(rng.normal(size=G.dim_g))
    v = rng.normal(size=G.dim_v)
    t = 1e-6
    fd = (exp_action(a, t, v) - v) / t
    assert np.linalg.norm(fd - act(a, v)) < 1e-4


def test_expm_skew_matches_scipy(rng):
    a = rng.normal(size=(5, 5))
    a = a - a.T
    np.testing.assert_allclose(expm_skew(a), expm(a), atol=1e-12)


coords = st.lists(st.floats(-2, 2), min_size=6, max_size=6)


@given(coords, coords, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_exp_group_property(c, v, s, t):
    G = group("so22")
    a = G.element_from_coords(c)
    v = np.array(v[:4])
    lhs = exp_action(a, s + t, v)
    rhs = exp_action(a, s, exp_action(a, t, v))
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * (1 + np.linalg.norm(lhs))
    back = exp_action(a, -t, exp_action(a, t, v))
    assert np.linalg.norm(back - v) <= 1e-9 * (1 + np.linalg.norm(v))


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint", "so2-rotation"]), st.integers(0, 10**6))
def test_k_flow_preserves_norm(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    a = G.element(r.normal(size=G.dim_k))
    v = r.normal(size=G.dim_v)
    for t in (0.4, -2.0):
        assert abs(np.linalg.norm(exp_action(a, t, v)) - np.linalg.norm(v)) < 1e-10 * np.linalg.norm(v)
    # d/dt |exp(t a) v|^2 at 0 vanishes
    h = 1e-5
    d = (np.sum(exp_action(a, h, v) ** 2) - np.sum(exp_action(a, -h, v) ** 2)) / (2 * h)
    assert abs(d) < 1e-6


@given(st.sampled_from(["so22", "sl2r-adjoint", "sl2c-adjoint"]), st.integers(0, 10**6))
def test_theta_grading_of_brackets(name, seed):
    G = group(name)
    r = np.random.default_rng(seed)
    a = r.normal(size=G.dim_g)
    b = r.normal(size=G.dim_g)
    A, B = G.realize(a), G.realize(b)
    C = A @ B - B @ A
    coords = G.basis_flat @ C.ravel()
    # the bracket lies in g
    assert np.linalg.norm(G.realize(coords) - C) < 1e-10 * (1 + np.linalg.norm(a) * np.linalg.norm(b))
    # theta is an automorphism: theta[A, B] = [theta A, theta B]
    tA, tB = -A.T, -B.T
    assert np.linalg.norm(-C.T - (tA @ tB - tB @ tA)) < 1e-10 * (1 + np.linalg.norm(a) * np.linalg.norm(b))
