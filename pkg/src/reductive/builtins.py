"""Shipped group descriptions.

Every builtin is a plain ``dict`` in the same schema the config loader
reads, so it can be dumped to a file, edited, and loaded back.
"""

import numpy as np


def _unit(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def _adjoint_rep(ops, v_basis, inner):
    """Matrices of ``X -> [op, X]`` on the real orthonormal basis ``v_basis``."""
    mats = []
    for op in ops:
        m = np.array([[inner(a, op @ b - b @ op) for b in v_basis] for a in v_basis])
        mats.append(m)
    return mats


def _conjugation_rep(g, v_basis, inner):
    ginv = np.linalg.inv(g)
    return np.array([[inner(a, g @ b @ ginv) for b in v_basis] for a in v_basis])


def so11():
    return {
        "name": "so11",
        "dim_v": 2,
        "k_basis": [],
        "p_basis": [[[0.0, 1.0], [1.0, 0.0]]],
    }


def so22():
    """SO(2,2) on R^4 = R^2 x R^2 preserving diag(1, 1, -1, -1).

    ``component_reps`` holds the second component of S(O(2) x O(2)).  The
    factor swap ``k0 = [[0, -I], [I, 0]]`` is not in SO(2,2) but normalizes
    it; it is attached as an ambient representative, the way it appears when
    V is the slice of SL_4(R) x^{SO(2,2)} V at [e, 0].
    """
    n = 4
    k = [_unit(n, 0, 1) - _unit(n, 1, 0), _unit(n, 2, 3) - _unit(n, 3, 2)]
    p = [_unit(n, i, j) + _unit(n, j, i) for i in (0, 1) for j in (2, 3)]
    comp = np.diag([1.0, -1.0, 1.0, -1.0])
    k0 = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    flip = np.diag([-1.0, -1.0, 1.0, 1.0])
    return {
        "name": "so22",
        "dim_v": n,
        "k_basis": [m.tolist() for m in k],
        "p_basis": [m.tolist() for m in p],
        "component_reps": [comp.tolist()],
        "normalizer_reps": [flip.tolist()],
        "ambient_reps": [k0.tolist()],
    }


SL2_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
SL2_H = np.diag([1.0, -1.0])
SL2_S = np.array([[0.0, 1.0], [1.0, 0.0]])


def sl2r_vbasis():
    """Orthonormal basis of sl_2(R) under tr(X Y^T): (h, s, rotation) / sqrt 2."""
    r2 = np.sqrt(2.0)
    return [SL2_H / r2, SL2_S / r2, SL2_ROT / r2]


def sl2r_adjoint():
    vb = sl2r_vbasis()

    def inner(a, b):
        return float(np.trace(a @ b.T))

    k = _adjoint_rep([SL2_ROT], vb, inner)
    p = _adjoint_rep([SL2_H, SL2_S], vb, inner)
    weyl = _conjugation_rep(SL2_ROT, vb, inner)
    return {
        "name": "sl2r-adjoint",
        "dim_v": 3,
        "k_basis": [m.tolist() for m in k],
        "p_basis": [m.tolist() for m in p],
        "normalizer_reps": [weyl.tolist()],
    }


PAULI = [
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
]


def sl2c_vbasis():
    """Real orthonormal basis of sl_2(C) under Re tr(X Y^*)."""
    r2 = np.sqrt(2.0)
    return [s / r2 for s in PAULI] + [1j * s / r2 for s in PAULI]


def sl2c_adjoint():
    """sl_2(C) adjoint representation, realified to R^6."""
    vb = sl2c_vbasis()

    def inner(a, b):
        return float(np.real(np.trace(a @ b.conj().T)))

    k = _adjoint_rep([1j * s for s in PAULI], vb, inner)
    p = _adjoint_rep(PAULI, vb, inner)
    w = np.array([[0, -1], [1, 0]], dtype=complex)
    weyl = _conjugation_rep(w, vb, inner)
    return {
        "name": "sl2c-adjoint",
        "dim_v": 6,
        "k_basis": [m.tolist() for m in k],
        "p_basis": [m.tolist() for m in p],
        "normalizer_reps": [weyl.tolist()],
    }


def so2_rotation():
    return {
        "name": "so2-rotation",
        "dim_v": 2,
        "k_basis": [[[0.0, -1.0], [1.0, 0.0]]],
        "p_basis": [],
    }


BUILTINS = {
    "so11": so11,
    "so22": so22,
    "sl2r-adjoint": sl2r_adjoint,
    "sl2c-adjoint": sl2c_adjoint,
    "so2-rotation": so2_rotation,
}


def builtin_description(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None


def builtin_group(name):
    from .algebra import build_group

    return build_group(builtin_description(name))
