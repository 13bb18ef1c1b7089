"""Compatible matrix groups ``G = K exp(p)`` acting on a real inner-product space.

A group is stored through its Lie algebra ``g = k + p`` realized inside
``gl(V)``: ``k`` by skew-symmetric matrices (so ``K`` acts orthogonally) and
``p`` by symmetric matrices.  The Cartan involution is ``theta(X) = -X^T``.
Finitely many orthogonal matrices may be attached as representatives of the
non-identity components of ``K`` (``component_reps``), of a normalizer of an
isotropy group (``normalizer_reps``) or of outer symmetries induced from an
ambient group (``ambient_reps``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatch, StructureViolation


def _as_matrix_stack(mats, dim, name):
    if mats is None or len(mats) == 0:
        return np.zeros((0, dim, dim))
    arr = np.asarray(mats, dtype=float)
    if arr.ndim != 3 or arr.shape[1:] != (dim, dim):
        raise DimensionMismatch(
            f"{name}: expected matrices of shape ({dim}, {dim}), got {arr.shape[1:]}"
        )
    if not np.all(np.isfinite(arr)):
        raise StructureViolation("finite entries", name)
    return arr


def expm_skew(a):
    """Exponential of a real skew-symmetric matrix through the Hermitian ``i a``."""
    w, u = np.linalg.eigh(1j * a)
    return np.real((u * np.exp(-1j * w)) @ u.conj().T)


def orthonormal_rows(rows, tol=1e-10):
    """Orthonormal basis (as rows) of the span of ``rows``; numerically dependent rows are dropped."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0 or rows.shape[0] == 0:
        return np.zeros((0, rows.shape[-1]))
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, rows.shape[1]))
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return _canonical_signs(vt[:rank])


def _canonical_signs(rows):
    # deterministic sign: first entry of largest magnitude is positive
    rows = rows.copy()
    for i, r in enumerate(rows):
        j = int(np.argmax(np.abs(r)))
        if r[j] < 0:
            rows[i] = -r
    return rows


def _gram_schmidt_flat(mats):
    """Orthonormalize a stack of matrices in the trace inner product <A, B> = tr(A B^T).

    Uses QR so the result spans exactly the same subspace as the input and
    keeps the skew/symmetric character of each element.
    """
    m = mats.shape[0]
    if m == 0:
        return mats.copy()
    n = mats.shape[1]
    flat = mats.reshape(m, n * n)
    q, r = np.linalg.qr(flat.T)
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return q.T.reshape(m, n, n)


@dataclass(frozen=True, eq=False)
class CompatibleGroup:
    """Matrix realization of a compatible group ``G = K exp(p)`` on ``V = R^dim_v``.

    ``k_basis``/``p_basis`` hold the orthonormalized internal copies; the raw
    input bases are kept in ``raw_k``/``raw_p``.  Algebra coordinates always
    refer to the orthonormal bases, ``k`` first.
    """

    dim_v: int
    k_basis: np.ndarray
    p_basis: np.ndarray
    raw_k: np.ndarray
    raw_p: np.ndarray
    component_reps: np.ndarray
    normalizer_reps: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    ambient_reps: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    name: str = ""
    structure_tol: float = 1e-10
    structure_residual: float = 0.0

    @property
    def dim_k(self):
        return self.k_basis.shape[0]

    @property
    def dim_p(self):
        return self.p_basis.shape[0]

    @property
    def dim_g(self):
        return self.dim_k + self.dim_p

    @cached_property
    def basis(self):
        """Orthonormal basis of ``g`` as an array of shape (dim_g, n, n)."""
        return np.concatenate([self.k_basis, self.p_basis], axis=0).reshape(
            self.dim_g, self.dim_v, self.dim_v
        )

    @cached_property
    def basis_flat(self):
        return self.basis.reshape(self.dim_g, self.dim_v * self.dim_v)

    @cached_property
    def theta_signs(self):
        return np.concatenate([np.ones(self.dim_k), -np.ones(self.dim_p)])

    @cached_property
    def structure_constants(self):
        """``C[i, a, b]`` = coordinate along basis ``a`` of ``[B_i, B_b]``."""
        B = self.basis
        br = np.einsum("inm,jmk->ijnk", B, B) - np.einsum("jnm,imk->ijnk", B, B)
        flat = br.reshape(self.dim_g, self.dim_g, -1)
        # flat[i, b] . basis_flat[a]
        return np.einsum("ibf,af->iab", flat, self.basis_flat)

    def element(self, coeffs_k=None, coeffs_p=None):
        ck = np.zeros(self.dim_k) if coeffs_k is None else np.asarray(coeffs_k, dtype=float)
        cp = np.zeros(self.dim_p) if coeffs_p is None else np.asarray(coeffs_p, dtype=float)
        if ck.shape != (self.dim_k,) or cp.shape != (self.dim_p,):
            raise DimensionMismatch("coefficient vector length does not match basis size")
        return AlgebraElement(self, ck, cp)

    def element_from_coords(self, coords):
        coords = np.asarray(coords, dtype=float)
        return AlgebraElement(self, coords[: self.dim_k].copy(), coords[self.dim_k :].copy())

    def element_from_matrix(self, mat):
        """Orthogonal projection of a matrix onto ``g``, returned as an element."""
        coords = self.basis_flat @ np.asarray(mat, dtype=float).ravel()
        return self.element_from_coords(coords)

    def realize(self, coords):
        """Matrix of the algebra element with the given coordinates."""
        return np.tensordot(np.asarray(coords, dtype=float), self.basis, axes=1)

    def k_matrix(self, theta):
        """``exp(sum theta_i k_i)`` for k-coordinates ``theta``."""
        if self.dim_k == 0:
            return np.eye(self.dim_v)
        a = (np.asarray(theta, dtype=float) @ self.k_flat).reshape(self.dim_v, self.dim_v)
        return expm_skew(a)

    @cached_property
    def k_flat(self):
        return self.k_basis.reshape(self.dim_k, -1)

    def adjoint(self, g):
        """Matrix of ``X -> g X g^{-1}`` on g-coordinates; ``g`` must normalize ``g``."""
        g = np.asarray(g, dtype=float)
        ginv = np.linalg.inv(g)
        conj = np.einsum("ab,ibc,cd->iad", g, self.basis, ginv).reshape(self.dim_g, -1)
        return self.basis_flat @ conj.T

    def adjoint_orthogonal(self, k):
        """Same as :meth:`adjoint` for orthogonal ``k`` (cheaper)."""
        return self.basis_flat @ np.kron(k, k) @ self.basis_flat.T


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of ``g`` in orthonormal coordinates over ``k`` and ``p``."""

    group: CompatibleGroup
    coeffs_k: np.ndarray
    coeffs_p: np.ndarray

    @property
    def coords(self):
        return np.concatenate([self.coeffs_k, self.coeffs_p])

    @property
    def matrix(self):
        return self.group.realize(self.coords)

    def __add__(self, other):
        return AlgebraElement(self.group, self.coeffs_k + other.coeffs_k, self.coeffs_p + other.coeffs_p)

    def __mul__(self, scalar):
        return AlgebraElement(self.group, scalar * self.coeffs_k, scalar * self.coeffs_p)

    __rmul__ = __mul__


def _bracket_residual(a, b, target_on):
    c = a @ b - b @ a
    if target_on.shape[0] == 0:
        return float(np.linalg.norm(c))
    flat = c.ravel()
    proj = target_on.reshape(target_on.shape[0], -1).T @ (target_on.reshape(target_on.shape[0], -1) @ flat)
    return float(np.linalg.norm(flat - proj))


def _check_normalizes(c, k_on, p_on, tol, label):
    worst = 0.0
    n = c.shape[0]
    orth = float(np.linalg.norm(c @ c.T - np.eye(n)))
    if orth > tol * n:
        raise StructureViolation("orthogonal representative", label, orth)
    for name, basis in (("k", k_on), ("p", p_on)):
        if basis.shape[0] == 0:
            continue
        flat = basis.reshape(basis.shape[0], -1)
        for i, x in enumerate(basis):
            y = (c @ x @ c.T).ravel()
            res = float(np.linalg.norm(y - flat.T @ (flat @ y)))
            worst = max(worst, res)
            if res > tol:
                raise StructureViolation(
                    f"representative normalizes span({name})", f"{label}, basis {i}", res
                )
    return worst


def build_group(raw):
    """Validate a raw group description and return a :class:`CompatibleGroup`.

    ``raw`` is a mapping with ``dim_v``, ``k_basis`` and ``p_basis`` (lists of
    square matrices) and optionally ``component_reps``, ``normalizer_reps``,
    ``ambient_reps``, ``name`` and ``structure_tol``.  The worst residual of
    all checked axioms is stored as ``structure_residual``.
    """
    if "dim_v" not in raw:
        raise DimensionMismatch("group description lacks dim_v")
    dim = int(raw["dim_v"])
    if dim <= 0:
        raise DimensionMismatch("dim_v must be positive")
    tol = float(raw.get("structure_tol", 1e-10))
    k = _as_matrix_stack(raw.get("k_basis", []), dim, "k_basis")
    p = _as_matrix_stack(raw.get("p_basis", []), dim, "p_basis")
    worst = 0.0

    for i, x in enumerate(k):
        res = float(np.linalg.norm(x + x.T)) / max(1.0, float(np.linalg.norm(x)))
        worst = max(worst, res)
        if res > tol:
            raise StructureViolation("k_basis skew-symmetric", f"k_basis[{i}]", res)
    for i, x in enumerate(p):
        res = float(np.linalg.norm(x - x.T)) / max(1.0, float(np.linalg.norm(x)))
        worst = max(worst, res)
        if res > tol:
            raise StructureViolation("p_basis symmetric", f"p_basis[{i}]", res)

    allb = np.concatenate([k, p], axis=0)
    if allb.shape[0]:
        s = np.linalg.svd(allb.reshape(allb.shape[0], -1), compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise StructureViolation("linear independence of k_basis and p_basis", "", float(s[-1] / s[0]))

    # symmetrize away sub-tolerance noise so the orthonormal copies are exact
    k = 0.5 * (k - np.transpose(k, (0, 2, 1)))
    p = 0.5 * (p + np.transpose(p, (0, 2, 1)))
    k_on = _gram_schmidt_flat(k)
    p_on = _gram_schmidt_flat(p)

    checks = (("[k,k] in k", k, k, k_on), ("[k,p] in p", k, p, p_on), ("[p,p] in k", p, p, k_on))
    for axiom, left, right, target in checks:
        for i, a in enumerate(left):
            for j, b in enumerate(right):
                scale = max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)))
                res = _bracket_residual(a, b, target) / scale
                worst = max(worst, res)
                if res > tol:
                    raise StructureViolation(axiom, f"basis pair ({i}, {j})", res)

    reps = {}
    for key in ("component_reps", "normalizer_reps", "ambient_reps"):
        mats = _as_matrix_stack(raw.get(key, []), dim, key)
        for i, c in enumerate(mats):
            worst = max(worst, _check_normalizes(c, k_on, p_on, max(tol, 1e-9), f"{key}[{i}]"))
        reps[key] = mats

    return CompatibleGroup(
        dim_v=dim,
        k_basis=k_on,
        p_basis=p_on,
        raw_k=k,
        raw_p=p,
        component_reps=reps["component_reps"],
        normalizer_reps=reps["normalizer_reps"],
        ambient_reps=reps["ambient_reps"],
        name=str(raw.get("name", "")),
        structure_tol=tol,
        structure_residual=worst,
    )


def bracket(a, b):
    """Commutator ``AB - BA`` of the realized matrices."""
    if a.group is not b.group:
        raise DimensionMismatch("elements belong to different groups")
    A, B = a.matrix, b.matrix
    return A @ B - B @ A


def act(a, v):
    """Fundamental vector field of ``a`` at ``v``: the matrix-vector product."""
    v = np.asarray(v, dtype=float)
    if v.shape != (a.group.dim_v,):
        raise DimensionMismatch(f"vector of length {v.shape} for dim_v={a.group.dim_v}")
    return a.matrix @ v


def exp_action(a, t, v):
    """``exp(t a) v`` via scaling-and-squaring Pade (scipy)."""
    v = np.asarray(v, dtype=float)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return expm(t * a.matrix) @ v
