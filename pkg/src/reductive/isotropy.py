"""Isotropy subalgebras, fixed spaces, normalizers and K-conjugacy search."""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .algebra import orthonormal_rows
from .options import DEFAULT


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """Subspace of ``g`` given by orthonormal coordinate rows.

    For theta-stable subalgebras ``basis`` lists the k-part rows first and
    ``k_part``/``p_part`` hold the two pieces of the splitting.
    """

    basis: np.ndarray
    dim_total: int
    dim_k: int
    dim_p: int
    theta_stable: bool
    k_part: np.ndarray
    p_part: np.ndarray

    @property
    def projector(self):
        return self.basis.T @ self.basis

    def matrices(self, G):
        return np.tensordot(self.basis, G.basis, axes=1)

    def p_matrices(self, G):
        return np.tensordot(self.p_part, G.basis, axes=1)

    def k_matrices(self, G):
        return np.tensordot(self.k_part, G.basis, axes=1)

    @property
    def dims(self):
        return (self.dim_total, self.dim_k, self.dim_p)


@dataclass(frozen=True)
class Fingerprint:
    dims: tuple
    fixed_dim: int
    orbit_dim: int

    def as_list(self):
        return [*self.dims, self.fixed_dim, self.orbit_dim]


@dataclass(frozen=True, eq=False)
class KElement:
    """``rep @ exp(sum theta_i k_i)``; ``rep_index`` indexes the rep list used by the search."""

    rep_index: int
    theta: np.ndarray
    matrix: np.ndarray

    def as_dict(self):
        return {"rep_index": int(self.rep_index), "theta": [float(t) for t in self.theta]}


@dataclass(frozen=True, eq=False)
class ConjugacyResult:
    conjugate: bool
    witness: KElement | None
    distance: float | None
    reason: str = ""


def make_subalgebra(G, rows, tol=DEFAULT):
    """Wrap a spanning set of g-coordinate rows as a :class:`Subalgebra`."""
    rows = np.asarray(rows, dtype=float)
    rows = rows.reshape(-1, G.dim_g) if G.dim_g else np.zeros((0, 0))
    basis = orthonormal_rows(rows, 1e-10) if rows.shape[0] else np.zeros((0, G.dim_g))
    m = basis.shape[0]
    nk = G.dim_k
    if m == 0:
        empty = np.zeros((0, G.dim_g))
        return Subalgebra(basis, 0, 0, 0, True, empty, empty)
    theta = G.theta_signs
    tb = basis * theta
    leak = tb - (tb @ basis.T) @ basis
    stable = bool(np.linalg.norm(leak) <= tol.theta_tol)
    # dim(h cap k) = m - rank of the p-components, and symmetrically
    sp = np.linalg.svd(basis[:, nk:], compute_uv=False) if G.dim_p else np.zeros(0)
    sk = np.linalg.svd(basis[:, :nk], compute_uv=False) if nk else np.zeros(0)
    rank_p = int(np.sum(sp > tol.theta_tol))
    rank_k = int(np.sum(sk > tol.theta_tol))
    if stable:
        kpart = np.zeros((0, G.dim_g))
        ppart = np.zeros((0, G.dim_g))
        if nk:
            kk = orthonormal_rows(np.pad(basis[:, :nk], ((0, 0), (0, G.dim_p))), tol.theta_tol)
            kpart = kk
        if G.dim_p:
            pp = orthonormal_rows(np.pad(basis[:, nk:], ((0, 0), (nk, 0))), tol.theta_tol)
            ppart = pp
        if kpart.shape[0] + ppart.shape[0] != m:
            stable = False
        else:
            basis = np.concatenate([kpart, ppart], axis=0)
            return Subalgebra(basis, m, kpart.shape[0], ppart.shape[0], True, kpart, ppart)
    return Subalgebra(
        basis, m, m - rank_p, m - rank_k, False, np.zeros((0, G.dim_g)), np.zeros((0, G.dim_g))
    )


def whole_algebra(G):
    return make_subalgebra(G, np.eye(G.dim_g))


def zero_algebra(G):
    return make_subalgebra(G, np.zeros((0, G.dim_g)))


def _nullspace_rows(A, rel_tol, abs_floor=0.0, scale=0.0):
    """Orthonormal rows spanning ker(A) (A acts on columns).

    Singular values up to ``rel_tol * max(sigma_max, scale)`` count as zero.
    """
    ncols = A.shape[1]
    if A.size == 0 or A.shape[0] == 0:
        return np.eye(ncols)
    u, s, vt = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] <= abs_floor:
        return np.eye(ncols)
    rank = int(np.sum(s > rel_tol * max(s[0], scale)))
    return vt[rank:]


def action_matrix(G, v):
    """Columns ``xi_i v`` over the orthonormal basis of ``g``."""
    return (G.basis @ np.asarray(v, dtype=float)).T


def isotropy_algebra(G, v, tol=DEFAULT):
    """``g_v = {xi : xi v = 0}`` via SVD with cutoff ``iso_tol * sigma_max``.

    The cutoff is floored at ``iso_tol * |v|`` (an upper bound for
    ``sigma_max`` with orthonormal bases), so a point whose moving part has
    collapsed far below its size counts as fixed.
    """
    if G.dim_g == 0:
        return zero_algebra(G)
    v = np.asarray(v, dtype=float)
    null = _nullspace_rows(action_matrix(G, v), tol.iso_tol, scale=float(np.linalg.norm(v)))
    return make_subalgebra(G, null, tol)


def isotropy_gap(G, v, tol=DEFAULT):
    """Smallest retained singular value of the action matrix relative to the largest.

    Values near ``iso_tol`` mean the isotropy dimension is ill-determined.
    """
    if G.dim_g == 0:
        return 1.0
    v = np.asarray(v, dtype=float)
    s = np.linalg.svd(action_matrix(G, v), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 1.0
    kept = s[s > tol.iso_tol * max(s[0], float(np.linalg.norm(v)))]
    if kept.size == 0:
        return 1.0
    return float(kept[-1] / s[0])


def fixed_space(G, h, tol=DEFAULT, reps=()):
    """Joint null space in ``V`` of the matrices of ``h`` (and of ``c - I`` for ``reps``).

    Only representatives explicitly passed in ``reps`` are imposed.
    """
    n = G.dim_v
    blocks = [h.matrices(G).reshape(-1, n)] if h.dim_total else []
    for c in reps:
        blocks.append(np.asarray(c) - np.eye(n))
    if not blocks:
        return np.eye(n)
    A = np.concatenate(blocks, axis=0)
    if not np.any(A):
        return np.eye(n)
    u, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > max(tol.iso_tol, 1e-12) * max(1.0, s[0])))
    return vt[rank:]


def fingerprint(G, h, tol=DEFAULT):
    fixed = fixed_space(G, h, tol)
    return Fingerprint(h.dims, int(fixed.shape[0]), G.dim_g - h.dim_total)


def subspace_distance(a, b):
    """Chordal distance ``|P_a - P_b|_F / sqrt 2`` between row spaces with orthonormal rows.

    The projectors are formed explicitly; the shortcut through
    ``(dim a + dim b) / 2 - |a b^T|^2`` loses half the digits near zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] == 0 and b.shape[0] == 0:
        return 0.0
    n = a.shape[1] if a.ndim == 2 and a.shape[0] else b.shape[1]
    Pa = a.T @ a if a.shape[0] else np.zeros((n, n))
    Pb = b.T @ b if b.shape[0] else np.zeros((n, n))
    return float(np.linalg.norm(Pa - Pb) / np.sqrt(2.0))


def normalizer_algebra(G, h, tol=DEFAULT):
    """``{xi in g : [xi, h] in h}`` as the kernel of ``xi -> ([xi, h_j] mod h)_j``."""
    m = h.dim_total
    if m == 0 or m == G.dim_g:
        return whole_algebra(G)
    C = G.structure_constants
    Q = np.eye(G.dim_g) - h.projector
    # column i: stack over j of Q C[i] h_j
    cols = np.einsum("ab,ibc,jc->ija", Q, C, h.basis).reshape(G.dim_g, -1)
    null = _nullspace_rows(cols.T, tol.iso_tol)
    return make_subalgebra(G, null, tol)


def is_bracket_closed(G, h, tol=1e-8):
    if h.dim_total == 0:
        return True
    C = G.structure_constants
    br = np.einsum("ia,abc,jc->ijb", h.basis, C, h.basis)
    Q = np.eye(G.dim_g) - h.projector
    return float(np.linalg.norm(br @ Q)) <= tol


# --- conjugacy -------------------------------------------------------------


def coset_reps(G, ambient=False):
    """Identity plus component reps; with ``ambient`` also ambient x component products."""
    n = G.dim_v
    comps = [np.eye(n)] + list(G.component_reps)
    if not ambient:
        return comps
    ambs = [np.eye(n)] + list(G.ambient_reps)
    return [a @ c for a in ambs for c in comps]


_COMMUTANTS = weakref.WeakKeyDictionary()


def _commutant(G, reps):
    """Basis of symmetric matrices commuting with ``k`` and with every rep."""
    reps = np.asarray(reps, dtype=float).reshape(-1, G.dim_v, G.dim_v)
    key = np.round(reps, 10).tobytes()
    cache = _COMMUTANTS.setdefault(G, {})
    if key in cache:
        return cache[key]
    n = G.dim_v
    iu = np.triu_indices(n)
    m = len(iu[0])
    basis_sym = np.zeros((m, n, n))
    for t, (i, j) in enumerate(zip(*iu)):
        basis_sym[t, i, j] = 1.0
        basis_sym[t, j, i] = 1.0
    rows = []
    for op in list(G.k_basis) + list(reps):
        comm = np.einsum("ab,tbc->tac", op, basis_sym) - np.einsum("tab,bc->tac", basis_sym, op)
        rows.append(comm.reshape(m, -1).T)
    coeffs = _nullspace_rows(np.concatenate(rows, axis=0), 1e-10) if rows else np.eye(m)
    mats = np.tensordot(coeffs, basis_sym, axes=1)
    cache[key] = mats
    return mats


def invariant_signature(G, h, reps, tol=DEFAULT):
    """Exact invariants of ``h`` under conjugation by the compact group generated by ``reps`` and K.

    Used only to rule out conjugacy cheaply before the geometric search.
    """
    mats_k = h.k_matrices(G) if h.theta_stable else h.matrices(G)
    mats_p = h.p_matrices(G) if h.theta_stable else np.zeros((0, G.dim_v, G.dim_v))
    Sk = np.einsum("iab,icb->ac", mats_k, mats_k) if len(mats_k) else np.zeros((G.dim_v,) * 2)
    Sp = np.einsum("iab,icb->ac", mats_p, mats_p) if len(mats_p) else np.zeros((G.dim_v,) * 2)
    F = fixed_space(G, h, tol)
    PF = F.T @ F
    parts = [np.linalg.eigvalsh(Sk), np.linalg.eigvalsh(Sp)]
    for M in _commutant(G, reps):
        parts.append(np.array([np.trace(M @ Sk), np.trace(M @ Sp), np.trace(M @ PF)]))
        parts.append(np.linalg.eigvalsh(PF @ M @ PF))
    return np.concatenate(parts)


def _signatures_match(a, b, atol=1e-6):
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol * (1.0 + np.abs(a))))


class _Reached(Exception):
    def __init__(self, x, value):
        self.x = x
        self.value = value


def k_search(G, objective, reps, tol=DEFAULT, seed=0, target=None, n_starts=None, collect=None):
    """Multi-start Nelder-Mead over ``K`` = reps x exp(k).

    ``objective(k_matrix)`` must be nonnegative.  Returns ``(best_value,
    best_KElement)``; stops as soon as a value below ``target`` is seen.
    With a ``collect`` list every local result is appended as
    ``(value, KElement)`` and ``target`` only ends the local run.
    """
    n_starts = tol.n_starts if n_starts is None else n_starts
    rng = np.random.default_rng(seed)
    dk = G.dim_k
    best = (np.inf, None)

    def element(ri, th):
        return KElement(ri, np.array(th, dtype=float), reps[ri] @ G.k_matrix(th))

    for start in range(n_starts):
        for ri, rep in enumerate(reps):
            if dk == 0:
                if start > 0:
                    continue
                val = objective(rep)
                if collect is not None:
                    collect.append((val, element(ri, np.zeros(0))))
                if val < best[0]:
                    best = (val, element(ri, np.zeros(0)))
            else:
                th0 = np.zeros(dk) if start == 0 else rng.uniform(-np.pi, np.pi, dk)

                def fun(th, rep=rep):
                    val = objective(rep @ G.k_matrix(th))
                    if target is not None and val < target:
                        raise _Reached(np.array(th), val)
                    return val

                try:
                    res = minimize(
                        fun,
                        th0,
                        method="Nelder-Mead",
                        options={
                            "xatol": 1e-10,
                            "fatol": 1e-16,
                            "maxiter": tol.search_maxiter,
                            "maxfev": tol.search_maxiter,
                            "initial_simplex": th0 + np.vstack([np.zeros(dk), 0.5 * np.eye(dk)]),
                        },
                    )
                    res_x, res_f = res.x, float(res.fun)
                except _Reached as hit:
                    res_x, res_f = hit.x, hit.value
                if collect is not None:
                    collect.append((res_f, element(ri, res_x)))
                if res_f < best[0]:
                    best = (res_f, element(ri, res_x))
            if collect is None and target is not None and best[0] < target:
                return best
    return best


def k_conjugacy_search(G, h1, h2, tol=DEFAULT, seed=0, reps=None):
    """Look for ``k`` in ``K`` with ``Ad(k) h1 = h2``.

    ``reps`` defaults to the identity plus the component representatives.
    The returned distance is the chordal subspace distance at the best ``k``.
    """
    reps = coset_reps(G) if reps is None else list(reps)
    f1, f2 = fingerprint(G, h1, tol), fingerprint(G, h2, tol)
    if f1 != f2:
        return ConjugacyResult(False, None, None, "fingerprint")
    if h1.dim_total == 0 or h1.dim_total == G.dim_g:
        return ConjugacyResult(True, KElement(0, np.zeros(G.dim_k), np.eye(G.dim_v)), 0.0)
    d0 = subspace_distance(h1.basis, h2.basis)
    if d0 < tol.conj_tol:
        return ConjugacyResult(True, KElement(0, np.zeros(G.dim_k), np.eye(G.dim_v)), d0)
    s1 = invariant_signature(G, h1, reps, tol)
    s2 = invariant_signature(G, h2, reps, tol)
    if not _signatures_match(s1, s2):
        return ConjugacyResult(False, None, None, "invariant signature")

    M1 = h1.matrices(G)
    M2 = h2.matrices(G).reshape(h2.dim_total, -1)
    half = 0.5 * (M1.shape[0] + M2.shape[0])

    def objective(k):
        # k M k^T stays in g, so overlaps can be taken directly in gl(V)
        moved = np.matmul(np.matmul(k, M1), k.T).reshape(M1.shape[0], -1)
        overlap = moved @ M2.T
        return max(0.0, half - float(np.sum(overlap * overlap)))

    val, wit = k_search(G, objective, reps, tol, seed, target=tol.conj_tol**2)
    dist = float(np.sqrt(val))
    if dist < tol.conj_tol:
        return ConjugacyResult(True, wit, dist)
    return ConjugacyResult(False, None, dist, "search")


def transport_search(G, u, w, tol=DEFAULT, seed=0, reps=None):
    """Find ``k`` in ``K`` with ``k u = w``; returns ``(distance, KElement)``."""
    reps = coset_reps(G) if reps is None else list(reps)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)

    def objective(k):
        d = k @ u - w
        return float(d @ d)

    val, wit = k_search(G, objective, reps, tol, seed, target=(0.1 * tol.transport_tol) ** 2)
    return float(np.sqrt(val)), wit
