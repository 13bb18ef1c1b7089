"""Slice models at minimal vectors and splitting numbers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import build_group, orthonormal_rows
from .errors import FlowFailed, NoInvariantComplement, NotMinimal
from .isotropy import (
    _nullspace_rows,
    action_matrix,
    fixed_space,
    isotropy_algebra,
    make_subalgebra,
)
from .kempfness import flow_to_minimal, gradient_map, value_f
from .options import DEFAULT
from .strata import build_catalog, sphere_samples


@dataclass(frozen=True, eq=False)
class SliceModel:
    """``V = g.x + W`` at a minimal vector ``x`` with ``W`` invariant under ``g_x``.

    ``complement`` rows are an orthonormal basis of ``W``; ``slice_rep`` holds
    the compressions of the ``g_x`` basis matrices to ``W`` in those
    coordinates.
    """

    base: np.ndarray
    orbit_tangent: np.ndarray
    complement: np.ndarray
    slice_rep: np.ndarray
    isotropy: object
    invariance_residual: float

    @property
    def dim_w(self):
        return self.complement.shape[0]


@dataclass(frozen=True, eq=False)
class SliceGroup:
    """``G_x`` acting on ``W`` as a group in its own right, plus the way back to ``g``.

    ``compress`` maps each row of ``isotropy.basis`` to a ``dim_W x dim_W``
    matrix; ``group`` is built from the span of those compressions.
    """

    group: object
    model: SliceModel
    compress: np.ndarray

    def lift(self, sub, tol=DEFAULT):
        """Preimage in ``g_x`` (as a Subalgebra of ``G``) of a subalgebra of the slice group."""
        G_parent = self._parent
        gx = self.model.isotropy
        if gx.dim_total == 0:
            return make_subalgebra(G_parent, np.zeros((0, G_parent.dim_g)), tol)
        flat = self.compress.reshape(gx.dim_total, -1)
        if sub.dim_total:
            S = sub.matrices(self.group).reshape(sub.dim_total, -1)
            S = orthonormal_rows(S)
            resid = flat - (flat @ S.T) @ S
        else:
            resid = flat
        y = _nullspace_rows(resid.T, tol.iso_tol, abs_floor=1e-13)
        return make_subalgebra(G_parent, y @ gx.basis, tol)

    @property
    def _parent(self):
        return self.__dict__["parent"]


def _check_minimal(G, x, tol):
    r = float(np.linalg.norm(gradient_map(G, x)))
    f = value_f(x)
    if r > 10.0 * tol.flow_tol * max(1.0, 2.0 * f):
        raise NotMinimal(f"|mu_p(x)| = {r:.3e} exceeds the flow tolerance")


def _orthogonal_complement(rows, n):
    if rows.shape[0] == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(rows, full_matrices=True)
    return vt[rows.shape[0] :]


def _invariance_residual(mats, W):
    if W.shape[0] == 0 or len(mats) == 0:
        return 0.0
    P = W.T @ W
    moved = np.einsum("iab,jb->ija", mats, W)
    return float(np.max(np.linalg.norm(moved - moved @ P, axis=2)))


def _commutant_complement(mats, T, n, tol):
    """Kernel of a projection ``P = T^T L`` (image ``T``) commuting with ``mats``.

    ``L T^T = I`` makes ``P`` idempotent; commutation ``P h = h P`` is linear in
    ``L`` and solved in the least-squares sense.
    """
    t = T.shape[0]
    rows, rhs = [], []
    # L T^T = I
    for a in range(t):
        for b in range(t):
            r = np.zeros((t, n))
            r[a] = T[b]
            rows.append(r.ravel())
            rhs.append(1.0 if a == b else 0.0)
    for h in mats:
        # (T^T L h - h T^T L)[i, j] = sum_{a,k} T[a,i] L[a,k] h[k,j] - sum_{a,k} h[i,k] T[a,k] L[a,j]
        hT = h @ T.T
        for i in range(n):
            for j in range(n):
                r = np.outer(T[:, i], h[:, j]) - np.outer(hT[i], np.eye(n)[j])
                rows.append(r.ravel())
                rhs.append(0.0)
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.linalg.norm(A @ sol - b))
    if resid > tol.slice_tol:
        raise NoInvariantComplement(f"commutant solve residual {resid:.3e}")
    L = sol.reshape(t, n)
    return orthonormal_rows(_nullspace_rows(L, 1e-10)), resid


def build_slice_model(G, x, tol=DEFAULT):
    """Slice model at the minimal vector ``x``.

    The orthogonal complement of ``g.x`` is used when it is ``g_x``-invariant
    (always the case when ``g_x`` is theta-stable); otherwise an invariant
    complement is solved for from the commutant constraints.
    """
    x = np.asarray(x, dtype=float)
    _check_minimal(G, x, tol)
    n = G.dim_v
    gx = isotropy_algebra(G, x, tol)
    A = action_matrix(G, x)
    if A.size and np.any(A):
        u, s, vt = np.linalg.svd(A, full_matrices=False)
        rank = int(np.sum(s > tol.iso_tol * s[0]))
        T = u[:, :rank].T
    else:
        T = np.zeros((0, n))
    mats = gx.matrices(G)
    W = _orthogonal_complement(T, n) if T.shape[0] else np.eye(n)
    res = _invariance_residual(mats, W)
    if res > tol.slice_tol:
        W, res = _commutant_complement(mats, T, n, tol)
    rep = np.einsum("ab,ibc,dc->iad", W, mats, W) if len(mats) else np.zeros((0, W.shape[0], W.shape[0]))
    return SliceModel(x, T, W, rep, gx, res)


def slice_group(G, model, tol=DEFAULT):
    """Realize ``G_x`` acting on ``W`` as a :class:`CompatibleGroup`.

    The k- and p-parts of ``g_x`` are compressed separately; component
    representatives of ``G`` that fix ``x``, preserve ``W`` and normalize
    ``g_x`` are carried over.
    """
    gx = model.isotropy
    W = model.complement
    dw = W.shape[0]
    if gx.theta_stable:
        kc = np.einsum("ab,ibc,dc->iad", W, gx.k_matrices(G), W) if gx.dim_k else np.zeros((0, dw, dw))
        pc = np.einsum("ab,ibc,dc->iad", W, gx.p_matrices(G), W) if gx.dim_p else np.zeros((0, dw, dw))
    else:
        raise NotMinimal("isotropy at the slice base is not theta-stable")

    def span(mats):
        if len(mats) == 0:
            return []
        rows = orthonormal_rows(mats.reshape(len(mats), -1), 1e-9)
        return [r.reshape(dw, dw) for r in rows]

    comps = []
    for c in G.component_reps:
        if np.linalg.norm(c @ model.base - model.base) > 1e-8 * max(1.0, np.linalg.norm(model.base)):
            continue
        cw = W @ c @ W.T
        if np.linalg.norm(cw @ cw.T - np.eye(dw)) > 1e-8:
            continue
        moved = np.einsum("ab,ibc,dc->iad", c, gx.matrices(G), c) if gx.dim_total else np.zeros((0,))
        if gx.dim_total:
            flat = moved.reshape(gx.dim_total, -1)
            own = gx.matrices(G).reshape(gx.dim_total, -1)
            own = orthonormal_rows(own)
            if np.linalg.norm(flat - (flat @ own.T) @ own) > 1e-8:
                continue
        comps.append(cw)

    sub = build_group(
        {
            "name": f"{G.name}|slice",
            "dim_v": dw,
            "k_basis": span(kc),
            "p_basis": span(pc),
            "component_reps": comps,
            "structure_tol": 1e-8,
        }
    )
    sg = SliceGroup(sub, model, np.concatenate([kc, pc], axis=0))
    sg.__dict__["parent"] = G
    return sg


@dataclass(frozen=True, eq=False)
class SplitResult:
    n: int
    base: np.ndarray
    model: SliceModel
    slice_group: object
    catalog: object
    open_lifts: list

    def as_dict(self):
        return {
            "splitting_number": self.n,
            "base": [float(t) for t in self.base],
            "dim_orbit_tangent": int(self.model.orbit_tangent.shape[0]),
            "dim_slice": int(self.model.dim_w),
            "isotropy_dims": list(self.model.isotropy.dims),
            "evidence": None if self.catalog is None else self.catalog.as_dict(),
        }


def closed_orbit_point(G, y, tol=DEFAULT):
    """Minimal vector in the fiber of ``y`` (the origin for nullcone points)."""
    y = np.asarray(y, dtype=float)
    flow = flow_to_minimal(G, y, tol)
    if not flow.converged:
        raise FlowFailed(f"flow ended with status {flow.status.value}", flow)
    if flow.in_nullcone:
        return np.zeros_like(y)
    return flow.limit


def splitting_number(G, y, tol=DEFAULT, seed=0, samples=None):
    """Number of open ``G_x``-isotropy strata in the slice at the closed orbit of ``y``.

    ``y`` is first flowed to its fiber's minimal vector ``x``.  The unit
    sphere of ``W`` is sampled (``samples`` points, default
    ``tol.slice_samples``) and classified under the slice group; open strata
    are counted after K_x-conjugacy merging.
    """
    count = tol.slice_samples if samples is None else samples
    x = closed_orbit_point(G, y, tol)
    model = build_slice_model(G, x, tol)
    if model.dim_w == 0:
        return SplitResult(1, x, model, None, None, [model.isotropy])
    sg = slice_group(G, model, tol)
    pts = sphere_samples(model.dim_w, count, seed)
    catalog = build_catalog(sg.group, pts, tol, seed)
    lifts = [sg.lift(e.rep_subalgebra, tol) for e in catalog.open_entries]
    return SplitResult(len(catalog.open_entries), x, model, sg, catalog, lifts)


def nullcone_decomposition(sg, catalog, tol=DEFAULT):
    """Check that slice samples in the fixed-isotropy stratum split as fixed part + nullcone part.

    Returns a list of ``(sample_index, f_after_flow, threshold, ok)``.
    """
    H = sg.group
    whole = [e.id for e in catalog.entries if e.is_nullcone_stratum]
    if not whole:
        return []
    from .isotropy import whole_algebra

    F = fixed_space(H, whole_algebra(H), tol)
    out = []
    for i, (lab, pc) in enumerate(zip(catalog.labels, catalog.points)):
        if lab not in whole:
            continue
        s = pc.flow.start
        rest = s - F.T @ (F @ s)
        fl = flow_to_minimal(H, rest, tol)
        thr = tol.null_threshold(value_f(s))
        out.append((i, fl.f_limit, thr, fl.f_limit <= thr))
    return out
