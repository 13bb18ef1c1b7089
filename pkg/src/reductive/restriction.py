"""Numerical checks of the restriction map from a stratum closure to the quotient.

Quotients are represented by minimal vectors: a point of ``X//G`` is a
K-orbit in ``M_p``, a point of ``cl(X^<H>)//N_G(H)`` an ``N_K(H)``-orbit in
``M_{n_p}``.  The fiber of the restriction map over the orbit of ``m`` is
the set of ``N_K(H)``-classes of points in ``K m`` that lie in ``M_{n_p}``.

When the group carries ``ambient_reps`` (the linear slice of a bundle
``G' x^J V``), a fiber point is a pair ``(a, u)`` of an ambient
representative and ``u`` in ``K m`` with ``a u`` in ``V^H``; two pairs are
identified when some ``j`` in K carries ``u`` to ``u'`` and conjugates
``Ad(a^-1) H`` to ``Ad(a'^-1) H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyResult, NoDenseStratum, SearchBudgetExhausted
from .isotropy import (
    coset_reps,
    fixed_space,
    is_bracket_closed,
    isotropy_algebra,
    k_conjugacy_search,
    _signatures_match,
    invariant_signature,
    k_search,
    make_subalgebra,
    normalizer_algebra,
    subspace_distance,
)
from .kempfness import OrbitKind, _gradient_along, gradient_map, orbit_status, value_f
from .options import DEFAULT
from .slice import splitting_number
from .strata import OK, build_catalog, sphere_samples

DENSE = "dense"
DENSE_AMBIENT = "dense-with-ambient"
CLOSURE = "closure-of-open-stratum"


def _vec(v):
    return [float(t) for t in np.asarray(v).ravel()]


def restricted_gradient(G, H, v, n_alg=None, tol=DEFAULT):
    """``(<xi_i v, v>)_i`` over the orthonormal basis of ``n_p``, the p-part of ``N_g(H)``."""
    n_alg = normalizer_algebra(G, H, tol) if n_alg is None else n_alg
    v = np.asarray(v, dtype=float)
    if n_alg.dim_p == 0:
        return np.zeros(0)
    return _gradient_along(n_alg.p_matrices(G), v)


@dataclass(eq=False)
class RestrictionContext:
    """The stratum ``H`` to restrict to, with the data every check reuses.

    ``mode`` says how ``H`` was chosen: the unique open stratum, the open
    strata merged by ambient representatives, or (no dense stratum) the
    closure of one chosen open stratum, in which case only samples of that
    stratum are used.
    """

    group: object
    H: object
    n_alg: object
    fixed: np.ndarray
    catalog: object
    label: int
    mode: str
    extended_reps: list
    equivalence_reps: list

    @property
    def n_p(self):
        return self.n_alg.p_matrices(self.group)

    def in_space(self, label):
        """Whether a catalog label lies in the space the restriction is taken on."""
        if label is None:
            return False
        if self.mode == CLOSURE:
            return label == self.label or self.catalog.entry(label).is_nullcone_stratum
        return True


def _choose_open(open_entries, fractions):
    return max(open_entries, key=lambda e: (e.rep_subalgebra.dim_p, fractions[e.id], -e.id))


def restriction_context(G, tol=DEFAULT, seed=0, samples=1000, catalog=None, H=None):
    """Pick ``H`` from a stratum catalog (built from ``samples`` sphere points if not given).

    Open strata that become K-conjugate once ambient representatives are
    allowed count as one dense stratum.  If several open strata remain, the
    closure of the one with the largest ``dim p_H`` (then the largest sample
    share) is used.  An explicit ``H`` overrides the choice.
    """
    if catalog is None:
        catalog = build_catalog(G, sphere_samples(G.dim_v, samples, seed), tol, seed)
    ext = coset_reps(G, ambient=True)
    opened = catalog.open_entries
    if not opened:
        raise NoDenseStratum("the catalog has no open stratum")
    mode = DENSE
    if len(opened) > 1:
        first = opened[0]
        merged = all(
            k_conjugacy_search(G, e.rep_subalgebra, first.rep_subalgebra, tol, seed, ext).conjugate
            for e in opened[1:]
        )
        mode = DENSE_AMBIENT if merged and len(G.ambient_reps) else CLOSURE
    chosen = opened[0] if mode != CLOSURE else _choose_open(opened, catalog.fractions)
    if H is None:
        H = chosen.rep_subalgebra
    n_alg = normalizer_algebra(G, H, tol)
    equiv = coset_reps(G) + [np.asarray(n) for n in G.normalizer_reps]
    return RestrictionContext(
        G, H, n_alg, fixed_space(G, H, tol), catalog, chosen.id, mode, ext, equiv
    )


# --- X^<H> ----------------------------------------------------------------


@dataclass(eq=False)
class XHSample:
    points: list
    attempts: int
    histogram: dict

    @property
    def accepted_fraction(self):
        return len(self.points) / self.attempts if self.attempts else 0.0


def sample_xh(G, H, count, seed=0, tol=DEFAULT, max_attempts=None):
    """Points of ``V^H`` whose isotropy is exactly ``H`` and whose orbit is closed.

    Candidates are Gaussian in an orthonormal basis of ``fixed_space(H)``;
    rejections are tallied by reason.  Raises :class:`EmptyResult` with the
    histogram when nothing is accepted.
    """
    if not H.theta_stable or not is_bracket_closed(G, H):
        raise ValueError("H must be theta-stable and bracket-closed")
    F = fixed_space(G, H, tol)
    hist = {"accepted": 0, "isotropy differs": 0, "orbit not closed": 0, "flow failed": 0}
    if F.shape[0] == 0:
        iso = isotropy_algebra(G, np.zeros(G.dim_v), tol)
        if iso.dim_total == H.dim_total:
            hist["accepted"] = 1
            return XHSample([np.zeros(G.dim_v)], 1, hist)
        hist["isotropy differs"] = 1
        raise EmptyResult("no point of V^H has isotropy H", hist)
    rng = np.random.default_rng(seed)
    max_attempts = 4 * count if max_attempts is None else max_attempts
    pts = []
    attempts = 0
    while len(pts) < count and attempts < max_attempts:
        attempts += 1
        v = rng.normal(size=F.shape[0]) @ F
        iso = isotropy_algebra(G, v, tol)
        if iso.dim_total != H.dim_total or subspace_distance(iso.basis, H.basis) >= tol.subspace_tol:
            hist["isotropy differs"] += 1
            continue
        try:
            st = orbit_status(G, v, tol)
        except Exception:
            hist["flow failed"] += 1
            continue
        if st.kind is not OrbitKind.CLOSED:
            hist["orbit not closed"] += 1
            continue
        hist["accepted"] += 1
        pts.append(v)
    if not pts:
        raise EmptyResult("no sample of V^H passed", hist)
    return XHSample(pts, attempts, hist)


# --- lemmas ---------------------------------------------------------------


@dataclass(eq=False)
class LemmaRecord:
    name: str
    passed: bool
    records: list = field(default_factory=list)
    max_residual: float = 0.0

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": len(self.records),
            "max_residual": self.max_residual,
            "records": self.records,
        }


def verify_zero_fiber_lemma(G, H, samples, tol=DEFAULT, n_alg=None):
    """Check ``M_{n_p} = cl(X^<H>) cap M_p`` on points of ``V^H``.

    Both implications are tested with the scale-free residuals
    ``|mu| / (2 f)``: ``mu_{n_p} = 0`` within ``flow_tol`` must give
    ``mu_p = 0`` within ``10 flow_tol``, and conversely.
    """
    n_alg = normalizer_algebra(G, H, tol) if n_alg is None else n_alg
    recs = []
    ok = True
    worst = 0.0
    for v in samples:
        v = np.asarray(v, dtype=float)
        scale = max(2.0 * value_f(v), 1e-300)
        r_np = float(np.linalg.norm(restricted_gradient(G, H, v, n_alg, tol))) / scale
        r_p = float(np.linalg.norm(gradient_map(G, v))) / scale
        forward = r_np > tol.flow_tol or r_p <= 10.0 * tol.flow_tol
        backward = r_p > tol.flow_tol or r_np <= 10.0 * tol.flow_tol
        # n_p is a subspace of p, so the restricted residual never exceeds the full one
        inclusion = r_np <= r_p + 1e-12
        good = forward and backward and inclusion
        ok &= good
        worst = max(worst, r_np, r_p)
        recs.append(
            {"point": _vec(v), "mu_np": r_np, "mu_p": r_p, "in_M_np": r_np <= tol.flow_tol, "ok": good}
        )
    return LemmaRecord("zero-fiber", bool(ok and recs), recs, worst)


def _candidate_objective(ctx, m, a):
    """``(dist(a k m, V^H)^2 + |mu_{n_p}(a k m)|^2 / |m|^4) / |m|^2`` as a function of ``k``."""
    F = ctx.fixed
    n_p = ctx.n_p
    m = np.asarray(m, dtype=float)
    s2 = float(m @ m)

    def objective(k):
        w = a @ (k @ m)
        off = w - F.T @ (F @ w)
        val = float(off @ off) / s2
        if len(n_p):
            mu = _gradient_along(n_p, w)
            val += float(mu @ mu) / (s2 * s2)
        return val

    return objective


def _ambients(G):
    return [np.eye(G.dim_v)] + [np.asarray(a) for a in G.ambient_reps]


def _transport(ctx, m, tol, seed, collect=None, n_starts=None):
    """Search ``a k`` (ambient ``a``, ``k`` in K) moving ``m`` into ``M_{n_p}``.

    Without ``collect`` a short pass over every ambient representative runs
    before the full budget, so the right sheet is usually found cheaply.
    """
    G = ctx.group
    target = (1e-3 * tol.transport_tol) ** 2
    best = (np.inf, None, None)
    passes = [n_starts] if collect is not None else [min(4, tol.n_starts), n_starts]
    for p, starts in enumerate(passes):
        for ai, a in enumerate(_ambients(G)):
            found = [] if collect is not None else None
            val, wit = k_search(
                G, _candidate_objective(ctx, m, a), coset_reps(G), tol, seed + ai + 7 * p,
                target, starts, found,
            )
            if collect is not None:
                collect.extend((v, ai, w) for v, w in found)
            if val < best[0]:
                best = (val, ai, wit)
            if collect is None and val < target:
                return best
    return best


def verify_surjectivity(ctx, mp_samples, tol=DEFAULT, seed=0, labels=None):
    """Check ``M_p = K M_{n_p}``: every minimal vector moves into ``M_{n_p}`` under K.

    ``labels`` (catalog labels of the samples) lets points outside the
    restricted space or on lower strata be skipped and flagged.  Each
    witness stores the ambient index, the K element, the residual, the norm
    change and the isotropy distance to ``H`` at the image.
    """
    if ctx.mode not in (DENSE, DENSE_AMBIENT, CLOSURE):
        raise NoDenseStratum(f"unknown restriction mode {ctx.mode!r}")
    G = ctx.group
    recs = []
    ok = True
    worst = 0.0
    for i, m in enumerate(mp_samples):
        m = np.asarray(m, dtype=float)
        lab = None if labels is None else labels[i]
        if labels is not None and (
            lab is None or not ctx.in_space(lab) or not ctx.catalog.entry(lab).is_open
        ):
            recs.append({"point": _vec(m), "skipped": "lower stratum or outside the restricted space"})
            continue
        if value_f(m) <= tol.null_abs:
            recs.append({"point": _vec(m), "ambient": 0, "witness": {"rep_index": 0, "theta": [0.0] * G.dim_k},
                         "residual": 0.0, "norm_change": 0.0, "isotropy_distance": None, "ok": True})
            continue
        val, ai, wit = _transport(ctx, m, tol, seed + i)
        res = float(np.sqrt(val))
        w = _ambients(G)[ai] @ (wit.matrix @ m)
        iso = isotropy_algebra(G, w, tol)
        d_iso = subspace_distance(iso.basis, ctx.H.basis) if iso.dim_total == ctx.H.dim_total else 1.0
        norm_change = abs(np.linalg.norm(w) - np.linalg.norm(m)) / np.linalg.norm(m)
        good = res < tol.transport_tol and d_iso < tol.subspace_tol and norm_change < 1e-12
        ok &= good
        worst = max(worst, res)
        recs.append(
            {
                "point": _vec(m),
                "ambient": int(ai),
                "witness": wit.as_dict(),
                "image": _vec(w),
                "residual": res,
                "norm_change": float(norm_change),
                "isotropy_distance": float(d_iso),
                "ok": bool(good),
            }
        )
    checked = [r for r in recs if "skipped" not in r]
    return LemmaRecord("surjectivity", bool(ok and checked), recs, worst)


# --- fibers ---------------------------------------------------------------


@dataclass(eq=False)
class FiberRecord:
    point: np.ndarray
    count: int
    splitting_number: int
    open_flag: bool
    lower_bound: bool
    representatives: list

    @property
    def matches(self):
        return self.count == self.splitting_number

    def as_dict(self):
        return {
            "point": _vec(self.point),
            "fiber_count": self.count,
            "splitting_number": self.splitting_number,
            "matches": self.matches,
            "open_flag": self.open_flag,
            "note": "map not open here" if self.open_flag else "",
            "lower_bound": self.lower_bound,
            "representatives": self.representatives,
        }


def _h_matrices(ctx, a):
    M = ctx.H.matrices(ctx.group)
    return np.einsum("ba,ibc,cd->iad", a, M, a)


def _moved_h(ctx, a, tol):
    """``Ad(a^-1) H`` as a subalgebra of ``g``."""
    G = ctx.group
    A = G.adjoint_orthogonal(np.asarray(a).T)
    return make_subalgebra(G, ctx.H.basis @ A.T, tol)


def _equivalent(ctx, cand1, cand2, scale2, tol, seed):
    """Is there ``j`` in K with ``j u = u'`` and ``Ad(j) Ad(a^-1) H = Ad(a'^-1) H``?"""
    G = ctx.group
    (a1, u1), (a2, u2) = cand1, cand2
    amb = _ambients(G)
    h1, h2 = _moved_h(ctx, amb[a1], tol), _moved_h(ctx, amb[a2], tol)
    s1 = invariant_signature(G, h1, ctx.equivalence_reps, tol)
    s2 = invariant_signature(G, h2, ctx.equivalence_reps, tol)
    if not _signatures_match(s1, s2):
        return False
    M1 = _h_matrices(ctx, amb[a1])
    M2 = _h_matrices(ctx, amb[a2]).reshape(len(M1), -1)
    half = float(len(M1))

    def objective(j):
        d = j @ u1 - u2
        moved = np.matmul(np.matmul(j, M1), j.T).reshape(len(M1), -1)
        ov = moved @ M2.T
        return float(d @ d) / scale2 + max(0.0, half - float(np.sum(ov * ov)))

    if objective(np.eye(G.dim_v)) < tol.transport_tol**2:
        return True
    val, _ = k_search(G, objective, ctx.equivalence_reps, tol, seed, target=(1e-2 * tol.transport_tol) ** 2)
    return val < tol.transport_tol**2


def restricted_splitting_number(ctx, m, tol=DEFAULT, seed=0, samples=None):
    """Open slice strata at ``m`` whose lift to ``g`` is conjugate to ``H`` (ambient reps allowed).

    Equals the plain splitting number when ``H`` is dense; on the closure of
    one open stratum it counts only the sheets of that stratum.
    """
    res = splitting_number(ctx.group, m, tol, seed, samples)
    n = 0
    for lift in res.open_lifts:
        if k_conjugacy_search(ctx.group, lift, ctx.H, tol, seed, ctx.extended_reps).conjugate:
            n += 1
    return n, res


def phi_fiber_count(ctx, m, tol=DEFAULT, seed=0, samples=None, strict=False):
    """Number of points over the orbit of ``m`` in the restricted quotient, checked against n(m).

    Candidates ``(a, k m)`` are collected from a multi-start search of
    :func:`_candidate_objective`, deduplicated, and clustered by the
    equivalence of :func:`_equivalent`.  ``lower_bound`` is set when a new
    class was still appearing in the last quarter of the starts; with
    ``strict`` that raises :class:`SearchBudgetExhausted`.
    """
    G = ctx.group
    m = np.asarray(m, dtype=float)
    amb = _ambients(G)
    if value_f(m) <= tol.null_abs:
        cands = [(ai, np.zeros(G.dim_v)) for ai in range(len(amb))]
        order = list(range(len(cands)))
        scale2 = 1.0
    else:
        found = []
        _transport(ctx, m, tol, seed, collect=found, n_starts=tol.fiber_starts)
        accept = tol.transport_tol**2
        cands, order = [], []
        for idx, (val, ai, wit) in enumerate(found):
            if val < accept:
                cands.append((ai, wit.matrix @ m))
                order.append(idx)
        scale2 = float(m @ m)
    clusters = []
    seen = []
    last_new = -1
    for c, idx in zip(cands, order):
        # the points of K m in M_{n_p} are isolated, so near-duplicates are the same point
        if any(s[0] == c[0] and np.linalg.norm(s[1] - c[1]) ** 2 <= 1e-8 * scale2 for s in seen):
            continue
        seen.append(c)
        same = False
        for rep in clusters:
            if _equivalent(ctx, rep, c, scale2, tol, seed):
                same = True
                break
        if not same:
            clusters.append(c)
            last_new = idx
    total = max(len(order), 1)
    lower = value_f(m) > tol.null_abs and last_new >= 0.75 * total and len(clusters) > 1
    if not clusters:
        lower = True
    if lower and strict:
        raise SearchBudgetExhausted(f"fiber count {len(clusters)} may be incomplete")
    n, _ = restricted_splitting_number(ctx, m, tol, seed, samples)
    reps = [{"ambient": int(a), "point": _vec(amb[a] @ u)} for a, u in clusters]
    count = len(clusters)
    return FiberRecord(m, count, n, count > 1, lower, reps)


# --- report ---------------------------------------------------------------


@dataclass(eq=False)
class RestrictionReport:
    H: object
    n_alg: object
    mode: str
    xh_samples: list
    xh_accepted_fraction: float
    mnp_points: list
    lemma_zero_fiber: LemmaRecord
    lemma_surjectivity: LemmaRecord
    fiber_records: list
    histogram: dict

    @property
    def passed(self):
        return (
            self.lemma_zero_fiber.passed
            and self.lemma_surjectivity.passed
            and all(r.matches for r in self.fiber_records)
        )

    def as_dict(self):
        return {
            "mode": self.mode,
            "H_dims": list(self.H.dims),
            "normalizer_dims": list(self.n_alg.dims),
            "xh_count": len(self.xh_samples),
            "xh_accepted_fraction": self.xh_accepted_fraction,
            "xh_histogram": self.histogram,
            "mnp_points": [_vec(p) for p in self.mnp_points],
            "lemma_zero_fiber": self.lemma_zero_fiber.as_dict(),
            "lemma_surjectivity": self.lemma_surjectivity.as_dict(),
            "fiber_records": [r.as_dict() for r in self.fiber_records],
            "passed": self.passed,
        }


def minimal_samples(ctx, count):
    """Flow limits of catalog samples that lie in the restricted space, with their labels."""
    pts, labs = [], []
    for lab, pc in zip(ctx.catalog.labels, ctx.catalog.points):
        if pc.flag != OK or pc.in_nullcone or not ctx.in_space(lab):
            continue
        pts.append(pc.flow.limit)
        labs.append(lab)
        if len(pts) == count:
            break
    return pts, labs


def restriction_report(ctx, tol=DEFAULT, seed=0, n_points=50, n_fibers=20, slice_samples=None):
    """Run every check on one context.

    ``n_points`` points of ``X^<H>`` feed the zero-fiber lemma and
    ``n_points`` minimal vectors the surjectivity lemma; fibers are counted
    at the origin and at the first ``n_fibers`` points of ``M_{n_p}``.
    """
    G = ctx.group
    xh = sample_xh(G, ctx.H, n_points, seed, tol)
    zero = verify_zero_fiber_lemma(G, ctx.H, xh.points, tol, ctx.n_alg)
    mnp = [p for p, r in zip(xh.points, zero.records) if r["in_M_np"]]
    mp, labs = minimal_samples(ctx, n_points)
    surj = verify_surjectivity(ctx, mp, tol, seed, labs)
    fibers = [phi_fiber_count(ctx, np.zeros(G.dim_v), tol, seed, slice_samples)]
    for i, m in enumerate(mnp[:n_fibers]):
        fibers.append(phi_fiber_count(ctx, m, tol, seed + 1 + i, slice_samples))
    return RestrictionReport(
        ctx.H, ctx.n_alg, ctx.mode, xh.points, xh.accepted_fraction, mnp, zero, surj, fibers, xh.histogram
    )
