"""Isotropy-stratum classification of points and sample-based stratum catalogs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FlowFailed
from .isotropy import (
    coset_reps,
    fingerprint,
    invariant_signature,
    isotropy_algebra,
    isotropy_gap,
    k_conjugacy_search,
    whole_algebra,
    _signatures_match,
)
from .kempfness import flow_to_minimal
from .options import DEFAULT

OK = "ok"
BOUNDARY = "boundary-ambiguous"
UNCONVERGED = "unconverged"


@dataclass(frozen=True, eq=False)
class PointClass:
    """Classification of one point: its flow and the isotropy at the closed orbit."""

    flow: object
    rep: object
    fingerprint: object
    in_nullcone: bool
    flag: str = OK


@dataclass(eq=False)
class StratumLabel:
    id: int
    rep_subalgebra: object
    fingerprint: object
    is_open: bool = False
    is_nullcone_stratum: bool = False
    count: int = 0
    signature: np.ndarray = None

    def as_dict(self):
        return {
            "id": self.id,
            "dims": list(self.rep_subalgebra.dims),
            "fingerprint": self.fingerprint.as_list(),
            "is_open": self.is_open,
            "is_nullcone_stratum": self.is_nullcone_stratum,
            "count": self.count,
        }


@dataclass(eq=False)
class StratumCatalog:
    entries: list
    fractions: dict
    sample_count: int
    seed: int
    labels: list = field(default_factory=list)
    points: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def entry(self, label_id):
        for e in self.entries:
            if e.id == label_id:
                return e
        raise KeyError(label_id)

    @property
    def open_entries(self):
        return [e for e in self.entries if e.is_open]

    @property
    def ambiguous_fraction(self):
        if not self.flags:
            return 0.0
        return sum(f != OK for f in self.flags) / len(self.flags)

    def as_dict(self):
        return {
            "sample_count": self.sample_count,
            "seed": self.seed,
            "entries": [e.as_dict() for e in self.entries],
            "fractions": {str(k): v for k, v in sorted(self.fractions.items())},
            "open_count": len(self.open_entries),
            "ambiguous_count": sum(f != OK for f in self.flags),
        }


def classify_point(G, v, tol=DEFAULT, strict=True):
    """Flow ``v`` to its minimal vector and take the isotropy there.

    A flow ending in the nullcone is represented by the origin (isotropy
    ``g``).  Points whose limit sits within ``wall_tol`` of a lower stratum
    (relative size of the limit, or an ill-determined isotropy rank) are
    flagged boundary-ambiguous.  With ``strict`` a non-converged flow raises
    :class:`FlowFailed`, otherwise it is flagged.
    """
    v = np.asarray(v, dtype=float)
    flow = flow_to_minimal(G, v, tol)
    flag = OK
    if not flow.converged:
        if strict:
            raise FlowFailed(f"flow ended with status {flow.status.value}", flow)
        flag = UNCONVERGED
    if flow.in_nullcone:
        rep = whole_algebra(G)
    else:
        rep = isotropy_algebra(G, flow.limit, tol)
        if flag == OK:
            near_wall = flow.f_limit <= tol.wall_tol * flow.f_start
            if near_wall or isotropy_gap(G, flow.limit, tol) < 1e3 * tol.iso_tol:
                flag = BOUNDARY
    return PointClass(flow, rep, fingerprint(G, rep, tol), flow.in_nullcone, flag)


class _Matcher:
    """Assigns subalgebras to catalog entries by K-conjugacy."""

    def __init__(self, G, tol, seed, reps=None):
        self.G = G
        self.tol = tol
        self.seed = seed
        self.reps = coset_reps(G) if reps is None else list(reps)
        self.entries = []

    def match(self, rep, fp):
        sig = None
        for e in self.entries:
            if e.fingerprint != fp:
                continue
            if sig is None:
                sig = invariant_signature(self.G, rep, self.reps, self.tol)
            if not _signatures_match(sig, e.signature):
                continue
            res = k_conjugacy_search(self.G, rep, e.rep_subalgebra, self.tol, self.seed, self.reps)
            if res.conjugate:
                return e
        return None

    def add(self, rep, fp):
        e = StratumLabel(
            id=len(self.entries),
            rep_subalgebra=rep,
            fingerprint=fp,
            is_nullcone_stratum=rep.dim_total == self.G.dim_g,
            signature=invariant_signature(self.G, rep, self.reps, self.tol),
        )
        self.entries.append(e)
        return e

    def assign(self, rep, fp):
        e = self.match(rep, fp)
        return e if e is not None else self.add(rep, fp)


def build_catalog(G, samples, tol=DEFAULT, seed=0):
    """Classify every sample and merge isotropy classes by K-conjugacy.

    The stratum of the origin (the one containing the nullcone) is always
    registered first, so it appears even when no sample lands in it.  A label
    is open when its share of the unflagged samples reaches
    ``open_fraction`` and its orbit dimension is maximal among the labels
    that reach it.
    """
    samples = [np.asarray(s, dtype=float) for s in samples]
    if not samples:
        raise ValueError("build_catalog needs at least one sample")
    matcher = _Matcher(G, tol, seed)
    origin = whole_algebra(G)
    matcher.add(origin, fingerprint(G, origin, tol))

    labels, points, flags = [], [], []
    for s in samples:
        pc = classify_point(G, s, tol, strict=False)
        points.append(pc)
        flags.append(pc.flag)
        if pc.flag != OK:
            labels.append(None)
            continue
        e = matcher.assign(pc.rep, pc.fingerprint)
        e.count += 1
        labels.append(e.id)

    entries = matcher.entries
    total = sum(e.count for e in entries)
    fractions = {e.id: (e.count / total if total else 0.0) for e in entries}
    big = [e for e in entries if fractions[e.id] >= tol.open_fraction]
    if big:
        top = max(e.fingerprint.orbit_dim for e in big)
        for e in big:
            e.is_open = e.fingerprint.orbit_dim == top
    return StratumCatalog(entries, fractions, len(samples), seed, labels, points, flags)


def assign_label(catalog, G, v, tol=DEFAULT):
    """Label id of the catalog entry whose class contains ``v`` (``None`` if unmatched)."""
    pc = classify_point(G, v, tol, strict=False)
    if pc.flag == UNCONVERGED:
        return None
    matcher = _Matcher(G, tol, catalog.seed)
    matcher.entries = catalog.entries
    e = matcher.match(pc.rep, pc.fingerprint)
    return None if e is None else e.id


def dense_stratum(catalog):
    """The unique open stratum, or ``None`` when zero or several are open."""
    opened = catalog.open_entries
    return opened[0] if len(opened) == 1 else None


def sphere_samples(dim, count, seed):
    """Uniform samples on the unit sphere of ``R^dim``."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(count, dim))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return x / norms


def gaussian_samples(dim, count, seed):
    return np.random.default_rng(seed).normal(size=(count, dim))
