"""Norm functional, gradient map and the descent flow to minimal vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import FlowFailed, NonFinite
from .options import DEFAULT


class FlowStatus(str, enum.Enum):
    MINIMAL = "Minimal"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGED = "Diverged"


class OrbitKind(str, enum.Enum):
    CLOSED = "Closed"
    NON_CLOSED = "NonClosed"


@dataclass(frozen=True, eq=False)
class FlowResult:
    start: np.ndarray
    limit: np.ndarray
    f_start: float
    f_limit: float
    residual: float
    iterations: int
    status: FlowStatus
    in_nullcone: bool
    f_trace: tuple = ()

    @property
    def converged(self):
        return self.status is FlowStatus.MINIMAL


@dataclass(frozen=True, eq=False)
class OrbitStatus:
    kind: OrbitKind
    in_nullcone: bool
    isotropy_dim_start: int
    isotropy_dim_limit: int
    flow: FlowResult


def value_f(v):
    """Half the squared norm."""
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ v)


def gradient_map(G, v):
    """Components ``<xi_i v, v>`` over the orthonormal ``p`` basis of ``G``."""
    v = np.asarray(v, dtype=float)
    if G.dim_p == 0:
        return np.zeros(0)
    return (G.p_basis @ v) @ v


def _gradient_along(basis, v):
    if basis.shape[0] == 0:
        return np.zeros(0)
    return (basis @ v) @ v


def _is_done(residual, f, f0, null_thr, tol):
    if f <= null_thr:
        return True
    # Residual and f are both quadratic in v, so the test is scale-free; it
    # also implies residual <= flow_tol whenever f <= 1/2.
    return residual <= tol.flow_tol * min(1.0, 2.0 * f)


def _line_minimizer(w, lam, t_guess):
    """Minimizer of the convex ``t -> sum w_i exp(-2 t lam_i)`` over ``t > 0``.

    Safeguarded Newton inside a bracket; if the function keeps decreasing
    (nullcone directions) the step is capped where the exponentials saturate.
    """
    neg = lam[w > 0]
    t_cap = 300.0 / max(float(np.max(np.abs(neg))), 1e-300) if neg.size else 1.0

    def d1(t):
        return -float(np.sum(w * lam * np.exp(-2.0 * t * lam)))

    lo, hi = 0.0, min(max(t_guess, 1e-300), t_cap)
    while d1(hi) < 0.0:
        if hi >= t_cap:
            return t_cap
        lo, hi = hi, min(2.0 * hi, t_cap)
    t = 0.5 * (lo + hi)
    for _ in range(100):
        e = np.exp(-2.0 * t * lam)
        g1 = -float(np.sum(w * lam * e))
        g2 = 2.0 * float(np.sum(w * lam * lam * e))
        if g1 < 0.0:
            lo = t
        else:
            hi = t
        tn = t - g1 / g2 if g2 > 0.0 else 0.5 * (lo + hi)
        if not lo < tn < hi:
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= 1e-14 * t or hi - lo <= 1e-15 * hi:
            return tn
        t = tn
    return t


def flow_to_minimal(G, v, tol=DEFAULT, record=False, p_basis=None):
    """Descend ``f`` along ``v <- exp(-t mu_p(v)) v`` until ``mu_p`` vanishes.

    ``mu_p(v)`` is a symmetric matrix, so along its one-parameter group ``f``
    is a convex sum of exponentials in the eigenbasis.  The trial step is the
    exact minimizer along that line (Newton, seeded by the previous step and
    initially by ``1 / (1 + |mu_p(v)|)``); Armijo backtracking (contraction
    ``tol.contraction``, sufficient decrease ``tol.armijo``) guards it.

    ``p_basis`` overrides the group's p basis (used for restricted gradient
    maps); the stopping rule treats the iterate as minimal once
    ``|mu| <= flow_tol * min(1, 2 f)`` or once ``f`` drops below the nullcone
    threshold.
    """
    basis = G.p_basis if p_basis is None else p_basis
    x = np.array(v, dtype=float)
    f0 = value_f(x)
    null_thr = tol.null_threshold(f0)
    f = f0
    mu = _gradient_along(basis, x)
    r = float(np.linalg.norm(mu))
    trace = [f] if record else None
    step = 1.0 / (1.0 + r)
    it = 0
    status = FlowStatus.MAX_ITERATIONS

    while True:
        if _is_done(r, f, f0, null_thr, tol):
            status = FlowStatus.MINIMAL
            break
        if it >= tol.max_iter:
            break
        X = np.tensordot(mu, basis, axes=1)
        lam, Q = np.linalg.eigh(X)
        y = Q.T @ x
        slope = r * r
        t = _line_minimizer(y * y, lam, step)
        accepted = None
        while t > 1e-300:
            with np.errstate(over="ignore", invalid="ignore"):
                # f(new) - f(x) evaluated without cancellation
                delta = 0.5 * float(np.sum(y * y * np.expm1(-2.0 * t * lam)))
            if np.isfinite(delta) and delta <= -tol.armijo * t * slope:
                accepted = Q @ (np.exp(-t * lam) * y)
                break
            t *= tol.contraction
        it += 1
        if accepted is None:
            # no representable descent remains
            status = FlowStatus.MINIMAL if r <= tol.flow_tol else FlowStatus.MAX_ITERATIONS
            break
        if not np.all(np.isfinite(accepted)):
            raise NonFinite("non-finite iterate in orbit flow", iterate=accepted)
        x = accepted
        f = value_f(x)
        mu = _gradient_along(basis, x)
        r = float(np.linalg.norm(mu))
        if record:
            trace.append(f)
        step = t

    return FlowResult(
        start=np.array(v, dtype=float),
        limit=x,
        f_start=f0,
        f_limit=f,
        residual=r,
        iterations=it,
        status=status,
        in_nullcone=f <= null_thr,
        f_trace=tuple(trace) if record else (),
    )


def orbit_status(G, v, tol=DEFAULT, flow=None):
    """Closed/non-closed classification from the isotropy dimension jump.

    When the flow ends in the nullcone the closed orbit in the fiber is the
    origin, whose isotropy is all of ``g``.
    """
    from .isotropy import isotropy_algebra

    if flow is None:
        flow = flow_to_minimal(G, v, tol)
    if not flow.converged:
        raise FlowFailed(f"flow ended with status {flow.status.value}", flow)
    d_start = isotropy_algebra(G, flow.start, tol).dim_total
    if flow.in_nullcone:
        d_limit = G.dim_g
    else:
        d_limit = isotropy_algebra(G, flow.limit, tol).dim_total
    kind = OrbitKind.CLOSED if d_limit == d_start else OrbitKind.NON_CLOSED
    return OrbitStatus(kind, flow.in_nullcone, d_start, d_limit, flow)
