"""Numerical tolerances and budgets shared by every module."""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # orbit flow
    flow_tol: float = 1e-9
    max_iter: int = 50000
    armijo: float = 1e-4
    contraction: float = 0.5
    null_rel: float = 1e-8
    null_abs: float = 1e-14
    # isotropy and conjugacy
    iso_tol: float = 1e-8
    theta_tol: float = 1e-6
    subspace_tol: float = 1e-7
    conj_tol: float = 1e-6
    n_starts: int = 32
    search_maxiter: int = 4000
    # strata
    wall_tol: float = 1e-7
    open_fraction: float = 0.02
    # slices and restriction
    slice_tol: float = 1e-7
    slice_samples: int = 1000
    transport_tol: float = 1e-5
    fiber_starts: int = 8

    def with_overrides(self, overrides):
        """Return a copy with ``{name: value}`` applied, coercing to the field type."""
        known = {f.name: f for f in fields(self)}
        coerced = {}
        for name, value in overrides.items():
            if name not in known:
                raise KeyError(f"unknown tolerance {name!r}")
            kind = int if isinstance(getattr(self, name), int) else float
            coerced[name] = kind(float(value)) if kind is int else float(value)
        return replace(self, **coerced)

    def null_threshold(self, f_start):
        return max(self.null_rel * f_start, self.null_abs)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = Tolerances()
