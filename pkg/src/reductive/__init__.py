"""Numerics for real reductive group actions: minimal vectors, isotropy strata, slices and restriction."""

from .algebra import AlgebraElement, CompatibleGroup, act, bracket, build_group, exp_action
from .builtins import BUILTINS, builtin_description, builtin_group
from .errors import (
    DimensionMismatch,
    EmptyResult,
    FlowFailed,
    NoDenseStratum,
    NoInvariantComplement,
    NonFinite,
    NotMinimal,
    ParseError,
    ReductiveError,
    SearchBudgetExhausted,
    StructureViolation,
)
from .isotropy import (
    Fingerprint,
    Subalgebra,
    fingerprint,
    fixed_space,
    isotropy_algebra,
    k_conjugacy_search,
    normalizer_algebra,
    subspace_distance,
    transport_search,
)
from .kempfness import (
    FlowResult,
    FlowStatus,
    OrbitKind,
    OrbitStatus,
    flow_to_minimal,
    gradient_map,
    orbit_status,
    value_f,
)
from .options import DEFAULT, Tolerances
from .restriction import (
    RestrictionReport,
    phi_fiber_count,
    restricted_gradient,
    restriction_context,
    restriction_report,
    sample_xh,
    verify_surjectivity,
    verify_zero_fiber_lemma,
)
from .slice import SliceModel, build_slice_model, splitting_number
from .strata import StratumCatalog, StratumLabel, build_catalog, classify_point, dense_stratum

__version__ = "0.1.0"
