"""Run configuration: a JSON group description (or a builtin name) plus tolerances."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import build_group
from .builtins import BUILTINS, builtin_description
from .errors import ParseError
from .options import DEFAULT, Tolerances

MATRIX_FIELDS = ("k_basis", "p_basis", "component_reps", "normalizer_reps", "ambient_reps")
KNOWN_FIELDS = {"builtin", "name", "dim_v", "structure_tol", "tolerances", *MATRIX_FIELDS}


@dataclass(eq=False)
class RunConfig:
    group: object
    description: dict
    tolerances: Tolerances = DEFAULT
    samples: int = 1000
    seed: int = 42
    source: str = ""
    extra: dict = field(default_factory=dict)


def _line_of(text, name):
    if not text:
        return None
    m = re.search(r'"' + re.escape(name) + r'"\s*:', text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _check_matrices(name, value, dim, text):
    line = _line_of(text, name)
    if not isinstance(value, list):
        raise ParseError("expected a list of matrices", name, line)
    for i, mat in enumerate(value):
        if not isinstance(mat, list) or len(mat) != dim:
            raise ParseError(f"matrix {i} must have {dim} rows", f"{name}[{i}]", line)
        for r, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != dim:
                raise ParseError(f"row {r} of matrix {i} must have {dim} entries", f"{name}[{i}]", line)
            for x in row:
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ParseError(f"non-numeric entry {x!r}", f"{name}[{i}][{r}]", line)


def parse_description(data, text=""):
    """Validate the raw mapping and resolve a ``builtin`` entry; returns ``(description, tolerances)``."""
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", None, 1)
    unknown = set(data) - KNOWN_FIELDS
    if unknown:
        name = sorted(unknown)[0]
        raise ParseError("unknown field", name, _line_of(text, name))
    tol_raw = data.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ParseError("expected an object of named reals", "tolerances", _line_of(text, "tolerances"))
    try:
        tol = DEFAULT.with_overrides(tol_raw)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(str(exc), "tolerances", _line_of(text, "tolerances")) from None

    if "builtin" in data:
        name = data["builtin"]
        if name not in BUILTINS:
            raise ParseError(f"unknown builtin {name!r}", "builtin", _line_of(text, "builtin"))
        desc = builtin_description(name)
        for key in set(data) - {"builtin", "tolerances"}:
            desc[key] = data[key]
    else:
        desc = {k: v for k, v in data.items() if k != "tolerances"}
    if "dim_v" not in desc:
        raise ParseError("missing field", "dim_v", None)
    dim = desc["dim_v"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim <= 0:
        raise ParseError("dim_v must be a positive integer", "dim_v", _line_of(text, "dim_v"))
    for key in MATRIX_FIELDS:
        if key in desc:
            value = desc[key]
            if isinstance(value, np.ndarray):
                value = value.tolist()
            _check_matrices(key, value, dim, text if key in data else "")
    return desc, tol


def load_config(path):
    """Read a JSON config file; ``build_group`` errors pass through unchanged."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, None, exc.lineno) from None
    desc, tol = parse_description(data, text)
    return RunConfig(build_group(desc), desc, tol, source=str(path))


def builtin_config(name):
    if name not in BUILTINS:
        raise ParseError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}", "builtin")
    desc = builtin_description(name)
    return RunConfig(build_group(desc), desc, DEFAULT, source=f"builtin:{name}")
