"""Batch command line: ``validate``, ``flow``, ``classify``, ``stratify``, ``split``, ``restrict``.

Every command writes one JSON report with sorted keys (and, where it
classifies samples, ``samples.csv``).  Exit status is 0 when every check
of the command passes, 1 when a check fails and 2 on an error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import builtin_config, load_config
from .errors import ParseError, ReductiveError
from .kempfness import flow_to_minimal, orbit_status
from .restriction import restriction_context, restriction_report
from .slice import splitting_number
from .strata import build_catalog, classify_point, sphere_samples

COMMANDS = ("validate", "flow", "classify", "stratify", "split", "restrict")


def _floats(v):
    return [float(t) for t in np.asarray(v).ravel()]


def parse_vector(text, dim):
    """``origin``, ``a,b,c`` or a JSON list, checked against ``dim``."""
    text = text.strip()
    if text == "origin":
        return np.zeros(dim)
    body = text[1:-1] if text.startswith("[") and text.endswith("]") else text
    try:
        v = np.array([float(t) for t in body.split(",") if t.strip()])
    except ValueError:
        raise ParseError(f"cannot read vector {text!r}", "--at") from None
    if v.shape != (dim,):
        raise ParseError(f"vector has {v.size} entries, expected {dim}", "--at")
    return v


def _point(args, cfg):
    if args.at is not None:
        return parse_vector(args.at, cfg.group.dim_v)
    return np.random.default_rng(args.seed).normal(size=cfg.group.dim_v)


def _group_summary(G):
    return {
        "name": G.name,
        "dim_v": G.dim_v,
        "dims": [G.dim_g, G.dim_k, G.dim_p],
        "component_reps": len(G.component_reps),
        "normalizer_reps": len(G.normalizer_reps),
        "ambient_reps": len(G.ambient_reps),
        "structure_residual": float(G.structure_residual),
    }


def _flow_dict(fl):
    return {
        "start": _floats(fl.start),
        "limit": _floats(fl.limit),
        "f_start": fl.f_start,
        "f_limit": fl.f_limit,
        "residual": fl.residual,
        "iterations": fl.iterations,
        "status": fl.status.value,
        "in_nullcone": bool(fl.in_nullcone),
    }


def cmd_validate(cfg, args):
    G = cfg.group
    ok = G.structure_residual <= max(G.structure_tol, 1e-9)
    return {}, {"structure residual within tolerance": ok}


def cmd_flow(cfg, args):
    G, tol = cfg.group, cfg.tolerances
    v = _point(args, cfg)
    fl = flow_to_minimal(G, v, tol)
    report = {"flow": _flow_dict(fl)}
    checks = {"flow converged": fl.converged, "f non-increasing": fl.f_limit <= fl.f_start}
    if fl.converged:
        st = orbit_status(G, v, tol, flow=fl)
        report["orbit"] = {
            "kind": st.kind.value,
            "in_nullcone": bool(st.in_nullcone),
            "isotropy_dim_start": st.isotropy_dim_start,
            "isotropy_dim_limit": st.isotropy_dim_limit,
        }
    return report, checks


def _sample_row(pc, label):
    return [*_floats(pc.flow.start), "" if label is None else label, pc.flow.f_limit, pc.flow.residual, pc.flag]


def cmd_classify(cfg, args):
    G, tol = cfg.group, cfg.tolerances
    v = _point(args, cfg)
    pc = classify_point(G, v, tol, strict=False)
    report = {
        "point": _floats(v),
        "flow": _flow_dict(pc.flow),
        "isotropy_dims": list(pc.rep.dims),
        "theta_stable": bool(pc.rep.theta_stable),
        "fingerprint": pc.fingerprint.as_list(),
        "in_nullcone": bool(pc.in_nullcone),
        "flag": pc.flag,
    }
    return report, {"flow converged": pc.flow.converged}, [_sample_row(pc, None)]


def cmd_stratify(cfg, args):
    G, tol = cfg.group, cfg.tolerances
    pts = sphere_samples(G.dim_v, args.samples, args.seed)
    cat = build_catalog(G, pts, tol, args.seed)
    unconverged = sum(not pc.flow.converged for pc in cat.points)
    total = sum(cat.fractions.values())
    report = {"catalog": cat.as_dict(), "ambiguous_fraction": cat.ambiguous_fraction}
    checks = {
        "fractions sum to one": abs(total - 1.0) < 1e-12,
        "every flow converged": unconverged == 0,
        "one label per sample": len(cat.labels) == len(pts),
    }
    rows = [_sample_row(pc, lab) for pc, lab in zip(cat.points, cat.labels)]
    return report, checks, rows


def cmd_split(cfg, args):
    G, tol = cfg.group, cfg.tolerances
    v = parse_vector(args.at, G.dim_v) if args.at is not None else np.zeros(G.dim_v)
    res = splitting_number(G, v, tol, args.seed, args.samples)
    model = res.model
    stacked = np.concatenate([model.orbit_tangent, model.complement], axis=0)
    full_rank = stacked.shape[0] == G.dim_v and np.linalg.matrix_rank(stacked) == G.dim_v
    checks = {
        "orbit tangent and slice span V": bool(full_rank),
        "slice invariant under the isotropy": model.invariance_residual <= tol.slice_tol,
    }
    rows = None
    if res.catalog is not None:
        rows = [_sample_row(pc, lab) for pc, lab in zip(res.catalog.points, res.catalog.labels)]
    return {"split": res.as_dict()}, checks, rows


def cmd_restrict(cfg, args):
    G, tol = cfg.group, cfg.tolerances
    ctx = restriction_context(G, tol, args.seed, args.samples)
    rep = restriction_report(ctx, tol, args.seed, args.points, args.fibers)
    d = rep.as_dict()
    checks = {
        "zero-fiber lemma": rep.lemma_zero_fiber.passed,
        "surjectivity lemma": rep.lemma_surjectivity.passed,
        "fiber counts equal splitting numbers": all(r.matches for r in rep.fiber_records),
    }
    return {"restriction": d}, checks


HANDLERS = {
    "validate": cmd_validate,
    "flow": cmd_flow,
    "classify": cmd_classify,
    "stratify": cmd_stratify,
    "split": cmd_split,
    "restrict": cmd_restrict,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="reductive", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON group description")
    src.add_argument("--builtin", help="name of a shipped group")
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    ap.add_argument("--at", help="point as a,b,c or 'origin'")
    ap.add_argument("--out", help="directory for report.json and samples.csv")
    ap.add_argument("--points", type=int, default=50, help="lemma sample count for restrict")
    ap.add_argument("--fibers", type=int, default=20, help="interior fibers counted by restrict")
    return ap


def _tolerance_overrides(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise ParseError(f"expected NAME=VALUE, got {item!r}", "--tol")
        name, value = item.split("=", 1)
        out[name.strip()] = value.strip()
    return out


def render_report(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_csv(path, rows, dim):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(dim)] + ["label", "f_limit", "residual", "flag"])
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def run(argv=None, stdout=None):
    """Parse ``argv``, run one command and return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    report = {"command": args.command, "seed": args.seed}
    rows = None
    dim = 0
    try:
        cfg = load_config(args.config) if args.config else builtin_config(args.builtin)
        overrides = _tolerance_overrides(args.tol)
        try:
            cfg.tolerances = cfg.tolerances.with_overrides(overrides)
        except (KeyError, ValueError) as exc:
            raise ParseError(str(exc), "--tol") from None
        dim = cfg.group.dim_v
        report["group"] = _group_summary(cfg.group)
        report["source"] = cfg.source
        report["tolerances"] = cfg.tolerances.as_dict()
        out = HANDLERS[args.command](cfg, args)
        body, checks = out[0], out[1]
        rows = out[2] if len(out) > 2 else None
        report.update(body)
        report["checks"] = {k: bool(v) for k, v in checks.items()}
        status = 0 if all(checks.values()) else 1
    except (ReductiveError, KeyError, ValueError, OSError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = 2
    report["status"] = status
    text = render_report(report)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(text)
        if rows is not None:
            write_csv(out_dir / "samples.csv", rows, dim)
        failed = [k for k, v in report.get("checks", {}).items() if not v]
        summary = "ok" if status == 0 else ("error: " + report["error"]["message"] if status == 2 else "failed: " + ", ".join(failed))
        print(f"{args.command}: {summary} -> {out_dir / 'report.json'}", file=stdout)
    else:
        stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
