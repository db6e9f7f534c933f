"""Command-line entry point: ``modeconv {gallery,diagnose,preserve,relax}``.

Exit codes: 0 success, 2 gallery verdicts differ from the expected table,
3 input error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import jsonschema

from . import io as mio
from .modes import (
    DEFAULT_DELTA_GRID,
    DEFAULT_HORIZON,
    DEFAULT_TOL,
    DecayCriterion,
    Mode,
    Verdict,
    alpha_witness,
    by_mode,
    verdict,
)
from .preservation import (
    build_counterexample,
    find_breaking_pairs,
    lower_bound_series,
    sampled_witnesses,
    scalar_map,
    verify_preservation,
)
from .relaxation import ExperimentConfig, SolverError, relaxation_experiment
from .sequences import GALLERY_NAMES, gallery

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3, 4
COMMANDS = ("gallery", "diagnose", "preserve", "relax")
DEFAULT_P = 1

H, F = Verdict.HOLDS, Verdict.FAILS
EXPECTED = {
    "spike": {Mode.LP: F, Mode.ALMOST_LP: H, Mode.ALPHA_P: H, Mode.MEASURE: H},
    "spread": {Mode.MEASURE: H, Mode.ALPHA_P: F},
    "typewriter": {Mode.ALPHA_P: H, Mode.ALMOST_LP: F},
    "constant": {m: H for m in Mode},
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "p": {"type": ["number", "string"]},
        "horizon": {"type": "integer", "minimum": 8},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "delta_grid": {"type": "array", "minItems": 1, "items": {"type": ["number", "string"]}},
        "input": {"type": "string"},
        "out": {"type": "string"},
        "seed": {"type": "integer"},
        "map": {"type": "string"},
        "samples": {"type": "integer", "minimum": 0},
        "relax": {
            "type": "object",
            "properties": {
                "k": {"type": "number", "exclusiveMinimum": 0},
                "gamma": {"type": "number", "exclusiveMinimum": 1},
                "J": {"type": "integer", "minimum": 4},
                "T_final": {"type": "number", "exclusiveMinimum": 0},
                "eps_list": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
                "dt_safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "delta_low": {"type": "number", "exclusiveMinimum": 0},
                "M": {"type": "number", "exclusiveMinimum": 0},
                "R_max": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer", "minimum": 1},
                "well_prepared": {"type": "boolean"},
                "initial": {
                    "type": "object",
                    "properties": {"amplitude": {"type": "number"}, "mode": {"type": "integer", "minimum": 1}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass
class RunConfig:
    command: str
    p: Fraction | float = DEFAULT_P
    horizon: int = DEFAULT_HORIZON
    tolerance: float = DEFAULT_TOL
    delta_grid: tuple = DEFAULT_DELTA_GRID
    input_path: str | None = None
    output_dir: str = "modeconv-out"
    seed: int = 0
    map: str = "square"
    samples: int = 100
    relax: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise mio.InputError(f"unknown command {self.command!r}")
        if self.horizon < 8:
            raise mio.InputError("horizon must be at least 8")
        if not self.tolerance > 0:
            raise mio.InputError("tolerance must be positive")
        if not self.delta_grid or any(not d > 0 for d in self.delta_grid):
            raise mio.InputError("delta grid must be nonempty and positive")

    @property
    def criterion(self) -> DecayCriterion:
        return DecayCriterion(self.tolerance)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MODECONV_THREADS", "1")))
    except ValueError:
        return 1


def _family_payload(fam, reports, p) -> dict:
    return {
        "family": fam.name,
        "p": p,
        "verdicts": {r.mode.value: r.verdict.value for r in reports},
        "reports": reports,
    }


def _all_series(reports) -> list:
    return [s for r in reports for s in r.series]


def run_gallery(cfg: RunConfig) -> int:
    def one(name: str):
        fam = gallery(name, cfg.p)
        return name, fam, verdict(fam, cfg.p, cfg.horizon, cfg.criterion, cfg.delta_grid)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, GALLERY_NAMES))
    mismatches = []
    families, csv_parts = {}, []
    for name, fam, reports in results:
        got = by_mode(reports)
        for mode, want in EXPECTED[name].items():
            if got[mode].verdict is not want:
                mismatches.append(f"{name}: {mode.value} is {got[mode].verdict.value}, expected {want.value}")
        families[name] = _family_payload(fam, reports, cfg.p)
        csv_parts.append(mio.series_csv(_all_series(reports)).split("\n", 1)[1])
    doc = mio.report_document("gallery", {"config": _config_json(cfg), "families": families, "mismatches": mismatches})
    mio.write_text(cfg.out / "gallery.json", mio.dumps(doc))
    mio.write_text(cfg.out / "gallery_stats.csv", ",".join(mio.CSV_COLUMNS) + "\n" + "".join(csv_parts))
    for name, _, reports in results:
        print(f"{name:11s} " + "  ".join(f"{r.mode.value}={r.verdict.name}" for r in reports))
    for m in mismatches:
        print(f"MISMATCH {m}", file=sys.stderr)
    return EXIT_MISMATCH if mismatches else EXIT_OK


def _load_family(cfg: RunConfig):
    if not cfg.input_path:
        raise mio.InputError("this command needs --input FAMILY.json")
    return mio.family_from_json(mio.load_json(cfg.input_path), cfg.p)


def run_diagnose(cfg: RunConfig) -> int:
    fam = _load_family(cfg)
    reports = verdict(fam, cfg.p, cfg.horizon, cfg.criterion, cfg.delta_grid)
    doc = mio.report_document("diagnose", {"config": _config_json(cfg), **_family_payload(fam, reports, cfg.p)})
    mio.write_text(cfg.out / "diagnose.json", mio.dumps(doc))
    mio.write_text(cfg.out / "diagnose_stats.csv", mio.series_csv(_all_series(reports)))
    print(f"{fam.name}: " + "  ".join(f"{r.mode.value}={r.verdict.name}" for r in reports))
    return EXIT_OK


def run_preserve(cfg: RunConfig) -> int:
    try:
        phi = scalar_map(cfg.map)
    except ValueError as exc:
        raise mio.InputError(str(exc)) from exc
    payload: dict = {"config": _config_json(cfg), "map": phi.description}
    if cfg.input_path:
        fam = _load_family(cfg)
    elif phi.lipschitz is None:
        pairs = find_breaking_pairs(phi, cfg.p, cfg.horizon)
        if pairs.missing:
            raise mio.InputError(f"no breaking pair for n = {pairs.missing[0]}; supply a family with --input")
        ce = build_counterexample(phi, pairs, cfg.p, cfg.horizon)
        fam, image = ce.family, ce.image
        payload["counterexample"] = {
            "pairs": {str(n): list(ab) for n, ab in sorted(pairs.pairs.items())},
            "blocks": ce.blocks,
            "tails": ce.tails,
            "exact_lengths": ce.exact,
        }
    else:
        fam = gallery("spike", cfg.p)
    res = verify_preservation(phi, fam, cfg.p, cfg.horizon, cfg.criterion, cfg.delta_grid, phi.lipschitz)
    payload.update(
        {
            "family": fam.name,
            "before": res.before,
            "after": res.after,
            "preserved": res.preserved,
            "scaling_holds": res.scaling_holds,
        }
    )
    series = _all_series(res.before) + _all_series(res.after)
    if "counterexample" in payload:
        bounds = {}
        for d in cfg.delta_grid:
            for label, src in (("before", fam), ("after", image)):
                rep = alpha_witness(src, cfg.p, d, cfg.horizon)
                s = lower_bound_series(image, rep.witness, cfg.p, cfg.horizon)
                bounds[f"superlevel_{label}_{mio.number(d)}"] = s
        for i, w in enumerate(sampled_witnesses(fam, cfg.samples, cfg.seed)):
            bounds[f"sampled_{i}"] = lower_bound_series(image, w, cfg.p, cfg.horizon)
        minima = {k: (min(s.values) if len(s) else None) for k, s in bounds.items()}
        payload["lower_bounds"] = {"minimum": minima, "all_exceed_half": all(v is None or v > Fraction(1, 2) for v in minima.values())}
        series += [s for k, s in bounds.items() if not k.startswith("sampled_")]
    mio.write_text(cfg.out / "preserve.json", mio.dumps(mio.report_document("preserve", payload)))
    mio.write_text(cfg.out / "preserve_stats.csv", mio.series_csv(series))
    b, a = by_mode(res.before), by_mode(res.after)
    for m in Mode:
        print(f"{m.value:10s} before={b[m].verdict.name:12s} after={a[m].verdict.name}")
    return EXIT_OK


RELAX_COLUMNS = ("time", "eps", "psi", "entropy_total", "trimmed_l2", "complement_measure", "mass")


def run_relax(cfg: RunConfig) -> int:
    opts = dict(cfg.relax)
    initial = opts.pop("initial", {})
    if "eps_list" in opts:
        opts["eps_list"] = tuple(opts["eps_list"])
    exp_cfg = ExperimentConfig(**opts, **{k: v for k, v in initial.items()})
    try:
        rep = relaxation_experiment(exp_cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    mio.write_text(cfg.out / "relax.csv", mio.rows_csv(rep.rows(), RELAX_COLUMNS))
    summary = {
        "config": exp_cfg,
        "constants": rep.constants,
        "rho_bar_range": rep.rho_bar_range,
        "diffusion_mass_drift": rep.diffusion_mass_drift,
        "runs": [
            {"eps": r.eps, "n": r.n, "sup_psi": r.sup_psi, "final": r.splits[-1], "mass_drift": r.mass_drift}
            for r in rep.runs
        ],
    }
    mio.write_text(cfg.out / "relax.json", mio.dumps(mio.report_document("relax", summary)))
    for r in rep.runs:
        print(f"eps={r.eps:<10g} sup_psi={r.sup_psi:.6e} trimmed_l2(T)={r.splits[-1].trimmed_l2:.6e}")
    return EXIT_OK


def _config_json(cfg: RunConfig) -> dict:
    return {
        "command": cfg.command,
        "p": cfg.p,
        "horizon": cfg.horizon,
        "tolerance": cfg.tolerance,
        "delta_grid": list(cfg.delta_grid),
        "seed": cfg.seed,
    }


RUNNERS = {"gallery": run_gallery, "diagnose": run_diagnose, "preserve": run_preserve, "relax": run_relax}


def run(cfg: RunConfig) -> int:
    try:
        return RUNNERS[cfg.command](cfg)
    except mio.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modeconv", description="Diagnose modes of convergence of simple-function sequences.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", help=f"exponent p >= 1 (default {DEFAULT_P})")
    common.add_argument("--horizon", type=int, help=f"largest index examined (default {DEFAULT_HORIZON})")
    common.add_argument("--tol", type=float, help=f"decay tolerance (default {DEFAULT_TOL})")
    common.add_argument("--delta-grid", help="comma-separated deltas, e.g. 1/64,1/16,1/4,1")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for sampled witness sets")
    common.add_argument("--config", help="JSON config file; flags override its keys")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gallery", parents=[common], help="run the example families and check their verdicts")
    d = sub.add_parser("diagnose", parents=[common], help="diagnose a family given as JSON")
    d.add_argument("--input", help="family JSON document")
    pr = sub.add_parser("preserve", parents=[common], help="compare verdicts before and after a scalar map")
    pr.add_argument("--map", help="identity, affine(m,c), abs, square, sqrt_abs or tabulated(file.csv)")
    pr.add_argument("--input", help="family JSON document (default: built counterexample or spike)")
    pr.add_argument("--samples", type=int, help="number of sampled witness sequences (default 100)")
    sub.add_parser("relax", parents=[common], help="Euler-with-friction relaxation experiment")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        base = mio.load_json(args.config)
        try:
            jsonschema.validate(base, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise mio.InputError(f"invalid config: {exc.message}") from exc
    flags = {
        "p": args.p,
        "horizon": args.horizon,
        "tolerance": args.tol,
        "delta_grid": args.delta_grid.split(",") if args.delta_grid else None,
        "out": args.out,
        "seed": args.seed,
        "input": getattr(args, "input", None),
        "map": getattr(args, "map", None),
        "samples": getattr(args, "samples", None),
    }
    merged = {**base, **{k: v for k, v in flags.items() if v is not None}}
    kw = {
        "command": args.command,
        "p": mio.parse_number(merged.get("p", DEFAULT_P)),
        "horizon": int(merged.get("horizon", DEFAULT_HORIZON)),
        "tolerance": float(merged.get("tolerance", DEFAULT_TOL)),
        "delta_grid": tuple(sorted(mio.parse_rational(d) for d in merged["delta_grid"])) if "delta_grid" in merged else DEFAULT_DELTA_GRID,
        "input_path": merged.get("input"),
        "output_dir": merged.get("out", "modeconv-out"),
        "seed": int(merged.get("seed", 0)),
        "map": merged.get("map", "square"),
        "samples": int(merged.get("samples", 100)),
        "relax": merged.get("relax", {}),
    }
    if float(kw["p"]) < 1:
        raise mio.InputError("p must be at least 1")
    return RunConfig(**kw)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (mio.InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
