"""Command-line interface.

Subcommands: ``validate``, ``solve``, ``curve``, ``gamma``,
``example-card-game``, ``oracle`` and ``simulate``. Structured outputs are
JSON documents embedding a run manifest; CSV outputs get a sidecar
``<file>.manifest.json`` (or the manifest on stderr when writing to
stdout). Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 check failure. Every command is deterministic given --seed; omitting it
uses the fixed default 1729, never the clock.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import CheckFailed, DomainError, RdcompError, SpecFormatError
from .hypergraph import (
    CandidateRecovery,
    Hyperedge,
    MultiHyperedge,
    enumerate_gamma_d,
    epsilon_distortion,
    format_hyperedge,
    maximal_members,
)
from .info import AuxChannel, DecoderMap, binary_entropy
from .model import (
    ProblemSpec,
    builtin_spec,
    load_spec,
    replace_distortion,
    zero_rate_distortion,
)
from .oracle import OracleConfig, verify_point
from .simulate import simulate_scheme
from .solver import (
    RDPoint,
    SolverConfig,
    attach_subset,
    lift_to_multihyperedge,
    solve_at_distortion,
    solve_lagrangian,
    sweep_curve,
)

#: Default RNG seed when --seed is omitted.
DEFAULT_SEED = 1729
THREADS_ENV = "RDCOMP_THREADS"


@dataclass(frozen=True)
class RunManifest:
    """Provenance attached to every output document."""

    command: str
    spec: str
    config: dict
    artifact_version: str
    rng_seed: int
    rng: str
    threads: int
    elapsed_seconds: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# --- I/O helpers ---------------------------------------------------------


def _load_instance(args) -> tuple[ProblemSpec, str]:
    if args.builtin:
        return builtin_spec(args.builtin), f"builtin:{args.builtin}"
    return load_spec(args.spec), str(args.spec)


def _emit_structured(doc: dict, args) -> None:
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_csv(lines: list[str], manifest: RunManifest, args) -> None:
    body = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(body)
        with open(str(args.output) + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest.to_dict(), fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(body)
        print(json.dumps(manifest.to_dict()), file=sys.stderr)


def _atom_to_dict(meta) -> dict:
    if isinstance(meta, MultiHyperedge):
        return {"edge": list(meta.edge.members), "recovery": list(meta.recovery.per_y)}
    if isinstance(meta, CandidateRecovery):
        return {"edge": None, "recovery": list(meta.per_y)}
    return {"edge": None, "recovery": None}


def _atom_from_dict(raw) -> CandidateRecovery | MultiHyperedge | None:
    if raw is None or raw.get("recovery") is None:
        return None
    rec = CandidateRecovery(tuple(raw["recovery"]))
    if raw.get("edge") is not None:
        return MultiHyperedge(Hyperedge(tuple(raw["edge"])), rec)
    return rec


def point_to_dict(spec: ProblemSpec, pt: RDPoint) -> dict:
    """Full-precision document for one rate-distortion point."""
    meta = pt.channel.atom_meta or (None,) * pt.channel.num_atoms
    return {
        "rate_bits": pt.rate,
        "distortion": pt.distortion,
        "lambda": pt.lam,
        "converged": pt.converged,
        "iterations": pt.iterations,
        "support_size": pt.support_size(spec),
        "channel": {
            "cond": pt.channel.cond.tolist(),
            "atoms": [_atom_to_dict(m) for m in meta],
        },
        "decoder": pt.decoder.table.tolist(),
    }


def point_from_dict(raw: dict) -> RDPoint:
    """Rebuild a point written by ``point_to_dict`` (rates/distortions exact)."""
    try:
        atoms = tuple(_atom_from_dict(a) for a in raw["channel"]["atoms"])
        if any(a is None for a in atoms):
            atoms = None
        ch = AuxChannel(np.array(raw["channel"]["cond"], dtype=float), atom_meta=atoms)
        dec = DecoderMap(np.array(raw["decoder"], dtype=int))
        return RDPoint(
            distortion=float(raw["distortion"]),
            rate=float(raw["rate_bits"]),
            lam=float(raw["lambda"]),
            channel=ch,
            decoder=dec,
            converged=bool(raw["converged"]),
            iterations=int(raw["iterations"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed point document: {exc}") from None


def _load_point(path) -> RDPoint:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path} is not valid JSON: {exc}") from None
    return point_from_dict(raw.get("point", raw))


def _solver_config(args, lam: float = 1.0) -> SolverConfig:
    return SolverConfig(
        lam=lam,
        tol_objective=args.tol,
        max_iters=args.max_iters,
        init_jitter=1e-3,
        rng_seed=args.seed,
        restarts=args.restarts,
    )


def _manifest(args, command, spec_name, config, started) -> RunManifest:
    return RunManifest(
        command=command,
        spec=spec_name,
        config=config,
        artifact_version=__version__,
        rng_seed=args.seed,
        rng="PCG64",
        threads=args.threads,
        elapsed_seconds=time.perf_counter() - started,
    )


# --- subcommands ---------------------------------------------------------


def _cmd_validate(args) -> int:
    spec, name = _load_instance(args)
    print(
        f"{name}: ok "
        f"(|X|={spec.num_x}, |Y|={spec.num_y}, |Z|={spec.num_z}, "
        f"|Zhat|={spec.num_zhat}, zero-rate distortion={zero_rate_distortion(spec):.9g})"
    )
    return 0


def _cmd_solve(args) -> int:
    started = time.perf_counter()
    spec, name = _load_instance(args)
    mode = args.mode.replace("-", "_")
    if args.distortion is not None:
        cfg = _solver_config(args)
        pt = solve_at_distortion(spec, args.distortion, cfg, threads=args.threads)
        config = {"distortion": args.distortion, "mode": "target", **_cfg_echo(cfg)}
    else:
        cfg = _solver_config(args, lam=args.lam)
        pt = solve_lagrangian(
            spec, cfg, mode, epsilon=args.epsilon, threads=args.threads
        )
        config = {"lambda": args.lam, "mode": mode, **_cfg_echo(cfg)}
    doc = {
        "manifest": _manifest(args, "solve", name, config, started).to_dict(),
        "point": point_to_dict(spec, pt),
    }
    _emit_structured(doc, args)
    print(
        f"rate {pt.rate:.9g} bits at distortion {pt.distortion:.9g} "
        f"(lambda {pt.lam:.9g}, converged {pt.converged})",
        file=sys.stderr,
    )
    return 0


def _cfg_echo(cfg: SolverConfig) -> dict:
    return {
        "tol_objective": cfg.tol_objective,
        "max_iters": cfg.max_iters,
        "restarts": cfg.restarts,
        "init_jitter": cfg.init_jitter,
    }


def _parse_lambda_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise DomainError("--lambda-grid expects MIN:MAX:N or MIN:MAX:N:log|lin")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    scale = parts[3] if len(parts) == 4 else "log"
    if n < 1 or hi < lo or lo < 0:
        raise DomainError(f"bad lambda grid {text!r}")
    if n == 1:
        return [lo]
    if scale == "lin":
        return list(np.linspace(lo, hi, n))
    if lo <= 0:
        raise DomainError("log-spaced grids need MIN > 0 (use :lin for a zero start)")
    return list(np.geomspace(lo, hi, n))


def _auto_lambda_grid(spec: ProblemSpec, k: int) -> list[float]:
    d_scale = float(spec.dist.max()) if spec.dist.max() > 0 else 1.0
    if k == 1:
        return [1.0 / d_scale]
    return list(np.geomspace(0.05 / d_scale, 200.0 / d_scale, k))


def _cmd_curve(args) -> int:
    started = time.perf_counter()
    spec, name = _load_instance(args)
    if args.lambda_grid:
        lambdas = _parse_lambda_grid(args.lambda_grid)
    else:
        lambdas = _auto_lambda_grid(spec, args.points)
    cfg = _solver_config(args)
    curve = sweep_curve(spec, lambdas, cfg, threads=args.threads)
    if not curve.points:
        raise CheckFailed("every sweep point failed")
    lines = ["lambda,distortion,rate_bits,support_size,converged"]
    for pt in curve.points:
        lines.append(
            f"{pt.lam!r},{pt.distortion!r},{pt.rate!r},"
            f"{pt.support_size(spec)},{str(pt.converged).lower()}"
        )
    for lam, code in curve.failures:
        lines.append(f"{lam!r},,,,failed:{code}")
    config = {"lambdas": lambdas, **_cfg_echo(cfg)}
    manifest = _manifest(args, "curve", name, config, started)
    _emit_csv(lines, manifest, args)
    return 0


def _cmd_gamma(args) -> int:
    spec, _ = _load_instance(args)
    if args.epsilon is not None:
        spec = replace_distortion(spec, epsilon_distortion(spec, args.epsilon))
        print(f"# distortion thresholded at epsilon={args.epsilon!r}")
    fam = enumerate_gamma_d(spec)
    if args.maximal:
        fam = maximal_members(fam)
        print("# maximal-only view: search heuristic, not an authoritative reduction")
    for edge in fam:
        print(format_hyperedge(spec, edge))
    return 0


def _card_game_closed_form(d: float) -> float:
    """Rate of the card-game instance: (2/3)(H((1+6D)/4) - H(3D)) on [0, 1/6]."""
    if d >= 1.0 / 6.0:
        return 0.0
    return (2.0 / 3.0) * (binary_entropy((1.0 + 6.0 * d) / 4.0) - binary_entropy(3.0 * d))


_CARD_ATOMS = (
    MultiHyperedge(Hyperedge((0, 1, 2)), CandidateRecovery((1, 0, 0))),
    MultiHyperedge(Hyperedge((0, 1, 2)), CandidateRecovery((1, 1, 0))),
)


def _cmd_example_card_game(args) -> int:
    started = time.perf_counter()
    spec = builtin_spec("card-game")
    cfg = _solver_config(args)
    grid = np.linspace(0.0, 1.0 / 6.0, args.grid_points)
    max_gap = 0.0
    print("distortion,closed_form_bits,solver_bits,gap_bits")
    relations = []
    for d in grid:
        pt = solve_at_distortion(spec, float(d), cfg, threads=args.threads)
        ref = _card_game_closed_form(float(d))
        gap = abs(pt.rate - ref)
        max_gap = max(max_gap, gap)
        print(f"{d:.9g},{ref:.9g},{pt.rate:.9g},{gap:.3g}")
        lifted = lift_to_multihyperedge(spec, pt.channel, pt.decoder)
        if lifted.atom_meta == _CARD_ATOMS:
            p1 = float(lifted.cond[0, 0])
            p3 = float(lifted.cond[0, 2])
            relations.append((float(d), (1.0 - p1 + p3) / 6.0))
    for d, achieved in relations:
        print(f"# optimizer relation at D={d:.9g}: (1-p1+p3)/6 = {achieved:.9g}")
    elapsed = time.perf_counter() - started
    print(f"# max |closed form - solver| = {max_gap:.3g} bits ({elapsed:.2f}s)")
    if args.check and max_gap > 1e-3:
        raise CheckFailed(f"max gap {max_gap!r} exceeds 1e-3 bits")
    return 0


def _point_for_artifact(args, spec):
    if args.point:
        return _load_point(args.point), {"point": str(args.point)}
    if args.distortion is None:
        raise DomainError("provide --point FILE or --distortion D")
    cfg = _solver_config(args)
    pt = solve_at_distortion(spec, args.distortion, cfg, threads=args.threads)
    return pt, {"distortion": args.distortion, **_cfg_echo(cfg)}


def _cmd_oracle(args) -> int:
    started = time.perf_counter()
    spec, name = _load_instance(args)
    pt, config = _point_for_artifact(args, spec)
    cfg = OracleConfig(
        grid_resolution=args.grid_resolution,
        random_restarts=args.oracle_restarts,
        rng_seed=args.seed,
    )
    report = verify_point(spec, pt, cfg)
    config = {
        **config,
        "oracle_restarts": cfg.random_restarts,
        "grid_resolution": cfg.grid_resolution,
    }
    doc = {
        "manifest": _manifest(args, "oracle", name, config, started).to_dict(),
        "report": report.to_dict(),
    }
    _emit_structured(doc, args)
    if not report.passed:
        raise CheckFailed(
            f"solver-oracle gap {report.gap!r} bits at distortion "
            f"{report.distortion_target!r}"
        )
    return 0


def _cmd_simulate(args) -> int:
    started = time.perf_counter()
    spec, name = _load_instance(args)
    pt, config = _point_for_artifact(args, spec)
    ch = pt.channel
    if ch.atom_meta is None:
        raise DomainError("point channel carries no atom annotations")
    if not all(isinstance(m, MultiHyperedge) for m in ch.atom_meta):
        ch = attach_subset(spec, ch)
    report = simulate_scheme(spec, ch, args.samples, args.seed, trace_path=args.trace)
    doc = {
        "manifest": _manifest(
            args, "simulate", name, {**config, "samples": args.samples}, started
        ).to_dict(),
        "report": report.to_dict(),
        "note": "distortion-side validation only; rates need block binning",
    }
    _emit_structured(doc, args)
    dev = abs(report.empirical_distortion - report.target_distortion)
    allowance = 4.0 * (report.std_error or 0.0) + 1e-12
    if dev > allowance:
        raise CheckFailed(
            f"empirical distortion deviates by {dev!r} (> {allowance!r})"
        )
    return 0


# --- parser --------------------------------------------------------------


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="path to a problem JSON document")
    group.add_argument("--builtin", help="built-in instance name")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")
    p.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get(THREADS_ENV, "1")),
        help=f"worker threads (default ${THREADS_ENV} or 1)",
    )
    p.add_argument("--output", help="write the document here instead of stdout")
    p.add_argument(
        "--format",
        choices=("csv", "structured"),
        default=None,
        help="output format (commands pick a sensible default)",
    )


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-10, help="objective tolerance, bits")
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--restarts", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdcomp",
        description=(
            "Rate-distortion for lossy function computing with decoder side "
            "information: solve, sweep, enumerate, cross-check, simulate."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a problem document")
    _add_instance_args(p)
    _add_common_args(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="one rate-distortion point")
    _add_instance_args(p)
    _add_common_args(p)
    _add_solver_args(p)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--distortion", type=float, help="distortion target")
    target.add_argument("--lambda", dest="lam", type=float, help="fixed multiplier")
    p.add_argument(
        "--mode",
        choices=("recoveries", "gamma-d", "gamma-eps"),
        default="recoveries",
        help="auxiliary alphabet for --lambda solves",
    )
    p.add_argument("--epsilon", type=float, default=None, help="threshold for gamma-eps")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("curve", help="sweep multipliers into a CSV curve")
    _add_instance_args(p)
    _add_common_args(p)
    _add_solver_args(p)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--lambda-grid", help="MIN:MAX:N[:log|:lin]")
    grid.add_argument("--points", type=int, help="auto log-spaced grid size")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("gamma", help="list the zero-distortion hyperedge family")
    _add_instance_args(p)
    _add_common_args(p)
    p.add_argument("--epsilon", type=float, default=None, help="threshold first")
    p.add_argument("--maximal", action="store_true", help="maximal members only")
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser(
        "example-card-game", help="reproduce the card-game closed form"
    )
    _add_common_args(p)
    _add_solver_args(p)
    p.add_argument("--check", action="store_true", help="exit nonzero if gap > 1e-3")
    p.add_argument("--grid-points", type=int, default=9)
    p.set_defaults(func=_cmd_example_card_game)

    p = sub.add_parser("oracle", help="brute-force check of a solved point")
    _add_instance_args(p)
    _add_common_args(p)
    _add_solver_args(p)
    p.add_argument("--point", help="point document from a previous solve")
    p.add_argument("--distortion", type=float, help="solve inline at this target")
    p.add_argument("--oracle-restarts", type=int, default=256)
    p.add_argument("--grid-resolution", type=float, default=1e-3)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("simulate", help="Monte-Carlo run of the coding protocol")
    _add_instance_args(p)
    _add_common_args(p)
    _add_solver_args(p)
    p.add_argument("--point", help="point document from a previous solve")
    p.add_argument("--distortion", type=float, help="solve inline at this target")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--trace", help="write a per-sample audit file here")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RdcompError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
