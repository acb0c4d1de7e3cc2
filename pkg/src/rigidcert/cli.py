"""Command line front end.

Every stage subcommand runs its prerequisites from checkpoints, prints a
short JSON summary and leaves the full record in the checkpoint directory.
``certify`` runs everything and exits 0 only for a Finite verdict.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import solve
from .pipeline import (STAGES, MissingCheckpoint, Pipeline, PipelineConfig, StageFailure,
                       emit_figures, run_pipeline, verify_certificate)


def _limits(text: str) -> dict:
    """Parse ``max_basis=500,max_pairs=200000``."""
    out = dict(solve.LIMITS)
    if not text:
        return out
    for item in text.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in out:
            raise argparse.ArgumentTypeError(f"unknown limit {key!r}; known: {sorted(out)}")
        try:
            out[key] = int(val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"limit {key} needs an integer") from None
        if out[key] <= 0:
            raise argparse.ArgumentTypeError(f"limit {key} must be positive")
    return out


def _config(args) -> PipelineConfig:
    return PipelineConfig(checkpoint_dir=args.checkpoint_dir, truncation=args.truncation,
                          ceiling=max(args.ceiling, args.truncation), edges=args.edges,
                          fifth_row=args.fifth_row, limits=args.limits)


def _summary(stage: str, data: dict) -> dict:
    if stage == "derive":
        return {"cascade_terms": [f["numerator"]["terms"] for f in data["cascade"]],
                "lie_energy_zero": data["lie_energy_zero"],
                "lie_angular_momentum_zero": data["lie_angular_momentum_zero"]}
    if stage == "eliminate":
        return {"g_terms": [g["terms"] for g in data["g"]],
                "odd_velocity_terms": data["odd_velocity_terms"]}
    if stage == "minors":
        return {"fifth_row": data["fifth_row"], "G_terms": data["G"]["terms"],
                "minors": [{k: m[k] for k in ("sha256", "terms", "support_points", "max_degree")}
                           for m in data["minors"]]}
    if stage == "polygon":
        return {k: data[k] for k in ("vertex_sumset_points", "support_sumset_points",
                                     "hull", "relevant_normals")}
    if stage == "verdicts":
        return [{"normal": f["normal"], "kind": f["kind"], "roots": f["roots"],
                 "face_basis": f["face_basis"]} for f in data["faces"]]
    if stage == "branches":
        return [{k: b[k] for k in ("normal", "root", "outcome", "order", "constraints", "reason")}
                for b in data["branches"]]
    if stage == "oracle":
        return {"cascade": [{k: c[k] for k in ("k", "best", "converges", "passed")}
                            for c in data["cascade"]],
                "conservation": data["conservation"],
                "witnesses": [{k: w[k] for k in ("label", "h", "omega_squared", "passed")}
                              for w in data["witnesses"]]}
    return data


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--checkpoint-dir", type=Path, default=Path("checkpoints"))
    common.add_argument("--truncation", type=int, default=8,
                        help="initial series truncation order for branch analysis")
    common.add_argument("--ceiling", type=int, default=16,
                        help="largest truncation order tried before giving up")
    common.add_argument("--edges", choices=("seven", "all"), default="seven",
                        help="keep normals with a+b >= 0 or every hull edge")
    common.add_argument("--fifth-row", choices=("published", "derived"), default="published",
                        help="sign convention of the appended determinant row")
    common.add_argument("--limits", type=_limits, default=dict(solve.LIMITS),
                        help="comma separated key=value, e.g. max_basis=500,max_pairs=200000")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rigidcert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        sub.add_parser(stage, parents=[common], help=f"run the {stage} stage")
    sub.add_parser("certify", parents=[common], help="run all stages and write certificate.json")
    v = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    v.add_argument("certificate", type=Path, nargs="?")
    v.add_argument("--shallow", action="store_true", help="check the verdict implication only")
    e = sub.add_parser("emit-fig", parents=[common], help="write CSV figure data")
    e.add_argument("figure", choices=("minkowski", "newton-diagram"))
    e.add_argument("--out", type=Path, default=Path("figures"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command in STAGES:
            pipe = Pipeline(_config(args))
            rec = pipe.ensure(args.command)
            print(json.dumps(_summary(args.command, rec["data"]), indent=1))
            return 0
        if args.command == "certify":
            cert = run_pipeline(_config(args))
            print(json.dumps({"verdict": cert["verdict"], "unresolved": cert.get("unresolved", []),
                              "failed_stage": cert.get("failed_stage")}, indent=1))
            return 0 if cert["verdict"] == "Finite" else 1
        if args.command == "verify":
            path = args.certificate or args.checkpoint_dir / "certificate.json"
            if not path.exists():
                raise MissingCheckpoint(str(path))
            ok, errs = verify_certificate(json.loads(path.read_text()), recheck=not args.shallow)
            for err in errs:
                print("error:", err)
            print("verified: Finite" if ok else "not verified")
            return 0 if ok else 1
        if args.command == "emit-fig":
            for f in emit_figures(args.figure, args.out, args.checkpoint_dir):
                print(f)
            return 0
    except MissingCheckpoint as exc:
        print(f"missing checkpoint: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
