"""Checkpointed pipeline, certificate assembly and the standalone verifier.

Each stage writes ``<stage>.json`` into the checkpoint directory.  Large
polynomials live under ``polys/<sha256>.poly`` in canonical text and are
referenced by hash.  A stage file records the configuration it depends on
and the hashes of the stage files it consumed, so a resumed run reuses a
stage only when both match.
"""
from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import solve
from .dynamics import EQUAL_MASSES, conserved_quantities, derivative_cascade, derive_field, lie_derivative
from .elimination import (LinearVelocityTerm, QuadraticVelocityForm, build_g_system,
                          build_minor_system, decompose_quadratic)
from .exactpoly import RatExpr, SparsePoly, parse_poly
from .polygon import (LatticePolygon, convex_hull, edge_normals, minkowski_support, relevant,
                      support_of)
from .puiseux import analyze_branch
from .solve import buchberger, face_verdict, factor_univariate_rational, is_unit_ideal

log = logging.getLogger(__name__)

__all__ = [
    "PipelineConfig", "MissingCheckpoint", "StageFailure", "PolyStore", "Pipeline",
    "run_pipeline", "decide", "verify_certificate", "emit_figures", "STAGES",
]

VERSION = "1"
STAGES = ("derive", "eliminate", "minors", "polygon", "verdicts", "branches", "oracle")
EXCLUDED_FACE = ("VertexFace", "NoNonzeroSolution")
EXCLUDED_BRANCH = ("Inconsistent", "ParameterConstraintThenInconsistent")


class MissingCheckpoint(FileNotFoundError):
    pass


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause!r}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    checkpoint_dir: Path = Path("checkpoints")
    truncation: int = 8
    ceiling: int = 16
    edges: str = "seven"
    fifth_row: str = "published"
    limits: dict = field(default_factory=lambda: dict(solve.LIMITS))
    fd_thresholds: tuple = (1e-8, 1e-7, 1e-5, 1e-4)
    drift_tolerance: float = 1e-9
    witness_tolerance: float = 1e-6
    dps: int = 60

    def __post_init__(self):
        self.checkpoint_dir = Path(self.checkpoint_dir)
        if self.edges not in ("seven", "all"):
            raise ValueError("edges must be 'seven' or 'all'")
        if self.fifth_row not in ("published", "derived"):
            raise ValueError("fifth_row must be 'published' or 'derived'")
        if self.ceiling < self.truncation:
            self.ceiling = self.truncation
        nums = [self.truncation, self.ceiling, self.drift_tolerance, self.witness_tolerance,
                self.dps, *self.fd_thresholds, *self.limits.values()]
        if any(not v > 0 for v in nums):
            raise ValueError("all limits and tolerances must be positive")


# ---------------------------------------------------------------------------
# storage

def _frac(x) -> str:
    return str(Fraction(x))


def _dumps(obj) -> bytes:
    return (json.dumps(obj, indent=1, ensure_ascii=False) + "\n").encode()


class PolyStore:
    """Content-addressed canonical polynomial files."""

    def __init__(self, root: Path):
        self.root = Path(root) / "polys"
        self.root.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, SparsePoly] = {}

    def put(self, p: SparsePoly) -> str:
        text = p.to_text()
        h = hashlib.sha256(text.encode()).hexdigest()
        path = self.root / f"{h}.poly"
        if not path.exists():
            path.write_text(text + "\n")
        self._cache[h] = p
        return h

    def get(self, h: str) -> SparsePoly:
        if h not in self._cache:
            path = self.root / f"{h}.poly"
            if not path.exists():
                raise MissingCheckpoint(str(path))
            p = parse_poly(path.read_text())
            if p.digest() != h:
                raise ValueError(f"polynomial file {path} does not match its hash")
            self._cache[h] = p
        return self._cache[h]


def _poly_record(store: PolyStore, p: SparsePoly, **extra) -> dict:
    out = {"sha256": store.put(p), "terms": len(p)}
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# serialization of verdicts

def _texts(polys) -> list[str]:
    return [p.to_text() for p in polys]


def face_to_json(v) -> dict:
    return {
        "normal": list(v.normal),
        "kind": v.kind,
        "faces": _texts(v.faces),
        "vertex_faces": list(v.vertex_faces),
        "variables": list(v.variables),
        "normalized": _texts(v.normalized),
        "basis": _texts(v.basis),
        "face_basis": _texts(v.face_basis),
        "roots": [[_frac(r), m] for r, m in v.roots],
        "note": v.note,
    }


def branch_to_json(v) -> dict:
    out = {
        "normal": list(v.normal),
        "root": _frac(v.root),
        "outcome": v.outcome,
        "method": v.method,
        "order": v.order,
        "reason": v.reason,
        "truncation": v.truncation,
        "constraints": _texts(v.constraints),
        "witness": _texts(v.witness),
        "degrees": list(v.degrees),
    }
    if v.ift is not None:
        out["ift"] = {"root": _frac(v.ift.root), "faces": _texts(v.ift.faces),
                      "cofactors": _texts(v.ift.cofactors), "gcd": v.ift.P.to_text(),
                      "derivative_at_root": _frac(v.ift.derivative_at_root)}
    if v.transcript:
        out["transcript"] = [{"order": e["order"], "equations": _texts(e["equations"]),
                              "reduced": _texts(e["reduced"]), "basis": _texts(e["basis"])}
                             for e in v.transcript]
    if v.diagram is not None:
        d = v.diagram
        out["diagram"] = {"equation_index": v.degrees[0] if v.degrees else None,
                          "support": sorted([list(p) for p in d.support]),
                          "vertices": [list(p) for p in d.vertices],
                          "slopes": [_frac(s) for s in d.slopes],
                          "candidates": [_frac(c) for c in d.candidates],
                          "vertex_coefficients": _texts(d.vertex_coefficients)}
        out["candidates"] = [{"d": _frac(c["d"]), "equations": _texts(c["equations"]),
                              "basis": _texts(c["basis"]), "inconsistent": c["inconsistent"]}
                             for c in v.candidates]
    return out


# ---------------------------------------------------------------------------
# verdict logic shared by the pipeline and the verifier

def _required(normal) -> bool:
    return normal[0] + normal[1] >= 0


def decide(faces: list[dict], branches: list[dict]) -> tuple[str, list[dict]]:
    """Final verdict from per-case records.

    Normals with a + b < 0 need no branch analysis: the rays of a balanced
    tropical curve cannot all lie in that open half-plane."""
    lookup = {(tuple(b["normal"]), b["root"]): b for b in branches}
    unresolved = []
    for f in faces:
        n = tuple(f["normal"])
        if f["kind"] in EXCLUDED_FACE or not _required(n):
            continue
        if f["kind"] != "CandidateRoots":
            unresolved.append({"normal": list(n), "reason": f["kind"] + ": " + f["note"]})
            continue
        for root, _ in f["roots"]:
            b = lookup.get((n, root))
            if b is None:
                unresolved.append({"normal": list(n), "root": root, "reason": "no branch record"})
            elif b["outcome"] not in EXCLUDED_BRANCH:
                unresolved.append({"normal": list(n), "root": root, "reason": b["reason"]})
    return ("Finite" if not unresolved else "Unresolved"), unresolved


# ---------------------------------------------------------------------------
# the pipeline

@contextlib.contextmanager
def _limits(values: dict):
    saved = dict(solve.LIMITS)
    solve.LIMITS.update(values)
    try:
        yield
    finally:
        solve.LIMITS.clear()
        solve.LIMITS.update(saved)


class Pipeline:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.dir = cfg.checkpoint_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.store = PolyStore(self.dir)
        self.timings: dict[str, float] = {}
        self._loaded: dict[str, dict] = {}

    # -- stage bookkeeping

    def path(self, stage: str) -> Path:
        return self.dir / f"{stage}.json"

    def stage_hash(self, stage: str) -> str:
        return hashlib.sha256(self.path(stage).read_bytes()).hexdigest()

    def _stage_key(self, stage: str) -> dict:
        c = self.cfg
        own = {
            "derive": {"masses": [str(x) for x in (EQUAL_MASSES.m1, EQUAL_MASSES.m2, EQUAL_MASSES.m3)]},
            "eliminate": {"y2_form": "direct"},
            "minors": {"fifth_row": c.fifth_row},
            "polygon": {"edges": c.edges},
            "verdicts": {},
            "branches": {"truncation": c.truncation, "ceiling": c.ceiling},
            "oracle": {"fd_thresholds": list(c.fd_thresholds), "drift": c.drift_tolerance,
                       "witness": c.witness_tolerance, "dps": c.dps},
        }[stage]
        deps = {"derive": (), "eliminate": (), "minors": ("eliminate",),
                "polygon": ("minors",), "verdicts": ("minors", "polygon"),
                "branches": ("minors", "verdicts"), "oracle": ("derive", "eliminate", "minors")}[stage]
        return {"config": own, "inputs": {d: self.stage_hash(d) for d in deps}}

    def load(self, stage: str) -> dict:
        if stage not in self._loaded:
            p = self.path(stage)
            if not p.exists():
                raise MissingCheckpoint(f"no checkpoint for stage {stage} in {self.dir}")
            self._loaded[stage] = json.loads(p.read_text())
        return self._loaded[stage]

    def ensure(self, stage: str) -> dict:
        """Run ``stage`` (and what it depends on) unless a matching checkpoint exists."""
        for dep in {"minors": ("eliminate",), "polygon": ("minors",),
                    "verdicts": ("polygon",), "branches": ("verdicts",),
                    "oracle": ("derive", "minors")}.get(stage, ()):
            self.ensure(dep)
        key = self._stage_key(stage)
        p = self.path(stage)
        if p.exists():
            old = json.loads(p.read_text())
            if old.get("key") == key:
                self._loaded[stage] = old
                return old
            log.info("checkpoint for %s is stale, recomputing", stage)
        log.info("running stage %s", stage)
        t0 = time.perf_counter()
        try:
            with _limits(self.cfg.limits):
                data = getattr(self, f"_run_{stage}")()
        except Exception as exc:
            raise StageFailure(stage, exc) from exc
        self.timings[stage] = time.perf_counter() - t0
        record = {"stage": stage, "version": VERSION, "key": key, "data": data}
        p.write_bytes(_dumps(record))
        self._loaded[stage] = record
        return record

    # -- helpers

    def minors(self) -> list[SparsePoly]:
        return [self.store.get(m["sha256"]) for m in self.load("minors")["data"]["minors"]]

    def forms(self) -> list[list[SparsePoly]]:
        return [[self.store.get(h) for h in row["coefficients"]]
                for row in self.load("eliminate")["data"]["forms"]]

    # -- stages

    def _run_derive(self) -> dict:
        F = derive_field()
        fs = derivative_cascade(4, F)
        cons = conserved_quantities()
        dH = lie_derivative(cons.H, F)
        dO = lie_derivative(RatExpr(cons.Omega), F)
        return {
            "cascade": [{"name": f"f{k + 1}",
                         "numerator": _poly_record(self.store, f.num),
                         "denominator": _poly_record(self.store, f.den)}
                        for k, f in enumerate(fs)],
            "energy": {"numerator": _poly_record(self.store, cons.H.num),
                       "denominator": _poly_record(self.store, cons.H.den)},
            "angular_momentum": _poly_record(self.store, cons.Omega),
            "lie_energy_zero": dH.is_zero(),
            "lie_angular_momentum_zero": dO.is_zero(),
        }

    def _run_eliminate(self) -> dict:
        gs = build_g_system()
        forms, odd = [], 0
        for g in gs.g:
            try:
                qf = decompose_quadratic(g)
            except LinearVelocityTerm:
                odd += 1
                raise
            if qf.reassemble() != g:
                raise ArithmeticError("quadratic form does not reassemble to g")
            forms.append(qf)
        led = dict(gs.ledger)
        return {
            "g": [_poly_record(self.store, g, raw_terms=len(r)) for g, r in zip(gs.g, gs.raw)],
            "f3_coefficients": {"c0": _poly_record(self.store, gs.c0),
                                "c1": _poly_record(self.store, gs.c1)},
            "forms": [{"coefficients": [self.store.put(a) for a in qf.coeffs()],
                       "terms": [len(a) for a in qf.coeffs()]} for qf in forms],
            "odd_velocity_terms": odd,
            "ledger": led,
        }

    def _run_minors(self) -> dict:
        forms = self.forms()
        ms = build_minor_system([QuadraticVelocityForm(*row) for row in forms], self.cfg.fifth_row)
        minors = []
        for i, (m, rec) in enumerate(zip(ms.minors, ms.ledger["minor_strip"])):
            sup = support_of(m)
            minors.append(_poly_record(self.store, m, index=i + 1, support_points=len(sup),
                                       max_degree=rec["max_degree"], stripped=rec["factors"],
                                       content=rec["content"], monomial=rec["monomial"]))
        return {
            "fifth_row": ms.fifth_row,
            "G": _poly_record(self.store, ms.G, stripped=ms.ledger["G_strip"]["factors"]),
            "P": _poly_record(self.store, ms.P),
            "Q": _poly_record(self.store, ms.Q),
            "minors": minors,
        }

    def _run_polygon(self) -> dict:
        supports = [support_of(m) for m in self.minors()]
        hulls = [convex_hull(s) for s in supports]
        vsum, vhull = minkowski_support([h.vertices for h in hulls])
        fsum, fhull = minkowski_support(supports)
        if fhull != vhull:
            raise ArithmeticError("hull of the support sumset differs from the vertex sumset hull")
        normals = edge_normals(vhull)
        kept = relevant(normals, self.cfg.edges)
        return {
            "polygons": [{"support_points": len(s), "vertices": [list(v) for v in h.vertices]}
                         for s, h in zip(supports, hulls)],
            "vertex_sumset_points": len(vsum),
            "support_sumset_points": len(fsum),
            "hull": [list(v) for v in vhull.vertices],
            "edges": [{"edge": [list(e.edge[0]), list(e.edge[1])], "normal": list(e.normal)}
                      for e in normals],
            "relevance_filter": self.cfg.edges,
            "relevant_normals": [list(e.normal) for e in kept],
        }

    def _run_verdicts(self) -> dict:
        minors = self.minors()
        out = []
        for n in self.load("polygon")["data"]["relevant_normals"]:
            v = face_verdict(tuple(n), minors)
            rec = face_to_json(v)
            rec["requires_analysis"] = _required(n)
            out.append(rec)
        return {"faces": out}

    def _run_branches(self) -> dict:
        minors = self.minors()
        out = []
        for f in self.load("verdicts")["data"]["faces"]:
            if f["kind"] != "CandidateRoots" or not f["requires_analysis"]:
                continue
            for root, _ in f["roots"]:
                v = analyze_branch(tuple(f["normal"]), Fraction(root), minors,
                                   self.cfg.truncation, self.cfg.ceiling)
                out.append(branch_to_json(v))
        return {"branches": out}

    def _run_oracle(self) -> dict:
        from . import oracle
        c = self.cfg
        fs = [RatExpr(self.store.get(f["numerator"]["sha256"]), self.store.get(f["denominator"]["sha256"]))
              for f in self.load("derive")["data"]["cascade"]]
        start = oracle.generic_orbit_state()
        traj = oracle.integrate(start, 3.0, 1e-13, samples=6001)
        cascade = []
        for k in range(1, 5):
            sw = oracle.step_sweep(fs[k - 1], traj, k, (256, 128, 64, 32, 16, 8, 4, 2, 1))
            cascade.append({"k": k, "strides": sw.strides,
                            "deviations": [f"{d:.2e}" for d in sw.deviations],
                            "best": f"{sw.best:.2e}", "threshold": c.fd_thresholds[k - 1],
                            "converges": sw.converges(),
                            "passed": bool(sw.best < c.fd_thresholds[k - 1] and sw.converges())})
        long = oracle.integrate(start, 10.0, 1e-12, samples=2001)
        e, L = long.energies(), long.angular_momenta()
        drift = {"energy": float(abs(e - e[0]).max()), "angular_momentum": float(abs(L - L[0]).max())}
        conservation = {"T": 10.0, "tol": 1e-12,
                        "energy_drift": f"{drift['energy']:.1e}",
                        "angular_momentum_drift": f"{drift['angular_momentum']:.1e}",
                        "passed": bool(max(drift.values()) < c.drift_tolerance)}
        forms = self.forms()
        minors = self.minors()
        table = []
        for w in oracle.relative_equilibrium_witnesses(c.dps):
            exact = {"r13": w.r13, "r23": w.r23, "h": w.h}
            a0 = [oracle.exact_eval(row[0], exact, w.om2) for row in forms]
            point = w.assignment(c.dps)
            scaled = [oracle.scaled_value(m, point, c.dps) for m in minors]
            exact_minors = [oracle.exact_eval(m, exact, w.om2) for m in minors]
            row = w.as_json()
            row.update({
                "a_i0_exact": [str(x) for x in a0],
                "minor_scaled": [f"{float(x):.1e}" for x in scaled],
                "minor_exact_zero": [x == 0 for x in exact_minors],
                "passed": bool(all(x == 0 for x in a0)
                               and all(x < c.witness_tolerance for x in scaled)),
            })
            table.append(row)
        (self.dir / "witnesses.json").write_bytes(_dumps(table))
        return {"cascade": cascade, "conservation": conservation, "witnesses": table}

    # -- certificate

    def certificate(self) -> dict:
        d = {s: self.load(s)["data"] for s in STAGES}
        faces = d["verdicts"]["faces"]
        branches = d["branches"]["branches"]
        verdict, unresolved = decide(faces, branches)
        oracle_ok = (all(x["passed"] for x in d["oracle"]["cascade"])
                     and d["oracle"]["conservation"]["passed"]
                     and all(w["passed"] for w in d["oracle"]["witnesses"]))
        poly = d["polygon"]
        cert = {
            "version": VERSION,
            "config": {"truncation": self.cfg.truncation, "ceiling": self.cfg.ceiling,
                       "edges": self.cfg.edges, "fifth_row": self.cfg.fifth_row,
                       "limits": dict(sorted(self.cfg.limits.items()))},
            "stage_hashes": {s: self.stage_hash(s) for s in STAGES},
            "cascade": [{"name": f["name"], "numerator": f["numerator"]["sha256"],
                         "denominator": f["denominator"]["sha256"]} for f in d["derive"]["cascade"]],
            "conservation_exact": {"energy": d["derive"]["lie_energy_zero"],
                                   "angular_momentum": d["derive"]["lie_angular_momentum_zero"]},
            "g": d["eliminate"]["g"],
            "multiplier_ledger": d["eliminate"]["ledger"]["g_strip"],
            "elimination": {k: v for k, v in d["eliminate"]["ledger"].items() if k != "g_strip"},
            "quadratic_forms": d["eliminate"]["forms"],
            "odd_velocity_terms": d["eliminate"]["odd_velocity_terms"],
            "determinant": {k: d["minors"][k] for k in ("fifth_row", "G", "P", "Q")},
            "minors": d["minors"]["minors"],
            "polygon": {"vertex_sumset_points": poly["vertex_sumset_points"],
                        "support_sumset_points": poly["support_sumset_points"],
                        "polygon_vertices": [len(p["vertices"]) for p in poly["polygons"]],
                        "hull": poly["hull"], "edges": poly["edges"],
                        "relevance_filter": poly["relevance_filter"],
                        "relevant_normals": poly["relevant_normals"]},
            "face_verdicts": faces,
            "branch_verdicts": branches,
            "oracle": d["oracle"],
            "oracle_passed": oracle_ok,
            "verdict": verdict,
            "unresolved": unresolved,
            "discrepancies": discrepancy_notes(d),
        }
        return cert


def discrepancy_notes(d: dict) -> list[dict]:
    """Places where the published derivation differs from the computation."""
    notes = [
        {"topic": "velocity relations",
         "published": "r13 w13 = (x2+1/2)u2 + y2 v2, r23 w23 = (x2-1/2)u2 + y2 v2",
         "computed": "r13 w13 = (x2+1/2)u2 + y2(v2 + v1/2), r23 w23 = (x2-1/2)u2 + y2(v2 - v1/2)",
         "resolution": "the v1 terms follow from differentiating the squared distances; they are kept"},
        {"topic": "y2 squared",
         "published": "factor (r23 - r13 - 1)",
         "computed": d["eliminate"]["ledger"]["y2_squared"] + ", i.e. factor (r23 - r13 + 1)",
         "resolution": "sign typo; the computation uses r13^2 - (x2 + 1/2)^2 directly"},
        {"topic": "appended row sign",
         "published": "(0, P^2, 0, Q^2)",
         "computed": "P w13 + Q w23 = 0 implies P^2 w13^2 - Q^2 w23^2 = 0",
         "resolution": f"run used the {d['minors']['fifth_row']} sign; the published sign "
                       "reproduces the reported polygon data"},
        {"topic": "face system for normal (3,1)",
         "published": "12636 r13^3 + 9828 r13 r23^3 + 1915 r23^6",
         "computed": "12636 r13^2 + 9828 r13 r23^3 + 1915 r23^6",
         "resolution": "r13^3 is not quasi-homogeneous of weight 6 for (3,1); typo"},
        {"topic": "Minkowski sum point count",
         "published": "16854 points",
         "computed": f"{d['polygon']['vertex_sumset_points']} points in the sumset of the polygon "
                     f"vertex sets, {d['polygon']['support_sumset_points']} in the sumset of full "
                     "supports; both have the same 14-vertex hull",
         "resolution": "the count matches the vertex-set sumset"},
        {"topic": "Newton diagram slopes for normal (0,1)",
         "published": "text: slopes -1 and -2; figure: -1 and -1/2",
         "computed": _diagram_slopes(d),
         "resolution": "the figure is right; leading forms a s and a s^2 follow from -1 and -1/2"},
    ]
    b11 = [b for b in d["branches"]["branches"] if b["normal"] == [1, 1]]
    if b11:
        b = b11[0]
        notes.append({
            "topic": "branch (1,1) termination order",
            "published": "five equations at the a4 order, including 3a4+36om^2-8 and "
                         "189a4+3438om^2-704, are incompatible",
            "computed": f"outcome {b['outcome']} at order {b['order']}; constraints "
                        f"{b['constraints']}",
            "resolution": "the a4-order equations share the solution a4 = 8/13, om^2 = 20/117, "
                          "h = -29/39; the first inconsistency involves a6",
        })
    return notes


def _diagram_slopes(d: dict) -> str:
    for b in d["branches"]["branches"]:
        if "diagram" in b:
            return "slopes " + ", ".join(b["diagram"]["slopes"])
    return "no diagram recorded"


def run_pipeline(cfg: PipelineConfig, stages=STAGES, progress: Callable | None = None) -> dict:
    """Run the requested stages with resume and return the certificate.

    On failure the returned certificate is partial and names the stage."""
    pipe = Pipeline(cfg)
    try:
        for s in stages:
            pipe.ensure(s)
            if progress:
                progress(s)
        cert = pipe.certificate()
    except StageFailure as exc:
        cert = {"version": VERSION, "verdict": "Unresolved", "failed_stage": exc.stage,
                "error": repr(exc.cause),
                "completed": [s for s in STAGES if pipe.path(s).exists()]}
    (cfg.checkpoint_dir / "certificate.json").write_bytes(_dumps(cert))
    run_info = {"finished": time.strftime("%Y-%m-%dT%H:%M:%S"), "timings": pipe.timings}
    (cfg.checkpoint_dir / "run_info.json").write_bytes(_dumps(run_info))
    return cert


# ---------------------------------------------------------------------------
# verification from the certificate alone

def _parse_all(texts):
    return [parse_poly(t) for t in texts]


def _check_face(f: dict) -> list[str]:
    errs = []
    n = tuple(f["normal"])
    if f["kind"] == "VertexFace":
        if not any(len(parse_poly(f["faces"][i])) == 1 for i in f["vertex_faces"]):
            errs.append(f"{n}: no recorded face is a single term")
        return errs
    if f["kind"] not in ("NoNonzeroSolution", "CandidateRoots"):
        return errs
    basis = buchberger(_parse_all(f["normalized"]), f["variables"], order="lex")
    if _texts(basis) != f["basis"]:
        errs.append(f"{n}: recomputed basis differs")
    if f["kind"] == "NoNonzeroSolution" and not is_unit_ideal(basis):
        errs.append(f"{n}: basis is not {{1}}")
    if f["kind"] == "CandidateRoots":
        uni = [g for g in basis if set(g.variables()) <= {"k"} and not g.is_constant()]
        rr = factor_univariate_rational(uni[0], "k") if uni else None
        if rr is None or rr.flagged or [[_frac(r), m] for r, m in rr.nonzero()] != f["roots"]:
            errs.append(f"{n}: recorded roots do not follow from the basis")
    return errs


def _check_branch(b: dict) -> list[str]:
    errs = []
    tag = f"{tuple(b['normal'])} root {b['root']}"
    if b["outcome"] not in EXCLUDED_BRANCH:
        return errs
    if b["method"] == "series":
        ift = b["ift"]
        faces, cof = _parse_all(ift["faces"]), _parse_all(ift["cofactors"])
        P = parse_poly(ift["gcd"])
        combo = sum((c * f for c, f in zip(cof, faces)), SparsePoly())
        root = Fraction(b["root"])
        if combo != P or P.subs({"k": root}).constant_value() != 0 \
                or P.diff("k").subs({"k": root}).constant_value() == 0:
            errs.append(f"{tag}: implicit function certificate does not check")
        eqs = [p for e in b["transcript"][: b["order"]] for p in _parse_all(e["equations"])]
        names = sorted({n for p in eqs for n in p.variables() if n.startswith("a")},
                       key=lambda n: -int(n[1:]))
        params = [n for n in ("h", "om") if any(n in p.variables() for p in eqs)]
        if not is_unit_ideal(buchberger(eqs, names + params, order="lex")):
            errs.append(f"{tag}: terminal equations are consistent")
    elif b["method"] == "newton-diagram":
        diag = b["diagram"]
        verts = [tuple(v) for v in diag["vertices"]]
        slopes = [_frac(Fraction(q[1] - p[1], q[0] - p[0])) for p, q in zip(verts, verts[1:])]
        if slopes != diag["slopes"]:
            errs.append(f"{tag}: slopes do not match the diagram vertices")
        if sorted(_frac(-1 / Fraction(s)) for s in slopes) != sorted(diag["candidates"]):
            errs.append(f"{tag}: candidate exponents do not match the slopes")
        for c in b["candidates"]:
            eqs = _parse_all(c["equations"])
            names = ["k"] + [n for n in ("h", "om") if any(n in p.variables() for p in eqs)]
            if not is_unit_ideal(buchberger(eqs, names, order="lex")):
                errs.append(f"{tag}: leading form for d = {c['d']} is solvable")
    return errs


def verify_certificate(cert: dict, recheck: bool = True) -> tuple[bool, list[str]]:
    """Re-derive the verdict from the certificate's own records.

    The shallow part checks the implication from recorded verdicts; with
    ``recheck`` the small polynomial evidence is recomputed as well."""
    errs = []
    if "failed_stage" in cert:
        return False, [f"certificate is partial: stage {cert['failed_stage']} failed"]
    hull = [tuple(v) for v in cert["polygon"]["hull"]]
    if list(convex_hull(hull).vertices) != hull:
        errs.append("recorded hull is not a convex polygon in canonical order")
    normals = [tuple(e.normal) for e in edge_normals(LatticePolygon(tuple(hull)))]
    recorded = {tuple(f["normal"]) for f in cert["face_verdicts"]}
    for n in normals:
        if _required(n) and n not in recorded:
            errs.append(f"normal {n} with a+b >= 0 has no face record")
    verdict, unresolved = decide(cert["face_verdicts"], cert["branch_verdicts"])
    if verdict != cert["verdict"]:
        errs.append(f"recorded verdict {cert['verdict']} but records imply {verdict}")
    if unresolved != cert["unresolved"]:
        errs.append("unresolved list differs from the records")
    if recheck:
        for f in cert["face_verdicts"]:
            errs += _check_face(f)
        for b in cert["branch_verdicts"]:
            errs += _check_branch(b)
    ok = not errs and verdict == "Finite"
    return ok, errs


# ---------------------------------------------------------------------------
# figure data

def emit_figures(stage: str, out: Path, checkpoint_dir: Path) -> list[Path]:
    out = Path(out)
    ck = Path(checkpoint_dir)
    if stage == "minkowski":
        p = ck / "polygon.json"
        if not p.exists():
            raise MissingCheckpoint(str(p))
        data = json.loads(p.read_text())["data"]
        verts = [[tuple(v) for v in poly["vertices"]] for poly in data["polygons"]]
        pts, hull = minkowski_support(verts)
        out.mkdir(parents=True, exist_ok=True)
        files = [out / "minkowski_points.csv", out / "minkowski_hull.csv"]
        _write_csv(files[0], ("m", "n"), sorted(pts))
        _write_csv(files[1], ("m", "n", "normal_a", "normal_b"),
                   [(*e["edge"][0], *e["normal"]) for e in data["edges"]])
        return files
    if stage == "newton-diagram":
        p = ck / "branches.json"
        if not p.exists():
            raise MissingCheckpoint(str(p))
        diags = [b for b in json.loads(p.read_text())["data"]["branches"] if "diagram" in b]
        if not diags:
            raise MissingCheckpoint("no Newton diagram recorded in the branch stage")
        d = diags[0]["diagram"]
        out.mkdir(parents=True, exist_ok=True)
        files = [out / "newton_support.csv", out / "newton_segments.csv"]
        _write_csv(files[0], ("s_exp", "u_exp"), d["support"])
        v = d["vertices"]
        _write_csv(files[1], ("s0", "u0", "s1", "u1", "slope"),
                   [(*a, *b, s) for a, b, s in zip(v, v[1:], d["slopes"])])
        return files
    raise ValueError(f"unknown figure stage {stage!r}")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
