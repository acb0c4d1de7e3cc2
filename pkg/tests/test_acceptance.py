"""Acceptance criteria, one test each, each printing a PASS/FAIL line."""
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from rigidcert.exactpoly import SparsePoly, parse_poly, primitive
from rigidcert.polygon import support_of
from rigidcert.pipeline import PipelineConfig, run_pipeline
from rigidcert.solve import buchberger, face_verdict, is_unit_ideal

k = SparsePoly.var("k")
r13, r23 = SparsePoly.var("r13"), SparsePoly.var("r23")


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def data(run, stage):
    return run[2].load(stage)["data"]


def same_up_to_unit(p, q):
    return primitive(p) in (primitive(q), primitive(-q))


def face(cert, normal):
    return next(f for f in cert["face_verdicts"] if f["normal"] == list(normal))


def branches(cert, normal):
    return [b for b in cert["branch_verdicts"] if b["normal"] == list(normal)]


def test_criterion_01_cascade(run, capsys):
    rows = data(run, "oracle")["cascade"]
    limits = (1e-8, 1e-7, 1e-5, 1e-4)
    ok = all(float(r["best"]) < lim and r["converges"] for r, lim in zip(rows, limits))
    detail = ", ".join(f"k={r['k']} {r['best']} (< {lim:g}, converges={r['converges']})"
                       for r, lim in zip(rows, limits))
    report(capsys, 1, ok, detail)


def test_criterion_02_conservation(run, capsys):
    d, c = data(run, "derive"), data(run, "oracle")["conservation"]
    ok = (d["lie_energy_zero"] and d["lie_angular_momentum_zero"]
          and float(c["energy_drift"]) < 1e-9 and float(c["angular_momentum_drift"]) < 1e-9
          and c["T"] == 10.0 and c["tol"] == 1e-12)
    report(capsys, 2, ok, f"Lie derivatives exactly zero; drift H {c['energy_drift']}, "
                          f"Omega {c['angular_momentum_drift']} over T=10")


def test_criterion_03_quadratic_forms(run, capsys):
    e = data(run, "eliminate")
    store = run[2].store
    wfree = all(not {"w13", "w23"} & set(store.get(h).variables())
                for row in e["forms"] for h in row["coefficients"])
    ok = len(e["forms"]) == 4 and e["odd_velocity_terms"] == 0 and wfree
    report(capsys, 3, ok, f"4 forms in 1, w13^2, w13 w23, w23^2; odd-velocity terms {e['odd_velocity_terms']}")


def test_criterion_04_witnesses(run, capsys):
    table = data(run, "oracle")["witnesses"]
    expect = {"Lagrange": ("-3/2", "3"), "Euler-3": ("-5/2", "5/2"),
              "Euler-2": ("-5/4", "5"), "Euler-1": ("-5/4", "5")}
    ok = len(table) == 4
    worst = 0.0
    for w in table:
        ok &= (w["h"], w["omega_squared"]) == expect[w["label"]]
        ok &= all(Fraction(a) == 0 for a in w["a_i0_exact"])
        ok &= len(w["minor_scaled"]) == 5 and all(float(x) < 1e-6 for x in w["minor_scaled"])
        worst = max([worst] + [float(x) for x in w["minor_scaled"]])
    report(capsys, 4, ok, f"a_i0 exactly 0 at all four; largest scaled minor value {worst:.1e} (< 1e-6, 60 digits)")


def test_criterion_05_minkowski(run, capsys):
    p = data(run, "polygon")
    ok = p["vertex_sumset_points"] == 16854 and len(p["hull"]) == 14
    report(capsys, 5, ok, f"sumset of polygon vertex sets has {p['vertex_sumset_points']} points, "
                          f"hull {len(p['hull'])} vertices (full supports: {p['support_sumset_points']} "
                          "points, same hull)")


def test_criterion_06_normals(run, capsys):
    got = {tuple(n) for n in data(run, "polygon")["relevant_normals"]}
    want = {(2, -1), (1, 0), (3, 1), (1, 1), (1, 3), (0, 1), (-1, 2)}
    report(capsys, 6, got == want, f"relevant normals {sorted(got)}")


def test_criterion_07_face_3_1(run, minors, capsys):
    v = face_verdict((3, 1), minors)
    lin = 3 * r13 + r23 ** 3
    quad = 12636 * r13 ** 2 + 9828 * r13 * r23 ** 3 + 1915 * r23 ** 6
    printed = 12636 * r13 ** 3 + 9828 * r13 * r23 ** 3 + 1915 * r23 ** 6
    has_lin = any(same_up_to_unit(f, lin) for f in v.faces)
    has_quad = any(same_up_to_unit(f, quad) for f in v.faces)
    # the printed r13^3 form is not quasi-homogeneous for (3,1): weights 9, 6, 6
    printed_inhomogeneous = len({3 * a + b for a, b in support_of(printed)}) > 1
    ok = has_lin and has_quad and printed_inhomogeneous and is_unit_ideal(v.basis) and v.kind == "NoNonzeroSolution"
    report(capsys, 7, ok, "faces include 3 r13 + r23^3 and 12636 r13^2 + 9828 r13 r23^3 + 1915 r23^6 "
                          "(r13^3 as printed has mixed weight); basis {1}")


def test_criterion_08_branch_1_1(run, capsys):
    cert = run[1]
    f = face(cert, (1, 1))
    basis = [parse_poly(t) for t in f["face_basis"]]
    (b,) = branches(cert, (1, 1))
    tr = b["transcript"]
    h, om = SparsePoly.var("h"), SparsePoly.var("om")
    a4 = SparsePoly.var("a4")
    first = [parse_poly(t) for t in tr[0]["basis"]]
    second = [parse_poly(t) for t in tr[1]["basis"]]
    third = [parse_poly(t) for t in tr[2]["reduced"]]
    eq1 = 3 * a4 + 36 * om ** 2 - 8
    eq2 = 189 * a4 + 3438 * om ** 2 - 704
    terminal = [parse_poly(t) for e in tr[: b["order"]] for t in e["equations"]]
    names = sorted({n for p in terminal for n in p.variables() if n.startswith("a")},
                   key=lambda n: -int(n[1:]))
    ok = (basis == [k * (1 + k)] and f["roots"] == [["-1", 1]]
          and SparsePoly.var("a2") in first and any(same_up_to_unit(p, h + 1 - Fraction(3, 2) * om ** 2) for p in first)
          and SparsePoly.var("a3") in second
          and any(same_up_to_unit(p, eq1) for p in third) and any(same_up_to_unit(p, eq2) for p in third)
          and b["outcome"] in ("Inconsistent", "ParameterConstraintThenInconsistent")
          and is_unit_ideal(buchberger(terminal, names + ["h", "om"], order="lex")))
    report(capsys, 8, ok, f"basis k(1+k); a2 = 0, h = -1 + 3/2 om^2, a3 = 0; a4 order contains "
                          f"3a4+36om^2-8 and 189a4+3438om^2-704; terminal basis {{1}} reached at "
                          f"order {b['order']} (a6), a4 order alone is consistent")


@pytest.mark.xfail(strict=True, reason="the a4-order equations are consistent: a4 = 8/13, om^2 = 20/117, "
                                       "h = -29/39; inconsistency first appears with a6")
def test_branch_1_1_incompatible_at_a4_order(run):
    (b,) = branches(run[1], (1, 1))
    eqs = [parse_poly(t) for e in b["transcript"][:3] for t in e["equations"]]
    assert is_unit_ideal(buchberger(eqs, ["a4", "a3", "a2", "h", "om"], order="lex"))


def test_criterion_09_branch_0_1(run, capsys):
    cert = run[1]
    ok = True
    details = []
    for n in ((0, 1), (1, 0)):
        f = face(cert, n)
        ok &= [parse_poly(t) for t in f["face_basis"]] == [k ** 21 * (k - 1) ** 7 * (k + 1) ** 7]
        bs = branches(cert, n)
        ok &= sorted(b["root"] for b in bs) == ["-1", "1"]
        for b in bs:
            ok &= b["method"] == "newton-diagram" and b["outcome"] == "Inconsistent"
            ok &= sorted(b["diagram"]["slopes"]) == ["-1", "-1/2"]
            ok &= sorted(c["d"] for c in b["candidates"]) == ["1", "2"]
            ok &= all(c["inconsistent"] and c["basis"] == ["+1"] for c in b["candidates"])
        details.append(f"{n}: slopes {bs[0]['diagram']['slopes']}")
    flagged = any("slopes" in d["topic"].lower() and "-1/2" in d["computed"] for d in cert["discrepancies"])
    ok &= flagged
    report(capsys, 9, ok, "basis k^21 (k-1)^7 (k+1)^7; " + "; ".join(details)
                          + "; a s and a s^2 give basis {1}; text slope -2 flagged")


@pytest.mark.slow
def test_criterion_10_end_to_end(run, certificate_bytes, tmp_path, capsys):
    cfg, cert, _ = run
    path = cfg.checkpoint_dir / "certificate.json"
    # standalone verification in a separate process, from the certificate only
    lone = tmp_path / "alone" / "certificate.json"
    lone.parent.mkdir()
    lone.write_bytes(path.read_bytes())
    proc = subprocess.run([sys.executable, "-m", "rigidcert.cli", "verify", str(lone)],
                          capture_output=True, text=True)
    fresh = PipelineConfig(checkpoint_dir=tmp_path / "fresh")
    second = run_pipeline(fresh)
    identical = (fresh.checkpoint_dir / "certificate.json").read_bytes() == certificate_bytes
    timings = json.loads((fresh.checkpoint_dir / "run_info.json").read_text())["timings"]
    total = sum(timings.values())
    ok = (cert["verdict"] == "Finite" and second["verdict"] == "Finite" and proc.returncode == 0
          and "verified: Finite" in proc.stdout and identical and total < 4 * 3600)
    report(capsys, 10, ok, f"verdict {cert['verdict']}; standalone verify exit {proc.returncode}; "
                           f"fresh rerun byte-identical={identical} in {total:.0f} s")
