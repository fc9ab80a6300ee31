"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line.  Run
``python3 tests/test_acceptance.py`` for just those lines, or
``pytest tests/test_acceptance.py -v -s``.
"""

import contextlib
from fractions import Fraction as F
import io
from pathlib import Path
import sys
import time

sys.path.insert(0, str(Path(__file__).parent))

from fractal_martin import suites  # noqa: E402
from fractal_martin.adjacency import audit_transitivity, check_B2, ds_type_check  # noqa: E402
from fractal_martin.boundary import homeomorphism_diagnostic, parse_pairs  # noqa: E402
from fractal_martin.chain import MassDistribution, occupancy_report  # noqa: E402
from fractal_martin.cli import main  # noqa: E402
from fractal_martin.config import load  # noqa: E402
from fractal_martin.words import EMPTY, enumerate_upto  # noqa: E402


def chain(name):
    return load(name).chain()


def c1():
    ch = chain("gasket-2d")
    t0 = time.perf_counter()
    words = enumerate_upto(8, 3)
    bad = [w for w in words if ch.green(EMPTY, w) != ch.mass(w)]
    forward = ch.green_from(EMPTY, 8)
    bad += [w for w in words if forward.get(w) != ch.mass(w)]
    dt = time.perf_counter() - t0
    deepest = sum(1 for w in words if len(w) == 8)
    return not bad and dt < 10, f"{len(words)} words with |w| <= 8 ({deepest} at depth 8), {len(bad)} mismatches, {dt:.2f}s"


def c2():
    t0 = time.perf_counter()
    runs = [
        ("gasket-2d", 6),
        ("gasket-2d:uniform", 6),
        ("carpet-extended", 5),
    ]
    results = [(n, suites.factorization(chain(n), d)) for n, d in runs]
    dt = time.perf_counter() - t0
    ok = all(r["pass"] for _, r in results) and dt < 30
    detail = ", ".join(f"{n} depth {d}: {r['checked']} checks" for (n, d), (_, r) in zip(runs, results))
    return ok, f"{detail}; {dt:.1f}s"


def c3():
    ch = chain("gasket-2d")
    others = [MassDistribution.uniform(3), MassDistribution([F(3, 5), F(1, 5), F(1, 5)])]
    r = suites.q_invariance(ch, 6, others=others)
    return r["pass"] and not r.get("skipped") and len(r["distributions"]) == 3, f"{r['checked']} entries under {r.get('distributions')}"


def c4():
    r = suites.theorem_bridge(chain("gasket-2d"), 6)
    return r["pass"] and not r.get("skipped"), f"{r['checked']} pairs including the diagonal"


def c5():
    r = suites.harmonic(chain("gasket-2d"), 6, n_points=10)
    return r["pass"] and len(r["test_points"]) == 10, f"{r['checked']} checks, test points {' '.join(r['test_points'])}"


def c6():
    rs = [suites.metric_axioms(chain(n), 6, triple_len=3) for n in ("gasket-2d", "gasket-2d:uniform")]
    ok = all(r["pass"] and r["triple_length"] == 3 and r["separation_length"] == 6 for r in rs)
    return ok, f"D=6, triples of length <= 3, separation to length 6; {[r['checked'] for r in rs]} checks"


def c7():
    g = load("gasket-2d")
    gs = g.space()
    trans = all(not audit_transitivity(n, gs) for n in range(7))
    b2 = check_B2(8, gs, g.masses)["pass"]
    carpet = load("carpet")
    bad = audit_transitivity(2, carpet.space())
    with contextlib.redirect_stdout(io.StringIO()):
        code = main(["audit", "carpet", "--check", "transitivity", "--depth", "2"])
    ext = load("carpet-extended").space()
    ext_ok = all(not audit_transitivity(n, ext) for n in range(4))
    max_r = max(len(c) for n in range(4) for c in ext.level(n).classes)
    ok = trans and b2 and len(bad) >= 1 and code == 1 and ext_ok and max_r <= 4
    return ok, (
        f"gasket transitive to 6: {trans}, (B2) to 8: {b2}; bare carpet depth 2: {len(bad)} violations, "
        f"exit {code}; extended carpet clean to 3: {ext_ok}, max R = {max_r}"
    )


def c8():
    hom = ds_type_check(5, chain("gasket-2d:uniform"))
    w = chain("gasket-2d")
    infs = [ds_type_check(n, w)["inf_probability"] for n in range(3, 9)]
    dec = all(b < a for a, b in zip(infs, infs[1:]))
    ok = hom["pass"] and hom["inf_probability"] == F(1, 6) and dec
    return ok, f"homogeneous depth 5: {hom['pass']}, inf {hom['inf_probability']}; weighted inf 3..8: {[str(x) for x in infs]}"


def c9():
    ch = chain("gasket-2d")
    t0 = time.perf_counter()
    rep = occupancy_report(ch, 0, 3, 100000)
    dt = time.perf_counter() - t0
    again = occupancy_report(ch, 0, 3, 100000)
    worst = max(abs(r["z"]) for r in rep["rows"])
    ok = not rep["flagged"] and again == rep and dt < 5
    return ok, f"27 words, max |z| = {worst:.2f}, deterministic: {again == rep}, {dt:.2f}s"


def c10():
    ch = chain("gasket-2d")
    pairs = parse_pairs([["1(2)", "2(1)"], ["(1)", "(2)"], ["31(2)", "32(1)"], ["(12)", "(13)"]], 3)
    rep = homeomorphism_diagnostic(ch, pairs, (4, 6, 8))
    glued, apart = rep["pairs"][:2]
    bound = F(3, 4)
    ok = (
        glued["n0"] == 2
        and glued["addresses_coincide"]
        and glued["address_distance"] == 0
        and glued["rho_decreasing"]
        and all(F(x) >= bound for _, x in apart["rho_exact"])
        and rep["verdicts_agree"]
    )
    rho = ", ".join(f"{x:.3g}" for _, x in glued["rho_by_depth"])
    far = ", ".join(f"{x:.4f}" for _, x in apart["rho_by_depth"])
    return ok, f"(1(2), 2(1)): n0 = {glued['n0']}, rho {rho}; ((1), (2)): rho {far} >= 3/4; verdicts agree: {rep['verdicts_agree']}"


CRITERIA = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10]


def _check(n, capsys=None):
    ok, detail = CRITERIA[n - 1]()
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def test_criterion_1_green_identity(capsys):
    _check(1, capsys)


def test_criterion_2_factorization(capsys):
    _check(2, capsys)


def test_criterion_3_q_invariance(capsys):
    _check(3, capsys)


def test_criterion_4_kernel_bridge(capsys):
    _check(4, capsys)


def test_criterion_5_harmonicity(capsys):
    _check(5, capsys)


def test_criterion_6_metric(capsys):
    _check(6, capsys)


def test_criterion_7_structure_audits(capsys):
    _check(7, capsys)


def test_criterion_8_ds_type(capsys):
    _check(8, capsys)


def test_criterion_9_monte_carlo(capsys):
    _check(9, capsys)


def test_criterion_10_boundary(capsys):
    _check(10, capsys)


if __name__ == "__main__":
    failed = 0
    for i in range(1, 11):
        try:
            _check(i)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
