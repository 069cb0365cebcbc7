"""Acceptance criteria 1-10 at exact tolerance; prints one PASS/FAIL line per criterion.

Run directly (python tests/test_acceptance.py) for the harness output, or through pytest,
where each criterion is split into named sub-checks and the summary is shown at the end.
"""
import functools
import random
import sys
import time

import pytest

from gmlie.checks import TARGETS, f2_theorem, symbolic_checks
from gmlie.frobenius import bridge_checks
from gmlie.gaussmanin import connection_matrix, is_flat
from gmlie.geometry import get_geometry
from gmlie.mhspoly import Polytope2D, stable_ranks
from gmlie.qmrings import commutator_table, derive, level_one_ring, level_ring, verify_ring
from gmlie.qseries import TruncatedSeries, compose, form_ABC, nth_root, revert
from gmlie.report import VerificationReport
from gmlie.vfsolver import EnhancedSpace, bracket_table, jacobi_defects

TITLES = {
    1: "Ramanujan relations on q-expansions to order 30",
    2: "level 1*, 2, 3 differential rings on q-expansions to order 30",
    3: "sl2 derivation triples from commutator tables",
    4: "elliptic family: gauge, modular field, gauge fields, brackets, sl2",
    5: "local P2: connection matrix, modular field, brackets, sl2",
    6: "local F2: unique solutions, twelve-line system, brackets, semidirect classification",
    7: "level-2 ring relations and tau_2-independence along the F2 fields",
    8: "mixed-Hodge ranks from the polygons",
    9: "q-expansion bridges to order 20",
    10: "property suites",
}
_RESULTS = {}


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


@functools.lru_cache(maxsize=None)
def _symbolic(name):
    return {c.check_id: c for c in symbolic_checks(get_geometry(name))}


@functools.lru_cache(maxsize=None)
def _space(name):
    return EnhancedSpace(get_geometry(name))


def _all_ok(checks):
    bad = [f"{c.check_id}: {c.witness}" for c in checks if not c.ok]
    return not bad, "; ".join(bad)


def _pick(name, prefix):
    return [c for cid, c in _symbolic(name).items() if cid.startswith(prefix)]


# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def criterion(n):
    """[(label, ok, detail)] for criterion n."""
    return tuple(_CRITERIA[n]())


def c1():
    res, dt = _timed(lambda: verify_ring("1", 30))
    return [("relations", *_all_ok(res)), ("runtime < 5 s", dt < 5, f"{dt:.2f} s")]


def c2():
    out = []
    t = time.perf_counter()
    for N in ("1*", "2", "3"):
        out.append((f"level {N}", *_all_ok(verify_ring(N, 30))))
    dt = time.perf_counter() - t
    C = form_ABC("2", 4).C
    out.append(("level 2 over Q(sqrt 2)", C.field() == 2, f"field {C.field()}"))
    out.append(("runtime < 30 s", dt < 30, f"{dt:.2f} s"))
    return out


def c3():
    one = commutator_table(level_one_ring(), ["W", "dtau", "delta"], 24)
    three = commutator_table(level_ring("3"), ["H", "dtau", "F"], 24)
    want_one = {("W", "dtau"): {"dtau": 2}, ("W", "delta"): {"delta": -2}, ("dtau", "delta"): {"W": 1}}
    want_three = {("H", "dtau"): {"dtau": 2}, ("H", "F"): {"F": -2}, ("dtau", "F"): {"H": 1}}
    return [("E2, E4, E6 triple", one == want_one, str(one)), ("level 3 triple", three == want_three, str(three))]


def c4():
    name = "elliptic-1star"
    return [("gauge", *_all_ok(_pick(name, "gauge."))),
            ("modular field, unique", *_all_ok(_pick(name, "modular."))),
            ("gauge fields", *_all_ok(_pick(name, "lie."))),
            ("brackets", *_all_ok(_pick(name, "bracket."))),
            ("sl2", *_all_ok(_pick(name, "algebra.")))]


def c5():
    name = "local-p2"
    s = _symbolic(name)
    return [("closed-form connection matrix", *_all_ok([s["connection.closed_form"]])),
            ("Yukawa coupling entry", *_all_ok([s["connection.yukawa"]])),
            ("modular field, unique", *_all_ok(_pick(name, "modular."))),
            ("brackets", *_all_ok(_pick(name, "bracket."))),
            ("sl2", *_all_ok(_pick(name, "algebra.")))]


def c6():
    name = "local-f2"
    lines = _pick(name, "system.")
    suspects = [c for c in lines if c.flagged]
    others = [c for c in lines if not c.flagged]
    ok_lines = all(c.ok for c in others) and len(suspects) <= 2 and all(c.witness for c in suspects)
    detail = "; ".join(f"{c.check_id} differs" for c in others if not c.ok)
    agree = sum(c.ok for c in lines)
    return [("R1/R2 solved uniquely", *_all_ok(_pick(name, "modular."))),
            ("twelve-line system", ok_lines, f"{agree} of {len(lines)} lines agree; {detail}"),
            ("brackets", *_all_ok(_pick(name, "bracket."))),
            ("semidirect classification", *_all_ok(_pick(name, "algebra.")))]


def c7():
    res = f2_theorem(_space("local-f2"), TARGETS["local-f2"])
    valid = [c for c in res if c.check_id.startswith("theorem.u_candidate.") and c.ok]
    ring = [c for c in res if c.check_id.startswith("theorem.ring.")]
    indep = [c for c in res if c.check_id.startswith("theorem.R2_independent.")]
    return [("a denominator candidate validates", bool(valid), ", ".join(c.check_id for c in valid)),
            ("ring relations along R1", bool(ring) and all(c.ok for c in ring), _all_ok(ring)[1]),
            ("u, A^2, E independent of tau_2", len(indep) == 3 and all(c.ok for c in indep), _all_ok(indep)[1])]


def c8():
    (p2, f2), dt = _timed(lambda: (stable_ranks(Polytope2D(get_geometry("local-p2").polytope)),
                                   stable_ranks(Polytope2D(get_geometry("local-f2").polytope))))
    return [("P2", (p2.total, p2.weight[3], p2.hodge[3], p2.hodge[2]) == (3, 2, 1, 2), str(p2.weight)),
            ("F2", (f2.total, f2.weight[3], f2.weight[5], f2.hodge[3], f2.hodge[2]) == (4, 2, 3, 1, 3),
             str(f2.weight)),
            ("runtime < 60 s", dt < 60, f"{dt:.2f} s")]


def c9():
    t = time.perf_counter()
    ell = {c.check_id: c for c in bridge_checks(get_geometry("elliptic-1star"), 20)}
    p2 = {c.check_id: c for c in bridge_checks(get_geometry("local-p2"), 20)}
    dt = time.perf_counter() - t
    return [("elliptic s22^4 = E4", *_all_ok([ell["bridge.E4"]])),
            ("elliptic E = E2", *_all_ok([ell["bridge.E2"]])),
            ("elliptic unused component", *_all_ok([ell["bridge.unused"]])),
            ("P2 hauptmodul", *_all_ok([p2["bridge.hauptmodul"]])),
            ("P2 sixth power", *_all_ok([p2["bridge.A6"]])),
            ("P2 E", *_all_ok([p2["bridge.E"]])),
            ("runtime < 2 min", dt < 120, f"{dt:.2f} s")]


def _random_element(rng, pres):
    el = pres.element(0)
    for _ in range(3):
        term = pres.element(rng.randint(-9, 9))
        for g, _ in pres.generators:
            term = term * pres.gen(g) ** rng.randint(0, 2)
        el = el + term
    return el


def c10():
    rng = random.Random(0)
    rings = [(level_one_ring(), ("dtau", "delta", "W"))] + [(level_ring(N), ("dtau", "H", "F")) for N in ("1*", "2", "3")]
    cases = bad = 0
    while cases < 500:
        pres, names = rings[cases % len(rings)]
        f, g = _random_element(rng, pres), _random_element(rng, pres)
        for d in names:
            cases += 1
            bad += derive(f * g, d) != derive(f, d) * g + f * derive(g, d)
    out = [("Leibniz, 500+ cases", bad == 0, f"{bad} failures in {cases}")]

    anti = jac = 0
    for name in ("elliptic-1star", "local-p2", "local-f2"):
        fields = _space(name).all_fields()
        for i, (_, a) in enumerate(fields):
            for _, b in fields[i:]:
                anti += not (a.bracket(b) + b.bracket(a)).is_zero()
        jac += len(jacobi_defects(fields))
        bracket_table(fields)
    out.append(("bracket antisymmetry and Jacobi", anti == 0 and jac == 0, f"{anti} antisymmetry, {jac} Jacobi"))
    out.append(("F2 connection flat", is_flat(connection_matrix(get_geometry("local-f2"))), ""))

    trips = 0
    for _ in range(40):
        f = TruncatedSeries.from_list([1] + [rng.randint(-9, 9) for _ in range(9)], 10)
        n = rng.randint(2, 6)
        trips += not (nth_root(f, n) ** n).agrees_with(f, 10)
        trips += not (f * f.inverse()).agrees_with(TruncatedSeries.constant(1, 10), 10)
        h = TruncatedSeries({1: 1, **{k: rng.randint(-5, 5) for k in range(2, 9)}}, 9)
        trips += not compose(h, revert(h)).agrees_with(TruncatedSeries.monomial(1, 1, 9), 9)
    out.append(("series root and inversion round trips", trips == 0, f"{trips} failures"))

    def report():
        rep = VerificationReport("elliptic-1star", {"order": 20, "seed": 0})
        rep.extend(symbolic_checks(get_geometry("elliptic-1star")))
        return rep.to_text() + rep.to_json()

    out.append(("report reproducible", report() == report(), ""))
    return out


_CRITERIA = {1: c1, 2: c2, 3: c3, 4: c4, 5: c5, 6: c6, 7: c7, 8: c8, 9: c9, 10: c10}


def status_line(n):
    subs = criterion(n)
    ok = all(s[1] for s in subs)
    failed = "; ".join(f"{label}: {detail}" for label, good, detail in subs if not good)
    return f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {TITLES[n]}" + ("" if ok else f"  [{failed}]")


def summary_lines():
    return [status_line(n) for n in sorted(_RESULTS)]


SUBCHECKS = [(1, "relations"), (1, "runtime < 5 s"),
             (2, "level 1*"), (2, "level 2"), (2, "level 3"), (2, "level 2 over Q(sqrt 2)"), (2, "runtime < 30 s"),
             (3, "E2, E4, E6 triple"), (3, "level 3 triple"),
             (4, "gauge"), (4, "modular field, unique"), (4, "gauge fields"), (4, "brackets"), (4, "sl2"),
             (5, "closed-form connection matrix"), (5, "Yukawa coupling entry"), (5, "modular field, unique"),
             (5, "brackets"), (5, "sl2"),
             (6, "R1/R2 solved uniquely"), (6, "twelve-line system"), (6, "brackets"),
             (6, "semidirect classification"),
             (7, "a denominator candidate validates"), (7, "ring relations along R1"),
             (7, "u, A^2, E independent of tau_2"),
             (8, "P2"), (8, "F2"), (8, "runtime < 60 s"),
             (9, "elliptic s22^4 = E4"), (9, "elliptic E = E2"), (9, "elliptic unused component"),
             (9, "P2 hauptmodul"), (9, "P2 sixth power"), (9, "P2 E"), (9, "runtime < 2 min"),
             (10, "Leibniz, 500+ cases"), (10, "bracket antisymmetry and Jacobi"), (10, "F2 connection flat"),
             (10, "series root and inversion round trips"), (10, "report reproducible")]


@pytest.mark.parametrize("n,label", SUBCHECKS, ids=[f"c{n}-{label}" for n, label in SUBCHECKS])
def test_criterion(n, label):
    subs = {s[0]: s for s in criterion(n)}
    _RESULTS[n] = True
    assert label in subs, f"sub-check {label!r} not produced"
    _, ok, detail = subs[label]
    print(status_line(n))
    assert ok, detail


def test_subchecks_cover_every_produced_result():
    for n in _CRITERIA:
        assert {s[0] for s in criterion(n)} == {label for m, label in SUBCHECKS if m == n}


if __name__ == "__main__":
    lines = [status_line(n) for n in sorted(_CRITERIA)]
    print("\n".join(lines))
    sys.exit(0 if all(" PASS " in line for line in lines) else 1)
