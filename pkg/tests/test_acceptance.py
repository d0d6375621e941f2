"""Acceptance suite: one test per criterion, each printing a PASS line.

Corpus sizes and tolerances are pinned; every agreement check is against the
naive enumeration oracle.  Variable counts are drawn per language so the
oracle windows stay enumerable (the brute window grows as ((q+1)n)^n).
"""

import json
import time

import pytest

from dtcsp import (
    MAX,
    Instance,
    RelationDef,
    VerdictClass,
    bounded_window,
    brute_solve,
    classify,
    decide_max_closed,
    is_horn,
    is_positive,
    modmax,
    parse_language,
    preserved_by,
    satisfies,
    solve_horn_csp,
    solve_mod_max,
)
from dtcsp.classify import default_halfwidth
from dtcsp.cli import main
from dtcsp.oracle import random_relation

from conftest import FIXTURES
from helpers import (
    capped_instance,
    equivalent_rewrites,
    max_closed_language,
    modular_language,
    random_horn_language,
)


def report(number, name, detail):
    print(f"[acceptance] criterion {number} ({name}): PASS: {detail}")


def test_criterion_1_horn_oracle_equivalence():
    started = time.perf_counter()
    languages = [random_horn_language(seed, nrels=3, arity_max=3, q_max=3)
                 for seed in range(20)]
    for lang in languages:
        assert all(is_horn(r) for r in lang.relations)
    checked = 0
    for li, lang in enumerate(languages):
        for k in range(50):
            inst = capped_instance(lang, li * 211 + k, nmax=8)
            horn = solve_horn_csp(lang, inst)
            oracle = brute_solve(lang, inst, bounded_window(lang, inst))
            assert horn.status == oracle.status, (li, k)
            if horn.sat:
                assert satisfies(lang, inst, horn.assignment)
            checked += 1
    elapsed = time.perf_counter() - started
    assert checked == 1000
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report(1, "horn oracle equivalence",
           f"1000/1000 agree over 20 Horn languages in {elapsed:.1f}s")


def test_criterion_2_bounded_window():
    from dtcsp import backtracking_solve
    from helpers import random_mixed_language
    checked = 0
    for li in range(50):
        lang = random_mixed_language(li, nrels=3, arity_max=3, q_max=3)
        for k in range(10):
            inst = capped_instance(lang, li * 307 + k, nmax=6, doubled=True)
            window = bounded_window(lang, inst)
            doubled = range(0, 2 * len(window))
            small = brute_solve(lang, inst, window)
            big = brute_solve(lang, inst, doubled)
            assert small.status == big.status, (li, k)
            search = backtracking_solve(lang, inst, window=window)
            assert search.status == big.status, (li, k)
            checked += 1
    assert checked == 500
    report(2, "bounded window completeness",
           "500/500 instances agree between (q+1)n and 2(q+1)n windows, "
           "search included")


def test_criterion_3_max_closed_ac_decisiveness():
    checked = 0
    for li in range(50):
        lang = max_closed_language(li)
        verdict = classify(lang)
        assert verdict.cls is VerdictClass.MAX_CLOSED, li
        for k in range(10):
            inst = capped_instance(lang, li * 401 + k, nmax=6)
            got = decide_max_closed(lang, inst)
            want = brute_solve(lang, inst, bounded_window(lang, inst))
            assert got.status == want.status, (li, k)
            assert not got.fallback, (li, k)
            if got.sat:
                assert satisfies(lang, inst, got.assignment)
            checked += 1
    assert checked == 500
    report(3, "max-closed AC decisiveness",
           "500/500 agree with the oracle, extremal pick never fell back")


def test_criterion_4_modular_pipeline():
    checked = 0
    for li in range(30):
        d = 2 if li % 2 == 0 else 3
        lang = modular_language(li, d)
        verdict = classify(lang)
        assert verdict.cls is VerdictClass.MODMAX_CLOSED and verdict.d == d, li
        for k in range(10):
            inst = capped_instance(lang, li * 503 + k, nmax=5, cmax=6)
            got = solve_mod_max(lang, inst, d)
            want = brute_solve(lang, inst, bounded_window(lang, inst))
            assert got.status == want.status, (li, k, d)
            if got.sat:
                assert satisfies(lang, inst, got.assignment)
            checked += 1
    assert checked == 300

    # the congruence system y - x in [1, 2] with x = y mod 2
    cong = parse_language((FIXTURES / "cong.dtl").read_text())
    inst = Instance(("x", "y"), (("Le2", ("x", "y")), ("Lt", ("x", "y")),
                                 ("Even6", ("x", "y"))))
    res = solve_mod_max(cong, inst, 2)
    assert res.sat and satisfies(cong, inst, res.assignment)
    report(4, "modular pipeline",
           "300/300 agree for d in {2,3}; congruence fixture SAT with "
           f"witness {res.assignment}")


def test_criterion_5_classifier_fixtures():
    f_lang = parse_language((FIXTURES / "f.dtl").read_text())
    assert classify(f_lang).cls is VerdictClass.HORN_TRACTABLE

    max_lang = parse_language((FIXTURES / "maxrel.dtl").read_text())
    assert classify(max_lang).cls is VerdictClass.MAX_CLOSED

    t2_lang = parse_language((FIXTURES / "t2.dtl").read_text())
    verdict = classify(t2_lang)
    assert verdict.cls is VerdictClass.MODMAX_CLOSED and verdict.d == 2
    res = preserved_by(t2_lang.relation("T2"), modmax(3))
    assert not res.preserved
    assert res.witness.revalidates(t2_lang.relation("T2"))

    hard = parse_language((FIXTURES / "dist15.dtl").read_text())
    verdict = classify(hard)
    assert verdict.cls is VerdictClass.NP_HARD
    assert verdict.witnesses
    for w in verdict.witnesses:
        assert w.revalidates(hard.relation(w.relation))
    report(5, "classifier fixtures",
           "HORN_TRACTABLE / MAX_CLOSED / MODMAX_CLOSED(2) / NP_HARD all exact")


def test_criterion_6_representation_independence():
    relations = []
    seed = 0
    while len(relations) < 20:
        rel = random_relation(2 + seed % 2, seed % 3, seed,
                              dialect="successor", name=f"R{seed}")
        seed += 1
        relations.append(rel)
    changes = 0
    for rel in relations:
        h, p = is_horn(rel), is_positive(rel)
        for k, rewrite in enumerate(equivalent_rewrites(rel.formula)):
            variant = RelationDef(f"{rel.name}v{k}", rel.arity, rewrite)
            if is_horn(variant) != h or is_positive(variant) != p:
                changes += 1
    assert changes == 0
    report(6, "representation independence",
           "20 relations x 5 rewrites: zero verdict changes")


def test_criterion_7_window_stability():
    checked = 0
    for seed in range(200):
        arity = 2 if seed % 3 else 3
        q = seed % 4
        rel = random_relation(arity, q, 9000 + seed, name=f"W{seed}")
        ops = [MAX] if arity == 3 else [MAX, modmax(2)]
        for op in ops:
            base = preserved_by(rel, op)
            wide = preserved_by(rel, op,
                                halfwidth=2 * default_halfwidth(rel, op))
            assert base.preserved == wide.preserved, (seed, op)
        checked += 1
    assert checked == 200
    report(7, "preservation window stability",
           "200/200 relations: verdicts at B and 2B identical")


def test_criterion_8_cli_conformance(capsys, tmp_path):
    def run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out

    # documented exit codes on the fixture suite
    assert run("classify", FIXTURES / "f.dtl")[0] == 0
    assert run("classify", FIXTURES / "dist15.dtl")[0] == 0
    assert run("classify", FIXTURES / "bad.dtl")[0] == 2
    assert run("classify", FIXTURES / "badarity.dtl")[0] == 2
    assert run("solve", FIXTURES / "f.dtl", FIXTURES / "chain.dti")[0] == 0
    assert run("solve", FIXTURES / "dist15.dtl", FIXTURES / "triangle.dti")[0] == 1
    assert run("solve", FIXTURES / "bad.dtl", FIXTURES / "chain.dti")[0] == 2
    assert run("solve", FIXTURES / "dist1.dtl", FIXTURES / "pair.dti",
               "--method", "horn")[0] == 2

    pairs = [("f.dtl", "chain.dti"), ("dist1.dtl", "pair.dti"),
             ("dist1.dtl", "triangle.dti"), ("dist15.dtl", "triangle.dti"),
             ("maxrel.dtl", "maxinst.dti"), ("t2.dtl", "t2.dti"),
             ("cong.dtl", "cong.dti")]
    for lang, inst in pairs:
        auto_code, auto_out = run("solve", FIXTURES / lang, FIXTURES / inst,
                                  "--json")
        brute_code, brute_out = run("solve", FIXTURES / lang, FIXTURES / inst,
                                    "--method", "brute", "--json")
        assert auto_code == brute_code, (lang, inst)
        auto_report = json.loads(auto_out)
        brute_report = json.loads(brute_out)
        assert auto_report["status"] == brute_report["status"]
        # JSON round trip
        for rep in (auto_report, brute_report):
            assert json.loads(json.dumps(rep)) == rep
        # SAT witnesses re-verify through check
        if auto_report["status"] == "SAT":
            w = tmp_path / f"{lang}.{inst}.json"
            w.write_text(json.dumps(auto_report["assignment"]))
            assert run("check", FIXTURES / lang, FIXTURES / inst, w)[0] == 0
    report(8, "CLI conformance",
           f"exit codes, JSON round trips and auto-vs-brute agree on "
           f"{len(pairs)} fixture pairs")
