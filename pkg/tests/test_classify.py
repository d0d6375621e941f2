import itertools

import pytest

from dtcsp import (
    MAX,
    MIN,
    BudgetExceeded,
    OperationSpec,
    OpKind,
    ProfileTag,
    RelationDef,
    VerdictClass,
    apply_operation,
    classify,
    difference_profile,
    is_horn,
    is_positive,
    materialize,
    modmax,
    modmin,
    parse_language,
    preserved_by,
)
from dtcsp.formula import Formula, Literal, Cmp, parse_expression

from helpers import equivalent_rewrites, random_mixed_language

F_LANG = parse_language(
    "rel F/4 := (x2 = x1 + 1 -> x4 = x3 + 1) & (x4 = x3 + 1 -> x2 = x1 + 1)")
T2_LANG = parse_language(
    "rel T2/3 := (x1 = x3 + 2 & x2 = x3) | (x1 = x3 + 2 & x2 = x3 + 2)"
    " | (x1 = x3 & x2 = x3 + 2)")
MAX_LANG = parse_language(
    "rel MaxLe0/3 := x3 <= x1 | x3 <= x2\n"
    "rel MaxLe1/3 := x3 <= x1 + 1 | x3 <= x2 + 1")
HARD_LANG = parse_language(
    "rel Neq/2 := x1 != x2\n"
    "rel D1/2 := x1 = x2 + 1 | x1 = x2 - 1\n"
    "rel D5/2 := x1 = x2 + 5 | x1 = x2 - 5")


def rel_of(text, name="R"):
    return parse_language(f"rel {name}/2 := {text}").relation(name)


# ---------------------------------------------------------------------------
# operations


def test_modmax_examples():
    op = modmax(2)
    assert apply_operation(op, 3, 5) == 5
    assert apply_operation(op, 3, 4) == 3
    assert apply_operation(op, 5, 3) == 5


def test_modmin_dual():
    op = modmin(2)
    assert apply_operation(op, 3, 5) == 3
    assert apply_operation(op, 4, 3) == 4
    assert apply_operation(op, -1, 3) == -1


def test_negative_arguments_use_nonnegative_residues():
    assert apply_operation(modmax(3), -1, 2) == 2  # -1 and 2 are both 2 mod 3
    assert apply_operation(modmax(3), -1, 1) == -1


def test_modmax_one_equals_max():
    one = modmax(1)
    for a, b in itertools.product(range(-4, 5), repeat=2):
        assert apply_operation(one, a, b) == apply_operation(MAX, a, b)
        assert apply_operation(modmin(1), a, b) == apply_operation(MIN, a, b)


def test_operation_spec_validation():
    with pytest.raises(ValueError):
        OperationSpec(OpKind.MODMAX, 0)
    with pytest.raises(ValueError):
        OperationSpec(OpKind.MAX, 2)


# ---------------------------------------------------------------------------
# preservation


def test_max_preserves_max_of_relation():
    for rel in MAX_LANG.relations:
        assert preserved_by(rel, MAX).preserved


def test_dist1_violates_max_with_genuine_witness():
    rel = HARD_LANG.relation("D1")
    res = preserved_by(rel, MAX)
    assert not res.preserved
    assert res.witness.revalidates(rel)
    # the canonical hand-checked pair is a violation too
    f = rel.formula
    assert f.evaluate((0, 1)) and f.evaluate((1, 0)) and not f.evaluate((1, 1))


def test_t2_modular_preservation():
    rel = T2_LANG.relation("T2")
    assert preserved_by(rel, modmax(2)).preserved
    res = preserved_by(rel, modmax(3))
    assert not res.preserved
    assert res.witness.revalidates(rel)
    assert not preserved_by(rel, MAX).preserved


def test_suc_preserved_by_everything_reasonable():
    rel = rel_of("x2 = x1 + 3", "S")
    for op in (MAX, MIN, modmax(2), modmin(2), modmax(3)):
        assert preserved_by(rel, op).preserved


def test_violation_witnesses_revalidate_on_random_corpus():
    for seed in range(30):
        lang = random_mixed_language(seed, nrels=1, arity_max=3, q_max=2)
        rel = lang.relations[0]
        for op in (MAX, MIN, modmax(2)):
            res = preserved_by(rel, op)
            if not res.preserved:
                assert res.witness.revalidates(rel)


def test_modmax1_matches_max_statuswise():
    for seed in range(30):
        lang = random_mixed_language(seed, nrels=1, arity_max=3, q_max=2)
        rel = lang.relations[0]
        assert (preserved_by(rel, MAX).preserved
                == preserved_by(rel, modmax(1)).preserved)
        assert (preserved_by(rel, MIN).preserved
                == preserved_by(rel, modmin(1)).preserved)


def test_window_stability_small():
    for seed in range(20):
        lang = random_mixed_language(seed, nrels=1, arity_max=2, q_max=3)
        rel = lang.relations[0]
        base = preserved_by(rel, MAX)
        wide = preserved_by(rel, MAX, halfwidth=2 * base.halfwidth)
        assert base.preserved == wide.preserved


def naive_preserved(rel, op, halfwidth):
    """Reference check: scan every pair of window tuples componentwise."""
    rows = materialize(rel, range(-halfwidth, halfwidth + 1)).tuples
    member = set(rows)
    for s in rows:
        for t in rows:
            image = tuple(apply_operation(op, a, b) for a, b in zip(s, t))
            if image not in member:
                return False
    return True


def test_preservation_matches_naive_pair_scan():
    # the image-set computation must agree with literal pair enumeration
    ops = [MAX, MIN, modmax(2), modmin(2), modmax(3)]
    for seed in range(40):
        lang = random_mixed_language(seed, nrels=1, arity_max=2, q_max=2)
        rel = lang.relations[0]
        for op in ops:
            B = 8
            got = preserved_by(rel, op, halfwidth=B).preserved
            assert got == naive_preserved(rel, op, B), (seed, op)
    for seed in range(6):
        lang = random_mixed_language(seed, nrels=1, arity_max=3, q_max=1)
        rel = lang.relations[0]
        if rel.arity != 3:
            continue
        for op in (MAX, modmax(2)):
            got = preserved_by(rel, op, halfwidth=4).preserved
            assert got == naive_preserved(rel, op, 4), (seed, op)


def test_preserved_by_budget():
    rel = T2_LANG.relation("T2")
    with pytest.raises(BudgetExceeded):
        preserved_by(rel, MAX, cell_budget=100)


def test_empty_relation_is_preserved():
    rel = rel_of("x1 < x1", "Empty")
    assert preserved_by(rel, MAX).preserved


# ---------------------------------------------------------------------------
# Horn / positive syntax


def test_is_horn_fixtures():
    assert is_horn(F_LANG.relation("F"))
    assert not is_horn(HARD_LANG.relation("D5"))
    assert is_horn(rel_of("x2 = x1 + 3", "S"))
    assert is_horn(HARD_LANG.relation("Neq"))
    assert not is_horn(MAX_LANG.relation("MaxLe0"))  # order dialect


def test_is_positive_fixtures():
    assert is_positive(HARD_LANG.relation("D5"))
    assert not is_positive(F_LANG.relation("F"))
    assert is_positive(rel_of("x1 <= x1", "Full"))
    assert not is_positive(HARD_LANG.relation("Neq"))


def test_representation_independence_sample():
    for seed in range(8):
        lang = random_mixed_language(seed, nrels=1, arity_max=3, q_max=2)
        base = lang.relations[0]
        if base.dialect.value != "successor":
            continue
        h, p = is_horn(base), is_positive(base)
        for k, rewrite in enumerate(equivalent_rewrites(base.formula)):
            variant = RelationDef(f"V{k}", base.arity, rewrite)
            assert is_horn(variant) == h
            assert is_positive(variant) == p


# ---------------------------------------------------------------------------
# difference profiles


def test_profile_dist5_finite():
    prof = difference_profile(HARD_LANG.relation("D5"), 0, 1)
    assert prof.tag is ProfileTag.FINITE
    assert set(prof.values) == {-5, 5}


def test_profile_strict_order_one_sided():
    prof = difference_profile(rel_of("x1 < x2", "Lt"), 0, 1)
    assert prof.tag is ProfileTag.ONE_SIDED_INFINITE


def test_profile_neq_cofinite():
    prof = difference_profile(HARD_LANG.relation("Neq"), 0, 1)
    assert prof.tag is ProfileTag.COFINITE
    assert 0 not in prof.values
    assert 1 in prof.values


def test_profile_offsets_compound_through_projection():
    lang = parse_language("rel Chain/3 := x1 = x3 + 3 & x3 = x2 + 3")
    prof = difference_profile(lang.relation("Chain"), 0, 1)
    assert prof.tag is ProfileTag.FINITE
    assert prof.values == (6,)


# ---------------------------------------------------------------------------
# classify


def test_classify_f_is_horn():
    assert classify(F_LANG).cls is VerdictClass.HORN_TRACTABLE


def test_classify_max_fixture():
    verdict = classify(MAX_LANG)
    assert verdict.cls is VerdictClass.MAX_CLOSED


def test_classify_t2_modmax2():
    verdict = classify(T2_LANG)
    assert verdict.cls is VerdictClass.MODMAX_CLOSED
    assert verdict.d == 2


def test_classify_distance_pair_hard_with_witnesses():
    verdict = classify(HARD_LANG)
    assert verdict.cls is VerdictClass.NP_HARD
    assert verdict.witnesses
    for w in verdict.witnesses:
        assert w.revalidates(HARD_LANG.relation(w.relation))


def test_classify_suc_exact_outcome():
    for p in range(-3, 4):
        sign = "+" if p >= 0 else "-"
        lang = parse_language(f"rel S/2 := x2 = x1 {sign} {abs(p)}")
        verdict = classify(lang)
        assert verdict.cls is VerdictClass.MODMAX_CLOSED
        assert verdict.d == 1


def test_classify_nonpositive_non_horn_hard():
    lang = parse_language(
        "rel Neq/2 := x1 != x2\n"
        "rel D2/2 := x1 = x2 + 2 | x1 = x2 - 2")
    verdict = classify(lang)
    assert verdict.cls is VerdictClass.NP_HARD
    for w in verdict.witnesses:
        assert w.revalidates(lang.relation(w.relation))


def test_classify_order_dialect_hard_pair():
    lang = parse_language(
        "rel Le/2 := x1 <= x2\n"
        "rel D1/2 := x1 = x2 + 1 | x1 = x2 - 1")
    verdict = classify(lang)
    assert verdict.cls is VerdictClass.NP_HARD
    assert len(verdict.witnesses) == 2


def test_classify_min_closed():
    lang = parse_language("rel MinGe/3 := x1 <= x3 | x2 <= x3")
    # z >= min(x,y): preserved by min but not by max
    verdict = classify(lang)
    assert verdict.cls is VerdictClass.MIN_CLOSED


def test_materialize_t2_matches_catalogue():
    rows = materialize(T2_LANG.relation("T2"), range(0, 4)).tuples
    assert set(rows) == {(2, 0, 0), (2, 2, 0), (0, 2, 0),
                         (3, 1, 1), (3, 3, 1), (1, 3, 1)}
