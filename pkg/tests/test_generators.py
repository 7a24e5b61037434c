import json

import pytest

from parallel_endo import linalg as la
from parallel_endo.endoalgebra import check_relations
from parallel_endo.generators import (LABEL_ALIASES, UsageError, check_signature, expected_holonomy_dim,
                                      find_gauge_change, generate, germ_pp_wave, normal_form_frames,
                                      normalize_label)
from parallel_endo.geometry import MetricGerm, parallel_defect

FAST = ["(1)", "(1C)", "(2)", "(2')", "(3)", "(3')"]


@pytest.mark.parametrize("alias,label", sorted(LABEL_ALIASES.items()))
def test_label_aliases(alias, label):
    assert normalize_label(alias) == label


def test_unknown_label():
    with pytest.raises(UsageError, match="unknown type"):
        normalize_label("(4)")


@pytest.mark.parametrize("label,p,q", [
    ("(1)", 2, 1), ("(1C)", 2, 2), ("(2)", 2, 2), ("(2)", 4, 0), ("(2')", 1, 1),
    ("(2C)", 2, 2), ("(3)", 4, 4), ("(3')", 2, 2), ("(3C)", 4, 4),
])
def test_allowed_signatures(label, p, q):
    check_signature(label, p, q)


@pytest.mark.parametrize("label,p,q", [
    ("(1)", 0, 0), ("(1C)", 2, 1), ("(2)", 3, 1), ("(2')", 2, 0), ("(2C)", 1, 1),
    ("(3)", 2, 2), ("(3')", 1, 1), ("(3C)", 2, 2),
])
def test_disallowed_signatures(label, p, q):
    with pytest.raises(UsageError, match="not allowed"):
        check_signature(label, p, q)


def test_generate_rejects_bad_signature_sum():
    with pytest.raises(UsageError, match="add up"):
        generate("(2)", d=6, signature=(2, 2))


@pytest.mark.parametrize("label", FAST)
def test_witnesses_are_parallel_and_satisfy_relations(label):
    gen = generate(label)
    germ = gen.germ
    assert gen.label == label
    for name in ("J", "L", "Jbar"):
        if name in gen.witnesses:
            assert parallel_defect(germ, gen.witnesses[name])[0], name
    if "U_jets" in gen.witnesses:
        assert parallel_defect(germ, gen.witnesses["U_jets"])[0]
    if label in ("(2)", "(2')"):
        key = "J" if label == "(2)" else "L"
        rels = check_relations(label, {key: gen.witnesses[key]}, germ.g0())
        assert all(ok for _, ok in rels)


def test_pp_wave_null_witness():
    gen = germ_pp_wave(2, seed=0)
    N = gen.witnesses["N"]
    assert la.is_zero(la.matmul(N, N))
    assert parallel_defect(gen.germ, N)[0]


@pytest.mark.parametrize("label,d,dim", [
    ("(1)", 4, 6), ("(1C)", 4, 2), ("(1C)", 6, 6), ("(2)", 4, 4), ("(2')", 4, 4),
    ("(2C)", 8, 8), ("(3)", 4, 3), ("(3')", 8, 10), ("(3C)", 8, 6),
])
def test_expected_holonomy_dims(label, d, dim):
    assert expected_holonomy_dim(label, d) == dim


@pytest.mark.parametrize("label", ["(1)", "(2)", "(3')"])
def test_generation_is_deterministic(label):
    a = json.dumps(generate(label, seed=3).to_json(), sort_keys=True)
    b = json.dumps(generate(label, seed=3).to_json(), sort_keys=True)
    assert a == b
    assert a != json.dumps(generate(label, seed=4).to_json(), sort_keys=True)


@pytest.mark.parametrize("label", ["(1)", "(1C)", "(2')"])
def test_germ_json_roundtrip(label):
    gen = generate(label, seed=1)
    back = MetricGerm.from_json(json.loads(json.dumps(gen.to_json())))
    assert back.d == gen.germ.d and tuple(back.signature) == tuple(gen.germ.signature)
    assert back.g == gen.germ.g


@pytest.mark.parametrize("label", ["(2')", "(3')"])
def test_alternate_gauges_are_equivalent(label):
    std = normal_form_frames(label, 1)
    alt = normal_form_frames(label, 1, alternate=True)
    P = find_gauge_change(std, alt)
    assert P is not None
    Pinv = la.inverse(P)
    for k, A in std.items():
        if k != "g":
            assert la.equal(la.matmul(la.matmul(Pinv, alt[k]), P), A)
