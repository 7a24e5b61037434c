import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo import linalg as la
from parallel_endo.endoalgebra import (FINGERPRINTS, HPLUSH, LABELS, LiftError, StructureSet, check_relations,
                                       classify, fingerprint, lift_structures, minimal_polynomial_lemma,
                                       normalize_root, radical, radical_one_sided, structure_manifolds)
from parallel_endo.endoalgebra import _same_span
from parallel_endo.generators import hh_negative_control, normal_form_frames
from parallel_endo.holonomy import MatrixAlgebraWithInvolution
from parallel_endo.pipeline import classify_span
from parallel_endo.tables import INSTANCES, generated_algebra


def frames_algebra(label, p, q):
    fr = normal_form_frames(label, p, q)
    mats = {k: v for k, v in fr.items() if k != "g"}
    return fr["g"], mats, generated_algebra(len(fr["g"]), list(mats.values()), fr["g"])


def unipotent(d, rng, shears=None):
    """Product of elementary shears I + c E_ij with small c (a mild rational basis change)."""
    P = la.identity(d)
    for _ in range(shears or d):
        i, j = rng.sample(range(d), 2)
        c = mpq(rng.choice([-2, -1, 1, 2]))
        for r in range(d):
            P[r][j] += c * P[r][i]
    return P


@pytest.mark.parametrize("label", LABELS)
def test_normal_form_algebra_classifies(label):
    p, q = INSTANCES[label][0]
    _, _, e = frames_algebra(label, p, q)
    assert e.is_product_closed() and e.is_sigma_stable()
    n = radical(e)
    assert n == []
    assert classify(fingerprint(e, n)) == label


def test_fingerprints_are_distinct():
    assert len(set(FINGERPRINTS.values())) == len(FINGERPRINTS) == 9


def test_radical_of_null_rotation_algebra():
    # e = span(I, N) with N = e_v (x) e_u^flat on (u, v, x): N^2 = 0 and N* = N
    g0 = la.as_matrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    N = la.zeros(3)
    N[1][0] = mpq(1)
    e = MatrixAlgebraWithInvolution(d=3, basis=[la.identity(3), N], g0=g0)
    n = radical(e)
    assert len(n) == 1 and la.equal(n[0], N)
    assert classify(fingerprint(e, n)) == "(1)"


@pytest.mark.parametrize("label", ["(2)", "(2')", "(3)", "(1C)"])
def test_radical_trace_form_matches_one_sided_with_nilpotents(label):
    # semi-simple normal form tensored with the dual numbers: A + eps A, eps^2 = 0
    p, q = INSTANCES[label][0]
    g0, mats, e = frames_algebra(label, p, q)
    d = len(g0)
    Z = la.zeros(d)
    g2 = la.block([[Z, g0], [g0, Z]])
    eps = la.block([[Z, Z], [la.identity(d), Z]])
    lift = lambda A: la.block_diag(A, A)
    big = generated_algebra(2 * d, [lift(A) for A in mats.values()] + [eps], g2)
    n = radical(big)
    assert len(n) == e.dim
    assert _same_span(n, radical_one_sided(big), 2 * d)
    assert classify(fingerprint(big, n)) == label


def test_hplush_negative_control():
    span, g0 = hh_negative_control(1)
    out = classify_span(span, g0)
    assert out["e"] == 8 and out["n"] == 0
    assert out["label"] == HPLUSH


@pytest.mark.parametrize("label", LABELS)
@given(seed=st.integers(0, 10_000))
@settings(max_examples=4, deadline=None)
def test_fingerprint_is_basis_independent(label, seed):
    p, q = INSTANCES[label][0]
    g0, mats, _ = frames_algebra(label, p, q)
    d = len(g0)
    P = unipotent(d, random.Random(seed))
    Pinv = la.inverse(P)
    g1 = la.matmul(la.matmul(la.transpose(P), g0), P)
    conj = [la.matmul(la.matmul(Pinv, A), P) for A in mats.values()]
    e = generated_algebra(d, conj, g1)
    assert classify(fingerprint(e, radical(e))) == label


@pytest.mark.parametrize("label", [l for l in LABELS if l != "(1)"])
def test_lift_recovers_structures_on_conjugated_normal_forms(label):
    p, q = INSTANCES[label][0]
    g0, mats, _ = frames_algebra(label, p, q)
    d = len(g0)
    P = unipotent(d, random.Random(7))
    Pinv = la.inverse(P)
    g1 = la.matmul(la.matmul(la.transpose(P), g0), P)
    e = generated_algebra(d, [la.matmul(la.matmul(Pinv, A), P) for A in mats.values()], g1)
    st_ = lift_structures(e, [], label)
    assert st_.all_ok() and st_.relations
    for M in st_.mats.values():
        assert e.contains(M)


def test_relations_detect_a_wrong_structure():
    fr = normal_form_frames("(2)", 1, 0)
    bad = {"J": la.scale(2, fr["J"])}
    rels = dict(check_relations("(2)", bad, fr["g"]))
    assert rels["J^2 = -Id"] is False


def test_normalize_root_through_the_radical():
    J = la.J_std(2)
    A = la.as_matrix([[0, 1], [0, 0]])
    N = la.block_diag(A, A)
    assert la.is_zero(la.commutator(N, J))
    # -X^2 = 9 Id - 6 JN, a square scalar modulo a nilpotent
    X = la.add(la.scale(3, J), N)
    U = normalize_root(X, la.identity(4, mpq(3)), -1)
    assert la.equal(la.matmul(U, U), la.scale(-1, la.identity(4)))
    assert la.is_zero(la.commutator(U, J))


def test_normalize_root_rejects_non_scalar_square():
    with pytest.raises(LiftError):
        normalize_root(la.diag(1, 2), la.identity(2), 1)


@pytest.mark.parametrize("label", ["(1C)", "(2)", "(2')", "(2C)", "(3)", "(3')", "(3C)"])
def test_structure_manifold_samples(label):
    p, q = INSTANCES[label][0]
    _, mats, _ = frames_algebra(label, p, q)
    out = structure_manifolds(StructureSet(label=label, mats=mats))
    assert out["all_consistent"] and out["samples"]


def test_quaternionic_sphere_points():
    _, mats, _ = frames_algebra("(3)", 1, 0)
    out = structure_manifolds(StructureSet(label="(3)", mats=mats))
    on_sphere = [s for s in out["samples"] if s["norm"] == "1"]
    assert on_sphere and all(s["square_is_minus_id"] for s in on_sphere)
    assert not [s for s in out["samples"] if s["norm"] != "1" and s["square_is_minus_id"]]


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_minimal_polynomial_lemma(seed):
    rng = random.Random(seed)
    # U semi-simple with an irreducible quadratic factor, N nilpotent commuting with U
    J = la.J_std(2)
    U = la.add(la.identity(4, mpq(rng.randint(-2, 2))), la.scale(rng.randint(1, 3), J))
    A = la.as_matrix([[0, 1], [0, 0]])
    N = la.scale(rng.randint(-3, 3), la.block_diag(A, A))
    assert la.is_zero(la.commutator(U, N))
    assert minimal_polynomial_lemma(U, N)
