import random

import pytest
from gmpy2 import mpq

from parallel_endo import linalg as la
from parallel_endo.geometry import curvature, ricci
from parallel_endo.holonomy import MatrixAlgebraWithInvolution
from parallel_endo.verify import (Check, check_pseudocommutation, check_ricci_operator, check_ricci_selfadjoint,
                                  ricci_is_parallel, run_suite)


def statuses(report):
    return {c["name"]: c["status"] for c in report.verification["checks"]}


@pytest.mark.parametrize("label", ["(1)", "(1C)", "(2)", "(2')", "(3)", "(3')"])
def test_suite_passes_on_corpus(corpus, label):
    rep = corpus(label).report
    assert rep.verification["all_ok"]
    assert not [c for c in rep.verification["checks"] if c["status"] == "skipped"]


@pytest.mark.parametrize("label", ["(3)", "(3')"])
def test_anticommuting_pair_forces_ricci_flat(corpus, label):
    entry = corpus(label)
    st = statuses(entry.report)
    assert st["ricci (ii)(c) anticommuting invertible pair => ric=0"] == "pass"
    assert la.is_zero(ricci(entry.germ, entry.curv))


def test_pp_wave_nilpotent_identities(special):
    st = statuses(special("pp_wave").report)
    assert st["ricci (i)(c) Im N in ker ric"] == "pass"
    assert st["ricci (ii)(b) Im N in ker ric"] == "pass"
    assert st["pseudocommutation E0=0 => UV=VU"] == "n/a"
    # random profile: Ricci is not parallel, so the operator check does not apply
    assert st["ricci operator semi-simple or 2-step nilpotent"] == "n/a"


def test_cahen_wallach_takes_nilpotent_branch(special):
    entry = special("cahen_wallach")
    c = next(c for c in entry.report.verification["checks"] if c["name"].startswith("ricci operator"))
    assert c["status"] == "pass" and "nilpotent" in c["note"]
    assert ricci_is_parallel(entry.germ)[0]


def test_sphere_takes_semisimple_branch(special):
    entry = special("sphere")
    chk = check_ricci_operator(entry.germ, ricci(entry.germ, entry.curv))
    assert chk.ok and "semi-simple" in chk.note


def test_complex_ricci_oracle(special):
    st = statuses(special("1C_d4").report)
    assert st["ricci (i)(b) complex Ricci matches holomorphic oracle"] == "pass"


def _sphere_with_fake_algebra(special, mats):
    entry = special("sphere")
    g0 = entry.germ.g0()
    e = MatrixAlgebraWithInvolution(d=3, basis=[la.identity(3)] + mats, g0=g0)
    return entry, e


def test_non_parallel_endomorphism_fails_with_witness(special):
    U = la.diag(1, -1, 0)
    V = la.as_matrix([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    entry, e = _sphere_with_fake_algebra(special, [U, V])
    checks = check_pseudocommutation(entry.curv, e, [], structures={"U": U, "V": V}, rng=random.Random(0))
    bad = [c for c in checks if c.ok is False]
    assert bad and all(c.witness for c in bad)
    ric = ricci(entry.germ, entry.curv)
    sa = check_ricci_selfadjoint(entry.curv, ric, e, structures={"U": U}, rng=random.Random(0))
    assert sa[0].status == "fail" and sa[0].witness["U"] == "U"


def test_full_suite_reports_failures(special):
    U = la.diag(1, -1, 0)
    entry, e = _sphere_with_fake_algebra(special, [U])
    rep = run_suite(entry.germ, entry.curv, e, [], [], structures={"U": U}, samples=2)
    assert not rep.ok() and rep.failed
    assert rep.to_json()["all_ok"] is False


def test_check_status_strings():
    assert Check("a", True).status == "pass"
    assert Check("a", False).status == "fail"
    assert Check("a", None).status == "skipped"
    assert Check("a", None, applicable=False).status == "n/a"


def test_ricci_operator_skipped_on_short_jets():
    from parallel_endo.generators import germ_type1
    germ = germ_type1(3, seed=0, K=2).germ
    chk = check_ricci_operator(germ, ricci(germ, curvature(germ, 0)))
    assert chk.status == "skipped"


def test_ricci_scale_convention(special):
    entry = special("sphere")
    ric = ricci(entry.germ, entry.curv)
    assert la.equal(ric, la.scale(mpq(-2), entry.germ.g0()))
