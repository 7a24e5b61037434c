"""Germ -> holonomy -> commutant -> classification -> structures -> identity suites."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Optional

from . import linalg as la
from .endoalgebra import (HPLUSH, UNCLASSIFIED_MSG, LiftError, classify, fingerprint, lift_structures,
                          parallel_tensor_catalog, radical, radical_one_sided, structure_manifolds)
from .endoalgebra import _same_span
from .geometry import MetricGerm, christoffel, curvature
from .holonomy import (ConsistencyError, commutant, decomposability_probe, fixed_space, holonomy_span,
                       n0_ideal)
from .verify import run_suite

FLAT_LABEL = "flat/decomposable - out of classification scope"

EXIT_OK = 0
EXIT_SKIPPED = 2
EXIT_UNCLASSIFIED = 3
EXIT_INVALID = 4


@dataclass
class ClassificationReport:
    config: dict
    label: Optional[str]
    holonomy: dict = field(default_factory=dict)
    dims: dict = field(default_factory=dict)
    fingerprint: Optional[dict] = None
    structures: Dict[str, object] = field(default_factory=dict)
    relations: list = field(default_factory=list)
    structure_sets: Optional[dict] = None
    catalog: list = field(default_factory=list)
    oracles: dict = field(default_factory=dict)
    verification: Optional[dict] = None
    notes: list = field(default_factory=list)
    certified: bool = True

    @property
    def classified(self) -> bool:
        return self.label is not None and self.label not in (FLAT_LABEL, UNCLASSIFIED_MSG)

    def all_ok(self) -> bool:
        if not self.classified:
            return False
        rel_ok = all(ok for _, ok in self.relations)
        cat_ok = all(c.get("ok", False) for c in self.catalog)
        ver_ok = self.verification is None or self.verification["all_ok"]
        orc_ok = all(v for v in self.oracles.values() if isinstance(v, bool))
        return rel_ok and cat_ok and ver_ok and orc_ok

    def exit_code(self) -> int:
        if not self.classified:
            return EXIT_UNCLASSIFIED
        if not self.all_ok():
            return 1
        skipped = self.verification and any(c["status"] == "skipped" for c in self.verification["checks"])
        if skipped or not self.certified:
            return EXIT_SKIPPED
        return EXIT_OK

    def to_json(self):
        return {
            "config": self.config, "label": self.label, "holonomy": self.holonomy, "dims": self.dims,
            "fingerprint": self.fingerprint,
            "structures": {k: la.matrix_to_json(v) for k, v in self.structures.items()},
            "relations": [{"relation": r, "ok": ok} for r, ok in self.relations],
            "structure_sets": self.structure_sets, "catalog": self.catalog, "oracles": self.oracles,
            "verification": self.verification, "notes": self.notes, "certified": self.certified,
        }


def classify_germ(germ: MetricGerm, seed: int = 0, deriv_order: Optional[int] = None, samples: int = 8,
                  run_verification: bool = True, curv=None) -> ClassificationReport:
    """Full pipeline on one germ. ``deriv_order`` defaults to K - 2 (the most the jets allow)."""
    K = germ.K
    top = K - 2 if deriv_order is None else min(deriv_order, K - 2)
    if top < 0:
        raise ValueError(f"jet order K={K} too low for curvature (need K >= 2)")
    config = {"seed": seed, "jet_order": K, "deriv_order": top, "d": germ.d,
              "signature": list(germ.signature), "kind": germ.kind, "samples": samples}
    if curv is None:
        curv = curvature(germ, top)
    h = holonomy_span(curv)
    hol = {"dim": h.dim, "added_per_order": h.added_per_order, "order_reached": h.order_reached,
           "orders_computed": h.orders_computed, "stabilized": h.stabilized}
    rep = ClassificationReport(config=config, label=None, holonomy=hol)
    if not h.stabilized:
        rep.certified = False
        rep.notes.append("holonomy span not certified stable: raise the jet order")
    if h.dim == 0:
        rep.label = FLAT_LABEL
        rep.notes.append("curvature vanishes to the computed order")
        return rep
    g0 = germ.g0()
    E0, isotropic, warning = fixed_space(h, g0)
    if not isotropic:
        rep.label = FLAT_LABEL
        rep.notes.append(warning)
        rep.dims["E0"] = len(E0)
        return rep
    e = commutant(h, g0)
    n_basis = radical(e)
    n_alt = radical_one_sided(e)
    rep.oracles["radical_trace_form_equals_one_sided"] = _same_span(n_basis, n_alt, germ.d)
    n0 = n0_ideal(e, E0)
    probe = decomposability_probe(e, random.Random(seed))
    rep.dims = {"h": h.dim, "E0": len(E0), "e": e.dim, "n": len(n_basis), "s": e.dim - len(n_basis),
                "n0": len(n0), "e_plus": len(e.self_adjoint_part()), "e_minus": len(e.skew_adjoint_part())}
    if probe["decomposable"]:
        rep.label = FLAT_LABEL
        rep.notes.append("self-adjoint element with two distinct irreducible factors: decomposable")
        return rep
    fp = fingerprint(e, n_basis)
    rep.fingerprint = fp.to_json()
    label = classify(fp)
    if label is None:
        rep.label = UNCLASSIFIED_MSG
        return rep
    if label == HPLUSH:
        raise ConsistencyError("a germ produced the HplusH commutant; this contradicts the Bianchi identity")
    rep.label = label
    try:
        st = lift_structures(e, n_basis, label)
    except LiftError as exc:
        rep.notes.append(f"structure lift failed: {exc}")
        rep.relations = [("structure lift", False)]
        return rep
    rep.structures = dict(st.mats)
    rep.relations = list(st.relations)
    if label not in ("(1)",):
        rep.structure_sets = structure_manifolds(st)
        if not rep.structure_sets["all_consistent"]:
            rep.relations.append(("structure set samples consistent", False))
    rep.catalog = parallel_tensor_catalog(e, n_basis, st, random.Random(seed))
    if run_verification:
        gam = christoffel(germ) if K >= 3 else None
        ver = run_suite(germ, curv, e, n_basis, E0, n0, st.mats, seed=seed, samples=samples, gam=gam)
        rep.verification = ver.to_json()
    return rep


def classify_span(span, g0, seed: int = 0) -> dict:
    """The linear-algebra path: commutant and type of a user-supplied span (may give HplusH)."""
    e = commutant(span, g0)
    n_basis = radical(e)
    out = {"e": e.dim, "n": len(n_basis)}
    fp = fingerprint(e, n_basis)
    out["fingerprint"] = fp.to_json()
    out["label"] = classify(fp) or UNCLASSIFIED_MSG
    return out


def run_generated(label: str, d: Optional[int] = None, signature=None, seed: int = 0, K: Optional[int] = None,
                  retries: int = 3, samples: int = 8):
    """Generate, classify and verify; resample seeds until the holonomy is generic.

    Returns (generated germ, report, log) where log lists every seed tried with its
    holonomy dimension and label.
    """
    from .generators import expected_holonomy_dim, generate

    log = []
    gen = rep = None
    for s in range(seed, seed + retries):
        gen = generate(label, d=d, signature=signature, seed=s, K=K)
        rep = classify_germ(gen.germ, seed=s, samples=samples)
        want = expected_holonomy_dim(gen.label, gen.germ.d)
        log.append({"seed": s, "holonomy_dim": rep.holonomy["dim"], "expected": want, "label": rep.label})
        if rep.holonomy["dim"] == want:
            break
    return gen, rep, log
