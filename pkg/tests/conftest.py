import functools

import pytest

from parallel_endo.endoalgebra import LABELS
from parallel_endo.geometry import curvature
from parallel_endo.holonomy import commutant, holonomy_span
from parallel_endo.pipeline import classify_germ, run_generated
from parallel_endo import generators as gn


class Entry:
    """One generated germ with its pipeline objects, computed once per session."""

    def __init__(self, gen, report, log):
        self.gen = gen
        self.report = report
        self.log = log
        self._e = None
        self._curv = None

    @property
    def germ(self):
        return self.gen.germ

    @property
    def curv(self):
        if self._curv is None:
            self._curv = curvature(self.germ, self.report.config["deriv_order"])
        return self._curv

    @property
    def e(self):
        if self._e is None:
            h = holonomy_span(self.curv)
            self._e = commutant(h, self.germ.g0())
        return self._e


DEFAULT_D = {"(1)": 3, "(1C)": 6, "(2)": 4, "(2')": 4, "(2C)": 8, "(3)": 4, "(3')": 4, "(3C)": 8}


def corpus_entry(label, d=None):
    return _corpus_entry(label, DEFAULT_D[label] if d is None else d)


@functools.lru_cache(maxsize=None)
def _corpus_entry(label, d):
    gen, rep, log = run_generated(label, d=d, seed=0, retries=3)
    return Entry(gen, rep, log)


@functools.lru_cache(maxsize=None)
def special_entry(name):
    if name == "pp_wave":
        gen = gn.germ_pp_wave(2, seed=0)
    elif name == "cahen_wallach":
        gen = gn.germ_pp_wave(2, seed=0, symmetric=True)
    elif name == "sphere":
        gen = gn.germ_sphere(3)
    elif name == "flat":
        gen = gn.germ_type1(3, 3, 0, seed=0, zero=True)
    elif name == "1C_d4":
        gen = gn.generate("(1C)", d=4, seed=0)
    else:
        raise KeyError(name)
    return Entry(gen, classify_germ(gen.germ), [])


@pytest.fixture(scope="session")
def corpus():
    return corpus_entry


@pytest.fixture(scope="session")
def special():
    return special_entry


@pytest.fixture(scope="session")
def all_labels():
    return list(LABELS)


# acceptance summary -----------------------------------------------------------------

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
