import itertools
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import strategies as st

from magmalab import fixtures as fx
from magmalab.models import Model, satisfies
from magmalab.terms import App, Operator, Var

VARIABLES = ("x", "y", "z", "u")


def terms(max_depth=6, names=VARIABLES):
    leaves = st.sampled_from(names).map(Var)
    if max_depth == 0:
        return leaves
    return st.one_of(
        leaves,
        st.builds(App, st.sampled_from(list(Operator)), terms(max_depth - 1, names), terms(max_depth - 1, names)),
    )


def random_model(rng, n):
    return Model.from_array(rng.integers(0, n, size=(3, n, n)))


@lru_cache(maxsize=None)
def all_models(n=2):
    """Every table triple of size n (4096 of them at n = 2)."""
    cells = 3 * n * n
    out = []
    for values in itertools.product(range(n), repeat=cells):
        out.append(Model.from_array(np.array(values).reshape(3, n, n)))
    return tuple(out)


@lru_cache(maxsize=None)
def oracle_masks(theory_name, n=2):
    """For every size-n model, the set of identities of the theory that hold."""
    theory = fx.theory(theory_name)
    return tuple(
        frozenset(i.name for i in theory if satisfies(m, i).holds) for m in all_models(n)
    )


def is_latin(table):
    n = len(table)
    full = set(range(n))
    return all(set(row) == full for row in table) and all(set(col) == full for col in np.asarray(table).T)


@pytest.fixture(scope="session")
def rect_loop():
    return fx.theory("RECT_LOOP")


@pytest.fixture(scope="session")
def rect_axioms():
    return fx.theory("RECT_AXIOMS")


@pytest.fixture(scope="session")
def krapez():
    return fx.theory("KRAPEZ")


# ------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, label = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[number] = (label, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, passed, seconds = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {label} ({seconds:.2f} s)")
