from __future__ import annotations

import random
from fractions import Fraction

import pytest

from geoscale.model import (Instance, make_simplex, objective_geometric,
                            objective_linear, random_polytope)
from geoscale.scaling import Variant

_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.failed:
        _criteria[crit] = "FAIL"
    else:
        _criteria.setdefault(crit, "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        label = marker.args[0]
        if hasattr(item, "callspec"):
            label = f"{label}[{item.callspec.id}]"
        rep.criterion = label


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: (int(s[1:].split("[")[0]), s)):
        terminalreporter.write_line(f"{name:<16} {_criteria[name]}")


def random_instance(seed: int, max_n: int = 8, max_m: int = 40,
                    c_bound: int = 50) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(1, max_n)
    m = rng.randint(1, min(max_m, 2 ** n))
    poly = random_polytope(n, m, seed)
    c = tuple(rng.randint(-c_bound, c_bound) for _ in range(n))
    return Instance(poly, c, rng.randrange(m))


@pytest.fixture
def s3_linear() -> Instance:
    return Instance(make_simplex(3), objective_linear(3), 0)


@pytest.fixture
def s6_pow2() -> Instance:
    return Instance(make_simplex(6), objective_geometric(6, 2), 0)


@pytest.fixture
def gap_instance() -> Instance:
    from geoscale.model import BitVertex, Polytope
    poly = Polytope(3, (BitVertex.from_str("000"), BitVertex.from_str("110")))
    return Instance(poly, (1, 0, 0), 0)


def reference_run(inst, mu0, alpha, variant, pick):
    """Literal-mode geometric scaling straight from the pseudocode, on
    bitstrings and Fractions.  ``pick`` chooses among feasible candidates."""
    vs = [str(v) for v in inst.vertices]
    c = inst.objective

    def val(x):
        return sum(ci for ci, ch in zip(c, x) if ch == "1")

    def rat(x, y):
        return Fraction(val(y) - val(x), sum(a != b for a, b in zip(x, y)))

    mu, cur, out = Fraction(mu0), vs[inst.start], []
    while True:
        others = [v for v in vs if v != cur]
        if variant is Variant.MRA:
            best = max((rat(cur, v) for v in others), default=None)
            x = min((v for v in others if rat(cur, v) == best), default=None)
            go = x is not None and not rat(cur, x) < mu
        else:
            feas = sorted(v for v in others if val(v) - val(cur) > mu * sum(a != b for a, b in zip(v, cur)))
            x = pick(feas, val) if feas else None
            go = x is not None
        if go:
            cur = x
            out.append(("A", cur, mu))
        else:
            out.append(("H", cur, mu))
            mu = mu / alpha
        if mu < Fraction(1, inst.n):
            return out
