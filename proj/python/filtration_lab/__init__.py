"""Exact filtration and martingale checks on finite event trees.

Rationals are accepted as Fraction, int or "p/q" strings and returned as
Fraction. Reports are plain dicts with rational entries left as strings.
"""

import json
from fractions import Fraction

from . import _core
from ._core import FiltrationLabError

__all__ = [
    "FiltrationLabError",
    "check_mrp",
    "conditional_expectation",
    "explain",
    "fuzz",
    "random_tree",
    "run_scenario",
    "solve_accessible_k",
    "solve_inaccessible_k",
    "version",
]


def _text(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def _row(xs):
    return [_text(x) for x in xs]


def _matrix(rows):
    return [[Fraction(x) for x in r] for r in rows]


def _scenario(s):
    return s if isinstance(s, str) else json.dumps(s)


def version():
    return _core.version()


def run_scenario(scenario, checks=()):
    return json.loads(_core.run_scenario(_scenario(scenario), list(checks)))


def check_mrp(scenario):
    return json.loads(_core.check_mrp(_scenario(scenario)))


def explain(name):
    return _core.explain(name)


def random_tree(seed, horizon=2, branching=3, denominator=6):
    return json.loads(_core.random_tree(seed, horizon, branching, denominator))


def solve_accessible_k(gamma, p):
    return _matrix(_core.solve_accessible_k([_row(r) for r in gamma], _row(p)))


def solve_inaccessible_k(gamma):
    return _matrix(_core.solve_inaccessible_k([_row(r) for r in gamma]))


def conditional_expectation(tree, t, values):
    """E[values | F_t] per leaf, leaves in depth-first order."""
    return [Fraction(x) for x in _core.conditional_expectation(_scenario(tree), t, _row(values))]


def fuzz(first_seed=0, count=10, horizon=2, branching=3, deficit=0, threads=1, inject_fault=False):
    return json.loads(_core.fuzz(first_seed, count, horizon, branching, deficit, threads, inject_fault))
