"""Scrip economy solvers: equilibria, money distributions, inference, simulation.

Populations are plain dicts matching the CLI config schema; they are serialized
to JSON at the boundary so both entry points share one format.
"""

import json

from ._core import (
    ScripError,
    crash_threshold as _crash_threshold,
    distribution as _distribution,
    equilibrium as _equilibrium,
    exact_marginal,
    minimal_explanation,
    simulate as _simulate,
)

__all__ = [
    "ScripError",
    "crash_threshold",
    "distribution",
    "equilibrium",
    "exact_marginal",
    "minimal_explanation",
    "simulate",
]


def equilibrium(population, m, a=0.0):
    return _equilibrium(json.dumps(population), m, a)


def distribution(population, thresholds, m):
    return _distribution(json.dumps(population), thresholds, m)


def simulate(population, thresholds, m, rounds, burn_in=0, seed=1729):
    return _simulate(json.dumps(population), thresholds, m, rounds, burn_in, seed)


def crash_threshold(population, a=0.0, width=0.05, m_cap=1024.0):
    return _crash_threshold(json.dumps(population), a, width, m_cap)
