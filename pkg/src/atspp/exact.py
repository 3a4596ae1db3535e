"""Exact and brute-force oracles anchoring the verification suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .instance import Cut, DirectedMetric


@dataclass
class ExactResult:
    cost: float
    path: list[int]
    states_expanded: int


def held_karp(inst: DirectedMetric) -> ExactResult:
    """Minimum-cost Hamiltonian s-t path by subset dynamic programming.

    States are (visited interior subset, last interior vertex); s is
    implicit and t is the final hop, halving the state space.  Memory grows
    as 2^(n-2) * n, so n is capped at 22.
    """
    if inst.n > 22:
        raise ValueError("n too large for the exact solver (max 22)")
    cost, path, states = kernels.held_karp_path(
        np.asarray(inst.cost), inst.n, inst.s, inst.t)
    return ExactResult(float(cost), list(path), int(states))


def enumerate_cuts(n: int, predicate: Callable[[Cut], bool]) -> list[Cut]:
    """All nontrivial vertex subsets satisfying the predicate, in canonical
    (ascending bitmask) order; n is capped at 20."""
    if n > 20:
        raise ValueError("n too large for exhaustive cut enumeration (max 20)")
    out = []
    for mask in range(1, (1 << n) - 1):
        cut = Cut(mask, n)
        if predicate(cut):
            out.append(cut)
    return out
