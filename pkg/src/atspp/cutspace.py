"""Vectorized helpers for exhaustive enumeration over vertex cuts.

Cuts are encoded as bitmasks.  All routines stream over numpy mask arrays
arc by arc, keeping memory linear in the number of masks.
"""

from __future__ import annotations

import numpy as np


def all_proper_masks(n: int) -> np.ndarray:
    """All 2^n - 2 nonempty proper subsets of an n-vertex ground set."""
    if n > 24:
        raise ValueError("n too large for exhaustive cut enumeration")
    return np.arange(1, (1 << n) - 1, dtype=np.int64)


def st_cut_masks(n: int, s: int, t: int) -> np.ndarray:
    """Masks of all s-t cuts: subsets containing s but not t."""
    masks = all_proper_masks(n)
    keep = ((masks >> s) & 1).astype(bool) & ~((masks >> t) & 1).astype(bool)
    return masks[keep]


def out_mass(masks: np.ndarray, entries) -> np.ndarray:
    """Per-mask total weight of arcs leaving the set; ``entries`` maps arcs to weights."""
    acc = np.zeros(len(masks))
    for (u, v), w in entries.items():
        cross = (((masks >> u) & 1) & (~(masks >> v) & 1)).astype(float)
        acc += w * cross
    return acc


def in_mass(masks: np.ndarray, entries) -> np.ndarray:
    """Per-mask total weight of arcs entering the set."""
    acc = np.zeros(len(masks))
    for (u, v), w in entries.items():
        cross = ((~(masks >> u) & 1) & ((masks >> v) & 1)).astype(float)
        acc += w * cross
    return acc


def crossing_count(masks: np.ndarray, arcs) -> np.ndarray:
    """Per-mask number of the given arcs leaving the set."""
    acc = np.zeros(len(masks), dtype=np.int64)
    for u, v in arcs:
        acc += ((masks >> u) & 1) & (~(masks >> v) & 1)
    return acc
