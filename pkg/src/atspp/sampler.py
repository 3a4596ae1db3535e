"""Random tree sampling from a combination, thinness and cost accounting.

Swap rounding folds the combination's terms pairwise, exchanging edges
across symmetric differences; the sampled tree preserves every marginal
and edges are negatively correlated, so it crosses each narrow cut exactly
once, forward, and is thin with respect to the LP point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cutspace, kernels
from .instance import ArcVector, Cut, DirectedMetric
from .narrowcuts import NarrowCutChain
from .retree import TreeCombination


def alpha_for(n: int, tau: float) -> float:
    """Thinness target (2 + 1/tau) * 24 ln n / ln ln n, with the inner log
    clamped at 1 because the guarantee only kicks in for large n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return (2.0 + 1.0 / tau) * 24.0 * math.log(n) / max(1.0, math.log(math.log(n)))


@dataclass
class SampleConfig:
    """Sampling parameters; alpha/beta default to their guaranteed values."""

    seed: int
    tau: float
    n: int
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = alpha_for(self.n, self.tau)
        if self.beta is None:
            self.beta = 3.0 / (1.0 - 3.0 * self.tau)


def sample_tree(comb: TreeCombination, cfg: SampleConfig) -> tuple[tuple[int, int], ...]:
    """One random arc tree; deterministic in cfg.seed.

    Terms are folded in weight-descending order (ties broken on arc sets);
    randomness comes from a splitmix64 stream, identical across kernel
    backends.
    """
    n = comb.n
    ordered = sorted(comb.terms, key=lambda term: (-term[0], term[1]))
    arcs_flat: list[int] = []
    offsets = [0]
    weights = []
    for w, arcs in ordered:
        arcs_flat.extend(u * n + v for u, v in arcs)
        offsets.append(len(arcs_flat))
        weights.append(w)
    ids = kernels.swap_round(n, arcs_flat, offsets, weights, cfg.seed)
    return tuple(divmod(a, n) for a in ids)


def cost_of(arcs, inst: DirectedMetric) -> float:
    """Total cost of an arc set."""
    return float(sum(inst.cost[u, v] for u, v in arcs))


def thinness(arcs, x: ArcVector, n: int, mode: str = "exhaustive", *,
             chain: NarrowCutChain | None = None, samples: int = 10000,
             seed: int = 0) -> tuple[float, Cut]:
    """Worst crossing ratio |A over out(U)| / x(out(U)) and the cut attaining it.

    ``exhaustive`` inspects all nonempty proper subsets (n <= 20);
    ``narrow+sampled`` inspects the chain's cuts plus seeded random subsets.
    Cuts with zero x mass must not be crossed at all; crossing one reports
    infinite thinness with that witness.
    """
    if mode == "exhaustive":
        if n > 20:
            raise ValueError("exhaustive thinness needs n <= 20")
        masks = cutspace.all_proper_masks(n)
    elif mode == "narrow+sampled":
        rng = np.random.default_rng(seed)
        pool = set(int(m) for m in rng.integers(1, (1 << n) - 1, size=samples))
        if chain is not None:
            pool.update(c.mask for c in chain.cuts)
        masks = np.array(sorted(pool), dtype=np.int64)
    else:
        raise ValueError(f"unknown thinness mode {mode!r}")

    crossing = cutspace.crossing_count(masks, arcs).astype(float)
    mass = cutspace.out_mass(masks, x.entries)
    zero = mass <= 1e-12
    if np.any(zero & (crossing > 0)):
        witness = int(masks[np.nonzero(zero & (crossing > 0))[0][0]])
        return float("inf"), Cut(witness, n)
    ratios = np.where(zero, 0.0, crossing / np.where(zero, 1.0, mass))
    best = int(np.argmax(ratios))
    return float(ratios[best]), Cut(int(masks[best]), n)


@dataclass
class Draw:
    """A sample that met the cost and thinness targets, with its audit trail."""

    arcs: tuple[tuple[int, int], ...]
    tries: int
    cost: float
    alpha_obs: float
    witness: Cut


class DrawFailure(RuntimeError):
    """max_tries exhausted; ``best`` holds the least-bad draw seen."""

    def __init__(self, message, best: Draw):
        super().__init__(message)
        self.best = best


def draw_until_good(comb: TreeCombination, x: ArcVector, inst: DirectedMetric,
                    cfg: SampleConfig, max_tries: int = 64, *,
                    chain: NarrowCutChain | None = None) -> Draw:
    """First sample that is beta-approximate and alpha-thin against x.

    Try k uses seed cfg.seed + k.  Thinness is exhaustive up to n = 16,
    otherwise narrow cuts plus sampled subsets.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be positive")
    lp_value = float(x.dot_cost(inst.cost))
    mode = "exhaustive" if inst.n <= 16 else "narrow+sampled"
    best: Draw | None = None
    best_score = float("inf")
    for k in range(max_tries):
        sub = SampleConfig(cfg.seed + k, cfg.tau, cfg.n, cfg.alpha, cfg.beta)
        arcs = sample_tree(comb, sub)
        cost = cost_of(arcs, inst)
        alpha_obs, witness = thinness(arcs, x, inst.n, mode, chain=chain, seed=cfg.seed)
        draw = Draw(arcs, k + 1, cost, alpha_obs, witness)
        if cost <= cfg.beta * lp_value + 1e-9 and alpha_obs <= cfg.alpha + 1e-9:
            return draw
        score = max(cost / max(cfg.beta * lp_value, 1e-12),
                    alpha_obs / max(cfg.alpha, 1e-12))
        if score < best_score:
            best, best_score = draw, score
    raise DrawFailure(f"no good sample within {max_tries} tries", best)
