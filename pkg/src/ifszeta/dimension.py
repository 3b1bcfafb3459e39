"""Entropy-based dimension estimate for the stationary measure.

The level-n entropy H_n = -sum_j w_j ln w_j is taken over the deduplicated
cylinder weights, so exact overlaps lower it below n*ln(m).  The ratio
D_n = H_n / (n ln(1/rho)) is subadditive along level sums, which makes the
running minimum a usable upper bound for the measure's dimension; it is
capped at 1 because the measure lives on the line (the raw ratio does exceed
1 at small n for strongly overlapping schemes).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .ifs import DEFAULT_BUDGET, IfsParams, LevelSet, enumerate_level, iter_levels


@dataclass(frozen=True)
class EntropyPoint:
    n: int
    entropy: float  # H_n, nats
    ratio: float  # D_n = H_n / (n ln(1/rho))


@dataclass(frozen=True)
class DimensionEstimate:
    dimension: float  # min(1, min_n D_n)
    n_used: int  # level attaining the minimal ratio
    is_capped: bool  # true when the uncapped minimum exceeded 1
    sequence: tuple[EntropyPoint, ...]


def _entropy_from_weights(weights: list[Fraction]) -> float:
    # One log per distinct weight value; counts stay exact.
    counts: dict[Fraction, int] = {}
    for w in weights:
        counts[w] = counts.get(w, 0) + 1
    h = 0.0
    for w, count in counts.items():
        wf = float(w)
        h -= count * wf * math.log(wf)
    return h


def garsia_entropy(
    params: IfsParams,
    n: int,
    levelset: LevelSet | None = None,
    budget: int = DEFAULT_BUDGET,
) -> EntropyPoint:
    """Entropy of the deduplicated level-n weight distribution, plus its ratio."""
    if levelset is None:
        levelset = enumerate_level(params, n, budget)
    elif levelset.n != n:
        raise ValueError(f"level set is for n={levelset.n}, not n={n}")
    h = _entropy_from_weights(levelset.weights())
    log_inv_rho = -math.log(params.rho_float())
    return EntropyPoint(n, h, h / (n * log_inv_rho))


def dimension_estimate(
    params: IfsParams, n_max: int, budget: int = DEFAULT_BUDGET
) -> DimensionEstimate:
    """Cap-at-1 running minimum of D_n over 2 <= n <= n_max.

    On budget overrun the estimate from the levels already computed is
    returned rather than raising.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    points: list[EntropyPoint] = []
    try:
        for levelset in iter_levels(params, n_max, budget):
            if levelset.n >= 2:
                points.append(garsia_entropy(params, levelset.n, levelset))
    except Exception as exc:  # BudgetExceeded: keep what we have
        from .errors import BudgetExceeded

        if not isinstance(exc, BudgetExceeded) or not points:
            raise
    best = min(points, key=lambda p: p.ratio)
    capped = best.ratio > 1.0
    return DimensionEstimate(
        dimension=min(1.0, best.ratio),
        n_used=best.n,
        is_capped=capped,
        sequence=tuple(points),
    )


def filter_center(params: IfsParams, dim: float, n: int) -> float:
    """rho^(dim*n), the center of the zeta weight filter."""
    if not 0 < dim <= 1:
        raise ValueError("dimension must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.exp(-dim * n * (-math.log(params.rho_float())))


def write_entropy_csv(estimate: DimensionEstimate, path: str | Path) -> None:
    """Columns: n, H_n, D_n, capped_flag (flag marks rows with raw ratio > 1)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "H_n", "D_n", "capped_flag"])
        for p in estimate.sequence:
            writer.writerow(
                [p.n, f"{p.entropy:.12g}", f"{p.ratio:.12g}", str(p.ratio > 1.0).lower()]
            )
