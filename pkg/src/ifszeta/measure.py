"""Rigorous two-sided bounds for the stationary measure of an interval.

mu is the unique probability measure with mu = sum_i p_i * mu o f_i^{-1}.
Applied to an interval J that relation reads

    mu(J) = sum_i p_i * mu(g_i(J)),    g_i(x) = (x - (1-rho) a_i) / rho,

and the recursion below unrolls it with exact endpoints.  A branch closes
with its full weight once the preimage covers the support interval
I = [0, a_m], with zero once it misses I (both decided by exact sign tests),
and contributes the slack [0, weight] when the depth allowance runs out.
The returned enclosure therefore always contains mu(J), and its width equals
the unresolved (depth-truncated) mass.

Intervals are closed.  Boundary points carry no mass for the shipped presets
(the measure is continuous for m >= 2 with all p_i < 1), so the convention
only shows up inside the reported bound width.

Preimages are clipped to I before recursing; the clipped interval's canonical
key, together with the remaining depth, memoizes the per-unit-weight result.
For Pisot-type rho the preimages of coinciding cylinders collide heavily,
which is where the memo earns its keep.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .algebraic import FieldElement
from .ifs import IfsParams, LevelSet

# Per-unit-weight result for a clipped interval at a given remaining depth:
# (resolved lower mass, unresolved mass).
_Memo = dict[tuple[bytes, bytes, int], tuple[Fraction, Fraction]]

DEFAULT_EXTRA_DEPTH = 20


@dataclass(frozen=True)
class IntervalQ:
    """Closed interval with exact endpoints in the context field."""

    lo: FieldElement
    hi: FieldElement

    def __post_init__(self):
        if (self.hi - self.lo).sign() < 0:
            raise ValueError("interval endpoints out of order")


@dataclass(frozen=True)
class MeasureBounds:
    """Enclosure lo <= mu(J) <= hi; hi - lo equals the depth-truncated mass.

    unresolved_mass > 0 flags that some branch hit the depth cutoff (in the
    extreme, depth 0 on a straddling interval yields the trivial [0, 1]).
    """

    lo: Fraction
    hi: Fraction
    unresolved_mass: Fraction

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


def _unit_bounds(
    params: IfsParams,
    lo: FieldElement,
    hi: FieldElement,
    depth: int,
    memo: _Memo,
) -> tuple[Fraction, Fraction]:
    """(resolved, unresolved) for a nonempty interval already clipped to I."""
    zero = params.ctx.zero()
    am = params._am_elem
    if lo.coeffs == zero.coeffs and hi.coeffs == am.coeffs:
        return Fraction(1), Fraction(0)
    if depth == 0:
        return Fraction(0), Fraction(1)
    key = (lo.key(), hi.key(), depth)
    cached = memo.get(key)
    if cached is not None:
        return cached
    resolved = Fraction(0)
    unresolved = Fraction(0)
    inv = params._inv_rho
    for i in range(params.m):
        glo = (lo - params._shifts[i]) * inv
        ghi = (hi - params._shifts[i]) * inv
        if ghi.sign() < 0 or (glo - am).sign() > 0:
            continue  # preimage misses the support
        lo_sign = glo.sign()
        hi_vs_am = (ghi - am).sign()
        if lo_sign <= 0 and hi_vs_am >= 0:
            resolved += params.probs[i]  # preimage covers the support
            continue
        clo = glo if lo_sign > 0 else zero
        chi = ghi if hi_vs_am < 0 else am
        sub_res, sub_unres = _unit_bounds(params, clo, chi, depth - 1, memo)
        resolved += params.probs[i] * sub_res
        unresolved += params.probs[i] * sub_unres
    memo[key] = (resolved, unresolved)
    return resolved, unresolved


def measure_bounds(
    params: IfsParams,
    interval: IntervalQ,
    depth: int,
    memo: _Memo | None = None,
) -> MeasureBounds:
    """Enclosure of mu(interval) after ``depth`` refinement levels."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if memo is None:
        memo = {}
    zero = params.ctx.zero()
    am = params._am_elem
    lo, hi = interval.lo, interval.hi
    if hi.sign() < 0 or (lo - am).sign() > 0:
        return MeasureBounds(Fraction(0), Fraction(0), Fraction(0))
    clo = lo if lo.sign() > 0 else zero
    chi = hi if (hi - am).sign() < 0 else am
    resolved, unresolved = _unit_bounds(params, clo, chi, depth, memo)
    return MeasureBounds(resolved, resolved + unresolved, unresolved)


def cylinder_measures(
    params: IfsParams,
    levelset: LevelSet,
    depth: int | None = None,
) -> list[MeasureBounds]:
    """Bounds for mu(J_j) over every cylinder J_j of the level set.

    Default depth is n + 20, deep enough that the unresolved mass decays like
    (max_i p_i)^20 in practice; it is reported per cylinder, never assumed
    away.  A shared memo table serves all cylinders.
    """
    if depth is None:
        depth = levelset.n + DEFAULT_EXTRA_DEPTH
    if depth < levelset.n:
        warnings.warn(
            f"depth {depth} is below the cylinder level {levelset.n}; "
            "bounds will be loose",
            RuntimeWarning,
            stacklevel=2,
        )
    length = levelset.cylinder_length()
    memo: _Memo = {}
    out = []
    for cyl in levelset.cylinders:
        # Cylinders live inside I already; no clipping needed.
        resolved, unresolved = _unit_bounds(
            params, cyl.left, cyl.left + length, depth, memo
        )
        out.append(MeasureBounds(resolved, resolved + unresolved, unresolved))
    return out


@dataclass(frozen=True)
class DiscrepancyRow:
    j: int
    weight: Fraction
    mu_lo: Fraction
    mu_hi: Fraction
    gap: Fraction  # mu_lo - weight


@dataclass(frozen=True)
class DiscrepancyReport:
    """Cylinder-by-cylinder gap between mu(J_j) and the word-weight proxy.

    Word weights always sum to 1; with overlaps the cylinder measures
    double-count shared mass, so sum_mu_lo can exceed 1.
    """

    rows: tuple[DiscrepancyRow, ...]
    sum_weight: Fraction
    sum_mu_lo: Fraction


def discrepancy_report(
    levelset: LevelSet, measures: list[MeasureBounds]
) -> DiscrepancyReport:
    if len(measures) != len(levelset.cylinders):
        raise ValueError("measures are not aligned with the level set")
    rows = tuple(
        DiscrepancyRow(j, cyl.weight, mb.lo, mb.hi, mb.lo - cyl.weight)
        for j, (cyl, mb) in enumerate(zip(levelset.cylinders, measures))
    )
    return DiscrepancyReport(
        rows,
        sum((r.weight for r in rows), Fraction(0)),
        sum((r.mu_lo for r in rows), Fraction(0)),
    )


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def write_measures_csv(
    levelset: LevelSet, measures: list[MeasureBounds], path: str | Path
) -> None:
    """Columns: j, endpoint_float, weight, mu_lo, mu_hi, unresolved_mass
    (rationals printed as num/den)."""
    if len(measures) != len(levelset.cylinders):
        raise ValueError("measures are not aligned with the level set")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["j", "endpoint_float", "weight", "mu_lo", "mu_hi", "unresolved_mass"])
        for j, (cyl, mb) in enumerate(zip(levelset.cylinders, measures)):
            writer.writerow(
                [
                    j,
                    f"{cyl.left.to_float(1e-15):.12g}",
                    _frac_str(cyl.weight),
                    _frac_str(mb.lo),
                    _frac_str(mb.hi),
                    _frac_str(mb.unresolved_mass),
                ]
            )


def write_discrepancy_csv(report: DiscrepancyReport, path: str | Path) -> None:
    """Columns: j, weight, mu_lo, mu_hi, mu_lo_minus_weight."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["j", "weight", "mu_lo", "mu_hi", "mu_lo_minus_weight"])
        for r in report.rows:
            writer.writerow(
                [r.j, _frac_str(r.weight), _frac_str(r.mu_lo), _frac_str(r.mu_hi), _frac_str(r.gap)]
            )
