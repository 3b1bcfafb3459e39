"""Filtered zeta partial sums, growth diagnostics, and the boundary function.

The level-n partial sum is

    zeta(s, eps, n) = sum_{j passing} l_j^s,

where l_j is a per-cylinder mass (word weight or a measure bound) and the
filter keeps indices with l_j close to rho^(D*n), in absolute or relative
terms.  Complex powers use the principal real logarithm of l_j > 0, the
summation order is fixed (ascending endpoint) and both accumulators are
compensated, so results are bit-identical across runs and thread counts.

The claimed behaviours of the limit (analyticity for Re s > 1, blow-up in
0 < Re s < 1, and the boundary function F(t) on Re s = 1) are not certified
here; the module computes their honest finite-level surrogates: growth
slopes of log|zeta| across consecutive levels, a mass-exclusion table for
the tail inequality, successive-difference tables against the claimed decay
shape, and modulus / smoothness / periodicity diagnostics for F_n.
"""

from __future__ import annotations

import cmath
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .dimension import dimension_estimate, filter_center, garsia_entropy
from .errors import (
    GridTooCoarse,
    GridTooLarge,
    NonpositiveWeight,
    OverlapDetected,
)
from .ifs import DEFAULT_BUDGET, IfsParams, LevelSet, enumerate_level, iter_levels
from .measure import MeasureBounds, cylinder_measures

MAX_GRID_POINTS = 10**5
WEIGHT_SOURCES = ("word_weight", "measure_lo", "measure_mid")


@dataclass(frozen=True)
class FilterSpec:
    """Which cylinder masses enter the sum.

    absolute: |l_j - rho^(D n)| < eps
    relative: |l_j / rho^(D n) - 1| < eps
    none:     every l_j passes

    With a fixed absolute eps the filter goes vacuous as n grows (both l_j
    and the center tend to 0); relative mode is the scale-respecting choice,
    equivalent to the absolute schedule eps_n = c * rho^(D n) with c = eps.
    """

    mode: str = "none"
    eps: float = 0.0

    def __post_init__(self):
        if self.mode not in ("absolute", "relative", "none"):
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if self.mode != "none" and self.eps <= 0:
            raise ValueError("filter eps must be positive")

    def passes(self, weight: float, center: float) -> bool:
        if self.mode == "none":
            return True
        if self.mode == "absolute":
            return abs(weight - center) < self.eps
        return abs(weight / center - 1.0) < self.eps


def select_weights(
    levelset: LevelSet,
    source: str = "word_weight",
    measures: Sequence[MeasureBounds] | None = None,
) -> list[Fraction]:
    """Per-cylinder masses l_j for the chosen source, aligned with the level set."""
    if source not in WEIGHT_SOURCES:
        raise ValueError(f"unknown weight source {source!r}")
    if source == "word_weight":
        return levelset.weights()
    if measures is None or len(measures) != len(levelset.cylinders):
        raise ValueError(f"weight source {source!r} needs aligned cylinder measures")
    if source == "measure_lo":
        return [mb.lo for mb in measures]
    return [mb.midpoint() for mb in measures]


def _kahan(values: Iterable[float]) -> float:
    total = 0.0
    c = 0.0
    for x in values:
        y = x - c
        t = total + y
        c = (t - total) - y
        total = t
    return total


def _kahan_complex(values: Iterable[complex]) -> complex:
    re = cre = 0.0
    im = cim = 0.0
    for z in values:
        y = z.real - cre
        t = re + y
        cre = (t - re) - y
        re = t
        y = z.imag - cim
        t = im + y
        cim = (t - im) - y
        im = t
    return complex(re, im)


@dataclass(frozen=True)
class ZetaValue:
    s: complex
    n: int
    value: complex
    passed: int  # number of indices in the filter
    filtered_mass: float  # sum of passing l_j
    excluded_mass: float  # sum of the complement


def _float_weights(weights: Sequence[Fraction | float]) -> list[float]:
    out = []
    for w in weights:
        wf = float(w)
        if wf <= 0.0:
            raise NonpositiveWeight(f"cylinder weight {w} is not positive")
        out.append(wf)
    return out


def _resolve_center(
    params: IfsParams, dim: float | None, n: int, filt: FilterSpec
) -> float:
    if filt.mode == "none":
        return 1.0  # unused
    if dim is None:
        raise ValueError("an active filter needs the dimension D")
    return filter_center(params, dim, n)


def zeta_partial(
    levelset: LevelSet,
    weights: Sequence[Fraction | float],
    dim: float | None,
    filt: FilterSpec,
    s: complex,
) -> ZetaValue:
    """Filtered partial sum sum_j l_j^s at one level, with filter statistics."""
    if len(weights) != len(levelset.cylinders):
        raise ValueError("weights are not aligned with the level set")
    wf = _float_weights(weights)
    center = _resolve_center(levelset.params, dim, levelset.n, filt)
    s = complex(s)
    passing = [w for w in wf if filt.passes(w, center)]
    excluded = [w for w in wf if not filt.passes(w, center)]
    value = _kahan_complex(cmath.exp(s * math.log(w)) for w in passing)
    return ZetaValue(
        s=s,
        n=levelset.n,
        value=value,
        passed=len(passing),
        filtered_mass=_kahan(passing),
        excluded_mass=_kahan(excluded),
    )


@dataclass(frozen=True)
class ChebyshevRow:
    eps: float
    excluded_mass: float
    eps_squared: float
    claim_holds: bool


def chebyshev_report(
    levelset: LevelSet,
    weights: Sequence[Fraction | float],
    dim: float,
    eps_list: Sequence[float],
) -> list[ChebyshevRow]:
    """Mass excluded by |l_j - rho^(Dn)| >= eps, against the claimed eps^2 cap.

    The inequality is a heuristic step, not a theorem at finite level;
    failures are reported, never raised.  Word weights are the intended
    source (they form the probability distribution the step assumes).
    """
    if len(weights) != len(levelset.cylinders):
        raise ValueError("weights are not aligned with the level set")
    wf = _float_weights(weights)
    center = filter_center(levelset.params, dim, levelset.n)
    rows = []
    for eps in eps_list:
        if eps <= 0:
            raise ValueError("eps values must be positive")
        excluded = _kahan(w for w in wf if not abs(w - center) < eps)
        rows.append(ChebyshevRow(eps, excluded, eps * eps, excluded < eps * eps))
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    abs_diff: float  # |zeta_{n+1} - zeta_n|
    bound: float  # claimed shape rho * rho^((n+1) Re s)
    implied_constant: float  # abs_diff / bound
    flagged: bool  # implied constant an order of magnitude above the fit


@dataclass(frozen=True)
class ConvergenceReport:
    s: complex
    rows: tuple[ConvergenceRow, ...]
    fitted_constant: float  # least-squares (log-space) constant for the shape


def convergence_scan(
    params: IfsParams,
    s: complex,
    n_range: tuple[int, int],
    filt: FilterSpec,
    dim: float | None = None,
    weight_source: str = "word_weight",
    depth: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ConvergenceReport:
    """Successive differences |zeta_{n+1} - zeta_n| against the claimed decay.

    A single constant is fitted to the claimed shape by least squares on
    logs; a row is flagged when its implied constant exceeds the fit by a
    factor of 10, i.e. when no uniform constant can make the shape hold.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValueError("convergence scan needs Re s > 0")
    n_lo, n_hi = n_range
    if not (1 <= n_lo < n_hi):
        raise ValueError("n_range must satisfy 1 <= n_lo < n_hi")
    dim = _resolve_dim(params, dim, filt, n_hi, budget)
    values: dict[int, complex] = {}
    for levelset in iter_levels(params, n_hi, budget):
        if levelset.n >= n_lo:
            weights = _weights_for(params, levelset, weight_source, depth)
            values[levelset.n] = zeta_partial(levelset, weights, dim, filt, s).value
    rho_f = params.rho_float()
    log_rho = math.log(rho_f)
    diffs = []
    for n in range(n_lo, n_hi):
        diff = abs(values[n + 1] - values[n])
        bound = math.exp((1 + (n + 1) * s.real) * log_rho)
        diffs.append((n, diff, bound))
    positive = [math.log(d / b) for _, d, b in diffs if d > 0.0]
    fitted = math.exp(sum(positive) / len(positive)) if positive else 0.0
    rows = tuple(
        ConvergenceRow(
            n,
            diff,
            bound,
            diff / bound,
            bool(fitted and diff / bound > 10.0 * fitted),
        )
        for n, diff, bound in diffs
    )
    return ConvergenceReport(s, rows, fitted)


def _resolve_dim(
    params: IfsParams,
    dim: float | None,
    filt: FilterSpec,
    n_max: int,
    budget: int,
) -> float | None:
    if dim is not None or filt.mode == "none":
        return dim
    return dimension_estimate(params, max(2, min(n_max, 8)), budget).dimension


def _weights_for(
    params: IfsParams,
    levelset: LevelSet,
    source: str,
    depth: int | None,
) -> list[Fraction]:
    if source == "word_weight":
        return levelset.weights()
    measures = cylinder_measures(params, levelset, depth)
    return select_weights(levelset, source, measures)


@dataclass(frozen=True)
class StripPoint:
    sigma: float
    t: float
    abs_zeta: float  # |zeta| at the top level
    growth_slope: float  # slope of log|zeta_k| over the last four levels


def uniform_grid(lo: float, hi: float, count: int) -> list[float]:
    """Inclusive uniform grid with ``count`` points (count=1 gives [lo])."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if count == 1:
        return [float(lo)]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def stepped_grid(lo: float, hi: float, step: float) -> list[float]:
    """Grid lo, lo+step, ... up to hi (inclusive within float slack)."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(max(count, 1))]


def strip_scan(
    params: IfsParams,
    sigmas: Sequence[float],
    ts: Sequence[float],
    n: int,
    filt: FilterSpec,
    dim: float | None = None,
    weight_source: str = "word_weight",
    depth: int | None = None,
    threads: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> list[StripPoint]:
    """|zeta| and its level-growth slope over a rectangle of s = sigma + i t.

    The slope of log|zeta(s, ., k)| against k over k = n-3..n is the
    computable surrogate for the holomorphy/blow-up dichotomy: positive
    slope marks exponential growth (the strip signature), nonpositive slope
    boundedness.  Grid points are independent; they are evaluated in
    parallel when threads > 1 and merged in grid order, so output does not
    depend on the thread count.
    """
    if n < 2:
        raise ValueError("strip scan needs n >= 2")
    if len(sigmas) * len(ts) > MAX_GRID_POINTS:
        raise GridTooLarge(
            f"grid of {len(sigmas)}x{len(ts)} points exceeds {MAX_GRID_POINTS}"
        )
    dim = _resolve_dim(params, dim, filt, n, budget)
    ks = list(range(max(1, n - 3), n + 1))
    log_weights: dict[int, list[float]] = {}
    for levelset in iter_levels(params, n, budget):
        if levelset.n in ks:
            weights = _weights_for(params, levelset, weight_source, depth)
            wf = _float_weights(weights)
            center = _resolve_center(params, dim, levelset.n, filt)
            log_weights[levelset.n] = [
                math.log(w) for w in wf if filt.passes(w, center)
            ]

    grid = [(sigma, t) for sigma in sigmas for t in ts]

    def eval_point(point: tuple[float, float]) -> StripPoint:
        sigma, t = point
        s = complex(sigma, t)
        mods = []
        for k in ks:
            z = _kahan_complex(cmath.exp(s * lw) for lw in log_weights[k])
            mods.append(abs(z))
        slope = _slope(ks, mods)
        return StripPoint(sigma, t, mods[-1], slope)

    if threads <= 1 or len(grid) < 2:
        return [eval_point(p) for p in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(eval_point, grid))


def _slope(ks: Sequence[int], mods: Sequence[float]) -> float:
    if len(ks) < 2 or any(m == 0.0 for m in mods):
        return float("nan")
    ys = [math.log(m) for m in mods]
    k_mean = sum(ks) / len(ks)
    y_mean = sum(ys) / len(ys)
    num = sum((k - k_mean) * (y - y_mean) for k, y in zip(ks, ys))
    den = sum((k - k_mean) ** 2 for k in ks)
    return num / den


@dataclass(frozen=True)
class BoundarySample:
    t: float
    value: complex  # F_n(t)
    n: int


def boundary_F(
    levelset: LevelSet,
    weights: Sequence[Fraction | float],
    dim: float | None,
    filt: FilterSpec,
    t_grid: Sequence[float],
) -> list[BoundarySample]:
    """F_n(t) = sum_{passing} l_j exp(i t ln l_j), sampled on ascending t."""
    if len(weights) != len(levelset.cylinders):
        raise ValueError("weights are not aligned with the level set")
    wf = _float_weights(weights)
    center = _resolve_center(levelset.params, dim, levelset.n, filt)
    passing = [(w, math.log(w)) for w in wf if filt.passes(w, center)]
    samples = []
    for t in sorted(float(t) for t in t_grid):
        value = _kahan_complex(
            complex(w * math.cos(t * lw), w * math.sin(t * lw)) for w, lw in passing
        )
        samples.append(BoundarySample(t, value, levelset.n))
    return samples


@dataclass(frozen=True)
class SmoothnessRow:
    n: int
    sup_d1: float  # sup of |F_n'| over interior grid points (central differences)
    sup_d2: float  # sup of |F_n''|
    d1_change: float  # max |F_n' - F_prev'| against the previous level (nan for first)
    d2_change: float


@dataclass(frozen=True)
class BoundaryReport:
    """Numerical proxies for the three claimed properties of F = lim F_n:

    sup_modulus checks |F| < 1; the smoothness table tracks the level-to-level
    stabilization of finite-difference derivatives (a C^infinity proxy); the
    periodicity score is the minimized mean shift distance, near zero only
    for a periodic signal.
    """

    sup_modulus: float
    smoothness: tuple[SmoothnessRow, ...]
    periodicity_score: float
    best_period: float
    is_periodic: bool
    empty_filter: bool


def boundary_diagnostics(
    samples: Sequence[BoundarySample],
    evaluator: Callable[[int, float], complex] | None = None,
    periodic_rel_tol: float = 0.01,
    period_range: tuple[float, float] | None = None,
    min_points: int = 16,
) -> BoundaryReport:
    """Diagnostics over boundary samples at >= 2 levels on one uniform t grid.

    ``evaluator(n, t)`` optionally supplies off-grid values of F_n, letting
    the best candidate period be refined below the grid step by golden
    section; without it the period resolution is the grid step.
    """
    by_level: dict[int, list[BoundarySample]] = {}
    for sample in samples:
        by_level.setdefault(sample.n, []).append(sample)
    levels = sorted(by_level)
    if len(levels) < 2:
        raise ValueError("diagnostics need samples at >= 2 levels")
    grids = {}
    for n in levels:
        by_level[n].sort(key=lambda smp: smp.t)
        grids[n] = [smp.t for smp in by_level[n]]
    t_grid = grids[levels[0]]
    if any(grids[n] != t_grid for n in levels[1:]):
        raise ValueError("all levels must share one t grid")
    if len(t_grid) < min_points:
        raise GridTooCoarse(f"need >= {min_points} t points, got {len(t_grid)}")
    h = t_grid[1] - t_grid[0]
    if any(
        abs((b - a) - h) > 1e-9 * max(h, 1.0) for a, b in zip(t_grid, t_grid[1:])
    ):
        raise ValueError("t grid must be uniform")

    sup_modulus = max(abs(smp.value) for n in levels for smp in by_level[n])
    if sup_modulus == 0.0:
        return BoundaryReport(0.0, (), float("nan"), float("nan"), False, True)

    smoothness = []
    prev_d1: list[complex] | None = None
    prev_d2: list[complex] | None = None
    for n in levels:
        f = [smp.value for smp in by_level[n]]
        d1 = [(f[k + 1] - f[k - 1]) / (2 * h) for k in range(1, len(f) - 1)]
        d2 = [(f[k + 1] - 2 * f[k] + f[k - 1]) / (h * h) for k in range(1, len(f) - 1)]
        d1_change = (
            max(abs(a - b) for a, b in zip(d1, prev_d1)) if prev_d1 else float("nan")
        )
        d2_change = (
            max(abs(a - b) for a, b in zip(d2, prev_d2)) if prev_d2 else float("nan")
        )
        smoothness.append(
            SmoothnessRow(
                n,
                max(abs(v) for v in d1),
                max(abs(v) for v in d2),
                d1_change,
                d2_change,
            )
        )
        prev_d1, prev_d2 = d1, d2

    top = levels[-1]
    f_top = [smp.value for smp in by_level[top]]
    score, period = _periodicity(f_top, t_grid, h, period_range, top, evaluator)
    return BoundaryReport(
        sup_modulus=sup_modulus,
        smoothness=tuple(smoothness),
        periodicity_score=score,
        best_period=period,
        is_periodic=score < periodic_rel_tol * sup_modulus,
        empty_filter=False,
    )


_MIN_OVERLAP = 8


def _periodicity(
    f: list[complex],
    t_grid: list[float],
    h: float,
    period_range: tuple[float, float] | None,
    level: int,
    evaluator: Callable[[int, float], complex] | None,
) -> tuple[float, float]:
    """Minimized mean |F(t+T) - F(t)| over candidate periods T."""
    n_pts = len(f)
    t_lo, t_hi = period_range if period_range else (0.0, (n_pts - _MIN_OVERLAP) * h)
    best_score = math.inf
    best_j = 0
    for j in range(1, n_pts - _MIN_OVERLAP + 1):
        t_shift = j * h
        if t_shift <= t_lo or t_shift > t_hi:
            continue
        k = n_pts - j
        score = _kahan(abs(f[i + j] - f[i]) for i in range(k)) / k
        if score < best_score:
            best_score = score
            best_j = j
    if best_j == 0:
        return math.inf, float("nan")
    best_t = best_j * h
    if evaluator is None:
        return best_score, best_t

    def cont_score(shift: float) -> float:
        total = _kahan(
            abs(evaluator(level, t + shift) - f[i]) for i, t in enumerate(t_grid)
        )
        return total / n_pts

    lo = max(best_t - h, t_lo + 1e-12 if t_lo > 0 else h * 1e-6)
    hi = min(best_t + h, t_hi)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = cont_score(c), cont_score(d)
    for _ in range(90):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = cont_score(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = cont_score(d)
    best = (a + b) / 2
    return cont_score(best), best


def classical_zeta_oracle(
    params: IfsParams, s: complex, n: int, budget: int = DEFAULT_BUDGET
) -> tuple[complex, complex]:
    """Length-based level sum for strictly separated schemes, two ways.

    Returns (partial_sum, closed_form): the first actually sums
    (rho^n a_m)^s over the enumerated level-n intervals, the second
    evaluates m^n (rho^n a_m)^s directly.  At sigma* = ln m / ln(1/rho) the
    modulus is independent of n, which locates the classical abscissa.
    """
    s = complex(s)
    zero = params.ctx.zero()
    lefts = [params._shifts[i] for i in range(params.m)]
    length1 = params._rho * params.support_right
    for a, b in zip(lefts, lefts[1:]):
        if (b - (a + length1)).sign() <= 0:
            raise OverlapDetected(
                "level-1 cylinders are not strictly separated; "
                "the classical oracle needs the no-overlap geometry"
            )
    levelset = enumerate_level(params, n, budget)
    if len(levelset) != params.m**n:
        raise OverlapDetected("level-n dedup found coinciding cylinders")
    length_f = levelset.cylinder_length().to_float(1e-15)
    term = cmath.exp(s * math.log(length_f))
    partial = _kahan_complex(term * cyl.multiplicity for cyl in levelset.cylinders)
    closed = (params.m**n) * cmath.exp(
        s * (n * math.log(params.rho_float()) + math.log(params.support_right))
    )
    assert zero.is_zero()
    return partial, closed


# -- CSV writers ---------------------------------------------------------------


def write_strip_csv(points: Sequence[StripPoint], path: str | Path) -> None:
    """Columns: sigma, t, abs_zeta, growth_slope."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sigma", "t", "abs_zeta", "growth_slope"])
        for p in points:
            writer.writerow(
                [f"{p.sigma:.12g}", f"{p.t:.12g}", f"{p.abs_zeta:.12g}", f"{p.growth_slope:.12g}"]
            )


def write_boundary_csv(samples: Sequence[BoundarySample], path: str | Path) -> None:
    """Columns: t, re_F, im_F, abs_F, n."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "re_F", "im_F", "abs_F", "n"])
        for smp in samples:
            writer.writerow(
                [
                    f"{smp.t:.12g}",
                    f"{smp.value.real:.12g}",
                    f"{smp.value.imag:.12g}",
                    f"{abs(smp.value):.12g}",
                    smp.n,
                ]
            )


def write_convergence_csv(report: ConvergenceReport, path: str | Path) -> None:
    """Columns: n, abs_diff, bound, implied_constant, flagged."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "abs_diff", "bound", "implied_constant", "flagged"])
        for r in report.rows:
            writer.writerow(
                [
                    r.n,
                    f"{r.abs_diff:.12g}",
                    f"{r.bound:.12g}",
                    f"{r.implied_constant:.12g}",
                    str(r.flagged).lower(),
                ]
            )


def write_chebyshev_csv(rows: Sequence[ChebyshevRow], path: str | Path) -> None:
    """Columns: eps, excluded_mass, eps_squared, claim_holds."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eps", "excluded_mass", "eps_squared", "claim_holds"])
        for r in rows:
            writer.writerow(
                [
                    f"{r.eps:.12g}",
                    f"{r.excluded_mass:.12g}",
                    f"{r.eps_squared:.12g}",
                    str(r.claim_holds).lower(),
                ]
            )
