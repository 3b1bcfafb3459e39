"""Linear iterated function schemes and exact level-n cylinder enumeration.

The scheme is f_i(x) = rho*x + (1-rho)*a_i with integer digits
0 = a_1 < a_2 < ... < a_m and a probability vector p.  A level-n word
b_1..b_n maps the support interval I = [0, a_m] onto the cylinder
[c_w, c_w + rho^n * a_m] with exact left endpoint

    c_w = (1 - rho) * sum_k a_{b_k} * rho^(k-1).

Distinct words can share an endpoint when rho satisfies an algebraic
relation (exact overlaps); enumeration dedups on the canonical key of the
exact endpoint and accumulates word weights and multiplicities.  Levels are
built incrementally: the m affine extensions c -> rho*c + (1-rho)*a_i map
the distinct endpoints of level n onto level n+1, so the cost is driven by
the deduplicated count, never by m^(n+1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from pathlib import Path
from typing import Iterator, Sequence

from .algebraic import AlgebraicContext, FieldElement, Rational, _as_fraction
from .errors import BudgetExceeded, IndexOutOfRange

DEFAULT_BUDGET = 10**7


@dataclass(eq=False)
class IfsParams:
    """Contraction ratio context, digit set and probability vector."""

    ctx: AlgebraicContext
    digits: tuple[int, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        self.digits = tuple(int(a) for a in self.digits)
        if len(self.digits) < 2:
            raise ValueError("digits: need at least two digits")
        if self.digits[0] != 0:
            raise ValueError("digits: first digit must be 0")
        if any(b <= a for a, b in zip(self.digits, self.digits[1:])):
            raise ValueError("digits: must be strictly increasing")
        self.probs = tuple(_as_fraction(p) for p in self.probs)
        if len(self.probs) != len(self.digits):
            raise ValueError("probs: length must match digits")
        if any(not (0 < p < 1) for p in self.probs):
            raise ValueError("probs: each probability must lie in (0, 1)")
        if sum(self.probs) != 1:
            raise ValueError("probs: probabilities must sum to 1 exactly")
        rho = self.ctx.rho()
        one = self.ctx.one()
        self._rho = rho
        self._one_minus_rho = one - rho
        self._shifts = tuple(self._one_minus_rho * a for a in self.digits)
        self._digit_elems = tuple(self.ctx.from_rational(a) for a in self.digits)
        self._am_elem = self.ctx.from_rational(self.digits[-1])
        self._inv_rho = self.ctx.inv_rho()

    @property
    def m(self) -> int:
        return len(self.digits)

    @property
    def support_right(self) -> int:
        """Right endpoint a_m of the support interval I = [0, a_m]."""
        return self.digits[-1]

    def rho_float(self, abs_err: float = 1e-15) -> float:
        return self._rho.to_float(abs_err)

    def __repr__(self) -> str:
        return (
            f"IfsParams(poly={list(self.ctx.poly)}, digits={list(self.digits)}, "
            f"probs={[str(p) for p in self.probs]})"
        )


@dataclass(frozen=True)
class Cylinder:
    """Deduplicated level-n cylinder: exact left endpoint, total word weight,
    number of words sharing the endpoint."""

    left: FieldElement
    weight: Fraction
    multiplicity: int


@dataclass(eq=False)
class LevelSet:
    """All distinct level-n cylinders, sorted ascending by exact endpoint."""

    params: IfsParams
    n: int
    cylinders: tuple[Cylinder, ...]
    word_count: int

    def cylinder_length(self) -> FieldElement:
        """Common interval length rho^n * a_m as an exact field element."""
        return (self.params._rho ** self.n) * self.params.support_right

    def weights(self) -> list[Fraction]:
        return [c.weight for c in self.cylinders]

    def __len__(self) -> int:
        return len(self.cylinders)


def cylinder_endpoint(params: IfsParams, word: Sequence[int]) -> FieldElement:
    """Exact left endpoint of the cylinder of ``word`` (letters are 1..m).

    Evaluates the direct sum (1-rho) * sum_k a_{b_k} rho^(k-1); this is the
    naive route, deliberately independent of the incremental extension used
    by :func:`enumerate_level`.
    """
    acc = params.ctx.zero()
    power = params.ctx.one()
    for letter in word:
        if not 1 <= letter <= params.m:
            raise IndexOutOfRange(f"word letter {letter} outside 1..{params.m}")
        acc = acc + power * params._digit_elems[letter - 1]
        power = power * params._rho
    return params._one_minus_rho * acc


def _sorted_entries(entries) -> list:
    def cmp(a, b):
        return (a[0] - b[0]).sign()

    return sorted(entries, key=cmp_to_key(cmp))


def iter_levels(
    params: IfsParams, n_max: int, budget: int = DEFAULT_BUDGET
) -> Iterator[LevelSet]:
    """Yield LevelSet(1) .. LevelSet(n_max), reusing the dedup frontier."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    frontier: dict[bytes, list] = {}
    for i in range(params.m):
        e = params._shifts[i]
        frontier[e.key()] = [e, params.probs[i], 1]
    word_count = params.m
    for n in range(1, n_max + 1):
        if n > 1:
            new: dict[bytes, list] = {}
            for e, w, mult in frontier.values():
                for i in range(params.m):
                    e2 = params._rho * e + params._shifts[i]
                    k2 = e2.key()
                    entry = new.get(k2)
                    if entry is None:
                        if len(new) >= budget:
                            raise BudgetExceeded(
                                f"distinct-cylinder budget {budget} exceeded "
                                f"while building level {n}",
                                level_reached=n - 1,
                            )
                        new[k2] = [e2, w * params.probs[i], mult]
                    else:
                        entry[1] += w * params.probs[i]
                        entry[2] += mult
            frontier = new
            word_count *= params.m
        ordered = _sorted_entries(frontier.values())
        cylinders = tuple(Cylinder(e, w, mult) for e, w, mult in ordered)
        yield LevelSet(params, n, cylinders, word_count)


def enumerate_level(
    params: IfsParams, n: int, budget: int = DEFAULT_BUDGET
) -> LevelSet:
    """Deduplicated level-n cylinder structure with exact weights."""
    levelset = None
    for levelset in iter_levels(params, n, budget):
        pass
    assert levelset is not None
    return levelset


def count_distinct(params: IfsParams, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of distinct level-n endpoints, without materializing weights."""
    return _count_sequence(params, n, budget)[-1]


def _count_sequence(params: IfsParams, n_max: int, budget: int) -> list[int]:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    frontier: dict[bytes, FieldElement] = {}
    for e in params._shifts:
        frontier[e.key()] = e
    counts = [len(frontier)]
    for n in range(2, n_max + 1):
        new: dict[bytes, FieldElement] = {}
        for e in frontier.values():
            for i in range(params.m):
                e2 = params._rho * e + params._shifts[i]
                k2 = e2.key()
                if k2 not in new:
                    if len(new) >= budget:
                        raise BudgetExceeded(
                            f"distinct-cylinder budget {budget} exceeded "
                            f"while counting level {n}",
                            level_reached=n - 1,
                        )
                    new[k2] = e2
        frontier = new
        counts.append(len(frontier))
    return counts


@dataclass(frozen=True)
class GrowthRow:
    n: int
    distinct: int
    inv_rho_pow: float  # rho^(-n)
    ratio: float  # distinct * rho^n, the implied constant

    def astuple(self) -> tuple:
        return (self.n, self.distinct, self.inv_rho_pow, self.ratio)


@dataclass(frozen=True)
class GrowthReport:
    """Distinct-count growth against rho^(-n); context for the lower-bound claim."""

    rows: tuple[GrowthRow, ...]
    budget_exceeded: bool


def growth_report(
    params: IfsParams, n_max: int, budget: int = DEFAULT_BUDGET
) -> GrowthReport:
    rho_f = params.rho_float()
    exceeded = False
    try:
        counts = _count_sequence(params, n_max, budget)
    except BudgetExceeded as exc:
        exceeded = True
        counts = _count_sequence(params, exc.level_reached, budget)
    rows = tuple(
        GrowthRow(n, c, rho_f ** (-n), c * rho_f**n)
        for n, c in enumerate(counts, start=1)
    )
    return GrowthReport(rows, exceeded)


def min_max_weights(levelset: LevelSet) -> tuple[Fraction, Fraction]:
    """Exact (min, max) cylinder weight of a nonempty level set."""
    if not levelset.cylinders:
        raise ValueError("level set is empty")
    weights = levelset.weights()
    return min(weights), max(weights)


def write_levelset_csv(levelset: LevelSet, path: str | Path) -> None:
    """Columns: n, endpoint_float (15 significant digits), weight_num, weight_den,
    multiplicity."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "endpoint_float", "weight_num", "weight_den", "multiplicity"])
        for cyl in levelset.cylinders:
            writer.writerow(
                [
                    levelset.n,
                    f"{cyl.left.to_float(1e-15):.15g}",
                    cyl.weight.numerator,
                    cyl.weight.denominator,
                    cyl.multiplicity,
                ]
            )
