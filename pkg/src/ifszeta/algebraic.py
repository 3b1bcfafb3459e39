"""Exact arithmetic in the number field Q(rho) for an algebraic rho in (0,1).

A context pins down rho as the unique simple root of an integer polynomial
inside a rational isolating interval.  Field elements are rational coordinate
vectors against the power basis 1, rho, ..., rho^(d-1); addition is
componentwise and products are reduced modulo the defining polynomial, so
every endpoint computation downstream stays exact.  Signs (and hence ordering
and deduplication) are decided by evaluating the coordinate vector with
rational interval arithmetic over the isolating interval, bisecting the root
bracket until the enclosure excludes zero.

The defining polynomial must be irreducible over Q.  This is a precondition,
not a checked property: with a reducible polynomial an element can be
numerically zero while having nonzero coordinates, and the zero test (all
coordinates zero) silently breaks.  All shipped presets use polynomials that
are irreducible by inspection.

Contexts are immutable after construction apart from a monotone, internally
locked cache of bisection refinements, so they are safe to share across
threads.  Refinements always walk the same bisection chain from the same base
interval, which keeps float conversions bit-identical regardless of thread
interleaving.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Sequence, Union

from .errors import ContextMismatch, NoSignChange, RootOutOfUnit, ZeroConstantTerm

Rational = Union[int, Fraction, str, float]

# Construction refines the isolating interval to below this width up front.
_BASE_WIDTH = Fraction(1, 1 << 16)
# Bisection cap; reached only if the irreducibility precondition is violated
# or an absurd tolerance is requested.
_MAX_REFINE = 4096


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"expected a rational value, got {type(x).__name__}")


def _poly_eval(poly: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * x + c
    return acc


class AlgebraicContext:
    """Field Q(rho) for the unique root rho of ``poly`` inside ``iso``.

    ``poly`` holds integer coefficients in ascending order c0..cd (cd != 0).
    ``iso`` must satisfy 0 < lo < hi < 1 with a sign change of the polynomial
    across it.  Use :func:`make_context` as the public entry point.
    """

    __slots__ = ("poly", "degree", "iso", "_chain", "_lock", "_lo_positive")

    def __init__(self, poly: Sequence[int], iso: tuple[Rational, Rational]):
        coeffs = [int(c) for c in poly]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise ValueError("poly must be nonconstant")
        if coeffs[0] == 0:
            raise ZeroConstantTerm("poly has constant term 0; rho would not be invertible")
        lo, hi = (_as_fraction(iso[0]), _as_fraction(iso[1]))
        if not (0 < lo < hi < 1):
            raise RootOutOfUnit(f"isolating interval ({lo}, {hi}) must lie inside (0, 1)")
        vlo = _poly_eval(coeffs, lo)
        vhi = _poly_eval(coeffs, hi)
        if vlo == 0 or vhi == 0 or (vlo > 0) == (vhi > 0):
            raise NoSignChange(f"poly has no sign change across ({lo}, {hi})")

        self.poly = tuple(coeffs)
        self.degree = len(coeffs) - 1
        lo_positive = vlo > 0
        # Refine the input bracket once so every later refinement starts from
        # a canonical, deterministic base interval.
        while hi - lo >= _BASE_WIDTH:
            mid = (lo + hi) / 2
            v = _poly_eval(coeffs, mid)
            if v == 0:  # rational root (degree-1 contexts); collapse the bracket
                lo = hi = mid
                break
            if (v > 0) == lo_positive:
                lo = mid
            else:
                hi = mid
        self.iso = (lo, hi)
        self._lo_positive = lo_positive
        self._chain = [(lo, hi)]
        self._lock = threading.Lock()

    def _refined(self, k: int) -> tuple[Fraction, Fraction]:
        """Root bracket after k bisections beyond the base interval."""
        chain = self._chain
        if k < len(chain):
            return chain[k]
        with self._lock:
            while len(chain) <= k:
                lo, hi = chain[-1]
                if lo == hi:
                    chain.append((lo, hi))
                    continue
                mid = (lo + hi) / 2
                v = _poly_eval(self.poly, mid)
                if v == 0:
                    chain.append((mid, mid))
                elif (v > 0) == self._lo_positive:
                    chain.append((lo, mid))
                else:
                    chain.append((mid, hi))
            return chain[k]

    # -- element constructors -------------------------------------------------

    def element(self, coeffs: Sequence[Rational]) -> FieldElement:
        vec = [_as_fraction(c) for c in coeffs]
        if len(vec) > self.degree:
            raise ValueError(f"coefficient vector longer than degree {self.degree}")
        vec.extend([Fraction(0)] * (self.degree - len(vec)))
        return FieldElement(self, tuple(vec))

    def zero(self) -> FieldElement:
        return FieldElement(self, (Fraction(0),) * self.degree)

    def one(self) -> FieldElement:
        return self.from_rational(1)

    def from_rational(self, q: Rational) -> FieldElement:
        vec = [Fraction(0)] * self.degree
        vec[0] = _as_fraction(q)
        return FieldElement(self, tuple(vec))

    def rho(self) -> FieldElement:
        if self.degree == 1:
            # x reduced mod (c1*x + c0) is the rational root itself
            return self.from_rational(Fraction(-self.poly[0], self.poly[1]))
        vec = [Fraction(0)] * self.degree
        vec[1] = Fraction(1)
        return FieldElement(self, tuple(vec))

    def inv_rho(self) -> FieldElement:
        """1/rho, read off the defining polynomial: -(sum_{k>=1} c_k rho^(k-1))/c0."""
        c0 = self.poly[0]
        vec = tuple(Fraction(-ck, c0) for ck in self.poly[1:])
        return FieldElement(self, vec)

    def __repr__(self) -> str:
        lo, hi = self.iso
        return f"AlgebraicContext(poly={list(self.poly)}, rho in [{lo}, {hi}])"


def make_context(poly: Sequence[int], iso: tuple[Rational, Rational]) -> AlgebraicContext:
    """Build a Q(rho) context; see :class:`AlgebraicContext` for the contract."""
    return AlgebraicContext(poly, iso)


def _compatible(a: AlgebraicContext, b: AlgebraicContext) -> bool:
    if a is b:
        return True
    # Same polynomial and overlapping brackets pin the same root.
    return a.poly == b.poly and a.iso[0] <= b.iso[1] and b.iso[0] <= a.iso[1]


class FieldElement:
    """An element of Q(rho): rational coordinates against 1, rho, ..., rho^(d-1).

    Instances are immutable.  Equality is exact coordinate equality, which
    under the irreducibility precondition coincides with equality of values.
    """

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: AlgebraicContext, coeffs: tuple[Fraction, ...]):
        self.ctx = ctx
        self.coeffs = coeffs

    def _coerce(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            if not _compatible(self.ctx, other.ctx):
                raise ContextMismatch("operands come from different algebraic contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.ctx, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.ctx, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return FieldElement(self.ctx, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            return FieldElement(self.ctx, tuple(a * q for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self.ctx.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        # Fold degrees >= d back down using x^d = -(c0 + ... + c_{d-1} x^{d-1})/cd.
        poly = self.ctx.poly
        cd = poly[d]
        for i in range(2 * d - 2, d - 1, -1):
            t = prod[i]
            if t:
                for k in range(d):
                    prod[i - d + k] -= t * poly[k] / cd
        return FieldElement(self.ctx, tuple(prod[:d]))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = self.ctx.one()
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ctx.poly == other.ctx.poly and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx.poly, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _hull(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        """Exact enclosure of the value over a root bracket 0 < lo <= hi."""
        acc_lo = Fraction(0)
        acc_hi = Fraction(0)
        plo = Fraction(1)
        phi = Fraction(1)
        for c in self.coeffs:
            if c > 0:
                acc_lo += c * plo
                acc_hi += c * phi
            elif c < 0:
                acc_lo += c * phi
                acc_hi += c * plo
            plo *= lo
            phi *= hi
        return acc_lo, acc_hi

    def sign(self) -> int:
        """-1, 0 or +1; exact under the irreducibility precondition."""
        if self.is_zero():
            return 0
        k = 0
        step = 1
        while k <= _MAX_REFINE:
            lo, hi = self.ctx._refined(k)
            vlo, vhi = self._hull(lo, hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            k += step
            step *= 2
        raise ArithmeticError(
            "sign undecided after maximal refinement; defining polynomial "
            "is probably reducible"
        )

    def to_float(self, abs_err: float = 1e-12) -> float:
        """Float within abs_err of the exact value (abs_err >= ~1e-15 honored)."""
        if abs_err <= 0:
            raise ValueError("abs_err must be positive")
        target = Fraction(abs_err) / 2
        k = 0
        step = 1
        while k <= _MAX_REFINE:
            lo, hi = self.ctx._refined(k)
            vlo, vhi = self._hull(lo, hi)
            if vhi - vlo <= target:
                return float((vlo + vhi) / 2)
            k += step
            step *= 2
        raise ArithmeticError("float conversion did not converge; tolerance too small?")

    def key(self) -> bytes:
        """Canonical byte key: equal keys iff equal elements.

        Coordinates are already in lowest terms with positive denominators
        (Fraction normalizes); each integer is serialized as a sign byte plus
        a length-prefixed big-endian magnitude.
        """
        parts = []
        for c in self.coeffs:
            for v in (c.numerator, c.denominator):
                mag = abs(v)
                body = mag.to_bytes((mag.bit_length() + 7) // 8, "big")
                parts.append(b"-" if v < 0 else b"+")
                parts.append(len(body).to_bytes(4, "big"))
                parts.append(body)
        return b"".join(parts)

    def __repr__(self) -> str:
        return f"FieldElement({[str(c) for c in self.coeffs]})"
