"""Growth functions ``N -> R_{>=0}`` with exact comparisons.

Targets such as ``sqrt(n)`` or ``log_2(n)`` are irrational, so functions do
not return values; they answer ``compare(n, q)``, the exact sign of
``f(n) - q`` for a rational ``q``.  ``approx`` exists only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError

_MAX_DENOMINATOR = 10_000
_MAX_RUNNING_SCAN = 1_000_000


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


class GrowthFunction:
    """Base class.  Subclasses set the certificate flags they can justify."""

    monotone = False      # non-decreasing
    sublinear = False     # f(n)/n -> 0
    unbounded = False     # f(n) -> infinity

    def compare(self, n: int, q) -> int:
        raise NotImplementedError

    def exact(self, n: int) -> Fraction | None:
        return None

    def approx(self, n: int) -> float:
        raise NotImplementedError

    def at_least(self, n: int, q) -> bool:
        return self.compare(n, q) >= 0

    def below(self, n: int, q) -> bool:
        """``f(n) < q``."""
        return self.compare(n, q) < 0

    def bounded_above(self) -> Fraction | None:
        """A finite supremum when one is known, else ``None``."""
        return None

    def describe(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{self.describe()}>"


@dataclass(frozen=True, repr=False)
class Power(GrowthFunction):
    """``(coeff * n^num)^(1/den)``; plain ``n^alpha`` has ``coeff = 1``."""

    num: int
    den: int = 1
    coeff: Fraction = Fraction(1)

    def __post_init__(self):
        if self.num < 0 or self.den < 1:
            raise InputError("power exponent must be a non-negative rational")
        object.__setattr__(self, "coeff", _frac(self.coeff))
        if self.coeff < 0:
            raise InputError("power coefficient must be non-negative")

    @classmethod
    def of(cls, alpha, coeff=1) -> "Power":
        a = _frac(alpha)
        return cls(a.numerator, a.denominator, _frac(coeff))

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def monotone(self):
        return True

    @property
    def sublinear(self):
        return self.num < self.den or self.coeff == 0

    @property
    def unbounded(self):
        return self.num > 0 and self.coeff > 0

    def compare(self, n, q):
        q = _frac(q)
        if q < 0:
            return 1
        # coeff * n^num  vs  q^den
        lhs = self.coeff.numerator * n ** self.num * q.denominator ** self.den
        rhs = q.numerator ** self.den * self.coeff.denominator
        return _sign(lhs - rhs)

    def exact(self, n):
        v = self.coeff * Fraction(n) ** self.num
        root_n = _int_root(v.numerator, self.den)
        root_d = _int_root(v.denominator, self.den)
        if root_n is None or root_d is None:
            return None
        return Fraction(root_n, root_d)

    def approx(self, n):
        if self.coeff == 0:
            return 0.0
        return math.exp((math.log(self.coeff) + self.num * math.log(n)) / self.den)

    def describe(self):
        a = f"{self.num}/{self.den}" if self.den != 1 else f"{self.num}"
        if self.coeff == 1:
            return f"power:{a}"
        return f"root{self.den}({self.coeff}*n^{self.num})"


def _int_root(x: int, k: int) -> int | None:
    if x < 0:
        return None
    r = int(round(x ** (1.0 / k))) if x < 2 ** 1000 else _iroot(x, k)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == x:
            return cand
    r = _iroot(x, k)
    return r if r ** k == x else None


def _iroot(x: int, k: int) -> int:
    if x < 2:
        return x
    hi = 1 << ((x.bit_length() + k - 1) // k)
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** k <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True, repr=False)
class Logarithm(GrowthFunction):
    """``log_base(n)``."""

    base: Fraction = Fraction(2)
    monotone = True
    sublinear = True
    unbounded = True

    def __post_init__(self):
        object.__setattr__(self, "base", _frac(self.base))
        if self.base <= 1:
            raise InputError("logarithm base must exceed 1")

    def compare(self, n, q):
        q = _frac(q)
        if q < 0:
            return 1
        u, v = q.numerator, q.denominator
        if v > _MAX_DENOMINATOR:
            raise InputError("threshold denominator too large for exact logarithm comparison")
        b = self.base
        # log_b(n) vs u/v  <=>  n^v vs b^u
        return _sign(n ** v * b.denominator ** u - b.numerator ** u)

    def exact(self, n):
        b = self.base
        if b.denominator != 1:
            return None
        e, m = 0, n
        while m > 1 and m % b.numerator == 0:
            m //= b.numerator
            e += 1
        return Fraction(e) if m == 1 else None

    def approx(self, n):
        return math.log(n) / math.log(self.base)

    def describe(self):
        return f"log:{self.base}"


@dataclass(frozen=True, repr=False)
class Table(GrowthFunction):
    """Explicit values ``f(1), ..., f(L)``.

    Beyond ``L`` the last value is repeated, unless ``extend`` is false, in
    which case evaluation past the table is an error.
    """

    values: tuple[Fraction, ...]
    extend: bool = True

    def __post_init__(self):
        if not self.values:
            raise InputError("table needs at least one value")
        vals = tuple(_frac(v) for v in self.values)
        if any(v < 0 for v in vals):
            raise InputError("growth values must be non-negative")
        object.__setattr__(self, "values", vals)

    def value(self, n: int) -> Fraction:
        if n < 1:
            raise InputError("growth functions are defined on positive integers")
        if n > len(self.values):
            if not self.extend:
                raise InputError(f"table defined only up to {len(self.values)}")
            return self.values[-1]
        return self.values[n - 1]

    @property
    def monotone(self):
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    def compare(self, n, q):
        return _sign(self.value(n) - _frac(q))

    def exact(self, n):
        return self.value(n)

    def approx(self, n):
        return float(self.value(n))

    def bounded_above(self):
        return max(self.values) if self.extend else None

    def describe(self):
        return "table:" + ",".join(str(v) for v in self.values)


@dataclass(frozen=True, repr=False)
class Scaled(GrowthFunction):
    """``c * inner(n)`` with rational ``c >= 0``."""

    c: Fraction
    inner: GrowthFunction

    def __post_init__(self):
        object.__setattr__(self, "c", _frac(self.c))
        if self.c < 0:
            raise InputError("scale must be non-negative")

    @property
    def monotone(self):
        return self.inner.monotone

    @property
    def sublinear(self):
        return self.inner.sublinear

    @property
    def unbounded(self):
        return self.inner.unbounded and self.c > 0

    def compare(self, n, q):
        q = _frac(q)
        if self.c == 0:
            return _sign(-q)
        return self.inner.compare(n, q / self.c)

    def exact(self, n):
        v = self.inner.exact(n)
        return None if v is None else self.c * v

    def approx(self, n):
        return float(self.c) * self.inner.approx(n)

    def bounded_above(self):
        b = self.inner.bounded_above()
        return None if b is None else self.c * b

    def describe(self):
        return f"scaled:{self.c}:{self.inner.describe()}"


@dataclass(frozen=True, repr=False)
class RunningMax(GrowthFunction):
    """``max(g(1), ..., g(n))`` for an inner function with no closed form."""

    inner: GrowthFunction
    monotone = True

    @property
    def sublinear(self):
        return self.inner.sublinear

    @property
    def unbounded(self):
        return self.inner.unbounded

    def compare(self, n, q):
        if n > _MAX_RUNNING_SCAN:
            raise InputError("running maximum would scan too many values")
        return max(self.inner.compare(m, q) for m in range(1, n + 1))

    def approx(self, n):
        return max(self.inner.approx(m) for m in range(1, min(n, _MAX_RUNNING_SCAN) + 1))

    def describe(self):
        return f"runmax({self.inner.describe()})"


@dataclass(frozen=True, repr=False)
class LogRatioEnvelope(GrowthFunction):
    """``n * sup_{m>=n} log_b(m)/m``: the ratio peaks at ``m = 3`` and decreases after."""

    inner: Logarithm
    monotone = True
    sublinear = True
    unbounded = True

    def compare(self, n, q):
        if n >= 3:
            return self.inner.compare(n, q)
        return self.inner.compare(3, _frac(q) * 3 / n)

    def approx(self, n):
        return self.inner.approx(n) if n >= 3 else n * self.inner.approx(3) / 3

    def describe(self):
        return f"ratioenv({self.inner.describe()})"


def monotone_increasing_envelope(g: GrowthFunction) -> GrowthFunction:
    """``n -> max(g(1), ..., g(n))``.

    Returns ``g`` itself when it is already monotone; tables get their
    running maximum materialized.  A ratio ``g(n)/n -> 0`` carries over.
    """
    if g.monotone:
        return g
    if isinstance(g, Table):
        vals, best = [], None
        for v in g.values:
            best = v if best is None or v > best else best
            vals.append(best)
        return Table(tuple(vals), g.extend)
    if isinstance(g, Scaled):
        return Scaled(g.c, monotone_increasing_envelope(g.inner))
    return RunningMax(g)


def ratio_decreasing_envelope(f: GrowthFunction, horizon: int | None = None) -> GrowthFunction:
    """``n -> n * sup{f(m)/m : m >= n}``.

    Closed forms for powers (ratio already non-increasing) and logarithms.
    Tables need a finite ``horizon``; the supremum is taken over
    ``n <= m <= horizon`` and the result is defined only up to ``horizon``.
    """
    if isinstance(f, Power):
        if not f.sublinear:
            raise InputError("f(n)/n does not tend to 0; the supremum is infinite")
        return f
    if isinstance(f, Logarithm):
        return LogRatioEnvelope(f)
    if isinstance(f, Scaled):
        return Scaled(f.c, ratio_decreasing_envelope(f.inner, horizon))
    if isinstance(f, Table):
        if horizon is None:
            raise InputError("a table function needs a horizon for the ratio envelope")
        ratios = [f.value(m) / m for m in range(1, horizon + 1)]
        out, best = [], Fraction(0)
        for m in range(horizon, 0, -1):
            best = max(best, ratios[m - 1])
            out.append(m * best)
        return Table(tuple(reversed(out)), extend=False)
    raise InputError(f"no ratio envelope available for {f.describe()}")


def parse_growth(spec: str) -> GrowthFunction:
    """Parse ``power:1/2``, ``log:2``, ``table:1,5,2``, ``const:7`` or ``scaled:3:<spec>``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "power":
            return Power.of(rest)
        if kind in ("log", "logarithm"):
            return Logarithm(_frac(rest or 2))
        if kind == "table":
            return Table(tuple(Fraction(v) for v in rest.split(",")))
        if kind == "const":
            return Table((Fraction(rest),))
        if kind == "scaled":
            c, _, inner = rest.partition(":")
            return Scaled(Fraction(c), parse_growth(inner))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad growth function {spec!r}: {exc}") from None
    raise InputError(f"unknown growth function kind {kind!r}")


def growth_values(f: GrowthFunction, ns: Sequence[int]) -> list[Fraction | None]:
    return [f.exact(n) for n in ns]
