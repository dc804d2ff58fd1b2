"""Truncated univariate power series ("jets") at extended precision.

A :class:`Jet` holds Taylor coefficients ``c[0..N]`` of a function at g = 0.
All arithmetic is carried out in an :class:`mpmath.MPContext` owned by the
jet, so evaluations at different precisions never share mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath


class JetError(ArithmeticError):
    """Singular composition or an invalid jet operation."""


class JetDomainError(JetError, ValueError):
    """Constant term outside the analytic domain of the requested function."""


class JetOrderError(JetError):
    """A derivative was requested beyond the truncation order."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True)
class PrecisionConfig:
    bits: int = 256
    order: int = 64

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError("need at least 64 significand bits")
        if self.order < 2:
            raise ValueError("truncation order must be >= 2")

    def context(self) -> mpmath.ctx_mp.MPContext:
        ctx = mpmath.MPContext()
        ctx.prec = self.bits
        return ctx

    @staticmethod
    def order_for(k_max: int, headroom: int = 2) -> int:
        """Default truncation order 2*k_max + 2 + headroom."""
        return 2 * k_max + 2 + headroom


class Jet:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, coeffs: Sequence, ctx=None, order: int | None = None):
        self.ctx = ctx if ctx is not None else PrecisionConfig().context()
        cs = [self.ctx.convert(c) for c in coeffs]
        if order is not None:
            cs = (cs + [self.ctx.zero] * (order + 1))[: order + 1]
        if not cs:
            raise JetError("a jet needs at least one coefficient")
        self.coeffs = tuple(cs)

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, order: int, ctx) -> "Jet":
        return cls([value], ctx, order)

    @classmethod
    def variable(cls, order: int, ctx) -> "Jet":
        """The identity jet g -> g."""
        return cls([0, 1], ctx, order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        return f"Jet(order={self.order}, coeffs=[{', '.join(mpmath.nstr(c, 8) for c in self.coeffs[:6])}{', ...' if self.order > 5 else ''}])"

    def _like(self, coeffs) -> "Jet":
        out = Jet.__new__(Jet)
        out.ctx = self.ctx
        out.coeffs = tuple(coeffs)
        return out

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise JetError(f"order mismatch: {self.order} vs {other.order}")
            return other
        return Jet.constant(other, self.order, self.ctx)

    # ring operations ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return self._like(a + b for a, b in zip(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-a for a in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = self.ctx.convert(other)
            return self._like(a * c for a in self.coeffs)
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        n = self.order
        fsum = self.ctx.fsum
        return self._like(fsum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n + 1))

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coeffs
        if a[0] == 0:
            raise JetError("division by a jet with zero constant term (singular composition)")
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, self.order + 1):
            out.append(-inv0 * self.ctx.fsum(a[i] * out[k - i] for i in range(1, k + 1)))
        return self._like(out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1 / self.ctx.convert(other))
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise JetError("only nonnegative integer powers are supported")
        result = Jet.constant(1, self.order, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # calculus ------------------------------------------------------------

    def derivative(self) -> "Jet":
        """d/dg; the result has order N - 1."""
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet", required=1)
        return self._like(k * self.coeffs[k] for k in range(1, self.order + 1))

    def antiderivative(self, constant=0) -> "Jet":
        """Integral from 0 plus ``constant``; the result has order N + 1."""
        head = [self.ctx.convert(constant)]
        return self._like(head + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot extend a jet from order {self.order} to {order}", required=order)
        return self._like(self.coeffs[: order + 1])

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
    }
    try:
        return ops[op]()
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None


def _compose(series: Sequence, h: Jet) -> Jet:
    """Horner evaluation of sum_j series[j] h^j for h with zero constant term."""
    acc = Jet.constant(series[-1], h.order, h.ctx)
    for c in reversed(series[:-1]):
        acc = acc * h + c
    return acc


def _taylor_at(fn: str, a0, n: int, ctx) -> list:
    """Taylor coefficients f^{(j)}(a0)/j!, j = 0..n, for the elementary functions."""
    if fn == "exp":
        e = ctx.exp(a0)
        out, term = [], e
        for j in range(n + 1):
            out.append(term)
            term = term / (j + 1)
        return out
    if fn in ("sin", "cos"):
        s, c = ctx.sin(a0), ctx.cos(a0)
        cycle = [s, c, -s, -c] if fn == "sin" else [c, -s, -c, s]
        return [cycle[j % 4] / ctx.factorial(j) for j in range(n + 1)]
    if fn == "log":
        out = [ctx.log(a0)]
        for j in range(1, n + 1):
            out.append((-1) ** (j + 1) / (j * a0**j))
        return out
    if fn == "sqrt":
        r = ctx.sqrt(a0)
        out, binom = [], ctx.one
        for j in range(n + 1):
            out.append(r * binom / a0**j)
            binom = binom * (ctx.mpf(1) / 2 - j) / (j + 1)
        return out
    raise ValueError(f"unsupported function {fn!r}")


_DOMAIN = {
    "sqrt": (lambda c: c > 0, "sqrt needs a positive constant term"),
    "log": (lambda c: c > 0, "log needs a positive constant term"),
    "arcsin": (lambda c: abs(c) < 1, "arcsin needs |constant term| < 1"),
}


def jet_fn(a: Jet, fn: str) -> Jet:
    """Compose an elementary function with a jet, truncated at the jet's order."""
    a0 = a.coeffs[0]
    if fn in _DOMAIN:
        ok, msg = _DOMAIN[fn]
        if isinstance(a0, a.ctx.mpc) or not ok(a0):
            raise JetDomainError(f"{msg}, got {mpmath.nstr(a0, 10)}")
    if fn == "arcsin":
        if a.order == 0:
            return Jet.constant(a.ctx.asin(a0), 0, a.ctx)
        # arcsin(a) = arcsin(a0) + int a' (1 - a^2)^(-1/2)
        lower = a.truncate(a.order - 1)
        integrand = a.derivative() / jet_fn(1 - lower * lower, "sqrt")
        return integrand.antiderivative(a.ctx.asin(a0))
    h = a - a0
    return _compose(_taylor_at(fn, a0, a.order, a.ctx), h)


def odd_quotient(a: Jet) -> Jet:
    """Return a/g for a jet with vanishing constant term; order drops by one."""
    if a.coeffs[0] != 0:
        raise JetError("odd_quotient needs a zero constant term")
    if a.order < 1:
        raise JetOrderError("odd_quotient needs order >= 1", required=1)
    return a._like(a.coeffs[1:])


def derivative_at_zero(a: Jet, n: int):
    """n-th derivative at g = 0, i.e. n! * c[n]."""
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    if n > a.order:
        raise JetOrderError(f"derivative of order {n} exceeds jet order {a.order}", required=n)
    return a.ctx.factorial(n) * a.coeffs[n]


def jet_from_function(fn: Callable[[Jet], Jet], order: int, ctx) -> Jet:
    """Evaluate ``fn`` on the identity jet, giving its Maclaurin jet."""
    return fn(Jet.variable(order, ctx))
