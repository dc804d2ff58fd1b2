"""K0, Ki1 and the two integral-table identities, computed from their
defining integrals.

Quadrature is adaptive (QUADPACK via :func:`scipy.integrate.quad`) on a
finite interval; semi-infinite integrals are truncated where an analytic
tail bound drops below the tolerance.  Exponentially small values are
handled in scaled form (``e^x K0(x)``, ``e^x Ki1(x)``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    limit: int = 400
    tail_fraction: float = 0.1  # share of abs_tol granted to the discarded tail

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.limit < 1:
            raise ValueError("limit must be positive")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol / 2, self.rel_tol / 2, self.limit, self.tail_fraction)


DEFAULT_SPEC = QuadratureSpec()


def quad(f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC, **kw) -> tuple[float, float]:
    """Adaptive quadrature on [a, b]; raises QuadratureError when QUADPACK gives up."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit, full_output=1, **kw
        )
    value, err = out[0], out[1]
    if len(out) > 3:
        tol = max(spec.abs_tol, spec.rel_tol * abs(value))
        # ier 2 (roundoff) with an error estimate inside tolerance is still a success
        if err > 10 * tol:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {out[3]}")
    return value, err


def tail_cutoff(log_tail_bound: Callable[[float], float], tol: float, start: float) -> float:
    """Smallest L >= start (to bisection accuracy) with log_tail_bound(L) <= log(tol).

    ``log_tail_bound`` must be decreasing on [start, inf).
    """
    target = math.log(tol)
    if log_tail_bound(start) <= target:
        return start
    hi = max(2.0 * start, start + 1.0)
    while log_tail_bound(hi) > target:
        hi *= 2.0
        if hi > 1e8:
            raise QuadratureError("no truncation point found for the tail bound")
    return optimize.brentq(lambda L: log_tail_bound(L) - target, start, hi, xtol=1e-8)


def semi_infinite(
    f: Callable[[float], float],
    log_tail_bound: Callable[[float], float],
    spec: QuadratureSpec = DEFAULT_SPEC,
    a: float = 0.0,
    start: float | None = None,
    points=None,
) -> tuple[float, float]:
    """Integral of f over [a, inf) as quad over [a, L] plus the tail bound at L."""
    tail_tol = spec.tail_fraction * spec.abs_tol
    L = tail_cutoff(log_tail_bound, tail_tol, a + 1.0 if start is None else start)
    pts = None if points is None else [p for p in points if a < p < L]
    value, err = quad(f, a, L, spec, points=pts or None)
    return value, err + math.exp(log_tail_bound(L))


def power_exp_tail(power: float, rate: float, log_coef: float = 0.0) -> Callable[[float], float]:
    """Log of a bound on int_L^inf c l^power e^{-rate l} dl, valid for L > power / rate."""

    def bound(L: float) -> float:
        return log_coef + power * math.log(L) - rate * L - math.log(rate - power / L)

    return bound


# --- K0 ---------------------------------------------------------------------


def _cosh_tail(x: float) -> Callable[[float], float]:
    # int_H^inf exp(-x (cosh t - 1)) dt <= exp(-x (cosh H - 1)) / (x sinh H)
    def bound(H: float) -> float:
        return -x * (math.cosh(H) - 1.0) - math.log(x * math.sinh(H))

    return bound


def bessel_k0_scaled(x: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """e^x K0(x) from int_0^inf exp(-x (cosh t - 1)) dt."""
    if not x > 0:
        raise ValueError(f"K0 needs x > 0, got {x}")
    start = max(1.0, math.acosh(1.0 + 1.0 / x))
    value, _ = semi_infinite(lambda t: math.exp(-x * (math.cosh(t) - 1.0)), _cosh_tail(x), spec, start=start)
    return value


def bessel_k0(x: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return bessel_k0_scaled(x, spec) * math.exp(-x)


# --- Ki1 --------------------------------------------------------------------

KI1_CROSSOVER = 1.0


def _ki1_phi_form(x: float, spec: QuadratureSpec) -> float:
    # int_0^{pi/2} exp(-x / sin p) dp, bounded integrand
    def f(p):
        s = math.sin(p)
        if s == 0.0:
            return 1.0 if x == 0.0 else 0.0
        return math.exp(-x / s)

    value, _ = quad(f, 0.0, math.pi / 2, spec)
    return value


def _ki1_eta_form_scaled(x: float, spec: QuadratureSpec) -> float:
    # e^x int_0^inf exp(-x cosh t) / cosh t dt
    start = max(1.0, math.acosh(1.0 + 1.0 / x))
    value, _ = semi_infinite(
        lambda t: math.exp(-x * (math.cosh(t) - 1.0)) / math.cosh(t), _cosh_tail(x), spec, start=start
    )
    return value


def ki1_scaled(x: float, spec: QuadratureSpec = DEFAULT_SPEC, form: str | None = None) -> float:
    """e^x Ki1(x).  ``form`` forces 'phi' or 'eta'; by default phi below x = 1."""
    if x < 0:
        raise ValueError(f"Ki1 needs x >= 0, got {x}")
    form = form or ("phi" if x < KI1_CROSSOVER else "eta")
    if form == "phi":
        return _ki1_phi_form(x, spec) * math.exp(x)
    if form == "eta":
        if x == 0:
            raise ValueError("the eta form of Ki1 needs x > 0")
        return _ki1_eta_form_scaled(x, spec)
    raise ValueError(f"unknown Ki1 form {form!r}")


def ki1(x: float, spec: QuadratureSpec = DEFAULT_SPEC, form: str | None = None) -> float:
    """Ki1(x) = int_x^inf K0; Ki1(0) = pi/2."""
    form = form or ("phi" if x < KI1_CROSSOVER else "eta")
    if form == "phi":
        if x < 0:
            raise ValueError(f"Ki1 needs x >= 0, got {x}")
        return _ki1_phi_form(x, spec)
    return ki1_scaled(x, spec, form) * math.exp(-x)


# --- hyperbolic helpers -----------------------------------------------------


def l_over_sinh_pi(l: float) -> float:
    """l / sinh(pi l) with its limit 1/pi at l = 0; stable for large l."""
    if l == 0.0:
        return 1.0 / math.pi
    # 2 l e^{-pi l} / (1 - e^{-2 pi l})
    return -2.0 * l * math.exp(-math.pi * l) / math.expm1(-2.0 * math.pi * l)


# --- table identities -------------------------------------------------------


def sech_k0_lhs(g: float) -> float:
    return 1.0 / math.sqrt(1.0 - g * g)


def sech_k0_rhs(g: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """(2/pi) int_0^inf cosh(g l) K0(l) dl by nested quadrature."""
    if not abs(g) < 1:
        raise ValueError(f"the K0 identity needs |g| < 1, got {g}")
    gap = 1.0 - abs(g)

    def f(l):
        if l == 0.0:
            return 0.0  # log singularity, never sampled by QAGS
        k0s = bessel_k0_scaled(l, spec)
        return 0.5 * k0s * (math.exp(-(1.0 - g) * l) + math.exp(-(1.0 + g) * l))

    # K0(l) <= sqrt(pi / (2 l)) e^{-l}
    def bound(L):
        return 0.5 * math.log(math.pi / (2 * L)) - gap * L - math.log(gap)

    value, _ = semi_infinite(f, bound, spec, points=[1.0, 10.0])
    return 2.0 / math.pi * value


def sinh_contact_lhs(g: float) -> float:
    c = math.cos(g)
    return 0.5 * g * math.sin(g) - 0.5 + 0.5 * c * math.log(2.0 * (1.0 + c))


def sinh_contact_rhs(g: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """int_0^inf l/(l^2 + 1) cosh(g l)/sinh(pi l) dl."""
    if not abs(g) < math.pi:
        raise ValueError(f"the sinh identity needs |g| < pi, got {g}")
    gap = math.pi - abs(g)

    def f(l):
        # cosh(g l)/sinh(pi l) = 2 cosh(g l) e^{-pi l} / (1 - e^{-2 pi l})
        return l_over_sinh_pi(l) * 0.5 * (math.exp(g * l) + math.exp(-g * l)) / (l * l + 1.0)

    # for L >= 1: l/sinh(pi l) <= 2.01 l e^{-pi l}
    def bound(L):
        return math.log(2.01) - gap * L - math.log(L * gap)

    value, _ = semi_infinite(f, bound, spec)
    return value


IDENTITIES = {
    "sech_K0": (sech_k0_lhs, sech_k0_rhs, 1.0),
    "sinh_contact": (sinh_contact_lhs, sinh_contact_rhs, math.pi),
}


def table_identity_residual(g: float, which: str, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """LHS - RHS of one of the two table identities, RHS by quadrature."""
    try:
        lhs, rhs, bound = IDENTITIES[which]
    except KeyError:
        raise ValueError(f"unknown identity {which!r}; choose from {sorted(IDENTITIES)}") from None
    if not abs(g) < bound:
        raise ValueError(f"{which} needs |g| < {bound:g}, got {g}")
    return lhs(g) - rhs(g, spec)


def k0_grid(xs: np.ndarray, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    return np.array([bessel_k0(float(x), spec) for x in xs])
