"""Moments of the single-triangle connection integral, three ways.

* closed form: derivative formulas in g evaluated with jets,
* generic: the generating function I(x) = pi ln(1 + sqrt(1 - x^2)) composed
  with x(g), multiplied by dx/dg, differentiated 2k + 2 times,
* density quadrature: integrals of the reconstructed radial densities
  (Ki1 kernel for g(x) = x, pi l / sinh(pi l) kernel plus contact terms for
  g(x) = arcsin x).

Closed-form and generic values are "raw" (they carry the factor pi);
density-side values are "unit_mass", where the linear k = 0 moment is 1.
Raw values convert to unit mass by dividing by pi/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import special
from .jets import (
    Jet,
    JetError,
    JetOrderError,
    PrecisionConfig,
    derivative_at_zero,
    jet_fn,
    odd_quotient,
)
from .special import DEFAULT_SPEC, QuadratureSpec

LN2 = math.log(2.0)

# contact-term coefficients of the arcsin density: a f(1) + b f'(1)
ARCSIN_CONTACT_VALUE = 2.0 * LN2 - 4.0
ARCSIN_CONTACT_SLOPE = -4.0


class GKind(enum.Enum):
    LINEAR = "linear"
    ARCSIN = "arcsin"


def x_of_g(kind: GKind | str, order: int, ctx) -> Jet:
    """x(g) as a jet: g itself (linear) or sin g (inverse of arcsin)."""
    kind = GKind(kind)
    g = Jet.variable(order, ctx)
    return g if kind is GKind.LINEAR else jet_fn(g, "sin")


@dataclass(frozen=True)
class MomentResult:
    k: int
    value: object  # mpf for jet routes, float for quadrature
    normalization: str  # "raw" | "unit_mass"
    route: str  # "closed_form" | "generating_function" | "density_quadrature"
    kind: str = ""
    error: float | None = None
    parts: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_unit_mass(self) -> "MomentResult":
        if self.normalization == "unit_mass":
            return self
        scale = 2 / self.value.context.pi if hasattr(self.value, "context") else 2 / math.pi
        return MomentResult(self.k, self.value * scale, "unit_mass", self.route, self.kind, self.error)


def _order(k: int, order: int | None, required: int) -> int:
    if k < 0:
        raise ValueError("moment index k must be nonnegative")
    if order is None:
        return max(PrecisionConfig.order_for(k), required)
    if order < required:
        raise JetOrderError(f"moment k={k} needs jet order {required}, got {order}", required=required)
    return order


# --- generating function ----------------------------------------------------


GF_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)


def generating_function_I(x: float, route: str = "closed", spec: QuadratureSpec = GF_SPEC) -> float:
    """I(x) = pi ln(1 + sqrt(1 - x^2)), or the radial Haar integral it comes from."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"I(x) is defined for 0 <= x <= 1, got {x}")
    if route == "closed":
        return math.pi * math.log1p(math.sqrt(1.0 - x * x))
    if route == "radial_quadrature":
        if x == 1.0:
            return 0.0
        # (1/sqrt(1-r^2) - 1)/r = (1-r)^{-1/2} * r / (sqrt(1+r) (1 + sqrt(1-r^2)))
        def smooth(r):
            return r / (math.sqrt(1.0 + r) * (1.0 + math.sqrt(1.0 - r * r)))

        value, _ = special.quad(smooth, x, 1.0, spec, weight="alg", wvar=(0.0, -0.5))
        return math.pi * value
    raise ValueError(f"unknown route {route!r}")


def generating_function_jet(x: Jet, shift=0) -> Jet:
    """pi ln(1 + sqrt(1 - x^2)) + shift, composed with the jet x (x(0) = 0)."""
    ctx = x.ctx
    return jet_fn(1 + jet_fn(1 - x * x, "sqrt"), "log") * ctx.pi + shift


# --- closed forms -----------------------------------------------------------


def moment_closed_form(
    k: int, kind: GKind | str, config: PrecisionConfig = PrecisionConfig(), order: int | None = None
) -> MomentResult:
    """pi (-1)^{k+1} times a derivative at g = 0 of the kind's closed-form expression.

    linear: (d/dg)^{2k+1} [1/g - 1/(g sqrt(1 - g^2))]
    arcsin: (d/dg)^{2k+2} [cos g ln(1 + cos g)]
    """
    kind = GKind(kind)
    ctx = config.context()
    N = _order(k, order, 2 * k + 2)
    g = Jet.variable(N, ctx)
    if kind is GKind.LINEAR:
        expr = odd_quotient(1 - 1 / jet_fn(1 - g * g, "sqrt"))
        deriv = derivative_at_zero(expr, 2 * k + 1)
    else:
        c = jet_fn(g, "cos")
        deriv = derivative_at_zero(c * jet_fn(1 + c, "log"), 2 * k + 2)
    value = ctx.pi * (-1) ** (k + 1) * deriv
    return MomentResult(k, value, "raw", "closed_form", kind.value)


def _check_odd(x: Jet) -> None:
    ctx = x.ctx
    scale = max(abs(c) for c in x.coeffs)
    tiny = scale * ctx.ldexp(1, -ctx.prec + 8)
    for j in range(0, x.order + 1, 2):
        if abs(x.coeffs[j]) > tiny:
            raise JetError(f"x(g) has a nonzero even coefficient at order {j}")
    if x.order < 1 or x.coeffs[1] == 0:
        raise JetError("x(g) needs x'(0) != 0")


def moment_generic(k: int, x: Jet, shift=0, kind: str = "generic") -> MomentResult:
    """(-1)^{k+1} (d/dg)^{2k+2} [x'(g) (I(x(g)) + shift)] at g = 0."""
    if k < 0:
        raise ValueError("moment index k must be nonnegative")
    _check_odd(x)
    required = 2 * k + 3
    if x.order < required:
        raise JetOrderError(f"moment k={k} needs x(g) to order {required}, got {x.order}", required=required)
    dx = x.derivative()
    integrand = dx * generating_function_jet(x.truncate(x.order - 1), shift)
    value = (-1) ** (k + 1) * derivative_at_zero(integrand, 2 * k + 2)
    return MomentResult(k, value, "raw", "generating_function", kind)


def moment_generic_kind(
    k: int, kind: GKind | str, config: PrecisionConfig = PrecisionConfig(), shift=0, order: int | None = None
) -> MomentResult:
    kind = GKind(kind)
    N = _order(k, order, 2 * k + 3)
    ctx = config.context()
    return moment_generic(k, x_of_g(kind, N, ctx), ctx.convert(shift), kind.value)


# --- density side -----------------------------------------------------------


def _linear_density_integral(k: int, spec: QuadratureSpec) -> tuple[float, float]:
    # int_0^inf Ki1(l) l^{2k+1} dl with Ki1 <= K0 <= sqrt(pi/2l) e^{-l}
    p = 2 * k + 1

    def f(l):
        if l == 0.0:
            return 0.0 if p > 0 else special.ki1(0.0, spec)
        return special.ki1_scaled(l, spec) * math.exp(p * math.log(l) - l)

    bound = special.power_exp_tail(p - 0.5, 1.0, 0.5 * math.log(math.pi / 2))
    return special.semi_infinite(f, bound, spec, start=2 * p + 2.0, points=[1.0, float(p)])


def _arcsin_density_integral(k: int, spec: QuadratureSpec) -> tuple[float, float]:
    # int_0^inf l^{2k+3} / ((l^2 + 1) sinh(pi l)) dl
    p = 2 * k + 2

    def f(l):
        return special.l_over_sinh_pi(l) * l**p / (l * l + 1.0)

    # l/sinh(pi l) <= 2.01 l e^{-pi l} for l >= 1
    bound = special.power_exp_tail(p - 1, math.pi, math.log(2.01))
    return special.semi_infinite(f, bound, spec, start=max(1.0, 2 * p / math.pi + 1.0))


def arcsin_contact(f_at_1: float, df_at_1: float) -> float:
    return ARCSIN_CONTACT_VALUE * f_at_1 + ARCSIN_CONTACT_SLOPE * df_at_1


def density_moment_quadrature(k: int, kind: GKind | str, spec: QuadratureSpec = DEFAULT_SPEC) -> MomentResult:
    """Moment of f(x) = x^k against the reconstructed density, unit-mass convention.

    linear: (1/pi^2) int Ki1(l)/l (-l^2)^k d^3l
    arcsin: (1/pi^2) int pi l/sinh(pi l) (-l^2)^k/(l^2 + 1) d^3l + (2 ln 2 - 4) f(1) - 4 f'(1)
    """
    kind = GKind(kind)
    if k < 0:
        raise ValueError("moment index k must be nonnegative")
    sign = (-1) ** k
    if kind is GKind.LINEAR:
        integral, err = _linear_density_integral(k, spec)
        value = 4.0 / math.pi * sign * integral
        return MomentResult(k, value, "unit_mass", "density_quadrature", kind.value, 4.0 / math.pi * err,
                            {"regular": value, "contact": 0.0})
    integral, err = _arcsin_density_integral(k, spec)
    regular = 4.0 * sign * integral
    contact = arcsin_contact(1.0, float(k))
    return MomentResult(k, regular + contact, "unit_mass", "density_quadrature", kind.value, 4.0 * err,
                        {"regular": regular, "contact": contact})


def fit_route_constant(closed_unit: Sequence[float], density: Sequence[float]) -> tuple[float, float]:
    """Least-squares c with density ~ c * closed; returns (c, max relative deviation of ratios)."""
    u = np.asarray(closed_unit, float)
    d = np.asarray(density, float)
    c = float(u @ d / (u @ u))
    ratios = d / u
    return c, float(np.max(np.abs(ratios - c)) / abs(c))


# --- the functional mu(f) ---------------------------------------------------


@dataclass(frozen=True)
class ProbePolynomial:
    """f(z) = sum_j coeffs[j] z^j in the squared-area variable z = v^2."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs) or (0j,))

    @classmethod
    def monomial(cls, k: int) -> "ProbePolynomial":
        return cls((0,) * k + (1,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> complex:
        return complex(np.polynomial.polynomial.polyval(z, self.coeffs))

    def derivative(self) -> "ProbePolynomial":
        return ProbePolynomial(tuple(np.polynomial.polynomial.polyder(self.coeffs)) or (0,))


@dataclass(frozen=True)
class ContactTerm:
    """A f(z0) + B f'(z0) supported at the nonphysical point z0 = 4 (1 + i/gamma)^{-2}."""

    support: complex
    value_coeff: complex
    slope_coeff: complex

    def __call__(self, f: ProbePolynomial) -> complex:
        return self.value_coeff * f(self.support) + self.slope_coeff * f.derivative()(self.support)


def _check_gamma(gamma: float) -> float:
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")
    return float(gamma)


def contact_term(gamma: float) -> ContactTerm:
    a = 1 + 1j / _check_gamma(gamma)
    pref = 4 * math.pi * a**-3
    return ContactTerm(4 * a**-2, pref * (LN2 - 2), -8 * pref * a**-2)


def mu_integral_term(f: ProbePolynomial, gamma: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Integral part of mu(f) along v = 2 i l / (1 + i/gamma), l >= 0 real.

    On that ray (1/gamma - i) v / 2 = l and d^3v = (2i/(1 + i/gamma))^3 d^3l, so the
    integral reduces to 16 pi (1 + i/gamma)^{-3} int l^3 f(v^2) / ((l^2 + 1) sinh(pi l)) dl.
    """
    a = 1 + 1j / _check_gamma(gamma)
    scale = -4 / a**2  # v^2 = scale * l^2

    def integrand(l):
        return special.l_over_sinh_pi(l) * l * l / (l * l + 1.0) * f(scale * l * l)

    d = f.degree
    log_coef = math.log(2.01 * sum(abs(c) * abs(scale) ** j for j, c in enumerate(f.coeffs)) + 1e-300)
    bound = special.power_exp_tail(2 * d + 2, math.pi, log_coef)
    start = max(1.0, 2 * (2 * d + 2) / math.pi + 1.0)
    re, _ = special.semi_infinite(lambda l: integrand(l).real, bound, spec, start=start)
    im, _ = special.semi_infinite(lambda l: integrand(l).imag, bound, spec, start=start)
    return 16 * math.pi * a**-3 * complex(re, im)


def mu_functional(f: ProbePolynomial, gamma: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """mu(f): the radial integral term plus the contact terms at z0."""
    return mu_integral_term(f, gamma, spec) + contact_term(gamma)(f)


def double_moment(f: ProbePolynomial, h: ProbePolynomial, gamma: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """int N0 f(v^2) h(v^2)^* d^3v d^3v^* = mu(f) mu(h)^*."""
    return mu_functional(f, gamma, spec) * mu_functional(h, gamma, spec).conjugate()


# --- cutoff shift -----------------------------------------------------------


@dataclass
class CutoffShiftReport:
    shift: float
    k_max: int
    deltas: list  # raw moment differences, extended precision
    pattern_residual: object  # max_k |delta_k - shift|
    route_constant: float
    contact_offsets: list  # per-k f(1) contact coefficient needed after the shift
    contact_spread: float
    contact_shift: float
    expected_contact_shift: float
    regular_scale: float  # least-squares weight of the unchanged regular part (1 = unchanged)

    @property
    def passed(self) -> bool:
        return (
            self.pattern_residual < 1e-20
            and self.contact_spread < 1e-6
            and abs(self.contact_shift - self.expected_contact_shift) < 1e-6 * max(1.0, abs(self.expected_contact_shift))
            and abs(self.regular_scale - 1.0) < 1e-6
        )


def cutoff_shift_check(
    C: float,
    k_max: int,
    config: PrecisionConfig = PrecisionConfig(),
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> CutoffShiftReport:
    """Replace I by I + C in the arcsin moments and show the change is a pure contact term.

    The shifted moments differ from the unshifted ones by C for every k (the
    (2k+2)-th derivative of cos g is (-1)^{k+1}).  On the density side the
    regular integrals are reused unchanged; only the f(1) contact coefficient
    has to move, by the same amount for every k.
    """
    ctx = config.context()
    order = PrecisionConfig.order_for(k_max) + 1
    x = x_of_g(GKind.ARCSIN, order, ctx)
    base = [moment_generic(k, x).value for k in range(k_max + 1)]
    shifted = [moment_generic(k, x, ctx.convert(C)).value for k in range(k_max + 1)]
    deltas = [s - b for s, b in zip(shifted, base)]
    residual = max(abs(d - ctx.convert(C)) for d in deltas)

    dens = [density_moment_quadrature(k, GKind.ARCSIN, spec) for k in range(k_max + 1)]
    regular = np.array([d.parts["regular"] for d in dens])
    unit = 2 / ctx.pi
    u0 = np.array([float(b * unit) for b in base])
    u1 = np.array([float(s * unit) for s in shifted])
    kappa, _ = fit_route_constant(u0, [d.value for d in dens])
    ks = np.arange(k_max + 1)

    def offsets(u):
        # kappa u_k = regular_k + a + slope * k  ->  a_k
        return kappa * u - regular - ARCSIN_CONTACT_SLOPE * ks

    a0, a1 = offsets(u0), offsets(u1)
    # regular weight: fit kappa u_k - slope k = rho regular_k + a over k
    design = np.column_stack([regular, np.ones_like(regular)])
    rho, _a = np.linalg.lstsq(design, kappa * u1 - ARCSIN_CONTACT_SLOPE * ks, rcond=None)[0]
    return CutoffShiftReport(
        shift=C,
        k_max=k_max,
        deltas=deltas,
        pattern_residual=residual,
        route_constant=kappa,
        contact_offsets=a1.tolist(),
        contact_spread=float(np.max(a1) - np.min(a1)),
        contact_shift=float(np.mean(a1) - np.mean(a0)),
        expected_contact_shift=float(kappa * C * unit),
        regular_scale=float(rho),
    )
