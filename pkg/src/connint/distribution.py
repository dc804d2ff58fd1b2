"""Area distribution N0 of a single triangle, its Euclidean counterpart,
decay rates, poles, local maxima and the predicted area spectrum.

Everything is built from one amplitude

    F(w) = (w / 2) / ((w^2 + 1) sinh(pi w)),   w = (1/gamma - i) v / 2,

so that N0(v^2) = |F(w)|^2 with v the principal square root of v^2.  F is
even in w.  Its poles sit at w = i n (n >= 1; n = 1 is double), i.e. at
v^2 = 4 n^2 (1 + i/gamma)^{-2}, never on the physical rays Im v^2 = 0.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize, signal

from . import special
from .special import DEFAULT_SPEC, QuadratureSpec

POLE_GUARD = 1e-6  # refuse evaluation closer than this to a pole (distance in v^2)
PROMINENCE_FLOOR = 0.01  # relative height of a maximum over its neighbouring minima


class Region(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NONPHYSICAL = "nonphysical"


class PoleError(ValueError):
    """Evaluation requested on (or within POLE_GUARD of) a pole."""

    def __init__(self, n: int, location: complex, distance: float, index: int | None = None):
        where = f" (entry {index})" if index is not None else ""
        super().__init__(f"v^2 within {distance:.3g} of pole n={n} at {location:.6g}{where}")
        self.n = n
        self.location = location
        self.distance = distance
        self.index = index


class DecayFitError(ValueError):
    pass


@dataclass(frozen=True)
class GammaParam:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < math.inf):
            raise ValueError(f"gamma must satisfy 0 < gamma < inf, got {self.value}")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, gamma) -> "GammaParam":
        return gamma if isinstance(gamma, GammaParam) else cls(gamma)

    @property
    def b(self) -> complex:
        """1/gamma - i, the factor multiplying v in the amplitude."""
        return complex(1.0 / self.value, -1.0)


@dataclass(frozen=True)
class SquaredArea:
    v2: complex

    def __post_init__(self):
        z = complex(self.v2)
        # drop a signed zero so that sqrt(-t^2) is +i t, not -i t
        object.__setattr__(self, "v2", complex(z.real, z.imag if z.imag != 0 else 0.0))

    @classmethod
    def on_ray(cls, modulus: float, region: Region | str) -> "SquaredArea":
        region = Region(region)
        if region is Region.NONPHYSICAL:
            raise ValueError("on_ray needs a physical region")
        if modulus < 0:
            raise ValueError("|v| must be nonnegative")
        sign = -1.0 if region is Region.SPACELIKE else 1.0
        return cls(complex(sign * modulus * modulus, 0.0))

    @property
    def region(self) -> Region:
        if self.v2.imag != 0:
            return Region.NONPHYSICAL
        return Region.SPACELIKE if self.v2.real < 0 else Region.TIMELIKE

    @property
    def v(self) -> complex:
        return cmath.sqrt(self.v2)

    @property
    def modulus(self) -> float:
        return math.sqrt(abs(self.v2))


@dataclass(frozen=True)
class DensityPoint:
    value: float
    log_value: float
    pole_distance: float
    nearest_pole: int
    v2: complex


def pole_location(n: int, gamma) -> complex:
    if n < 1:
        raise ValueError("poles are indexed by n >= 1")
    a = 1 + 1j / GammaParam.of(gamma).value
    return 4 * n * n / (a * a)


def nearest_pole(v2: complex, gamma) -> tuple[int, float]:
    """(n, |v^2 - z_n|) for the pole z_n = n^2 z_1 closest to v2."""
    z1 = pole_location(1, gamma)
    proj = (complex(v2) * z1.conjugate()).real / abs(z1) ** 2
    centre = max(1, int(round(math.sqrt(max(proj, 0.0)))))
    best = min(range(max(1, centre - 2), centre + 3), key=lambda n: abs(v2 - n * n * z1))
    return best, abs(v2 - best * best * z1)


def _amplitude(w: complex) -> complex:
    """F(w) = (w/2) / ((w^2 + 1) sinh(pi w)), finite at w = 0."""
    if w == 0:
        return complex(1.0 / (2.0 * math.pi))
    if w.real < 0:
        w = -w  # F is even
    quad = w * w + 1
    if abs(w) < 1.0:
        return (w / 2) / (quad * cmath.sinh(math.pi * w))
    # 1/sinh(z) = 2 e^{-z} / (1 - e^{-2z}) for Re z >= 0
    return w * cmath.exp(-math.pi * w) / (quad * (1 - cmath.exp(-2 * math.pi * w)))


def _log_abs2_amplitude(w: complex) -> float:
    """log |F(w)|^2 without overflow or underflow at large |w|."""
    if w == 0:
        return -2.0 * math.log(2.0 * math.pi)
    if w.real < 0:
        w = -w
    if abs(w) < 1.0:
        return 2.0 * math.log(abs(_amplitude(w)))
    # log|sinh(x + iy)|^2 = 2x + log((1 - e^{-2x})^2/4 + sin^2(y) e^{-2x}), x >= 0
    x, y = math.pi * w.real, math.pi * w.imag
    e = math.exp(-2.0 * x)
    log_sinh2 = 2.0 * x + math.log((1.0 - e) ** 2 / 4.0 + math.sin(y) ** 2 * e)
    return 2.0 * math.log(abs(w) / 2.0) - 2.0 * math.log(abs(w * w + 1)) - log_sinh2


def _w_of(v2: SquaredArea, gamma: GammaParam) -> complex:
    return gamma.b * v2.v / 2


def _guard(v2: complex, gamma: GammaParam) -> tuple[int, float]:
    n, dist = nearest_pole(v2, gamma)
    if dist < POLE_GUARD:
        raise PoleError(n, pole_location(n, gamma), dist)
    return n, dist


def n0_density(v2, gamma) -> DensityPoint:
    """N0 at a squared area v2 (complex or SquaredArea)."""
    gamma = GammaParam.of(gamma)
    v2 = v2 if isinstance(v2, SquaredArea) else SquaredArea(v2)
    n, dist = _guard(v2.v2, gamma)
    log_value = _log_abs2_amplitude(_w_of(v2, gamma))
    return DensityPoint(math.exp(log_value), log_value, dist, n, v2.v2)


def inverse_amplitude(v2, gamma) -> complex:
    """1/F(w), which vanishes at the poles; evaluated without the pole guard."""
    gamma = GammaParam.of(gamma)
    v2 = v2 if isinstance(v2, SquaredArea) else SquaredArea(v2)
    w = _w_of(v2, gamma)
    if w == 0:
        return complex(2.0 * math.pi)
    return 2 * (w * w + 1) * cmath.sinh(math.pi * w) / w


def n0_euclidean(vplus: float, vminus: float, gamma_e: complex) -> complex:
    """Euclidean density: F((1/gamma_E + 1) v+ / 2) * F((1/gamma_E - 1) v- / 2).

    ``gamma_e`` may be complex (gamma_E = -i gamma continues to Minkowski
    signature), in which case the product is complex off the slice v+ = v-.
    """
    if vplus < 0 or vminus < 0:
        raise ValueError("v+ and v- are moduli and must be nonnegative")
    gamma_e = complex(gamma_e)
    if gamma_e == 0:
        raise ValueError("gamma_E must be nonzero")
    inv = 1 / gamma_e
    out = complex(1.0)
    for c, v in ((inv + 1, vplus), (inv - 1, vminus)):
        w = c * v / 2
        if w != 0:
            n = round(abs(w.imag)) if abs(w.real) < POLE_GUARD else 0
            if n >= 1 and abs(w - 1j * math.copysign(n, w.imag)) < POLE_GUARD:
                raise PoleError(n, w, abs(w - 1j * math.copysign(n, w.imag)))
        out *= _amplitude(w)
    return out


def log_abs_euclidean(vplus: float, vminus: float, gamma_e: complex) -> float:
    """log |n0_euclidean|, stable at large moduli."""
    inv = 1 / complex(gamma_e)
    return 0.5 * (_log_abs2_amplitude((inv + 1) * vplus / 2) + _log_abs2_amplitude((inv - 1) * vminus / 2))


def factorized_density(v2_list: Iterable, gamma) -> float:
    """Product of N0 over several triangles (the fixed-t-like-area special case)."""
    gamma = GammaParam.of(gamma)
    log_total = 0.0
    for i, v2 in enumerate(v2_list):
        try:
            log_total += n0_density(v2, gamma).log_value
        except PoleError as err:
            raise PoleError(err.n, err.location, err.distance, index=i) from None
    return math.exp(log_total)


def log_factorized_density(v2_list: Iterable, gamma) -> float:
    gamma = GammaParam.of(gamma)
    return sum(n0_density(v2, gamma).log_value for v2 in v2_list)


# --- decay rates --------------------------------------------------------------


def _ki1_complex_scaled(w: complex, spec: QuadratureSpec) -> complex:
    # e^w Ki1(w) = int_0^{pi/2} exp(-w (1/sin p - 1)) dp, Re w > 0
    def f(p):
        s = math.sin(p)
        return 0j if s == 0 else cmath.exp(-w * (1.0 / s - 1.0))

    re, _ = special.quad(lambda p: f(p).real, 0.0, math.pi / 2, spec)
    im, _ = special.quad(lambda p: f(p).imag, 0.0, math.pi / 2, spec)
    return complex(re, im)


def log_linear_variant_density(v2, gamma, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """log |Ki1(w)/w|^2: the same continuation applied to the Ki1 kernel of g(x) = x."""
    gamma = GammaParam.of(gamma)
    v2 = v2 if isinstance(v2, SquaredArea) else SquaredArea(v2)
    w = _w_of(v2, gamma)
    if w.real <= 0:
        raise ValueError("the Ki1 continuation needs Re w > 0")
    return 2.0 * (math.log(abs(_ki1_complex_scaled(w, spec))) - w.real - math.log(abs(w)))


@dataclass(frozen=True)
class DecayFit:
    region: str
    gamma: float | None
    variant: str
    predicted: float
    fitted: float
    window: tuple
    samples: int

    @property
    def rel_error(self) -> float:
        return abs(self.fitted - self.predicted) / self.predicted


def fit_log_slope(t: np.ndarray, log_values: np.ndarray) -> float:
    """Decay rate -d log(value)/dt from a least-squares line."""
    if len(t) < 3 or np.ptp(t) <= 0:
        raise DecayFitError("need at least three distinct sample points")
    slope, _ = np.polyfit(t, log_values, 1)
    return -float(slope)


def predicted_rate(region: Region | str, gamma, variant: str = "arcsin") -> float:
    region = Region(region)
    g = GammaParam.of(gamma).value
    base = {"arcsin": math.pi, "linear": 1.0}[variant]
    if region is Region.SPACELIKE:
        return base
    if region is Region.TIMELIKE:
        return base / g
    raise ValueError("decay rates are defined on the physical rays")


def _default_window(region: Region, gamma: float, variant: str) -> tuple[float, float]:
    lo = 5.0 if variant == "arcsin" else 20.0
    if region is Region.TIMELIKE:
        lo *= max(1.0, gamma)
    return lo, 10.0 * lo


def decay_rate(
    region: Region | str,
    gamma,
    variant: str = "arcsin",
    window: tuple[float, float] | None = None,
    samples: int = 101,
    min_width: float = 1.0,
) -> DecayFit:
    """Predicted and fitted exponential decay rate of the density along a physical ray.

    The algebraic prefactor |w / (w^2 + 1)|^2 (arcsin) or |w|^{-3} (linear
    variant) is divided out before the straight-line fit of log(value).
    """
    region = Region(region)
    gamma = GammaParam.of(gamma)
    if variant not in ("arcsin", "linear"):
        raise ValueError(f"unknown variant {variant!r}")
    predicted = predicted_rate(region, gamma, variant)
    lo, hi = window or _default_window(region, gamma.value, variant)
    if hi - lo < min_width or samples < 3:
        raise DecayFitError(f"sampling window [{lo}, {hi}] is too narrow for a fit")
    t = np.linspace(lo, hi, samples)
    logs = np.empty_like(t)
    for i, ti in enumerate(t):
        v2 = SquaredArea.on_ray(ti, region)
        w = _w_of(v2, gamma)
        if variant == "arcsin":
            logs[i] = n0_density(v2, gamma).log_value - 2 * math.log(abs(w) / abs(w * w + 1))
        else:
            logs[i] = log_linear_variant_density(v2, gamma) + 3 * math.log(abs(w))
    return DecayFit(region.value, gamma.value, variant, predicted, fit_log_slope(t, logs), (lo, hi), samples)


def euclidean_decay_rate(gamma, window: tuple[float, float] = (5.0, 50.0), samples: int = 101) -> DecayFit:
    """Decay of the Euclidean density on the slice v+ = v- with gamma_E = -i gamma."""
    g = GammaParam.of(gamma).value
    gamma_e = -1j * g
    inv = 1 / gamma_e
    lo, hi = window
    if hi - lo < 1.0 or samples < 3:
        raise DecayFitError("sampling window too narrow")
    t = np.linspace(lo, hi, samples)
    logs = np.empty_like(t)
    for i, ti in enumerate(t):
        wp, wm = (inv + 1) * ti / 2, (inv - 1) * ti / 2
        pref = math.log(abs(wp) / abs(wp * wp + 1)) + math.log(abs(wm) / abs(wm * wm + 1))
        logs[i] = log_abs_euclidean(ti, ti, gamma_e) - pref
    return DecayFit("spacelike", g, "euclidean", math.pi, fit_log_slope(t, logs), (lo, hi), samples)


def model_k0_decay(window: tuple[float, float] = (10.0, 40.0), samples: int = 61,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> DecayFit:
    """Rate of the boost-integral model 2 K0(|v|), sqrt(pi / 2|v|) prefactor divided out."""
    lo, hi = window
    t = np.linspace(lo, hi, samples)
    logs = np.array([math.log(2 * special.bessel_k0_scaled(x, spec)) - x - 0.5 * math.log(math.pi / (2 * x)) for x in t])
    return DecayFit("spacelike", None, "model_2K0", 1.0, fit_log_slope(t, logs), (lo, hi), samples)


# --- maxima and spectrum ------------------------------------------------------


def predicted_spectrum(gamma, region: Region | str, n: int) -> float:
    """|v| = gamma n (spacelike) or n (timelike)."""
    region = Region(region)
    g = GammaParam.of(gamma).value
    if n < 1:
        raise ValueError("spectrum index n must be >= 1")
    if region is Region.SPACELIKE:
        return g * n
    if region is Region.TIMELIKE:
        return float(n)
    raise ValueError("the spectrum is defined on the physical rays")


@dataclass(frozen=True)
class Maximum:
    location: float
    value: float
    prominence: float  # relative to the peak value
    index: int
    predicted: float
    ratio: float


@dataclass
class MaximaResult:
    gamma: float
    region: str
    maxima: list = field(default_factory=list)
    candidates: int = 0
    diagnostics: str = ""

    @property
    def locations(self) -> list[float]:
        return [m.location for m in self.maxima]


def _oscillation_period(gamma: float, region: Region) -> float:
    # sin^2 of the imaginary part of pi w has period 2 gamma (spacelike) or 2 (timelike) in |v|
    return 2.0 * gamma if region is Region.SPACELIKE else 2.0


def find_local_maxima(
    gamma, region: Region | str, n_max: int, points_per_period: int = 400,
    prominence_floor: float = PROMINENCE_FLOOR,
) -> MaximaResult:
    """Grid scan of log N0 along a physical ray, then golden-section refinement."""
    region = Region(region)
    gamma = GammaParam.of(gamma)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    period = _oscillation_period(gamma.value, region)
    t_max = (n_max + 0.5) * period
    t = np.linspace(0.0, t_max, int((n_max + 0.5) * points_per_period) + 1)

    def logn(x: float) -> float:
        return n0_density(SquaredArea.on_ray(x, region), gamma).log_value

    logs = np.array([logn(x) for x in t])
    peaks, _ = signal.find_peaks(logs)
    result = MaximaResult(gamma.value, region.value, candidates=len(peaks))
    if len(peaks) == 0:
        result.diagnostics = "density is monotone on the scanned ray"
        return result
    prom_log = signal.peak_prominences(logs, peaks)[0]
    rel_prom = -np.expm1(-prom_log)  # (peak - higher base) / peak
    for p, rp in zip(peaks, rel_prom):
        if rp < prominence_floor:
            continue
        res = optimize.minimize_scalar(lambda x: -logn(x), bracket=(t[p - 1], t[p], t[p + 1]), method="golden",
                                       tol=1e-10)
        k = len(result.maxima) + 1
        pred = predicted_spectrum(gamma, region, k)
        result.maxima.append(Maximum(float(res.x), math.exp(-res.fun), float(rp), k, pred, float(res.x) / pred))
        if len(result.maxima) == n_max:
            break
    if not result.maxima:
        result.diagnostics = f"{len(peaks)} candidate maxima, none above relative prominence {prominence_floor}"
    return result


def min_pole_distance_on_ray(gamma, region: Region | str, t_max: float, samples: int = 2001) -> float:
    region = Region(region)
    return min(nearest_pole(SquaredArea.on_ray(t, region).v2, gamma)[1] for t in np.linspace(0, t_max, samples))
