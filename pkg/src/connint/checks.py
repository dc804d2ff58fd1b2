"""The verification suite: ten end-to-end checks with tolerances and time budgets.

Each check returns a :class:`CheckResult` with the worst residual it saw,
the tolerance it was held to and enough detail to diagnose a failure.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import distribution as dist
from . import measure, moments, selfdual, special
from .jets import PrecisionConfig


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    residual: float
    tolerance: float
    runtime: float = 0.0
    time_limit: float = math.inf
    details: dict = field(default_factory=dict)
    message: str = ""

    @property
    def within_time(self) -> bool:
        return self.runtime < self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        timing = f"{self.runtime:.2f}s/{self.time_limit:g}s"
        text = f"[{status}] {self.id:2d} {self.name}: residual {self.residual:.3e} (tol {self.tolerance:.1e}), {timing}"
        return text + (f" | {self.message}" if self.message else "")


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# --- individual checks -----------------------------------------------------------


def check_linear_moments(cfg: PrecisionConfig, seed: int) -> CheckResult:
    expected = [1.0, -4.5, 75.0]
    worst, rows = 0.0, []
    for k, e in enumerate(expected):
        closed = float(moments.moment_closed_form(k, "linear", cfg).to_unit_mass())
        dens = moments.density_moment_quadrature(k, "linear").value
        worst = max(worst, _rel(closed, e), _rel(dens, e))
        rows.append({"k": k, "closed_form": closed, "density_quadrature": dens, "expected": e})
    return CheckResult(1, "linear moment routes agree", worst < 1e-8, worst, 1e-8, details={"rows": rows})


def check_generating_function(cfg: PrecisionConfig, seed: int) -> CheckResult:
    xs = np.linspace(0.01, 0.99, 50)
    res = [abs(moments.generating_function_I(x) - moments.generating_function_I(x, "radial_quadrature")) for x in xs]
    worst = max(res)
    return CheckResult(2, "generating function closed vs radial quadrature", worst < 1e-10, worst, 1e-10,
                       details={"worst_x": float(xs[int(np.argmax(res))])})


def check_table_identities(cfg: PrecisionConfig, seed: int) -> CheckResult:
    gs = np.linspace(-0.95, 0.95, 50)
    worst = {w: max(abs(special.table_identity_residual(g, w)) for g in gs) for w in special.IDENTITIES}
    spot = abs(special.sinh_contact_rhs(0.0) - (math.log(2) - 0.5))
    passed = all(v < 1e-8 for v in worst.values()) and spot < 1e-10
    return CheckResult(3, "integral table identities", passed, max(worst.values()), 1e-8,
                       details={"per_identity": worst, "spot_g0": spot})


def check_arcsin_routes(cfg: PrecisionConfig, seed: int) -> CheckResult:
    worst_jet = max(
        abs(moments.moment_closed_form(k, "arcsin", cfg).value - moments.moment_generic_kind(k, "arcsin", cfg).value)
        for k in range(11)
    )
    closed = [float(moments.moment_closed_form(k, "arcsin", cfg).to_unit_mass()) for k in range(7)]
    dens = [moments.density_moment_quadrature(k, "arcsin").value for k in range(7)]
    const, spread = moments.fit_route_constant(closed, dens)
    passed = worst_jet < 1e-25 and spread < 1e-6
    return CheckResult(
        4, "arcsin moment routes agree", passed, float(worst_jet), 1e-25,
        details={"route_constant": const, "constant_spread": spread, "closed_unit_mass": closed,
                 "density_unit_mass": dens},
        message=f"density/closed constant {const:.12f}, relative spread {spread:.1e} (tol 1e-6)",
    )


def check_decay_rates(cfg: PrecisionConfig, seed: int) -> CheckResult:
    fits = [dist.decay_rate(r, g) for g in (0.5, 1.0, 2.0) for r in ("spacelike", "timelike")]
    model = dist.model_k0_decay()
    worst = max([f.rel_error for f in fits] + [model.rel_error])
    rows = [{"region": f.region, "gamma": f.gamma, "predicted": f.predicted, "fitted": f.fitted} for f in fits]
    rows.append({"region": "spacelike", "gamma": None, "model": "2K0", "predicted": 1.0, "fitted": model.fitted})
    return CheckResult(5, "decay rates of the area density", worst < 0.01, worst, 0.01, details={"fits": rows})


def check_maxima(cfg: PrecisionConfig, seed: int) -> CheckResult:
    cases = [(0.1, "spacelike", lambda n: 0.2 * n), (10.0, "timelike", lambda n: 2.0 * n)]
    worst, found, rows = 0.0, [], []
    for gamma, region, target in cases:
        res = dist.find_local_maxima(gamma, region, 5)
        found.append(len(res.maxima))
        for m in res.maxima:
            dev = _rel(m.location, target(m.index))
            worst = max(worst, dev)
            rows.append({"gamma": gamma, "region": region, "n": m.index, "location": m.location,
                         "expected": target(m.index), "spectrum": m.predicted, "ratio": m.ratio,
                         "prominence": m.prominence})
    passed = worst < 0.02 and all(c == 5 for c in found)
    msg = f"maxima found {found} (need 5 each); ratios to spectrum " + ", ".join(f"{r['ratio']:.4f}" for r in rows)
    return CheckResult(6, "local maxima vs predicted spectrum", passed, worst, 0.02,
                       details={"maxima": rows, "found": found}, message=msg)


def check_euclidean(cfg: PrecisionConfig, seed: int) -> CheckResult:
    fits = [dist.euclidean_decay_rate(g) for g in (0.5, 1.0, 2.0)]
    worst = max(f.rel_error for f in fits)
    # the continued slice coincides with the spacelike Minkowski density pointwise
    slice_dev = max(abs(dist.n0_euclidean(t, t, -1j).real / dist.n0_density(-t * t, 1.0).value - 1)
                    for t in np.linspace(0.1, 10, 25))
    return CheckResult(7, "Euclidean continuation decay", worst < 0.01, worst, 0.01,
                       details={"fitted": [f.fitted for f in fits], "pointwise_slice_deviation": slice_dev})


def check_cutoff_shift(cfg: PrecisionConfig, seed: int) -> CheckResult:
    reports = [moments.cutoff_shift_check(C, 6, cfg) for C in (1.0, -2.5)]
    worst = max(float(r.pattern_residual) for r in reports)
    passed = all(r.passed for r in reports)
    return CheckResult(
        8, "cutoff shift is a pure contact term", passed, worst, 1e-20,
        details={"contact_shift": [r.contact_shift for r in reports],
                 "expected_contact_shift": [r.expected_contact_shift for r in reports],
                 "regular_scale": [r.regular_scale for r in reports],
                 "contact_spread": [r.contact_spread for r in reports]},
    )


def check_measure_scaling(cfg: PrecisionConfig, seed: int) -> CheckResult:
    scans = {n: measure.length_moment_scan(n, seed=seed) for n in (0, 4, 10, 18, 19, 20, 22)}
    worst = max(scans[n].rel_error for n in (0, 4, 10, 18, 22))
    flip = scans[19].convergent and not scans[20].convergent
    return CheckResult(
        9, "flattening exponents and the n < 20 threshold", worst < 0.05 and flip, worst, 0.05,
        details={"exponents": {n: s.exponent for n, s in scans.items()},
                 "verdicts": {n: s.verdict for n, s in scans.items()}},
        message=f"n=19 {scans[19].verdict}, n=20 {scans[20].verdict}",
    )


def check_algebra(cfg: PrecisionConfig, seed: int) -> CheckResult:
    exact = True
    for sign in (1, -1):
        M = selfdual.sigma_mixed(sign)
        for k, l in itertools.product(range(3), repeat=2):
            rhs = -(k == l) * np.eye(4) + np.einsum("m,mab->ab", selfdual.EPS3[k, l], M)
            exact &= bool(np.array_equal(M[k] @ M[l], rhs))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    worst_sd = 0.0
    for _ in range(1000):
        a = rng.standard_normal((4, 4))
        v = a - a.T
        worst_sd = max(worst_sd, float(np.abs(selfdual.recompose(selfdual.selfdual_decompose(v)) - v).max()))
    worst_tri = 0.0
    done = 0
    while done < 1000:
        t = rng.standard_normal((3, 3))
        if abs(measure.triple_product(t)) < 1e-3:
            continue
        back = measure.rebuild_triad(measure.edges_from_triad(t))
        worst_tri = max(worst_tri, float(np.abs(back - measure.orientation(t) * t).max()))
        done += 1
    n0 = abs(dist.n0_density(0.0, 1.0).value - 1 / (4 * math.pi**2))
    worst = max(worst_sd, worst_tri, n0)
    return CheckResult(10, "algebra and round trips", exact and worst < 1e-12, worst, 1e-12,
                       details={"sigma_exact": exact, "selfdual_round_trip": worst_sd,
                                "triad_round_trip": worst_tri, "n0_origin": n0})


CHECKS: dict[int, tuple[Callable[[PrecisionConfig, int], CheckResult], float]] = {
    1: (check_linear_moments, 10.0),
    2: (check_generating_function, 5.0),
    3: (check_table_identities, 30.0),
    4: (check_arcsin_routes, 60.0),
    5: (check_decay_rates, 30.0),
    6: (check_maxima, 10.0),
    7: (check_euclidean, 10.0),
    8: (check_cutoff_shift, 10.0),
    9: (check_measure_scaling, 60.0),
    10: (check_algebra, 10.0),
}


def run_check(i: int, cfg: PrecisionConfig = PrecisionConfig(), seed: int = 42) -> CheckResult:
    try:
        fn, limit = CHECKS[i]
    except KeyError:
        raise ValueError(f"no check with id {i}; valid ids are 1-{len(CHECKS)}") from None
    start = time.perf_counter()
    result = fn(cfg, seed)
    result.runtime = time.perf_counter() - start
    result.time_limit = limit
    return result


def run_checks(ids=None, cfg: PrecisionConfig = PrecisionConfig(), seed: int = 42) -> list[CheckResult]:
    return [run_check(i, cfg, seed) for i in (ids or sorted(CHECKS))]
