"""Triad Gram determinants, measure weights, edge reconstruction and the
flattening scan for edge-length moments.

A triad is a 3x3 array whose rows are the area vectors v_1, v_2, v_3 of the
three triangles sharing a vertex of a tetrahedron (real time-gauge form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEGENERACY_RTOL = 64 * np.finfo(float).eps  # relative triple product treated as zero
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
WEIGHT_EXPONENTS = (1.5, 4.5)


class DegenerateTriadError(ValueError):
    pass


def as_triad(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"a triad is three 3-vectors, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("triad entries must be finite")
    return arr


def triple_product(t) -> float:
    t = as_triad(t)
    return float(np.dot(np.cross(t[0], t[1]), t[2]))


@dataclass(frozen=True)
class TriadGram:
    G: np.ndarray
    det: float


def triad_gram(t) -> TriadGram:
    """G = v_a . v_b; det computed as the squared triple product (exact zero when coplanar)."""
    t = as_triad(t)
    return TriadGram(t @ t.T, triple_product(t) ** 2)


def measure_weight(t, exponent: float) -> float:
    """|det G|^exponent for exponent 3/2 or 9/2."""
    if float(exponent) not in WEIGHT_EXPONENTS:
        raise ValueError(f"exponent must be one of {WEIGHT_EXPONENTS}, got {exponent}")
    # |det|^{e} = |triple|^{2e}: avoids squaring before the power
    return abs(triple_product(t)) ** (2 * float(exponent))


def _check_nondegenerate(t: np.ndarray) -> float:
    triple = triple_product(t)
    scale = np.prod(np.linalg.norm(t, axis=1))
    if scale == 0 or abs(triple) <= DEGENERACY_RTOL * scale:
        raise DegenerateTriadError("triad is coplanar (det G = 0); edges are not defined")
    return triple


def edges_from_triad(t) -> np.ndarray:
    """l_a = sqrt(2) v_b x v_c / |det G|^{1/4} for cyclic (a, b, c); rows are edges."""
    t = as_triad(t)
    triple = _check_nondegenerate(t)
    root4 = math.sqrt(abs(triple))  # |det|^{1/4}
    return np.array([math.sqrt(2.0) * np.cross(t[b], t[c]) / root4 for _, b, c in CYCLIC])


def rebuild_triad(edges) -> np.ndarray:
    """v_a = (1/2) l_b x l_c for cyclic (a, b, c)."""
    l = as_triad(edges)
    return np.array([0.5 * np.cross(l[b], l[c]) for _, b, c in CYCLIC])


def orientation(t) -> int:
    """Sign picked up by the triad -> edges -> triad round trip."""
    return 1 if triple_product(t) > 0 else -1


def flatness_residual(t) -> float:
    """|l_1 x l_2 . l_3| - 2 sqrt(2) |det G|^{1/4} for the reconstructed edges."""
    l = edges_from_triad(t)
    return abs(triple_product(l)) - 2.0 * math.sqrt(2.0) * math.sqrt(abs(triple_product(t)))


def edge_lengths(t) -> np.ndarray:
    return np.linalg.norm(edges_from_triad(t), axis=1)


# --- invariance of the delta factors ------------------------------------------

_SYM_INDEX = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


def _sym_from_vec(x: np.ndarray) -> np.ndarray:
    X = np.zeros((3, 3))
    for val, (i, j) in zip(x, _SYM_INDEX):
        X[i, j] = X[j, i] = val
    return X


def _vec_from_sym(X: np.ndarray) -> np.ndarray:
    return np.array([X[i, j] for i, j in _SYM_INDEX])


def congruence_jacobian(A, h: float = 1e-6) -> float:
    """det of d(A X A^T)/dX on symmetric 3x3 matrices, by central differences."""
    A = np.asarray(A, float)
    J = np.empty((6, 6))
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        plus = _vec_from_sym(A @ _sym_from_vec(e) @ A.T)
        minus = _vec_from_sym(A @ _sym_from_vec(-e) @ A.T)
        J[:, k] = (plus - minus) / (2 * h)
    return float(np.linalg.det(J))


@dataclass(frozen=True)
class ScalingReport:
    det_A: float
    gram_ratio: float  # det G(Av) / det G(v)
    expected_gram_ratio: float  # (det A)^2
    jacobian: float  # finite-difference Jacobian of X -> A X A^T
    expected_jacobian: float  # (det A)^4
    cancellation: float  # gram_ratio^2 / jacobian, 1 when the factors compensate

    def passed(self, rtol: float = 1e-8) -> bool:
        return (
            abs(self.gram_ratio / self.expected_gram_ratio - 1) < rtol
            and abs(self.jacobian / self.expected_jacobian - 1) < rtol
            and abs(self.cancellation - 1) < rtol
        )


def delta_factor_scaling_check(A, t) -> ScalingReport:
    """Check that det(G)^2 and the 6-dim delta function scale oppositely under v -> A v."""
    A = np.asarray(A, float)
    if A.shape != (3, 3):
        raise ValueError("A must be 3x3")
    det_A = float(np.linalg.det(A))
    if abs(det_A) <= 1e-12 * max(1.0, np.linalg.norm(A) ** 3):
        raise ValueError("A is singular")
    t = as_triad(t)
    # (A v)_a = A_a^b v_b mixes the triangles, i.e. acts on the rows
    ratio = triad_gram(A @ t).det / triad_gram(t).det
    jac = congruence_jacobian(A)
    return ScalingReport(det_A, ratio, det_A**2, jac, det_A**4, ratio**2 / jac)


# --- flattening scan ------------------------------------------------------------


@dataclass
class ScanResult:
    n: int
    exponent: float
    predicted: float
    verdict: str  # convergent | marginal | divergent
    eps: np.ndarray = field(repr=False)
    log_integrand: np.ndarray = field(repr=False)

    @property
    def convergent(self) -> bool:
        return self.verdict == "convergent"

    @property
    def rel_error(self) -> float:
        return abs(self.exponent - self.predicted) / max(abs(self.predicted), 1.0)


def flattening_family(seed: int):
    """Base configuration: v1, v2, in-plane coefficients (a, b) and the unit normal."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    v1, v2 = rng.standard_normal(3), rng.standard_normal(3)
    a, b = rng.uniform(-1, 1, 2)
    normal = np.cross(v1, v2)
    normal /= np.linalg.norm(normal)
    return v1, v2, a, b, normal


def flattened_triad(base, eps: float) -> np.ndarray:
    v1, v2, a, b, normal = base
    return np.array([v1, v2, a * v1 + b * v2 + eps * normal])


def length_moment_scan(
    n: int, decades: int = 10, samples_per_decade: int = 8, seed: int = 0, verdict_tol: float = 0.05
) -> ScanResult:
    """Fit the power p in |det G|^{9/2} max|l|^n ~ eps^p along a flattening family.

    The eps -> 0 end of the integral converges iff p > -1.  A fitted p within
    ``verdict_tol`` of -1 is reported as marginal, which is not convergent.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if decades < 1 or samples_per_decade < 1 or decades * samples_per_decade < 3:
        raise ValueError("need at least three samples over at least one decade")
    base = flattening_family(seed)
    streams = np.random.SeedSequence(seed).spawn(decades)
    eps_all, logs = [], []
    for j, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        # decade j covers eps in [1e-(j+3), 1e-(j+2)]
        exps = -(j + 2) - rng.uniform(0, 1, samples_per_decade)
        for e in np.sort(exps):
            eps = 10.0**e
            t = flattened_triad(base, eps)
            log_w = 4.5 * math.log(triad_gram(t).det)
            log_l = math.log(edge_lengths(t).max())
            eps_all.append(eps)
            logs.append(log_w + n * log_l)
    eps_arr, log_arr = np.array(eps_all), np.array(logs)
    p = float(np.polyfit(np.log(eps_arr), log_arr, 1)[0])
    if p > -1 + verdict_tol:
        verdict = "convergent"
    elif p >= -1 - verdict_tol:
        verdict = "marginal"
    else:
        verdict = "divergent"
    return ScanResult(n, p, 9.0 - n / 2.0, verdict, eps_arr, log_arr)
