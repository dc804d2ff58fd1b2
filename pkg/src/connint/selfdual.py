"""Self-dual / anti-self-dual split of area tensors.

Conventions: metric diag(-1, 1, 1, 1), eps^{0123} = +1 (so eps_{0123} = -1)
and eps_{123} = +1 for the spatial Levi-Civita symbol.  Area tensors are
passed with upper indices, ``v[a, b] = v^{ab}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inversions = sum(
            1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


EPS3 = _levi_civita(3)
EPS4_UP = _levi_civita(4)  # eps^{abcd}
EPS4_DOWN = -EPS4_UP  # eps_{abcd}, lowered with det(g) = -1
EPS4_MIXED = np.einsum("abef,ec,fd->abcd", EPS4_UP, METRIC, METRIC)  # eps^{ab}_{cd}


class AntisymmetryError(ValueError):
    """Raised when an area tensor is not antisymmetric."""


@dataclass(frozen=True)
class AreaVector:
    """The pair of complex 3-vectors (+v, -v) carried by an area tensor."""

    plus: np.ndarray
    minus: np.ndarray

    def square(self, sign: int = 1) -> complex:
        """Return the complex square +v.+v (sign=1) or -v.-v (sign=-1)."""
        vec = self.plus if sign > 0 else self.minus
        return complex(vec @ vec)


def _generators() -> tuple[np.ndarray, np.ndarray]:
    E = np.zeros((3, 4, 4))
    L = np.zeros((3, 4, 4))
    for k in range(3):
        E[k, 1:, 1:] = -EPS3[k]
        kk = k + 1
        for a in range(4):
            for b in range(4):
                L[k, a, b] = METRIC[kk, a] * METRIC[0, b] - METRIC[0, a] * METRIC[kk, b]
    return E, L


E_GEN, L_GEN = _generators()


def sigma(sign: int) -> np.ndarray:
    """Return the three matrices +-Sigma_{kab} (all indices down), shape (3, 4, 4)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return E_GEN + sign * 1j * L_GEN


def sigma_mixed(sign: int) -> np.ndarray:
    """+-Sigma^a_{kb}: first 4-index raised, suitable for matrix products."""
    return np.einsum("ac,kcb->kab", np.linalg.inv(METRIC), sigma(sign))


def check_antisymmetric(v: np.ndarray, atol: float = 0.0) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (4, 4):
        raise AntisymmetryError(f"area tensor must be 4x4, got shape {v.shape}")
    if not np.allclose(v, -v.T, rtol=0.0, atol=atol):
        raise AntisymmetryError("area tensor is not antisymmetric")
    return v


def lower(v: np.ndarray) -> np.ndarray:
    return METRIC @ v @ METRIC


def raise_indices(v: np.ndarray) -> np.ndarray:
    return METRIC @ v @ METRIC


def selfdual_decompose(v: np.ndarray) -> AreaVector:
    """Map an antisymmetric v^{ab} to its pair of complex 3-vectors.

    2 (+-v)_k = -eps_{klm} v^{lm} +- i (v_{k0} - v_{0k}).
    """
    v = check_antisymmetric(v)
    v_low = lower(v)
    spatial = -0.5 * np.einsum("klm,lm->k", EPS3, v[1:, 1:])
    boost = 0.5 * (v_low[1:, 0] - v_low[0, 1:])
    return AreaVector(plus=spatial + 1j * boost, minus=spatial - 1j * boost)


def selfdual_part(v: np.ndarray, sign: int) -> np.ndarray:
    """+-v^{ab} = v^{ab}/2 +- (i/4) eps^{ab}_{cd} v^{cd}."""
    v = check_antisymmetric(v)
    return 0.5 * v + sign * 0.25j * np.einsum("abcd,cd->ab", EPS4_MIXED, v)


def recompose(av: AreaVector) -> np.ndarray:
    """Inverse of :func:`selfdual_decompose`; returns v^{ab}.

    Uses +-v_{ab} = (1/2) +-v^k +-Sigma_{kab} and sums both halves.
    """
    low = 0.5 * np.einsum("k,kab->ab", av.plus, sigma(1))
    low = low + 0.5 * np.einsum("k,kab->ab", av.minus, sigma(-1))
    return raise_indices(low)


def bivector(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    """Dual area tensor v^{ab} = (1/2) eps^{ab}_{cd} l1^c l2^d of two edge 4-vectors."""
    return 0.5 * np.einsum("abcd,c,d->ab", EPS4_MIXED, np.asarray(l1, float), np.asarray(l2, float))


def bivector_from_edges(l1: np.ndarray, l2: np.ndarray) -> AreaVector:
    """Area vectors of the triangle spanned by l1, l2.

    Equals 2 +-v = +-i l1 x l2 - l1 l2^0 + l2 l1^0 (3-vector parts).
    """
    return selfdual_decompose(bivector(l1, l2))


def circ(A: np.ndarray, B: np.ndarray) -> complex:
    """A o B = (1/2) A_{ab} B^{ab} for upper-index inputs."""
    return 0.5 * np.einsum("ab,ab->", lower(A), B)


def star(A: np.ndarray, B: np.ndarray) -> complex:
    """A * B = (1/4) eps_{abcd} A^{ab} B^{cd}."""
    return 0.25 * np.einsum("abcd,ab,cd->", EPS4_DOWN, A, B)


def pairing_invariants(v: np.ndarray) -> tuple[float, float]:
    """Return (v o v, v * v) for a real antisymmetric area tensor."""
    v = check_antisymmetric(v)
    return float(np.real(circ(v, v))), float(np.real(star(v, v)))


def principal_sqrt(z: complex) -> complex:
    """Principal square root, cut on the negative real axis; sqrt(-a^2) = i|a|."""
    z = complex(z)
    if z.imag == 0.0 and z.real < 0.0:
        return complex(0.0, np.sqrt(-z.real))
    return complex(np.sqrt(z))
