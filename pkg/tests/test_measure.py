import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from connint import measure as ms


def random_triads(n, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        t = rng.standard_normal((3, 3))
        if abs(np.linalg.det(t)) > 1e-3:
            out.append(t)
    return out


def test_orthogonal_triad():
    a = 1.7
    g = ms.triad_gram(a * np.eye(3))
    assert np.allclose(g.G, a * a * np.eye(3), rtol=0, atol=1e-15)
    assert g.det == pytest.approx(a**6, rel=1e-15)


def test_coplanar_triad_has_zero_det():
    t = np.array([[1.0, 2, 0], [3, -1, 0], [0.5, 0.5, 0]])
    assert ms.triad_gram(t).det == 0.0
    assert ms.measure_weight(t, 4.5) == 0.0
    with pytest.raises(ms.DegenerateTriadError):
        ms.edges_from_triad(t)


def test_gram_identity_against_linear_algebra():
    for t in random_triads(200):
        g = ms.triad_gram(t)
        assert g.det == pytest.approx(np.linalg.det(g.G), rel=1e-9)
        assert g.det == pytest.approx(np.linalg.det(t) ** 2, rel=1e-12)
        assert np.all(np.linalg.eigvalsh(g.G) > -1e-12)


def test_measure_weight_values():
    t = np.diag([1.0, 1.0, 2.0])  # det G = 4
    assert ms.measure_weight(t, 1.5) == pytest.approx(8.0, rel=1e-15)
    assert ms.measure_weight(t, 4.5) == pytest.approx(4**4.5, rel=1e-15)
    with pytest.raises(ValueError):
        ms.measure_weight(t, 2.0)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-3, 3)), st.floats(0.1, 5))
def test_weight_scaling(t, lam):
    # away from coplanarity, where the triple product is all cancellation
    assume(abs(ms.triple_product(t)) > 1e-3 * np.prod(np.linalg.norm(t, axis=1)))
    w = ms.measure_weight(t, 4.5)
    assert ms.measure_weight(lam * t, 4.5) == pytest.approx(lam**27 * w, rel=1e-12, abs=1e-300)


def test_hand_computed_edges():
    b = 1.3
    l = ms.edges_from_triad((b * b / 2) * np.eye(3))
    assert np.allclose(l, b * np.eye(3), atol=1e-15)


def test_round_trip_edges_to_triad():
    # start from edges: v = rebuild(l), then edges_from_triad(v) returns l up to a global sign
    rng = np.random.default_rng(3)
    for _ in range(100):
        l = rng.standard_normal((3, 3))
        if abs(np.linalg.det(l)) < 0.1:
            continue  # nearly flat: the reconstruction is ill-conditioned
        back = ms.edges_from_triad(ms.rebuild_triad(l))
        sign = np.sign(np.sum(back * l))
        assert np.abs(back - sign * l).max() < 1e-12 * max(1, np.abs(l).max())


def test_round_trip_triad_edges_triad_1000():
    worst = 0.0
    for t in random_triads(1000, seed=11):
        back = ms.rebuild_triad(ms.edges_from_triad(t))
        worst = max(worst, np.abs(back - ms.orientation(t) * t).max())
    assert worst < 1e-12


def test_double_counting_convention_fails():
    # summing epsilon over both orderings doubles every rebuilt vector
    t = random_triads(1)[0]
    doubled = 2 * ms.rebuild_triad(ms.edges_from_triad(t))
    assert np.abs(doubled - ms.orientation(t) * t).max() > 0.1


def test_flat_tetrahedron_criterion():
    for t in random_triads(200, seed=5):
        scale = math.sqrt(abs(np.linalg.det(t)))
        assert abs(ms.flatness_residual(t)) < 1e-10 * max(1.0, scale)


def test_spike_formation():
    base = ms.flattening_family(1)
    lengths = [ms.edge_lengths(ms.flattened_triad(base, e)).max() for e in (1e-2, 1e-4, 1e-6)]
    # |l| ~ eps^{-1/2}: two decades in eps give one decade in |l|
    assert lengths[1] / lengths[0] == pytest.approx(10, rel=0.05)
    assert lengths[2] / lengths[1] == pytest.approx(10, rel=0.01)


# --- delta-factor invariance ---------------------------------------------------


def test_scaling_identity_matrix():
    r = ms.delta_factor_scaling_check(np.eye(3), random_triads(1)[0])
    assert r.gram_ratio == pytest.approx(1, rel=1e-12)
    assert r.jacobian == pytest.approx(1, rel=1e-8)


def test_scaling_multiple_of_identity():
    lam = 1.6
    r = ms.delta_factor_scaling_check(lam * np.eye(3), random_triads(1)[0])
    assert r.gram_ratio == pytest.approx(lam**6, rel=1e-12)
    assert r.jacobian == pytest.approx(lam**12, rel=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_scaling_random_matrix(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3))
    r = ms.delta_factor_scaling_check(A, random_triads(1, seed)[0])
    assert r.passed(1e-8), r


def test_jacobian_against_closed_kronecker_form():
    # on all 3x3 matrices the map is A (x) A with determinant (det A)^6; on symmetric ones (det A)^4
    A = np.random.default_rng(2).standard_normal((3, 3))
    assert np.linalg.det(np.kron(A, A)) == pytest.approx(np.linalg.det(A) ** 6, rel=1e-10)
    assert ms.congruence_jacobian(A) == pytest.approx(np.linalg.det(A) ** 4, rel=1e-8)


def test_singular_matrix_rejected():
    A = np.array([[1.0, 2, 3], [2, 4, 6], [0, 1, 0]])
    with pytest.raises(ValueError):
        ms.delta_factor_scaling_check(A, np.eye(3))


# --- flattening scan -----------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 4, 10, 18, 19, 20, 22])
def test_scan_exponent(n):
    r = ms.length_moment_scan(n, seed=42)
    assert r.exponent == pytest.approx(9 - n / 2, abs=0.05 * max(1, abs(9 - n / 2)))


def test_scan_verdicts():
    verdicts = {n: ms.length_moment_scan(n, seed=42).verdict for n in range(0, 24)}
    assert all(verdicts[n] == "convergent" for n in range(20))
    assert verdicts[20] == "marginal"
    assert all(verdicts[n] == "divergent" for n in (21, 22, 23))


def test_scan_is_deterministic():
    a = ms.length_moment_scan(6, seed=123)
    b = ms.length_moment_scan(6, seed=123)
    assert a.exponent == b.exponent
    assert np.array_equal(a.eps, b.eps) and np.array_equal(a.log_integrand, b.log_integrand)
    c = ms.length_moment_scan(6, seed=124)
    assert not np.array_equal(a.eps, c.eps)


def test_scan_rejects_bad_input():
    with pytest.raises(ValueError):
        ms.length_moment_scan(-1)
    with pytest.raises(ValueError):
        ms.length_moment_scan(2, decades=1, samples_per_decade=2)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_scan_independent_of_seed(seed):
    r = ms.length_moment_scan(8, decades=6, samples_per_decade=4, seed=seed)
    assert r.exponent == pytest.approx(5.0, abs=0.05)
