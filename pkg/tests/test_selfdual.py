import itertools

import numpy as np
import pytest

from connint import selfdual as sd


def random_antisym(rng):
    a = rng.normal(size=(4, 4))
    return a - a.T


def test_levi_civita_conventions():
    assert sd.EPS3[0, 1, 2] == 1.0
    assert sd.EPS4_UP[0, 1, 2, 3] == 1.0
    assert sd.EPS4_DOWN[0, 1, 2, 3] == -1.0


@pytest.mark.parametrize("sign", [1, -1])
def test_sigma_algebra_exact(sign):
    M = sd.sigma_mixed(sign)
    eye = np.eye(4)
    for k, l in itertools.product(range(3), repeat=2):
        lhs = M[k] @ M[l]
        rhs = -(k == l) * eye + np.einsum("m,mab->ab", sd.EPS3[k, l], M)
        # entries are small integers combined exactly
        assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("sign", [1, -1])
def test_sigma_duality(sign):
    S_low = sd.sigma(sign)
    S_up = np.einsum("ac,kcd,db->kab", sd.METRIC, S_low, sd.METRIC)
    dual = 0.5 * np.einsum("abcd,kcd->kab", sd.EPS4_MIXED, S_up)
    assert np.array_equal(dual, -sign * 1j * S_up)


def test_generators_real():
    assert np.isrealobj(sd.E_GEN) and np.isrealobj(sd.L_GEN)


def test_decompose_v12():
    v = np.zeros((4, 4))
    v[1, 2], v[2, 1] = 1.0, -1.0
    av = sd.selfdual_decompose(v)
    np.testing.assert_array_equal(av.plus, [0, 0, -1])
    np.testing.assert_array_equal(av.minus, [0, 0, -1])


def test_decompose_zero():
    av = sd.selfdual_decompose(np.zeros((4, 4)))
    assert not av.plus.any() and not av.minus.any()


def test_decompose_rejects_symmetric():
    with pytest.raises(sd.AntisymmetryError):
        sd.selfdual_decompose(np.eye(4))


def test_round_trip_and_invariants():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        v = random_antisym(rng)
        av = sd.selfdual_decompose(v)
        np.testing.assert_allclose(sd.recompose(av), v, rtol=0, atol=1e-14)
        np.testing.assert_array_equal(av.minus, np.conj(av.plus))
        # 3-vector square against 4-tensor pairing
        for sign, vec in ((1, av.plus), (-1, av.minus)):
            part = sd.selfdual_part(v, sign)
            assert abs(vec @ vec - 2 * sd.circ(part, part)) < 1e-13
        vv, vsv = sd.pairing_invariants(v)
        part = sd.selfdual_part(v, 1)
        assert abs(2 * sd.circ(part, part) - (vv + 1j * vsv)) < 1e-13


def test_selfdual_part_matches_sigma_reconstruction():
    rng = np.random.default_rng(3)
    v = random_antisym(rng)
    av = sd.selfdual_decompose(v)
    part = sd.selfdual_part(v, 1)
    low = 0.5 * np.einsum("k,kab->ab", av.plus, sd.sigma(1))
    np.testing.assert_allclose(sd.raise_indices(low), part, atol=1e-14)


def test_bivector_unit_square():
    av = sd.bivector_from_edges([0, 1, 0, 0], [0, 0, 1, 0])
    np.testing.assert_allclose(av.plus, [0, 0, 0.5j])
    np.testing.assert_allclose(av.minus, [0, 0, -0.5j])
    assert av.square(1) == pytest.approx(-0.25)


def test_bivector_degenerate():
    l = np.array([0.3, 1.0, -2.0, 0.5])
    av = sd.bivector_from_edges(l, l)
    assert np.allclose(av.plus, 0) and np.allclose(av.minus, 0)


def test_bivector_matches_cross_product_formula():
    rng = np.random.default_rng(11)
    for _ in range(100):
        l1, l2 = rng.normal(size=4), rng.normal(size=4)
        av = sd.bivector_from_edges(l1, l2)
        base = -l1[1:] * l2[0] + l2[1:] * l1[0]
        cross = np.cross(l1[1:], l2[1:])
        np.testing.assert_allclose(2 * av.plus, 1j * cross + base, atol=1e-14)
        np.testing.assert_allclose(2 * av.minus, -1j * cross + base, atol=1e-14)


def test_spacelike_square_is_minus_heron_area_squared():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = rng.normal(size=3), rng.normal(size=3)
        l1, l2 = np.r_[0.0, a], np.r_[0.0, b]
        # Heron's formula from the three side lengths
        s1, s2, s3 = np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(a - b)
        p = 0.5 * (s1 + s2 + s3)
        area2 = p * (p - s1) * (p - s2) * (p - s3)
        av = sd.bivector_from_edges(l1, l2)
        assert av.square(1) == pytest.approx(-area2, rel=1e-10, abs=1e-12)
        assert av.square(-1) == pytest.approx(-area2, rel=1e-10, abs=1e-12)


def test_pairing_simple_cases():
    v = np.zeros((4, 4))
    v[1, 2], v[2, 1] = 1.0, -1.0
    assert sd.pairing_invariants(v) == (1.0, 0.0)
    rng = np.random.default_rng(2)
    biv = sd.bivector(rng.normal(size=4), rng.normal(size=4))
    assert abs(sd.pairing_invariants(biv)[1]) < 1e-14


def test_principal_sqrt_branch():
    assert sd.principal_sqrt(-4.0) == 2j
    assert sd.principal_sqrt(9.0) == 3.0
