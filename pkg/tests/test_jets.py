import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from connint.jets import (
    Jet,
    JetDomainError,
    JetError,
    JetOrderError,
    PrecisionConfig,
    derivative_at_zero,
    jet_arith,
    jet_fn,
    odd_quotient,
)

CTX = PrecisionConfig(bits=256).context()


def J(cs, order=None):
    return Jet(cs, CTX, order)


def close(a, b, tol=1e-60):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert abs(CTX.convert(x) - CTX.convert(y)) <= tol, (a, b)


def test_square_of_one_plus_g():
    out = jet_arith(J([1, 1], 2), J([1, 1], 2), "mul")
    close(out.coeffs, [1, 2, 1])


def test_identity_division():
    close(jet_arith(J([1, 0, 0]), J([1, 0, 0]), "div").coeffs, [1, 0, 0])


def test_geometric_series():
    out = 1 / (1 - Jet.variable(5, CTX))
    # oracle: sum of g^j
    close(out.coeffs, [1] * 6)


def test_division_by_zero_constant():
    with pytest.raises(JetError):
        J([1, 1]) / J([0, 1])


def test_order_mismatch():
    with pytest.raises(JetError):
        J([1, 1], 2) + J([1, 1], 3)


def test_sqrt_binomial():
    g = Jet.variable(4, CTX)
    close(jet_fn(1 - g * g, "sqrt").coeffs, [1, 0, -0.5, 0, -0.125])


def test_sin_maclaurin():
    close(jet_fn(Jet.variable(5, CTX), "sin").coeffs, [0, 1, 0, -CTX.mpf(1) / 6, 0, CTX.mpf(1) / 120])


def test_arcsin_sin_round_trip():
    g = Jet.variable(9, CTX)
    close(jet_fn(jet_fn(g, "sin"), "arcsin").coeffs, [0, 1] + [0] * 8)


def test_exp_log_round_trip_off_zero():
    a = J([0.7, 0.2, -1.1, 0.4, 0.05], 8)
    close(jet_fn(jet_fn(a, "exp"), "log").coeffs, a.coeffs)


def test_cos_at_nonzero_constant():
    a = J([0.3, 1.0], 6)
    out = jet_fn(a, "cos")
    # derivatives of cos at 0.3
    expected = [CTX.cos(0.3), -CTX.sin(0.3), -CTX.cos(0.3) / 2, CTX.sin(0.3) / 6]
    close(out.coeffs[:4], expected)


@pytest.mark.parametrize(
    "fn,c0", [("sqrt", 0), ("sqrt", -1), ("log", 0), ("arcsin", 1), ("arcsin", -1.5)]
)
def test_domain_violations(fn, c0):
    with pytest.raises(JetDomainError):
        jet_fn(J([c0, 1], 4), fn)


def test_odd_quotient_shift():
    close(odd_quotient(J([0, 1, 0, 3])).coeffs, [1, 0, 3])
    close(odd_quotient(J([0, 0, 0, 0])).coeffs, [0, 0, 0])
    with pytest.raises(JetError):
        odd_quotient(J([1, 1]))


def test_odd_quotient_of_binomial_difference():
    g = Jet.variable(7, CTX)
    inv_sqrt = 1 / jet_fn(1 - g * g, "sqrt")
    # (1-g^2)^(-1/2) = 1 + g^2/2 + 3g^4/8 + 5g^6/16
    close(odd_quotient(1 - inv_sqrt).coeffs, [0, -0.5, 0, -0.375, 0, -0.3125, 0])
    close(odd_quotient(g - g * inv_sqrt).coeffs, [0, 0, -0.5, 0, -0.375, 0, -0.3125])


def test_derivative_at_zero():
    e = jet_fn(Jet.variable(6, CTX), "exp")
    assert derivative_at_zero(e, 3) == 1
    a = J([2.5, 1, 1])
    assert derivative_at_zero(a, 0) == 2.5
    with pytest.raises(JetOrderError) as err:
        derivative_at_zero(a, 3)
    assert err.value.required == 3


def test_cos_log_second_derivative():
    g = Jet.variable(4, CTX)
    c = jet_fn(g, "cos")
    val = derivative_at_zero(c * jet_fn(1 + c, "log"), 2)
    # hand expansion: ln2 - g^2/4 - (ln2) g^2/2
    assert abs(val - (-CTX.mpf(1) / 2 - CTX.log(2))) < 1e-70


def _central_fd(f, n, h=1e-3):
    # central difference of order n; extra digits only to keep rounding out of the comparison
    with mpmath.workdps(40):
        return mpmath.diff(f, 0, n, h=h, method="step", direction=0)


@pytest.mark.parametrize("n", range(7))
def test_derivative_matches_finite_differences(n):
    def scalar(x):
        return mpmath.cos(x) * mpmath.log(1 + mpmath.cos(x)) + mpmath.exp(mpmath.sin(x))

    g = Jet.variable(8, CTX)
    c = jet_fn(g, "cos")
    jet = c * jet_fn(1 + c, "log") + jet_fn(jet_fn(g, "sin"), "exp")
    exact = derivative_at_zero(jet, n)
    fd = _central_fd(scalar, n)
    assert abs(float(fd) - float(exact)) <= 1e-4 * max(1.0, abs(float(exact)))


coef = st.floats(min_value=-3, max_value=3, allow_nan=False)
jets = st.lists(coef, min_size=6, max_size=6).map(lambda cs: J(cs))


@settings(max_examples=40, deadline=None)
@given(jets, jets, jets)
def test_ring_axioms(a, b, c):
    close(((a * b) * c).coeffs, (a * (b * c)).coeffs, tol=1e-55)
    close((a * (b + c)).coeffs, (a * b + a * c).coeffs, tol=1e-55)
    close((a + b).coeffs, (b + a).coeffs, tol=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=6, max_size=6), st.floats(min_value=0.1, max_value=5))
def test_sqrt_squares_back(cs, c0):
    a = J([c0] + cs[1:])
    s = jet_fn(a, "sqrt")
    close((s * s).coeffs, a.coeffs, tol=1e-50 * 10 ** (2 * 6) / c0**6)


def test_precision_config_validation():
    with pytest.raises(ValueError):
        PrecisionConfig(bits=32)
    with pytest.raises(ValueError):
        PrecisionConfig(order=1)
    assert PrecisionConfig.order_for(10) == 24


def test_independent_contexts():
    lo = Jet.variable(3, PrecisionConfig(bits=64).context())
    hi = Jet.variable(3, PrecisionConfig(bits=512).context())
    third_lo = (1 / (3 - lo)).coeffs[0]
    third_hi = (1 / (3 - hi)).coeffs[0]
    with mpmath.workprec(600):
        exact = mpmath.mpf(1) / 3
        assert abs(third_hi - exact) < mpmath.mpf(2) ** -510
        assert abs(third_lo - exact) > mpmath.mpf(2) ** -200
