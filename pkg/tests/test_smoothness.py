"""Tests for fractional differences, measured moduli and K-functional estimates."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlab.core.gridfn import GridFunction, rearrange, shift_values
from smoothlab.core.smoothness import (
    FracDiffParams,
    ModulusCurve,
    binom_abs_sum,
    difference_coefficients,
    frac_binom,
    frac_diff,
    k_sx_profile,
    k_upper,
    modulus,
    modulus_curve,
    regularize_quasiconcave,
    shift_set,
)
from smoothlab.core.spaces import Lebesgue
from smoothlab.shared.errors import InputError, PreconditionError

L1 = Lebesgue(p=1)
L2 = Lebesgue(p=2)


def _indicator(cells: int = 100) -> GridFunction:
    return GridFunction.from_callable(lambda x: (np.abs(x) < 0.5).astype(float), [(-1.0, 1.0)], [cells])


def _bump(cells: int = 256) -> GridFunction:
    return GridFunction.from_callable(lambda x: np.exp(-8 * x ** 2), [(-1.0, 1.0)], [cells])


def test_binomials():
    """binom(1/2, 2) = -1/8; second-difference coefficients 1, -2, 1."""
    assert frac_binom(0.5, 2) == pytest.approx(-0.125)
    assert difference_coefficients(2.0, 2).tolist() == pytest.approx([1.0, -2.0, 1.0])
    assert binom_abs_sum(2.0) == 4.0
    assert 1.0 < binom_abs_sum(0.5) < 2.0


def test_integer_truncation_is_exact_order():
    """Integer κ uses exactly κ terms."""
    assert FracDiffParams(kappa=3).truncation() == 3
    assert FracDiffParams(kappa=3).truncation(box_terms=1) == 1


def test_fractional_truncation_fits_box():
    """Within the box the fractional sum is exact; beyond max_terms the tolerance must certify."""
    assert FracDiffParams(kappa=0.5).truncation(box_terms=40) == 40
    params = FracDiffParams(kappa=0.5, tail_tol=1e-12, max_terms=10)
    with pytest.raises(PreconditionError) as exc:
        params.truncation()
    assert "max_terms" in str(exc.value)


def test_first_difference_zero_extends():
    """Δ_h f(x) = f(x) - f(x + h), with f = 0 past the box."""
    f = GridFunction(1, ((0.0, 4.0),), (4,), np.array([1.0, 2.0, 3.0, 4.0]))
    d = frac_diff(f, [1.0], FracDiffParams(kappa=1))
    assert d.values.tolist() == [-1.0, -1.0, -1.0, 4.0]
    zero = frac_diff(f, [0.0], FracDiffParams(kappa=1))
    assert not np.any(zero.values)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=3, allow_nan=False), min_size=3, max_size=40),
       st.sampled_from([0.5, 1.5, 2.25]),
       st.integers(min_value=-3, max_value=3).filter(lambda s: s != 0))
def test_fractional_difference_matches_direct_sum(values, kappa, step):
    """The FFT path equals Σ_ν c_ν f(x + ν h) with zero extension."""
    vals = np.array(values)
    f = GridFunction(1, ((0.0, float(vals.size)),), (vals.size,), vals)
    d = frac_diff(f, [float(step)], FracDiffParams(kappa=kappa))
    coeffs = difference_coefficients(kappa, vals.size)
    expected = sum(c * shift_values(vals, [nu * step]) for nu, c in enumerate(coeffs))
    assert np.allclose(d.values, expected, atol=1e-9)


def test_non_lattice_shift_needs_interpolation():
    """Shifts off the grid are rejected unless interpolation is enabled."""
    f = _indicator()
    with pytest.raises(InputError):
        frac_diff(f, [0.013], FracDiffParams(kappa=1))
    out = frac_diff(f, [0.013], FracDiffParams(kappa=1, interpolate=True))
    assert np.all(np.isfinite(out.values))


def test_shift_set_axis_1d():
    """Both signs of every lattice length up to u_max."""
    f = GridFunction(1, ((0.0, 1.0),), (10,), np.zeros(10))
    vecs, lengths = shift_set(f, 0.3)
    assert sorted(vecs[:, 0].tolist()) == [-3, -2, -1, 1, 2, 3]
    assert lengths.max() == pytest.approx(0.3)
    with pytest.raises(InputError):
        shift_set(f, 0.3, mode="diagonal")


def test_shift_set_full_mode_2d_covers_directions():
    """Full mode samples directions beyond the axes."""
    f = GridFunction(2, ((0.0, 1.0), (0.0, 1.0)), (16, 16), np.zeros((16, 16)))
    axis, _ = shift_set(f, 0.25, mode="axis")
    full, lengths = shift_set(f, 0.25, mode="full", dir_samples=8)
    assert np.all(np.count_nonzero(axis, axis=1) == 1)
    assert np.any(np.count_nonzero(full, axis=1) == 2)
    assert lengths.max() <= 0.25 * (1 + 1e-9)


def test_modulus_of_indicator_in_l1():
    """ω_1(χ(-1/2,1/2), h)_{L¹} = 2h for small h."""
    assert modulus(_indicator(), 0.1, 1, L1) == pytest.approx(0.2)


def test_modulus_of_zero_function_is_zero():
    """ω_κ(0, t) = 0 and the curve reports it."""
    f = GridFunction(1, ((0.0, 1.0),), (32,), np.zeros(32))
    curve = modulus_curve(f, 1.5, L2, 0.25)
    assert curve.is_zero
    assert modulus(f, 0.25, 1, L2) == 0.0


def test_modulus_curve_is_non_decreasing():
    """Running max over shift lengths."""
    curve = modulus_curve(_bump(), 1, L2, 0.5)
    assert np.all(np.diff(curve.values) >= 0)
    assert 0 <= curve.slope <= 1
    assert not curve.one_sided
    assert curve.to_csv().startswith("t,omega\n")


def test_modulus_curve_2d_is_one_sided():
    """Sampled directions make n >= 2 curves lower bounds."""
    f = GridFunction.from_callable(lambda x, y: np.exp(-4 * (x ** 2 + y ** 2)), [(-1.0, 1.0), (-1.0, 1.0)], [32, 32])
    curve = modulus_curve(f, 1, L2, 0.25, mode="full", dir_samples=8)
    assert curve.one_sided
    assert curve.values[-1] > 0


def test_curve_integrals_on_a_step_curve():
    """ω(u) = 2 on [1, ∞), extrapolated as 2u below 1."""
    curve = ModulusCurve(kappa=1.0, u=np.array([1.0]), values=np.array([2.0]), slope=1.0)
    assert curve(0.5) == pytest.approx(1.0)
    assert curve(3.0) == pytest.approx(2.0)
    assert curve.head(1.0, 0.0, 1.0) == pytest.approx(2.0)
    assert curve.tail(1.0, -1.0, 1.0, upper=4.0) == pytest.approx(1.5)
    assert curve.sup_tail(1.0, -1.0, upper=4.0) == pytest.approx(2.0)
    assert math.isinf(curve.head(1.0, -2.0, 1.0))


def test_regularize_quasiconcave():
    """Non-decreasing K with non-increasing K/t."""
    out = regularize_quasiconcave(np.array([1.0, 2.0, 4.0]), np.array([1.0, 3.0, 2.0]))
    assert out.tolist() == pytest.approx([1.0, 2.0, 3.0])


def test_k_upper_bounds():
    """0 <= K(f, t) <= min(‖f‖, t |f|_{W¹}) and K(0, t) = 0."""
    f = _bump()
    norm = L2.profile_norm(rearrange(f))
    for t in (0.01, 0.1, 1.0):
        k = k_upper(f, t, 1, L2)
        assert 0 <= k <= norm + 1e-12
    zero = GridFunction(1, ((0.0, 1.0),), (16,), np.zeros(16))
    assert k_upper(zero, 0.1, 1, L2) == 0.0
    with pytest.raises(InputError):
        k_upper(f, 0.0, 1, L2)


def test_k_sx_profile_of_indicator():
    """For χ(-1/2,1/2) in L¹ with n = k = 1: head terms vanish and the tail is t."""
    prof = k_sx_profile(_indicator(), L1, 1, 1, 0.25)
    assert prof.tau == pytest.approx(0.25)
    assert prof.head_a == pytest.approx(0.0, abs=1e-12)
    assert prof.head_b == pytest.approx(0.0, abs=1e-12)
    assert prof.form_a == pytest.approx(0.25, rel=1e-4)
    assert prof.form_b == pytest.approx(prof.form_a)
