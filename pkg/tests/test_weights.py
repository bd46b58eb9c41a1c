"""Tests for slowly varying factors, weights, weight-class checks, Hardy operators and associates."""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from smoothlab.core.gridfn import DecreasingProfile
from smoothlab.core.quadrature import log_grid
from smoothlab.core.weights import (
    PowerSVWeight,
    SlowlyVarying,
    SVPiece,
    TabulatedWeight,
    associate_band,
    associate_reference,
    associate_weight_bar,
    bn_transform,
    check_Binftystar,
    check_Br,
    check_Brstar,
    hardy_P,
    hardy_Q,
    hardy_Q_bound_probe,
    qeta_bound_probe,
    second_associate_nu,
    smallest_monotone_epsilon,
    sv_power_norm_band,
    sv_product,
    sv_regularize_a,
    sv_regularize_c,
)
from smoothlab.shared.errors import DomainError, InputError, PreconditionError


def test_br_closed_form_for_pure_power():
    """t^{r/2-1} with r = 2 satisfies B_2 with constant a/(r-a) = 1."""
    check = check_Br(PowerSVWeight.pure(0.0), 2.0)
    assert check.holds
    assert check.closed_form
    assert check.constant == pytest.approx(1.0)
    assert f"B_r holds, c = {check.constant:.6f}" == "B_r holds, c = 1.000000"


def test_br_fails_when_tail_diverges():
    """t^1 with r = 2 has a divergent ∫_t^∞ s^{-r} w."""
    check = check_Br(PowerSVWeight.pure(1.0), 2.0)
    assert not check.holds
    assert math.isinf(check.constant)
    assert "diverges" in check.reason


def test_br_rejects_small_r():
    """B_r is stated for r > 1."""
    with pytest.raises(InputError):
        check_Br(PowerSVWeight.pure(0.0), 1.0)


def test_brstar_and_binftystar_closed_forms():
    """Pure powers: B_r* constant a/(a-r), B_∞* constant 1/a with a = α + 1."""
    assert check_Brstar(PowerSVWeight.pure(0.0), 0.5).constant == pytest.approx(2.0)
    assert not check_Brstar(PowerSVWeight.pure(0.0), 1.0).holds
    assert check_Binftystar(PowerSVWeight.pure(1.0)).constant == pytest.approx(0.5)


def test_non_integrable_head_is_domain_error():
    """∫_0^t w must be finite for any weight-class check."""
    with pytest.raises(DomainError):
        check_Br(PowerSVWeight.pure(-1.0), 2.0)


def test_br_grid_check_for_log_weight():
    """A logplus factor keeps t^0 inside B_2; the verdict is flagged heuristic."""
    w = PowerSVWeight(alpha=0.0, sv=SlowlyVarying.two_piece(0.5))
    check = check_Br(w, 2.0)
    assert check.heuristic
    assert check.holds
    assert 0.5 < check.constant < 2.0


def test_slowly_varying_pieces_must_partition():
    """Pieces start at 0, end at inf and are contiguous."""
    with pytest.raises(ValidationError):
        SlowlyVarying(pieces=(SVPiece(lo=0, hi=1), SVPiece(lo=2, hi="inf")))
    with pytest.raises(ValidationError):
        SlowlyVarying(pieces=(SVPiece(lo=0, hi=1),))


def test_sv_up_membership():
    """logplus^γ with γ > 0 is in SV↑; log^γ is not (it grows near 0)."""
    assert SlowlyVarying.two_piece(0.5).in_sv_up()
    assert SlowlyVarying.two_piece(0.5).nondecreasing_class
    assert not SlowlyVarying.log_power(0.5).in_sv_up()
    assert not SlowlyVarying.constant().in_sv_up()


def test_smallest_monotone_epsilon():
    """ε = max |γ| λ for continuous factors, inf across a jump."""
    assert smallest_monotone_epsilon(SlowlyVarying.log_power(0.5, log_scale=2.0)) == pytest.approx(1.0)
    assert smallest_monotone_epsilon(SlowlyVarying.two_piece(1.0)) == pytest.approx(1.0)
    jump = SlowlyVarying(pieces=(SVPiece(lo=0, hi=1), SVPiece(lo=1, hi="inf", factor=2.0)))
    assert math.isinf(smallest_monotone_epsilon(jump))


def test_literal_round_trip_names():
    """Literals print in the config syntax."""
    assert SlowlyVarying.two_piece(0.5).literal() == "logplus^0.5"
    assert SlowlyVarying.log_power(1.0).literal() == "log^1.0"
    assert SlowlyVarying.constant().literal() == "1"
    assert PowerSVWeight.pure(-0.5).literal() == "t^-0.5"


def test_bn_transform_inverts_argument():
    """b_n(t) = 1/b(t^{-1/n})."""
    b = SlowlyVarying.two_piece(1.0)
    bn = bn_transform(b, 2)
    for t in (0.01, 0.5, 3.0, 100.0):
        assert float(bn(t)) == pytest.approx(1.0 / float(b(t ** -0.5)), rel=1e-12)


def test_bn_transform_needs_sv_up():
    """b_n is only defined for non-decreasing b."""
    with pytest.raises(PreconditionError):
        bn_transform(SlowlyVarying.log_power(0.5), 1)


def test_sv_product_adds_exponents():
    """log^1 · log^2 = log^3; different log scales leave the family."""
    prod = sv_product(SlowlyVarying.log_power(1.0), SlowlyVarying.log_power(2.0))
    assert len(prod.pieces) == 1
    assert prod.pieces[0].gamma == pytest.approx(3.0)
    with pytest.raises(PreconditionError):
        sv_product(SlowlyVarying.log_power(1.0), SlowlyVarying.log_power(1.0, log_scale=2.0))


def test_power_weight_integral_pure():
    """∫_0^2 t dt = 2; divergent heads give inf."""
    assert PowerSVWeight.pure(1.0).integral(0.0, 2.0) == pytest.approx(2.0)
    assert math.isinf(PowerSVWeight.pure(-1.0).integral(0.0, 1.0))


def test_power_weight_integral_matches_scipy():
    """Panel quadrature across a piece boundary agrees with adaptive quadrature."""
    w = PowerSVWeight(alpha=0.3, sv=SlowlyVarying.two_piece(1.0), power=2.0)
    expected, _ = integrate.quad(lambda s: float(w(s)), 0.5, 4.0, points=[1.0], epsabs=1e-13, epsrel=1e-12)
    assert w.integral(0.5, 4.0) == pytest.approx(expected, rel=1e-8)


def test_power_weight_head_divergence_with_log_factor():
    """t^{-1} b with b ≡ 1 near 0 is not integrable at 0."""
    w = PowerSVWeight(alpha=-1.0, sv=SlowlyVarying.two_piece(1.0))
    assert math.isinf(w.integral(0.0, 1.0))


def test_tabulated_weight_is_exact_for_powers():
    """A tabulated t^2 integrates exactly, including the extrapolated head."""
    t = np.geomspace(0.1, 10.0, 9)
    w = TabulatedWeight.from_arrays(t, t ** 2)
    assert w.integral(0.0, 3.0) == pytest.approx(9.0, rel=1e-12)
    assert float(w(20.0)) == pytest.approx(400.0, rel=1e-12)
    assert w.literal().startswith("tabulated[9 nodes:")


def test_tabulated_weight_rejects_bad_nodes():
    """Nodes increase and values are positive."""
    with pytest.raises(ValidationError):
        TabulatedWeight(t=(1.0, 0.5), values=(1.0, 1.0))
    with pytest.raises(ValidationError):
        TabulatedWeight(t=(1.0, 2.0), values=(1.0, 0.0))


def test_hardy_operators_on_indicator():
    """P χ(0,1) = min(1, 1/t); Q χ(0,1) = log(1/t) on (0, 1)."""
    h = DecreasingProfile([0.0, 1.0], [1.0, 0.0])
    p = hardy_P(h)
    assert float(p(0.5)) == pytest.approx(1.0)
    assert float(p(4.0)) == pytest.approx(0.25)
    q = hardy_Q(h)
    assert float(q(0.5)) == pytest.approx(math.log(2.0))
    assert float(q(2.0)) == pytest.approx(0.0, abs=1e-14)


def test_hardy_q_diverges_on_constants():
    """Q of a profile not vanishing at infinity diverges."""
    with pytest.raises(DomainError):
        hardy_Q(DecreasingProfile([0.0], [1.0]))


def test_regularizations_of_constant_factor_are_flat():
    """For b ≡ 1 every level is 1."""
    reg = sv_regularize_a(SlowlyVarying.constant(), 2)
    lo, hi = reg.band(1e-3, 1e3)
    assert lo == pytest.approx(1.0, abs=1e-8)
    assert hi == pytest.approx(1.0, abs=1e-8)


def test_regularizations_stay_equivalent_to_factor():
    """a_N·b and c_N/b stay within a bounded band for logplus^1."""
    b = SlowlyVarying.two_piece(1.0)
    lo, hi = sv_regularize_a(b, 2).band()
    assert 0.99 <= lo <= hi <= 4.0
    lo, hi = sv_regularize_c(b, 1).band()
    assert 0.99 <= lo <= hi <= 2.5


def test_regularization_depth_limit():
    """Depth is capped by SMOOTHLAB_MAX_REG_DEPTH."""
    with pytest.raises(InputError):
        sv_regularize_a(SlowlyVarying.constant(), 0)
    with pytest.raises(InputError):
        sv_regularize_a(SlowlyVarying.constant(), 99)


def test_sv_power_norm_band_for_constant():
    """‖τ^{α-1/q}‖_{L_q(0,t)} = t^α (αq)^{-1/q}."""
    lo, hi = sv_power_norm_band(SlowlyVarying.constant(), 0.5, 2.0)
    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(1.0)


def test_associate_weights_match_pure_power_reference():
    """w = t^0, p = r = 2, m/n = 1/4: w̄ = 2.25 t^0.5 and ν = t^{-1/2}/32."""
    wbar = associate_weight_bar(PowerSVWeight.pure(0.0), 1, 4, 2.0)
    ref_wbar, ref_nu = associate_reference(2.0, 2.0, 1, 4, SlowlyVarying.constant())
    assert wbar.alpha == pytest.approx(0.5)
    assert wbar.scale == pytest.approx(2.25)
    assert ref_wbar.alpha == pytest.approx(wbar.alpha)
    assert ref_wbar.scale == pytest.approx(wbar.scale)
    nu = second_associate_nu(wbar, 2.0)
    assert nu.alpha == pytest.approx(-0.5)
    assert nu.scale == pytest.approx(1 / 32)
    assert ref_nu.scale == pytest.approx(nu.scale)


def test_associate_weight_needs_divergence():
    """∫_0^∞ t^{-mr/n-r} w must diverge."""
    w = PowerSVWeight(alpha=0.0, sv=SlowlyVarying.log_power(-3.0))
    with pytest.raises((PreconditionError, DomainError)):
        associate_weight_bar(w, 1, 4, 2.0)


def test_second_associate_diverges_for_large_m():
    """m/n ≥ 1/p leaves ∫_t^∞ s^{-r'} w̄ divergent."""
    wbar = associate_weight_bar(PowerSVWeight.pure(0.0), 1, 1, 2.0)
    with pytest.raises(DomainError):
        second_associate_nu(wbar, 2.0)


def test_associate_band_for_log_factor_is_bounded():
    """Tabulated w̄ for w = b² stays within a finite band of its power-log reference."""
    b = SlowlyVarying.two_piece(0.5)
    w = PowerSVWeight(alpha=0.0, sv=b, power=2.0)
    wbar = associate_weight_bar(w, 1, 4, 2.0)
    ref_wbar, _ = associate_reference(2.0, 2.0, 1, 4, b)
    lo, hi = associate_band(wbar, ref_wbar)
    assert 0 < lo <= hi < math.inf


SV_FAMILY = [
    SlowlyVarying.constant(),
    SlowlyVarying.log_power(1.0),
    SlowlyVarying.two_piece(0.5),
    SlowlyVarying.two_piece(1.0, gamma_low=-0.5),
]


@pytest.mark.parametrize("b", SV_FAMILY, ids=lambda b: b.literal())
@pytest.mark.parametrize("kind", ["a", "c"])
def test_regularization_recurrences_match_finite_differences(b, kind):
    """t a_ℓ' = a_{ℓ-1} - a_ℓ and t c_ℓ' = c_ℓ - c_{ℓ-1} within 1e-4 relative, ℓ = 1..3."""
    reg = sv_regularize_a(b, 3) if kind == "a" else sv_regularize_c(b, 3)
    t = log_grid(1e-4, 1e4, 3)
    eps = 1e-5
    for ell in range(1, 4):
        cur = reg.level(ell, t)
        prev = reg.level(ell - 1, t)
        scaled_derivative = (reg.level(ell, t * (1 + eps)) - reg.level(ell, t * (1 - eps))) / (2 * eps)
        expected = prev - cur if kind == "a" else cur - prev
        assert np.all(np.abs(scaled_derivative - expected) <= 1e-4 * np.abs(cur)), (ell, b.literal())


def _step_profiles(count: int = 20, seed: int = 5) -> list[DecreasingProfile]:
    """Non-increasing step profiles vanishing beyond their last break."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(1, 6))
        t = np.concatenate(([0.0], np.sort(rng.uniform(0.01, 10.0, m))))
        v = np.concatenate((np.sort(rng.uniform(0.1, 2.0, m))[::-1], [0.0]))
        out.append(DecreasingProfile(t, v))
    return out


def test_q_bounded_when_br_and_binftystar_hold():
    """w = t^{1/2}, r = 2: both conditions hold and ‖Qh‖ ≤ (r/a)‖h‖ with a = 3/2 on 20 profiles."""
    w = PowerSVWeight.pure(0.5)
    assert check_Br(w, 2.0).holds
    assert check_Binftystar(w).holds
    band = hardy_Q_bound_probe(w, 2.0, _step_profiles())
    assert band.operator == "Q"
    assert len(band.ratios) == 20
    assert band.bounded
    assert 0 < band.constant <= 4.0 / 3.0 + 1e-6


def test_qeta_bounded_when_brstar_holds():
    """Q_{1/2} on L_2(t^{1/2}): w ∈ B*_1 and the band stays below 1/(a/r - η) = 4."""
    w = PowerSVWeight.pure(0.5)
    assert check_Brstar(w, 1.0).holds
    band = qeta_bound_probe(w, 2.0, 0.5, _step_profiles())
    assert band.operator == "Q_0.5"
    assert band.bounded
    assert 0 < band.constant <= 4.0 + 1e-6
    with pytest.raises(InputError):
        qeta_bound_probe(w, 2.0, 1.0, _step_profiles(2))
