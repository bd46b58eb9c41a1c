"""Tests for case hypotheses, parameter parsing and the case registry."""
import math

import pytest

from smoothlab.harness.cases import (
    CASES,
    CaseId,
    CaseParams,
    cor59_spaces,
    get_case,
    parameter_validate,
    sobolev_exponent,
    thm68_spaces,
)
from smoothlab.shared.errors import InputError


def test_registry_covers_every_case_id():
    """Every CaseId has a definition with a non-empty anchor."""
    assert set(CASES) == set(CaseId)
    assert all(d.anchor for d in CASES.values())


def test_get_case_unknown_id():
    """Unknown ids are input errors."""
    with pytest.raises(InputError):
        get_case("NOT_A_CASE")


def test_prop11a_examples():
    """p = 3, r0 = r1 = 2, q0 = 2 is admissible; p = 2, r0 = 3, q0 = 2 is not."""
    ok = CaseParams(p=3, r0=2, r1=2, q0=2, beta=1, sigma=1)
    assert parameter_validate(CaseId.PROP11A, ok) == []
    bad = CaseParams(p=2, r0=3, r1=3, q0=2, beta=1, sigma=1)
    violations = parameter_validate(CaseId.PROP11A, bad)
    assert len(violations) == 1
    assert "q0 < 2" in violations[0]


def test_prop11b_q1_rule():
    """q1 >= max(p, 2, r0) away from p = 2."""
    assert parameter_validate(CaseId.PROP11B, CaseParams(p=3, r0=2, r1=2, q1=3, beta=1, gamma=1)) == []
    assert parameter_validate(CaseId.PROP11B, CaseParams(p=3, r0=2, r1=2, q1=2, beta=1, gamma=1))


def test_prop13prime_integer_condition():
    """β + δ must be an integer: β = δ = 1, n = 2 passes; β = 1/2 fails."""
    base = dict(n=2, p=1, delta=1, q1=2, r1=2)
    assert parameter_validate(CaseId.PROP13PRIME_A, CaseParams(beta=1, **base)) == []
    violations = parameter_validate(CaseId.PROP13PRIME_A, CaseParams(beta=0.5, **base))
    assert any("integer" in v for v in violations)


def test_ulyanov_strengthened_needs_k_below_n_over_p():
    """At n = 1, k = 1, p = 2 the strengthened form has no admissible parameters."""
    params = CaseParams(n=1, k=1, p=2, delta=0.25, p_star=4)
    assert parameter_validate(CaseId.ULYANOV_CLASSIC, params) == []
    assert parameter_validate(CaseId.ULYANOV_STRENGTHENED, params)
    assert parameter_validate(CaseId.ULYANOV_STRENGTHENED, CaseParams(n=2, k=1, p=1, delta=0.5)) == []


def test_p_star_must_match_sobolev_exponent():
    """1/p* = 1/p - δ/n."""
    assert sobolev_exponent(2.0, 0.25, 1) == pytest.approx(4.0)
    assert math.isinf(sobolev_exponent(2.0, 0.5, 1))
    violations = parameter_validate(CaseId.ULYANOV_CLASSIC, CaseParams(n=1, k=1, p=2, delta=0.25, p_star=3))
    assert any("p*" in v for v in violations)


def test_timan_fixes_q():
    """q = min(2, p)."""
    assert parameter_validate(CaseId.TIMAN, CaseParams(k=1, m=1, p=3, q=2)) == []
    assert parameter_validate(CaseId.TIMAN, CaseParams(k=1, m=1, p=3, q=1))


def test_missing_parameters_are_reported():
    """Each absent required parameter is its own violation."""
    violations = parameter_validate(CaseId.MARCHAUD_CLASSIC, CaseParams(k=1))
    assert "missing parameter m" in violations
    assert "missing parameter p" in violations


def test_thm68_needs_sv_up_factor():
    """b must be non-decreasing slowly varying."""
    base = dict(n=1, kappa=1, p=2, sigma=0.25, r=2, s=2)
    assert parameter_validate(CaseId.THM68, CaseParams(b="logplus^0.5", **base)) == []
    assert parameter_validate(CaseId.THM68, CaseParams(b="log^0.5", **base))


def test_thm68_spaces():
    """L_{p*,s;B} on the left and L_{p,r;b_n B} on the right."""
    left, right = thm68_spaces(CaseParams(n=1, kappa=1, p=2, sigma=0.25, r=2, s=2, b="logplus^0.5", B="1"))
    assert left.p == pytest.approx(4.0)
    assert right.p == pytest.approx(2.0)
    assert right.b.end_gamma("zero") == pytest.approx(-0.5)


def test_cor59_hypotheses_and_spaces():
    """w = t^0 with n = 3, k = m = 1, r = 2 satisfies B_r, B*_{r(k+m-1)/n} and the divergence condition."""
    params = CaseParams(n=3, k=1, m=1, r=2, w="t^0")
    assert parameter_validate(CaseId.COR59, params) == []
    gamma, lam = cor59_spaces(params)
    assert gamma.r == 2
    assert lam.w.alpha == 0.0
    assert parameter_validate(CaseId.COR59, CaseParams(n=2, k=1, m=1, r=2, w="t^0"))


def test_holmstedt_case_rejects_bad_literals():
    """Literal errors become violations, not crashes."""
    params = CaseParams(k=1, space="Sobolev(p=2)", lattice="F(q=2,theta=0.5,gamma=0)", form="A1")
    violations = parameter_validate(CaseId.HOLMSTEDT_PROFILE, params)
    assert violations and "Sobolev" in violations[0]
    edge = CaseParams(k=1, space="Lebesgue(p=2)", lattice="F(q=inf,theta=0,gamma=0)", form="A2")
    assert parameter_validate(CaseId.HOLMSTEDT_PROFILE, edge)


def test_case_params_public_form():
    """Only set fields; infinities as "inf"."""
    params = CaseParams(p="inf", k=2)
    assert params.public() == {"k": 2, "p": "inf"}


def test_case_params_reject_unknown_keys():
    """extra='forbid'."""
    with pytest.raises(ValueError):
        CaseParams(zeta=1)
