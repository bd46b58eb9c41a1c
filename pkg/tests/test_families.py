"""Tests for the seeded test-function families."""
import numpy as np
import pytest
from pydantic import ValidationError

from smoothlab.harness.families import FamilySpec, _check_support, generate_family
from smoothlab.shared.errors import InputError


def test_family_is_deterministic_in_seed():
    """Same seed, same values; a different seed changes them."""
    spec = FamilySpec(kind="gaussians", count=3)
    a = generate_family(spec, seed=7, cells=128, half_width=1.0)
    b = generate_family(spec, seed=7, cells=128, half_width=1.0)
    c = generate_family(spec, seed=8, cells=128, half_width=1.0)
    for x, y in zip(a, b):
        assert np.array_equal(x.f.values, y.f.values)
    assert not np.array_equal(a[0].f.values, c[0].f.values)


def test_members_differ_within_a_family():
    """Member i draws from its own stream."""
    members = generate_family(FamilySpec(kind="splines", count=2), seed=0, cells=128, half_width=1.0)
    assert not np.array_equal(members[0].f.values, members[1].f.values)


def test_composite_family_cycles_through_parts():
    """mixed = splines, gaussians, cusps, splines, ..."""
    members = generate_family(FamilySpec(kind="mixed", count=4), seed=0, cells=64, half_width=1.0)
    assert [m.f_id for m in members] == ["splines-0", "gaussians-1", "cusps-2", "splines-3"]


@pytest.mark.parametrize("kind", ["indicators", "hats", "splines", "gaussians", "cusps", "trig"])
def test_members_vanish_at_the_boundary(kind):
    """Zero extension loses nothing: edge cells are (numerically) zero."""
    for m in generate_family(FamilySpec(kind=kind, count=3), seed=1, cells=128, half_width=1.0):
        v = m.f.values
        assert abs(v[0]) <= 1e-12 * np.max(np.abs(v))
        assert abs(v[-1]) <= 1e-12 * np.max(np.abs(v))


def test_family_overrides_grid_and_dimension():
    """Per-family cells and dim win over the run grid."""
    members = generate_family(FamilySpec(kind="hats", count=1, dim=2, cells=16, half_width=2.0),
                              seed=0, cells=4096, half_width=1.0)
    f = members[0].f
    assert f.values.shape == (16, 16)
    assert f.box[0] == pytest.approx((-2.0, 2.0))


def test_zero_family():
    """The zero family is identically zero."""
    members = generate_family(FamilySpec(kind="zero", count=2), seed=0, cells=32, half_width=1.0)
    assert all(not np.any(m.f.values) for m in members)


def test_support_check():
    """Mass on the boundary layer is rejected."""
    with pytest.raises(InputError):
        _check_support(np.ones(8))
    _check_support(np.zeros(8))


def test_family_spec_validation():
    """count and cells are bounded; unknown kinds are rejected."""
    with pytest.raises(ValidationError):
        FamilySpec(kind="gaussians", count=0)
    with pytest.raises(ValidationError):
        FamilySpec(kind="gaussians", cells=4)
    with pytest.raises(ValidationError):
        FamilySpec(kind="wavelets")
