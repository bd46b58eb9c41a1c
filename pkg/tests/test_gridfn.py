"""Tests for grid functions, rearrangements and the exact f**, f** - f* calculus."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlab.core.gridfn import (
    DecreasingProfile,
    GridFunction,
    Interpolation,
    PiecewiseProfile,
    double_star,
    oscillation,
    profile_from_samples,
    rearrange,
    read_two_column_csv,
    shift_values,
)
from smoothlab.shared.errors import DomainError, InputError


def _indicator() -> GridFunction:
    return GridFunction.from_callable(lambda x: (np.abs(x) < 0.5).astype(float), [(-1.0, 1.0)], [100])


def test_rearrange_indicator_is_indicator():
    """f = χ(-1/2, 1/2) rearranges to χ(0, 1)."""
    star = rearrange(_indicator())
    assert star.is_step
    assert star.t.tolist() == pytest.approx([0.0, 1.0])
    assert star.v.tolist() == [1.0, 0.0]
    assert star(0.5) == 1.0
    assert star(1.5) == 0.0


def test_rearrange_zero_function():
    """f = 0 has f* = 0."""
    f = GridFunction(1, ((0.0, 1.0),), (10,), np.zeros(10))
    star = rearrange(f)
    assert np.all(star.v == 0)


def test_rearrange_exponential_matches_closed_form():
    """e^{-|x|} on a wide box rearranges to e^{-t/2} within 1e-3 on [0.1, 10]."""
    f = GridFunction.from_callable(lambda x: np.exp(-np.abs(x)), [(-10.0, 10.0)], [30000])
    star = rearrange(f)
    s = np.geomspace(0.1, 10.0, 200)
    assert np.max(np.abs(star(s) - np.exp(-s / 2))) < 1e-3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=-5, max_value=5), min_size=2, max_size=200),
       st.floats(min_value=-0.5, max_value=5.5))
def test_rearrangement_is_equimeasurable(levels, lam):
    """measure{|f| > λ} equals measure{f* > λ} for step functions."""
    vals = np.array(levels, dtype=float)
    f = GridFunction(1, ((0.0, 3.0),), (vals.size,), vals)
    star = rearrange(f)
    assert star.distribution(lam) == pytest.approx(f.distribution(lam), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(min_value=-10, max_value=10, allow_nan=False),
                          st.floats(min_value=-10, max_value=10, allow_nan=False)),
                min_size=2, max_size=300))
def test_hardy_littlewood_inequality(pairs):
    """Σ f g · cell ≤ ∫ f* g* dt for f, g sampled on a common grid."""
    vals = np.array(pairs)
    f = GridFunction(1, ((-1.0, 1.0),), (len(pairs),), vals[:, 0])
    g = GridFunction(1, ((-1.0, 1.0),), (len(pairs),), vals[:, 1])
    fs, gs = rearrange(f), rearrange(g)
    knots = np.union1d(fs.t, gs.t)
    mids = 0.5 * (knots[:-1] + knots[1:])
    rhs = float(np.sum(fs(mids) * gs(mids) * np.diff(knots)))
    lhs = float(np.sum(f.values * g.values) * f.cell_measure)
    assert lhs <= rhs + 1e-9 * max(1.0, rhs)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=2, max_size=300))
def test_rearrangement_preserves_lp_mass(values):
    """∫ f*^p = ∫ |f|^p for p in {1, 2}."""
    vals = np.array(values)
    f = GridFunction(1, ((-1.0, 1.0),), (vals.size,), vals)
    star = rearrange(f)
    widths = np.diff(star.t)
    for p in (1.0, 2.0):
        mass = float(np.sum(star.v[:-1] ** p * widths))
        assert mass == pytest.approx(f.lp_sum(p), rel=1e-9, abs=1e-9)


def test_double_star_of_indicator():
    """χ(0,1)** is 1 on (0, 1] and 1/t beyond."""
    g = DecreasingProfile([0.0, 1.0], [1.0, 0.0])
    ds = double_star(g)
    assert ds(0.5) == pytest.approx(1.0)
    assert ds(4.0) == pytest.approx(0.25)


def test_oscillation_is_nonnegative_and_vanishes_on_constants():
    """g** - g >= 0, and it is 0 where g is still constant."""
    g = DecreasingProfile([0.0, 1.0, 2.0], [3.0, 1.0, 0.0])
    osc = oscillation(g)
    pts = np.array([0.25, 0.75, 1.5, 3.0, 10.0])
    vals = osc(pts)
    assert np.all(vals >= -1e-12)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    assert osc(1.5) == pytest.approx((3.0 + 0.5) / 1.5 - 1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.01, max_value=5.0)),
                min_size=1, max_size=30))
def test_t_times_oscillation_is_nondecreasing(samples):
    """t (g** - g)(t) never decreases."""
    values = np.array([v for v, _ in samples])
    measures = np.array([m for _, m in samples])
    g = profile_from_samples(values, measures)
    osc = oscillation(g)
    t = np.geomspace(1e-3, 1e3, 300)
    scaled = t * osc(t)
    assert np.all(np.diff(scaled) >= -1e-9 * max(1.0, float(np.max(np.abs(scaled)))))


def test_profile_from_samples_merges_equal_values():
    """Equal values collapse into one step whose length is the total measure."""
    g = profile_from_samples(np.array([1.0, 2.0, 1.0]), np.array([0.5, 0.25, 0.5]))
    assert g.t.tolist() == pytest.approx([0.0, 0.25, 1.25])
    assert g.v.tolist() == [2.0, 1.0, 0.0]


def test_profile_rejects_increasing_values():
    """Decreasing profiles validate monotonicity."""
    with pytest.raises(InputError):
        DecreasingProfile([0.0, 1.0], [1.0, 2.0])


def test_loglinear_profile_needs_positive_first_knot():
    """LOGLINEAR interpolation is defined on log t only."""
    with pytest.raises(InputError):
        DecreasingProfile([0.0, 1.0], [2.0, 1.0], Interpolation.LOGLINEAR)


def test_profile_evaluation_requires_positive_t():
    """Profiles live on (0, inf)."""
    g = DecreasingProfile([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        g(0.0)


def test_shift_values_zero_extends():
    """Shifted-out samples are replaced by zeros."""
    out = shift_values(np.array([1.0, 2.0, 3.0]), [1])
    assert out.tolist() == [2.0, 3.0, 0.0]
    out = shift_values(np.array([1.0, 2.0, 3.0]), [-2])
    assert out.tolist() == [0.0, 0.0, 1.0]
    assert shift_values(np.array([1.0, 2.0]), [5]).tolist() == [0.0, 0.0]


def test_distribution_counts_cell_measures():
    """distribution(λ) is the measure of cells with |f| > λ."""
    f = GridFunction(2, ((0.0, 1.0), (0.0, 2.0)), (2, 2), np.array([[1.0, -3.0], [0.5, 0.0]]))
    assert f.cell_measure == pytest.approx(0.5)
    assert f.distribution(0.75) == pytest.approx(1.0)
    assert f.distribution(5.0) == 0.0


def test_grid_function_rejects_non_finite_values():
    """NaN and inf samples are input errors."""
    with pytest.raises(InputError):
        GridFunction(1, ((0.0, 1.0),), (2,), np.array([1.0, math.inf]))


def test_grid_function_csv_header_errors_carry_line():
    """A short box header is reported on line 2."""
    with pytest.raises(InputError) as exc:
        GridFunction.from_csv("dim,1\nbox,0\ncounts,2\n1\n2\n")
    assert exc.value.line == 2
    assert "line 2" in str(exc.value)


def test_grid_function_csv_bad_value_line():
    """A non-numeric sample names its line."""
    with pytest.raises(InputError) as exc:
        GridFunction.from_csv("dim,1\nbox,0,1\ncounts,2\n1.0\nabc\n")
    assert exc.value.line == 5


def test_grid_function_npz_round_trip(tmp_path):
    """save/load through .npz keeps box, counts and values."""
    f = _indicator()
    path = tmp_path / "f.npz"
    f.save(path)
    g = GridFunction.load(path)
    assert g.box == f.box
    assert g.counts == f.counts
    assert np.array_equal(g.values, f.values)


def test_load_missing_file_is_input_error(tmp_path):
    """Missing files surface as InputError (CLI exit code 2)."""
    with pytest.raises(InputError):
        GridFunction.load(tmp_path / "missing.csv")


def test_two_column_csv_skips_header():
    """A non-numeric first row is a header."""
    t, v = read_two_column_csv("t,v\n1.0,2.0\n2.0,1.0\n")
    assert t.tolist() == [1.0, 2.0]
    assert v.tolist() == [2.0, 1.0]


def test_average_rejects_reciprocal_tails():
    """A 1/t tail averages to log(t)/t, which has no piecewise representation."""
    z = np.zeros(2)
    tail = PiecewiseProfile([0.0, 1.0], [1.0, 0.0], z, z, [0.0, 1.0], [0.0, -1.0])
    with pytest.raises(DomainError):
        tail.double_star()
    with pytest.raises(DomainError):
        PiecewiseProfile([0.0, 1.0], [1.0, 0.0], z, [0.0, 1.0], z, z).double_star()
    power_tail = PiecewiseProfile([0.0, 1.0], [1.0, 0.0], z, z, [0.0, 1.0], [0.0, -2.0])
    assert power_tail.double_star()(2.0) == pytest.approx((1.0 + 0.5) / 2.0)
