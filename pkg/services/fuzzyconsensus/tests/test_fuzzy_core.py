"""
Tests for trapezoidal membership functions.
"""

import numpy as np
import pytest

from ..errors import InvalidInputError
from ..fuzzy_core import (
    make_trapezoid,
    measurement_trapezoids,
    membership,
    membership_array,
    require_one_dimensional,
    scale,
    translate,
)
from ..models import Interval, Measurement, TrapezoidMF


class TestMakeTrapezoid:
    """Test trapezoid construction from value and error."""

    def test_ramp_width_equals_error(self):
        """Test core v ± e and support v ± 2e."""
        mf = make_trapezoid(7.3, 0.1)
        assert mf.core.lo == pytest.approx(7.2)
        assert mf.core.hi == pytest.approx(7.4)
        assert mf.support.lo == pytest.approx(7.1)
        assert mf.support.hi == pytest.approx(7.5)

    def test_exact_breakpoints(self):
        """Test breakpoints with exactly representable numbers."""
        assert make_trapezoid(2.0, 0.25).breakpoints == (1.5, 1.75, 2.25, 2.5)

    def test_zero_error_is_a_point(self):
        """Test that e = 0 degenerates to a point."""
        mf = make_trapezoid(5.0, 0.0)
        assert mf.core == Interval(lo=5.0, hi=5.0)
        assert mf.support == Interval(lo=5.0, hi=5.0)
        assert mf.is_point

    def test_sensor_reading(self):
        """Test the (2.0, 0.2) reading."""
        mf = make_trapezoid(2.0, 0.2)
        assert mf.breakpoints == pytest.approx((1.6, 1.8, 2.2, 2.4))
        values = [membership(mf, x) for x in mf.breakpoints] + [membership(mf, 2.0)]
        assert values == pytest.approx([0.0, 1.0, 1.0, 0.0, 1.0])

    def test_negative_error_rejected(self):
        """Test that a negative error is rejected."""
        with pytest.raises(InvalidInputError):
            make_trapezoid(1.0, -0.1)

    def test_ramp_override(self):
        """Test a custom ramp width."""
        mf = make_trapezoid(0.0, 1.0, ramp=0.5)
        assert mf.breakpoints == (-1.5, -1.0, 1.0, 1.5)

    def test_zero_ramp_with_positive_error_rejected(self):
        """Test that a discontinuous shape is refused."""
        with pytest.raises(InvalidInputError):
            make_trapezoid(0.0, 1.0, ramp=0.0)

    def test_triangle_from_zero_error_and_ramp(self):
        """Test that e = 0 with a positive ramp gives a triangle."""
        mf = make_trapezoid(0.0, 0.0, ramp=1.0)
        assert mf.breakpoints == (-1.0, 0.0, 0.0, 1.0)
        assert membership(mf, 0.5) == 0.5


class TestMembership:
    """Test membership evaluation."""

    def test_within_error(self):
        """Test that a deviation within the error keeps full confidence."""
        mf = make_trapezoid(7.3, 0.1)
        assert membership(mf, 7.3) == 1.0
        assert membership(mf, 7.4) == pytest.approx(1.0, abs=1e-9)

    def test_half_confidence_on_ramp(self):
        """Test the ramp midpoint."""
        assert membership(make_trapezoid(7.3, 0.1), 7.45) == pytest.approx(0.5)

    def test_outside_support(self):
        """Test zero outside the support."""
        assert membership(make_trapezoid(7.3, 0.1), 7.6) == 0.0

    def test_bounded_and_core_exact(self):
        """Test 0 <= A(x) <= 1 and A(x) = 1 exactly on the core."""
        mf = make_trapezoid(1.0, 0.5)
        for x in np.linspace(-1, 3, 401):
            value = membership(mf, float(x))
            assert 0.0 <= value <= 1.0
            assert (value == 1.0) == (0.5 <= x <= 1.5)

    def test_continuity_at_breakpoints(self):
        """Test continuity at every breakpoint."""
        mf = make_trapezoid(3.0, 0.5)
        slope = 1 / 0.5
        eps = 1e-9
        for b in mf.breakpoints:
            assert abs(membership(mf, b - eps) - membership(mf, b + eps)) <= 3 * eps * slope

    def test_symmetry(self):
        """Test A(v - t) = A(v + t)."""
        mf = make_trapezoid(4.0, 0.5)
        for t in (0.0, 0.25, 0.5, 0.75, 1.0, 1.25):
            assert membership(mf, 4.0 - t) == membership(mf, 4.0 + t)

    def test_array_matches_scalar(self):
        """Test the vectorised evaluation."""
        mf = make_trapezoid(2.0, 0.3)
        xs = np.linspace(1.0, 3.0, 101)
        expected = [membership(mf, float(x)) for x in xs]
        assert membership_array(mf, xs) == pytest.approx(expected, abs=1e-12)

    def test_array_on_point(self):
        """Test the vectorised evaluation of a point."""
        out = membership_array(make_trapezoid(2.0, 0.0), [1.0, 2.0, 3.0])
        assert list(out) == [0.0, 1.0, 0.0]


class TestTranslate:
    """Test translation and scaling."""

    def test_shift(self):
        """Test a unit shift."""
        mf = TrapezoidMF(support=Interval(lo=0, hi=3), core=Interval(lo=1, hi=2))
        shifted = translate(mf, 1.0)
        assert shifted.core == Interval(lo=2, hi=3)
        assert shifted.support == Interval(lo=1, hi=4)

    def test_zero_shift_is_identity(self):
        """Test that delta = 0 returns the same function."""
        mf = make_trapezoid(7.3, 0.1)
        assert translate(mf, 0.0) == mf

    def test_shift_matches_construction(self):
        """Test translate(make_trapezoid(7.3, 0.1), 0.7) = make_trapezoid(8.0, 0.1)."""
        shifted = translate(make_trapezoid(7.3, 0.1), 0.7)
        assert shifted.breakpoints == pytest.approx(make_trapezoid(8.0, 0.1).breakpoints)

    def test_membership_translates(self):
        """Test A_shifted(x) = A(x - delta) with exact arithmetic."""
        mf = make_trapezoid(1.0, 0.25)
        shifted = translate(mf, 0.5)
        for x in np.arange(0.0, 3.0, 0.125):
            assert membership(shifted, float(x)) == membership(mf, float(x) - 0.5)

    def test_scale(self):
        """Test positive scaling of breakpoints."""
        assert scale(make_trapezoid(1.0, 0.25), 2.0).breakpoints == (1.0, 1.5, 2.5, 3.0)
        with pytest.raises(InvalidInputError):
            scale(make_trapezoid(1.0, 0.25), 0.0)


class TestHelpers:
    """Test measurement helpers."""

    def test_trapezoid_per_dimension(self):
        """Test one trapezoid per dimension."""
        mfs = measurement_trapezoids(Measurement(id="a", values=(1.0, 2.0), errors=(0.5, 0.25)))
        assert [mf.core for mf in mfs] == [Interval(lo=0.5, hi=1.5), Interval(lo=1.75, hi=2.25)]

    def test_require_one_dimensional(self):
        """Test rejection of empty and multi-dimensional input."""
        with pytest.raises(InvalidInputError):
            require_one_dimensional([])
        with pytest.raises(InvalidInputError):
            require_one_dimensional([Measurement(id="a", values=(1.0, 2.0), errors=(0.1, 0.1))])
