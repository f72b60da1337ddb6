"""Tests for the probability measure representations."""

from fractions import Fraction as F

import pytest

from ergoscope.core.exceptions import (
    DegenerateSupport,
    InvalidParams,
    MixedArithmetic,
    SubProbability,
    ZeroScale,
)
from ergoscope.dynamics.measures import (
    AtomicMeasure,
    EmpiricalMeasure,
    PiecewiseConstantDensity,
    PiecewiseLinearDensity,
    atom_spectrum,
    cdf_table,
    exp_decay_check,
    find_exp_decay,
    ks_distance,
    measure_from_dict,
    rescale,
)


class TestAtomicMeasure:
    """Test finite atomic measures."""

    def setup_method(self):
        self.P = AtomicMeasure([(F(1), F(1, 4)), (F(3), F(1, 2)), (F(1), F(1, 4))])

    def test_atoms_merge(self):
        assert self.P.atoms() == [(F(1), F(1, 2)), (F(3), F(1, 2))]
        assert self.P.total_mass == 1
        assert self.P.is_exact

    def test_cdf_sides(self):
        assert self.P.cdf(F(1)) == F(1, 2)
        assert self.P.cdf_left(F(1)) == 0
        assert self.P.cdf(F(5)) == 1

    def test_conditional(self):
        half = self.P.scaled_mass(F(1, 2))

        assert half.total_mass == F(1, 2)
        assert half.conditional().atoms() == self.P.atoms()
        with pytest.raises(DegenerateSupport):
            AtomicMeasure([]).conditional()

    def test_negative_mass(self):
        with pytest.raises(SubProbability):
            AtomicMeasure([(F(0), F(-1))])

    def test_rescale(self):
        assert rescale(self.P, 2).atoms() == [(F(1, 2), F(1, 2)), (F(3, 2), F(1, 2))]
        assert rescale(rescale(self.P, 2), 3).atoms() == rescale(self.P, 6).atoms()
        assert rescale(self.P, 1).atoms() == self.P.atoms()

    def test_rescale_errors(self):
        with pytest.raises(ZeroScale):
            rescale(self.P, 0)
        with pytest.raises(MixedArithmetic):
            rescale(self.P, 0.5)

    def test_atom_spectrum(self):
        P = AtomicMeasure([(F(0), F(1, 10)), (F(1), F(9, 10))])

        assert atom_spectrum(P, F(1, 2)) == [(F(1), F(9, 10))]
        assert len(atom_spectrum(P)) == 2


class TestDensities:
    """Test piecewise linear and piecewise constant densities."""

    def setup_method(self):
        self.triangle = PiecewiseLinearDensity([F(0), F(1, 2), F(1)], [F(0), F(2), F(0)])
        self.uniform = PiecewiseConstantDensity([F(0), F(1)], [F(1)])

    def test_triangle_cdf(self):
        assert self.triangle.total_mass == 1
        assert self.triangle.cdf(F(1, 4)) == F(1, 8)
        assert self.triangle.cdf(F(1, 2)) == F(1, 2)
        assert self.triangle.density(F(1, 4)) == 1

    def test_rescale_keeps_mass(self):
        scaled = rescale(self.triangle, 2)

        assert scaled.breakpoints() == [F(0), F(1, 4), F(1, 2)]
        assert scaled.values == [F(0), F(4), F(0)]
        assert scaled.total_mass == 1

    def test_negative_rescale_reflects(self):
        skew = PiecewiseLinearDensity([F(0), F(1), F(3)], [F(0), F(2, 3), F(0)])
        mirrored = rescale(skew, -1)

        assert mirrored.breakpoints() == [F(-3), F(-1), F(0)]
        assert mirrored.cdf(F(-1)) == F(2, 3)

    def test_from_segments(self):
        P = PiecewiseConstantDensity.from_segments([
            (F(0), F(1), F(1, 2)),
            (F(1, 2), F(3, 2), F(1, 2)),
        ])

        assert P.breakpoints() == [F(0), F(1, 2), F(1), F(3, 2)]
        assert P.values == [F(1, 2), F(1), F(1, 2)]
        assert P.total_mass == 1

    def test_invalid_densities(self):
        with pytest.raises(DegenerateSupport):
            PiecewiseLinearDensity([F(0)], [F(1)])
        with pytest.raises(DegenerateSupport):
            PiecewiseConstantDensity([F(1), F(0)], [F(1)])
        with pytest.raises(SubProbability):
            PiecewiseConstantDensity([F(0), F(1)], [F(-1)])


class TestKsDistance:
    """Test the Kolmogorov-Smirnov distance."""

    def test_interior_crossing(self):
        uniform = PiecewiseConstantDensity([F(0), F(1)], [F(1)])
        triangle = PiecewiseLinearDensity([F(0), F(1, 2), F(1)], [F(0), F(2), F(0)])

        assert ks_distance(uniform, triangle) == F(1, 8)

    def test_point_masses(self):
        assert ks_distance(AtomicMeasure([(F(0), F(1))]), AtomicMeasure([(F(1), F(1))])) == 1

    def test_metric_axioms(self):
        P = AtomicMeasure([(F(0), F(1, 2)), (F(1), F(1, 2))])
        Q = AtomicMeasure([(F(0), F(1, 3)), (F(2), F(2, 3))])
        R = PiecewiseConstantDensity([F(0), F(2)], [F(1, 2)])

        assert ks_distance(P, P) == 0
        assert ks_distance(P, Q) == ks_distance(Q, P)
        assert ks_distance(P, R) <= ks_distance(P, Q) + ks_distance(Q, R)

    def test_sub_probability_rejected(self):
        with pytest.raises(SubProbability):
            ks_distance(AtomicMeasure([(F(0), F(1, 2))]), AtomicMeasure([(F(0), F(1))]))

    def test_mixed_arithmetic(self):
        exact = AtomicMeasure([(F(0), F(1))])
        rounded = AtomicMeasure([(0.0, 1.0)])

        with pytest.raises(MixedArithmetic):
            ks_distance(exact, rounded)
        assert ks_distance(exact, EmpiricalMeasure([0.0, 0.0])) == pytest.approx(0.0)


class TestHelpers:
    """Test serialization and decay certificates."""

    def test_dict_round_trip(self):
        for P in (
            AtomicMeasure([(F(1), F(1, 2)), (F(2), F(1, 2))]),
            PiecewiseLinearDensity([F(0), F(1, 2), F(1)], [F(0), F(2), F(0)]),
            PiecewiseConstantDensity([F(0), F(1)], [F(1)]),
        ):
            Q = measure_from_dict(P.to_dict())
            assert ks_distance(P, Q) == 0

    def test_empirical_round_trip(self):
        P = EmpiricalMeasure([0.5, 0.25, 1.0])
        Q = measure_from_dict(P.to_dict())

        assert Q.samples.tolist() == [0.25, 0.5, 1.0]
        assert Q.total_mass == pytest.approx(1.0)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParams):
            measure_from_dict({"kind": "nope"})

    def test_exp_decay(self):
        P = AtomicMeasure([(F(-1), F(1, 2)), (F(2), F(1, 2))])
        c, b = find_exp_decay(P)

        assert b == 1.0
        assert exp_decay_check(P, c, b)
        assert not exp_decay_check(P, 1.0, 1.0)

    @pytest.mark.parametrize("c, b", [(0.0, 1.0), (1.0, -1.0)])
    def test_exp_decay_rejects_constants(self, c, b):
        P = AtomicMeasure([(F(0), F(1))])

        with pytest.raises(InvalidParams):
            exp_decay_check(P, c, b)

    def test_cdf_table(self):
        P = AtomicMeasure([(F(0), F(1))])

        assert cdf_table(P, [F(-1), F(0)]) == [(F(-1), 0), (F(0), 1)]
