"""Tests for Birkhoff sums of log-singular roofs."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from ergoscope.core.exceptions import (
    GridTooCoarse,
    InvalidParams,
    OrderUnsupported,
    SingularityHit,
)
from ergoscope.dynamics.birkhoff_log import (
    LogRoof,
    SeparationReport,
    TailTable,
    ak_interval_cover,
    birkhoff_sum,
    birkhoff_sum_grid,
    denjoy_koksma_check,
    dklog_residual,
    fit_separation_threshold,
    fit_tail,
    rescaled_tail_comparison,
    rotation_offsets,
    tail_mass,
    tail_tables,
    uniform_grid,
)
from ergoscope.dynamics.cf_rotation import (
    ContinuedFraction,
    find_diophantine_indices,
    make_ckl,
    random_quotients,
)


def _table(masses, w=1, grid_size=1000, b_values=None):
    b_values = b_values or [float(b) for b in range(2, 2 + len(masses))]
    return TailTable(b_values=b_values, masses=masses, w=w, k=0, n_k=1, grid_size=grid_size)


class TestLogRoof:
    """Test roof validation and closed forms."""

    def test_g_must_be_positive(self):
        with pytest.raises(InvalidParams):
            LogRoof(C_f=1.0, a0=1.0, cos_coeffs=(0.75,), sin_coeffs=(0.5,))
        with pytest.raises(InvalidParams):
            LogRoof(C_f=-1.0)

    def test_mean_and_variation(self):
        roof = LogRoof(C_f=1.5, a0=2.0, cos_coeffs=(0.5,), sin_coeffs=(0.25,))

        assert roof.mean() == pytest.approx(5.0)
        assert roof.g_variation_bound() == pytest.approx(4 * math.hypot(0.5, 0.25))
        assert roof.smooth_part().C_f == 0.0
        assert roof.degree == 1

    def test_values_match_formula(self):
        roof = LogRoof(C_f=1.0, a0=2.0, cos_coeffs=(0.5,))
        y = 0.2
        expected = -math.log(y) - math.log(1 - y) + 2.0 + 0.5 * math.cos(2 * math.pi * y)

        assert float(roof.values(y, 1 - y)) == pytest.approx(expected)


class TestBirkhoffSum:
    """Test scalar and grid Birkhoff sums."""

    def setup_method(self):
        self.cf = ContinuedFraction((1, 1, 1, 1, 1))
        self.roof = LogRoof(C_f=1.0, a0=2.0, cos_coeffs=(0.5,), sin_coeffs=(0.25,))

    def test_rotation_offsets_exact(self):
        assert rotation_offsets(self.cf, 4).tolist() == [0.0, 0.625, 0.25, 0.875]

    def test_constant_roof(self):
        value = birkhoff_sum(LogRoof(C_f=0.0, a0=2.0), self.cf, 0, 5, F(1, 7))

        assert value.value == pytest.approx(10.0)
        assert value.n_terms == 5
        assert value.error < 1e-12

    def test_exact_float_and_oracle_agree(self):
        exact = birkhoff_sum(self.roof, self.cf, 0, 8, F(1, 7))
        rounded = birkhoff_sum(self.roof, self.cf, 0, 8, 1 / 7)
        oracle = birkhoff_sum(self.roof, self.cf, 0, 8, F(1, 7), prec_bits=128)

        assert rounded.value == pytest.approx(exact.value, rel=1e-12)
        assert oracle.value == pytest.approx(exact.value, rel=1e-12)

    def test_singularity_is_reported(self):
        with pytest.raises(SingularityHit) as exc_info:
            birkhoff_sum(self.roof, self.cf, 0, 3, F(0))
        assert exc_info.value.index == 0

    def test_guard_from_settings(self, runtime_env, tmp_path):
        settings_file = tmp_path / "settings.yaml"
        settings_file.write_text("runtime:\n  singularity_guard: 1.0e-3\n")
        runtime_env(ERGOSCOPE_CONFIG=settings_file)
        x = F(1, 10000)

        with pytest.raises(SingularityHit):
            birkhoff_sum(self.roof, self.cf, 0, 1, x)
        with pytest.raises(SingularityHit):
            birkhoff_sum_grid(self.roof, self.cf, 0, 1, np.array([float(x)]))
        assert birkhoff_sum(self.roof, self.cf, 0, 1, x, guard=1e-14).value > 0

    def test_unsupported_order(self):
        with pytest.raises(OrderUnsupported):
            birkhoff_sum(self.roof, self.cf, 4, 3, F(1, 7))

    def test_grid_matches_scalar(self):
        xs = uniform_grid(50)
        grid = birkhoff_sum_grid(self.roof, self.cf, 0, 8, xs)

        for idx in (0, 17, 49):
            scalar = birkhoff_sum(self.roof, self.cf, 0, 8, float(xs[idx]))
            assert grid.values[idx] == pytest.approx(scalar.value, rel=1e-12)

    def test_grid_independent_of_threads(self):
        xs = uniform_grid(1000)
        one = birkhoff_sum_grid(self.roof, self.cf, 1, 8, xs, threads=1, chunk_size=64)
        many = birkhoff_sum_grid(self.roof, self.cf, 1, 8, xs, threads=4, chunk_size=64)

        assert np.array_equal(one.values, many.values)
        assert np.array_equal(one.errors, many.errors)

    def test_uniform_grid(self):
        xs = uniform_grid(100)

        assert xs.size == 100
        assert 0 < xs.min() and xs.max() < 1
        assert np.all(np.diff(xs) > 0)


class TestDenjoyKoksma:
    """Test the smooth-part bound and the closest-point residual."""

    def test_denjoy_koksma_holds(self):
        cf = random_quotients(12, seed=1, max_quotient=3)
        roof = LogRoof(C_f=1.0, a0=2.0, cos_coeffs=(0.5,), sin_coeffs=(0.25,))
        report = denjoy_koksma_check(roof, cf, 5, grid_size=2000)

        assert report["holds"]
        assert report["max_deviation"] <= report["variation_bound"] + report["error_budget"]

    def test_dklog_residual_within_bound(self):
        cf = random_quotients(12, seed=2, max_quotient=3)
        report = dklog_residual(cf, 5, 2, 0.123456789)

        assert report["holds"]

    def test_dklog_rejects_order(self):
        cf = random_quotients(12, seed=2, max_quotient=3)
        with pytest.raises(OrderUnsupported):
            dklog_residual(cf, 5, 0, 0.3)


class TestTails:
    """Test tail tables, fits and comparisons."""

    def setup_method(self):
        self.cf = make_ckl(2, 3, count=1, c=1.0, filler_bound=2)
        self.witness = find_diophantine_indices(self.cf, 2, 3, 1.0)
        self.roof = LogRoof(C_f=1.0, a0=2.0, cos_coeffs=(0.5,))

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            tail_mass(self.roof, self.cf, self.witness, 0, 1, [2.0], grid_size=10)

    def test_unknown_witness_index(self):
        with pytest.raises(InvalidParams):
            tail_mass(self.roof, self.cf, self.witness, 5, 1, [2.0], grid_size=10_000)

    def test_shared_rows_match_single_table(self):
        q = self.cf.q(self.witness.indices[0])
        grid_size = 10 * q + 7
        b_grid = [1.0, 2.0, 3.0, 4.0]
        tables = tail_tables(self.roof, self.cf, self.witness, 0, [1, 3], b_grid, grid_size)
        single = tail_mass(self.roof, self.cf, self.witness, 0, 1, b_grid, grid_size)

        assert sorted(tables) == [1, 3]
        assert tables[1].masses == single.masses
        for table in tables.values():
            assert all(a >= b for a, b in zip(table.masses, table.masses[1:]))
            assert len(table.rows()) == len(b_grid)

    def test_fit_tail_exact_exponential(self):
        bs = [2.0, 3.0, 4.0, 5.0]
        fit = fit_tail(_table([math.exp(-b) for b in bs], b_values=bs))

        assert fit.slope == pytest.approx(-1.0)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert fit.D == pytest.approx(1.0)
        assert fit.points == 4

    def test_fit_tail_needs_two_points(self):
        fit = fit_tail(_table([0.1, 0.0, 0.0]))

        assert math.isnan(fit.slope)
        assert fit.points == 1

    def test_rescaled_comparison_signature(self):
        result = rescaled_tail_comparison(_table([0.4, 0.2], w=3), _table([0.1, 0.1], w=2))

        assert result["signature"]
        assert result["rows"][0]["ratio"] == pytest.approx(4.0)
        assert result["w_K"] == 3 and result["w_L"] == 2
        assert result["max_noise"] == pytest.approx(1 / math.sqrt(100))

    def test_rescaled_comparison_zero_mass(self):
        result = rescaled_tail_comparison(_table([0.1, 0.0]), _table([0.1, 0.05]))

        assert not result["signature"]
        assert result["rows"][1]["ratio"] is None

    def test_fit_separation_threshold(self):
        reports = [
            SeparationReport(b=b, L=2, violations=v, margin=None, checked_points=10)
            for b, v in [(2.0, 3), (4.0, 1), (6.0, 0), (8.0, 0)]
        ]

        assert fit_separation_threshold(reports) == 6.0
        assert fit_separation_threshold(reports[:2]) is None

    def test_cover_rejects_small_D(self):
        with pytest.raises(InvalidParams):
            ak_interval_cover(self.cf, self.witness, 0, 2.0, 0.5)
