"""Tests for the rigid tower construction and the exact pushforwards."""

from fractions import Fraction as F

import pytest

from ergoscope.core.exceptions import BetaInForbiddenRegion, InvariantViolated, OutOfRange
from ergoscope.dynamics.iet_core import Permutation, find_positive_path
from ergoscope.dynamics.special_flow import (
    RoofPC,
    RoofPL,
    atomic_structure,
    cocycle_additivity,
    pushforward_exact,
)
from ergoscope.dynamics.tower_construction import (
    ConstructionParams,
    build_construction,
    check_Yn,
    default_params,
    measure_report,
    pick_beta,
    sample_Yn,
    verify_gluing,
    verify_rigidity,
)

K, L, N = 3, 2, 3


@pytest.fixture(scope="module")
def path():
    return find_positive_path(Permutation.symmetric(4), 200, seed=0)


@pytest.fixture(scope="module")
def params(path):
    return default_params(K, L, N, path)


@pytest.fixture(scope="module")
def state(params):
    return build_construction(params)


class TestParams:
    """Test admissibility of the construction parameters."""

    def test_default_params_constants(self, params, path):
        assert params.epsilon == min(1 / (100 * path.rho), F(1, 100 * K)) / 2
        assert params.delta == params.epsilon * F(11, 24)
        assert params.delta_prime == params.epsilon * F(3, 8)

    @pytest.mark.parametrize("k, l", [(2, 2), (2, 3), (1, 0)])
    def test_requires_k_above_l(self, path, k, l):
        with pytest.raises(InvariantViolated):
            default_params(k, l, N, path)

    def test_requires_level_two(self, path):
        with pytest.raises(InvariantViolated):
            default_params(K, L, 1, path)

    def test_explicit_params_checked(self, params, path):
        bad = ConstructionParams(
            K=K, L=L, n=N,
            epsilon=params.epsilon,
            delta=params.delta_prime,
            delta_prime=params.delta,
            path=path,
        )
        with pytest.raises(InvariantViolated):
            bad.check()


class TestYn:
    """Test the sampled point of the parameter window."""

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_sample_holds(self, path, n):
        p = default_params(K, L, n, path)
        vector = sample_Yn(p)

        report = check_Yn(vector, p)

        assert sum(vector) == 1
        assert report.holds
        assert report.Q_n > 0
        assert all(m > 0 for m in report.margins.values())

    def test_uniform_vector_misses(self, params):
        report = check_Yn([F(1, 4)] * 4, params)

        assert not report.holds

    def test_build_rejects_foreign_point(self, params):
        with pytest.raises(InvariantViolated):
            build_construction(params, lambda_prime=[F(1, 4)] * 4)


class TestConstruction:
    """Test the towers and controlled sets at a small level."""

    def test_partition(self, state):
        assert state.partition_ok

    def test_return_time(self, state):
        a = state.first_letter
        last = state.last_letter

        assert state.q_n == state.s[last] + N * state.s[a]
        assert state.gamma_n == state.q_n * state.Delta_n
        assert state.Delta_n > 0
        assert state.J_length > 0

    def test_measure_identities(self, state):
        report = measure_report(state)

        assert report["sums_to_one"]
        assert report["Z_identity"]
        assert report["W_identity"]

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_rigidity(self, state, i):
        report = verify_rigidity(state, i)

        assert report.holds
        assert report.max_deviation == 0
        assert report.verified_measure == state.controlled.measure()

    def test_rigidity_range(self, state):
        with pytest.raises(OutOfRange):
            verify_rigidity(state, K + 1)

    def test_gluing(self, state):
        assert verify_gluing(state)["holds"]

    def test_to_dict(self, state):
        data = state.to_dict()

        assert data["q_n"] == state.q_n


class TestPickBeta:
    """Test placement of the pc roof jump."""

    def test_inside_window(self, state):
        beta = pick_beta(state, 0, "3/4")

        assert beta == F(3, 4) * state.J_length
        assert state.beta_window.contains(beta)

    @pytest.mark.parametrize("m, offset", [(0, "1/4"), (0, "1"), (-1, "3/4")])
    def test_rejects(self, state, m, offset):
        with pytest.raises(OutOfRange):
            pick_beta(state, m, offset)

    def test_rejects_level_past_return(self, state):
        with pytest.raises(OutOfRange):
            pick_beta(state, state.q_n, "3/4")


class TestPushforward:
    """Test the exact laws on the controlled set."""

    @pytest.mark.parametrize("i", [L, K])
    def test_pc_atoms_on_lattice(self, state, i):
        jump = F(1)
        roof = RoofPC.default(state.T, pick_beta(state, 0, "3/4"), jump)

        result = pushforward_exact(state, roof, i)
        structure = atomic_structure(state, result, jump)

        assert result.controlled_mass == state.controlled.measure()
        assert result.conditional().total_mass == 1
        assert structure["support_on_lattice"]
        assert structure["mass_at_zero_bound"]

    def test_pc_additivity(self, state):
        roof = RoofPC.default(state.T, pick_beta(state, 0, "3/4"), F(1))

        report = cocycle_additivity(state, roof, K)

        assert report["failures"] == 0

    def test_pc_forbidden_beta(self, state):
        roof = RoofPC.default(state.T, state.J_length / 4, F(1))

        with pytest.raises(BetaInForbiddenRegion):
            pushforward_exact(state, roof, L)

    def test_pl_density(self, state):
        roof = RoofPL.default(state.T, F(1))

        result = pushforward_exact(state, roof, L)

        assert result.measure.total_mass == result.controlled_mass
        assert result.conditional().total_mass == 1

    def test_multiplier_range(self, state):
        roof = RoofPL.default(state.T, F(1))

        with pytest.raises(OutOfRange):
            pushforward_exact(state, roof, 0)
