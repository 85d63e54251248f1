import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cvdiscord import validation
from cvdiscord.covariance import (
    TwoModeState,
    gaussian_discord,
    gaussian_geometric_discord,
    h_entropy,
    standard_form,
    symplectic_data,
)
from cvdiscord.fock import FockMatrix, MeasurementBasis, thermal_pmf
from cvdiscord.measurement import (
    alpha_convergence_check,
    conditional_entropy,
    conditional_states,
    entropy_error_bound,
    non_gaussian_discord,
    non_gaussian_geometric_discord,
    number_basis_conditional_entropy,
    phase_invariance_check,
    trace_distance,
    von_neumann_entropy,
)

# photon-counting discord of STS(1, 1, 0.5) at eps = 1e-10 (bound 1.8e-10)
STS_REF_DNG = 0.6960441139115732
# the same state measured in the displaced (alpha = 1) and squeezed (r = 0.3) bases, eps = 1e-8
STS_REF_DNG_DISPLACED = 0.5993161340655502
STS_REF_DNG_SQUEEZED = 0.6984133388800697

photons = st.floats(0.0, 1.0)
sts_states = st.builds(TwoModeState.sts, photons, photons, st.floats(0.0, 0.5))
mts_states = st.builds(TwoModeState.mts, photons, photons, st.floats(0.0, math.pi / 2))


class TestConditionalStates:
    @pytest.mark.parametrize("n1,n2", [(0.3, 1.0), (1.0, 0.01)])
    def test_product_state(self, n1, n2):
        ens = conditional_states(TwoModeState.sts(n1, n2, 0.0), eps=1e-6)
        assert_allclose(ens.probabilities, [thermal_pmf(n2, n) for n in ens.indices], atol=1e-14)
        d = ens.states.shape[1]
        nu = np.diag([thermal_pmf(n1, h) for h in range(d)])
        assert np.max(np.abs(ens.states - nu[None])) <= 1e-11

    @pytest.mark.parametrize("state", [TwoModeState.sts(1.0, 1.0, 0.5), TwoModeState.mts(1.0, 0.0, math.pi / 4)])
    def test_number_basis_states_are_diagonal(self, state):
        assert validation.max_off_diagonal([state]) <= 1e-10

    @given(st.one_of(sts_states, mts_states))
    @settings(max_examples=15)
    def test_diagonality_property(self, state):
        assert validation.max_off_diagonal([state]) <= 1e-10

    def test_against_oracle_sandwich(self, sts_reference, mts_reference, oracle_rho):
        cases = [
            (sts_reference, MeasurementBasis()),
            (sts_reference, MeasurementBasis(1.0, 0.0)),
            (mts_reference, MeasurementBasis(1.0, 0.0)),
        ]
        assert validation.ensemble_discrepancy(cases) <= 1e-7

    def test_states_are_normalised_and_positive(self, sts_reference):
        ens = conditional_states(sts_reference, MeasurementBasis(0.7, 0.2), eps=1e-4)
        assert_allclose(np.einsum("nii->n", ens.states).real, 1.0, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(ens.states)) >= -1e-12
        assert ens.residual <= 1e-4
        assert not ens.truncation_dominated

    def test_residual_flag(self, sts_reference):
        ref = conditional_states(sts_reference, eps=1e-3)
        small = type(ref.cutoff)(4, ref.cutoff.trace_error, ref.cutoff.n_thermal, ref.cutoff.dim_a)
        ens = conditional_states(sts_reference, cutoff=small, eps=1e-3)
        assert ens.residual > 1e-3
        assert ens.truncation_dominated

    def test_state_lookup(self, sts_reference):
        ens = conditional_states(sts_reference)
        assert ens.state(2).shape == ens.states[0].shape
        assert len(ens.outcomes) == len(ens)
        with pytest.raises(KeyError):
            ens.state(10_000)


class TestNumberBasisShortcut:
    def test_product_state(self):
        value = number_basis_conditional_entropy(TwoModeState.sts(0.6, 1.0, 0.0), eps=1e-9)
        assert_allclose(value, h_entropy(1.1), atol=1e-9)

    def test_pure_state(self):
        assert abs(number_basis_conditional_entropy(TwoModeState.sts(0.0, 0.0, 0.5))) <= 1e-12

    def test_matches_column_entropies(self, sts_reference):
        ens = conditional_states(sts_reference, eps=1e-6)
        brute = 0.0
        for p, rho in zip(ens.probabilities, ens.states):
            col = np.real(np.diag(rho))
            col = col[col > 0]
            brute += p * float(-np.sum(col * np.log(col)))
        brute /= ens.probabilities.sum()
        assert_allclose(number_basis_conditional_entropy(sts_reference, eps=1e-6), brute, atol=1e-12)

    @pytest.mark.parametrize(
        "state", [TwoModeState.sts(1.0, 1.0, 0.5), TwoModeState.mts(1.0, 0.0, math.pi / 4), TwoModeState.sts(0.01, 0.01, 0.3)]
    )
    def test_matches_spectral_path(self, state):
        generic = conditional_entropy(conditional_states(state, eps=1e-6))
        assert abs(number_basis_conditional_entropy(state, eps=1e-6) - generic) <= 1e-10


class TestVonNeumannEntropy:
    def test_pure(self):
        rho = np.zeros((3, 3))
        rho[0, 0] = 1
        assert von_neumann_entropy(FockMatrix(rho)) == 0.0

    def test_truncated_thermal(self):
        size = 1
        while 1 - math.fsum(thermal_pmf(1.0, k) for k in range(size)) > 1e-6:
            size += 1
        p = np.array([thermal_pmf(1.0, k) for k in range(size)])
        assert_allclose(von_neumann_entropy(np.diag(p / p.sum())), h_entropy(1.5), atol=1e-4)

    def test_maximally_mixed(self):
        assert_allclose(von_neumann_entropy(np.eye(4) / 4), math.log(4), rtol=1e-14)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            von_neumann_entropy(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError):
            von_neumann_entropy(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError):
            von_neumann_entropy(np.diag([1.1, -0.1]))

    def test_clamps_tiny_negative_eigenvalue(self):
        assert_allclose(von_neumann_entropy(np.diag([1.0 + 1e-9, -1e-9])), 0.0, atol=1e-8)


class TestNonGaussianDiscord:
    @pytest.mark.parametrize("n", [0.01, 0.5, 1.0])
    def test_product_state(self, n):
        assert abs(non_gaussian_discord(TwoModeState.sts(n, n, 0.0)).non_gaussian_discord) <= 1e-9

    def test_frozen_value(self, sts_reference):
        r = non_gaussian_discord(sts_reference, eps=1e-10)
        assert_allclose(r.non_gaussian_discord, STS_REF_DNG, atol=1e-9)

    @pytest.mark.parametrize(
        "basis,expected", [(MeasurementBasis(1.0, 0.0), STS_REF_DNG_DISPLACED), (MeasurementBasis(0.0, 0.3), STS_REF_DNG_SQUEEZED)]
    )
    def test_frozen_values_in_other_bases(self, sts_reference, basis, expected):
        assert_allclose(non_gaussian_discord(sts_reference, basis, eps=1e-8).non_gaussian_discord, expected, atol=1e-7)

    def test_against_oracle(self, sts_brute):
        assert_allclose(sts_brute.discord, STS_REF_DNG, atol=2e-3)

    @pytest.mark.parametrize("basis", [MeasurementBasis(), MeasurementBasis(1.0, 0.3)])
    def test_definition_identity(self, sts_reference, basis):
        r = non_gaussian_discord(sts_reference, basis)
        sd = symplectic_data(standard_form(sts_reference))
        expected = h_entropy(math.sqrt(sd.I2)) - h_entropy(sd.d_minus) - h_entropy(sd.d_plus) + r.conditional_entropy
        assert abs(r.non_gaussian_discord - expected) <= 1e-12
        assert r.gaussian_discord == gaussian_discord(standard_form(sts_reference))

    @pytest.mark.parametrize(
        "basis", [MeasurementBasis(), MeasurementBasis(1.0, 0.0), MeasurementBasis(0.0, 0.4), MeasurementBasis(1.0, 0.3)]
    )
    def test_bound_encloses_converged_value(self, sts_reference, basis):
        r = non_gaussian_discord(sts_reference, basis, eps=1e-3)
        tight = non_gaussian_discord(sts_reference, basis, eps=1e-9)
        assert abs(r.non_gaussian_discord - tight.non_gaussian_discord) <= r.entropy_error_bound

    def test_truncation_flag(self, sts_reference):
        assert non_gaussian_discord(sts_reference, eps=1e-3).truncation_dominated
        assert not non_gaussian_discord(sts_reference, eps=1e-5).truncation_dominated

    @pytest.mark.parametrize("eps", [0.0, 2e-3, 0.5])
    def test_rejects_loose_tolerance(self, sts_reference, eps):
        with pytest.raises(ValueError):
            non_gaussian_discord(sts_reference, eps=eps)

    @given(st.one_of(sts_states, mts_states))
    @settings(max_examples=15)
    def test_above_gaussian_discord(self, state):
        r = non_gaussian_discord(state)
        assert r.non_gaussian_discord >= r.gaussian_discord - 1e-6

    @given(sts_states, st.sampled_from([MeasurementBasis(0.5, 0.0), MeasurementBasis(0.0, 0.3), MeasurementBasis(1.0, 0.2)]))
    @settings(max_examples=10)
    def test_above_gaussian_discord_in_other_bases(self, state, basis):
        r = non_gaussian_discord(state, basis)
        assert r.non_gaussian_discord >= r.gaussian_discord - 1e-6

    def test_entropy_bound_formula(self):
        assert entropy_error_bound(0.0, 1.0, 2.0, 0.0, 10) == 0.0
        assert_allclose(entropy_error_bound(1e-3, 1.0, 3.0, 0.0, 10), 2e-3)
        assert_allclose(entropy_error_bound(1e-3, 1.0, 0.5, 0.0, 10), 1e-3)


class TestGeometricDiscord:
    def test_product_state(self):
        assert abs(non_gaussian_geometric_discord(TwoModeState.sts(1.0, 0.5, 0.0), eps=1e-6)) <= 1e-9

    @pytest.mark.parametrize("lam", [0.1, 0.2, 0.3, 0.4, 0.5])
    def test_below_gaussian_value(self, lam):
        state = TwoModeState.sts(1.0, 1.0, lam)
        assert non_gaussian_geometric_discord(state) <= gaussian_geometric_discord(standard_form(state))

    def test_against_oracle(self, sts_reference, sts_brute):
        assert abs(non_gaussian_geometric_discord(sts_reference, eps=1e-9) - sts_brute.geometric_discord) <= 1e-6

    def test_non_negative(self):
        assert non_gaussian_geometric_discord(TwoModeState.sts(0.0, 0.0, 0.0)) >= 0.0


class TestPhaseInvariance:
    def test_zero_phase(self, sts_reference):
        assert phase_invariance_check(sts_reference, 1.0, [0.0], range(4)) == 0.0

    def test_quarter_turn(self, sts_reference):
        assert phase_invariance_check(sts_reference, 1.0, [math.pi / 2], range(4)) <= 1e-9

    def test_half_turn(self, sts_reference):
        assert phase_invariance_check(sts_reference, 2.0, [math.pi], range(4)) <= 1e-9

    @given(st.floats(0.0, 2 * math.pi))
    @settings(max_examples=10)
    def test_any_phase_mts(self, theta):
        state = TwoModeState.mts(1.0, 0.0, math.pi / 4)
        assert phase_invariance_check(state, 1.0, [theta], range(3)) <= 1e-9

    def test_discord_depends_only_on_modulus(self, sts_reference):
        a = non_gaussian_discord(sts_reference, MeasurementBasis(1.2, 0.0), eps=1e-6)
        b = non_gaussian_discord(sts_reference, MeasurementBasis(1.2j, 0.0), eps=1e-6)
        assert abs(a.non_gaussian_discord - b.non_gaussian_discord) <= 1e-9


class TestDisplacementLimit:
    def test_product_state(self):
        distances = alpha_convergence_check(TwoModeState.sts(0.5, 0.5, 0.0), [0.1, 1.0, 5.0], [0, 1, 2])
        assert max(distances) <= 1e-12

    def test_distances_decrease(self):
        distances = alpha_convergence_check(validation.fig9_state(), [0.1, 1.0, 5.0], [0, 1, 2])
        assert distances[0] > distances[1] > distances[2]

    def test_trace_distance(self):
        assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == 1.0
        assert trace_distance(np.eye(2) / 2, np.eye(2) / 2) == 0.0

    def test_large_displacement_tends_to_homodyne_entropy(self, sts_reference):
        # photon counting after a large displacement resolves one quadrature only
        cm = standard_form(sts_reference)
        a, b, c = cm.a, cm.b, cm.c1
        homodyne = h_entropy(math.sqrt(a * (a - c * c / b)))
        heterodyne = h_entropy(a - c * c / (b + 0.5))
        value = conditional_entropy(conditional_states(sts_reference, MeasurementBasis(8.0, 0.0), eps=1e-4))
        assert abs(value - homodyne) <= 5e-3
        assert value - heterodyne > 0.1
