"""Tests for cvsteg.fock_core."""

import math

import numpy as np
import pytest

from cvsteg.errors import CutoffMismatch, CutoffTooSmall, DimMismatch, DomainError, InvalidState, ModeError
from cvsteg.fock_core import (
    Cutoff,
    DensityOperator,
    ModeOperator,
    PureState,
    annihilation,
    apply_kraus,
    auto_cutoff,
    beamsplitter,
    coherent_tail,
    creation,
    displacement,
    displacement_block,
    expectation,
    gkp_cutoff,
    hermite_functions,
    identity,
    local,
    number_operator,
    parity,
    partial_trace,
    quadrature,
    quadrature_marginal,
    tensor,
    two_mode_squeezer,
)


def basis(n, n_max):
    amps = np.zeros(n_max, dtype=complex)
    amps[n] = 1.0
    return amps


def coherent_amps(alpha, n_max):
    return np.array([
        math.exp(-abs(alpha) ** 2 / 2) * alpha ** n / math.sqrt(math.factorial(n)) for n in range(n_max)
    ], dtype=complex)


class TestCutoff:
    """Test Cutoff validation."""

    def test_dim(self):
        assert Cutoff(5).dim() == 5
        assert Cutoff(5).dim(2) == 25

    def test_rejects_bad_values(self):
        with pytest.raises(DomainError):
            Cutoff(0)
        with pytest.raises(DomainError):
            Cutoff(5, hbar=0)
        with pytest.raises(DomainError):
            Cutoff(5, tau_norm=1.5)

    def test_domain_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            Cutoff(-3)


class TestPureState:
    """Test PureState validation and views."""

    def test_wrong_length(self):
        with pytest.raises(DimMismatch):
            PureState(np.ones(3), Cutoff(4))

    def test_norm_above_one(self):
        with pytest.raises(InvalidState):
            PureState(np.ones(4), Cutoff(4))

    def test_truncated_state_warns(self):
        with pytest.warns(CutoffTooSmall):
            state = PureState(0.5 * basis(0, 4), Cutoff(4))
        assert state.lost_mass == pytest.approx(0.75)

    def test_amplitudes_are_read_only(self):
        state = PureState(basis(1, 4), Cutoff(4))
        with pytest.raises(ValueError):
            state.amps[0] = 1.0

    def test_as_matrix(self):
        cutoff = Cutoff(3)
        amps = np.kron(basis(1, 3), basis(2, 3))
        mat = PureState(amps, cutoff, modes=2).as_matrix()
        assert mat[1, 2] == 1.0
        assert np.count_nonzero(mat) == 1

    def test_as_matrix_needs_two_modes(self):
        with pytest.raises(ModeError):
            PureState(basis(0, 3), Cutoff(3)).as_matrix()

    def test_three_modes_rejected(self):
        with pytest.raises(ModeError):
            PureState(np.zeros(27), Cutoff(3), modes=3)


class TestDensityOperator:
    """Test DensityOperator validation and lost mass."""

    def test_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.3], [0.0, 0.5]])
        with pytest.raises(InvalidState):
            DensityOperator(mat, Cutoff(2))

    def test_rejects_negative(self):
        with pytest.raises(InvalidState):
            DensityOperator(np.diag([1.2, -0.2]), Cutoff(2))

    def test_rejects_trace_above_one(self):
        with pytest.raises(InvalidState):
            DensityOperator(np.diag([0.7, 0.7]), Cutoff(2))

    def test_low_trace_warns_without_renormalizing(self):
        with pytest.warns(CutoffTooSmall):
            rho = DensityOperator(np.diag([0.5, 0.3]), Cutoff(2))
        assert rho.trace == pytest.approx(0.8)
        assert rho.lost_mass == pytest.approx(0.2)

    def test_purity(self, random_density):
        rho = random_density(4, rank=1)
        assert rho.purity == pytest.approx(1.0)
        mixed = random_density(4)
        assert mixed.purity < 1.0

    def test_tensor4_shape(self, random_density):
        rho = random_density(3, modes=2)
        assert rho.tensor4().shape == (3, 3, 3, 3)


class TestOperators:
    """Test ladder, number, parity and quadrature operators."""

    def test_lowering(self):
        cutoff = Cutoff(6)
        out = annihilation(cutoff).mat @ basis(3, 6)
        assert np.allclose(out, math.sqrt(3) * basis(2, 6))

    def test_commutator_away_from_edge(self):
        cutoff = Cutoff(8)
        a, ad = annihilation(cutoff).mat, creation(cutoff).mat
        comm = a @ ad - ad @ a
        assert np.allclose(np.diag(comm)[:-1], 1.0)
        assert comm[-1, -1] == pytest.approx(-7.0)

    def test_number_and_parity(self):
        cutoff = Cutoff(5)
        assert np.allclose(np.diag(number_operator(cutoff).mat), np.arange(5))
        assert np.allclose(np.diag(parity(cutoff).mat), [1, -1, 1, -1, 1])
        assert np.allclose(identity(cutoff, 2).mat, np.eye(25))

    def test_vacuum_quadrature_variance(self):
        cutoff = Cutoff(10)
        vac = PureState(basis(0, 10), cutoff)
        for which in ("x", "p", math.pi / 3):
            q = quadrature(cutoff, which)
            q2 = ModeOperator(q.mat @ q.mat, cutoff)
            assert expectation(vac, q).real == pytest.approx(0.0, abs=1e-12)
            assert expectation(vac, q2).real == pytest.approx(cutoff.hbar / 2)

    def test_quadrature_rejects_unknown_label(self):
        with pytest.raises(DomainError):
            quadrature(Cutoff(4), "y")

    def test_local_number(self):
        cutoff = Cutoff(4)
        state = PureState(np.kron(basis(2, 4), basis(1, 4)), cutoff, 2)
        n = number_operator(cutoff)
        assert expectation(state, local(n, 0)).real == pytest.approx(2.0)
        assert expectation(state, local(n, 1)).real == pytest.approx(1.0)

    def test_matmul_checks_cutoffs(self):
        with pytest.raises(CutoffMismatch):
            number_operator(Cutoff(4)) @ number_operator(Cutoff(5))

    def test_non_unitary_rejected(self):
        with pytest.raises(InvalidState):
            ModeOperator(2 * np.eye(3), Cutoff(3), unitary=True)


class TestDisplacement:
    """Test truncated displacements."""

    def test_displaced_vacuum_is_coherent(self):
        cutoff = Cutoff(30)
        alpha = 0.8 - 0.4j
        out = displacement(alpha, cutoff).mat @ basis(0, 30)
        assert np.allclose(out, coherent_amps(alpha, 30), atol=1e-10)

    def test_large_amplitude_warns(self):
        with pytest.warns(CutoffTooSmall):
            displacement(3.0, Cutoff(10))

    def test_block_matches_wide_space(self):
        block = displacement_block(0.5, Cutoff(15))
        wide = displacement(0.5, Cutoff(40)).mat[:15, :15]
        assert np.allclose(block, wide, atol=1e-10)

    def test_coherent_tail(self):
        assert coherent_tail(0.0, 5) == 0.0
        # P(n >= 1) for a Poisson mean of 1.
        assert coherent_tail(1.0, 1) == pytest.approx(1 - math.exp(-1))


class TestTwoModeGates:
    """Test the two-mode squeezer and beamsplitter."""

    def test_beamsplitter_splits_coherent_state(self):
        n_max = 20
        cutoff = Cutoff(n_max)
        alpha = 1.0
        state = np.kron(coherent_amps(alpha, n_max), basis(0, n_max))
        out = beamsplitter(0.5, cutoff).mat @ state
        half = alpha / math.sqrt(2)
        expected = np.kron(coherent_amps(half, n_max), coherent_amps(half, n_max))
        assert np.allclose(out, expected, atol=1e-8)

    def test_beamsplitter_unbalanced(self):
        n_max = 16
        cutoff = Cutoff(n_max)
        state = np.kron(coherent_amps(0.7, n_max), basis(0, n_max))
        out = beamsplitter(0.9, cutoff).mat @ state
        expected = np.kron(coherent_amps(math.sqrt(0.9) * 0.7, n_max), coherent_amps(math.sqrt(0.1) * 0.7, n_max))
        assert np.allclose(out, expected, atol=1e-8)

    def test_beamsplitter_domain(self):
        with pytest.raises(DomainError):
            beamsplitter(1.2, Cutoff(3))

    def test_squeezer_on_vacuum(self):
        r = 0.5
        n_max = 40
        cutoff = Cutoff(n_max)
        out = two_mode_squeezer(r, cutoff).mat @ np.kron(basis(0, n_max), basis(0, n_max))
        n = np.arange(n_max)
        expected = np.zeros((n_max, n_max), dtype=complex)
        expected[n, n] = math.tanh(r) ** n / math.cosh(r)
        assert np.allclose(out.reshape(n_max, n_max), expected, atol=1e-8)

    def test_squeezer_warns_when_cutoff_small(self):
        with pytest.warns(CutoffTooSmall):
            two_mode_squeezer(1.5, Cutoff(6))


class TestComposition:
    """Test tensor products, partial traces and Kraus application."""

    def test_tensor_and_partial_trace(self, random_density):
        first, second = random_density(3), random_density(3)
        joint = tensor(first, second)
        assert joint.modes == 2
        assert np.allclose(partial_trace(joint, 0).mat, first.mat)
        assert np.allclose(partial_trace(joint, 1).mat, second.mat)

    def test_tensor_mixed_kinds(self, random_density):
        pure = PureState(basis(0, 3), Cutoff(3))
        with pytest.raises(TypeError):
            tensor(pure, random_density(3))

    def test_partial_trace_bad_mode(self, random_density):
        with pytest.raises(ModeError):
            partial_trace(random_density(3, modes=2), 2)

    def test_expectation_cutoff_mismatch(self):
        with pytest.raises(CutoffMismatch):
            expectation(PureState(basis(0, 3), Cutoff(3)), number_operator(Cutoff(4)))

    def test_expectation_mode_mismatch(self, random_density):
        with pytest.raises(DimMismatch):
            expectation(random_density(3, modes=2), number_operator(Cutoff(3)))

    def test_identity_kraus_is_noop(self, random_density):
        rho = random_density(3, modes=2)
        for mode in (0, 1):
            out = apply_kraus(rho.mat, [np.eye(3)], 3, 2, mode)
            assert np.allclose(out, rho.mat)

    def test_kraus_acts_on_chosen_mode(self):
        cutoff = Cutoff(3)
        state = PureState(np.kron(basis(0, 3), basis(1, 3)), cutoff, 2).to_density()
        flip = np.zeros((3, 3))
        flip[0, 1] = 1.0
        flip[1, 0] = 1.0
        flip[2, 2] = 1.0
        out = apply_kraus(state.mat, [flip], 3, 2, mode=1)
        target = np.kron(basis(0, 3), basis(0, 3))
        assert np.allclose(out, np.outer(target, target.conj()))


class TestCutoffSelection:
    """Test automatic cutoff selection."""

    def test_zero_squeezing_uses_floor(self):
        assert auto_cutoff(r=0.0).n_max == 8

    def test_tail_below_tolerance(self):
        cutoff = auto_cutoff(r=1.15)
        nbar = math.sinh(1.15) ** 2
        ratio = nbar / (nbar + 1)
        assert ratio ** cutoff.n_max <= cutoff.tau_norm
        assert ratio ** (cutoff.n_max - 1) > cutoff.tau_norm

    def test_needs_an_argument(self):
        with pytest.raises(DomainError):
            auto_cutoff()

    def test_gkp_cutoff(self):
        assert gkp_cutoff(0.1).n_max == 80


class TestQuadratureRepresentation:
    """Test Hermite functions and quadrature marginals."""

    def test_hermite_functions_orthonormal(self):
        q = np.linspace(-15, 15, 3001)
        psi = hermite_functions(10, q)
        gram = psi @ psi.T * (q[1] - q[0])
        assert np.allclose(gram, np.eye(10), atol=1e-8)

    def test_vacuum_marginal(self):
        cutoff = Cutoff(6)
        vac = PureState(basis(0, 6), cutoff)
        density = quadrature_marginal(vac, "x", np.array([0.0, 1.0]))
        # Vacuum variance is hbar / 2 = 1.
        assert density[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert density[1] == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi))

    def test_marginal_needs_one_mode(self, random_density):
        with pytest.raises(ModeError):
            quadrature_marginal(random_density(3, modes=2), "x", np.zeros(3))
