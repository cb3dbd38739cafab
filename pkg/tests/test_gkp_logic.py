"""Tests for cvsteg.gkp_logic."""

import itertools
import math

import numpy as np
import pytest

from cvsteg.channels import ChannelSpec
from cvsteg.errors import DomainError, InvalidState, ModeError, ZeroTrace
from cvsteg.fock_core import gkp_cutoff
from cvsteg.gkp_logic import (
    PAULI_LABELS,
    Readout,
    Tomogram,
    bell_fidelity,
    bell_test,
    logical_pauli_expectation,
    pauli_operator,
    psd_project,
    rotate_expectations,
    teleported_noise,
    tomography_2q,
)
from cvsteg.metrics import chsh_s
from cvsteg.states import GkpParams, gkp_bell, gkp_logical, gkp_plus


@pytest.fixture(scope="module")
def cutoff():
    return gkp_cutoff(0.1)


@pytest.fixture(scope="module")
def pair(cutoff):
    return gkp_bell(0.1, cutoff)


@pytest.fixture(scope="module")
def codewords(cutoff):
    params = GkpParams(epsilon=0.1)
    return gkp_logical(0, params, cutoff), gkp_logical(1, params, cutoff)


def ideal_bell_expectations():
    pauli = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1]),
    }
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return {
        a + b: float(np.vdot(phi, np.kron(pauli[a], pauli[b]) @ phi).real)
        for a, b in itertools.product(PAULI_LABELS, repeat=2)
    }


class TestReadout:
    """Test logical Pauli readout on GKP codewords."""

    def test_codewords_read_as_z_eigenstates(self, codewords):
        zero, one = codewords
        assert logical_pauli_expectation(zero, "Z") > 0.95
        assert logical_pauli_expectation(one, "Z") < -0.95

    def test_plus_reads_as_x_eigenstate(self, cutoff):
        assert logical_pauli_expectation(gkp_plus(0.1, cutoff), "X") > 0.9

    def test_binned_is_default(self, codewords):
        zero, _ = codewords
        assert logical_pauli_expectation(zero, "Z") == logical_pauli_expectation(zero, "Z", Readout.BINNED)

    def test_displacement_readout_is_weaker(self, codewords):
        zero, _ = codewords
        binned = logical_pauli_expectation(zero, "Z")
        displaced = logical_pauli_expectation(zero, "Z", Readout.DISPLACEMENT)
        assert 0 < displaced < binned

    def test_noise_lowers_expectation(self, codewords):
        zero, _ = codewords
        clean = logical_pauli_expectation(zero, "Z")
        noisy = logical_pauli_expectation(zero, "Z", noise=(0.5,))
        assert noisy < clean

    def test_operators_are_hermitian(self, cutoff):
        for label in "XYZ":
            mat = pauli_operator(label, cutoff).mat
            assert np.allclose(mat, mat.conj().T, atol=1e-10)

    def test_operator_validation(self, cutoff):
        with pytest.raises(DomainError):
            pauli_operator("Z", cutoff, noise=-0.1)
        with pytest.raises(DomainError):
            pauli_operator("W", cutoff)

    def test_label_count_must_match_modes(self, codewords):
        with pytest.raises(DomainError):
            logical_pauli_expectation(codewords[0], "ZZ")


class TestBellPair:
    """Test CHSH values of the GKP Bell pair, plain and teleported."""

    @pytest.fixture(scope="class")
    def rotated(self, pair):
        return bell_test(pair).s

    def test_correlations(self, pair):
        assert logical_pauli_expectation(pair, "ZZ") > 0.9
        assert logical_pauli_expectation(pair, "XX") > 0.9
        assert abs(logical_pauli_expectation(pair, "XZ")) < 0.1
        assert abs(logical_pauli_expectation(pair, "ZX")) < 0.1

    def test_displacement_readout_stays_near_point_eight(self, pair):
        """The lattice displacement cannot reach the .99 correlations of the binned decoder."""
        for labels in ("XX", "ZZ"):
            assert 0.75 < logical_pauli_expectation(pair, labels, Readout.DISPLACEMENT) < 0.85

    def test_noiseless_unrotated(self, pair):
        result = bell_test(pair, rotate=False)
        assert 1.9 < result.s < 2.1

    def test_noiseless_rotated(self, rotated):
        """The exact logical rotation lifts S to 2 sqrt(2) times the correlator scale."""
        assert rotated == pytest.approx(2.80, abs=0.03)
        assert rotated > 2.55 - 0.08

    def test_small_loss_keeps_violation(self, pair, rotated):
        result = bell_test(pair, channel=ChannelSpec.wiretap(0.99), r=3.2)
        assert result.violates
        assert result.s == pytest.approx(2.79, abs=0.03)
        assert result.s / rotated >= 0.98

    def test_large_loss_loses_violation(self, pair, rotated):
        result = bell_test(pair, channel=ChannelSpec.wiretap(0.9), r=3.2)
        assert not result.violates
        assert result.s == pytest.approx(1.58, abs=0.03)
        assert 0.45 <= result.s / rotated <= 0.6

    def test_correlations_sharpen_as_epsilon_shrinks(self):
        """XX and ZZ grow monotonically over epsilon = .2, .1, .05."""
        values = []
        for epsilon in (0.2, 0.1, 0.05):
            bell = gkp_bell(epsilon, gkp_cutoff(epsilon))
            values.append((logical_pauli_expectation(bell, "XX"), logical_pauli_expectation(bell, "ZZ")))
        for (xx_a, zz_a), (xx_b, zz_b) in zip(values, values[1:]):
            assert xx_b > xx_a
            assert zz_b > zz_a

    def test_channel_needs_squeezing(self, pair):
        with pytest.raises(DomainError):
            bell_test(pair, channel=ChannelSpec.werner(0.2))

    def test_needs_two_modes(self, codewords):
        with pytest.raises(ModeError):
            bell_test(codewords[0])


class TestTeleportedNoise:
    """Test noise branches of a teleported mode."""

    def test_identity_resource(self):
        (weight, variances), = teleported_noise(1.0)
        assert weight == 1.0
        assert variances[0] == 0.0
        assert variances[1] == pytest.approx(2.0 * math.exp(-2.0))

    def test_werner_splits(self):
        branches = teleported_noise(1.0, ChannelSpec.werner(0.25), mode=0)
        assert [w for w, _ in branches] == pytest.approx([0.75, 0.25])
        assert all(v[1] == 0.0 for _, v in branches)

    def test_bad_mode(self):
        with pytest.raises(ModeError):
            teleported_noise(1.0, mode=2)


class TestRotation:
    """Test the logical Y rotation on Pauli expectations."""

    def test_ideal_pair_reaches_tsirelson(self):
        """The 3 pi / 4 rotation takes ideal correlations to 2 sqrt(2)."""
        rotated = rotate_expectations({"XX": 1.0, "XZ": 0.0, "ZX": 0.0, "ZZ": 1.0})
        s = 1 / math.sqrt(2)
        assert rotated["XX"] == pytest.approx(-s)
        assert rotated["XZ"] == pytest.approx(-s)
        assert rotated["ZX"] == pytest.approx(s)
        assert rotated["ZZ"] == pytest.approx(-s)
        s_value = chsh_s(rotated["XX"], rotated["XZ"], rotated["ZX"], rotated["ZZ"])
        assert s_value == pytest.approx(2 * math.sqrt(2))

    def test_zero_angle_is_identity(self):
        values = {"XX": 0.3, "XZ": 0.1, "ZX": -0.2, "ZZ": 0.8}
        assert rotate_expectations(values, 0.0) == pytest.approx(values)

    def test_needs_both_partners(self):
        with pytest.raises(DomainError):
            rotate_expectations({"XX": 1.0})


class TestTomography:
    """Test two-qubit tomography and PSD projection."""

    def test_ideal_bell_state(self):
        tomogram = Tomogram.from_expectations(ideal_bell_expectations())
        assert tomogram.concurrence == pytest.approx(1.0, abs=1e-9)
        assert tomogram.entanglement_of_formation == pytest.approx(1.0, abs=1e-9)
        assert bell_fidelity(tomogram) == pytest.approx(1.0, abs=1e-9)
        assert tomogram.ppt

    def test_missing_entries(self):
        values = ideal_bell_expectations()
        del values["YY"]
        with pytest.raises(DomainError):
            Tomogram.from_expectations(values)

    def test_out_of_range_entry(self):
        values = ideal_bell_expectations()
        values["ZZ"] = 1.2
        with pytest.raises(InvalidState):
            Tomogram.from_expectations(values)

    def test_psd_projection(self):
        mat = np.diag([0.7, 0.5, -0.2, 0.0])
        projected = psd_project(mat)
        assert np.trace(projected).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(projected).min() >= -1e-12

    def test_psd_projection_clips_and_renormalizes(self):
        projected = psd_project(np.diag([0.6, 0.6, -0.1, -0.1]))
        assert np.allclose(projected, np.diag([0.5, 0.5, 0.0, 0.0]), atol=1e-12)

    def test_psd_projection_of_negative_matrix(self):
        with pytest.raises(ZeroTrace):
            psd_project(-np.eye(4))

    def test_gkp_pair(self, pair):
        tomogram = tomography_2q(pair)
        assert tomogram.ppt
        assert tomogram.concurrence > 0.85
        assert bell_fidelity(tomogram) > 0.9

    def test_wiretapped_pair(self, pair):
        """Loss .1 on an r = 3.2 resource leaves a weakly entangled reconstruction."""
        branches = teleported_noise(3.2, ChannelSpec.wiretap(0.9))
        tomogram = tomography_2q(pair, branches=branches)
        assert bell_fidelity(tomogram) == pytest.approx(0.584, abs=0.05)
        assert tomogram.ppt
        assert 0.0 < tomogram.concurrence < 0.3

    def test_needs_two_modes(self, codewords):
        with pytest.raises(ModeError):
            tomography_2q(codewords[0])
