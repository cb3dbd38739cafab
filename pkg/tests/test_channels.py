"""Tests for cvsteg.channels."""

import math

import numpy as np
import pytest

from cvsteg.channels import (
    ChannelSpec,
    additive_noise_apply,
    amplifier_kraus,
    apply,
    apply_many,
    compose,
    loss_kraus,
    werner_apply,
    werner_sample,
    wiretap_apply,
)
from cvsteg.errors import DomainError, ModeError
from cvsteg.fock_core import (
    Cutoff,
    DensityOperator,
    annihilation,
    beamsplitter,
    expectation,
    partial_trace,
    tensor,
)
from cvsteg.metrics import ppt_entangled
from cvsteg.states import coherent, thermal, tmsv, vacuum


class TestChannelSpec:
    """Test channel specifications and their descriptions."""

    def test_constructors(self):
        assert ChannelSpec.identity().kind == "identity"
        assert ChannelSpec.werner(0.3).param == 0.3
        assert ChannelSpec.wiretap(0.9).target_mode == 1

    def test_describe(self):
        assert ChannelSpec.werner(0.25).describe() == "werner(p=0.25)"
        assert ChannelSpec.wiretap(0.9).describe() == "wiretap(eta=0.9, mode=1)"
        assert ChannelSpec.identity().describe() == "identity"

    def test_validation(self):
        with pytest.raises(DomainError):
            ChannelSpec("dephasing", 0.1)
        with pytest.raises(DomainError):
            ChannelSpec.werner(1.5)
        with pytest.raises(ModeError):
            ChannelSpec.wiretap(0.5, target_mode=2)


class TestWerner:
    """Test the entanglement-breaking channel."""

    @pytest.fixture
    def resource(self):
        return tmsv(0.5, Cutoff(12))

    def test_zero_probability_is_identity(self, resource):
        assert werner_apply(resource, 0.0) is resource

    def test_keeps_marginals(self, resource):
        """Breaking the pair leaves both marginals untouched."""
        out = werner_apply(resource, 0.4)
        for mode in (0, 1):
            assert np.allclose(partial_trace(out, mode).mat, partial_trace(resource, mode).mat)

    def test_full_probability_breaks_entanglement(self, resource):
        assert ppt_entangled(resource)
        assert not ppt_entangled(werner_apply(resource, 1.0))

    def test_is_linear_in_p(self, resource):
        broken = werner_apply(resource, 1.0).mat
        out = werner_apply(resource, 0.3).mat
        assert np.allclose(out, 0.3 * broken + 0.7 * resource.mat)

    def test_needs_two_modes(self):
        with pytest.raises(ModeError):
            werner_apply(thermal(0.5, Cutoff(6)), 0.5)

    def test_sample_extremes(self, rng, resource):
        assert werner_sample(rng, resource, 0.0) is resource
        sampled = werner_sample(rng, resource, 1.0)
        assert np.allclose(sampled.mat, werner_apply(resource, 1.0).mat)

    def test_sample_frequency(self, rng):
        """Ten thousand shots at p = .3 break the pair about 30% of the time."""
        resource = tmsv(0.3, Cutoff(8))
        broken = sum(werner_sample(rng, resource, 0.3) is not resource for _ in range(10_000))
        assert broken / 10_000 == pytest.approx(0.3, abs=0.015)


class TestKraus:
    """Test the loss and amplifier Kraus families."""

    def test_loss_is_trace_preserving(self):
        ops = loss_kraus(0.7, Cutoff(10))
        total = sum(k.T @ k for k in ops)
        assert np.allclose(total, np.eye(10))

    def test_amplifier_keeps_low_levels(self):
        ops = amplifier_kraus(1.5, Cutoff(60))
        total = sum(k.T @ k for k in ops)
        assert total[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diag(total) <= 1.0 + 1e-12)

    def test_amplifier_gain_one(self):
        assert np.allclose(amplifier_kraus(1.0, Cutoff(4))[0], np.eye(4))

    def test_amplifier_gain_below_one(self):
        with pytest.raises(DomainError):
            amplifier_kraus(0.5, Cutoff(4))


class TestWiretap:
    """Test the wiretap channel on mode B."""

    def test_shrinks_coherent_amplitude(self):
        cutoff = Cutoff(20)
        out = wiretap_apply(coherent(1.0, cutoff).to_density(), 0.64)
        expected = coherent(0.8, cutoff).to_density()
        assert np.allclose(out.mat, expected.mat, atol=1e-10)

    def test_matches_beamsplitter_with_vacuum(self, random_density):
        rho = random_density(5)
        cutoff = rho.cutoff
        joint = tensor(rho, vacuum(cutoff).to_density())
        u = beamsplitter(0.6, cutoff).mat
        mixed = DensityOperator(u @ joint.mat @ u.conj().T, cutoff, 2)
        assert np.allclose(wiretap_apply(rho, 0.6).mat, partial_trace(mixed, 0).mat, atol=1e-10)

    def test_acts_on_mode_b(self):
        r = 0.5
        cutoff = Cutoff(30)
        resource = tmsv(r, cutoff)
        out = wiretap_apply(resource, 0.8)
        nbar = math.sinh(r) ** 2
        assert np.allclose(partial_trace(out, 0).mat, thermal(nbar, cutoff).mat, atol=1e-10)
        assert np.allclose(partial_trace(out, 1).mat, thermal(0.8 * nbar, cutoff).mat, atol=1e-10)

    def test_unit_transmissivity(self):
        rho = thermal(0.5, Cutoff(10))
        assert wiretap_apply(rho, 1.0) is rho

    def test_domain(self):
        with pytest.raises(DomainError):
            wiretap_apply(thermal(0.5, Cutoff(10)), 1.2)


class TestAdditiveNoise:
    """Test additive Gaussian noise as loss then amplification."""

    def test_vacuum_becomes_thermal(self):
        cutoff = Cutoff(40)
        out = additive_noise_apply(vacuum(cutoff).to_density(), 1.0)
        assert np.allclose(out.mat, thermal(1.0 / cutoff.hbar, cutoff).mat, atol=1e-10)

    def test_keeps_mean_amplitude(self):
        cutoff = Cutoff(40)
        out = additive_noise_apply(coherent(0.7, cutoff).to_density(), 0.5)
        assert expectation(out, annihilation(cutoff)) == pytest.approx(0.7, abs=1e-8)

    def test_zero_noise(self):
        rho = thermal(0.5, Cutoff(10))
        assert additive_noise_apply(rho, 0.0) is rho

    def test_negative_variance(self):
        with pytest.raises(DomainError):
            additive_noise_apply(thermal(0.5, Cutoff(10)), -1.0)


class TestComposition:
    """Test channel sequences."""

    def test_apply_dispatch(self):
        resource = tmsv(0.4, Cutoff(10))
        assert apply(ChannelSpec.identity(), resource) is resource
        assert np.allclose(apply(ChannelSpec.wiretap(0.9), resource).mat, wiretap_apply(resource, 0.9).mat)

    def test_compose_matches_apply_many(self):
        resource = tmsv(0.4, Cutoff(10))
        specs = [ChannelSpec.wiretap(0.9), ChannelSpec.werner(0.5)]
        chained = compose(specs)
        assert chained.specs == tuple(specs)
        assert np.allclose(chained(resource).mat, apply_many(specs, resource).mat)
        expected = werner_apply(wiretap_apply(resource, 0.9), 0.5)
        assert np.allclose(chained(resource).mat, expected.mat)

    def test_empty_sequence(self):
        resource = tmsv(0.4, Cutoff(10))
        assert compose([])(resource) is resource
