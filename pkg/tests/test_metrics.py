import math

import numpy as np
import pytest

from conftest import random_state
from meshcodec.errors import DimMismatchError, ShapeMismatchError
from meshcodec.metrics import (
    MetricReport,
    amp_phase_errors,
    complex_error,
    evaluate,
    mean_fidelity,
    similarity,
    wrap_phase_gap,
)
from meshcodec.statevec import StateVector, normalize


class TestAmpPhaseErrors:
    def test_identical_states(self):
        states = [random_state(8, s) for s in range(3)]
        assert amp_phase_errors(states, states) == (0.0, 0.0)

    def test_single_modulus_gap(self):
        out = [normalize([0.5, math.sqrt(1 - 0.25)])[0]]
        tgt = [normalize([0.3, math.sqrt(1 - 0.09)])[0]]
        e_amp, _ = amp_phase_errors(out, tgt)
        expected = (0.5 - 0.3) ** 2 + (math.sqrt(0.75) - math.sqrt(0.91)) ** 2
        assert e_amp == pytest.approx(expected, abs=1e-12)

    def test_wrapped_phase_gap(self):
        out = [StateVector([np.exp(1j * 0.1), 0.0])]
        tgt = [StateVector([np.exp(1j * (2 * math.pi - 0.1)), 0.0])]
        _, e_pha = amp_phase_errors(out, tgt)
        assert e_pha == pytest.approx(0.2**2, abs=1e-12)

    def test_phase_gap_pi_counts_fully(self):
        out = [StateVector([1.0, 0.0])]
        tgt = [StateVector([-1.0, 0.0])]
        e_amp, e_pha = amp_phase_errors(out, tgt)
        assert e_amp == pytest.approx(0.0, abs=1e-15)
        assert e_pha == pytest.approx(math.pi**2, abs=1e-12)

    def test_masked_tiny_components(self):
        # both sides below 1e-6 modulus: no phase contribution
        out = [normalize([1.0, 1e-8j])[0]]
        tgt = [normalize([1.0, 1e-8])[0]]
        _, e_pha = amp_phase_errors(out, tgt)
        assert e_pha == 0.0

    def test_two_pi_wrap_invariance(self):
        phases = np.array([0.3, 1.2, 5.9])
        amps = np.exp(1j * phases) / math.sqrt(3.0)
        shifted = np.array(amps)
        shifted[1] *= np.exp(2j * math.pi)
        out = [StateVector(amps)]
        out2 = [StateVector(shifted)]
        tgt = [random_state(3, 5)]
        assert amp_phase_errors(out, tgt)[1] == pytest.approx(
            amp_phase_errors(out2, tgt)[1], abs=1e-9
        )

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatchError):
            amp_phase_errors([random_state(4, 1)], [random_state(8, 1)])


class TestWrapPhaseGap:
    def test_maps_into_half_open_interval(self):
        gaps = wrap_phase_gap(np.linspace(-10.0, 10.0, 201))
        assert np.all(gaps > -math.pi)
        assert np.all(gaps <= math.pi)

    def test_pi_maps_to_pi(self):
        assert wrap_phase_gap(np.array([math.pi]))[0] == pytest.approx(math.pi)
        assert wrap_phase_gap(np.array([-math.pi]))[0] == pytest.approx(math.pi)


class TestComplexError:
    def test_zero_amp(self):
        assert complex_error(0.0, 123.0) == 0.0

    def test_zero_phase(self):
        assert complex_error(1.0, 0.0) == 1.0 + 0.0j

    def test_polar_form(self):
        val = complex_error(1e-4, 1e-4)
        assert val.real == pytest.approx(1e-4, rel=1e-6)
        assert val.imag == pytest.approx(1e-8, rel=1e-4)

    def test_modulus_equals_amp(self):
        for e_amp, e_pha in [(0.5, 1.0), (2.0, 4.5), (1e-4, 0.0143)]:
            assert abs(complex_error(e_amp, e_pha)) == pytest.approx(e_amp, rel=1e-12)


class TestSimilarity:
    def test_identical(self):
        imgs = [np.random.default_rng(s).random((3, 3)) for s in range(4)]
        assert similarity(imgs, imgs) == pytest.approx(100.0, abs=1e-9)

    def test_orthogonal_supports(self):
        a = np.array([[1.0, 0.0]])
        b = np.array([[0.0, 1.0]])
        assert similarity([a], [b]) == pytest.approx(0.0, abs=1e-12)

    def test_mean_of_overlaps(self):
        recon = [np.array([1.0, 0.0]), np.array([1.0, 1.0]) / math.sqrt(2)]
        orig = [np.array([1.0, 1.0]) / math.sqrt(2), np.array([1.0, 1.0]) / math.sqrt(2)]
        # overlaps: 1/sqrt(2) is not 0.5 -- build the stated 0.5/1.0 case instead
        recon = [np.array([0.5, math.sqrt(0.75)]), orig[1]]
        orig[0] = np.array([1.0, 0.0])
        assert similarity(recon, orig) == pytest.approx(75.0, abs=1e-9)

    def test_scale_free(self):
        rng = np.random.default_rng(3)
        img = rng.random((4, 4))
        assert similarity([7.5 * img], [img]) == pytest.approx(100.0, abs=1e-9)

    def test_sample_order_invariant(self):
        rng = np.random.default_rng(9)
        recon = [rng.random((2, 2)) for _ in range(5)]
        orig = [rng.random((2, 2)) for _ in range(5)]
        forward_val = similarity(recon, orig)
        perm = [3, 1, 4, 0, 2]
        assert similarity([recon[i] for i in perm], [orig[i] for i in perm]) == pytest.approx(
            forward_val, abs=1e-12
        )

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            similarity([np.ones((2, 2))], [np.ones((2, 3))])
        with pytest.raises(ShapeMismatchError):
            similarity([np.ones((2, 2))], [])


class TestMeanFidelity:
    def test_identical_sets(self):
        states = [random_state(8, s) for s in range(5)]
        assert mean_fidelity(states, states) == pytest.approx(1.0, abs=1e-12)

    def test_all_orthogonal(self):
        outs = [StateVector.basis(i, 4) for i in range(4)]
        tgts = [StateVector.basis((i + 1) % 4, 4) for i in range(4)]
        assert mean_fidelity(outs, tgts) == 0.0

    def test_half_and_half(self):
        outs = [StateVector.basis(0, 2), StateVector.basis(0, 2)]
        tgts = [StateVector.basis(0, 2), StateVector.basis(1, 2)]
        assert mean_fidelity(outs, tgts) == pytest.approx(0.5, abs=1e-12)

    def test_sample_order_invariant(self):
        outs = [random_state(6, s) for s in range(6)]
        tgts = [random_state(6, s + 50) for s in range(6)]
        base = mean_fidelity(outs, tgts)
        perm = [5, 0, 3, 1, 4, 2]
        assert mean_fidelity([outs[i] for i in perm], [tgts[i] for i in perm]) == pytest.approx(
            base, abs=1e-13
        )


class TestMetricReport:
    def test_json_round_trip(self):
        outs = [random_state(8, s) for s in range(4)]
        tgts = [random_state(8, s + 9) for s in range(4)]
        report = evaluate(outs, tgts)
        again = MetricReport.from_json_line(report.to_json_line())
        assert again == report
        assert "\n" not in report.to_json_line()

    def test_e_complex_consistent(self):
        outs = [random_state(8, s) for s in range(4)]
        tgts = [random_state(8, s + 20) for s in range(4)]
        report = evaluate(outs, tgts)
        assert abs(abs(report.e_complex) - report.e_amp) <= 1e-12 * max(1.0, report.e_amp)

    def test_per_sample_triples(self):
        outs = [random_state(4, s) for s in range(3)]
        report = evaluate(outs, outs)
        assert len(report.per_sample) == 3
        for fid, ea, ep in report.per_sample:
            assert fid == pytest.approx(1.0, abs=1e-12)
            assert ea == 0.0 and ep == 0.0


def test_reconstruction_loss_equals_e_amp_for_real_states():
    from meshcodec.training import loss_reconstruction

    rng = np.random.default_rng(8)
    outs = [normalize(rng.random(8) + 0.05)[0] for _ in range(5)]
    tgts = [normalize(rng.random(8) + 0.05)[0] for _ in range(5)]
    e_amp, _ = amp_phase_errors(outs, tgts)
    assert loss_reconstruction(outs, tgts) == pytest.approx(e_amp, abs=1e-12)


def test_reconstruction_loss_lower_bounded_by_e_amp():
    from meshcodec.training import loss_reconstruction

    outs = [random_state(8, s) for s in range(6)]
    tgts = [random_state(8, s + 100) for s in range(6)]
    e_amp, _ = amp_phase_errors(outs, tgts)
    assert loss_reconstruction(outs, tgts) >= e_amp - 1e-12
