import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshcodec.errors import DimMismatchError, NotNormalizedError, ZeroVectorError
from meshcodec.statevec import StateVector, fidelity, inner, normalize


class TestNormalize:
    def test_three_four_five(self):
        unit, sigma = normalize([3.0, 4.0, 0.0, 0.0])
        assert sigma == pytest.approx(5.0, abs=0)
        np.testing.assert_allclose(unit.amps, [0.6, 0.8, 0.0, 0.0], atol=1e-15)

    def test_already_unit(self):
        unit, sigma = normalize([1.0, 0.0])
        assert sigma == 1.0
        np.testing.assert_array_equal(unit.amps, [1.0 + 0j, 0.0 + 0j])

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            normalize([0.0, 0.0, 0.0])

    def test_complex_input(self):
        unit, sigma = normalize([1j, 1.0])
        assert sigma == pytest.approx(math.sqrt(2.0))
        assert abs(np.sum(np.abs(unit.amps) ** 2) - 1.0) <= 1e-12


class TestInner:
    def test_unit_with_itself(self):
        s = normalize([0.3, 0.4 + 0.2j, -0.1])[0]
        assert inner(s, s) == pytest.approx(1.0 + 0.0j, abs=1e-12)

    def test_orthogonal_basis(self):
        a = StateVector.basis(0, 4)
        b = StateVector.basis(1, 4)
        assert inner(a, b) == 0.0

    def test_superposition(self):
        a = StateVector.basis(0, 2)
        b = normalize([1.0, 1.0])[0]
        assert inner(a, b) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatchError):
            inner(StateVector.basis(0, 2), StateVector.basis(0, 3))


class TestFidelity:
    def test_identical(self):
        s = normalize([1.0, 2.0, 2.0])[0]
        assert fidelity(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(StateVector.basis(0, 3), StateVector.basis(2, 3)) == 0.0

    def test_half_overlap(self):
        a = StateVector.basis(0, 2)
        b = normalize([1.0, 1.0])[0]
        assert fidelity(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_rejects_unnormalized(self):
        bad = StateVector([0.5, 0.0])
        good = StateVector.basis(0, 2)
        with pytest.raises(NotNormalizedError):
            fidelity(bad, good)
        with pytest.raises(NotNormalizedError):
            fidelity(good, bad)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatchError):
            fidelity(StateVector.basis(0, 2), StateVector.basis(0, 4))


finite_vectors = st.lists(
    st.tuples(
        st.floats(-10, 10, allow_nan=False),
        st.floats(-10, 10, allow_nan=False),
    ),
    min_size=1,
    max_size=16,
).filter(lambda v: sum(re * re + im * im for re, im in v) > 1e-12)


@settings(max_examples=200, deadline=None)
@given(finite_vectors)
def test_normalize_idempotent(vec):
    arr = np.array([complex(re, im) for re, im in vec])
    unit, _ = normalize(arr)
    again, sigma = normalize(unit.amps)
    assert abs(sigma - 1.0) <= 1e-12
    np.testing.assert_allclose(again.amps, unit.amps, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite_vectors, finite_vectors, st.floats(0, 2 * math.pi, allow_nan=False))
def test_fidelity_symmetric_and_phase_invariant(va, vb, gamma):
    from hypothesis import assume

    n = min(len(va), len(vb))
    va, vb = va[:n], vb[:n]
    assume(sum(re * re + im * im for re, im in va) > 1e-12)
    assume(sum(re * re + im * im for re, im in vb) > 1e-12)
    a = normalize(np.array([complex(re, im) for re, im in va]))[0]
    b = normalize(np.array([complex(re, im) for re, im in vb]))[0]
    assert fidelity(a, b) == fidelity(b, a)
    rotated = StateVector(np.exp(1j * gamma) * a.amps)
    assert abs(fidelity(rotated, b) - fidelity(a, b)) <= 1e-12


def test_phases_convention():
    s = StateVector([1.0, -1.0, 1j, 0.0, 1e-13])
    ph = s.phases()
    assert ph[0] == 0.0
    assert ph[1] == pytest.approx(math.pi)
    assert ph[2] == pytest.approx(math.pi / 2.0)
    # tiny moduli report phase 0 by convention
    assert ph[3] == 0.0
    assert ph[4] == 0.0
    assert np.all(ph >= 0.0) and np.all(ph < 2.0 * math.pi)


def test_statevector_is_immutable():
    s = StateVector.basis(0, 2)
    with pytest.raises(ValueError):
        s.amps[0] = 5.0
