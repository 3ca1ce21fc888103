import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshcodec import codec
from meshcodec.codec import (
    ImageSample,
    gen_complex_states,
    image_to_state,
    letters_dataset,
    measure_probabilities,
    padded_dim,
    parse_images_csv,
    parse_states_csv,
    images_csv_text,
    state_to_image,
    states_csv_text,
    subspace_isometry,
)
from meshcodec.errors import (
    InvalidParamsError,
    NotNormalizedError,
    ShapeMismatchError,
    ZeroImageError,
)
from meshcodec.statevec import StateVector, normalize


class TestImageEncoding:
    def test_five_by_five_pads_to_32(self):
        img = letters_dataset()[0]
        enc = image_to_state(img)
        assert enc.state.dim == 32
        np.testing.assert_array_equal(enc.state.amps[25:], np.zeros(7))
        assert abs(np.sum(np.abs(enc.state.amps) ** 2) - 1.0) <= 1e-12

    def test_one_by_two(self):
        enc = image_to_state(ImageSample(np.array([[3.0, 4.0]]) / 5.0))
        # pixels are scaled into [0,1]; sigma reflects that scale
        assert enc.sigma == pytest.approx(1.0)
        np.testing.assert_allclose(enc.state.amps, [0.6, 0.8], atol=1e-15)

    def test_zero_image_rejected(self):
        with pytest.raises(ZeroImageError):
            image_to_state(ImageSample(np.zeros((2, 2))))

    def test_out_of_range_pixels_rejected(self):
        with pytest.raises(InvalidParamsError):
            image_to_state(ImageSample(np.array([[2.0, 0.0]])))

    def test_phases_all_zero(self):
        enc = image_to_state(letters_dataset()[3])
        assert np.all(enc.state.amps.imag == 0.0)
        assert np.all(enc.state.amps.real >= 0.0)

    def test_padded_dim(self):
        assert padded_dim(25) == 32
        assert padded_dim(32) == 32
        assert padded_dim(1) == 2
        assert padded_dim(33) == 64

    def test_argmax_preserved(self):
        img = letters_dataset()[7]
        enc = image_to_state(img)
        assert int(np.argmax(img.flat())) == int(np.argmax(np.abs(enc.state.amps)))


class TestImageDecoding:
    def test_inverse_of_encoding(self):
        img = letters_dataset()[2]
        enc = image_to_state(img)
        back = state_to_image(enc.state.amps.real, enc.sigma, img.shape)
        np.testing.assert_allclose(back.pixels, img.pixels, atol=1e-12)

    def test_small_example(self):
        back = state_to_image([0.6, 0.8], 5.0, (1, 2))
        np.testing.assert_allclose(back.pixels, [[3.0, 4.0]], atol=1e-12)

    def test_padding_dropped(self):
        r = np.zeros(32)
        r[:25] = 0.2
        img = state_to_image(r, 1.0, (5, 5))
        assert img.shape == (5, 5)
        np.testing.assert_allclose(img.flat(), np.full(25, 0.2))

    def test_no_clipping_outside_export(self):
        img = state_to_image([0.9, 0.1], 5.0, (1, 2))
        assert img.pixels[0, 0] == pytest.approx(4.5)  # raw, unclipped

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            state_to_image([0.6, 0.8], 1.0, (5, 5))

    def test_bad_sigma(self):
        with pytest.raises(InvalidParamsError):
            state_to_image([0.6, 0.8], 0.0, (1, 2))


class TestMeasureProbabilities:
    def test_basis_state(self):
        probs = measure_probabilities(StateVector.basis(0, 4))
        np.testing.assert_array_equal(probs, [1.0, 0.0, 0.0, 0.0])

    def test_superposition(self):
        s = normalize([1.0, 1.0, 0.0, 0.0])[0]
        np.testing.assert_allclose(measure_probabilities(s), [0.5, 0.5, 0, 0], atol=1e-15)

    def test_sums_to_one(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            s = normalize(rng.standard_normal(8) + 1j * rng.standard_normal(8))[0]
            assert abs(np.sum(measure_probabilities(s)) - 1.0) <= 1e-12

    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalizedError):
            measure_probabilities(StateVector([0.5, 0.0]))


class TestGenComplexStates:
    def test_uniform_unit_norm(self):
        states = gen_complex_states(50, 8, codec.UNIFORM, seed=7)
        assert len(states) == 50
        for s in states:
            assert abs(s.norm() - 1.0) <= 1e-12

    def test_subspace_rank_bound(self):
        states = gen_complex_states(50, 8, codec.SUBSPACE, seed=3, d=4, eps=0.0)
        mat = np.stack([s.amps for s in states])
        singular = np.linalg.svd(mat, compute_uv=False)
        assert np.all(singular[4:] < 1e-10)

    def test_subspace_isometry_orthonormal(self):
        v = subspace_isometry(8, 4, seed=11)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)

    def test_deterministic(self):
        a = gen_complex_states(10, 8, codec.SUBSPACE, seed=5, d=3, eps=0.1)
        b = gen_complex_states(10, 8, codec.SUBSPACE, seed=5, d=3, eps=0.1)
        for sa, sb in zip(a, b):
            np.testing.assert_array_equal(sa.amps, sb.amps)

    def test_per_sample_streams_are_order_independent(self):
        # The first k samples never depend on how many samples are drawn.
        few = gen_complex_states(3, 8, codec.UNIFORM, seed=9)
        many = gen_complex_states(10, 8, codec.UNIFORM, seed=9)
        for sa, sb in zip(few, many):
            np.testing.assert_array_equal(sa.amps, sb.amps)

    def test_invalid_params(self):
        with pytest.raises(InvalidParamsError):
            gen_complex_states(0, 8, codec.UNIFORM, seed=1)
        with pytest.raises(InvalidParamsError):
            gen_complex_states(5, 1, codec.UNIFORM, seed=1)
        with pytest.raises(InvalidParamsError):
            gen_complex_states(5, 8, codec.SUBSPACE, seed=1, d=9)
        with pytest.raises(InvalidParamsError):
            gen_complex_states(5, 8, codec.SUBSPACE, seed=1, d=4, eps=-0.1)
        with pytest.raises(InvalidParamsError):
            gen_complex_states(5, 8, "exotic", seed=1)


class TestLettersDataset:
    def test_shape_and_values(self):
        images = letters_dataset()
        assert len(images) == 26
        for img in images:
            assert img.shape == (5, 5)
            assert set(np.unique(img.pixels)) <= {0.0, 1.0}

    def test_letters_are_distinct(self):
        flats = [tuple(img.flat()) for img in letters_dataset()]
        assert len(set(flats)) == 26


class TestCsvFormats:
    def test_image_csv_round_trip(self):
        images = letters_dataset()
        text = images_csv_text(images)
        assert text.splitlines()[0] == "# 5 5 26"
        parsed, shape = parse_images_csv(text)
        assert shape == (5, 5)
        for a, b in zip(parsed, images):
            np.testing.assert_array_equal(a.pixels, b.pixels)
        assert images_csv_text(parsed) == text

    def test_image_csv_export_clips(self):
        img = ImageSample(np.array([[0.5, 0.5]]))
        object.__setattr__(img, "pixels", np.array([[1.5, -0.25]]))
        text = images_csv_text([img])
        parsed, _ = parse_images_csv(text)
        np.testing.assert_array_equal(parsed[0].pixels, [[1.0, 0.0]])

    def test_states_csv_round_trip(self):
        states = gen_complex_states(5, 8, codec.SUBSPACE, seed=2, d=4, eps=0.05)
        text = states_csv_text(states, seed=2, mode="subspace:d=4:eps=0.05")
        parsed = parse_states_csv(text)
        for a, b in zip(parsed, states):
            np.testing.assert_array_equal(a.amps, b.amps)
        assert states_csv_text(parsed, seed=2, mode="subspace:d=4:eps=0.05") == text

    def test_bad_headers(self):
        with pytest.raises(InvalidParamsError):
            parse_images_csv("0.5,0.5\n")
        with pytest.raises(InvalidParamsError):
            parse_states_csv("# 8 1\n" + ",".join(["0"] * 16))

    def test_row_count_checked(self):
        with pytest.raises(InvalidParamsError):
            parse_images_csv("# 1 2 3\n0.5,0.5\n")


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=2, max_size=30).filter(
        lambda v: sum(x * x for x in v) > 1e-10
    )
)
def test_round_trip_property(pixels):
    n = len(pixels)
    img = ImageSample(np.array(pixels).reshape(1, n))
    enc = image_to_state(img)
    back = state_to_image(np.abs(enc.state.amps), enc.sigma, (1, n))
    np.testing.assert_allclose(back.pixels, img.pixels, atol=1e-12)
    # padding is exactly zero, not merely small
    assert np.all(enc.state.amps[n:] == 0.0)
