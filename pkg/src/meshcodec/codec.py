"""Conversion between classical data and amplitude-encoded states, plus dataset IO.

Images are flattened row-major, zero-padded to the next power of two, and
normalized; the normalization factor sigma is kept so pixels can be rebuilt
exactly from measured amplitudes. Complex-state generation provides a uniform
mode and a subspace-supported mode whose samples are (near-)compressible into
``d`` retained modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    InvalidParamsError,
    NotNormalizedError,
    ShapeMismatchError,
    ZeroImageError,
)
from .statevec import NORM_TOLERANCE, StateVector, normalize

UNIFORM = "uniform"
SUBSPACE = "subspace"

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class ImageSample:
    """One grayscale image: a D1 x D2 pixel grid plus its sample index.

    Input images must have pixels in [0, 1]; reconstructed images may exceed
    that range and are only clipped when written to disk.
    """

    pixels: np.ndarray
    id: int = 0

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatchError(f"pixels must be 2-D, got shape {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]

    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1)


@dataclass(frozen=True)
class EncodedSample:
    """Amplitude-encoded image: unit state, normalization factor, source shape."""

    state: StateVector
    sigma: float
    source_shape: tuple[int, int]


def padded_dim(n_pixels: int) -> int:
    """Smallest power of two >= n_pixels (minimum 2)."""
    if n_pixels < 1:
        raise InvalidParamsError("need at least one pixel")
    return max(2, 1 << (n_pixels - 1).bit_length())


def image_to_state(img: ImageSample) -> EncodedSample:
    """Encode pixels as amplitudes of a real unit state, zero-padded to 2^q modes."""
    flat = img.flat()
    if np.any(flat < 0) or np.any(flat > 1):
        raise InvalidParamsError("input pixels must lie in [0, 1]")
    if np.all(flat < 1e-15):
        raise ZeroImageError(f"image {img.id} is all zeros")
    n = padded_dim(flat.size)
    padded = np.zeros(n, dtype=np.float64)
    padded[: flat.size] = flat
    state, sigma = normalize(padded)
    return EncodedSample(state=state, sigma=sigma, source_shape=img.shape)


def state_to_image(amplitudes, sigma: float, shape: tuple[int, int]) -> ImageSample:
    """Rebuild pixels as sigma * R, dropping padding positions.

    No clipping happens here; metric computations see raw values.
    """
    r = np.asarray(amplitudes, dtype=np.float64).reshape(-1)
    d1, d2 = int(shape[0]), int(shape[1])
    if r.size < d1 * d2:
        raise ShapeMismatchError(
            f"{r.size} amplitudes cannot fill a {d1}x{d2} image"
        )
    if sigma <= 0:
        raise InvalidParamsError(f"sigma must be positive, got {sigma}")
    pixels = (sigma * r[: d1 * d2]).reshape(d1, d2)
    return ImageSample(pixels=pixels)


def measure_probabilities(state: StateVector) -> np.ndarray:
    """Mode-detection probabilities |amp_n|^2 of a normalized state."""
    if not state.is_normalized(NORM_TOLERANCE):
        raise NotNormalizedError(f"state norm is {state.norm():.12g}")
    return state.probabilities()


# ---------------------------------------------------------------------------
# Complex-state generation.


def _sample_rng(seed: int, stream: int) -> np.random.Generator:
    # Per-sample seed sequences keep generation order-independent.
    return np.random.default_rng((int(seed), int(stream)))


def _complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def subspace_isometry(n: int, d: int, seed: int) -> np.ndarray:
    """The fixed seeded N x d isometry shared by all subspace-mode samples."""
    rng = _sample_rng(seed, 0)
    basis, _ = np.linalg.qr(_complex_normal(rng, n * d).reshape(n, d))
    return basis


def gen_complex_states(
    m: int,
    n: int,
    mode: str = UNIFORM,
    seed: int = 0,
    d: int | None = None,
    eps: float = 0.0,
) -> list[StateVector]:
    """Generate ``m`` unit states of dimension ``n``.

    ``uniform`` draws amplitude real/imag parts from a standard normal and
    normalizes. ``subspace`` draws V @ w + eps * noise and normalizes, where V
    is one seeded random N x d isometry shared by all samples, w a standard
    complex Gaussian d-vector, and noise a unit-norm random direction; with
    eps = 0 the sample set has numerical rank at most d.
    """
    if n < 2 or m < 1:
        raise InvalidParamsError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if mode == UNIFORM:
        out = []
        for i in range(m):
            rng = _sample_rng(seed, i + 1)
            state, _ = normalize(_complex_normal(rng, n))
            out.append(state)
        return out
    if mode == SUBSPACE:
        if d is None or not 1 <= d <= n:
            raise InvalidParamsError(f"subspace mode needs 1 <= d <= {n}, got {d}")
        if eps < 0:
            raise InvalidParamsError(f"eps must be nonnegative, got {eps}")
        basis = subspace_isometry(n, d, seed)
        out = []
        for i in range(m):
            rng = _sample_rng(seed, i + 1)
            w = _complex_normal(rng, d)
            vec = basis @ w
            if eps > 0:
                noise = _complex_normal(rng, n)
                vec = vec + eps * (noise / np.linalg.norm(noise))
            state, _ = normalize(vec)
            out.append(state)
        return out
    raise InvalidParamsError(f"unknown generation mode {mode!r}")


# ---------------------------------------------------------------------------
# Dataset files.


def letters_dataset() -> list[ImageSample]:
    """The packaged 5x5 binary font of the 26 capital letters, A through Z."""
    text = (
        resources.files("meshcodec").joinpath("data/letters_5x5.csv").read_text("ascii")
    )
    images, _ = parse_images_csv(text)
    return images


def images_csv_text(images: list[ImageSample]) -> str:
    """Image dataset CSV: header `# D1 D2 M`, one image per row, clipped to [0, 1]."""
    if not images:
        raise InvalidParamsError("no images to write")
    d1, d2 = images[0].shape
    for img in images:
        if img.shape != (d1, d2):
            raise ShapeMismatchError("images in one dataset must share a shape")
    lines = [f"# {d1} {d2} {len(images)}"]
    for img in images:
        vals = np.clip(img.flat(), 0.0, 1.0)
        lines.append(",".join(_FLOAT_FMT % v for v in vals))
    return "\n".join(lines) + "\n"


def parse_images_csv(text: str) -> tuple[list[ImageSample], tuple[int, int]]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InvalidParamsError("image CSV must start with a `# D1 D2 M` header")
    header = lines[0][1:].split()
    if len(header) != 3:
        raise InvalidParamsError(f"bad image CSV header: {lines[0]!r}")
    d1, d2, m = (int(tok) for tok in header)
    rows = lines[1:]
    if len(rows) != m:
        raise InvalidParamsError(f"header promises {m} rows, found {len(rows)}")
    images = []
    for idx, row in enumerate(rows):
        vals = np.array([float(tok) for tok in row.split(",")], dtype=np.float64)
        if vals.size != d1 * d2:
            raise ShapeMismatchError(
                f"row {idx} has {vals.size} values, expected {d1 * d2}"
            )
        images.append(ImageSample(pixels=vals.reshape(d1, d2), id=idx))
    return images, (d1, d2)


def read_images_csv(path) -> tuple[list[ImageSample], tuple[int, int]]:
    with open(path, "r", encoding="ascii") as fh:
        return parse_images_csv(fh.read())


def write_images_csv(path, images: list[ImageSample]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(images_csv_text(images))


def states_csv_text(states: list[StateVector], seed: int = 0, mode: str = UNIFORM) -> str:
    """Complex dataset CSV: header `# N M seed mode`, one state per row as Re,Im pairs."""
    if not states:
        raise InvalidParamsError("no states to write")
    n = states[0].dim
    lines = [f"# {n} {len(states)} {seed} {mode}"]
    for state in states:
        if state.dim != n:
            raise ShapeMismatchError("states in one dataset must share a dimension")
        parts = []
        for amp in state.amps:
            parts.append(_FLOAT_FMT % amp.real)
            parts.append(_FLOAT_FMT % amp.imag)
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def parse_states_csv(text: str) -> list[StateVector]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InvalidParamsError("state CSV must start with a `# N M seed mode` header")
    header = lines[0][1:].split()
    if len(header) != 4:
        raise InvalidParamsError(f"bad state CSV header: {lines[0]!r}")
    n, m = int(header[0]), int(header[1])
    rows = lines[1:]
    if len(rows) != m:
        raise InvalidParamsError(f"header promises {m} rows, found {len(rows)}")
    states = []
    for idx, row in enumerate(rows):
        vals = np.array([float(tok) for tok in row.split(",")], dtype=np.float64)
        if vals.size != 2 * n:
            raise ShapeMismatchError(f"row {idx} has {vals.size} values, expected {2 * n}")
        states.append(StateVector(vals[0::2] + 1j * vals[1::2]))
    return states


def read_states_csv(path) -> list[StateVector]:
    with open(path, "r", encoding="ascii") as fh:
        return parse_states_csv(fh.read())


def write_states_csv(path, states: list[StateVector], seed: int = 0, mode: str = UNIFORM) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(states_csv_text(states, seed=seed, mode=mode))


def encode_images(images: list[ImageSample]) -> list[EncodedSample]:
    return [image_to_state(img) for img in images]


def sigma_of(images: list[ImageSample]) -> np.ndarray:
    """Per-image normalization factor sqrt(sum of squared pixels)."""
    return np.array(
        [math.sqrt(float(np.sum(img.flat() ** 2))) for img in images], dtype=np.float64
    )
