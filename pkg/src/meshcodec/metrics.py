"""Quality measures: reconstruction similarity, fidelity, amplitude/phase errors."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatchError, ShapeMismatchError
from .statevec import StateVector

PHASE_MASK_MODULUS = 1e-6


def _stack(states: list[StateVector]) -> np.ndarray:
    if not states:
        raise DimMismatchError("empty state list")
    n = states[0].dim
    for s in states:
        if s.dim != n:
            raise DimMismatchError("states must share a dimension")
    return np.stack([s.amps for s in states])  # (M, N)


def _paired(outputs: list[StateVector], targets: list[StateVector]):
    if len(outputs) != len(targets):
        raise DimMismatchError(
            f"{len(outputs)} outputs vs {len(targets)} targets"
        )
    out = _stack(outputs)
    tgt = _stack(targets)
    if out.shape != tgt.shape:
        raise DimMismatchError("outputs and targets must share a dimension")
    return out, tgt


def wrap_phase_gap(gap: np.ndarray) -> np.ndarray:
    """Map phase differences into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(gap, dtype=np.float64), 2.0 * np.pi)


def phases_of(amps: np.ndarray) -> np.ndarray:
    """Phases in [0, 2*pi), with 0 for moduli below 1e-12 (convention)."""
    ph = np.mod(np.angle(amps), 2.0 * np.pi)
    ph[np.abs(amps) < 1e-12] = 0.0
    return ph


def amp_phase_errors_arrays(out: np.ndarray, tgt: np.ndarray) -> tuple[float, float]:
    """Array core shared with the training loop; rows are samples."""
    mod_out = np.abs(out)
    mod_tgt = np.abs(tgt)
    e_amp = float(np.sum((mod_out - mod_tgt) ** 2))
    gap = wrap_phase_gap(phases_of(out) - phases_of(tgt))
    # Phases of components that are zero on both sides are pure noise.
    masked = (mod_out < PHASE_MASK_MODULUS) & (mod_tgt < PHASE_MASK_MODULUS)
    e_pha = float(np.sum(np.where(masked, 0.0, gap**2)))
    return e_amp, e_pha


def amp_phase_errors(
    outputs: list[StateVector], targets: list[StateVector]
) -> tuple[float, float]:
    """Summed squared modulus gaps and summed squared wrapped phase gaps."""
    out, tgt = _paired(outputs, targets)
    return amp_phase_errors_arrays(out, tgt)


def complex_error(e_amp: float, e_pha: float) -> complex:
    """Polar combination e_amp * exp(i * e_pha)."""
    return complex(e_amp * np.cos(e_pha), e_amp * np.sin(e_pha))


def similarity(reconstructed, originals) -> float:
    """Percent mean overlap of unit-normalized value vectors.

    Accepts pixel grids or flat vectors; each sample is flattened and scaled
    to unit norm, so the measure is insensitive to the per-image scale. 100%
    means every reconstruction matches its original up to scale.
    """
    if len(reconstructed) != len(originals):
        raise ShapeMismatchError(
            f"{len(reconstructed)} reconstructions vs {len(originals)} originals"
        )
    if not originals:
        raise ShapeMismatchError("empty sample lists")
    overlaps = []
    for rec, orig in zip(reconstructed, originals):
        r = np.asarray(getattr(rec, "pixels", rec), dtype=np.float64).reshape(-1)
        o = np.asarray(getattr(orig, "pixels", orig), dtype=np.float64).reshape(-1)
        if r.shape != o.shape:
            raise ShapeMismatchError(f"shape {r.shape} vs {o.shape}")
        rn = np.linalg.norm(r)
        on = np.linalg.norm(o)
        if rn < 1e-15 or on < 1e-15:
            overlaps.append(0.0)
        else:
            overlaps.append(float(np.dot(r / rn, o / on)))
    return 100.0 * float(np.mean(overlaps))


def mean_fidelity(outputs: list[StateVector], targets: list[StateVector]) -> float:
    """Mean squared overlap |<target|output>|^2 over sample pairs."""
    out, tgt = _paired(outputs, targets)
    return float(np.mean(np.abs(np.sum(np.conj(tgt) * out, axis=1)) ** 2))


@dataclass(frozen=True)
class MetricReport:
    """All reported quality measures plus per-sample (fidelity, amp_err, pha_err)."""

    similarity: float
    mean_fidelity: float
    e_amp: float
    e_pha: float
    e_complex: complex
    per_sample: tuple[tuple[float, float, float], ...]

    def to_json_line(self) -> str:
        payload = {
            "similarity": self.similarity,
            "mean_fidelity": self.mean_fidelity,
            "e_amp": self.e_amp,
            "e_pha": self.e_pha,
            "e_complex": [self.e_complex.real, self.e_complex.imag],
            "per_sample": [list(t) for t in self.per_sample],
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "MetricReport":
        data = json.loads(line)
        return cls(
            similarity=float(data["similarity"]),
            mean_fidelity=float(data["mean_fidelity"]),
            e_amp=float(data["e_amp"]),
            e_pha=float(data["e_pha"]),
            e_complex=complex(data["e_complex"][0], data["e_complex"][1]),
            per_sample=tuple(tuple(t) for t in data["per_sample"]),
        )


def evaluate(
    outputs: list[StateVector],
    targets: list[StateVector],
    reconstructed_images=None,
    original_images=None,
) -> MetricReport:
    """Build a full report from decoded states and, optionally, pixel images.

    Without images, similarity falls back to the overlap of the state modulus
    vectors, which coincides with the pixel definition for amplitude-encoded
    images (their padding amplitudes are zero).
    """
    out, tgt = _paired(outputs, targets)
    fieldwise = np.abs(np.sum(np.conj(tgt) * out, axis=1)) ** 2
    per_sample = []
    for i in range(out.shape[0]):
        ea, ep = amp_phase_errors_arrays(out[i : i + 1], tgt[i : i + 1])
        per_sample.append((float(fieldwise[i]), ea, ep))
    e_amp, e_pha = amp_phase_errors_arrays(out, tgt)
    if reconstructed_images is not None and original_images is not None:
        sim = similarity(reconstructed_images, original_images)
    else:
        sim = similarity(list(np.abs(out)), list(np.abs(tgt)))
    return MetricReport(
        similarity=sim,
        mean_fidelity=float(np.mean(fieldwise)),
        e_amp=e_amp,
        e_pha=e_pha,
        e_complex=complex_error(e_amp, e_pha),
        per_sample=tuple(per_sample),
    )
