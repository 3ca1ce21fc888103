"""Losses, gradient engines, and the iterative parameter-update loop.

Training minimizes one of two objectives over the raw (theta, alpha) arrays:

* reconstruction: the summed squared deviation between decoded and target
  amplitudes. The recorded loss divides the sum by M*N (a mean squared error);
  the descended objective divides by N only (sample-summed), the scaling under
  which the reference learning rate and iteration budgets actually converge;
* inv-probability: the mean projected-out probability, which depends on the
  encoder only.

Gradients default to finite differences of the scalar objective, evaluated by
perturbing one gate at a time through the compiled gate-sweep kernel. An exact
reverse-mode gradient is available both as a test oracle and as an alternative
training engine.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimMismatchError,
    FullyRejectedError,
    InvalidParamsError,
    NonFiniteLossError,
    ExportRangeError,
)
from .mesh import (
    DEFAULT_INIT_ALPHA,
    DEFAULT_INIT_THETA,
    KEPT_PROB_FLOOR,
    CompressionChannel,
    GateProgram,
    MeshNetwork,
    Role,
    Topology,
    build_network,
)
from .metrics import amp_phase_errors_arrays
from .statevec import StateVector


class DecoderMode(str, enum.Enum):
    TRAINED = "trained"
    MIRROR_INVERSE = "mirror-inverse"


class LossKind(str, enum.Enum):
    RECONSTRUCTION = "reconstruction"
    INV_PROBABILITY = "inv-probability"


class FdScheme(str, enum.Enum):
    """Central differences, or the one-sided forward quotient.

    The forward scheme defaults to step 1e-8, which is numerically fragile in
    double precision (half the significant digits go to cancellation); central
    differencing at 1e-6 is the accurate default.
    """

    CENTRAL = "central"
    FORWARD = "forward"


class GradientMethod(str, enum.Enum):
    FD = "fd"
    ANALYTIC = "analytic"


_DEFAULT_DELTA = {FdScheme.CENTRAL: 1e-6, FdScheme.FORWARD: 1e-8}


@dataclass(frozen=True)
class TrainingConfig:
    """All hyperparameters of one training run."""

    layers_enc: int
    layers_dec: int
    retain_dim: int
    eta: float = 0.01
    iterations: int = 300
    delta: float | None = None
    init: tuple[float, float] = (DEFAULT_INIT_THETA, DEFAULT_INIT_ALPHA)
    topology: Topology = Topology.CROSS
    decoder_mode: DecoderMode = DecoderMode.TRAINED
    loss_kind: LossKind = LossKind.RECONSTRUCTION
    fd_scheme: FdScheme = FdScheme.CENTRAL
    gradient_method: GradientMethod = GradientMethod.FD
    train_alpha: bool = True
    freeze_encoder: bool = False
    freeze_decoder: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.layers_enc < 1 or self.layers_dec < 1:
            raise InvalidParamsError("layer counts must be at least 1")
        if self.retain_dim < 1:
            raise InvalidParamsError("retained dimension must be at least 1")
        if self.eta <= 0:
            raise InvalidParamsError(f"learning rate must be positive, got {self.eta}")
        if self.iterations < 1:
            raise InvalidParamsError("need at least one iteration")
        if self.delta is not None and self.delta <= 0:
            raise InvalidParamsError(f"FD step must be positive, got {self.delta}")
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "decoder_mode", DecoderMode(self.decoder_mode))
        object.__setattr__(self, "loss_kind", LossKind(self.loss_kind))
        object.__setattr__(self, "fd_scheme", FdScheme(self.fd_scheme))
        object.__setattr__(self, "gradient_method", GradientMethod(self.gradient_method))

    @property
    def fd_step(self) -> float:
        return self.delta if self.delta is not None else _DEFAULT_DELTA[self.fd_scheme]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    loss: float
    loss_inv: float
    e_amp: float
    e_pha: float
    grad_norm_theta_enc: float
    grad_norm_theta_dec: float
    grad_norm_alpha_enc: float
    grad_norm_alpha_dec: float
    wall_ms: float


HISTORY_COLUMNS = (
    "iter",
    "loss",
    "loss_inv",
    "e_amp",
    "e_pha",
    "grad_norm_theta_enc",
    "grad_norm_theta_dec",
    "grad_norm_alpha_enc",
    "grad_norm_alpha_dec",
    "wall_ms",
)


@dataclass
class TrainingHistory:
    """One record per completed iteration, plus the final parameter snapshot."""

    records: list[IterationRecord] = field(default_factory=list)
    final_encoder: MeshNetwork | None = None
    final_decoder: MeshNetwork | None = None

    def __len__(self) -> int:
        return len(self.records)

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records], dtype=np.float64)

    def to_csv(self, include_timing: bool = True) -> str:
        """CSV export; wall-clock is the one non-reproducible column and can be dropped."""
        cols = HISTORY_COLUMNS if include_timing else HISTORY_COLUMNS[:-1]
        lines = [",".join(cols)]
        for r in self.records:
            row = [
                str(r.iteration),
                "%.17g" % r.loss,
                "%.17g" % r.loss_inv,
                "%.17g" % r.e_amp,
                "%.17g" % r.e_pha,
                "%.17g" % r.grad_norm_theta_enc,
                "%.17g" % r.grad_norm_theta_dec,
                "%.17g" % r.grad_norm_alpha_enc,
                "%.17g" % r.grad_norm_alpha_dec,
            ]
            if include_timing:
                row.append("%.3f" % r.wall_ms)
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


class TrainResult(NamedTuple):
    encoder: MeshNetwork
    decoder: MeshNetwork
    history: TrainingHistory


# ---------------------------------------------------------------------------
# Losses.


def _states_matrix(states: Sequence[StateVector]) -> np.ndarray:
    if not states:
        raise DimMismatchError("empty state list")
    n = states[0].dim
    for s in states:
        if s.dim != n:
            raise DimMismatchError("states must share a dimension")
    return np.ascontiguousarray(np.stack([s.amps for s in states], axis=1))  # (N, M)


def loss_reconstruction(
    outputs: Sequence[StateVector], targets: Sequence[StateVector]
) -> float:
    """Summed squared deviation between output and target amplitudes."""
    if len(outputs) != len(targets):
        raise DimMismatchError(f"{len(outputs)} outputs vs {len(targets)} targets")
    out = _states_matrix(outputs)
    tgt = _states_matrix(targets)
    if out.shape != tgt.shape:
        raise DimMismatchError("outputs and targets must share a dimension")
    return float(np.sum(np.abs(out - tgt) ** 2))


def loss_inv(
    enc: MeshNetwork, channel: CompressionChannel, inputs: Sequence[StateVector]
) -> float:
    """Mean projected-out probability 1 - <chi|chi> over the input set."""
    mat = _states_matrix(inputs)
    if mat.shape[0] != enc.n_modes:
        raise DimMismatchError(
            f"inputs have dim {mat.shape[0]}, network has {enc.n_modes} modes"
        )
    batch = mat.copy()
    GateProgram.from_network(enc).apply(batch)
    kept = np.sum(np.abs(batch[: channel.d]) ** 2, axis=0)
    return float(np.mean(1.0 - kept))


# ---------------------------------------------------------------------------
# Finite-difference gradient over a black-box scalar loss.


def fd_gradient(
    loss_eval: Callable[[np.ndarray], float],
    params: np.ndarray,
    scheme: FdScheme = FdScheme.CENTRAL,
    delta: float = 1e-6,
    active: np.ndarray | None = None,
) -> np.ndarray:
    """Per-coordinate difference quotients of a scalar loss.

    Coordinates whose ``active`` flag is false receive gradient 0 without any
    loss evaluation.
    """
    if delta <= 0:
        raise InvalidParamsError(f"FD step must be positive, got {delta}")
    scheme = FdScheme(scheme)
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros_like(params)
    if active is None:
        active = np.ones(params.shape, dtype=bool)
    base = None
    if scheme is FdScheme.FORWARD:
        base = float(loss_eval(params))
    work = params.copy()
    for i in range(params.size):
        if not active[i]:
            continue
        saved = work[i]
        work[i] = saved + delta
        plus = float(loss_eval(work))
        if scheme is FdScheme.CENTRAL:
            work[i] = saved - delta
            minus = float(loss_eval(work))
            grad[i] = (plus - minus) / (2.0 * delta)
        else:
            grad[i] = (plus - base) / delta
        work[i] = saved
    return grad


# ---------------------------------------------------------------------------
# Exact reverse-mode gradient through the gate product and renormalization.


def _gate_deriv_entries(theta: float, alpha: float, adjoint: bool):
    """d(applied 2x2)/dtheta and d(applied 2x2)/dalpha entry tuples."""
    c = math.cos(theta)
    s = math.sin(theta)
    e = complex(math.cos(alpha), math.sin(alpha))
    if adjoint:
        ec = e.conjugate()
        d_theta = (-ec * s, ec * c, complex(-c), complex(-s))
        d_alpha = (-1j * ec * c, -1j * ec * s, 0j, 0j)
    else:
        d_theta = (-e * s, complex(-c), e * c, complex(-s))
        d_alpha = (1j * e * c, 0j, 1j * e * s, 0j)
    return d_theta, d_alpha


def _forward_trace(prog: GateProgram, batch: np.ndarray) -> np.ndarray:
    """Apply the program in place, saving each gate's two input rows."""
    pre = np.empty((prog.n_gates, 2, batch.shape[1]), dtype=np.complex128)
    for g in range(prog.n_gates):
        i = prog.k[g]
        pre[g, 0] = batch[i]
        pre[g, 1] = batch[i + 1]
        a = pre[g, 0]
        b = pre[g, 1]
        batch[i] = prog.m00[g] * a + prog.m01[g] * b
        batch[i + 1] = prog.m10[g] * a + prog.m11[g] * b
    return pre


def _backward_trace(prog: GateProgram, pre: np.ndarray, cot: np.ndarray):
    """Pull a cotangent back through the program, accumulating parameter grads.

    The convention is dLoss = 2 Re <cot, d(stage)>; gradients for gate g pair
    the cotangent at its output with (dM/dparam) applied to its saved inputs.
    """
    g_theta = np.zeros(prog.n_gates, dtype=np.float64)
    g_alpha = np.zeros(prog.n_gates, dtype=np.float64)
    for g in range(prog.n_gates - 1, -1, -1):
        i = prog.k[g]
        a = pre[g, 0]
        b = pre[g, 1]
        ck = cot[i].copy()
        ck1 = cot[i + 1].copy()
        (t00, t01, t10, t11), (a00, a01, a10, a11) = _gate_deriv_entries(
            prog.theta[g], prog.alpha[g], prog.adjoint
        )
        g_theta[g] = 2.0 * float(
            np.sum(
                (np.conj(ck) * (t00 * a + t01 * b)).real
                + (np.conj(ck1) * (t10 * a + t11 * b)).real
            )
        )
        g_alpha[g] = 2.0 * float(
            np.sum(
                (np.conj(ck) * (a00 * a + a01 * b)).real
                + (np.conj(ck1) * (a10 * a + a11 * b)).real
            )
        )
        m00 = prog.m00[g]
        m01 = prog.m01[g]
        m10 = prog.m10[g]
        m11 = prog.m11[g]
        cot[i] = np.conj(m00) * ck + np.conj(m10) * ck1
        cot[i + 1] = np.conj(m01) * ck + np.conj(m11) * ck1
    return g_theta, g_alpha


def _renorm_backward(
    cot_chi_hat: np.ndarray, chi_hat: np.ndarray, sqrt_kept: np.ndarray, d: int
) -> np.ndarray:
    """Cotangent through chi_hat = (P0 phi) / sqrt(<chi|chi>), back to phi."""
    beta = np.sum((np.conj(chi_hat) * cot_chi_hat).real, axis=0)
    cot_phi = (cot_chi_hat - chi_hat * beta) / sqrt_kept
    cot_phi[d:] = 0.0
    return cot_phi


def analytic_gradient(
    enc: MeshNetwork,
    dec: MeshNetwork,
    channel: CompressionChannel,
    inputs: Sequence[StateVector],
    targets: Sequence[StateVector] | None = None,
    loss_kind: LossKind = LossKind.RECONSTRUCTION,
) -> np.ndarray:
    """Exact gradient of the selected loss, laid out [thetaE, alphaE, thetaD, alphaD].

    The reconstruction gradient differentiates the summed loss; the
    inv-probability gradient differentiates the sample mean (the decoder block
    is identically zero since that loss never sees the decoder).
    """
    loss_kind = LossKind(loss_kind)
    in_mat = _states_matrix(inputs)
    n, m = in_mat.shape
    if enc.n_modes != n or dec.n_modes != n or channel.n_modes != n:
        raise DimMismatchError("network, channel, and input dimensions must agree")
    enc_prog = GateProgram.from_network(enc)
    dec_prog = GateProgram.from_network(dec)

    batch = in_mat.copy()
    pre_enc = _forward_trace(enc_prog, batch)
    kept = np.sum(np.abs(batch[: channel.d]) ** 2, axis=0)

    if loss_kind is LossKind.INV_PROBABILITY:
        cot = np.zeros_like(batch)
        cot[: channel.d] = -batch[: channel.d] / m
        ge_t, ge_a = _backward_trace(enc_prog, pre_enc, cot)
        zeros = np.zeros(dec_prog.n_gates, dtype=np.float64)
        return np.concatenate([ge_t, ge_a, zeros, zeros])

    if targets is None:
        raise InvalidParamsError("reconstruction loss needs targets")
    tgt_mat = _states_matrix(targets)
    if tgt_mat.shape != in_mat.shape:
        raise DimMismatchError("targets must match inputs in count and dimension")
    if np.any(kept < KEPT_PROB_FLOOR):
        idx = int(np.argmin(kept))
        raise FullyRejectedError(f"sample {idx} kept probability {kept[idx]:.3e}")
    sqrt_kept = np.sqrt(kept)
    chi_hat = np.zeros_like(batch)
    chi_hat[: channel.d] = batch[: channel.d] / sqrt_kept

    out = chi_hat.copy()
    pre_dec = _forward_trace(dec_prog, out)
    cot_out = out - tgt_mat
    gd_t, gd_a = _backward_trace(dec_prog, pre_dec, cot_out)
    cot_phi = _renorm_backward(cot_out, chi_hat, sqrt_kept, channel.d)
    ge_t, ge_a = _backward_trace(enc_prog, pre_enc, cot_phi)
    return np.concatenate([ge_t, ge_a, gd_t, gd_a])


# ---------------------------------------------------------------------------
# Training engine.


class _Trainer:
    def __init__(self, cfg: TrainingConfig, inputs, targets):
        self.cfg = cfg
        self.in_mat = _states_matrix(inputs)
        self.n, self.m = self.in_mat.shape
        if cfg.retain_dim > self.n:
            raise InvalidParamsError(
                f"retained dimension {cfg.retain_dim} exceeds state dim {self.n}"
            )
        self.tgt_mat = self.in_mat if targets is None else _states_matrix(targets)
        if self.tgt_mat.shape != self.in_mat.shape:
            raise DimMismatchError("targets must match inputs in count and dimension")
        self.d = cfg.retain_dim
        # Recorded loss is the per-element mean; the gradient objective keeps
        # the sum over samples (divides by N only), which is what makes the
        # reference eta and iteration counts converge at both problem sizes.
        self.loss_scale = 1.0 / (self.m * self.n)
        self.grad_scale = 1.0 / self.n

        enc_net = build_network(
            self.n, cfg.topology, cfg.layers_enc, cfg.init, Role.ENCODER
        )
        self.enc = GateProgram.from_network(enc_net)
        self.enc_template = enc_net
        self.mirror = cfg.decoder_mode is DecoderMode.MIRROR_INVERSE
        if self.mirror:
            if cfg.layers_dec != cfg.layers_enc:
                raise InvalidParamsError(
                    "mirror-inverse decoding requires layers_dec == layers_enc"
                )
            self.dec = self._mirrored_program()
            self.dec_template = None
        else:
            dec_net = build_network(
                self.n, cfg.topology, cfg.layers_dec, cfg.init, Role.DECODER
            )
            self.dec = GateProgram.from_network(dec_net)
            self.dec_template = dec_net

        rec = cfg.loss_kind is LossKind.RECONSTRUCTION
        self.act_theta_e = not cfg.freeze_encoder
        self.act_alpha_e = cfg.train_alpha and not cfg.freeze_encoder
        dec_trainable = not self.mirror and not cfg.freeze_decoder and rec
        self.act_theta_d = dec_trainable
        self.act_alpha_d = dec_trainable and cfg.train_alpha

    def _mirrored_program(self) -> GateProgram:
        g = self.enc.n_gates
        rev = slice(None, None, -1)
        return GateProgram(
            self.n, self.enc.k[rev], self.enc.theta[rev], self.enc.alpha[rev], True
        )

    def _sync_mirror(self):
        self.dec.theta[:] = self.enc.theta[::-1]
        self.dec.alpha[:] = self.enc.alpha[::-1]
        self.dec.refresh()

    # -- loss evaluations -------------------------------------------------

    def _encode(self) -> tuple[np.ndarray, np.ndarray]:
        batch = self.in_mat.copy()
        self.enc.apply(batch)
        kept = np.sum(np.abs(batch[: self.d]) ** 2, axis=0)
        return batch, kept

    def _chi_hat(self, enc_out: np.ndarray, kept: np.ndarray) -> np.ndarray:
        if np.any(kept < KEPT_PROB_FLOOR):
            idx = int(np.argmin(kept))
            raise FullyRejectedError(
                f"sample {idx} kept probability {kept[idx]:.3e} underflows"
            )
        chi_hat = np.zeros_like(enc_out)
        # NaN parameters slip past the floor check; they propagate to the loss
        # where the non-finite check reports them.
        with np.errstate(invalid="ignore"):
            chi_hat[: self.d] = enc_out[: self.d] / np.sqrt(kept)
        return chi_hat

    def _decode_raw(self, chi_hat: np.ndarray) -> float:
        out = chi_hat.copy()
        self.dec.apply(out)
        return float(np.sum(np.abs(out - self.tgt_mat) ** 2))

    def _full_raw(self) -> float:
        """Raw FD evaluation unit: summed squared error, or mean lost probability."""
        enc_out, kept = self._encode()
        if self.cfg.loss_kind is LossKind.INV_PROBABILITY:
            return float(np.mean(1.0 - kept))
        return self._decode_raw(self._chi_hat(enc_out, kept))

    def _base_state(self):
        """Base evaluation shared by history recording and the FD sweep."""
        enc_out, kept = self._encode()
        loss_inv_val = float(np.mean(1.0 - kept))
        chi_hat = self._chi_hat(enc_out, kept)
        out = chi_hat.copy()
        self.dec.apply(out)
        rec_sum = float(np.sum(np.abs(out - self.tgt_mat) ** 2))
        if self.cfg.loss_kind is LossKind.INV_PROBABILITY:
            recorded = loss_inv_val
            raw_base = loss_inv_val
        else:
            recorded = rec_sum * self.loss_scale
            raw_base = rec_sum
        e_amp, e_pha = amp_phase_errors_arrays(out.T, self.tgt_mat.T)
        return recorded, raw_base, loss_inv_val, e_amp, e_pha, chi_hat

    # -- gradients ---------------------------------------------------------

    def _fd_pair(self, eval_fn, base: float):
        delta = self.cfg.fd_step
        if self.cfg.fd_scheme is FdScheme.CENTRAL:
            def quotient(set_plus, set_minus, restore):
                set_plus()
                plus = eval_fn()
                set_minus()
                minus = eval_fn()
                restore()
                return (plus - minus) / (2.0 * delta)
        else:
            def quotient(set_plus, set_minus, restore):
                set_plus()
                plus = eval_fn()
                restore()
                return (plus - base) / delta
        return quotient

    def _grad_fd(self, raw_base: float, chi_hat: np.ndarray):
        delta = self.cfg.fd_step
        inv = self.cfg.loss_kind is LossKind.INV_PROBABILITY
        ge_t = np.zeros(self.enc.n_gates)
        ge_a = np.zeros(self.enc.n_gates)
        gd_t = np.zeros(self.dec.n_gates)
        gd_a = np.zeros(self.dec.n_gates)

        if inv:
            def full_eval():
                batch = self.in_mat.copy()
                self.enc.apply(batch)
                kept = np.sum(np.abs(batch[: self.d]) ** 2, axis=0)
                return float(np.mean(1.0 - kept))
        else:
            full_eval = self._full_raw

        quotient = self._fd_pair(full_eval, raw_base)

        def enc_coord(g, theta, alpha, perturb_theta):
            saved = self.enc.saved_entries(g)
            if self.mirror:
                j = self.enc.n_gates - 1 - g
                saved_dec = self.dec.saved_entries(j)

                def set_at(t, al):
                    self.enc.set_gate(g, t, al)
                    self.dec.set_gate(j, t, al)

                def restore():
                    self.enc.restore_entries(g, saved)
                    self.dec.restore_entries(j, saved_dec)
            else:
                set_at = lambda t, al: self.enc.set_gate(g, t, al)
                restore = lambda: self.enc.restore_entries(g, saved)
            if perturb_theta:
                return quotient(
                    lambda: set_at(theta + delta, alpha),
                    lambda: set_at(theta - delta, alpha),
                    restore,
                )
            return quotient(
                lambda: set_at(theta, alpha + delta),
                lambda: set_at(theta, alpha - delta),
                restore,
            )

        for g in range(self.enc.n_gates):
            theta = self.enc.theta[g]
            alpha = self.enc.alpha[g]
            if self.act_theta_e:
                ge_t[g] = enc_coord(g, theta, alpha, True)
            if self.act_alpha_e:
                ge_a[g] = enc_coord(g, theta, alpha, False)

        if self.act_theta_d or self.act_alpha_d:
            # Decoder perturbations reuse the base encoder output exactly.
            def dec_eval():
                return self._decode_raw(chi_hat)

            dec_quotient = self._fd_pair(dec_eval, raw_base)
            for g in range(self.dec.n_gates):
                theta = self.dec.theta[g]
                alpha = self.dec.alpha[g]
                saved = self.dec.saved_entries(g)
                restore = lambda: self.dec.restore_entries(g, saved)
                if self.act_theta_d:
                    gd_t[g] = dec_quotient(
                        lambda: self.dec.set_gate(g, theta + delta, alpha),
                        lambda: self.dec.set_gate(g, theta - delta, alpha),
                        restore,
                    )
                if self.act_alpha_d:
                    gd_a[g] = dec_quotient(
                        lambda: self.dec.set_gate(g, theta, alpha + delta),
                        lambda: self.dec.set_gate(g, theta, alpha - delta),
                        restore,
                    )
        if self.cfg.loss_kind is LossKind.RECONSTRUCTION:
            s = self.grad_scale
            ge_t *= s
            ge_a *= s
            gd_t *= s
            gd_a *= s
        return ge_t, ge_a, gd_t, gd_a

    def _grad_analytic(self):
        inv = self.cfg.loss_kind is LossKind.INV_PROBABILITY
        batch = self.in_mat.copy()
        pre_enc = _forward_trace(self.enc, batch)
        kept = np.sum(np.abs(batch[: self.d]) ** 2, axis=0)
        if inv:
            cot = np.zeros_like(batch)
            cot[: self.d] = -batch[: self.d] / self.m
            ge_t, ge_a = _backward_trace(self.enc, pre_enc, cot)
            gd_t = np.zeros(self.dec.n_gates)
            gd_a = np.zeros(self.dec.n_gates)
        else:
            if np.any(kept < KEPT_PROB_FLOOR):
                idx = int(np.argmin(kept))
                raise FullyRejectedError(
                    f"sample {idx} kept probability {kept[idx]:.3e} underflows"
                )
            sqrt_kept = np.sqrt(kept)
            chi_hat = np.zeros_like(batch)
            chi_hat[: self.d] = batch[: self.d] / sqrt_kept
            out = chi_hat.copy()
            pre_dec = _forward_trace(self.dec, out)
            cot_out = (out - self.tgt_mat) * self.grad_scale
            gd_t, gd_a = _backward_trace(self.dec, pre_dec, cot_out)
            cot_phi = _renorm_backward(cot_out, chi_hat, sqrt_kept, self.d)
            ge_t, ge_a = _backward_trace(self.enc, pre_enc, cot_phi)
        if self.mirror:
            ge_t = ge_t + gd_t[::-1]
            ge_a = ge_a + gd_a[::-1]
            gd_t = np.zeros(self.dec.n_gates)
            gd_a = np.zeros(self.dec.n_gates)
        if not self.act_theta_e:
            ge_t[:] = 0.0
        if not self.act_alpha_e:
            ge_a[:] = 0.0
        if not self.act_theta_d:
            gd_t[:] = 0.0
        if not self.act_alpha_d:
            gd_a[:] = 0.0
        return ge_t, ge_a, gd_t, gd_a

    # -- main loop ---------------------------------------------------------

    def run(self) -> TrainResult:
        cfg = self.cfg
        history = TrainingHistory()
        eta = cfg.eta
        # Each record reflects the state right after its iteration's update,
        # so evaluating the returned networks reproduces the last row.
        recorded, raw_base, loss_inv_val, e_amp, e_pha, chi_hat = self._base_state()
        for it in range(1, cfg.iterations + 1):
            started = time.perf_counter()
            if not math.isfinite(recorded):
                raise NonFiniteLossError(
                    f"loss became {recorded} at iteration {it}"
                )
            if cfg.gradient_method is GradientMethod.ANALYTIC:
                ge_t, ge_a, gd_t, gd_a = self._grad_analytic()
            else:
                ge_t, ge_a, gd_t, gd_a = self._grad_fd(raw_base, chi_hat)

            if self.act_theta_e:
                self.enc.theta -= eta * ge_t
            if self.act_alpha_e:
                self.enc.alpha -= eta * ge_a
            if self.act_theta_d:
                self.dec.theta -= eta * gd_t
            if self.act_alpha_d:
                self.dec.alpha -= eta * gd_a
            self.enc.refresh()
            if self.mirror:
                self._sync_mirror()
            else:
                self.dec.refresh()

            recorded, raw_base, loss_inv_val, e_amp, e_pha, chi_hat = self._base_state()
            if not math.isfinite(recorded):
                raise NonFiniteLossError(f"loss became {recorded} at iteration {it}")
            wall_ms = (time.perf_counter() - started) * 1000.0
            history.records.append(
                IterationRecord(
                    iteration=it,
                    loss=recorded,
                    loss_inv=loss_inv_val,
                    e_amp=e_amp,
                    e_pha=e_pha,
                    grad_norm_theta_enc=float(np.mean(np.abs(ge_t))),
                    grad_norm_theta_dec=float(np.mean(np.abs(gd_t))),
                    grad_norm_alpha_enc=float(np.mean(np.abs(ge_a))),
                    grad_norm_alpha_dec=float(np.mean(np.abs(gd_a))),
                    wall_ms=wall_ms,
                )
            )

        encoder = self.enc_template.with_params(self.enc.theta, self.enc.alpha)
        if self.mirror:
            from .mesh import inverse_of

            decoder = inverse_of(encoder)
        else:
            decoder = self.dec_template.with_params(self.dec.theta, self.dec.alpha)
        history.final_encoder = encoder
        history.final_decoder = decoder
        return TrainResult(encoder, decoder, history)


def train(
    cfg: TrainingConfig,
    inputs: Sequence[StateVector],
    targets: Sequence[StateVector] | None = None,
) -> TrainResult:
    """Run the full training loop; autoencoding uses targets = inputs.

    Deterministic: identical config and dataset produce identical histories.
    """
    return _Trainer(cfg, inputs, targets).run()


# ---------------------------------------------------------------------------
# Folding trained parameters into physical ranges.


_TWO_PI = 2.0 * math.pi


def _fold_alpha(alpha: float) -> float:
    a = math.fmod(alpha, _TWO_PI)
    return a + _TWO_PI if a < 0.0 else a


def export_physical(net: MeshNetwork, strict: bool = True) -> MeshNetwork:
    """Equivalent network with every theta in [0, pi/2] and alpha in [0, 2*pi).

    Out-of-range rotations are rewritten with sign/phase absorption identities;
    the leftover sign flips are pushed forward through later gates, where a
    flip on a gate's lower mode folds into its phase. Flips that survive to
    the network output cannot be represented in this gate family at all: with
    ``strict`` those raise ExportRangeError, otherwise they are dropped and
    the result matches the original only up to signs of some output rows.
    Gates already in range are returned bit-identical.
    """
    if net.applies_adjoint:
        raise InvalidParamsError(
            "fold parameters of the underlying network before inverting it"
        )
    pending = np.ones(net.n_modes, dtype=np.int8)
    new_layers: list[list] = []
    from .mesh import GateParam  # local to avoid cycle at import time

    for layer in net.layers:
        new_layer = []
        for gate in layer:
            k = gate.k
            theta = gate.theta
            alpha = gate.alpha
            e0 = pending[k]
            e1 = pending[k + 1]
            # Absorb pending input signs: a flip on the lower mode folds into
            # alpha; a flip on the upper mode re-emits a flip on both outputs.
            if e0 < 0 and e1 > 0:
                alpha += math.pi
                pending[k] = 1
            elif e0 > 0 and e1 < 0:
                alpha += math.pi
                pending[k] = -1
            # (-,-) passes through unchanged; (+,+) is a no-op.

            t = math.remainder(theta, _TWO_PI)
            if t <= -math.pi:
                t += _TWO_PI
            if 0.0 <= t <= math.pi / 2.0:
                theta_out = theta if t == theta else t
            elif t > math.pi / 2.0:
                theta_out = math.pi - t
                alpha += math.pi
                pending[k + 1] *= -1
            elif t >= -math.pi / 2.0:
                theta_out = -t
                alpha += math.pi
                pending[k] *= -1
            else:
                theta_out = t + math.pi
                pending[k] *= -1
                pending[k + 1] *= -1
            new_layer.append(GateParam(k, theta_out, _fold_alpha(alpha)))
        new_layers.append(new_layer)

    if strict and np.any(pending < 0):
        flipped = [int(i) for i in np.nonzero(pending < 0)[0]]
        raise ExportRangeError(
            f"sign flips on output modes {flipped} cannot be absorbed; "
            "rerun with strict=False to accept sign-equivalence"
        )
    return MeshNetwork(net.n_modes, net.topology, new_layers, net.role)
