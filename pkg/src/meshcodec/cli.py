"""Experiment runner: dataset generation, training, evaluation, artifact output.

Spec files are flat `key = value` text with `#` comments; keys mirror
ExperimentSpec fields. A run writes encoder.net, decoder.net, history.csv,
metrics.json, reconstructions.csv, and manifest.json into the output
directory. Everything except the timing sidecar is byte-reproducible for a
fixed spec and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, codec, metrics
from .errors import (
    FullyRejectedError,
    InvalidParamsError,
    MeshcodecError,
    NonFiniteLossError,
)
from .mesh import (
    CompressionChannel,
    MeshNetwork,
    Topology,
    compress_decode,
    load_network,
    save_network,
)
from .statevec import StateVector
from .training import (
    DEFAULT_INIT_ALPHA,
    DEFAULT_INIT_THETA,
    DecoderMode,
    FdScheme,
    GradientMethod,
    LossKind,
    TrainingConfig,
    train,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


@dataclass
class ExperimentSpec:
    """One experiment: dataset reference plus all training hyperparameters."""

    name: str = "experiment"
    dataset: str = "letters"
    topology: str = "cross"
    layers_enc: int = 20
    layers_dec: int = 25
    retain: int = 4
    eta: float = 0.01
    iterations: int = 300
    delta: float | None = None
    fd_scheme: str = "central"
    init_theta: float = DEFAULT_INIT_THETA
    init_alpha: float = DEFAULT_INIT_ALPHA
    decoder_mode: str = "trained"
    loss: str = "reconstruction"
    train_alpha: bool = False
    gradient: str = "fd"
    seed: int = 0
    output_dir: str = "out"
    emit_plots_data: bool = False

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            layers_enc=self.layers_enc,
            layers_dec=self.layers_dec,
            retain_dim=self.retain,
            eta=self.eta,
            iterations=self.iterations,
            delta=self.delta,
            init=(self.init_theta, self.init_alpha),
            topology=Topology(self.topology),
            decoder_mode=DecoderMode(self.decoder_mode),
            loss_kind=LossKind(self.loss),
            fd_scheme=FdScheme(self.fd_scheme),
            gradient_method=GradientMethod(self.gradient),
            train_alpha=self.train_alpha,
            seed=self.seed,
        )


_BOOL_FIELDS = {"train_alpha", "emit_plots_data"}
_INT_FIELDS = {"layers_enc", "layers_dec", "retain", "iterations", "seed"}
_FLOAT_FIELDS = {"eta", "delta", "init_theta", "init_alpha"}


def parse_spec_text(text: str) -> ExperimentSpec:
    spec = ExperimentSpec()
    known = set(asdict(spec))
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParamsError(f"spec line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise InvalidParamsError(f"spec line {lineno}: unknown key {key!r}")
        if key in _BOOL_FIELDS:
            if value.lower() not in ("true", "false"):
                raise InvalidParamsError(f"spec line {lineno}: {key} must be true or false")
            parsed: object = value.lower() == "true"
        elif key in _INT_FIELDS:
            parsed = int(value)
        elif key in _FLOAT_FIELDS:
            parsed = None if value.lower() == "none" else float(value)
        else:
            parsed = value
        setattr(spec, key, parsed)
    return spec


def load_spec(path: Path) -> ExperimentSpec:
    """Read a spec file, or the embedded spec of a manifest.json."""
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        spec = ExperimentSpec()
        for key, value in payload["spec"].items():
            if not hasattr(spec, key):
                raise InvalidParamsError(f"manifest spec has unknown key {key!r}")
            setattr(spec, key, value)
        return spec
    return parse_spec_text(text)


# ---------------------------------------------------------------------------
# Datasets.


def _parse_kv_flags(body: str) -> dict[str, str]:
    out = {}
    for part in body.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InvalidParamsError(f"expected key=value in dataset params, got {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_dataset(spec: ExperimentSpec):
    """Resolve the dataset reference to (targets, kind, extras).

    Returns states ready for training plus what is needed to write
    reconstructions: for images the originals and shape, for complex states
    nothing extra.
    """
    ref = spec.dataset.strip()
    if ref == "letters":
        images = codec.letters_dataset()
        encoded = codec.encode_images(images)
        return [e.state for e in encoded], "image", (images, encoded)
    if ref.startswith("image-csv:"):
        images, _ = codec.read_images_csv(ref.split(":", 1)[1])
        encoded = codec.encode_images(images)
        return [e.state for e in encoded], "image", (images, encoded)
    if ref.startswith("complex-csv:"):
        states = codec.read_states_csv(ref.split(":", 1)[1])
        return states, "complex", None
    if ref.startswith("complex-gen:"):
        params = _parse_kv_flags(ref.split(":", 1)[1])
        states = codec.gen_complex_states(
            m=int(params.get("m", 50)),
            n=int(params.get("n", 8)),
            mode=params.get("mode", codec.SUBSPACE),
            seed=int(params.get("seed", spec.seed)),
            d=int(params["d"]) if "d" in params else None,
            eps=float(params.get("eps", 0.0)),
        )
        return states, "complex", None
    raise InvalidParamsError(f"unknown dataset reference {spec.dataset!r}")


# ---------------------------------------------------------------------------
# run


def _decode_all(enc, dec, channel, states):
    return [compress_decode(enc, dec, channel, s) for s in states]


def _write_run_artifacts(out_dir: Path, spec: ExperimentSpec, result, states, kind, extras):
    enc, dec, history = result
    channel = CompressionChannel(enc.n_modes, spec.retain)
    outputs = _decode_all(enc, dec, channel, states)
    report = metrics.evaluate(outputs, states)

    save_network(enc, out_dir / "encoder.net")
    save_network(dec, out_dir / "decoder.net")
    (out_dir / "history.csv").write_text(history.to_csv(include_timing=False), "ascii")
    timing = ["iter,wall_ms"]
    timing += [f"{r.iteration},{r.wall_ms:.3f}" for r in history.records]
    (out_dir / "timing.csv").write_text("\n".join(timing) + "\n", "ascii")
    (out_dir / "metrics.json").write_text(report.to_json_line() + "\n", "ascii")

    if kind == "image":
        images, encoded = extras
        recon = [
            codec.state_to_image(np.abs(o.amps), e.sigma, e.source_shape)
            for o, e in zip(outputs, encoded)
        ]
        codec.write_images_csv(out_dir / "reconstructions.csv", recon)
    else:
        codec.write_states_csv(
            out_dir / "reconstructions.csv", outputs, seed=spec.seed, mode="decoded"
        )

    if spec.emit_plots_data:
        _write_plot_data(out_dir / "plots", history, enc, dec)
    return report


def _write_plot_data(plot_dir: Path, history, enc: MeshNetwork, dec: MeshNetwork):
    from .training import export_physical

    plot_dir.mkdir(parents=True, exist_ok=True)
    lines = ["iter,loss,loss_inv,e_amp,e_pha"]
    for r in history.records:
        lines.append(
            f"{r.iteration},{r.loss:.17g},{r.loss_inv:.17g},{r.e_amp:.17g},{r.e_pha:.17g}"
        )
    (plot_dir / "loss.csv").write_text("\n".join(lines) + "\n", "ascii")

    rows = ["net,layer,k,theta,alpha"]
    for label, net in (("encoder", enc), ("decoder", dec)):
        folded = export_physical(net, strict=False)
        for layer_idx, layer in enumerate(folded.layers):
            for g in layer:
                rows.append(f"{label},{layer_idx},{g.k},{g.theta:.17g},{g.alpha:.17g}")
    (plot_dir / "parameters.csv").write_text("\n".join(rows) + "\n", "ascii")


def cmd_run(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.exists():
        print(f"error: spec file not found: {spec_path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        spec = load_spec(spec_path)
        cfg = spec.training_config()
    except (MeshcodecError, ValueError, KeyError) as exc:
        print(f"error: bad spec: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        states, kind, extras = load_dataset(spec)
    except FileNotFoundError as exc:
        print(f"error: dataset file missing: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except MeshcodecError as exc:
        print(f"error: dataset: {exc}", file=sys.stderr)
        return EXIT_DATA

    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = train(cfg, states)
    except (NonFiniteLossError, FullyRejectedError) as exc:
        print(f"error: training failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MeshcodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = _write_run_artifacts(out_dir, spec, result, states, kind, extras)

    spec_dict = asdict(spec)
    manifest = {
        "name": spec.name,
        "version": __version__,
        "seed": spec.seed,
        "spec_sha256": hashlib.sha256(
            json.dumps(spec_dict, sort_keys=True).encode()
        ).hexdigest(),
        "spec": spec_dict,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", "ascii"
    )
    total_ms = sum(r.wall_ms for r in result.history.records)
    print(
        f"{spec.name}: {len(result.history)} iterations in {total_ms / 1000.0:.1f} s, "
        f"final loss {result.history.records[-1].loss:.6g}, "
        f"similarity {report.similarity:.2f}%, mean fidelity {report.mean_fidelity:.4f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen-data


def cmd_gen_data(args) -> int:
    try:
        if args.kind == "letters":
            text = codec.images_csv_text(codec.letters_dataset())
        else:
            states = codec.gen_complex_states(
                m=args.m, n=args.n, mode=args.mode, seed=args.seed, d=args.d, eps=args.eps
            )
            mode_tag = args.mode
            if args.mode == codec.SUBSPACE:
                mode_tag = f"subspace:d={args.d}:eps={args.eps:g}"
            text = codec.states_csv_text(states, seed=args.seed, mode=mode_tag)
    except MeshcodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text, "ascii")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def _sniff_dataset(path: Path):
    header = path.read_text("ascii").splitlines()[0]
    fields = header.lstrip("#").split()
    if len(fields) == 3:
        images, _ = codec.read_images_csv(path)
        encoded = codec.encode_images(images)
        return [e.state for e in encoded]
    if len(fields) == 4:
        return codec.read_states_csv(path)
    raise InvalidParamsError(f"unrecognized dataset header: {header!r}")


def cmd_eval(args) -> int:
    try:
        enc = load_network(args.enc)
        dec = load_network(args.dec)
    except FileNotFoundError as exc:
        print(f"error: network file missing: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except MeshcodecError as exc:
        print(f"error: bad network file: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        states = _sniff_dataset(Path(args.data))
    except FileNotFoundError as exc:
        print(f"error: dataset file missing: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except (MeshcodecError, IndexError) as exc:
        print(f"error: dataset: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        channel = CompressionChannel(enc.n_modes, args.d)
        outputs = _decode_all(enc, dec, channel, states)
        report = metrics.evaluate(outputs, states)
    except MeshcodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    line = report.to_json_line() + "\n"
    if args.out:
        Path(args.out).write_text(line, "ascii")
    else:
        sys.stdout.write(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshcodec",
        description="Train and evaluate two-mode interferometer mesh codecs.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap worker parallelism (current backends are single-threaded)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a spec or manifest file")
    p_run.add_argument("spec", help="path to a spec file or a manifest.json")
    p_run.set_defaults(fn=cmd_run)

    p_gen = sub.add_parser("gen-data", help="write a dataset CSV")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True)
    p_letters = gen_sub.add_parser("letters", help="the 26-letter 5x5 binary font")
    p_letters.add_argument("--out", default=None)
    p_letters.set_defaults(fn=cmd_gen_data, kind="letters")
    p_complex = gen_sub.add_parser("complex", help="random complex states")
    p_complex.add_argument("--n", type=int, default=8)
    p_complex.add_argument("--m", type=int, default=50)
    p_complex.add_argument("--mode", choices=[codec.UNIFORM, codec.SUBSPACE], default=codec.UNIFORM)
    p_complex.add_argument("--d", type=int, default=None)
    p_complex.add_argument("--eps", type=float, default=0.0)
    p_complex.add_argument("--seed", type=int, default=0)
    p_complex.add_argument("--out", default=None)
    p_complex.set_defaults(fn=cmd_gen_data, kind="complex")

    p_eval = sub.add_parser("eval", help="evaluate saved networks on a dataset")
    p_eval.add_argument("--enc", required=True)
    p_eval.add_argument("--dec", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--d", type=int, required=True)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(fn=cmd_eval)

    p_version = sub.add_parser("version", help="print the package version")
    p_version.set_defaults(fn=lambda args: print(__version__) or EXIT_OK)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
