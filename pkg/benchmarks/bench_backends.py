"""Compare the compiled gate-sweep kernel against the pure-numpy fallback.

Times the raw kernel on batched sweeps of increasing depth, then one
finite-difference training iteration of the letters preset on each backend.

Run:  python benchmarks/bench_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from meshcodec import codec
from meshcodec._kernel import _fallback
from meshcodec.mesh import GateProgram, Topology, build_network
from meshcodec.training import LossKind, TrainingConfig, train

try:
    from meshcodec._kernel import _core
except ImportError:
    _core = None


def _random_program(n_modes: int, n_layers: int, seed: int) -> GateProgram:
    rng = np.random.default_rng(seed)
    net = build_network(n_modes, Topology.CROSS, n_layers)
    prog = GateProgram.from_network(net)
    prog.theta[:] = rng.uniform(0.0, 2.0 * np.pi, prog.n_gates)
    prog.alpha[:] = rng.uniform(0.0, 2.0 * np.pi, prog.n_gates)
    prog.refresh()
    return prog


def _time_kernel(fn, prog, batch, repeats):
    best = float("inf")
    for _ in range(repeats):
        work = batch.copy()
        start = time.perf_counter()
        fn(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, work)
        best = min(best, time.perf_counter() - start)
    return best, work


def bench_kernel(quick: bool):
    print("gate-sweep kernel (best of several runs)")
    print(f"{'N':>4} {'layers':>6} {'cols':>5} {'python':>12} {'compiled':>12} {'speedup':>8}")
    cases = [(8, 10, 50), (16, 20, 26), (32, 20, 26), (32, 45, 26)]
    if quick:
        cases = cases[:2]
    repeats = 3 if quick else 7
    for n_modes, n_layers, cols in cases:
        prog = _random_program(n_modes, n_layers, seed=n_modes + n_layers)
        rng = np.random.default_rng(1)
        batch = rng.standard_normal((n_modes, cols)) + 1j * rng.standard_normal(
            (n_modes, cols)
        )
        # Amortize over many sweeps so per-call overhead does not dominate.
        sweeps = 20 if quick else 100

        def run_many(fn, b):
            start = time.perf_counter()
            for _ in range(sweeps):
                fn(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, b)
            return (time.perf_counter() - start) / sweeps

        t_py = run_many(_fallback.apply_gate_program, batch.copy())
        if _core is None:
            print(f"{n_modes:>4} {n_layers:>6} {cols:>5} {t_py * 1e6:>10.1f}us {'(extension not built)':>12}")
            continue
        t_c = run_many(_core.apply_gate_program, batch.copy())
        _, out_py = _time_kernel(_fallback.apply_gate_program, prog, batch, 1)
        _, out_c = _time_kernel(_core.apply_gate_program, prog, batch, 1)
        dev = float(np.max(np.abs(out_py - out_c)))
        print(
            f"{n_modes:>4} {n_layers:>6} {cols:>5} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
            f"{t_py / t_c:>7.1f}x   (max dev {dev:.1e})"
        )


def bench_training_iteration(quick: bool):
    import meshcodec._kernel as kernel_pkg

    iters = 1
    images = codec.letters_dataset()
    states = [e.state for e in codec.encode_images(images)]
    cfg = TrainingConfig(
        layers_enc=4 if quick else 20,
        layers_dec=5 if quick else 25,
        retain_dim=4,
        eta=0.01,
        iterations=iters,
        topology=Topology.CROSS,
        loss_kind=LossKind.RECONSTRUCTION,
        train_alpha=False,
    )
    print()
    print(
        f"one finite-difference training iteration, letters preset "
        f"(l_E={cfg.layers_enc}, l_D={cfg.layers_dec})"
    )
    results = {}
    backends = [("python", _fallback.apply_gate_program)]
    if _core is not None:
        backends.append(("compiled", _core.apply_gate_program))
    original = kernel_pkg.apply_gate_program
    try:
        for name, fn in backends:
            kernel_pkg.apply_gate_program = fn
            start = time.perf_counter()
            train(cfg, states)
            results[name] = time.perf_counter() - start
            print(f"  {name:>8}: {results[name]:.2f} s/iteration")
    finally:
        kernel_pkg.apply_gate_program = original
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['compiled']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller cases, fewer repeats")
    args = parser.parse_args()
    if _core is None:
        print("note: compiled extension not built; showing fallback only")
    bench_kernel(args.quick)
    bench_training_iteration(args.quick)


if __name__ == "__main__":
    main()
