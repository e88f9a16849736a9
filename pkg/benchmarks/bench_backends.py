#!/usr/bin/env python3
"""Benchmark the compiled statevector kernel against the numpy fallback.

Times the two operations that dominate training: a batched circuit forward
pass and the batched parameter-shift gradient contraction (vjp). Run after
building the extension:

    python benchmarks/bench_backends.py [--batch 64] [--repeats 20]
"""
import argparse
import importlib
import time

import numpy as np

from geoqgan import ansatz, engine


def load_backends():
    backends = {}
    for name, module in (("numpy", "geoqgan.backends.numpy_backend"),
                         ("cython", "geoqgan.backends._cykernel")):
        try:
            backends[name] = importlib.import_module(module)
        except ImportError:
            print(f"  ({name} backend unavailable, skipping)")
    return backends


def time_forward(impl, comp, latents, params, repeats):
    prog = comp.forward
    out = np.empty((latents.shape[0], 6))
    args = (prog.kind, prog.w0, prog.w1, prog.src, prog.idx, prog.coeff,
            latents, params, -1, 0.0, out)
    impl.run_program(*args)
    start = time.perf_counter()
    for _ in range(repeats):
        impl.run_program(*args)
    return (time.perf_counter() - start) / repeats


def time_vjp(impl, comp, latents, params, out_grad, repeats):
    prog = comp.diff
    grad = np.zeros(comp.n_params)
    args = (prog.kind, prog.w0, prog.w1, prog.src, prog.idx, prog.coeff,
            comp.diff_gate, comp.diff_param, comp.diff_coeff,
            latents, params, out_grad, grad)
    impl.vjp_program(*args)
    start = time.perf_counter()
    for _ in range(repeats):
        impl.vjp_program(*args)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    latents = rng.standard_normal((args.batch, 6))
    out_grad = rng.standard_normal((args.batch, 6))
    backends = load_backends()

    print(f"batch size {args.batch}, {args.repeats} repeats, times in ms")
    header = f"{'variant':28s} {'op':8s}" + "".join(f" {n:>10s}" for n in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9s}"
    print(header)
    for name in ("triangle", "triangle_cyclic_crot", "all_to_all"):
        comp = engine._compile(ansatz.build_template(ansatz.get_variant(name)))
        params = rng.normal(0, 0.3, comp.n_params)
        for op, timer in (("forward", time_forward), ("vjp", time_vjp)):
            times = {}
            for bname, impl in backends.items():
                extra = (out_grad,) if op == "vjp" else ()
                times[bname] = timer(impl, comp, latents, params, *extra, args.repeats)
            row = f"{name:28s} {op:8s}" + "".join(f" {1e3 * t:10.3f}" for t in times.values())
            if len(times) == 2:
                row += f" {times['numpy'] / times['cython']:8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
