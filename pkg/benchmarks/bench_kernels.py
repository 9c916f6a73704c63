"""Throughput of the compiled and numpy Yee kernels on the same grid.

    python3 benchmarks/bench_kernels.py --n 40 80 --steps 50

Also checks that both backends produce identical fields.
"""

import argparse
import time

import numpy as np

from pcmrcs.solver import _backend


def make_state(nx, ny, nz, npml, seed=0):
    rng = np.random.default_rng(seed)
    f = {
        "Ex": rng.normal(size=(nx, ny, nz + 1)),
        "Ey": rng.normal(size=(nx, ny, nz + 1)),
        "Ez": rng.normal(size=(nx, ny, nz)),
        "Hx": rng.normal(size=(nx, ny, nz)),
        "Hy": rng.normal(size=(nx, ny, nz)),
        "Hz": rng.normal(size=(nx, ny, nz + 1)),
    }
    for k in ("psi_hx", "psi_hy", "psi_ex", "psi_ey"):
        f[k] = np.zeros((nx, ny, npml))
    c = {
        "b": np.linspace(0.5, 0.9, npml),
        "c": np.linspace(-0.1, -0.01, npml),
        "ca": np.full(nz + 1, 0.999),
        "cb": np.full(nz + 1, 0.3),
        "caz": np.full(nz, 0.999),
        "cbz": np.full(nz, 0.3),
    }
    return f, c


def run(kern, f, c, steps):
    for _ in range(steps):
        kern.update_h(
            f["Ex"], f["Ey"], f["Ez"], f["Hx"], f["Hy"], f["Hz"], f["psi_hx"], f["psi_hy"],
            c["b"], c["c"], 0.2, 1.0, 1.0, 1.0,
        )  # fmt: skip
        kern.update_e(
            f["Ex"], f["Ey"], f["Ez"], f["Hx"], f["Hy"], f["Hz"], f["psi_ex"], f["psi_ey"],
            c["b"], c["c"], c["ca"], c["cb"], c["caz"], c["cbz"], 1.0, 1.0, 1.0,
        )  # fmt: skip


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[40, 80], help="lateral cells per side")
    ap.add_argument("--nz", type=int, default=90)
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()

    try:
        backends = {"python": _backend.get("python"), "cython": _backend.get("cython")}
    except ImportError:
        backends = {"python": _backend.get("python")}
        print("compiled kernels not built; timing the numpy fallback only")

    print(f"{'n':>5} {'backend':>8} {'s/step':>10} {'Mcell/s':>9} {'speedup':>8}")
    for n in args.n:
        cells = n * n * args.nz
        out, times = {}, {}
        for name, kern in backends.items():
            f, c = make_state(n, n, args.nz, 10)
            run(kern, f, c, 1)  # warm-up
            t = time.perf_counter()
            run(kern, f, c, args.steps)
            times[name] = (time.perf_counter() - t) / args.steps
            out[name] = f
        for name, dt in times.items():
            print(f"{n:>5} {name:>8} {dt:>10.4f} {cells / dt / 1e6:>9.1f} {times['python'] / dt:>8.1f}")
        if len(out) == 2:
            same = all(np.array_equal(out["python"][k], out["cython"][k]) for k in out["python"])
            print(f"{'':>5} identical fields: {same}")


if __name__ == "__main__":
    main()
