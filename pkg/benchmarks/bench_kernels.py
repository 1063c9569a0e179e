"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--cells 320] [--repeat 5]

Times each hot kernel on a representative input, then two full runs, and
checks that both backends agree on the results.
"""

import argparse
import timeit

import numpy as np

from lwrdg import kernels
from lwrdg.dg import Mesh1D, basis_tables, project_initial
from lwrdg.network import run
from lwrdg.presets import build_preset
from lwrdg.verification import accuracy_config, lp_junction_oracle


def kernel_cases(n_cells, k):
    mesh = Mesh1D.uniform(0.0, 1.0, n_cells)
    st = project_initial(mesh, k, lambda x: 0.5 + 0.45 * np.sin(2 * np.pi * x))
    tb = basis_tables(k)
    out = np.empty_like(st.coeffs)
    cons = np.array([[0.4, 0.3, 0.2], [0.6, 0.7, 0.25]])

    def residual():
        kernels.backend.residual_quadratic(st.coeffs, mesh.widths, tb.phi_q, tb.dphi_q, tb.wq,
                                           tb.psi_right, tb.psi_left, tb.inv_mass, 1.0, 1.0,
                                           0, 0.2, 0.2, out)

    def tvb():
        c = st.coeffs.copy()
        kernels.backend.tvb_limit(c, mesh.widths, tb.psi_right, tb.psi_left, 0.0, True)

    def bp():
        c = st.coeffs.copy()
        c[:, 1:] *= 3.0
        kernels.backend.bp_limit(c, tb.phi_gl, 0.0, 1.0, 1e-12)

    def scan():
        kernels.backend.lp_grid_scan(0.0, 0.25, 0.0, 0.25, 1e-3, cons, 2e-3, 0.0, 0.0)

    def oracle_2x2():
        lp_junction_oracle("2x2", (0.2, 0.22), (0.15, 0.2), alpha=0.4, beta=0.3)

    return {"residual (k=%d, N=%d)" % (k, n_cells): residual,
            "tvb_limit": tvb, "bp_limit": bp, "lp_grid_scan 250x250": scan,
            "2x2 oracle (4 zoom levels)": oracle_2x2}


def full_runs():
    return {
        "accuracy P3, N=160": lambda: run(accuracy_config(3, 160, True)),
        "traffic-circle P2": lambda: run(build_preset("traffic-circle").with_solver(degree=2)),
    }


def best_of(fn, repeat):
    number = max(1, int(0.2 / max(1e-7, timeit.timeit(fn, number=1))))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cells", type=int, default=320)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-runs", action="store_true")
    args = p.parse_args(argv)
    if not kernels.COMPILED_AVAILABLE:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    cases = kernel_cases(args.cells, args.degree)
    if not args.skip_runs:
        cases.update(full_runs())
    print(f"{'case':<30} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for name, fn in cases.items():
        times = {}
        for backend in ("python", "compiled"):
            with kernels.use(backend):
                repeat = args.repeat if "P" not in name else 1
                times[backend] = best_of(fn, repeat)
        print(f"{name:<30} {times['python'] * 1e3:>10.3f}ms {times['compiled'] * 1e3:>10.3f}ms "
              f"{times['python'] / times['compiled']:>7.1f}x")

    # agreement of the two backends on a full network run
    cfg = build_preset("two-two-step").with_solver(degree=2)
    with kernels.use("python"):
        a = run(cfg).state
    with kernels.use("compiled"):
        b = run(cfg).state
    diff = max(float(np.abs(x.coeffs - y.coeffs).max()) for x, y in zip(a.roads, b.roads))
    print(f"max coefficient difference between backends (two-two-step, P2): {diff:.2e}")


if __name__ == "__main__":
    main()
