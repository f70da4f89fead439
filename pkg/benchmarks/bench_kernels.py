"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload runs on both backends with identical inputs, checks that the
outputs agree bit for bit, and reports the best-of-N wall time.
"""

import argparse
import time

import numpy as np

from opdsim._backend import compiled_kernels, get_kernels
from opdsim.ard import navigate
from opdsim.lattice import Lattice, LatticeSpec
from opdsim.pointproc import STANDARD_PROCESSES, sample, sample_conditioned
from opdsim.scene import MarkModel, assign_marks, standard_scene


def dijkstra_case(backend):
    lat = Lattice(LatticeSpec(100, 100))
    w = np.ascontiguousarray(np.random.default_rng(0).uniform(1.0, 5.0, lat.n_edges))
    allowed = np.ones(lat.n_edges, dtype=np.uint8)
    k = get_kernels(backend)
    return lambda: k.dijkstra(lat.indptr, lat.nbr, lat.eid, w, allowed, lat.index((50, 1)), -1)


def fixed_n_case(backend):
    return lambda: sample_conditioned(STANDARD_PROCESSES["S"], n=100, rng=np.random.default_rng(1),
                                      backend=backend).points


def birth_death_case(backend):
    return lambda: sample(STANDARD_PROCESSES["HC"], rng=np.random.default_rng(2), backend=backend).points


def navigate_case(backend):
    rng = np.random.default_rng(3)
    disks = assign_marks(rng.uniform(10, 90, (100, 2)), rng.uniform(10, 90, (40, 2)), MarkModel(), rng)
    scene = standard_scene(disks)
    return lambda: navigate(scene, backend=backend).walk


CASES = [
    ("dijkstra 100x100, full sweep", dijkstra_case),
    ("Strauss fixed-n chain, 1e5 steps", fixed_n_case),
    ("hardcore birth-death chain, 1e5 steps", birth_death_case),
    ("ARD navigate, 100 clutter + 40 obstacles", navigate_case),
]


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'workload':44s} {'cython':>10s} {'python':>10s} {'speedup':>8s}  identical")
    for name, make in CASES:
        tc, oc = best_time(make("cython"), args.repeat)
        tp, op = best_time(make("python"), args.repeat)
        print(f"{name:44s} {tc * 1e3:8.1f}ms {tp * 1e3:8.1f}ms {tp / tc:7.1f}x  {same(oc, op)}")


if __name__ == "__main__":
    main()
