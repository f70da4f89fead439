"""Acceptance checks, one test per criterion (see the summary section of the pytest run)."""

import math
import os
import time

import numpy as np
import pytest
from scipy import stats as sps

from opdsim.ard import navigate
from opdsim.experiment import ExperimentConfig, all_combos, replay, run
from opdsim.lattice import Lattice, LatticeSpec, shortest_walk
from opdsim.pointproc import CLUTTER_WINDOW, STANDARD_PROCESSES, nearest_neighbor_distances, sample_conditioned
from opdsim.scene import Truth, three_disk_scene, standard_scene
from opdsim.stats import GroupedSample, oneway_anova, studentized_range_ppf, summarize, trend_check, pooled_se

from oracles import ard_expected_length, enumerate_shortest, optimal_expected_length, random_small_scene

# published mean lengths for the P:20 cells; reported, not gated
REFERENCE_P20 = {"CSR": 127.56, "M": 116.77, "T": 116.47, "HC": 135.81, "S": 128.47}


def note(request, text):
    request.node.user_properties.append(("detail", text))


def ci95(row):
    half = sps.t.ppf(0.975, row.n - 1) * row.se
    return row.mean - half, row.mean + half


@pytest.mark.criterion(1)
def test_three_disk_reproduction(request):
    t0 = time.perf_counter()
    res = navigate(three_disk_scene())
    elapsed = time.perf_counter() - t0
    events = [(d.vertex, d.revealed) for d in res.disambiguations]
    note(request, f"length={res.total_length:.4f} disamb={res.n_disambiguations} {elapsed:.3f}s")
    assert abs(res.total_length - 29.49) <= 0.01
    assert events == [((11, 11), Truth.OBSTACLE), ((11, 11), Truth.CLUTTER)]
    assert elapsed < 1.0


@pytest.mark.criterion(2)
def test_empty_field(request):
    res = navigate(standard_scene([]))
    note(request, f"length={res.total_length!r} disamb={res.n_disambiguations}")
    assert res.total_length == 99.0 and res.n_disambiguations == 0


@pytest.mark.criterion(3)
def test_dijkstra_matches_exhaustive_enumeration(request):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    for trial in range(200):
        i_max, j_max = (int(v) for v in rng.integers(2, 6, 2))
        lat = Lattice(LatticeSpec(i_max, j_max))
        # integer weights half the time, so equal-weight optima (and the tie-break) get exercised
        if trial % 2:
            w = rng.integers(1, 4, lat.n_edges).astype(float)
        else:
            w = rng.uniform(0.1, 3.0, lat.n_edges)
        blocked = rng.random(lat.n_edges) < 0.15
        s, t = rng.choice(lat.n_vertices, 2, replace=False)
        ref_w, ref_path = enumerate_shortest(lat, w, int(s), int(t), blocked)
        got = shortest_walk(lat, w, lat.vertex(int(s)), lat.vertex(int(t)), blocked)
        if ref_path is None:
            assert got is None
            continue
        assert got.total_weight == ref_w
        assert [lat.index(v) for v in got.vertices] == ref_path
    elapsed = time.perf_counter() - t0
    note(request, f"200 lattices, exact path and weight match, {elapsed:.2f}s")
    assert elapsed < 30


@pytest.mark.criterion(4)
def test_ard_expected_length_bounded_by_optimal_policy(request):
    t0 = time.perf_counter()
    gaps = []
    for seed in range(100):
        sc = random_small_scene(np.random.default_rng(1000 + seed))
        gaps.append(ard_expected_length(sc) - optimal_expected_length(sc))
    elapsed = time.perf_counter() - t0
    gaps = np.array(gaps)
    optimal = int(np.sum(np.abs(gaps) <= 1e-9))
    note(request, f"min gap={gaps.min():.3g}, ARD optimal on {optimal}/100, max gap={gaps.max():.3f}, {elapsed:.1f}s")
    assert gaps.min() >= -1e-9
    assert elapsed < 300


def _welch_greater(a, b):
    return sps.ttest_ind(a, b, equal_var=False, alternative="greater").pvalue


@pytest.mark.criterion(5)
def test_point_process_invariants(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    nn_mean, min_dist = {}, {}
    for code, spec in STANDARD_PROCESSES.items():
        means, mins = [], []
        for _ in range(200):
            pts = sample_conditioned(spec, n=100, rng=rng).points
            assert len(pts) == 100
            assert np.all(CLUTTER_WINDOW.contains(pts))
            nn = nearest_neighbor_distances(pts)
            means.append(nn.mean())
            mins.append(nn.min())
        nn_mean[code], min_dist[code] = np.array(means), np.array(mins)
    elapsed = time.perf_counter() - t0
    pvals = {
        "HC>S": _welch_greater(nn_mean["HC"], nn_mean["S"]),
        "S>CSR": _welch_greater(nn_mean["S"], nn_mean["CSR"]),
        "CSR>T": _welch_greater(nn_mean["CSR"], nn_mean["T"]),
        "CSR>M": _welch_greater(nn_mean["CSR"], nn_mean["M"]),
    }
    means = " ".join(f"{c}={nn_mean[c].mean():.2f}" for c in ("HC", "S", "CSR", "T", "M"))
    violations = int(np.sum(min_dist["S"] < 5.0))
    note(request, f"mean NN {means}; min pair distance HC={min_dist['HC'].min():.2f} "
                  f"S={min_dist['S'].min():.2f} ({violations}/200 Strauss patterns below 5); {elapsed:.0f}s")
    assert all(p < 0.01 for p in pvals.values()), pvals
    assert min_dist["HC"].min() >= 5.0
    assert elapsed < 600
    # Strauss with gamma = 0.5 only penalises close pairs; checked literally
    s_min = float(min_dist["S"].min())
    assert s_min >= 5.0, f"Strauss(gamma=0.5) closest pair {s_min:.2f} < 5 in {violations}/200 patterns"


def _jobs():
    return max(1, min(8, os.cpu_count() or 1))


@pytest.mark.criterion(6)
def test_clutter_regularity_ordering(request):
    cfg = ExperimentConfig(combos=all_combos(["CSR", "IP", "M", "T", "HC", "S"], ["P"], [20]),
                           replications=100, root_seed=6)
    t0 = time.perf_counter()
    records = run(cfg, jobs=_jobs())
    elapsed = time.perf_counter() - t0
    rows = summarize([dict(clutter_type=r.combo.clutter_name, length=r.traversal_length) for r in records],
                     "clutter_type")
    by = {r.group: r for r in rows}
    ci = {k: ci95(v) for k, v in by.items()}
    table = " ".join(f"{k}={by[k].mean:.2f}" + (f"(ref {REFERENCE_P20[k]:.2f})" if k in REFERENCE_P20 else "")
                     for k in ("HC", "S", "CSR", "IP", "T", "M"))
    off = [k for k in REFERENCE_P20 if abs(by[k].mean - REFERENCE_P20[k]) > 8]
    note(request, f"{table}; beyond 8 units of reference: {off or 'none'}; {elapsed:.0f}s")
    assert all(by[k].n == 100 for k in by)
    # nonoverlapping 95% intervals: HC above S and CSR, which sit above T and M
    for hi, lo in [("HC", "S"), ("HC", "CSR"), ("S", "T"), ("S", "M"), ("CSR", "T"), ("CSR", "M")]:
        assert ci[hi][0] > ci[lo][1], (hi, lo, ci[hi], ci[lo])
    assert by["HC"].mean - by["T"].mean >= 10


@pytest.mark.criterion(7)
def test_concave_down_profile(request):
    counts = [20, 30, 40, 50, 60]
    cfg = ExperimentConfig(combos=all_combos(["CSR"], ["V80"], counts), replications=100, root_seed=7)
    t0 = time.perf_counter()
    records = run(cfg, jobs=_jobs())
    elapsed = time.perf_counter() - t0
    rows = summarize([dict(n_obstacles=r.combo.n_obstacles, length=r.traversal_length) for r in records],
                     "n_obstacles")
    means = [r.mean for r in rows]
    kind = trend_check(means, pooled_se(rows))
    peak = counts[int(np.argmax(means))]
    note(request, "means " + " ".join(f"{c}:{m:.2f}" for c, m in zip(counts, means))
         + f"; pooled SE {pooled_se(rows):.2f}; trend={kind} peak={peak}; {elapsed:.0f}s")
    assert [r.group for r in rows] == counts
    assert kind == "concave_down"
    assert peak in (40, 50)


@pytest.mark.criterion(8)
def test_statistics_oracles(request):
    t0 = time.perf_counter()
    t = oneway_anova(GroupedSample([("a", [1, 2, 3]), ("b", [2, 3, 4]), ("c", [3, 4, 5])]))
    q = studentized_range_ppf(0.95, 3, 6)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        groups = [(k, rng.normal(k, 5, rng.integers(2, 40))) for k in range(int(rng.integers(2, 9)))]
        tab = oneway_anova(GroupedSample(groups))
        worst = max(worst, abs(tab["Between"].ss + tab["Residual"].ss - tab["Total"].ss) / tab["Total"].ss)
    elapsed = time.perf_counter() - t0
    note(request, f"F={t['Between'].f!r} q(0.05;3,6)={q:.4f} SS identity rel err={worst:.1e}; {elapsed:.2f}s")
    assert t["Between"].f == 3.0 and t["Between"].ss == 6.0 and t["Residual"].ms == 1.0
    assert (t["Between"].df, t["Residual"].df) == (2, 6)
    assert abs(q - 4.339) <= 1e-2
    assert worst <= 1e-9
    assert elapsed < 1.0


@pytest.mark.criterion(9)
def test_replay_and_parallel_reproducibility(request, tmp_path):
    cfg = ExperimentConfig(combos=all_combos(["CSR", "HC", "T"], ["P", "V80", "W60"], [20, 50]),
                           replications=4, root_seed=9)
    t0 = time.perf_counter()
    serial = run(cfg, jobs=1, out=tmp_path / "j1.csv")
    parallel = run(cfg, jobs=8, out=tmp_path / "j8.csv")
    rows1 = set((tmp_path / "j1.csv").read_text().splitlines())
    rows8 = set((tmp_path / "j8.csv").read_text().splitlines())
    mismatches = 0
    for rec in serial:
        res = replay(rec, cfg)
        mismatches += (res.total_length != rec.traversal_length
                       or res.n_disambiguations != rec.n_disambiguations)
    elapsed = time.perf_counter() - t0
    note(request, f"{len(serial)} records; replay mismatches={mismatches}; jobs 8 vs 1 rows equal={rows1 == rows8}; "
                  f"{elapsed:.0f}s")
    assert serial == parallel
    assert rows1 == rows8
    assert mismatches == 0
    assert elapsed < 300
    assert math.isfinite(sum(r.traversal_length for r in serial))
