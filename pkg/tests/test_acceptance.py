"""Exit criteria.  Each test is tagged with its criterion number; the run
prints one PASS/FAIL line per criterion in the terminal summary."""
import os
import random
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grademiner.advisor import BELOW_B, GradeMap, band_distribution, gpa_to_letter, recommend
from grademiner.dtree import TrainingView, build_tree, classify, entropy, information_gain, Leaf
from grademiner.kmeans import KMeansConfig, assign_points, fit, fit_best, recompute_centroids
from grademiner.records import ATTRIBUTES, Band, BandSpec, CategoricalRecord, discretize, gpa_to_band
from grademiner.report import PipelineConfig, run_pipeline

from oracles import (
    TABLE1_BAND_COUNTS,
    TABLE1_BANDS,
    TABLE1_ROWS,
    argmax_first,
    consistent,
    entropy_direct,
    exact_1d_optimum,
    gain_direct,
    table1_categorical,
)

C1 = "band_distribution reproduces the five-class GPA percentages"
C2 = "band_distribution reproduces the High/Medium/Low percentages"
C3 = "fixture banding gives High 10 / Medium 9 / Low 1"
C4 = "best-of-10 Lloyd SSE within 1% of the exact 1-D optimum, < 1 s"
C5 = "k-means properties on 200 random 1-D/2-D instances"
C6 = "entropy/gain match the direct-formula oracle; root is the oracle argmax"
C7 = "tree reproduces all training labels on consistent data"
C8 = "effort recommendations are verbatim and monotone"
C9 = "run is byte-identical across invocations and thread counts, < 1 s"


# 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1, C1)
def test_c1_five_class_percentages():
    t0 = time.perf_counter()
    t = band_distribution([("1", 5), ("2", 10), ("3", 17), ("4", 15), ("5", 13)])
    assert t.percentages == (8.33, 16.67, 28.33, 25.00, 21.67)
    assert [f"{r.percentage:.2f}" for r in t.rows] == ["8.33", "16.67", "28.33", "25.00", "21.67"]
    assert time.perf_counter() - t0 < 0.1


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2, C2)
def test_c2_band_percentages():
    t = band_distribution([("High", 28), ("Medium", 27), ("Low", 5)])
    assert [f"{r.percentage:.2f}" for r in t.rows] == ["46.67", "45.00", "8.33"]


# 3 ---------------------------------------------------------------------------

@pytest.mark.criterion(3, C3)
def test_c3_fixture_banding(table1):
    # the hand-count oracle is itself a frozen per-row table
    assert {b: list(TABLE1_BANDS.values()).count(b) for b in TABLE1_BAND_COUNTS} == TABLE1_BAND_COUNTS
    got = {r.roll: gpa_to_band(r.gpa, BandSpec()).value for r in table1.records}
    assert got == TABLE1_BANDS
    counts = {b: list(got.values()).count(b) for b in ("High", "Medium", "Low")}
    assert counts == {"High": 10, "Medium": 9, "Low": 1}


# 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4, C4)
def test_c4_kmeans_optimality():
    gpas = [r[1] for r in TABLE1_ROWS]
    exact, n_partitions = exact_1d_optimum(gpas, 3)
    assert n_partitions == 171
    t0 = time.perf_counter()
    best = fit_best(gpas, KMeansConfig(k=3, seed=0), n_init=10)
    elapsed = time.perf_counter() - t0
    assert best.sse <= float(exact) * 1.01
    assert elapsed < 1.0


# 5 ---------------------------------------------------------------------------

def _instances():
    rng = np.random.default_rng(20240501)
    out = []
    for i in range(200):
        d = 1 if i < 100 else 2
        n = int(rng.integers(2, 51))
        pts = rng.normal(0, 5, (n, d))
        if i % 4 == 0:
            # duplicates and a coarse grid exercise ties and empty clusters
            pts = np.round(pts)
        k = int(rng.integers(1, 6))
        k = min(k, len(np.unique(pts, axis=0)))
        out.append((pts, k, int(rng.integers(0, 2**31))))
    return out


@pytest.mark.criterion(5, C5)
def test_c5_kmeans_properties():
    instances = _instances()
    assert len(instances) == 200
    assert {p.shape[1] for p, _, _ in instances} == {1, 2}
    assert max(len(p) for p, _, _ in instances) <= 50
    n_converged = 0
    for pts, k, seed in instances:
        m = fit(pts, KMeansConfig(k=k, seed=seed))
        trace = m.sse_trace
        assert all(b <= a + 1e-12 * max(1.0, a) for a, b in zip(trace, trace[1:]))
        if not m.converged:
            continue
        n_converged += 1
        again = assign_points(pts, recompute_centroids(pts, m.assignment, k))
        assert np.array_equal(again, m.assignment)
        for c in range(k):
            members = pts[m.assignment == c]
            if len(members):
                assert np.all(np.abs(m.centroids[c] - members.mean(axis=0)) <= 1e-12)
    assert n_converged == 200


# 6 ---------------------------------------------------------------------------

def _random_rows(rng):
    n_attr = rng.randint(1, 3)
    names = [f"a{i}" for i in range(n_attr)]
    vocab = {a: [f"v{j}" for j in range(rng.randint(1, 3))] for a in names}
    rows = []
    for _ in range(rng.randint(1, 12)):
        rows.append(({a: rng.choice(vocab[a]) for a in names}, rng.choice(["High", "Medium", "Low"])))
    return rows


def _view(rows):
    recs = tuple(CategoricalRecord(i + 1, a, Band(c)) for i, (a, c) in enumerate(rows))
    return TrainingView(recs, tuple(rows[0][0]))


def _check_gain_instance(rows, view):
    labels = [c for _, c in rows]
    counts = {b: labels.count(b) for b in ("High", "Medium", "Low")}
    assert abs(entropy(counts) - entropy_direct(labels)) <= 1e-9
    gains = []
    for a in view.attributes:
        g_oracle = gain_direct(rows, a)
        assert abs(information_gain(view, a) - g_oracle) <= 1e-9
        gains.append(g_oracle)
    tree = build_tree(view)
    best = argmax_first(gains)
    if len(set(labels)) == 1 or (gains[best] <= 1e-12 and not consistent(rows)):
        assert isinstance(tree, Leaf)
    else:
        assert tree.attribute == view.attributes[best]


@pytest.mark.criterion(6, C6)
def test_c6_gain_oracle(table1):
    fixture_rows = table1_categorical()
    _check_gain_instance(fixture_rows, TrainingView(tuple(discretize(table1)), ATTRIBUTES))
    rng = random.Random(6)
    for _ in range(500):
        rows = _random_rows(rng)
        _check_gain_instance(rows, _view(rows))


# 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7, C7)
def test_c7_training_consistency(table1):
    rows = table1_categorical()
    assert consistent(rows)
    cat = discretize(table1)
    tree = build_tree(TrainingView(tuple(cat), ATTRIBUTES))
    assert all(classify(tree, c) == c.class_label for c in cat)

    rng = random.Random(7)
    checked = 0
    while checked < 300:
        rows = _random_rows(random.Random(rng.random()))
        if not consistent(rows):
            continue
        view = _view(rows)
        tree = build_tree(view)
        assert all(classify(tree, r) == r.class_label for r in view.records)
        checked += 1


# 8 ---------------------------------------------------------------------------

EFFORT_STEPS = {
    "S-01": "He/She is a good student. Need not to take special care.",
    "S-02": "Is not so good. Need to take care of CT & Quiz.",
    "S-03": "Is a medium student. Should take care of CT,quiz and lab performance also.",
    "S-04": "Is a lower standard student. Need lot of practice of his/her lesson and also take care "
            "of all the courses ct,lab,quiz ,attendance carefully.",
}


@pytest.mark.criterion(8, C8)
@pytest.mark.parametrize("letter, step", [("A+", "S-01"), ("A", "S-02"), ("A-", "S-02"),
                                          ("B+", "S-03"), ("B", "S-03"), (BELOW_B, "S-04")])
def test_c8_verbatim(letter, step):
    r = recommend(letter)
    assert (r.step_id, r.text) == (step, EFFORT_STEPS[step])


@pytest.mark.criterion(8, C8)
@given(st.floats(0, 4), st.floats(0, 4))
def test_c8_monotone_steps(a, b):
    lo, hi = sorted((a, b))
    gm = GradeMap()
    assert recommend(gpa_to_letter(hi, gm)).step_id <= recommend(gpa_to_letter(lo, gm)).step_id


# 9 ---------------------------------------------------------------------------

@pytest.mark.criterion(9, C9)
def test_c9_determinism(table1_path, tmp_path):
    def run(tag):
        cfg = PipelineConfig(input_path=str(table1_path), output_dir=str(tmp_path / tag),
                             kmeans=KMeansConfig(k=3, seed=42))
        t0 = time.perf_counter()
        run_pipeline(cfg)
        return time.perf_counter() - t0, (tmp_path / tag / "report.json").read_bytes()

    t_a, a = run("a")
    t_b, b = run("b")
    assert a == b
    assert max(t_a, t_b) < 1.0

    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(run, [f"t{i}" for i in range(8)]))
    assert all(out == a for _, out in results)

    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, OMP_NUM_THREADS=threads, OPENBLAS_NUM_THREADS=threads,
                   MKL_NUM_THREADS=threads, NUMBA_NUM_THREADS="1" if threads == "1" else str(os.cpu_count()))
        d = tmp_path / f"proc{threads}"
        proc = subprocess.run(
            [sys.executable, "-m", "grademiner.cli", "run", "--input", str(table1_path),
             "--seed", "42", "--out", str(d)],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append((d / "report.json").read_bytes())
    assert outs[0] == outs[1] == a
