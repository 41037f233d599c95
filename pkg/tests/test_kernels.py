import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from grademiner import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba path disabled")

floats = st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False)


@st.composite
def problem(draw):
    n = draw(st.integers(1, 40))
    d = draw(st.integers(1, 3))
    k = draw(st.integers(1, 5))
    pts = draw(arrays(np.float64, (n, d), elements=floats))
    cents = draw(arrays(np.float64, (k, d), elements=floats))
    a = draw(arrays(np.int64, n, elements=st.integers(0, k - 1)))
    return pts, cents, a, k


@needs_numba
@given(problem())
def test_paths_agree(prob):
    pts, cents, a, k = prob
    np.testing.assert_array_equal(_kernels.assign_numba(pts, cents), _kernels.assign_numpy(pts, cents))
    s1, c1 = _kernels.cluster_sums_numba(pts, a, k)
    s2, c2 = _kernels.cluster_sums_numpy(pts, a, k)
    np.testing.assert_array_equal(c1, c2)
    np.testing.assert_array_equal(s1, s2)
    np.testing.assert_array_equal(
        _kernels.point_sq_dist_numba(pts, cents, a), _kernels.point_sq_dist_numpy(pts, cents, a)
    )
    assert float(_kernels.sse_numba(pts, cents, a)) == _kernels.sse_numpy(pts, cents, a)


@needs_numba
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2)), min_size=1, max_size=50))
def test_contingency_agree(pairs):
    v = np.array([p[0] for p in pairs], dtype=np.int64)
    c = np.array([p[1] for p in pairs], dtype=np.int64)
    np.testing.assert_array_equal(_kernels.contingency_numba(v, c, 4, 3), _kernels.contingency_numpy(v, c, 4, 3))


def test_ties_lowest_index_numpy():
    pts = np.array([[2.0]])
    assert _kernels.assign_numpy(pts, np.array([[1.0], [3.0]]))[0] == 0


def test_env_flag_selects_numpy(table1_path, tmp_path):
    code = "from grademiner import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, GRADEMINER_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "numpy"


def test_backends_give_identical_report(table1_path, tmp_path):
    outs = []
    for flag in ("0", "1"):
        d = tmp_path / flag
        env = dict(os.environ, GRADEMINER_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, "-m", "grademiner.cli", "run", "--input", str(table1_path), "--out", str(d)],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append((d / "report.json").read_bytes())
    assert outs[0] == outs[1]
