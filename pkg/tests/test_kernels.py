import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hedscore import _numpy_kernels as npk

nbk = pytest.importorskip("hedscore._numba_kernels")


def test_neumaier_matches_fsum(rng):
    for size in (0, 1, 7, 1000, 100_000):
        x = rng.normal(size=size) * 10.0 ** rng.integers(-8, 8, size=size)
        ref = math.fsum(x)
        assert npk.neumaier_sum(x) == ref
        assert abs(nbk.neumaier_sum(x) - ref) <= 1e-15 * max(1.0, np.abs(x).sum())


def test_neumaier_cancellation():
    x = np.array([1.0, 1e100, 1.0, -1e100])
    assert npk.neumaier_sum(x) == 2.0
    assert nbk.neumaier_sum(x) == 2.0


def test_block_batch_backends_agree(rng):
    post = rng.uniform(size=151)
    starts = rng.integers(0, 147, size=(300, 31))
    disc = np.exp(-0.14 * np.arange(151))
    a = npk.block_hed_batch(post, starts, 5, 0.3, disc, 150.0)
    b = nbk.block_hed_batch(post, starts, 5, 0.3, disc, 150.0)
    assert np.max(np.abs(a - b)) <= 1e-15


def test_block_batch_matches_direct(rng):
    post = rng.uniform(size=40)
    starts = rng.integers(0, 37, size=(20, 10))
    disc = np.exp(-0.2 * np.arange(40))
    out = nbk.block_hed_batch(post, starts, 4, 0.25, disc, 39.0)
    for i in range(20):
        idx = (starts[i][:, None] + np.arange(4)).ravel()[:40]
        lift = np.maximum(post[idx] - 0.25, 0.0)
        assert out[i] == pytest.approx(math.fsum(lift * disc) / 39.0, abs=1e-16)


def test_slds_filter_backends_agree(rng):
    y = rng.normal(1.0, 2.0, size=400)
    lt = np.log(np.array([[0.9, 0.1], [0.05, 0.95]]))
    args = (y, lt, np.array([0.0, 3.0]), np.array([1.0, 2.0]), np.log(np.array([0.5, 0.5])))
    pa, sa = npk.slds_filter(*args)
    pb, sb = nbk.slds_filter(*args)
    assert sa == sb == -1
    assert np.max(np.abs(pa - pb)) <= 1e-13


def test_slds_filter_status_on_underflow():
    lt = np.log(np.full((2, 2), 0.5))
    args = (np.array([0.0, 0.5, 1e200]), lt, np.array([0.0, 1.0]), np.ones(2), np.log(np.full(2, 0.5)))
    assert npk.slds_filter(*args)[1] == 2
    assert nbk.slds_filter(*args)[1] == 2


def test_ewma_backends_agree(rng):
    x = rng.normal(size=500) ** 2
    a = npk.ewma(x, 0.1, 1.0)
    b = nbk.ewma(x, 0.1, 1.0)
    assert np.max(np.abs(a - b)) <= 1e-13
    ref = [1.0]
    for v in x:
        ref.append((1 - 0.1) * ref[-1] + 0.1 * v)
    assert np.allclose(b, ref[1:], rtol=0, atol=1e-12)


def test_linear_recursion_backends_agree(rng):
    d = rng.normal(size=300)
    a = npk.linear_recursion(d, 0.7, 0.5)
    b = nbk.linear_recursion(d, 0.7, 0.5)
    assert a.size == 301 and a[0] == 0.5
    assert np.max(np.abs(a - b)) <= 1e-13


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba"), ("", "numba")])
def test_backend_flag(flag, expected):
    env = dict(os.environ, HEDSCORE_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "import hedscore; print(hedscore.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


def test_benchmark_runs():
    script = os.path.join(os.path.dirname(__file__), os.pardir, "benchmarks", "bench_kernels.py")
    out = subprocess.run(
        [sys.executable, script, "--horizon", "64", "--resamples", "20", "--repeats", "1"],
        capture_output=True, text=True, check=True,
    )
    assert "block_hed_batch" in out.stdout and "speedup" in out.stdout
