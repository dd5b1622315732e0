"""test_launcher.py - bounded parallel sweeps"""

import threading
import time

import pytest

from continuum_stability.errors import DomainError
from continuum_stability.launcher import SweepLauncher


def square(x):
    return x * x


def test_sequential_results_in_order():
    launcher = SweepLauncher()
    for x in range(5):
        launcher.add_job(f"x={x}", square, x=x)
    results = launcher.run_all_sequential()
    assert [r["result"] for r in results] == [0, 1, 4, 9, 16]
    assert all(r["success"] for r in results)


def test_parallel_results_ordered_and_capped():
    active = []
    peak = []
    lock = threading.Lock()

    def slow(x):
        with lock:
            active.append(x)
            peak.append(len(active))
        time.sleep(0.02)
        with lock:
            active.remove(x)
        return -x

    launcher = SweepLauncher(threads=3)
    for x in range(10):
        launcher.add_job(f"x={x}", slow, x=x)
    results = launcher.run_all_parallel()
    assert [r["index"] for r in results] == list(range(10))
    assert [r["result"] for r in results] == [-x for x in range(10)]
    assert max(peak) <= 3


def test_analysis_errors_are_recorded():
    def fail(x):
        raise DomainError(f"bad point {x}")

    launcher = SweepLauncher(threads=2)
    launcher.add_job("ok", square, x=2)
    launcher.add_job("bad", fail, x=1)
    results = launcher.run_all()
    assert results[0]["success"] and results[0]["result"] == 4
    assert not results[1]["success"]
    assert "DomainError" in results[1]["error"]


def test_thread_count_validated():
    with pytest.raises(ValueError):
        SweepLauncher(threads=0)
