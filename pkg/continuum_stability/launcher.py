"""
Sweep Launcher - run one analysis over many (k, eta) points
Jobs run on at most `threads` worker threads; results come back in job order.
"""

import queue
import threading
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

from .errors import AnalysisError


class SweepJob:
    """One point of a sweep: a callable and the keyword parameters it runs with."""

    def __init__(self, index: int, label: str, func: Callable[..., Any], params: Optional[Dict[str, Any]] = None):
        self.index = index
        self.label = label
        self.func = func
        self.params = params or {}

    def run(self) -> Any:
        return self.func(**self.params)


class SweepLauncher:
    """Manages the jobs of a sweep."""

    def __init__(self, threads: int = 1, verbose: bool = False):
        if threads < 1:
            raise ValueError(f"threads must be a positive integer, got {threads}")
        self.threads = threads
        self.verbose = verbose
        self.instances: List[SweepJob] = []

    def add_job(self, label: str, func: Callable[..., Any], **params) -> SweepJob:
        """Add a sweep point to the queue."""
        job = SweepJob(len(self.instances), label, func, params)
        self.instances.append(job)
        return job

    def run_instance(self, job: SweepJob, result_queue: queue.Queue):
        """Run a single sweep point; analysis failures are recorded, not raised."""
        try:
            if self.verbose:
                print(f"🔍 [{job.index}] {job.label}")
            result_queue.put(
                {
                    "index": job.index,
                    "label": job.label,
                    "params": job.params,
                    "success": True,
                    "result": job.run(),
                    "timestamp": datetime.now().isoformat(),
                }
            )
        except AnalysisError as e:
            result_queue.put(
                {
                    "index": job.index,
                    "label": job.label,
                    "params": job.params,
                    "success": False,
                    "error": f"{type(e).__name__}: {e}",
                    "timestamp": datetime.now().isoformat(),
                }
            )

    def _worker(self, jobs: queue.Queue, result_queue: queue.Queue):
        while True:
            try:
                job = jobs.get_nowait()
            except queue.Empty:
                return
            self.run_instance(job, result_queue)

    def run_all_parallel(self) -> List[Dict[str, Any]]:
        """Run all sweep points on up to `threads` workers."""
        jobs: queue.Queue = queue.Queue()
        for job in self.instances:
            jobs.put(job)
        result_queue: queue.Queue = queue.Queue()
        workers = min(self.threads, len(self.instances))

        if self.verbose:
            print(f"\n{'=' * 60}")
            print(f"🔍 Running {len(self.instances)} sweep points on {workers} threads")
            print(f"{'=' * 60}\n")

        threads = [threading.Thread(target=self._worker, args=(jobs, result_queue)) for _ in range(workers)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        results = []
        while not result_queue.empty():
            results.append(result_queue.get())
        return sorted(results, key=lambda r: r["index"])

    def run_all_sequential(self) -> List[Dict[str, Any]]:
        """Run all sweep points one after the other."""
        results = []
        result_queue: queue.Queue = queue.Queue()

        if self.verbose:
            print(f"\n{'=' * 60}")
            print(f"🔍 Running {len(self.instances)} sweep points sequentially")
            print(f"{'=' * 60}\n")

        for job in self.instances:
            self.run_instance(job, result_queue)
            results.append(result_queue.get())
        return results

    def run_all(self) -> List[Dict[str, Any]]:
        if self.threads > 1 and len(self.instances) > 1:
            return self.run_all_parallel()
        return self.run_all_sequential()
