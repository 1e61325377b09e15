"""Per-trial random substreams and the trial runner.

Every trial draws from its own generator keyed by (seed, stream name, trial
index), so results never depend on how trials are split across workers.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, List, Sequence

import numpy as np


def stream_key(stream: str) -> int:
    return zlib.crc32(stream.encode("utf-8"))


def trial_rng(seed: int, stream: str, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream_key(stream), int(trial)]))


def _run_chunk(fn: Callable, seed: int, stream: str, trials: Sequence[int]) -> list:
    return [fn(trial_rng(seed, stream, t)) for t in trials]


def run_trials(fn: Callable[[np.random.Generator], object], trials: int, seed: int = 0,
               stream: str = "default", workers: int = 1) -> List[object]:
    """Evaluate ``fn(rng)`` for each trial index, returned in trial order.

    ``fn`` must be picklable when ``workers > 1`` (module-level function or
    ``functools.partial`` of one).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    indices = list(range(trials))
    if workers <= 1 or trials == 1:
        return _run_chunk(fn, seed, stream, indices)
    chunks = [indices[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    out: List[object] = [None] * trials
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        results = pool.map(partial(_run_chunk, fn, seed, stream), chunks)
        for chunk, res in zip(chunks, results):
            for t, r in zip(chunk, res):
                out[t] = r
    return out
