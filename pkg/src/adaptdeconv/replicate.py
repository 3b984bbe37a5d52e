"""Deterministic Monte Carlo replication.

Each replicate gets its own generator spawned from one seed, so results do
not depend on the number of worker threads or on scheduling order.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def spawn_generators(seed, reps):
    """``reps`` independent generators derived from ``seed``.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if isinstance(seed, np.random.Generator):
        return seed.spawn(reps)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(reps)]


def run_replicates(fn, seed, reps, threads=1):
    """``[fn(rng_i, i) for i in range(reps)]`` evaluated on ``threads`` workers.

    numpy releases the GIL in the heavy kernels, so threads give real speedup
    for the Fourier-domain statistics.  Output order is the replicate order.
    """
    rngs = spawn_generators(seed, reps)
    if threads <= 1:
        return [fn(rng, i) for i, rng in enumerate(rngs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, rngs, range(reps)))
