import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..epr.ensemble import EnsembleRun, simulate_ensemble
from ..errors import ConfigurationError
from ..families.manifest import model_from_manifest, model_manifest


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExecutionPlan:
    """Contiguous replica ranges, one per worker, in replica order."""

    n: int
    workers: int
    chunks: tuple

    def stream_ids(self, offset=0):
        return [np.arange(start, stop) + offset for start, stop in self.chunks]

    def to_dict(self):
        return {"n": self.n, "workers": self.workers, "chunks": [list(c) for c in self.chunks]}


def replica_scheduler(n, workers=1):
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigurationError("must be >= 1", field="replicas")
    if workers < 1:
        raise ConfigurationError("must be >= 1", field="workers")
    workers = min(workers, n)
    bounds = np.linspace(0, n, workers + 1).round().astype(int)
    chunks = tuple((int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a)
    return ExecutionPlan(n=n, workers=len(chunks), chunks=chunks)


def _run_chunk(manifest, law, settings, stream_ids):
    return simulate_ensemble(model_from_manifest(manifest), law, settings, stream_ids)


def run_ensemble(model, law, settings, stream_ids, workers=1):
    """simulate_ensemble spread over a process pool.

    Workers rebuild the model from its manifest; the batches are merged back in
    replica order, so the result does not depend on ``workers``.
    """
    stream_ids = np.asarray(stream_ids)
    plan = replica_scheduler(int(stream_ids.shape[0]), workers)
    if plan.workers == 1:
        return simulate_ensemble(model, law, settings, stream_ids)

    manifest = model_manifest(model)
    batches = [stream_ids[start:stop] for start, stop in plan.chunks]
    logger.info("running %d replicas on %d workers", plan.n, plan.workers)
    with ProcessPoolExecutor(max_workers=plan.workers) as pool:
        futures = [pool.submit(_run_chunk, manifest, law, settings, batch) for batch in batches]
        runs = [future.result() for future in futures]
    return EnsembleRun.concat(runs)


def ensemble_runner(workers):
    """A ``run_ensemble(model, law, settings, stream_ids)`` callable bound to a worker count."""

    def run(model, law, settings, stream_ids):
        return run_ensemble(model, law, settings, stream_ids, workers)

    return run
