"""Process-pool fan-out for experiment trials."""

import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence, TypeVar

from pydantic import BaseModel, Field

from flblab.config import settings

logger = logging.getLogger(__name__)

TaskT = TypeVar("TaskT")
ResultT = TypeVar("ResultT")


class ExperimentResult(BaseModel):
    """What an experiment produced and whether it found violations."""

    name: str
    rows: int = 0
    violations: int = Field(0, description="Capacity, certificate or bound violations")
    files: list[Path] = Field(default_factory=list)


class TrialRunner:
    """Runs independent trials, in a process pool when more than one worker is set.

    Results always come back in submission order so output files do not depend
    on scheduling.
    """

    def __init__(self, workers: Optional[int] = None) -> None:
        self.workers = settings.workers if workers is None else workers
        self._pool: Optional[Executor] = None

    def start(self) -> None:
        if self._pool is not None:
            logger.warning("Trial runner already started")
            return
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
            logger.info("Trial runner started with %d workers", self.workers)

    def shutdown(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None
            logger.info("Trial runner stopped")

    def __enter__(self) -> "TrialRunner":
        self.start()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.shutdown()

    def map(
        self, fn: Callable[[TaskT], ResultT], tasks: Sequence[TaskT]
    ) -> list[ResultT]:
        if self._pool is None:
            return [fn(task) for task in tasks]
        futures = [self._pool.submit(fn, task) for task in tasks]
        return [future.result() for future in futures]
