"""
Worker pool for independent trajectories and restarts

Results always come back in submission order so reductions stay deterministic
regardless of how many threads run them.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar('T')
R = TypeVar('R')


class WorkerPool:
    """Thread pool with an order-preserving map; runs inline with one worker"""

    def __init__(self, max_workers: Optional[int] = 1):
        """
        Initialize worker pool

        Args:
            max_workers: Number of threads; None or values below 2 run inline
        """
        self.logger = logging.getLogger(__name__)
        self.max_workers = max(1, int(max_workers or 1))
        self.executor: Optional[ThreadPoolExecutor] = None

        if self.max_workers > 1:
            try:
                self.executor = ThreadPoolExecutor(max_workers=self.max_workers,
                                                   thread_name_prefix='rankwalk')
                self.logger.info(f"✅ Worker pool initialized ({self.max_workers} threads)")
            except Exception as e:
                self.logger.error(f"❌ Failed to initialize worker pool: {e}")
                raise

    def map_ordered(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply func to every item; results are returned in item order"""
        items = list(items)
        if self.executor is None:
            return [func(item) for item in items]

        futures = [self.executor.submit(func, item) for item in items]
        return [future.result() for future in futures]

    def close(self):
        """Shut the pool down, waiting for running tasks"""
        if self.executor is not None:
            try:
                self.executor.shutdown(wait=True)
                self.logger.info("Worker pool closed")
            except Exception as e:
                self.logger.error(f"Error closing worker pool: {e}")
            self.executor = None

    def __enter__(self) -> 'WorkerPool':
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False


def chunked(count: int, chunk_size: int) -> List[range]:
    """Split range(count) into consecutive ranges of at most chunk_size"""
    chunk_size = max(1, int(chunk_size))
    return [range(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]
