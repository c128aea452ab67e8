"""
Trace Logger Utility
Batched CSV writer for convergence traces
"""
import csv
import logging
import math
import threading
from collections import deque
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from src.errors import InvalidConfig


class TraceLogger:
    """
    Batched trace writer with a fixed header

    Rows are buffered and appended to the CSV file every `batch_size` rows and
    on flush()/close(). The first column must be nondecreasing.
    """

    def __init__(self, path: Union[str, Path], columns: Sequence[str], batch_size: int = 100):
        """
        Initialize trace logger

        Args:
            path: Output CSV file (truncated)
            columns: Header row; every logged row must use exactly these keys
            batch_size: Rows buffered before an automatic flush
        """
        if not columns:
            raise InvalidConfig("trace needs at least one column")
        self.path = Path(path)
        self.columns = list(columns)
        self.batch_size = max(1, int(batch_size))
        self.logger = logging.getLogger(self.__class__.__name__)

        self.buffer = deque()
        self.buffer_lock = threading.Lock()
        self.rows_written = 0
        self.last_key: Optional[float] = None
        self.closed = False

        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, 'w', newline='', encoding='utf-8') as f:
            csv.writer(f, lineterminator='\n').writerow(self.columns)
        self.logger.debug(f"Trace {self.path} opened with columns {self.columns}")

    def log(self, row: Dict[str, object]):
        """Buffer one row (missing values are written empty)"""
        if self.closed:
            raise ValueError(f"trace {self.path} already closed")
        extra = set(row) - set(self.columns)
        if extra:
            raise InvalidConfig(f"unknown trace columns {sorted(extra)}")

        key = row.get(self.columns[0])
        if key is not None and self.last_key is not None and key < self.last_key:
            raise ValueError(f"trace column {self.columns[0]} went backwards: {key} < {self.last_key}")
        if key is not None:
            self.last_key = key

        with self.buffer_lock:
            self.buffer.append([_format(row.get(c)) for c in self.columns])
            should_flush = len(self.buffer) >= self.batch_size
        if should_flush:
            self._flush()

    def log_many(self, rows: Iterable[Dict[str, object]]):
        for row in rows:
            self.log(row)

    def __call__(self, row: Dict[str, object]):
        self.log(row)

    def _flush(self):
        """Append buffered rows to the file"""
        with self.buffer_lock:
            if not self.buffer:
                return
            rows: List[List[str]] = list(self.buffer)
            self.buffer.clear()
            with open(self.path, 'a', newline='', encoding='utf-8') as f:
                csv.writer(f, lineterminator='\n').writerows(rows)
            self.rows_written += len(rows)

    def flush(self):
        """Force flush of all buffered rows"""
        self._flush()

    def close(self):
        """Flush remaining rows"""
        if not self.closed:
            self._flush()
            self.closed = True
            self.logger.info(f"Trace {self.path}: {self.rows_written} rows")

    def __enter__(self) -> 'TraceLogger':
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False


def _format(value: object) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ''
    return str(value)


# Singleton instance for convenient access
_default_trace: Optional[TraceLogger] = None


def get_trace_logger(path: Optional[Union[str, Path]] = None,
                     columns: Optional[Sequence[str]] = None,
                     **kwargs) -> TraceLogger:
    """
    Get or create the default trace logger

    Args:
        path: Output CSV file (required on first call)
        columns: Header row (required on first call)
        **kwargs: Additional TraceLogger constructor arguments

    Returns:
        TraceLogger instance
    """
    global _default_trace

    if _default_trace is None:
        if path is None or columns is None:
            raise InvalidConfig("first get_trace_logger() call needs path and columns")
        _default_trace = TraceLogger(path, columns, **kwargs)

    return _default_trace


def close_trace_logger():
    """Close default trace logger"""
    global _default_trace

    if _default_trace:
        _default_trace.close()
        _default_trace = None
