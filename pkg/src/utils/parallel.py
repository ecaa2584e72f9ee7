from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

import numpy as np

from src.utils.settings import load_settings

T = TypeVar("T")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit thread count, or the VORTEX_THREADS / config.yaml cap."""
    if threads is None:
        return load_settings().threads
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    return int(threads)


def map_row_chunks(func: Callable[[slice], T], n_rows: int, threads: Optional[int] = None) -> List[T]:
    """
    Apply func to contiguous row slices covering range(n_rows).

    Results come back in row order whatever the thread count, so callers can
    concatenate them deterministically.
    """
    threads = resolve_threads(threads)
    bounds = np.linspace(0, n_rows, min(threads, max(n_rows, 1)) + 1).astype(int)
    chunks = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if threads == 1 or len(chunks) == 1:
        return [func(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, chunks))
