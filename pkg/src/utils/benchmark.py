import logging
import os
import time
from functools import wraps
from typing import Any, Callable, Dict, List, Tuple

import pandas as pd
import psutil

logger = logging.getLogger(__name__)


def measure_performance(func: Callable) -> Callable:
    """
    Decorator to measure the performance of a pipeline stage.
    Measures wall time and resident memory growth.

    Args:
        func: The function to measure

    Returns:
        Wrapped function returning (result, metrics)
    """
    @wraps(func)
    def wrapper(*args, **kwargs) -> Tuple[Any, Dict[str, float]]:
        process = psutil.Process(os.getpid())
        mem_before = process.memory_info().rss / 1024 / 1024  # MB

        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        execution_time = time.perf_counter() - start_time

        mem_used = process.memory_info().rss / 1024 / 1024 - mem_before
        metrics = {"execution_time": execution_time, "memory_used_mb": mem_used}
        return result, metrics

    return wrapper


class StageBenchmark:
    """
    Collects timings of the stages of one run. Timings are logged, never
    written next to the artifacts.
    """
    def __init__(self):
        self.results: List[Dict[str, Any]] = []

    def run(self, stage: str, func: Callable, *args, **kwargs) -> Any:
        """
        Run func(*args, **kwargs) as a named stage and record its metrics.

        Exceptions propagate after the failed stage has been recorded.
        """
        try:
            result, metrics = measure_performance(func)(*args, **kwargs)
        except Exception as e:
            self.results.append({"stage": stage, "execution_time": float("nan"), "memory_used_mb": 0.0,
                                 "success": False, "error": str(e)})
            raise
        metrics.update(stage=stage, success=True)
        self.results.append(metrics)
        logger.info("%s took %.3f s (%+.1f MB)", stage, metrics["execution_time"], metrics["memory_used_mb"])
        return result

    def summary(self) -> pd.DataFrame:
        return pd.DataFrame(self.results, columns=["stage", "execution_time", "memory_used_mb", "success"])

    def log_summary(self) -> None:
        if not self.results:
            return
        df = self.summary()
        logger.info("%d stages, %.3f s in total", len(df), df["execution_time"].sum())
