"""
CSV persistence for run records and convergence traces
"""
import logging
import os
from contextlib import contextmanager
from typing import Iterable, List

import pandas as pd

from models import RUN_COLUMNS, RunRecord

logger = logging.getLogger(__name__)


@contextmanager
def results_writer(path: str, columns: List[str] = RUN_COLUMNS):
    """
    Context manager collecting rows and writing them as one CSV on success
    Usage:
        with results_writer("out/sweep.csv") as rows:
            rows.append(record.model_dump())
    Nothing is left at `path` if the block raises.
    """
    rows: List[dict] = []
    tmp_path = f"{path}.tmp"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    try:
        yield rows
        frame = pd.DataFrame(rows, columns=columns)
        frame.to_csv(tmp_path, index=False)
        os.replace(tmp_path, path)
        logger.info(f"✅ Wrote {len(rows)} rows to {path}")
    except Exception as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        logger.error(f"❌ Error writing {path}: {e}")
        raise


def write_records(records: Iterable[RunRecord], path: str) -> str:
    with results_writer(path) as rows:
        for record in records:
            rows.append(record.model_dump())
    return path


def write_trace(values: Iterable[float], path: str, column: str = "objective") -> str:
    """One row per frame: frame index and the mean running surrogate value."""
    with results_writer(path, columns=["frame", column]) as rows:
        for frame, value in enumerate(values):
            rows.append({"frame": frame, column: value})
    return path


def read_records(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in RUN_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} is missing columns {missing}")
    return frame
