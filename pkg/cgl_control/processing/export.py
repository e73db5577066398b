"""
Export - write reports and run records to plot-ready CSV and text files.

Every CSV starts with one comment line carrying the config hash, followed by
a header row. Floats are written with a fixed format so repeated runs of the
same configuration produce identical files.
"""

import logging
from pathlib import Path

import pandas as pd

from cgl_control.models.params import Grid
from cgl_control.numerics.kernel import KernelTable
from cgl_control.solvers.base import RunRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12e"


def write_csv(df: pd.DataFrame, path: Path, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_sha256={config_hash}\n")
        df.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {path} ({len(df)} rows)")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_text(text: str, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
    return path


def write_norms(record: RunRecord, path: Path, config_hash: str) -> Path:
    return write_csv(record.to_dataframe(), path, config_hash)


def write_final_state(record: RunRecord, grid: Grid, path: Path, config_hash: str) -> Path:
    return write_csv(record.final_state_frame(grid), path, config_hash)


def write_kernel_csv(table: KernelTable, grid: Grid, path: Path, config_hash: str) -> Path:
    return write_csv(table.to_dataframe(grid), path, config_hash)
