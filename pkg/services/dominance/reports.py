"""
Report writers: JSON summaries, CSV tables (UTF-8, LF, header row) and
whitespace-separated data files for gnuplot.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .fooling import VARIANTS

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT, encoding="utf-8")
    logger.debug(f"wrote {path} ({len(df)} rows)")
    return path


def write_gnuplot(df: pd.DataFrame, path) -> Path:
    """Whitespace-separated columns with a '#'-prefixed header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = df.to_csv(sep=" ", index=False, header=False, lineterminator="\n",
                     float_format=FLOAT_FORMAT, na_rep="NaN")
    path.write_text("# " + " ".join(df.columns) + "\n" + body, encoding="utf-8")
    return path


# ============================================================================
# TABLE LAYOUTS
# ============================================================================

def misclass_frequency_frame(rows: Sequence[np.ndarray], class_names: Sequence[str]) -> pd.DataFrame:
    """One row per perturbation, one column per class; header is exactly the class names."""
    data = np.vstack(rows) if len(rows) else np.zeros((0, len(class_names)))
    return pd.DataFrame(data, columns=list(class_names))


def per_class_fooling_frame(rows: Sequence[np.ndarray], class_names: Sequence[str]) -> pd.DataFrame:
    data = np.vstack(rows) if len(rows) else np.zeros((0, len(class_names)))
    return pd.DataFrame(data, columns=list(class_names))


def fooling_table_frame(tables: Dict[str, Dict[str, Dict[str, Optional[float]]]], key: str = "experiment") -> pd.DataFrame:
    """
    One row per experiment with mean and max of every fooling-rate variant,
    in percent.
    """
    records = []
    for name, table in tables.items():
        record = {key: name}
        for variant in VARIANTS:
            for stat in ("mean", "max"):
                value = table[variant][stat]
                record[f"{variant}_{stat}_pct"] = None if value is None else 100.0 * value
        records.append(record)
    columns = [key] + [f"{v}_{s}_pct" for v in VARIANTS for s in ("mean", "max")]
    return pd.DataFrame.from_records(records, columns=columns)


def trace_frame(rows: List[Dict]) -> pd.DataFrame:
    columns = ["pass", "step", "input_index", "triggering_class", "F1", "F2", "F3", "norm_l2"]
    return pd.DataFrame.from_records(rows, columns=columns)
