"""
Export Module
Result files, plain-text tables, Excel/CSV sweeps and arrival-pattern plots
"""

import json
import math
import pandas as pd
from dataclasses import is_dataclass
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence
import logging
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import EXPORTS_DIR, EXPORT_SETTINGS
from utils.helpers import format_rational, rational_to_float

logger = logging.getLogger(__name__)


def to_jsonable(obj):
    """Exact values become "p/q" strings; objects with to_dict are expanded"""
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf"
        return obj
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=str) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if is_dataclass(obj):
        raise TypeError(f"{type(obj).__name__} has no to_dict")
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def dumps_canonical(payload) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


class ExportManager:
    """Handles result files and tabular exports"""

    def __init__(self, exports_dir: Optional[Path] = None):
        self.exports_dir = Path(exports_dir) if exports_dir is not None else EXPORTS_DIR
        self.exports_dir.mkdir(parents=True, exist_ok=True)

    def write_result(self, payload, path, run_id: str = None, command: str = None) -> str:
        """Write canonical JSON plus a <path>.meta.json sidecar with the volatile fields"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_canonical(payload))
        meta = {
            "run_id": run_id,
            "command": command,
            "written_at": datetime.now().isoformat(timespec="seconds"),
        }
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
        logger.info(f"Wrote result: {path}")
        return str(path)

    @staticmethod
    def render_table(rows: Sequence[Mapping], columns: Optional[Sequence[str]] = None) -> str:
        """Aligned plain-text table; exact values shown as "p/q" with a decimal next to them"""
        if not rows:
            return "(no rows)"
        digits = EXPORT_SETTINGS["float_digits"]
        prepared = []
        for row in rows:
            cells = {}
            for key, value in row.items():
                if isinstance(value, Fraction) and value.denominator != 1:
                    cells[key] = f"{format_rational(value)} (~{float(value):.{digits}g})"
                elif isinstance(value, (Fraction, float)) and not isinstance(value, bool):
                    cells[key] = format_rational(value)
                else:
                    cells[key] = value
            prepared.append(cells)
        df = pd.DataFrame(prepared, columns=list(columns) if columns else None)
        return df.to_string(index=False)

    def export_to_excel(self, data: list, filename: str = None,
                        sheet_name: str = None) -> str:
        """Export data to Excel file"""
        try:
            if filename is None:
                filename = f"sweep_{datetime.now().strftime('%Y%m%d_%H%M%S')}.xlsx"

            filepath = Path(filename)
            if not filepath.is_absolute():
                filepath = self.exports_dir / filepath

            df = pd.DataFrame([to_jsonable(row) for row in data])
            df.to_excel(filepath, sheet_name=sheet_name or EXPORT_SETTINGS["sheet_name"],
                        index=False, engine="openpyxl")

            logger.info(f"Exported to Excel: {filepath}")
            return str(filepath)

        except Exception as e:
            logger.error(f"Error exporting to Excel: {str(e)}")
            return None

    def export_to_csv(self, data: list, filename: str = None) -> str:
        """Export data to CSV file"""
        try:
            if filename is None:
                filename = f"sweep_{datetime.now().strftime('%Y%m%d_%H%M%S')}.csv"

            filepath = Path(filename)
            if not filepath.is_absolute():
                filepath = self.exports_dir / filepath

            df = pd.DataFrame([to_jsonable(row) for row in data])
            df.to_csv(filepath, index=False)

            logger.info(f"Exported to CSV: {filepath}")
            return str(filepath)

        except Exception as e:
            logger.error(f"Error exporting to CSV: {str(e)}")
            return None

    def plot_arrival_patterns(self, patterns: Mapping[str, Mapping[int, Fraction]], path,
                              title: str = "Earliest arrival pattern") -> str:
        """Step curves of arrived value per time step, one per label"""
        try:
            fig, ax = plt.subplots(figsize=(6.0, 4.0))
            for label, pattern in patterns.items():
                thetas = sorted(pattern)
                values = [rational_to_float(pattern[t]) for t in thetas]
                ax.step(thetas, values, where="post", label=label)
            ax.set_xlabel("time")
            ax.set_ylabel("value arrived")
            ax.set_title(title)
            ax.grid(True, alpha=0.3)
            if len(patterns) > 1:
                ax.legend(fontsize="small")
            fig.tight_layout()
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, dpi=EXPORT_SETTINGS["plot_dpi"])
            plt.close(fig)
            logger.info(f"Saved plot: {path}")
            return str(path)
        except Exception as e:
            logger.error(f"Error plotting arrival patterns: {str(e)}")
            return None


def pattern_rows(patterns: Mapping[str, Mapping[int, Fraction]]) -> list:
    """One row per time step, one column per label"""
    thetas = sorted(set().union(*(p.keys() for p in patterns.values()))) if patterns else []
    rows = []
    for theta in thetas:
        row: Dict[str, object] = {"theta": theta}
        for label, pattern in patterns.items():
            row[label] = pattern.get(theta)
        rows.append(row)
    return rows
