"""
This module writes experiment results: a CSV file whose leading '#' lines carry the
full configuration echo and run metadata, and an SVG line chart. Both outputs are
byte-stable for identical inputs.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import yaml  # noqa: E402

logger = logging.getLogger(__name__)


@dataclass
class ResultTable:
    """
    A result table with its metadata and plotting hints.

    Attributes:
        name (str): Experiment name, used as chart title.
        frame (pd.DataFrame): The rows.
        metadata (dict[str, Any]): Written as '#' comment lines ahead of the header.
        x_column (str): Column plotted on the x axis.
        y_columns (list[str]): Columns drawn as lines.
        markers (dict[str, float]): Vertical reference lines, label -> x position.
        log_x (bool): Logarithmic x axis.
        y_label (str): Label of the y axis.
        failures (list[str]): Analytic versus Monte Carlo disagreements beyond the tolerance.
    """

    name: str
    frame: pd.DataFrame
    metadata: dict[str, Any] = field(default_factory=dict)
    x_column: str = ""
    y_columns: list[str] = field(default_factory=list)
    markers: dict[str, float] = field(default_factory=dict)
    log_x: bool = False
    y_label: str = "coverage probability"
    failures: list[str] = field(default_factory=list)

    def to_csv_text(self) -> str:
        """The CSV document as a string."""
        buffer = io.StringIO()
        for line in _metadata_lines(self.metadata):
            buffer.write(f"# {line}\n" if line else "#\n")
        self.frame.to_csv(buffer, index=False, na_rep="", float_format="%.10g", lineterminator="\n")
        return buffer.getvalue()


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {_plain(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _metadata_lines(metadata: dict[str, Any]) -> list[str]:
    text = yaml.safe_dump(_plain(metadata), sort_keys=False, default_flow_style=False, allow_unicode=True)
    return text.rstrip("\n").splitlines() if metadata else []


def emit_csv(table: ResultTable, path: Path | str) -> Path:
    """
    Writes `table` as UTF-8 CSV with a '#'-prefixed metadata block.

    Args:
        table (ResultTable): The result table.
        path (Path | str): Target file; parent directories are created.

    Returns:
        Path: The written file.

    Raises:
        OSError: If the file cannot be written; the message names the path.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(table.to_csv_text(), encoding="utf-8", newline="")
    except OSError as e:
        logger.error(f"Failed to write CSV to {target}: {e}")
        raise OSError(f"cannot write CSV {target}: {e}") from e
    logger.info(f"Wrote {len(table.frame)} rows to {target}")
    return target


def emit_svg(table: ResultTable, path: Path | str, title: Optional[str] = None) -> Path:
    """
    Draws the y columns of `table` against its x column as an SVG line chart, with a
    dashed vertical line per marker.

    Args:
        table (ResultTable): The result table.
        path (Path | str): Target file.
        title (Optional[str]): Chart title. Defaults to the table name.

    Returns:
        Path: The written file.

    Raises:
        OSError: If the file cannot be written; the message names the path.
    """
    target = Path(path)
    with plt.rc_context({"svg.hashsalt": "uav-irs-noma", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        try:
            frame = table.frame
            for column in table.y_columns:
                if column in frame and frame[column].notna().any():
                    ax.plot(frame[table.x_column], frame[column], marker=".", label=column)
            for label, position in table.markers.items():
                ax.axvline(position, linestyle="--", linewidth=1.0, color="grey")
                ax.annotate(label, (position, 1.0), xycoords=("data", "axes fraction"), rotation=90,
                            va="top", ha="right", fontsize=8)
            if table.log_x:
                ax.set_xscale("log")
            ax.set_xlabel(table.x_column)
            ax.set_ylabel(table.y_label)
            ax.set_title(title or table.name)
            ax.grid(True, alpha=0.3)
            if ax.get_legend_handles_labels()[0]:
                ax.legend(loc="best", fontsize=8)
            fig.tight_layout()
            target.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(target, format="svg", metadata={"Date": None})
        except OSError as e:
            logger.error(f"Failed to write SVG to {target}: {e}")
            raise OSError(f"cannot write SVG {target}: {e}") from e
        finally:
            plt.close(fig)
    logger.info(f"Wrote chart to {target}")
    return target
