"""Figure rendering for report outputs (PNG alongside each CSV).

Uses the Agg backend and routes bytes through the atomic writer so
figure files are as deterministic and crash-safe as the CSVs they
accompany.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import ConfigError, WriteError
from .ioutil import atomic_write_bytes
from .mocksynth import MetricSeries

_DPI = 120


def _save(fig, path):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=_DPI)
    plt.close(fig)
    try:
        atomic_write_bytes(path, buf.getvalue())
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def save_series_plot(series: list[MetricSeries], path, title: str = "", ylabel: str = "value") -> None:
    """Line plot of per-frame series, one labeled curve each."""
    if not series:
        raise ConfigError("no metric series to plot")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for item in series:
        ax.plot(range(len(item)), item.values, label=item.name, linewidth=1.4)
    ax.set_xlabel("frame")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_ablation_plot(windows: list[int], columns: dict[str, list[float]], path, title: str = "") -> None:
    """Total variation against window size, one curve per measured series."""
    if not columns:
        raise ConfigError("no ablation columns to plot")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name, values in columns.items():
        ax.plot(windows, values, marker="o", label=name)
    ax.set_xlabel("window size (frames)")
    ax.set_ylabel("total variation")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
