"""Report files for simulation runs: delimited data plus rendered figures."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")  # file output only; no display server in scope
import matplotlib.pyplot as plt


def write_csv(path: Path | str, header: Sequence[str],
              rows: Sequence[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_turns_histogram(path: Path | str, turns: Sequence[int],
                          policy: str) -> Path:
    """Histogram of turns-to-win for one policy."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    low, high = min(turns), max(turns)
    bins = range(low, high + 2)
    ax.hist(turns, bins=bins, align="left", rwidth=0.85, color="#3a6ea5")
    ax.set_xlabel("turns to win")
    ax.set_ylabel("sessions")
    ax.set_title(f"Turns to win, policy={policy}, n={len(turns)}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_playthrough_progress(path: Path | str, points: Sequence[int],
                               owned: Sequence[int], label: str) -> Path:
    """Points and collection size over the course of a playthrough."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    steps = range(len(points))
    ax.plot(steps, points, label="unspent points", color="#b0413e")
    ax.plot(steps, owned, label="owned cards", color="#3a6ea5")
    ax.set_xlabel("action")
    ax.set_ylabel("count")
    ax.set_title(f"Playthrough progress ({label})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
