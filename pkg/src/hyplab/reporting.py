"""Report emission: deterministic JSON/CSV artifacts and optional figures.

Reports never carry timestamps; a fixed seed therefore reproduces the
artifact byte for byte.  CSV files open with ``# key=value`` header lines
echoing the resolved configuration, followed by an RFC-4180 table.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (obj != obj):  # NaN
        return None
    return obj


def json_payload(payload: dict) -> str:
    return json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json_payload(payload), encoding="utf-8")
    return path


def csv_payload(config: dict, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    for key in sorted(config):
        buf.write(f"# {key}={config[key]}\n")
    writer = csv.DictWriter(buf, fieldnames=columns, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    return buf.getvalue()


def write_csv(path: str | Path, config: dict, columns: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    path.write_text(csv_payload(_jsonify(config), columns, _jsonify(rows)), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# figures (opt-in; the numeric artifacts above are the primary outputs)
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def figure_path(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_suffix(".png")


def render_kernel_figure(out_path, r, values, title=""):
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].loglog(r, values)
    axes[0].set_xlabel("r")
    axes[0].set_ylabel("G(r)")
    axes[0].set_title("small-radius regime")
    axes[1].semilogy(r, values)
    axes[1].set_xlabel("r")
    axes[1].set_title("large-radius decay")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    p = figure_path(out_path)
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p


def render_trajectory_figure(out_path, rows, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    t = [row["t"] for row in rows]
    for key in ("l2", "h1", "l2_ut"):
        ax.semilogy(t, [max(row[key], 1e-300) for row in rows], label=key)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    p = figure_path(out_path)
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p


def render_ratio_figure(out_path, members, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ratios = [m["ratio"] for m in members]
    ax.plot(range(len(ratios)), ratios, "o-")
    ax.set_xlabel("family member")
    ax.set_ylabel("LHS / RHS")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    p = figure_path(out_path)
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p


def render_error_figure(out_path, x, errors, xlabel, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(x, np.maximum(np.asarray(errors, dtype=float), 1e-18), "o-")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("relative error")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    p = figure_path(out_path)
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p
