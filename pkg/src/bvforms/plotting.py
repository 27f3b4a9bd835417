"""PNG figures for CLI reports (Agg backend, no timestamps in metadata)."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _png(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=100, metadata=_META)
    plt.close(fig)
    return buf.getvalue()


def bv_figure(qs, discrepancies, title: str) -> bytes:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(qs, discrepancies, width=0.8, color="tab:blue")
    ax.set_xlabel("q")
    ax.set_ylabel("max discrepancy")
    ax.set_title(title)
    fig.tight_layout()
    return _png(fig)


def mk_figure(ks, mks, title: str, threshold=None) -> bytes:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ks, mks, "o-", color="tab:green", label="M_k")
    if threshold is not None:
        ax.plot(ks, threshold, "s--", color="tab:red", label="threshold")
        ax.axhline(1.0, color="grey", lw=0.8)
        ax.legend()
    ax.set_xlabel("k")
    ax.set_ylabel("value")
    ax.set_title(title)
    fig.tight_layout()
    return _png(fig)


def series_figure(xs, ys, xlabel: str, ylabel: str, title: str, logx: bool = False) -> bytes:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(xs, ys, "o-")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return _png(fig)
