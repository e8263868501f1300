"""Matching histograms (CH / NH / LCH) and the K-max pooling alternative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HISTOGRAM_MODES = ("CH", "NH", "LCH")
INPUT_MODES = HISTOGRAM_MODES + ("KMAX",)


@dataclass(frozen=True)
class BinScheme:
    """``bin_count - 1`` equal-width bins over [-1, 1), plus an exact-match bin [1, 1]."""

    bin_count: int = 30

    def __post_init__(self):
        if self.bin_count < 2:
            raise ValueError("need at least one similarity bin plus the exact-match bin")

    @property
    def width(self) -> float:
        return 2.0 / (self.bin_count - 1)

    @property
    def exact_bin(self) -> int:
        return self.bin_count - 1

    def edges(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.bin_count)


def bin_indices(values, scheme: BinScheme) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.size and (np.any(values < -1.0) or np.any(values > 1.0) or np.any(np.isnan(values))):
        raise ValueError("interaction values must lie in [-1, 1]")
    # (v + 1) / width, written to stay exact for widths like 0.5
    idx = np.floor((values + 1.0) * (scheme.bin_count - 1) / 2.0).astype(np.int64)
    idx = np.clip(idx, 0, scheme.bin_count - 2)
    idx[values == 1.0] = scheme.exact_bin
    return idx


def bin_index(value: float, scheme: BinScheme) -> int:
    return int(bin_indices(np.array([value]), scheme)[0])


def count_histogram(values, scheme: BinScheme) -> np.ndarray:
    return np.bincount(bin_indices(values, scheme), minlength=scheme.bin_count).astype(np.float64)


def transform_counts(counts: np.ndarray, mode: str) -> np.ndarray:
    """Map raw per-bin counts to the requested histogram variant."""
    if mode == "CH":
        return counts
    if mode == "NH":
        total = counts.sum()
        return counts / total if total > 0 else np.zeros_like(counts)
    if mode == "LCH":
        return np.log1p(counts)
    raise ValueError(f"unknown histogram mode {mode!r}; expected one of {HISTOGRAM_MODES}")


def histogram(row, scheme: BinScheme | None = None, mode: str = "LCH") -> np.ndarray:
    """Fixed-length histogram for an interaction row (or a bare value array)."""
    scheme = scheme or BinScheme()
    values = getattr(row, "values", row)
    return transform_counts(count_histogram(values, scheme), mode)


def kmax_input(row, k: int = 30) -> np.ndarray:
    """The ``k`` strongest interactions, descending, zero-padded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    values = np.asarray(getattr(row, "values", row), dtype=np.float64)
    top = np.sort(values)[::-1][:k]
    out = np.zeros(k)
    out[:len(top)] = top
    return out


@dataclass(frozen=True)
class InputSpec:
    """How a query term's interaction row becomes the network input."""

    mode: str = "LCH"
    bins: int = 30

    def __post_init__(self):
        if self.mode not in INPUT_MODES:
            raise ValueError(f"unknown input mode {self.mode!r}; expected one of {INPUT_MODES}")

    @property
    def size(self) -> int:
        return self.bins

    def encode(self, row) -> np.ndarray:
        if self.mode == "KMAX":
            return kmax_input(row, self.bins)
        return histogram(row, BinScheme(self.bins), self.mode)


def dump_line(query_id: str, doc_id: str, query_term: str, vector: np.ndarray) -> str:
    """One diagnostics line per query term: ``qid doc term v1 ... vB``."""
    return "\t".join([query_id, doc_id, query_term, " ".join(f"{v:.6g}" for v in vector)])
