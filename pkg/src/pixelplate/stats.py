"""Dataset characterization: Gaussian density, skewness, summaries, histograms.

All moments are population-form (1/n), matching the skewness definition used
to characterize the label distributions. Histogram policy is pinned: equal
width bins over [min, max], right-most bin closed on both sides, normalized
counts are densities (count / (n * bin_width)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float  # population form
    skew: float
    median: float
    mode: float  # center of the fullest equal-width bin


@dataclass(frozen=True, eq=False)
class Histogram:
    """Bin edges (n+1) and counts (n). When normalized, counts are densities."""

    bin_edges: np.ndarray
    counts: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.float64)
        if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
            raise ValueError("need n+1 edges for n counts")
        if not (np.diff(edges) > 0).all():
            raise ValueError("bin edges must be strictly ascending")
        if (counts < 0).any():
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def bin_widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True, eq=False)
class JointHistogram:
    """2-D count grid over (frequency, |S21|) with per-axis edges."""

    f_edges: np.ndarray
    s_edges: np.ndarray
    counts: np.ndarray  # shape (f_bins, s_bins)

    def total(self) -> int:
        return int(self.counts.sum())


def gaussian_pdf(x, mu: float, sigma: float):
    """Normal density (1 / (sigma sqrt(2 pi))) exp(-(x - mu)^2 / (2 sigma^2))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=np.float64)
    z = (x - mu) / sigma
    out = np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
    return float(out) if out.ndim == 0 else out


def _checked_samples(samples, min_n: int = 2) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < min_n:
        raise ValueError(f"need at least {min_n} samples, got {arr.size}")
    if not np.isfinite(arr).all():
        raise ValueError("samples must be finite")
    return arr


def skewness(samples) -> float:
    """Population skewness: (1/n sum (x-mu)^3) / (1/n sum (x-mu)^2)^(3/2)."""
    arr = _checked_samples(samples)
    centered = arr - arr.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise ValueError("skewness is undefined for zero-variance samples")
    m3 = float(np.mean(centered**3))
    return m3 / m2**1.5


def _binned_mode(arr: np.ndarray, mode_bins: int) -> float:
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return lo
    counts, edges = np.histogram(arr, bins=mode_bins, range=(lo, hi))
    idx = int(np.argmax(counts))  # argmax takes the first (lowest) bin on ties
    return float(0.5 * (edges[idx] + edges[idx + 1]))


def summary(samples, mode_bins: int = 50) -> SummaryStats:
    """Mean, population std, skewness, median, and binned mode of a sample."""
    if mode_bins < 1:
        raise ValueError("mode_bins must be >= 1")
    arr = _checked_samples(samples)
    skew = skewness(arr)  # also rejects zero variance
    return SummaryStats(
        mean=float(arr.mean()),
        std=float(arr.std()),  # ddof=0
        skew=skew,
        median=float(np.median(arr)),
        mode=_binned_mode(arr, mode_bins),
    )


def empirical_histogram(samples, bins: int, normalized: bool = False) -> Histogram:
    """Equal-width histogram over [min, max]; right-most bin closed both sides."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    arr = _checked_samples(samples, min_n=1)
    counts, edges = np.histogram(arr, bins=bins)
    counts = counts.astype(np.float64)
    if normalized:
        counts /= arr.size * np.diff(edges)
    return Histogram(edges, counts, normalized=normalized)


def cdf_from_histogram(h: Histogram) -> Histogram:
    """Cumulative counterpart: running mass per bin. Final value is 1 (normalized) or n."""
    mass = h.counts * h.bin_widths if h.normalized else h.counts
    return Histogram(h.bin_edges, np.cumsum(mass), normalized=h.normalized)


def joint_histogram(points, f_bins: int, s_bins: int) -> JointHistogram:
    """2-D equal-width binning of (frequency, |S21|) pairs; grid total equals n."""
    if f_bins < 1 or s_bins < 1:
        raise ValueError("bin counts must be >= 1")
    pts = list(points)
    f = np.array([p[0] for p in pts], dtype=np.float64)
    s = np.array([p[1] for p in pts], dtype=np.float64)
    if f.size == 0:
        raise ValueError("need at least one point")
    counts, f_edges, s_edges = np.histogram2d(f, s, bins=(f_bins, s_bins))
    return JointHistogram(f_edges, s_edges, counts)


def histogram_to_csv(h: Histogram) -> str:
    """CSV with bin_lo, bin_hi, count columns for external plotting."""
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
        lines.append(f"{float(lo)!r},{float(hi)!r},{float(c)!r}")
    return "\n".join(lines) + "\n"


def joint_histogram_to_csv(jh: JointHistogram) -> str:
    """CSV of grid cells: f_lo, f_hi, s_lo, s_hi, count."""
    lines = ["f_lo,f_hi,s_lo,s_hi,count"]
    for i in range(jh.counts.shape[0]):
        for j in range(jh.counts.shape[1]):
            lines.append(
                f"{float(jh.f_edges[i])!r},{float(jh.f_edges[i + 1])!r},"
                f"{float(jh.s_edges[j])!r},{float(jh.s_edges[j + 1])!r},{float(jh.counts[i, j])!r}"
            )
    return "\n".join(lines) + "\n"


def summary_to_csv(named_summaries: dict[str, SummaryStats]) -> str:
    """CSV with one row per named sample set (e.g. frequency and |S21| labels)."""
    lines = ["target,mean,std,skew,median,mode"]
    for name, s in named_summaries.items():
        lines.append(f"{name},{s.mean!r},{s.std!r},{s.skew!r},{s.median!r},{s.mode!r}")
    return "\n".join(lines) + "\n"
