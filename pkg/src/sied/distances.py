"""Histograms and the statistical distances used by the attack harness."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import BinningMismatch, EmptySample, InsufficientSamples, LengthMismatch

# pseudo-count given to empty bins before normalising
KL_SMOOTHING = 0.5
PSNR_INF = math.inf


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    domain: str = ""

    def __post_init__(self):
        if len(self.edges) != len(self.counts) + 1:
            raise ValueError("need len(edges) == len(counts) + 1")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))

    @classmethod
    def from_samples(cls, samples, edges, domain: str = "") -> "Histogram":
        counts, edges = np.histogram(np.asarray(samples), bins=np.asarray(edges))
        return cls(edges, counts, domain)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            w.writerow([_num(lo), _num(hi), int(c)])
        return buf.getvalue()


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else repr(x)


def is_integer_valued(samples) -> bool:
    arr = np.asarray(samples)
    return arr.dtype.kind in "iub" or bool(np.all(np.mod(arr, 1) == 0))


def shared_edges(a, b, bins: int = 32) -> np.ndarray:
    """Common bin edges for two samples.

    Integer-valued data gets one bin per integer (edges at half-integers);
    anything else gets ``bins`` equal-width bins over the joint range.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise EmptySample("cannot bin an empty sample")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if is_integer_valued(a) and is_integer_valued(b):
        return np.arange(int(lo), int(hi) + 2) - 0.5
    if lo == hi:
        hi = lo + 1.0
    return np.linspace(float(lo), float(hi), bins + 1)


def histogram_pair(a, b, bins: int = 32, domain: str = ""):
    edges = shared_edges(a, b, bins)
    return Histogram.from_samples(a, edges, domain), Histogram.from_samples(b, edges, domain)


def kl_divergence(p: Histogram, q: Histogram, smoothing: float = KL_SMOOTHING) -> float:
    """``sum p_i ln(p_i / q_i)`` over normalised bins.

    Empty bins (in either histogram) get ``smoothing`` pseudo-counts so the
    sum stays finite; non-empty bins are left alone, which keeps
    ``kl_divergence(h, h) == 0`` exactly.
    """
    if len(p.edges) != len(q.edges) or not np.array_equal(p.edges, q.edges):
        raise BinningMismatch("histograms use different bins")
    if p.total <= 0 or q.total <= 0:
        raise EmptySample("KL divergence needs non-empty histograms")
    pc = np.where(p.counts == 0, smoothing, p.counts).astype(float)
    qc = np.where(q.counts == 0, smoothing, q.counts).astype(float)
    pn, qn = pc / pc.sum(), qc / qc.sum()
    return max(0.0, float(np.sum(pn * np.log(pn / qn))))


def chi_square_uniformity(samples, bins: int, domain: Optional[int] = None):
    """Pearson chi-square of integer ``samples`` in ``[0, domain)`` against uniform.

    Values are grouped into ``bins`` contiguous bins; when ``domain`` is not a
    multiple of ``bins`` the expected counts follow the exact bin widths.
    Returns ``(statistic, p_value)`` with ``bins - 1`` degrees of freedom.
    """
    domain = bins if domain is None else domain
    x = np.asarray(samples, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= domain):
        raise ValueError(f"samples outside [0, {domain})")
    idx = x * bins // domain
    observed = np.bincount(idx, minlength=bins).astype(float)
    starts = -(-np.arange(bins) * domain // bins)
    widths = np.diff(np.append(starts, domain)).astype(float)
    expected = x.size * widths / domain
    if x.size == 0 or expected.min() < 5:
        raise InsufficientSamples(
            f"{x.size} samples give fewer than 5 expected counts in some of {bins} bins")
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return stat, float(stats.chi2.sf(stat, bins - 1))


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov: ``(sup |F_a - F_b|, p-value)``.

    Small samples (``n * m <= 10000``) use the exact null distribution;
    trace-sized samples use the asymptotic one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS test needs two non-empty samples")
    method = "exact" if a.size * b.size <= 10_000 else "asymp"
    with warnings.catch_warnings(), np.errstate(divide="ignore"):
        # scipy warns when the exact path falls back to asymp on heavy ties
        warnings.simplefilter("ignore", RuntimeWarning)
        res = stats.ks_2samp(a, b, method=method)
    return float(res.statistic), float(res.pvalue)


def mse(reference, test) -> float:
    r = np.asarray(reference, dtype=float).reshape(-1)
    t = np.asarray(test, dtype=float).reshape(-1)
    if r.size != t.size:
        raise LengthMismatch(f"{r.size} reference vs {t.size} test samples")
    if r.size == 0:
        raise EmptySample("PSNR of empty sequences")
    return float(np.mean((r - t) ** 2))


def psnr(reference, test, max_value: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``PSNR_INF`` when the inputs are identical."""
    err = mse(reference, test)
    if err == 0:
        return PSNR_INF
    return 10.0 * math.log10(max_value ** 2 / err)


def psnr_exact(reference, test, max_value: float = 255.0) -> float:
    """:func:`psnr` on arbitrary-size Python ints (e.g. Paillier plaintexts).

    The squared error is summed exactly, so huge plaintexts neither overflow
    nor lose the difference to float rounding.
    """
    ref = [int(v) for v in reference]
    got = [int(v) for v in test]
    if len(ref) != len(got):
        raise LengthMismatch(f"{len(ref)} reference vs {len(got)} test samples")
    if not ref:
        raise EmptySample("PSNR of empty sequences")
    sq = sum((a - b) * (a - b) for a, b in zip(ref, got))
    if sq == 0:
        return PSNR_INF
    return 20 * math.log10(max_value) - 10 * (math.log10(sq) - math.log10(len(ref)))


def count_peaks(h: Histogram, min_prominence: float = 0.005) -> int:
    """Interior bins exceeding both neighbours by ``min_prominence * total``."""
    c = np.asarray(h.counts, dtype=float)
    if c.size < 3:
        raise ValueError("count_peaks needs at least 3 bins")
    margin = min_prominence * c.sum()
    mid = c[1:-1]
    return int(np.sum((mid - c[:-2] > margin) & (mid - c[2:] > margin)))


@dataclass(frozen=True)
class DistanceReport:
    kl: float
    chi_square: tuple[float, int, float]
    ks: tuple[float, float]
    epsilon_budget: float
    time_budget_note: str = "sample-count budget; no wall-clock bound is applied"

    def as_dict(self) -> dict:
        return {"kl": self.kl, "chi_square": list(self.chi_square), "ks": list(self.ks),
                "epsilon_budget": self.epsilon_budget,
                "time_budget_note": self.time_budget_note}


def compare_samples(a: Sequence[float], b: Sequence[float], epsilon: float,
                    bins: int = 32) -> DistanceReport:
    """All distances between two trace samples on a shared binning.

    The chi-square entry is a two-sample homogeneity test over the bins both
    samples occupy.
    """
    ha, hb = histogram_pair(a, b, bins)
    table = np.vstack([ha.counts, hb.counts])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] > 1:
        chi, p, dof, _ = stats.chi2_contingency(table, correction=False)
    else:
        chi, p, dof = 0.0, 1.0, 0
    return DistanceReport(kl=kl_divergence(ha, hb), chi_square=(float(chi), int(dof), float(p)),
                          ks=ks_two_sample(a, b), epsilon_budget=epsilon)
