"""Fixed-width histogram reports for score/ratio distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput


@dataclass
class HistogramReport:
    bin_edges: list[float]       # len = n_bins + 1, regular grid over [lo, hi)
    counts: list[int]            # per in-range bin
    underflow: int
    overflow: int
    threshold: float

    @property
    def total(self) -> int:
        return sum(self.counts) + self.underflow + self.overflow

    def to_csv(self) -> str:
        lines = ["bin_low\tbin_high\tcount"]
        if self.underflow:
            lines.append("-inf\t%.6g\t%d" % (self.bin_edges[0], self.underflow))
        for lo, hi, c in zip(self.bin_edges, self.bin_edges[1:], self.counts):
            lines.append("%.6g\t%.6g\t%d" % (lo, hi, c))
        lines.append("%.6g\tinf\t%d" % (self.bin_edges[-1], self.overflow))
        lines.append("# threshold\t%.6g" % self.threshold)
        return "\n".join(lines) + "\n"


def make_histogram(values: Sequence[float], width: float, lo: float, hi: float,
                   threshold: float) -> HistogramReport:
    if not values:
        raise EmptyInput("no values to histogram")
    n_bins = int(round((hi - lo) / width))
    counts = [0] * n_bins
    underflow = 0
    overflow = 0
    for v in values:
        if v < lo:
            underflow += 1
        elif v >= hi:
            overflow += 1
        else:
            # nudge guards against values landing a few ulps below a boundary
            counts[min(int(math.floor((v - lo) / width + 1e-9)), n_bins - 1)] += 1
    edges = [lo + i * width for i in range(n_bins + 1)]
    return HistogramReport(edges, counts, underflow, overflow, threshold)
