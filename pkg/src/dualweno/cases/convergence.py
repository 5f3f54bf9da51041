"""Error norms, observed orders and convergence reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

UNDEFINED_ORDER = float("nan")


def l1_error(numerical, exact) -> float:
    """Mean absolute deviation over all points.

    ``exact`` is an array of the same shape or a callable returning one.
    """
    numerical = np.asarray(numerical, dtype=float)
    ref = exact() if callable(exact) else np.asarray(exact, dtype=float)
    return float(np.mean(np.abs(numerical - ref)))


def observed_order(e_coarse: float, e_fine: float) -> float:
    """log2(e_N / e_2N); NaN when either error is not positive."""
    if not (e_coarse > 0 and e_fine > 0):
        return UNDEFINED_ORDER
    return math.log2(e_coarse / e_fine)


@dataclass
class ConvergenceReport:
    """Errors on a sequence of doubled meshes; orders are always recomputed."""

    sizes: list[int]
    errors: list[float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.sizes) != len(self.errors):
            raise ValueError("sizes and errors differ in length")

    @property
    def orders(self) -> list[float]:
        return [UNDEFINED_ORDER] + [observed_order(a, b) for a, b in zip(self.errors, self.errors[1:])]

    def rows(self):
        return list(zip(self.sizes, self.errors, self.orders))

    def order_at(self, n: int) -> float:
        return self.orders[self.sizes.index(n)]

    def error_at(self, n: int) -> float:
        return self.errors[self.sizes.index(n)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {self.metadata[key]}\n")
        writer.writerow(["N", "L1_error", "order"])
        for n, e, o in self.rows():
            writer.writerow([n, f"{e:.6e}", "" if math.isnan(o) else f"{o:.4f}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_text(self) -> str:
        title = ", ".join(f"{k}={self.metadata[k]}" for k in sorted(self.metadata))
        lines = [title, f"{'N':>6}  {'L1-error':>10}  {'order':>6}"]
        for n, e, o in self.rows():
            lines.append(f"{n:>6}  {e:10.2e}  {'-' if math.isnan(o) else f'{o:6.2f}':>6}")
        return "\n".join(lines)


def sweep(sizes, run: Callable[[int], float], metadata: dict | None = None) -> ConvergenceReport:
    return ConvergenceReport(list(sizes), [float(run(n)) for n in sizes], dict(metadata or {}))
