"""Zero-crossing location on the real part of the compensated ACF."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .acf import AcfEstimate
from .core import EstimatorConfig, NoRootInBracket, NotEnoughCrossings

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ZeroCrossing:
    """The ``index_m``-th sign change, located at a fractional lag.

    ``bracket`` holds the two integer lags around the change; for an exact
    zero sample the location equals the upper lag.  ``slope`` is the chord
    slope across the bracket, per sample.
    """

    index_m: int
    location_samples: float
    bracket: tuple[int, int]
    slope: float


def find_sign_changes(acf_real: Sequence[float], p: int) -> list[tuple[int, int]]:
    """Brackets ``(lag - 1, lag)`` of the first ``p`` sign changes after lag 0.

    A sample that is exactly zero counts as the crossing itself when the
    sequence changes sign across it; a zero that only touches the axis is
    skipped.
    """
    r = np.asarray(acf_real, dtype=np.float64)
    if r.shape[0] == 0 or not r[0] > 0:
        raise NotEnoughCrossings("sequence must start with a positive peak at lag 0")
    brackets: list[tuple[int, int]] = []
    sign = 1.0
    i = 1
    n = r.shape[0]
    while i < n and len(brackets) < p:
        v = r[i]
        if v == 0:
            j = i + 1
            while j < n and r[j] == 0:
                j += 1
            if j == n:
                break
            if np.sign(r[j]) != sign:
                brackets.append((i - 1, i))
                sign = -sign
            i = j
            continue
        if np.sign(v) != sign:
            brackets.append((i - 1, i))
            sign = -sign
        i += 1
    if len(brackets) < p:
        raise NotEnoughCrossings(
            f"found {len(brackets)} sign changes within {n - 1} lags, need {p}"
        )
    return brackets


def interpolate_linear(p0: tuple[float, float], p1: tuple[float, float]) -> float:
    """Root of the chord through two points of opposite sign."""
    (x0, y0), (x1, y1) = p0, p1
    if y0 == 0:
        return float(x0)
    if y1 == 0:
        return float(x1)
    return float(x0 - y0 * (x1 - x0) / (y1 - y0))


class NotAKnotSpline:
    """Cubic interpolating spline with not-a-knot end conditions.

    The third derivative is continuous across the second and the
    penultimate knots.  Four or more knots give a genuine spline; three
    knots give the interpolating parabola and two the chord.
    """

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape or x.ndim != 1 or x.shape[0] < 2:
            raise ValueError("need matching 1-D knot and value arrays with >= 2 points")
        h = np.diff(x)
        if np.any(h <= 0):
            raise ValueError("knots must be strictly increasing")
        self.x, self.y, self.h = x, y, h
        self.m2 = self._second_derivatives()

    def _second_derivatives(self) -> np.ndarray:
        x, y, h = self.x, self.y, self.h
        n = x.shape[0]
        if n == 2:
            return np.zeros(2)
        if n == 3:
            # one parabola through all three points
            curv = 2 * ((y[2] - y[1]) / h[1] - (y[1] - y[0]) / h[0]) / (h[0] + h[1])
            return np.full(3, curv)

        delta = np.diff(y) / h
        A = np.zeros((n, n))
        b = np.zeros(n)
        A[0, :3] = (-h[1], h[0] + h[1], -h[0])
        for i in range(1, n - 1):
            A[i, i - 1 : i + 2] = (h[i - 1], 2 * (h[i - 1] + h[i]), h[i])
            b[i] = 6 * (delta[i] - delta[i - 1])
        A[n - 1, n - 3 :] = (-h[n - 2], h[n - 3] + h[n - 2], -h[n - 3])
        return np.linalg.solve(A, b)

    def segment_of(self, xq: float) -> int:
        j = int(np.searchsorted(self.x, xq, side="right")) - 1
        return min(max(j, 0), self.x.shape[0] - 2)

    def eval_segment(self, j: int, xq: float) -> float:
        x, y, h, m = self.x, self.y, self.h[j], self.m2
        a = x[j + 1] - xq
        b = xq - x[j]
        return float(
            (m[j] * a**3 + m[j + 1] * b**3) / (6 * h)
            + (y[j] - m[j] * h**2 / 6) * a / h
            + (y[j + 1] - m[j + 1] * h**2 / 6) * b / h
        )

    def __call__(self, xq):
        xq_arr = np.atleast_1d(np.asarray(xq, dtype=np.float64))
        out = np.array([self.eval_segment(self.segment_of(v), v) for v in xq_arr])
        return float(out[0]) if np.ndim(xq) == 0 else out


def interpolate_spline(
    points: Sequence[tuple[float, float]], bracket: tuple[float, float]
) -> float:
    """Root, inside ``bracket``, of the not-a-knot spline through ``points``.

    Found by bisection on the cubic piece that covers the bracket.
    """
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    spline = NotAKnotSpline(xs, ys)
    lo, hi = float(bracket[0]), float(bracket[1])
    j = spline.segment_of(lo)
    if not (spline.x[j] <= lo and hi <= spline.x[j + 1]):
        raise ValueError("bracket must lie within one spline segment")

    f_lo = spline.eval_segment(j, lo)
    f_hi = spline.eval_segment(j, hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if not np.isfinite(f_lo) or not np.isfinite(f_hi) or np.sign(f_lo) == np.sign(f_hi):
        raise NoRootInBracket(f"spline has no sign change on [{lo}, {hi}]")

    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = spline.eval_segment(j, mid)
        if f_mid == 0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def locate_crossings(acf: AcfEstimate, cfg: EstimatorConfig) -> list[ZeroCrossing]:
    """Locate crossings ``1 .. cfg.max_zero_crossing`` on ``acf.values.real``."""
    r = acf.values.real
    brackets = find_sign_changes(r, cfg.max_zero_crossing)
    out = []
    for m, (lo, hi) in enumerate(brackets, start=1):
        first = hi - cfg.points_before
        last = hi + cfg.points_after - 1
        if first < 0:
            raise NotEnoughCrossings(
                f"crossing {m} at lag {hi} leaves fewer than {cfg.points_before} points before it"
            )
        if last > acf.max_lag:
            raise NotEnoughCrossings(
                f"crossing {m} needs lags up to {last}, ACF stops at {acf.max_lag}"
            )
        if r[hi] == 0:
            loc = float(hi)
        elif cfg.interpolator == "linear":
            loc = interpolate_linear((lo, r[lo]), (hi, r[hi]))
        else:
            lags = range(first, last + 1)
            loc = interpolate_spline([(k, r[k]) for k in lags], (lo, hi))
        out.append(ZeroCrossing(m, loc, (lo, hi), float(r[hi] - r[lo])))
    return out


def period_from_crossing(zc: ZeroCrossing) -> float:
    return zc.location_samples / zc.index_m
