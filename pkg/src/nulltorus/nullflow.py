"""Flows of the null line fields: rotation numbers, closed lines, cylinders.

Both null families are nowhere vertical *or* nowhere horizontal on every
supported metric, so each family is integrated as a graph over a transversal
coordinate (the "axis"): for a family with bounded slope over x1 we integrate
dw/du = slope(u, w) with u = x1, and symmetrically for quasi-vertical
families (RosaTau's X-family).  The axis is chosen automatically from the
direction field sampled on a coarse grid.

Rotation numbers honor the declared fixed RK4 step and return count, but are
computed through the stroboscopic return map: one batched sweep over the
transversal builds the displacement function D(w) = (one-period return) - w,
whose trigonometric interpolant is then iterated.  Tests cross-validate this
against direct long-trajectory integration.  Displacement scans used for
resonance detection integrate at a refined step (2.5e-4) so integrator
truncation noise stays well below the 1e-10 resonance threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from . import geometry
from .errors import (DenseFlow, Inconclusive, NotTransverse, StepTooLarge,
                     WrongFamily)
from .gridtools import (TrigSeries1, TrigSeries2, grid_points, torus_delta,
                        wrap_unit)
from .tolerances import DEFAULT, Tolerances

Point = tuple[float, float]


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True)
class RationalCertificate:
    p: int
    q: int
    residual: float

    @property
    def value(self) -> float:
        return self.p / self.q


@dataclass(frozen=True)
class RotationNumberEstimate:
    family: str
    value: float
    n_returns: int
    step: float
    rational: Optional[RationalCertificate]
    method: str = "return-map"


@dataclass(frozen=True)
class LineClass:
    kind: str                                  # "Closed" | "Dense" | "Asymptotic"
    winding: Optional[tuple[int, int]] = None  # Closed: exact cover displacement
    period: Optional[float] = None             # Closed: in axis units
    rotation: Optional[float] = None           # Dense
    limit_winding: Optional[tuple[int, int]] = None   # Asymptotic
    displacement: Optional[float] = None       # measured closure defect


@dataclass(frozen=True)
class NullLineRecord:
    family: str
    axis: int
    ts: np.ndarray
    points: np.ndarray        # (M, 2) cover coordinates
    velocities: np.ndarray    # (M, 2) coordinate velocity dpoint/dt
    winding: Optional[tuple[int, int]] = None
    classification: Optional[LineClass] = None

    @property
    def start(self) -> tuple[float, float]:
        return (float(self.points[0, 0]), float(self.points[0, 1]))

    @property
    def end(self) -> tuple[float, float]:
        return (float(self.points[-1, 0]), float(self.points[-1, 1]))


@dataclass(frozen=True)
class Interval:
    kind: str          # "Resonant" | "Asymptotic" | "NonResonant"
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, w: float) -> bool:
        return self.lo <= w <= self.hi or self.lo <= w + 1.0 <= self.hi

    def interior_points(self, count: int, margin: float = 0.05) -> np.ndarray:
        pad = margin * self.width
        return np.linspace(self.lo + pad, self.hi - pad, count)


@dataclass(frozen=True)
class CylinderDecomposition:
    family: str
    axis: int
    rotation: RationalCertificate
    intervals: tuple[Interval, ...]
    isolated_closed: tuple[float, ...]   # transversal values of isolated closed lines
    resolution: int
    scan_step: float

    @property
    def resonant_intervals(self) -> tuple[Interval, ...]:
        return tuple(iv for iv in self.intervals if iv.kind == "Resonant")


@dataclass(frozen=True)
class CompletenessProbe:
    family: str
    p0: Point
    complete_up_to: float
    blowup_detected: bool
    blowup_parameter: Optional[float]
    max_speed: float
    directions: tuple[dict, dict]


# ---------------------------------------------------------------------------
# transversality and slopes


@lru_cache(maxsize=128)
def transversal_axis(spec, family: str) -> int:
    """0 if the family is a graph over x1, 1 if over x2; NotTransverse else.

    Decided from the direction field on a coarse grid: the axis is the
    component whose (normalized) magnitude stays farthest from zero.
    """
    X1, X2 = grid_points(64)
    d1, d2 = geometry.null_direction_arrays(spec, X1, X2, family)
    norm = np.hypot(d1, d2)
    r1 = float(np.min(np.abs(d1) / norm))
    r2 = float(np.min(np.abs(d2) / norm))
    if max(r1, r2) < 0.02:
        raise NotTransverse(
            f"{family}-family is near-vertical and near-horizontal at once "
            f"(min component ratios {r1:.3g}, {r2:.3g})")
    return 0 if r1 >= r2 else 1


def slope_function(spec, family: str, axis: int):
    """Vectorized dw/du for the family as a graph over the axis coordinate."""
    if axis == 0:
        def slope(u, w):
            d1, d2 = geometry.null_direction_arrays(spec, u, w, family)
            return d2 / d1
    else:
        def slope(u, w):
            d1, d2 = geometry.null_direction_arrays(spec, w, u, family)
            return d1 / d2
    return slope


def _normalize_step(step: float) -> tuple[float, int]:
    per_unit = max(1, round(1.0 / step))
    return 1.0 / per_unit, per_unit


def _march(spec, family: str, axis: int, u0: float, w0, n_units: float,
           step: float, record: bool = False):
    """RK4 in the axis coordinate; w0 may be a batch.  Returns w_end
    (and, when record=True, the full (ts, w-path) arrays)."""
    slope = slope_function(spec, family, axis)
    h, per_unit = _normalize_step(step)
    n_steps = int(round(n_units * per_unit))
    w = np.array(w0, dtype=float, copy=True)
    path = None
    if record:
        path = np.empty((n_steps + 1,) + w.shape)
        path[0] = w
    max_jump = 0.0
    for i in range(n_steps):
        u = u0 + i * h
        k1 = slope(u, w)
        k2 = slope(u + 0.5 * h, w + 0.5 * h * k1)
        k3 = slope(u + 0.5 * h, w + 0.5 * h * k2)
        k4 = slope(u + h, w + h * k3)
        dw = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        jump = float(np.max(np.abs(dw)))
        if jump > 0.25:
            raise StepTooLarge(
                f"per-step displacement {jump:.3g} at u={u:.4f} "
                f"(step {h:.2e}); refine the step")
        max_jump = max(max_jump, jump)
        w = w + dw
        if record:
            path[i + 1] = w
    if record:
        ts = np.arange(n_steps + 1) * h
        return w, ts, path
    return w


# ---------------------------------------------------------------------------
# integration and records


def integrate_null_line(spec, p0: Point, family: str = "X",
                        t_max: float = 1.0, step: float = DEFAULT.ode_step,
                        tol: Tolerances = DEFAULT) -> NullLineRecord:
    """Sweep the null line through p0 for t_max units of the axis coordinate.

    The record stores cover coordinates; the parametrization is the axis
    coordinate itself (velocity component along the axis is exactly 1).
    """
    axis = transversal_axis(spec, family)
    u0 = float(p0[axis])
    w0 = float(p0[1 - axis])
    _, ts, path = _march(spec, family, axis, u0, w0, t_max, step, record=True)
    us = u0 + ts
    if axis == 0:
        points = np.column_stack([us, path])
    else:
        points = np.column_stack([path, us])
    slope = slope_function(spec, family, axis)
    m = np.asarray(slope(us, path), dtype=float)
    if axis == 0:
        velocities = np.column_stack([np.ones_like(m), m])
    else:
        velocities = np.column_stack([m, np.ones_like(m)])
    return NullLineRecord(family=family, axis=axis, ts=ts, points=points,
                          velocities=velocities)


def best_rational(value: float, max_den: int, residual_tol: float
                  ) -> Optional[RationalCertificate]:
    frac = Fraction(value).limit_denominator(max_den)
    res = abs(value - float(frac))
    if res < residual_tol:
        return RationalCertificate(frac.numerator, frac.denominator, res)
    return None


@lru_cache(maxsize=128)
def _return_displacement_series(spec, family: str, axis: int, step: float,
                                n_seeds: int = 2048) -> TrigSeries1:
    """Trig interpolant of D(w) = one-period return displacement from u=0."""
    seeds = np.arange(n_seeds) / n_seeds
    ends = _march(spec, family, axis, 0.0, seeds, 1.0, step)
    return TrigSeries1.from_samples(ends - seeds)


def rotation_number(spec, family: str = "X", p0: Point = (0.0, 0.0),
                    n_returns: int = 1000, step: float = DEFAULT.ode_step,
                    tol: Tolerances = DEFAULT, method: str = "return-map"
                    ) -> RotationNumberEstimate:
    """Average displacement per unit of the axis coordinate.

    'return-map': iterate the interpolated one-period return map (fast,
    default).  'direct': integrate a single long trajectory (slow; used for
    cross-validation).
    """
    axis = transversal_axis(spec, family)
    w0 = float(p0[1 - axis])
    if method == "direct":
        w_end = _march(spec, family, axis, float(p0[axis]), w0,
                       float(n_returns), step)
        value = (float(w_end) - w0) / n_returns
    else:
        series = _return_displacement_series(spec, family, axis, step)
        w = w0
        # iterating from the p0 transversal: shift start to u=0 first
        if p0[axis] % 1.0 != 0.0:
            w = float(_march(spec, family, axis, float(p0[axis]), w0,
                             1.0 - (p0[axis] % 1.0), step))
        w_cover = w
        for _ in range(n_returns):
            w_cover += float(series(wrap_unit(w_cover)).real)
        value = (w_cover - w) / n_returns
    rational = best_rational(value, tol.rational_cap, tol.rational_residual_flow)
    return RotationNumberEstimate(family=family, value=value,
                                  n_returns=n_returns, step=step,
                                  rational=rational, method=method)


def _winding(axis: int, q: int, p: int) -> tuple[int, int]:
    return (q, p) if axis == 0 else (p, q)


def classify_line(spec, p0: Point, family: str = "X",
                  step: float = DEFAULT.ode_step, n_returns: int = 256,
                  tol: Tolerances = DEFAULT) -> LineClass:
    """Closed / Dense / Asymptotic classification of the line through p0.

    A rational rotation certificate is only trusted when its winding is
    verifiable (q <= 64) and q * residual stays below the open threshold —
    an irrational slope always has continued-fraction convergents that fit
    the raw residual tolerance, so an unfiltered guess would misclassify
    dense lines.  With a credible (p, q) the q-return displacement decides:
    below the closedness tolerance closed, above the open threshold
    asymptotic, in between Inconclusive.  Without one, the verdict comes
    from locating p0 on the transversal in the cylinder decomposition
    (whose fixed-point sign scan certifies the resonant set); a certified
    dense flow is the remaining case.
    """
    axis = transversal_axis(spec, family)
    est = rotation_number(spec, family, p0, n_returns=n_returns, step=step,
                          tol=tol)
    u0, w0 = float(p0[axis]), float(p0[1 - axis])
    cert = est.rational
    if (cert is not None and cert.q <= 64
            and cert.q * cert.residual <= tol.closedness_reject):
        p, q = cert.p, cert.q
        w_end = _march(spec, family, axis, u0, w0, float(q), step)
        disp = float(w_end) - w0 - p
        if abs(disp) < tol.closedness:
            return LineClass(kind="Closed", winding=_winding(axis, q, p),
                             period=float(q), displacement=disp)
        if abs(disp) > tol.closedness_reject:
            return LineClass(kind="Asymptotic",
                             limit_winding=_winding(axis, q, p),
                             rotation=est.value, displacement=disp)
        raise Inconclusive(
            f"q-return displacement {abs(disp):.3e} falls between the closed "
            f"({tol.closedness:.0e}) and open ({tol.closedness_reject:.0e}) "
            "thresholds", measured=abs(disp),
            band=(tol.closedness, tol.closedness_reject))
    try:
        dec = cylinder_decomposition(spec, family, step=step, tol=tol)
    except DenseFlow:
        return LineClass(kind="Dense", rotation=est.value)
    # transversal value of p0 on the section u = 0
    z0 = w0
    if u0 % 1.0 != 0.0:
        z0 = float(_march(spec, family, axis, u0, w0, 1.0 - (u0 % 1.0), step))
    z0 = wrap_unit(z0)
    p, q = dec.rotation.p, dec.rotation.q
    winding = _winding(axis, q, p)
    for w_closed in dec.isolated_closed:
        if abs(torus_delta(z0, w_closed)) <= tol.bisection:
            return LineClass(kind="Closed", winding=winding, period=float(q))
    for iv in dec.intervals:
        if not iv.contains(z0):
            continue
        if iv.kind == "Resonant":
            return LineClass(kind="Closed", winding=winding, period=float(q))
        return LineClass(kind="Asymptotic", limit_winding=winding,
                         rotation=est.value)
    # z0 sits on an interval boundary: the boundary of the resonant set is
    # itself made of closed lines
    return LineClass(kind="Closed", winding=winding, period=float(q))


def closed_line_through(spec, family: str, seed_w: float,
                        rotation: RationalCertificate,
                        step: float = DEFAULT.ode_step,
                        tol: Tolerances = DEFAULT) -> NullLineRecord:
    """Record one period of the closed line through transversal value seed_w.

    The line starts at axis coordinate 0; closure is verified to the
    closedness tolerance and the integer winding is attached.
    """
    axis = transversal_axis(spec, family)
    p, q = rotation.p, rotation.q
    p0 = (0.0, seed_w) if axis == 0 else (seed_w, 0.0)
    rec = integrate_null_line(spec, p0, family, t_max=float(q), step=step,
                              tol=tol)
    disp = rec.points[-1, 1 - axis] - rec.points[0, 1 - axis] - p
    if abs(disp) > tol.closedness_reject:
        raise DenseFlow(
            f"line through w={seed_w:.6f} does not close: displacement "
            f"{disp:.3e} after {q} returns")
    winding = _winding(axis, q, p)
    cls = LineClass(kind="Closed", winding=winding, period=float(q),
                    displacement=float(disp))
    return NullLineRecord(family=family, axis=axis, ts=rec.ts,
                          points=rec.points, velocities=rec.velocities,
                          winding=winding, classification=cls)


# ---------------------------------------------------------------------------
# first integral of closed diagonal metrics


class FirstIntegral:
    """F(x1,x2) = int_0^{x1} lam1(s,x2) ds - int_0^{x2} lam2(0,s) ds.

    dF = lam1 dx1 - lam2 dx2 vanishes nowhere and kills the X-direction, so
    F is constant along X-lines and strictly monotone across them; it is
    quasi-periodic with offsets (l1, -l2) under full coordinate periods.
    """

    def __init__(self, spec, n: Optional[int] = None):
        if not geometry.is_closed_diagonal(spec):
            raise WrongFamily("first integral requires a closed diagonal metric")
        n = n or spec.grid_n
        X1, X2 = grid_points(n)
        l1g, l2g = spec.lambdas(X1, X2)
        s2 = TrigSeries2.from_samples(l1g)
        mean1, osc1 = s2.antiderivative_x1()
        row = TrigSeries1.from_samples(l2g[0, :])   # lam2 along x1 = 0
        mean2, osc2 = row.antiderivative()
        self._mean1 = mean1
        self._osc1 = osc1
        self._mean2 = complex(mean2)
        self._osc2 = osc2
        self.l1, self.l2 = geometry.mean_coefficients(spec)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        i1 = x1 * self._mean1(x2).real + (self._osc1(x1, x2)
                                          - self._osc1(np.zeros_like(x1), x2)).real
        i2 = x2 * self._mean2.real + (self._osc2(x2) - self._osc2(0.0)).real
        return i1 - i2

    @property
    def quasi_periods(self) -> tuple[float, float]:
        """(shift under x1 -> x1+1, shift under x2 -> x2+1) = (l1, -l2)."""
        return (self.l1, -self.l2)


@lru_cache(maxsize=32)
def first_integral_function(spec, n: Optional[int] = None) -> FirstIntegral:
    return FirstIntegral(spec, n)


def first_integral(spec, p: Point) -> float:
    return float(first_integral_function(spec)(p[0], p[1]))


# ---------------------------------------------------------------------------
# cylinder decomposition


def _q_return_displacement(spec, family: str, axis: int, q: int, p: int,
                           seeds: np.ndarray, step: float) -> np.ndarray:
    ends = _march(spec, family, axis, 0.0, seeds, float(q), step)
    return ends - seeds - p


def _refine_zero(fun, lo: float, hi: float, tol: float) -> float:
    flo = fun(lo)
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _edge_bisect(fun, w_false: float, w_true: float, level: float,
                 tol: float) -> float:
    """Boundary of {|fun| < level} between w_false (outside) and w_true."""
    for _ in range(200):
        if abs(w_true - w_false) < tol:
            break
        mid = 0.5 * (w_true + w_false)
        if abs(fun(mid)) < level:
            w_true = mid
        else:
            w_false = mid
    return 0.5 * (w_true + w_false)


def cylinder_decomposition(spec, family: str = "X", resolution: int = 1024,
                           step: Optional[float] = None,
                           tol: Tolerances = DEFAULT) -> CylinderDecomposition:
    """Split the transversal circle by the q-return displacement D.

    Maximal runs with |D| < 1e-10 (at every sampled point) become Resonant
    intervals; isolated zeros of D (located by bisection to 1e-10) are closed
    lines bounding Asymptotic intervals.  A rational rotation number is
    required (DenseFlow otherwise).  NonResonant is emitted only in the
    degenerate case where D has no zero at all at this resolution.

    D is measured at every seed in one batched sweep; boundary and zero
    refinement bisect on the trigonometric interpolant of those samples
    (D is a smooth periodic function of the seed, so the interpolant is
    spectrally accurate and refinement costs no further integrations).
    """
    axis = transversal_axis(spec, family)
    est = rotation_number(spec, family, (0.0, 0.0), n_returns=512, tol=tol)
    if est.rational is None:
        raise DenseFlow(f"rotation number {est.value:.9f} has no rational "
                        f"certificate (cap {tol.rational_cap})")
    cert = est.rational
    # a certificate is only credible if its own residual predicts closure:
    # after q returns the drift is ~ q * residual, which must sit below the
    # closed/open discrimination threshold
    if cert.q * cert.residual > tol.closedness_reject:
        raise DenseFlow(
            f"rotation {est.value:.9f} ~ {cert.p}/{cert.q} but the residual "
            f"{cert.residual:.2e} predicts a {cert.q}-return drift of "
            f"{cert.q * cert.residual:.2e}; lines do not close")
    if cert.q > 64:
        raise Inconclusive(
            f"closed-line period {cert.q} is beyond the decomposition's "
            "practical range", measured=float(cert.q), band=(1.0, 64.0))
    scan = step or tol.scan_step
    seeds = np.arange(resolution) / resolution
    D = _q_return_displacement(spec, family, axis, cert.q, cert.p, seeds, scan)

    series = TrigSeries1.from_samples(D.astype(complex))

    def D_at(w: float) -> float:
        return float(np.real(series(w)))

    flat_mask = np.abs(D) < tol.resonance
    intervals: list[Interval] = []
    isolated: list[float] = []

    if bool(np.all(flat_mask)):
        intervals.append(Interval("Resonant", 0.0, 1.0))
        return CylinderDecomposition(family, axis, cert, tuple(intervals), (),
                                     resolution, scan)
    if not np.any(flat_mask):
        # only isolated zeros (or none): find sign changes
        zeros = _sign_change_zeros(D, seeds, D_at, tol)
        if not zeros:
            intervals.append(Interval("NonResonant", 0.0, 1.0))
            return CylinderDecomposition(family, axis, cert, tuple(intervals),
                                         (), resolution, scan)
        for a, b in zip(zeros, zeros[1:] + [zeros[0] + 1.0]):
            intervals.append(Interval("Asymptotic", a, b))
        return CylinderDecomposition(family, axis, cert, tuple(intervals),
                                     tuple(zeros), resolution, scan)

    # mixed case: resonant runs + isolated zeros in the complement
    runs = _circular_runs(flat_mask)
    h = 1.0 / resolution
    refined_runs: list[tuple[float, float]] = []
    for start, stop in runs:          # sample-index runs, stop exclusive
        lo_guess = float(seeds[start % resolution])
        hi_guess = float(seeds[(stop - 1) % resolution])
        if hi_guess < lo_guess:
            hi_guess += 1.0
        if abs(D_at(lo_guess - h)) >= tol.resonance:
            lo = _edge_bisect(D_at, lo_guess - h, lo_guess, tol.resonance,
                              tol.bisection)
        else:
            lo = lo_guess - h
        if abs(D_at(hi_guess + h)) >= tol.resonance:
            hi = _edge_bisect(D_at, hi_guess + h, hi_guess, tol.resonance,
                              tol.bisection)
        else:
            hi = hi_guess + h
        refined_runs.append((lo, hi))

    gaps: list[tuple[float, float]] = []
    for (lo, hi), (nlo, _) in zip(refined_runs,
                                  refined_runs[1:] + [(refined_runs[0][0] + 1.0,
                                                       refined_runs[0][1])]):
        gaps.append((hi, nlo))
    for lo, hi in refined_runs:
        intervals.append(Interval("Resonant", wrap_unit(lo), wrap_unit(lo) + (hi - lo)))
    for lo, hi in gaps:
        seg_pts = np.linspace(lo + 1e-6, hi - 1e-6, 64)
        seg_vals = np.array([D_at(w % 1.0) for w in seg_pts])
        zeros = []
        for i in range(len(seg_pts) - 1):
            # strict sign changes of macroscopic size only: interpolant
            # wiggle (and threshold underflow) near run edges is not a
            # closed line
            if (seg_vals[i] * seg_vals[i + 1] < 0
                    and max(abs(seg_vals[i]), abs(seg_vals[i + 1]))
                    > 10 * tol.resonance):
                zeros.append(_refine_zero(lambda w: D_at(w % 1.0),
                                          seg_pts[i], seg_pts[i + 1],
                                          tol.bisection))
        bounds = [lo] + zeros + [hi]
        for a, b in zip(bounds, bounds[1:]):
            intervals.append(Interval("Asymptotic", a, b))
        isolated.extend(wrap_unit(z) for z in zeros)
    return CylinderDecomposition(family, axis, cert, tuple(intervals),
                                 tuple(sorted(isolated)), resolution, scan)


def _circular_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True in a circular boolean array, as (start, stop)."""
    n = len(mask)
    if np.all(mask):
        return [(0, n)]
    edges = np.flatnonzero(mask.astype(int) - np.roll(mask, 1).astype(int))
    starts = [int(i) for i in edges if mask[i]]
    runs = []
    for s in starts:
        e = s
        while mask[e % n]:
            e += 1
        runs.append((s, e))
    return runs


def _sign_change_zeros(D: np.ndarray, seeds: np.ndarray, D_at, tol: Tolerances
                       ) -> list[float]:
    n = len(seeds)
    zeros = []
    for i in range(n):
        a, b = D[i], D[(i + 1) % n]
        if a == 0.0:
            zeros.append(float(seeds[i]))
        elif a * b < 0:
            lo = float(seeds[i])
            hi = float(seeds[i]) + 1.0 / n
            zeros.append(wrap_unit(_refine_zero(lambda w: D_at(w % 1.0),
                                                lo, hi, tol.bisection)))
    return sorted(zeros)


# ---------------------------------------------------------------------------
# geodesic completeness


def probe_completeness(spec, p0: Point, family: str = "X",
                       affine: bool = True, t_max: float = 20.0,
                       step: float = DEFAULT.ode_step, adaptive: bool = True,
                       tol: Tolerances = DEFAULT) -> CompletenessProbe:
    """Integrate the null geodesic through p0 in both time directions.

    With ``affine=True`` the geodesic equation is solved in an affine
    parameter; a blowup certificate is issued when the coordinate speed
    exceeds 1e8 while the affine parameter stays below t_max.  The step
    adapts as 1/(1+|v|) so each step moves a bounded coordinate distance
    (StepTooLarge if adaptivity is disabled and the motion outruns the step).
    With ``affine=False`` the normalized direction field is integrated
    instead, which is complete on the torus; the probe then just reports
    t_max.
    """
    if not affine:
        integrate_null_line(spec, p0, family, t_max=t_max, step=step, tol=tol)
        d = {"reached": t_max, "blowup": False, "final_speed": 1.0}
        return CompletenessProbe(family, p0, t_max, False, None, 1.0, (d, d))

    v0 = np.array(geometry.null_directions(spec, p0)[0 if family == "X" else 1],
                  dtype=float)
    results = []
    for sign in (+1.0, -1.0):
        results.append(_geodesic_leg(spec, p0, sign * v0, t_max, step,
                                     adaptive, tol))
    blow = results[0]["blowup"] or results[1]["blowup"]
    blow_t = None
    for r in results:
        if r["blowup"]:
            blow_t = r["reached"] if blow_t is None else min(blow_t, r["reached"])
    complete_up_to = min(r["reached"] for r in results if not r["blowup"]) \
        if not blow else min(r["reached"] for r in results)
    max_speed = max(r["final_speed"] for r in results)
    return CompletenessProbe(family, p0, complete_up_to, blow, blow_t,
                             max_speed, (results[0], results[1]))


def _geodesic_leg(spec, p0: Point, v0: np.ndarray, t_max: float, step: float,
                  adaptive: bool, tol: Tolerances) -> dict:
    x = np.array([p0[0], p0[1]], dtype=float)
    v = np.array(v0, dtype=float)
    t = 0.0

    def acc(xx, vv):
        gam = geometry.christoffels_at(spec, xx[0], xx[1])
        a0 = -(gam[(0, 0, 0)] * vv[0] * vv[0] + 2 * gam[(0, 0, 1)] * vv[0] * vv[1]
               + gam[(0, 1, 1)] * vv[1] * vv[1])
        a1 = -(gam[(1, 0, 0)] * vv[0] * vv[0] + 2 * gam[(1, 0, 1)] * vv[0] * vv[1]
               + gam[(1, 1, 1)] * vv[1] * vv[1])
        return np.array([float(a0), float(a1)])

    blowup = False
    speed = float(np.hypot(v[0], v[1]))
    while t < t_max:
        speed = float(np.hypot(v[0], v[1]))
        if speed >= tol.velocity_blowup:
            blowup = True
            break
        h = step / max(1.0, speed) if adaptive else step
        if not adaptive and speed * step > 0.25:
            raise StepTooLarge(
                f"geodesic speed {speed:.3g} outruns fixed step {step:.1e}; "
                "enable adaptive stepping")
        h = min(h, t_max - t)
        k1x, k1v = v, acc(x, v)
        k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += h
    return {"reached": t, "blowup": blowup, "final_speed": speed}
