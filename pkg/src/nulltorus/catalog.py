"""Built-in example metrics and the config/shorthand loaders the CLI uses.

Everything here is constructed from a handful of closed-form ingredients so
tests have exact reference values:

* ``analex(c)`` — the closed diagonal metric with
  lam1 = 1 - cos(2*pi*(x1 - x2 + 1/4))/10 and lam2 = lam1 - c.  For c = 2 the
  mean coefficients are exactly (1, -1), lam2 < 0 (the canonical frame's
  signed-slope convention handles this), the X-lines are all closed with
  winding (1, -1), and the Y-family carries two isolated closed lines along
  which null geodesics are incomplete.
* ``analex_sanchez(c)`` — the same surface presented in Sanchez form via
  x = (x1 - x2)/2, y = (x1 + x2)/2 (so E, F, G are functions of x alone and
  G has simple zeros).
* ``rosatau_window(...)`` — tau supported in [0.15, 0.45] with a single
  transverse zero at 0.3; the complement of the support is a resonant strip
  of closed vertical lines, and the line at 0.3 is a closed incomplete
  geodesic.
* ``closed_diagonal_wave(...)`` — lam1 = b1 + a*cos(2*pi*(k x1 + l x2)),
  lam2 = b2 - a*(l/k)*cos(2*pi*(k x1 + l x2)); closed for every (k != 0, l),
  with mean coefficients exactly (b1, b2).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConfigError
from .geometry import (ClosedDiagonal, ConformalRescale, LeftInvariant,
                       MetricSpec, RosaTau, Sanchez)
from .gridtools import mollifier, torus_delta

TWO_PI = 2.0 * math.pi


def flat(grid_n: int = 256) -> LeftInvariant:
    return LeftInvariant(1, 1, grid_n=grid_n)


def left_invariant(lam1, lam2, grid_n: int = 256) -> LeftInvariant:
    return LeftInvariant(lam1, lam2, grid_n=grid_n)


def _analex_profile():
    def f(u):
        return np.cos(TWO_PI * (u + 0.25)) / 10.0 - 1.0

    def df(u):
        return -TWO_PI * np.sin(TWO_PI * (u + 0.25)) / 10.0

    return f, df


def analex(c: float = 2.0, grid_n: int = 256) -> ClosedDiagonal:
    f, df = _analex_profile()
    lam1 = lambda x1, x2: -f(x1 - x2)
    lam2 = lambda x1, x2: -f(x1 - x2) - c
    d1l1 = lambda x1, x2: -df(x1 - x2)
    d2l1 = lambda x1, x2: df(x1 - x2)
    return ClosedDiagonal(lam1, lam2, dlam=(d1l1, d2l1, d1l1, d2l1),
                          grid_n=grid_n)


def analex_sanchez(c: float = 2.0, grid_n: int = 256) -> Sanchez:
    f, _ = _analex_profile()

    def E(x):
        return 2.0 * c * f(2.0 * x) + c * c

    def F(x):
        fv = f(2.0 * x)
        return -(fv * fv + (fv + c) ** 2)

    def G(x):
        return -E(x)

    # G(x) = 0 where f(2x) = -c/2, i.e. cos(2 pi (2x + 1/4)) = 10(1 - c/2).
    rhs = 10.0 * (1.0 - c / 2.0)
    if abs(rhs) >= 1:
        zeros: tuple[float, ...] = ()
    else:
        t = math.acos(rhs) / TWO_PI   # 2x + 1/4 = +-t (mod 1)
        xs = set()
        for base in (t, -t):
            for k in range(4):
                xs.add(round(((base - 0.25 + k) / 2.0) % 1.0, 12))
        zeros = tuple(sorted(xs))
    return Sanchez(E, F, G, zeros=zeros, grid_n=grid_n)


def rosatau_window(support: tuple[float, float] = (0.15, 0.45),
                   zero: float = 0.3, amplitude: float = 1.0,
                   grid_n: int = 256) -> RosaTau:
    lo, hi = support
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    def window(x):
        return mollifier(torus_delta(x, mid) / half)

    def dwindow(x):
        t = torus_delta(x, mid) / half
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        out[inside] = (np.exp(1.0 - 1.0 / (1.0 - ti * ti))
                       * (-2.0 * ti / (1.0 - ti * ti) ** 2) / half)
        return out

    def tau(x):
        return amplitude * window(x) * torus_delta(x, zero)

    def dtau(x):
        return amplitude * (dwindow(x) * torus_delta(x, zero) + window(x))

    return RosaTau(tau, dtau=dtau, grid_n=grid_n)


def closed_diagonal_wave(base1: float, base2: float, amp: float = 0.1,
                         k: int = 1, l: int = 1, grid_n: int = 256) -> ClosedDiagonal:
    if k == 0:
        raise ConfigError("closed_diagonal_wave needs k != 0")
    ratio = l / k

    def phase(x1, x2):
        return TWO_PI * (k * x1 + l * x2)

    lam1 = lambda x1, x2: base1 + amp * np.cos(phase(x1, x2))
    lam2 = lambda x1, x2: base2 - amp * ratio * np.cos(phase(x1, x2))
    d1l1 = lambda x1, x2: -amp * TWO_PI * k * np.sin(phase(x1, x2))
    d2l1 = lambda x1, x2: -amp * TWO_PI * l * np.sin(phase(x1, x2))
    d1l2 = lambda x1, x2: amp * ratio * TWO_PI * k * np.sin(phase(x1, x2))
    d2l2 = lambda x1, x2: amp * ratio * TWO_PI * l * np.sin(phase(x1, x2))
    return ClosedDiagonal(lam1, lam2, dlam=(d1l1, d2l1, d1l2, d2l2),
                          grid_n=grid_n)


def exp_sine_factor(amp: float = 0.3, k: int = 1, l: int = 1,
                    phase: float = 0.0) -> Callable:
    def factor(x1, x2):
        return np.exp(amp * np.sin(TWO_PI * (k * x1 + l * x2) + phase))
    return factor


def conformal(inner: MetricSpec, factor: Callable,
              grid_n: int | None = None) -> ConformalRescale:
    return ConformalRescale(inner, factor, grid_n=grid_n or inner.grid_n)


# ---------------------------------------------------------------------------
# config / shorthand parsing


def _num(text: str):
    """Parse '3', '3/2', '1.5', 'sqrt2' — exact types where possible."""
    text = text.strip()
    if text == "sqrt2":
        return math.sqrt(2.0)
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


def from_shorthand(text: str, grid_n: int = 256) -> MetricSpec:
    """Parse CLI shorthand like 'flat', 'left_invariant:1,2', 'analex:c=2'."""
    name, _, argstr = text.partition(":")
    kwargs: dict = {}
    positional: list = []
    if argstr:
        for piece in argstr.split(","):
            if "=" in piece:
                key, val = piece.split("=", 1)
                kwargs[key.strip()] = _num(val)
            else:
                positional.append(_num(piece))
    try:
        if name == "flat":
            return flat(grid_n=grid_n)
        if name == "left_invariant":
            return left_invariant(*positional, grid_n=grid_n, **kwargs)
        if name == "analex":
            return analex(*positional, grid_n=grid_n, **kwargs)
        if name == "analex_sanchez":
            return analex_sanchez(*positional, grid_n=grid_n, **kwargs)
        if name == "rosatau":
            return rosatau_window(grid_n=grid_n, **kwargs)
        if name == "closed_diagonal":
            return closed_diagonal_wave(*positional, grid_n=grid_n, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad arguments for metric {name!r}: {exc}") from exc
    raise ConfigError(f"unknown metric shorthand {text!r}")


def from_config(config: dict) -> MetricSpec:
    """Build a metric from the JSON config schema {family, params, grid_n}."""
    if not isinstance(config, dict) or "family" not in config:
        raise ConfigError("metric config must be an object with a 'family' key")
    family = config["family"]
    params = dict(config.get("params", {}))
    grid_n = int(config.get("grid_n", 256))
    if family == "left_invariant":
        try:
            lam1 = params.pop("lam1")
            lam2 = params.pop("lam2")
        except KeyError as exc:
            raise ConfigError("left_invariant needs params lam1, lam2") from exc
        lam1 = _num(str(lam1)) if isinstance(lam1, str) else lam1
        lam2 = _num(str(lam2)) if isinstance(lam2, str) else lam2
        return left_invariant(lam1, lam2, grid_n=grid_n)
    if family == "flat":
        return flat(grid_n=grid_n)
    if family == "analex":
        return analex(c=float(params.pop("c", 2.0)), grid_n=grid_n)
    if family == "analex_sanchez":
        return analex_sanchez(c=float(params.pop("c", 2.0)), grid_n=grid_n)
    if family == "rosatau":
        kwargs = {}
        if "support" in params:
            kwargs["support"] = tuple(params.pop("support"))
        for key in ("zero", "amplitude"):
            if key in params:
                kwargs[key] = float(params.pop(key))
        return rosatau_window(grid_n=grid_n, **kwargs)
    if family == "closed_diagonal":
        return closed_diagonal_wave(
            base1=float(params.pop("base1")), base2=float(params.pop("base2")),
            amp=float(params.pop("amp", 0.1)), k=int(params.pop("k", 1)),
            l=int(params.pop("l", 1)), grid_n=grid_n)
    if family == "conformal_rescale":
        inner = from_config(params.pop("inner"))
        fac = params.pop("factor", {})
        factor = exp_sine_factor(amp=float(fac.get("amp", 0.3)),
                                 k=int(fac.get("k", 1)), l=int(fac.get("l", 1)),
                                 phase=float(fac.get("phase", 0.0)))
        return conformal(inner, factor, grid_n=grid_n)
    raise ConfigError(f"unknown metric family {family!r}")


def load_metric(source: str | dict, grid_n: int | None = None) -> MetricSpec:
    """Accept shorthand text, a JSON object, or a path to a JSON file."""
    if isinstance(source, dict):
        return from_config(source)
    text = source.strip()
    if text.startswith("{"):
        return from_config(json.loads(text))
    if text.endswith(".json"):
        with open(text) as fh:
            return from_config(json.load(fh))
    return from_shorthand(text, grid_n=grid_n or 256)
