"""Half-spinor fields on the torus and the kernel solvers.

Fields are stored through their periodic representative: a complex grid h
with the actual section being eps_a * h * u_c (u_c the chiral basis spinor,
eps_a the spin-structure twist).  All derivatives on grids are spectral.

Exact solvers:

* ``solve_left_invariant`` reduces the transport equation to a Diophantine
  condition on Fourier modes (the connection form vanishes identically for
  constant coefficients).
* ``solve_closed_diagonal`` builds the phase family exp(i pi alpha G) where
  G combines four explicit quadratures of the metric coefficients; the
  admissible alphas come from a congruence on the winding of the closed
  null lines.
* ``construct_resonant_spinors`` produces bump-localized kernel elements
  with pairwise disjoint supports on resonant cylinders (first-integral
  bump trains for closed diagonal metrics, vertical-band bumps for the
  pp-wave family, conformal pushforward through a rescaling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import geometry, nullflow, spin
from .errors import (DenseFlow, NotHarmonic, NotSCF, NotXTrivial,
                     UnsupportedFamily, WrongFamily)
from .gridtools import (TrigSeries2, grid_points, mollifier,
                        spectral_derivatives, torus_delta, wrap_unit)
from .spin import GAMMA1, GAMMA2, SpinStructure
from .tolerances import DEFAULT, Tolerances


# ---------------------------------------------------------------------------
# field containers


@dataclass
class HalfSpinorField:
    """Chiral half of a spinor field, stored as its periodic representative.

    ``chirality`` +1 means the section is eps_a * values * u1 (positive
    chiral line, the one annihilated by gamma(X)), -1 the u2 line.
    ``values`` lives on the uniform n x n grid with x_i = j/n.
    """

    spec: object
    structure: SpinStructure
    chirality: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    _series: Optional[TrigSeries2] = field(default=None, repr=False,
                                           compare=False)

    def __post_init__(self):
        if self.chirality not in (-1, 1):
            raise ValueError("chirality must be +1 or -1")
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    def series(self) -> TrigSeries2:
        if self._series is None:
            self._series = TrigSeries2.from_samples(self.values)
        return self._series

    def at(self, x1, x2) -> np.ndarray:
        """Periodic representative, trig-interpolated off the grid."""
        return self.series()(x1, x2)

    def section_at(self, x1, x2) -> np.ndarray:
        """Value of the actual (twisted) section's scalar coefficient."""
        return self.structure.twist(x1, x2) * self.at(x1, x2)

    def scaled(self, factor) -> "HalfSpinorField":
        return HalfSpinorField(self.spec, self.structure, self.chirality,
                               self.values * factor, dict(self.meta))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass
class SpinorField:
    """Full spinor field: positive (u1) and negative (u2) halves."""

    positive: HalfSpinorField
    negative: HalfSpinorField

    def __post_init__(self):
        if self.negative.chirality != -1 or self.positive.chirality != 1:
            raise ValueError("components attached to the wrong chiral lines")
        if self.negative.values.shape != self.positive.values.shape:
            raise ValueError("component grids disagree")

    @property
    def spec(self):
        return self.positive.spec

    @property
    def structure(self) -> SpinStructure:
        return self.positive.structure

    @property
    def grid_n(self) -> int:
        return self.positive.grid_n

    def component_grids(self) -> np.ndarray:
        """(2, n, n) array ordered (positive, negative) = (u1, u2) rows."""
        return np.stack([self.positive.values, self.negative.values])


def constant_field(spec, structure: SpinStructure, chirality: int = 1,
                   value: complex = 1.0, grid_n: int = 64) -> HalfSpinorField:
    vals = np.full((grid_n, grid_n), value, dtype=complex)
    return HalfSpinorField(spec, structure, chirality, vals,
                           meta={"kind": "constant"})


def fourier_mode_field(spec, structure: SpinStructure, mode: tuple[int, int],
                       chirality: int = 1, grid_n: int = 64) -> HalfSpinorField:
    k, l = mode
    X1, X2 = grid_points(grid_n)
    vals = np.exp(2j * np.pi * (k * X1 + l * X2))
    return HalfSpinorField(spec, structure, chirality, vals,
                           meta={"kind": "mode", "mode": (k, l)})


def zero_like(f: HalfSpinorField, chirality: Optional[int] = None
              ) -> HalfSpinorField:
    return HalfSpinorField(f.spec, f.structure,
                           chirality if chirality is not None else f.chirality,
                           np.zeros_like(f.values))


def embed(f: HalfSpinorField) -> SpinorField:
    """Pad a half-spinor with a zero opposite component."""
    if f.chirality == 1:
        return SpinorField(negative=zero_like(f, -1), positive=f)
    return SpinorField(negative=f, positive=zero_like(f, 1))


# ---------------------------------------------------------------------------
# covariant operators on grids


def _direction_grids(spec, direction, n: int):
    """Coordinate components of a direction on the n x n grid.

    Accepts 'X'/'Y'/'s1'/'s2', a VectorField, a (v1, v2) pair of callables,
    constants, or grids.
    """
    if isinstance(direction, str):
        a1, a2, b1, b2 = geometry.frame_grids(spec, n)
        if direction == "X":
            return a1 + b1, a2 + b2
        if direction == "Y":
            return -a1 + b1, -a2 + b2
        if direction == "s1":
            return a1, a2
        if direction == "s2":
            return b1, b2
        raise ValueError(f"unknown direction {direction!r}")
    if isinstance(direction, geometry.VectorField):
        X1, X2 = grid_points(n)
        v1, v2 = direction.at(X1, X2)
        shape = (n, n)
        return (np.broadcast_to(np.asarray(v1, dtype=float), shape),
                np.broadcast_to(np.asarray(v2, dtype=float), shape))
    v1, v2 = direction
    if callable(v1):
        X1, X2 = grid_points(n)
        v1, v2 = v1(X1, X2), v2(X1, X2)
    shape = (n, n)
    return (np.broadcast_to(np.asarray(v1, dtype=float), shape),
            np.broadcast_to(np.asarray(v2, dtype=float), shape))


def nabla_along(f: HalfSpinorField, direction) -> HalfSpinorField:
    """Covariant derivative of the half-spinor along a direction field.

    Acts on the periodic representative as
    dh(V) + (chirality/2 * Gamma(V) + omega_a(V)) h.
    """
    n = f.grid_n
    v1, v2 = _direction_grids(f.spec, direction, n)
    d1, d2 = spectral_derivatives(f.values)
    G1, G2 = geometry.connection_one_form_grids(f.spec, n)
    gam = v1 * G1 + v2 * G2
    tw = f.structure.twist_form(v1, v2)
    vals = v1 * d1 + v2 * d2 + (0.5 * f.chirality * gam + tw) * f.values
    return HalfSpinorField(f.spec, f.structure, f.chirality, vals)


def dirac_apply(phi: Union[SpinorField, HalfSpinorField]) -> SpinorField:
    """Dirac operator D = -gamma(s1) nabla_1 + gamma(s2) nabla_2.

    In chiral components: (D phi)^- = i nabla_X phi^+ and
    (D phi)^+ = i nabla_Y phi^-, so the positive kernel is exactly the
    X-parallel line and the negative kernel the Y-parallel one.
    """
    psi = embed(phi) if isinstance(phi, HalfSpinorField) else phi
    neg_out = nabla_along(psi.positive, "X").values * 1j
    pos_out = nabla_along(psi.negative, "Y").values * 1j
    return SpinorField(
        negative=HalfSpinorField(psi.spec, psi.structure, -1, neg_out),
        positive=HalfSpinorField(psi.spec, psi.structure, 1, pos_out))


def twistor_apply(phi: Union[SpinorField, HalfSpinorField]
                  ) -> tuple[SpinorField, SpinorField]:
    """Both frame components of the Penrose operator.

    P_i phi = nabla_{s_i} phi + 1/2 gamma(s_i) D phi (the gamma-trace-free
    part of nabla); a half-spinor of chirality c is in the twistor kernel
    exactly when its transport along the chirality's *opposite* null family
    vanishes (X for negative, Y for positive).
    """
    psi = embed(phi) if isinstance(phi, HalfSpinorField) else phi
    dpsi = dirac_apply(psi).component_grids()
    out = []
    for direction, gam_mat in (("s1", GAMMA1), ("s2", GAMMA2)):
        grad = np.stack([nabla_along(psi.positive, direction).values,
                         nabla_along(psi.negative, direction).values])
        corr = 0.5 * np.einsum("ab,b...->a...", gam_mat, dpsi)
        comp = grad + corr
        out.append(SpinorField(
            positive=HalfSpinorField(psi.spec, psi.structure, 1, comp[0]),
            negative=HalfSpinorField(psi.spec, psi.structure, -1, comp[1])))
    return out[0], out[1]


def residual_norm(phi: Union[SpinorField, HalfSpinorField],
                  operator: str = "harmonic", norm: str = "sup") -> float:
    """Size of the field's defect under the named equation.

    harmonic: Dirac kernel residual; twistor: Penrose kernel residual
    (max over the two frame components); transport: plain nabla along the
    chirality's own null family (X for positive, Y for negative).
    """
    def reduce(arrs) -> float:
        stacked = np.concatenate([np.abs(np.asarray(a)).ravel() for a in arrs])
        if norm == "sup":
            return float(stacked.max())
        if norm == "l2":
            return float(np.sqrt(np.mean(stacked ** 2)))
        raise ValueError(f"unknown norm {norm!r}")

    if operator == "harmonic":
        d = dirac_apply(phi)
        return reduce([d.negative.values, d.positive.values])
    if operator == "twistor":
        p1, p2 = twistor_apply(phi)
        return reduce([p1.negative.values, p1.positive.values,
                       p2.negative.values, p2.positive.values])
    if operator == "transport":
        psi = embed(phi) if isinstance(phi, HalfSpinorField) else phi
        arrs = []
        if np.any(psi.positive.values):
            arrs.append(nabla_along(psi.positive, "X").values)
        if np.any(psi.negative.values):
            arrs.append(nabla_along(psi.negative, "Y").values)
        return reduce(arrs) if arrs else 0.0
    raise ValueError(f"unknown operator {operator!r}")


# ---------------------------------------------------------------------------
# left-invariant solver (Fourier / Diophantine)


@dataclass(frozen=True)
class LatticeLine:
    """Solution set {base + t * direction, t integer} in the mode lattice."""
    base: tuple[int, int]
    direction: tuple[int, int]

    def mode(self, t: int) -> tuple[int, int]:
        return (self.base[0] + t * self.direction[0],
                self.base[1] + t * self.direction[1])


@dataclass(frozen=True)
class HarmonicSolution:
    structure: SpinStructure
    family: str
    chirality: int
    count_class: str                       # "Zero" | "One" | "Infinite"
    ratio: Optional[Fraction]              # lam1/lam2 when rational
    exact: bool                            # ratio obtained without rounding
    congruence_obstructed: bool
    modes: tuple[tuple[int, int], ...]
    lattice: Optional[LatticeLine]
    fields: tuple[HalfSpinorField, ...]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, u, v) with u*a + v*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _rational_ratio(spec, tol: Tolerances) -> tuple[Optional[Fraction], bool]:
    """(lam1/lam2 as a Fraction or None, exactness flag)."""
    exact = spec.exact_ratio()
    if exact is not None:
        return exact, True
    val = float(spec.lam1) / float(spec.lam2)
    cand = Fraction(val).limit_denominator(tol.rational_cap)
    if abs(val - float(cand)) < tol.rational_residual_solver:
        return cand, False
    return None, False


def solve_left_invariant(spec, structure: SpinStructure, family: str = "X",
                         chirality: int = 1, n_fields: int = 4,
                         grid_n: int = 64, tol: Tolerances = DEFAULT
                         ) -> HarmonicSolution:
    """Kernel of the null transport equation for constant coefficients.

    The connection form vanishes, so the Fourier mode (k, l) is parallel
    along the family exactly when

        (4k + 1 - a1) * lam2  +-  (4l + 1 - a2) * lam1 = 0

    (+ for the X family, - for Y).  With lam1/lam2 = p/q in lowest terms the
    condition is solvable iff q(1-a1) + p(1-a2) = 0 mod 4, equivalently the
    structure's character on the closed-line winding is +1; the solutions
    then fill an affine line in the mode lattice (infinite dimension).  An
    irrational ratio admits only the constant section of the trivial
    structure.
    """
    if not isinstance(spec, geometry.LeftInvariant):
        raise WrongFamily("solve_left_invariant needs a LeftInvariant metric; "
                          f"got {type(spec).__name__}")
    if family not in ("X", "Y"):
        raise ValueError(f"family must be 'X' or 'Y', got {family!r}")
    c1, c2 = 1 - structure.a1, 1 - structure.a2
    ratio, exact = _rational_ratio(spec, tol)

    if ratio is None:
        if structure.trivial:
            fields = (fourier_mode_field(spec, structure, (0, 0), chirality,
                                         grid_n),)
            return HarmonicSolution(structure, family, chirality, "One",
                                    None, False, False, ((0, 0),), None,
                                    fields)
        return HarmonicSolution(structure, family, chirality, "Zero",
                                None, False, False, (), None, ())

    p, q = ratio.numerator, ratio.denominator
    sign = 1 if family == "X" else -1
    total = c1 * q + sign * c2 * p
    if total % 4 != 0:
        return HarmonicSolution(structure, family, chirality, "Zero",
                                ratio, exact, True, (), None, ())
    m = total // 4
    # solve k*q + sign*l*p = -m on the integer lattice
    g, u, v = _egcd(q, sign * p)
    assert g == 1
    base = (-m * u, -m * v)
    direction = (sign * p, -q)
    lattice = LatticeLine(base, direction)
    # center the enumeration on the smallest modes
    ts = sorted(range(-2 * n_fields, 2 * n_fields + 1),
                key=lambda t: max(abs(lattice.mode(t)[0]),
                                  abs(lattice.mode(t)[1])))
    modes = tuple(lattice.mode(t) for t in ts[:max(n_fields, 8)])
    fields = tuple(fourier_mode_field(spec, structure, mode, chirality, grid_n)
                   for mode in modes[:n_fields]
                   if max(abs(mode[0]), abs(mode[1])) < grid_n // 2)
    return HarmonicSolution(structure, family, chirality, "Infinite",
                            ratio, exact, False, modes, lattice, fields)


# ---------------------------------------------------------------------------
# closed diagonal solver (phase family from quadratures)


@dataclass(frozen=True)
class ClosedDiagonalSolution:
    structure: SpinStructure
    chirality: int
    l1: float
    l2: float
    ratio: Optional[nullflow.RationalCertificate]
    solvable: bool
    congruence_obstructed: bool
    t_parity: Optional[int]
    alphas: tuple[float, ...]
    count_class: str
    fields: tuple[HalfSpinorField, ...]


def phase_exponent_grid(spec, n: int) -> np.ndarray:
    """G(x) = I1 + I1o - I3 - I4 on the grid, from four exact quadratures.

    I1 = int_0^{x1} lam1(s, x2) ds     I1o = int_0^{x1} lam1(s, 0) ds
    I3 = int_0^{x2} lam2(x1, s) ds     I4  = int_0^{x2} lam2(0, s) ds

    For closed diagonal coefficients G is twice the first integral; both
    routes are kept separate so they can check each other.
    """
    X1, X2 = grid_points(n)
    l1g, l2g = spec.lambdas(X1, X2)
    l1g = np.broadcast_to(np.asarray(l1g, dtype=float), (n, n))
    l2g = np.broadcast_to(np.asarray(l2g, dtype=float), (n, n))
    s1 = TrigSeries2.from_samples(l1g)
    m1, P1 = s1.antiderivative_x1()
    s2 = TrigSeries2.from_samples(l2g)
    m2, P2 = s2.antiderivative_x2()
    zeros = np.zeros_like(X1)

    def int1(x1, x2):
        return (x1 * m1(x2) + P1(x1, x2) - P1(zeros, x2)).real

    def int2(x1, x2):
        return (x2 * m2(x1) + P2(x1, x2) - P2(x1, zeros)).real

    i1 = int1(X1, X2)
    i1o = int1(X1, zeros)
    i3 = int2(X1, X2)
    i4 = int2(zeros, X2)
    return i1 + i1o - i3 - i4


def closed_diagonal_congruence(structure: SpinStructure, p: int, q: int
                               ) -> Optional[int]:
    """Parity t with t*p = (1-a1)/2 and t*q = (1-a2)/2 mod 2, if any."""
    r1, r2 = (1 - structure.a1) // 2, (1 - structure.a2) // 2
    for t in (0, 1):
        if (t * p - r1) % 2 == 0 and (t * q - r2) % 2 == 0:
            return t
    return None


def solve_closed_diagonal(spec, structure: SpinStructure, chirality: int = 1,
                          n_fields: int = 2, n_alphas: int = 8,
                          grid_n: Optional[int] = None,
                          tol: Tolerances = DEFAULT) -> ClosedDiagonalSolution:
    """Kernel of the X-transport equation on a closed diagonal metric.

    Kernel elements are the phases exp(i pi alpha G): G is constant along
    the X-lines, and alpha must make the phase equivariant for the
    structure.  With the closed-line rotation l1/l2 = p/q the admissible
    alphas are (t + 2Z) p / (2 l1) where the parity t solves the winding
    congruence; no parity works exactly when the structure's character on
    the winding is -1.
    """
    if not geometry.is_closed_diagonal(spec, tol):
        raise WrongFamily("solve_closed_diagonal requires closed diagonal "
                          "coefficients")
    n = grid_n or spec.grid_n
    l1, l2 = geometry.mean_coefficients(spec, tol)
    cert = nullflow.best_rational(l1 / l2, tol.rational_cap,
                                  tol.rational_residual_solver)
    if cert is None:
        if structure.trivial:
            fields = (constant_field(spec, structure, chirality, 1.0,
                                     min(n, 64)),)
            return ClosedDiagonalSolution(structure, chirality, l1, l2, None,
                                          True, False, None, (0.0,), "One",
                                          fields)
        return ClosedDiagonalSolution(structure, chirality, l1, l2, None,
                                      False, False, None, (), "Zero", ())
    p, q = cert.p, cert.q
    t = closed_diagonal_congruence(structure, p, q)
    if t is None:
        return ClosedDiagonalSolution(structure, chirality, l1, l2, cert,
                                      False, True, None, (), "Zero", ())
    ss = sorted(range(-n_alphas, n_alphas + 1), key=abs)[:n_alphas]
    alphas = tuple((t + 2 * s) * p / (2 * l1) for s in ss)
    G = phase_exponent_grid(spec, n)
    X1, X2 = grid_points(n)
    conj_twist = np.conj(structure.twist(X1, X2))
    fields = []
    for alpha in alphas[:n_fields]:
        vals = conj_twist * np.exp(1j * np.pi * alpha * G)
        fields.append(HalfSpinorField(spec, structure, chirality, vals,
                                      meta={"alpha": alpha}))
    return ClosedDiagonalSolution(structure, chirality, l1, l2, cert, True,
                                  False, t, alphas, "Infinite", tuple(fields))


# ---------------------------------------------------------------------------
# conformal rescaling of kernel fields


def conformal_map_spinor(f: HalfSpinorField, target, kind: str = "harmonic"
                         ) -> HalfSpinorField:
    """Move a kernel field through a conformal rescaling.

    For target metric lambda * g the Dirac kernel maps by lambda^(-1/4) and
    the twistor kernel by lambda^(+1/4); the map also works backwards (from
    the rescaled metric down to its base).
    """
    if kind == "harmonic":
        exponent = -0.25
    elif kind == "twistor":
        exponent = 0.25
    else:
        raise ValueError(f"kind must be 'harmonic' or 'twistor', got {kind!r}")
    X1, X2 = grid_points(f.grid_n)
    if isinstance(target, geometry.ConformalRescale) and target.inner == f.spec:
        lam = np.asarray(target.factor_at(X1, X2), dtype=float)
        power = exponent
    elif isinstance(f.spec, geometry.ConformalRescale) and f.spec.inner == target:
        lam = np.asarray(f.spec.factor_at(X1, X2), dtype=float)
        power = -exponent
    else:
        raise WrongFamily("target must be a conformal rescale of the field's "
                          "metric (or vice versa)")
    vals = np.broadcast_to(lam, f.values.shape) ** power * f.values
    out = HalfSpinorField(target, f.structure, f.chirality, vals,
                          meta=dict(f.meta))
    out.meta["conformal_weight"] = power
    return out


# ---------------------------------------------------------------------------
# localized kernel fields on resonant cylinders


def _closed_diagonal_bumps(spec, structure: SpinStructure, count: int,
                           grid_n: int, tol: Tolerances
                           ) -> tuple[HalfSpinorField, ...]:
    l1, l2 = geometry.mean_coefficients(spec, tol)
    cert = nullflow.best_rational(l1 / l2, tol.rational_cap,
                                  tol.rational_residual_solver)
    if cert is None:
        raise DenseFlow(f"X-lines are dense (rotation {l1 / l2:.9f} has no "
                        f"rational certificate); no resonant cylinder exists")
    record = nullflow.closed_line_through(spec, "X", 0.0, cert, tol=tol)
    hol = spin.holonomy_closed_line(spec, record, structure, tol=tol)
    if not hol.x_trivial:
        raise NotXTrivial(
            f"closed X-lines of winding {hol.winding} carry character "
            f"{hol.character} and boost {hol.boost:.3e} for structure "
            f"{structure.label}; transport admits no periodic solution")
    p, q = cert.p, cert.q
    g = l1 / p                       # first-integral shift of one line lattice
    D = abs(g)
    _, u, v = _egcd(p, q)            # u*p + v*q = 1
    psi = (structure.a1 if u % 2 else 1) * (structure.a2 if v % 2 else 1)
    first = nullflow.first_integral_function(spec)
    X1, X2 = grid_points(grid_n)
    F = first(X1, X2)
    conj_twist = np.conj(structure.twist(X1, X2))
    width = 0.4 * D / count
    fields = []
    for j in range(count):
        center = (j + 0.5) * D / count
        steps = (F - center) / D
        nearest = np.round(steps)
        arg = (steps - nearest) * D / width
        signs = np.where(nearest.astype(int) % 2 == 0, 1.0, float(psi))
        vals = conj_twist * signs * mollifier(arg)
        fields.append(HalfSpinorField(
            spec, structure, 1, vals,
            meta={"kind": "first-integral-bump", "center": center,
                  "width": width, "lattice_step": D, "lattice_sign": psi}))
    return tuple(fields)


def _vertical_band(spec, resolution: int = 4096) -> tuple[float, float]:
    """Widest arc of vanishing tau, as (lo, hi) with hi possibly > 1."""
    xs = np.arange(resolution) / resolution
    mask = np.abs(np.asarray(spec.tau_at(xs), dtype=float)) <= 1e-13
    runs = nullflow._circular_runs(mask) if np.any(mask) else []
    if not runs:
        raise UnsupportedFamily(
            "tau vanishes nowhere on the sampling grid; the vertical-band "
            "construction needs an interval of zeros")
    start, stop = max(runs, key=lambda r: r[1] - r[0])
    lo, hi = start / resolution, stop / resolution
    if hi - lo < 16 / resolution:
        raise UnsupportedFamily(
            f"widest zero arc of tau has width {hi - lo:.4f}; too narrow "
            "for localized sections")
    return lo, hi


def _rosatau_bumps(spec, structure: SpinStructure, count: int, grid_n: int,
                   tol: Tolerances) -> tuple[HalfSpinorField, ...]:
    lo, hi = _vertical_band(spec)
    mid = wrap_unit(0.5 * (lo + hi))
    record = nullflow.integrate_null_line(spec, (float(mid), 0.0), "X",
                                          t_max=1.0, tol=tol)
    hol = spin.holonomy_closed_line(spec, record, structure, tol=tol)
    if not hol.x_trivial:
        raise NotXTrivial(
            f"vertical closed lines (winding {hol.winding}) carry character "
            f"{hol.character} for structure {structure.label}; transport "
            "admits no periodic solution")
    usable = (hi - lo) * 0.9
    base = lo + 0.05 * (hi - lo)
    width = 0.4 * usable / count
    X1, X2 = grid_points(grid_n)
    fields = []
    for j in range(count):
        center = wrap_unit(base + (j + 0.5) * usable / count)
        vals = mollifier(torus_delta(X1, center) / width).astype(complex)
        fields.append(HalfSpinorField(
            spec, structure, 1, vals,
            meta={"kind": "vertical-band-bump", "center": float(center),
                  "width": width, "band": (lo, hi)}))
    return tuple(fields)


def construct_resonant_spinors(spec, structure: SpinStructure, count: int = 2,
                               grid_n: int = 512, tol: Tolerances = DEFAULT
                               ) -> tuple[HalfSpinorField, ...]:
    """Positive harmonic fields localized on resonant X-cylinders.

    Returns ``count`` kernel elements with pairwise disjoint supports —
    witnesses that the kernel dimension is infinite.  Requires closed
    X-lines whose spin transport is trivial for the structure
    (NotXTrivial otherwise).  Supported: closed diagonal coefficients
    (bump trains in the first integral), the pp-wave family (bumps across
    the vertical band where tau vanishes), and conformal rescalings of
    either (pushforward with weight lambda^(-1/4)).
    """
    if count < 1:
        raise ValueError("count must be positive")
    if isinstance(spec, geometry.ConformalRescale):
        inner = construct_resonant_spinors(spec.inner, structure, count,
                                           grid_n, tol)
        return tuple(conformal_map_spinor(f, spec, kind="harmonic")
                     for f in inner)
    if isinstance(spec, geometry.RosaTau):
        return _rosatau_bumps(spec, structure, count, grid_n, tol)
    if geometry.is_closed_diagonal(spec, tol):
        return _closed_diagonal_bumps(spec, structure, count, grid_n, tol)
    raise UnsupportedFamily(
        "localized resonant sections are implemented for closed diagonal "
        "coefficients, the pp-wave family, and conformal rescalings of "
        f"those; got {type(spec).__name__}")


# ---------------------------------------------------------------------------
# harmonic <-> twistor correspondence


def harmonic_twistor_iso(f: HalfSpinorField, certificate=None,
                         tol: Tolerances = DEFAULT) -> HalfSpinorField:
    """The kernel isomorphism between positive-harmonic and negative-twistor.

    Both kernels are cut out by transport along the X-family; they are
    exchanged by h -> -h / w (and its inverse h -> -w h), where w is the
    coefficient of a divergence-free section V = w X from the
    semi-conformal-flatness certificate.  Raises NotSCF when no certificate
    exists and NotHarmonic when the input does not solve its own equation.
    """
    if certificate is None:
        from .classify import semi_conformal_certificate
        certificate = semi_conformal_certificate(f.spec, family="X", tol=tol)
    res = residual_norm(f, "harmonic" if f.chirality == 1 else "twistor")
    if res > 100 * tol.differential:
        raise NotHarmonic(
            f"input field residual {res:.3e} exceeds tolerance; refusing to "
            "map a non-kernel field")
    n = f.grid_n
    X1, X2 = grid_points(n)
    v1, v2 = certificate.field.at(X1, X2)
    v1 = np.broadcast_to(np.asarray(v1, dtype=float), (n, n))
    v2 = np.broadcast_to(np.asarray(v2, dtype=float), (n, n))
    d1, d2 = geometry.null_direction_arrays(f.spec, X1, X2, "X")
    w = np.where(np.abs(d1) >= np.abs(d2),
                 v1 / np.where(np.abs(d1) >= np.abs(d2), d1, 1.0),
                 v2 / np.where(np.abs(d1) >= np.abs(d2), 1.0, d2))
    if f.chirality == 1:
        out = HalfSpinorField(f.spec, f.structure, -1, -f.values / w,
                              meta=dict(f.meta))
        out.meta["kind"] = "twistor-image"
    else:
        out = HalfSpinorField(f.spec, f.structure, 1, -f.values * w,
                              meta=dict(f.meta))
        out.meta["kind"] = "harmonic-image"
    return out
