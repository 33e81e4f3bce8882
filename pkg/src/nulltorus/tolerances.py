"""Default numeric policy, overridable per call or via CLI config.

The three-tier scheme: algebraic identities are checked at 1e-12, quantities
obtained through differentiation or quadrature at 1e-6, and line-closedness
at 1e-9 (with an explicit Inconclusive band up to 1e-6 — see
``nullflow.classify_line``).
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = 1e-12
    differential: float = 1e-6
    closedness: float = 1e-9
    closedness_reject: float = 1e-6   # displacements above this are "open"
    holonomy_boost: float = 1e-8
    resonance: float = 1e-10          # per-sample displacement on resonant cylinders
    rational_cap: int = 10_000        # max denominator for rational detection
    rational_residual_flow: float = 1e-6   # |rho - p/q| accepted from flow data
    rational_residual_solver: float = 1e-9  # accepted when classifying ratios
    bisection: float = 1e-10          # isolated-zero refinement
    fd_step: float = 1e-5             # central differences for pointwise derivatives
    ode_step: float = 1e-3            # fixed RK4 step (transversal coordinate)
    scan_step: float = 2.5e-4         # refined step for resonance/displacement scans
    velocity_blowup: float = 1e8      # geodesic incompleteness certificate
    scf_accept: float = 1e-6          # loop-integral route: |mean div| below -> certify
    scf_reject: float = 1e-4          # above -> obstructed; between -> Inconclusive
    scf_certificate: float = 1e-8     # grid divergence residual a certified field must meet

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT = Tolerances()
