"""Energy bookkeeping and structure checks.

The discrete energy of a state (u, phi) is

    E = 1/2 ||e[u] - phi||_C^2 + alpha/2 ||phi||^2 - l(u)

with ||X||_C^2 the elasticity inner product of X with itself, ||.|| the
plain tensor L2 norm and l the load functional. All three pieces are exact:
the integrands are piecewise constant, and l against a P1 field is a dot
product with the assembled load vector.

Two structural identities of the scheme are checked here. Per step,

    (E^k - E^{k-1})/tau  +  alpha*tau/2 ||dphi||^2  +  tau/2 ||d(e-phi)||_C^2
        =  - eta ||dphi||^2

with dX the backward difference quotient; energy_identity_residual returns
the absolute defect. And the update is the gradient flow of the reduced
energy E*(phi) = min_u E(u, phi): for any direction psi,

    eta (dphi, psi)  =  - dE*(phi)[psi]

gradient_flow_check confronts the left side with a central difference of
E* (two fresh constrained solves per direction; E* is quadratic in phi, so
the central difference is exact up to roundoff) and also with the closed
form dE*(phi)[psi] = (alpha*phi - sigma[u(phi), phi], psi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import load_vector
from .fields import BoundaryData, strain_field
from .mesh import Mesh, MeshGeometry
from .solver import SolverSettings
from .tensors import Material, apply_C, ddot, stress

_COMPONENTS = {(1, 1): 0, (2, 2): 1, (1, 2): 2, (2, 1): 2}


@dataclass(frozen=True)
class EnergyReport:
    """Energy split: total = elastic + relax - work, recomposed exactly."""

    total: float
    elastic: float
    relax: float
    work: float
    identity_residual: float = 0.0


def psi_inner(geom: MeshGeometry, X, Y) -> float:
    """L2 inner product of two P0 tensor fields."""
    return float(np.dot(geom.areas, ddot(X, Y)))


def c_inner_field(geom: MeshGeometry, m: Material, X, Y) -> float:
    """Elasticity-weighted L2 inner product of two P0 tensor fields."""
    return float(np.dot(geom.areas, ddot(apply_C(m, X), Y)))


def work_functional(geom: MeshGeometry, bd: BoundaryData, u, load=None) -> float:
    """The load functional l(u) = (f, u) + (q, u) on GAMMA1 (exact for P1 u)."""
    if load is None:
        load = load_vector(geom, bd)
    return float(load @ np.asarray(u, dtype=float).ravel())


def energy(geom: MeshGeometry, m: Material, u, phi, bd: BoundaryData, load=None) -> EnergyReport:
    e = strain_field(geom, u)
    gap = e - np.asarray(phi, dtype=float)
    elastic = 0.5 * c_inner_field(geom, m, gap, gap)
    relax = 0.5 * m.alpha * psi_inner(geom, phi, phi)
    work = work_functional(geom, bd, u, load=load)
    return EnergyReport(total=elastic + relax - work, elastic=elastic, relax=relax, work=work)


def energy_identity_terms(geom: MeshGeometry, m: Material, tau: float, prev, curr):
    """The four pieces of the per-step energy identity.

    Returns (dE, visc, relax_extra, elastic_extra): the difference quotient
    of the energy and the three nonnegative dissipation terms. The identity
    states dE + relax_extra + elastic_extra = -visc.
    """
    dphi = (curr.phi - prev.phi) / tau
    gap_curr = strain_field(geom, curr.u) - curr.phi
    gap_prev = strain_field(geom, prev.u) - prev.phi
    dgap = (gap_curr - gap_prev) / tau
    dE = (curr.energy - prev.energy) / tau
    visc = m.eta * psi_inner(geom, dphi, dphi)
    relax_extra = 0.5 * m.alpha * tau * psi_inner(geom, dphi, dphi)
    elastic_extra = 0.5 * tau * c_inner_field(geom, m, dgap, dgap)
    return dE, visc, relax_extra, elastic_extra


def energy_identity_residual(geom: MeshGeometry, m: Material, tau: float, prev, curr) -> float:
    """Absolute defect of the per-step energy identity for a state pair."""
    dE, visc, relax_extra, elastic_extra = energy_identity_terms(geom, m, tau, prev, curr)
    return abs(dE + relax_extra + elastic_extra + visc)


def scheme_residual(m: Material, step, e, phi, phi_prev) -> float:
    """Max elementwise residual of the implicit tensor update.

    The update solves eta*dphi + alpha*phi - sigma[u, phi] = 0 exactly by
    construction, so anything beyond roundoff indicates a broken step.
    """
    resid = (
        (m.eta / step.tau) * (np.asarray(phi) - np.asarray(phi_prev))
        + m.alpha * np.asarray(phi)
        - stress(m, e, phi)
    )
    return float(np.abs(resid).max())


def stress_components_linf(geom: MeshGeometry, m: Material, u, phi) -> np.ndarray:
    """Elementwise max of |sigma_xx|, |sigma_yy|, |sigma_xy| (exact for P0)."""
    sigma = stress(m, strain_field(geom, u), phi)
    return np.abs(sigma).max(axis=0)


def stress_linf(geom: MeshGeometry, m: Material, u, phi, component=(1, 1)) -> float:
    key = tuple(int(c) for c in component)
    if key not in _COMPONENTS:
        raise ValueError(f"unknown stress component {component}, expected pairs from (1,1),(2,2),(1,2)")
    return float(stress_components_linf(geom, m, u, phi)[_COMPONENTS[key]])


# ---------------------------------------------------------------------------
# gradient-flow structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GradientFlowCheck:
    flow_error: float        # |eta (dphi, psi) + dE*[psi]| relative
    derivative_error: float  # closed-form derivative vs central difference
    central_difference: float


def random_direction(geom: MeshGeometry, rng) -> np.ndarray:
    """Random P0 tensor direction, normalized in the tensor L2 norm."""
    psi = rng.standard_normal((geom.mesh.n_triangles, 3))
    return psi / np.sqrt(psi_inner(geom, psi, psi))


def gradient_flow_check(
    mesh: Mesh,
    m: Material,
    bd: BoundaryData,
    tau: float,
    phi: np.ndarray,
    phi_prev: np.ndarray,
    direction: np.ndarray,
    eps: float = 1e-5,
    geom: MeshGeometry | None = None,
    settings: SolverSettings | None = None,
    x0=None,
) -> GradientFlowCheck:
    """Check the gradient-flow identity for one consecutive pair (phi_prev, phi).

    Each evaluation of the reduced energy runs a fresh constrained solve;
    nothing from the forward run is reused except the optional initial
    guess x0 handed to the iterative solver.
    """
    from .stepper import equilibrium_solve  # deferred to avoid a module cycle

    geom = geom if geom is not None else MeshGeometry(mesh)
    psi = np.asarray(direction, dtype=float)
    load = load_vector(geom, bd)

    def reduced_energy(tensor_field):
        u = equilibrium_solve(mesh, m, tensor_field, bd, geom=geom, settings=settings, x0=x0)
        return energy(geom, m, u, tensor_field, bd, load=load).total

    e_plus = reduced_energy(phi + eps * psi)
    e_minus = reduced_energy(phi - eps * psi)
    cd = (e_plus - e_minus) / (2.0 * eps)

    flow_lhs = (m.eta / tau) * psi_inner(geom, np.asarray(phi) - np.asarray(phi_prev), psi)

    u_at_phi = equilibrium_solve(mesh, m, phi, bd, geom=geom, settings=settings, x0=x0)
    sigma = stress(m, strain_field(geom, u_at_phi), phi)
    derivative = psi_inner(geom, m.alpha * np.asarray(phi) - sigma, psi)

    denom = max(1.0, abs(cd))
    return GradientFlowCheck(
        flow_error=abs(flow_lhs + cd) / denom,
        derivative_error=abs(derivative - cd) / denom,
        central_difference=cd,
    )


# ---------------------------------------------------------------------------
# whole-run verification (used by the CLI --verify flag)
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    monotone_ok: bool
    identity_ok: bool
    scheme_ok: bool
    gradient_ok: bool
    max_identity: float
    max_scheme: float
    max_gradient: float
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.monotone_ok and self.identity_ok and self.scheme_ok and self.gradient_ok


def verify_result(
    result,
    directions: int = 10,
    eps: float = 1e-5,
    seed: int = 0,
    monotone_slack: float = 1e-10,
    identity_tol: float = 1e-8,
    scheme_tol: float = 1e-12,
    gradient_tol: float = 1e-4,
) -> VerificationReport:
    """Structural checks on a finished run (see RunResult in the stepper).

    Gradient-flow checks run on the consecutive pairs the run sampled; the
    other checks cover every step.
    """
    cfg = result.config
    m = cfg.material
    geom = MeshGeometry(result.mesh)
    messages = []

    E = result.energy
    slack = monotone_slack * np.maximum(1.0, np.abs(E[:-1]))
    rises = np.flatnonzero(E[1:] > E[:-1] + slack)
    monotone_ok = rises.size == 0
    if not monotone_ok:
        k = int(rises[0]) + 1
        messages.append(f"energy rises at step {k}: {E[k - 1]:.12e} -> {E[k]:.12e}")

    scale = np.maximum(1.0, np.abs(E[1:]))
    max_identity = float((result.identity_residual[1:] / scale).max()) if len(E) > 1 else 0.0
    identity_ok = max_identity <= identity_tol
    if not identity_ok:
        messages.append(f"energy identity residual {max_identity:.3e} exceeds {identity_tol:.1e}")

    max_scheme = float(result.scheme_residual.max())
    scheme_ok = max_scheme <= scheme_tol
    if not scheme_ok:
        messages.append(f"tensor update residual {max_scheme:.3e} exceeds {scheme_tol:.1e}")

    rng = np.random.default_rng(seed)
    max_gradient = 0.0
    gradient_ok = True
    for k, (phi_prev, state) in sorted(result.sampled_pairs.items()):
        for _ in range(directions):
            psi = random_direction(geom, rng)
            check = gradient_flow_check(
                result.mesh, m, cfg.bc, cfg.tau, state.phi, phi_prev, psi,
                eps=eps, geom=geom, x0=state.u.ravel(),
            )
            worst = max(check.flow_error, check.derivative_error)
            if worst > max_gradient:
                max_gradient = worst
            if worst > gradient_tol:
                gradient_ok = False
                messages.append(f"gradient-flow check failed at step {k}: {worst:.3e}")
                break

    return VerificationReport(
        monotone_ok=monotone_ok,
        identity_ok=identity_ok,
        scheme_ok=scheme_ok,
        gradient_ok=gradient_ok,
        max_identity=max_identity,
        max_scheme=max_scheme,
        max_gradient=max_gradient,
        messages=messages,
    )
