"""Backward Euler time stepping for the viscoelastic model.

Each step solves one displacement system and then updates the internal
tensor field elementwise:

    solve   (C_eff e[u^k], e[v]) = (eta/tau * C R^-1 phi^{k-1}, e[v]) + l(v)
    update  phi^k = R^-1 (C e[u^k] + eta/tau * phi^{k-1})

R is the per-element step operator (eta/tau + alpha) I + C and C_eff the
condensed stiffness C (I + R^-1 C); both are applied in closed form (see
tensors). Substituting the update back into the balance equation recovers
the coupled implicit system exactly, so the pair (u^k, phi^k) satisfies
both equations to solver tolerance; scheme_residual tracks that per step.

The displacement matrix and the load vector are constant in time, so a
Simulation assembles and constrains them once and reuses them for every
step. The solver is warm-started from the previous displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .assembly import apply_dirichlet, assemble_rhs, assemble_stiffness, load_vector, tensor_load
from .fields import BoundaryData, build_dirichlet, strain_field, zero_tensor_field
from .mesh import GAMMA0, Mesh, MeshGeometry, boundary_predicate, build_unit_square, classify_boundary, load_mesh
from .solver import SolverSettings, solve_spd
from .tensors import Material, StepParams, apply_C, apply_relax_inv, validate_material


class SolverError(RuntimeError):
    """Raised when a displacement solve fails to converge."""


@dataclass(frozen=True)
class SimulationState:
    """One time level: step index k, time t = k*tau, fields, total energy."""

    k: int
    t: float
    u: np.ndarray       # (n_nodes, 2) nodal displacement
    phi: np.ndarray     # (n_triangles, 3) internal tensor field
    energy: float


@dataclass(frozen=True)
class StepReport:
    iterations: int
    residual: float
    scheme_residual: float
    identity_residual: float
    energy: diagnostics.EnergyReport


@dataclass(frozen=True)
class MeshSpec:
    """Either a structured n-by-n unit square or a mesh file on disk."""

    n: int | None = None
    pattern: str = "alternating"
    path: str | None = None

    def build(self) -> Mesh:
        if (self.n is None) == (self.path is None):
            raise ValueError("mesh spec needs exactly one of n or path")
        if self.path is not None:
            return load_mesh(self.path)
        return build_unit_square(self.n, pattern=self.pattern)


@dataclass(frozen=True)
class RunConfig:
    material: Material
    tau: float
    t_end: float
    mesh: MeshSpec
    gamma0: str
    bc: BoundaryData
    outdir: str = "out"
    cadence: int = 10

    @property
    def n_steps(self) -> int:
        return count_steps(self.t_end, self.tau)


def count_steps(t_end: float, tau: float) -> int:
    """Number of steps covering (0, T]; tau must divide into T at least once.

    The relative nudge absorbs cases like T/tau = 0.2/0.1 where the float
    quotient lands just below the integer.
    """
    if not (0.0 < tau <= t_end):
        raise ValueError(f"need 0 < tau <= T, got tau = {tau}, T = {t_end}")
    return int(math.floor(t_end / tau * (1.0 + 1e-12)))


@dataclass
class RunResult:
    """Full trajectory record of one run. Arrays have one row per time level."""

    config: RunConfig
    mesh: Mesh
    times: np.ndarray
    energy: np.ndarray
    elastic: np.ndarray
    relax: np.ndarray
    work: np.ndarray
    identity_residual: np.ndarray
    scheme_residual: np.ndarray
    sigma_linf: np.ndarray     # (N+1, 3): max |sigma_xx|, |sigma_yy|, |sigma_xy|
    iterations: np.ndarray
    snapshots: list[SimulationState] = field(default_factory=list)
    sampled_pairs: dict[int, tuple[np.ndarray, SimulationState]] = field(default_factory=dict)

    @property
    def final(self) -> SimulationState:
        return self.snapshots[-1]


class Simulation:
    """Precomputed operators for one configuration; states flow through step().

    A preclassified mesh may be handed in to bypass cfg.mesh / cfg.gamma0
    (used by tests running on tiny hand-built meshes).
    """

    def __init__(self, cfg: RunConfig, mesh: Mesh | None = None,
                 settings: SolverSettings | None = None):
        validate_material(cfg.material)
        self.config = cfg
        self.material = cfg.material
        self.step_params = StepParams.from_material(cfg.material, cfg.tau)
        if mesh is None:
            mesh = cfg.mesh.build()
            if cfg.gamma0 == "file":
                # keep the labels stored in the mesh file
                if not np.any(mesh.edge_labels == GAMMA0):
                    raise ValueError("gamma0 = file, but the mesh has no GAMMA0 edges")
            else:
                mesh = classify_boundary(mesh, boundary_predicate(cfg.gamma0))
        elif not np.any(mesh.edge_labels == GAMMA0):
            raise ValueError("supplied mesh has no Dirichlet (GAMMA0) edges")
        self.mesh = mesh
        self.geom = MeshGeometry(mesh)
        self.bc = cfg.bc
        self.settings = settings if settings is not None else SolverSettings()

        self.dirichlet = build_dirichlet(mesh, cfg.bc.g)
        self.load = load_vector(self.geom, cfg.bc)
        plain = assemble_stiffness(self.geom, self.material)
        condensed = assemble_stiffness(self.geom, self.material, self.step_params)
        # the reduced right sides differ per step, only the matrices are cached
        self.system_plain, _ = apply_dirichlet(plain, np.zeros(plain.matrix.shape[0]), self.dirichlet)
        self.system_eff, _ = apply_dirichlet(condensed, np.zeros(condensed.matrix.shape[0]), self.dirichlet)

    def _solve(self, system, rhs, x0, what: str, k: int) -> tuple[np.ndarray, object]:
        reduced = system.reduce_rhs(rhs)
        x, rep = solve_spd(system, reduced, self.settings, x0=x0)
        if not rep.converged:
            raise SolverError(
                f"{what} solve failed at step {k}: residual {rep.residual:.3e} "
                f"after {rep.iterations} iterations"
            )
        u = x.reshape(-1, 2)
        u[self.dirichlet.nodes] = self.dirichlet.values
        return u, rep

    def initial_state(self, phi0: np.ndarray | None = None) -> tuple[SimulationState, StepReport]:
        """Equilibrium displacement for the initial tensor field (default 0)."""
        phi = zero_tensor_field(self.mesh) if phi0 is None else np.array(phi0, dtype=float)
        if phi.shape != (self.mesh.n_triangles, 3):
            raise ValueError(f"phi0 has shape {phi.shape}, expected {(self.mesh.n_triangles, 3)}")
        rhs = tensor_load(self.geom, apply_C(self.material, phi)) + self.load
        u, rep = self._solve(self.system_plain, rhs, None, "equilibrium", 0)
        report = diagnostics.energy(self.geom, self.material, u, phi, self.bc, load=self.load)
        state = SimulationState(k=0, t=0.0, u=u, phi=phi, energy=report.total)
        return state, StepReport(rep.iterations, rep.residual, 0.0, 0.0, report)

    def step(self, state: SimulationState) -> tuple[SimulationState, StepReport]:
        m, sp = self.material, self.step_params
        k = state.k + 1
        drag = (m.eta / sp.tau) * apply_relax_inv(m, sp, state.phi)
        rhs = tensor_load(self.geom, apply_C(m, drag)) + self.load
        u, rep = self._solve(self.system_eff, rhs, state.u.ravel(), "displacement", k)

        e = strain_field(self.geom, u)
        phi = apply_relax_inv(m, sp, apply_C(m, e) + (m.eta / sp.tau) * state.phi)

        report = diagnostics.energy(self.geom, m, u, phi, self.bc, load=self.load)
        new = SimulationState(k=k, t=k * sp.tau, u=u, phi=phi, energy=report.total)
        return new, StepReport(
            iterations=rep.iterations,
            residual=rep.residual,
            scheme_residual=diagnostics.scheme_residual(m, sp, e, phi, state.phi),
            identity_residual=diagnostics.energy_identity_residual(
                self.geom, m, sp.tau, state, new),
            energy=report,
        )

    def run(self, phi0: np.ndarray | None = None, sample_steps=()) -> RunResult:
        cfg = self.config
        n = cfg.n_steps
        sample = {int(k) for k in sample_steps}
        bad = [k for k in sample if not 1 <= k <= n]
        if bad:
            raise ValueError(f"sample steps {sorted(bad)} outside 1..{n}")

        times = np.empty(n + 1)
        series = {name: np.empty(n + 1) for name in
                  ("energy", "elastic", "relax", "work", "identity", "scheme")}
        sigma_linf = np.empty((n + 1, 3))
        iterations = np.empty(n + 1, dtype=np.int64)
        snapshots: list[SimulationState] = []
        pairs: dict[int, tuple[np.ndarray, SimulationState]] = {}

        state, rep = self.initial_state(phi0)
        for k in range(n + 1):
            times[k] = state.t
            series["energy"][k] = rep.energy.total
            series["elastic"][k] = rep.energy.elastic
            series["relax"][k] = rep.energy.relax
            series["work"][k] = rep.energy.work
            series["identity"][k] = rep.identity_residual
            series["scheme"][k] = rep.scheme_residual
            sigma_linf[k] = diagnostics.stress_components_linf(
                self.geom, self.material, state.u, state.phi)
            iterations[k] = rep.iterations
            if k == 0 or k == n or (cfg.cadence > 0 and k % cfg.cadence == 0):
                snapshots.append(state)
            if k == n:
                break
            phi_prev = state.phi
            state, rep = self.step(state)
            if state.k in sample:
                pairs[state.k] = (phi_prev, state)

        return RunResult(
            config=cfg,
            mesh=self.mesh,
            times=times,
            energy=series["energy"],
            elastic=series["elastic"],
            relax=series["relax"],
            work=series["work"],
            identity_residual=series["identity"],
            scheme_residual=series["scheme"],
            sigma_linf=sigma_linf,
            iterations=iterations,
            snapshots=snapshots,
            sampled_pairs=pairs,
        )


def default_sample_steps(n_steps: int) -> tuple[int, ...]:
    """Early, middle and final step, deduplicated, for gradient-flow probes."""
    return tuple(sorted({max(1, n_steps // 10), max(1, n_steps // 2), n_steps}))


def run(cfg: RunConfig, phi0=None, sample_steps=None,
        settings: SolverSettings | None = None) -> RunResult:
    sim = Simulation(cfg, settings=settings)
    if sample_steps is None:
        sample_steps = default_sample_steps(cfg.n_steps)
    return sim.run(phi0=phi0, sample_steps=sample_steps)


def equilibrium_solve(
    mesh: Mesh,
    m: Material,
    phi,
    bd: BoundaryData,
    geom: MeshGeometry | None = None,
    settings: SolverSettings | None = None,
    x0=None,
) -> np.ndarray:
    """Displacement minimizing the energy at a frozen tensor field phi.

    Standalone, nothing cached: assembles, constrains and solves from
    scratch. The diagnostics use it to evaluate the reduced energy.
    """
    geom = geom if geom is not None else MeshGeometry(mesh)
    ds = build_dirichlet(mesh, bd.g)
    system = assemble_stiffness(geom, m)
    rhs = assemble_rhs(geom, m, phi, bd)
    system, rhs = apply_dirichlet(system, rhs, ds)
    x, rep = solve_spd(system, rhs, settings, x0=x0)
    if not rep.converged:
        raise SolverError(
            f"equilibrium solve failed: residual {rep.residual:.3e} "
            f"after {rep.iterations} iterations"
        )
    u = x.reshape(-1, 2)
    u[ds.nodes] = ds.values
    return u
