"""Run outputs: time-series CSVs, VTK snapshots, and a text summary.

Every file is deterministic for a given run (no timestamps, fixed float
formatting), so repeated serial runs are byte-identical. energy.csv and
stress.csv carry one row per time level including k = 0; VTK files are
written only at the snapshot cadence.

The VTK files are legacy ASCII 2.0 unstructured grids: the undeformed
mesh, the displacement as point vectors (warp by u in a viewer to see the
deformed shape), and the internal tensor and stress fields as six cell
scalars (xx, yy, xy each).
"""

from __future__ import annotations

import os

import numpy as np

from .fields import strain_field
from .mesh import MeshGeometry
from .stepper import RunResult, SimulationState
from .tensors import stress


def write_outputs(result: RunResult, outdir) -> list[str]:
    """Write all output files; returns the paths written."""
    os.makedirs(outdir, exist_ok=True)
    paths = [
        write_energy_csv(result, os.path.join(outdir, "energy.csv")),
        write_stress_csv(result, os.path.join(outdir, "stress.csv")),
    ]
    geom = MeshGeometry(result.mesh)
    for state in result.snapshots:
        name = os.path.join(outdir, f"state_{state.k:06d}.vtk")
        paths.append(write_vtk(result, state, name, geom=geom))
    paths.append(write_summary(result, os.path.join(outdir, "summary.txt")))
    return paths


def write_energy_csv(result: RunResult, path) -> str:
    with open(path, "w") as f:
        f.write("t,E,elastic,relax,work,identity_residual\n")
        for k in range(len(result.times)):
            f.write("%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n" % (
                result.times[k], result.energy[k], result.elastic[k],
                result.relax[k], result.work[k], result.identity_residual[k]))
    return path


def write_stress_csv(result: RunResult, path) -> str:
    with open(path, "w") as f:
        f.write("t,sigma11_linf,sigma22_linf,sigma12_linf\n")
        for k in range(len(result.times)):
            f.write("%.12e,%.12e,%.12e,%.12e\n" % (
                result.times[k], result.sigma_linf[k, 0],
                result.sigma_linf[k, 1], result.sigma_linf[k, 2]))
    return path


def write_vtk(result: RunResult, state: SimulationState, path,
              geom: MeshGeometry | None = None) -> str:
    mesh = result.mesh
    geom = geom if geom is not None else MeshGeometry(mesh)
    sigma = stress(result.config.material, strain_field(geom, state.u), state.phi)
    n, m = mesh.n_nodes, mesh.n_triangles
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write(f"viscofem state k={state.k} t={state.t:.6f}\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {n} double\n")
        for x, y in mesh.nodes:
            f.write("%.12e %.12e 0.0\n" % (x, y))
        f.write(f"CELLS {m} {4 * m}\n")
        for tri in mesh.triangles:
            f.write("3 %d %d %d\n" % tuple(tri))
        f.write(f"CELL_TYPES {m}\n")
        f.write("5\n" * m)
        f.write(f"POINT_DATA {n}\n")
        f.write("VECTORS u double\n")
        for ux, uy in state.u:
            f.write("%.12e %.12e 0.0\n" % (ux, uy))
        f.write(f"CELL_DATA {m}\n")
        for name, field, col in (
            ("phi_xx", state.phi, 0), ("phi_yy", state.phi, 1), ("phi_xy", state.phi, 2),
            ("sigma_xx", sigma, 0), ("sigma_yy", sigma, 1), ("sigma_xy", sigma, 2),
        ):
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in field[:, col]:
                f.write("%.12e\n" % v)
    return path


def write_summary(result: RunResult, path) -> str:
    cfg = result.config
    m = cfg.material
    n_steps = len(result.times) - 1
    iters = result.iterations
    if cfg.mesh.path is not None:
        mesh_desc = f"file {cfg.mesh.path}"
    else:
        mesh_desc = f"unit square n={cfg.mesh.n} pattern={cfg.mesh.pattern}"
    lines = [
        "viscofem run summary",
        f"material: lambda={m.lam!r} mu={m.mu!r} eta={m.eta!r} alpha={m.alpha!r}",
        f"time: tau={cfg.tau!r} T={cfg.t_end!r} N_T={n_steps}",
        f"mesh: {mesh_desc} ({result.mesh.n_nodes} nodes, {result.mesh.n_triangles} triangles)",
        f"dirichlet boundary: {cfg.gamma0}",
        f"final energy: {result.energy[-1]:.12e}",
        f"final sigma11 L-inf: {result.sigma_linf[-1, 0]:.12e}",
        f"max energy-identity residual: {result.identity_residual.max():.3e}",
        f"max tensor-update residual: {result.scheme_residual.max():.3e}",
        f"solver iterations: min={iters.min()} max={iters.max()} total={iters.sum()}",
        f"snapshots written: {len(result.snapshots)}",
        "",
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines))
    return path
