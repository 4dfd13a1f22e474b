"""Linear solvers for the reduced SPD systems.

The production path is conjugate gradients with Jacobi (diagonal)
preconditioning plus minimal-residual smoothing: the returned iterate is the
convex combination of the previous smoothed iterate and the fresh CG iterate
that minimizes the preconditioned residual norm. Raw CG residuals oscillate
(only the energy-norm error is monotone); the smoothed sequence has a
non-increasing preconditioned residual norm by construction and converges to
the same limit, at the cost of one extra vector update per iteration. The
recorded history is the smoothed residual norm, one entry per iteration.

Convergence is declared on the true residual of the returned iterate,
||b - A x||_2 <= tol * ||b||_2. On non-convergence the last smoothed iterate
(the best seen in the preconditioned norm) is returned together with a
report saying so; raising is the caller's call.

solve_dense is a Cholesky fallback for small systems, used as the reference
route in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sparse

from .assembly import SparseSPD

_DENSE_LIMIT = 500


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int | None = None  # default 20 * dimension
    preconditioner: str = "jacobi"  # "jacobi" or "none"


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual: float  # true ||b - A x||_2 of the returned iterate
    residual_history: np.ndarray  # preconditioned norms, entry per iteration


def _matrix_of(system) -> sparse.csr_matrix:
    if isinstance(system, SparseSPD):
        return system.matrix
    return sparse.csr_matrix(system)


def solve_spd(system, b, settings: SolverSettings | None = None, x0=None) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradients on an SPD system.

    Parameters
    ----------
    system : SparseSPD or any scipy-convertible sparse matrix
    b : right-hand side
    settings : SolverSettings, defaults to tol 1e-12 with Jacobi
    x0 : optional initial guess (not modified)

    Returns
    -------
    (x, SolveReport)
    """
    settings = settings or SolverSettings()
    A = _matrix_of(system)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"matrix shape {A.shape} does not match rhs length {n}")

    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros(n), SolveReport(True, 0, 0.0, np.zeros(1))

    if settings.preconditioner == "jacobi":
        diag = A.diagonal()
        if np.any(diag <= 0.0):
            raise ValueError("Jacobi preconditioner needs a strictly positive diagonal")
        inv_diag = 1.0 / diag
    elif settings.preconditioner == "none":
        inv_diag = np.ones(n)
    else:
        raise ValueError(f"unknown preconditioner {settings.preconditioner!r}")

    max_iter = settings.max_iter if settings.max_iter is not None else 20 * n
    target = settings.tol * norm_b

    def pnorm(v):
        return np.sqrt(max(v @ (inv_diag * v), 0.0))

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).reshape(n)
    r = b - A @ x
    z = inv_diag * r
    rz = r @ z
    p = z.copy()

    # smoothed sequence: y with residual s = b - A y, kept consistent by the
    # convex-combination recurrence below
    y = x.copy()
    s = r.copy()
    history = [pnorm(s)]
    iterations = 0
    converged = np.linalg.norm(s) <= target

    while not converged and iterations < max_iter:
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0.0:
            break  # not SPD along this direction; stop with the current iterate
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap

        # minimal-residual smoothing in the preconditioned inner product:
        # theta minimizes ||s + theta (r - s)||, clamped into the segment
        d = r - s
        dd = d @ (inv_diag * d)
        if dd > 0.0:
            theta = min(1.0, max(0.0, -(s @ (inv_diag * d)) / dd))
        else:
            theta = 1.0
        y = y + theta * (x - y)
        s = s + theta * d
        history.append(pnorm(s))
        iterations += 1

        if np.linalg.norm(s) <= target:
            converged = True
            break
        z = inv_diag * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next

    # the recurrence for s tracks b - A y exactly in exact arithmetic;
    # report the recomputed true residual of what is returned
    final_residual = float(np.linalg.norm(b - A @ y))
    return y, SolveReport(
        converged=converged,
        iterations=iterations,
        residual=final_residual,
        residual_history=np.asarray(history),
    )


def solve_dense(system, b) -> np.ndarray:
    """Cholesky solve for small systems (tests and cross-checks)."""
    A = _matrix_of(system)
    n = A.shape[0]
    if n > _DENSE_LIMIT:
        raise ValueError(f"dense fallback is limited to {_DENSE_LIMIT} dofs, got {n}")
    c, low = scipy.linalg.cho_factor(A.toarray())
    return scipy.linalg.cho_solve((c, low), np.asarray(b, dtype=float))
