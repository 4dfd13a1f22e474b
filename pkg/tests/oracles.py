"""Independent matrix-route oracles for the closed-form operator algebra.

The package applies every fourth-order operator through scalar closed forms.
These helpers rebuild the same operators as explicit 3x3 matrices acting on
the coordinate vector (xx, yy, xy) and invert them with generic linear
algebra (sympy over exact rationals, numpy over floats). Agreement between
the two routes is what the operator tests assert.

Conventions match the package: tensor shear storage, so the contraction
weight matrix is diag(1, 1, 2) and the elasticity operator maps the (xx,
yy, xy) coordinates by

    [[lam + 2 mu, lam,        0   ],
     [lam,        lam + 2 mu, 0   ],
     [0,          0,          2 mu]]
"""

import numpy as np
import sympy as sp

DIM = 2


def elasticity_matrix(lam, mu):
    """3x3 coordinate matrix of X -> lam*tr(X)*I + 2*mu*X."""
    return sp.Matrix(
        [
            [lam + 2 * mu, lam, 0],
            [lam, lam + 2 * mu, 0],
            [0, 0, 2 * mu],
        ]
    )


def step_matrix(lam, mu, eta, alpha, tau):
    """3x3 coordinate matrix of X -> (eta/tau + alpha)*X + C X."""
    c = sp.sympify(eta) / sp.sympify(tau) + sp.sympify(alpha)
    return sp.eye(3) * c + elasticity_matrix(lam, mu)


def step_inverse_matrix(lam, mu, eta, alpha, tau):
    """Exact inverse of the step matrix (generic matrix inversion)."""
    return step_matrix(lam, mu, eta, alpha, tau).inv()


def effective_matrix(lam, mu, eta, alpha, tau):
    """3x3 coordinate matrix of the condensed stiffness.

    Derived by eliminating phi from the coupled pair rather than by
    transcribing a closed form. With R phi = C e + (eta/tau) phi_prev and
    sigma = C (e - phi), the phi_prev-independent part of sigma is

        C e - C R^-1 C e

    so the effective operator is C (I - R^-1 C), assembled here in exact
    arithmetic from generic matrix inversion.
    """
    C = elasticity_matrix(lam, mu)
    Rinv = step_inverse_matrix(lam, mu, eta, alpha, tau)
    return C * (sp.eye(3) - Rinv * C)


def to_float(matrix) -> np.ndarray:
    return np.array(matrix.evalf(25).tolist(), dtype=float)


def apply_matrix(matrix, x) -> np.ndarray:
    return to_float(matrix) @ np.asarray(x, dtype=float)


def dense_spd_solve(A, b) -> np.ndarray:
    """Reference dense solve used against the iterative solver."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.linalg.solve(A, b)


def monolithic_step(nodes, triangles, dir_nodes, dir_values,
                    lam, mu, eta, alpha, tau, phi_prev, f=None):
    """One coupled implicit step solved as a single dense linear system.

    The package splits the step into a condensed displacement solve followed
    by a closed-form tensor update. This oracle refuses the split: it stacks
    the free displacement dofs and all per-element tensor components into one
    vector of unknowns, writes the equilibrium rows and the tensor update
    rows directly from the nodal coordinates, and hands the square system to
    numpy. No geometry or assembly code is shared with the package.

    dir_nodes/dir_values pin displacement nodes (values (k, 2)); f is an
    optional constant body force applied with the vertex quadrature rule.
    Returns (u, phi) for the new time level.
    """
    nodes = np.asarray(nodes, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    phi_prev = np.asarray(phi_prev, dtype=float)
    n_nodes = nodes.shape[0]
    n_tri = triangles.shape[0]
    n_u = 2 * n_nodes
    size = n_u + 3 * n_tri

    W = np.diag([1.0, 1.0, 2.0])
    Cm = np.array(
        [
            [lam + 2 * mu, lam, 0.0],
            [lam, lam + 2 * mu, 0.0],
            [0.0, 0.0, 2 * mu],
        ]
    )
    drag = eta / tau

    A = np.zeros((size, size))
    b = np.zeros(size)

    for t in range(n_tri):
        tri = triangles[t]
        p = nodes[tri]
        d1 = p[1] - p[0]
        d2 = p[2] - p[0]
        det = d1[0] * d2[1] - d1[1] * d2[0]
        area = 0.5 * det
        grads = np.empty((3, 2))
        for i in range(3):
            pj = p[(i + 1) % 3]
            pk = p[(i + 2) % 3]
            grads[i] = [(pj[1] - pk[1]) / det, (pk[0] - pj[0]) / det]
        # strain coordinates (xx, yy, xy) of each local displacement basis
        B = np.zeros((6, 3))
        for i in range(3):
            B[2 * i] = [grads[i, 0], 0.0, 0.5 * grads[i, 1]]
            B[2 * i + 1] = [0.0, grads[i, 1], 0.5 * grads[i, 0]]
        dofs = np.empty(6, dtype=int)
        dofs[0::2] = 2 * tri
        dofs[1::2] = 2 * tri + 1
        cols = n_u + 3 * t + np.arange(3)

        # equilibrium rows: (C(e[u] - phi), e[v]) = l(v)
        A[np.ix_(dofs, dofs)] += area * (B @ W @ Cm @ B.T)
        A[np.ix_(dofs, cols)] += -area * (B @ W @ Cm)
        if f is not None:
            for i in range(3):
                b[dofs[2 * i]] += area / 3.0 * f[0]
                b[dofs[2 * i + 1]] += area / 3.0 * f[1]

        # tensor update rows: (eta/tau + alpha) phi + C phi - C e[u] = (eta/tau) phi_prev
        A[np.ix_(cols, cols)] += (drag + alpha) * np.eye(3) + Cm
        A[np.ix_(cols, dofs)] += -(Cm @ B.T)
        b[cols] += drag * phi_prev[t]

    for node, value in zip(np.asarray(dir_nodes, dtype=int),
                           np.asarray(dir_values, dtype=float)):
        for c in range(2):
            dof = 2 * node + c
            A[dof, :] = 0.0
            A[dof, dof] = 1.0
            b[dof] = value[c]

    x = np.linalg.solve(A, b)
    return x[:n_u].reshape(n_nodes, 2), x[n_u:].reshape(n_tri, 3)
