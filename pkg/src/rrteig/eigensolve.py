"""Sparse and dense solvers for the discrete mixed eigenvalue problem.

The mixed pencil is reduced to the cell space: B A^-1 B^T u = lambda M u.
The production path inverts the reduced operator through one sparse LU
factorization of the saddle matrix [[A, B^T], [B, 0]] and runs Lanczos on
the inverse, which targets the smallest eigenvalues directly; the dense
oracle forms the reduced matrix column by column and is kept strictly
separate for verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import MixedSystem
from .errors import InnerSolveDiverged, KTooLarge, NotConverged, OracleCapExceeded

_DENSE_FALLBACK = 40  # below this cell count Lanczos has no room to run


@dataclass(frozen=True)
class SolveOptions:
    """Contract of an eigenpair request."""

    k: int
    tol: float = 1e-10
    max_iterations: int = 20000
    seed: int = 0
    inner_tol: float | None = None

    def __post_init__(self):
        if not (0.0 < self.tol < 1.0):
            raise ValueError("tol must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def effective_inner_tol(self) -> float:
        return self.inner_tol if self.inner_tol is not None else self.tol / 100.0


@dataclass
class MixedEigenpair:
    """One discrete eigenpair, normalized by u^T M u = 1."""

    lambda_h: float
    sigma_coeffs: np.ndarray
    u_coeffs: np.ndarray
    residual_norm: float


def schur_apply(
    system: MixedSystem,
    u_vec: np.ndarray,
    inner_tol: float = 1e-12,
    max_iter: int = 2000,
) -> np.ndarray:
    """Apply the reduced operator B A^-1 B^T with an inner CG solve on A."""
    rhs = system.B.T @ np.asarray(u_vec, dtype=float)
    sol, info = spla.cg(system.A, rhs, rtol=inner_tol, atol=0.0, maxiter=max_iter)
    if info != 0:
        raise InnerSolveDiverged(f"CG on A returned info={info}")
    return system.B @ sol


def _saddle_lu(system: MixedSystem):
    n_sig = system.layout.n_sigma
    saddle = sp.bmat(
        [[system.A, system.B.T], [system.B, None]], format="csc"
    )
    return spla.splu(saddle), n_sig


def _normalize(system, lam, u):
    """M-normalize, fix the sign, and recover sigma = A^-1 B^T u."""
    nrm = np.sqrt(float(u @ (system.M * u)))
    u = u / nrm
    imax = int(np.argmax(np.abs(u)))
    if u[imax] < 0:
        u = -u
    return u


def _finalize(system, a_lu, lam, u, tol):
    u = _normalize(system, lam, u)
    sigma = a_lu.solve(system.B.T @ u)
    r1 = system.A @ sigma - system.B.T @ u
    r2 = system.B @ sigma - lam * (system.M * u)
    res = np.linalg.norm(r1) / max(np.linalg.norm(system.A @ sigma), 1e-300)
    res = max(res, np.linalg.norm(r2) / max(abs(lam), 1e-300))
    return MixedEigenpair(
        lambda_h=float(lam), sigma_coeffs=sigma, u_coeffs=u,
        residual_norm=float(res),
    ), res


def solve_mixed_eigs(system: MixedSystem, opts: SolveOptions) -> list[MixedEigenpair]:
    """k smallest eigenpairs of the pencil (B A^-1 B^T, M).

    Deterministic for a fixed seed; eigenvalues ascending, u vectors
    M-orthonormal, each u's largest-magnitude entry positive.
    """
    n_cell = system.layout.n_cell
    if opts.k > n_cell:
        raise KTooLarge(f"k={opts.k} exceeds spectrum size {n_cell}")

    lu, n_sig = _saddle_lu(system)
    m_sqrt = np.sqrt(system.M)

    def inv_apply(y):
        # y -> M^{1/2} (B A^-1 B^T)^{-1} M^{1/2} y via one saddle solve
        rhs = np.concatenate([np.zeros(n_sig), m_sqrt * y])
        sol = lu.solve(rhs)
        return m_sqrt * (-sol[n_sig:])

    k_int = min(opts.k + 2, n_cell)  # guard against missing cluster members
    if n_cell <= max(_DENSE_FALLBACK, k_int + 2):
        op_mat = np.column_stack(
            [inv_apply(col) for col in np.eye(n_cell)]
        )
        op_mat = (op_mat + op_mat.T) / 2.0
        mu, vec = np.linalg.eigh(op_mat)
    else:
        op = spla.LinearOperator(
            (n_cell, n_cell), matvec=inv_apply, dtype=float
        )
        rng = np.random.default_rng(opts.seed)
        v0 = rng.standard_normal(n_cell)
        mu, vec = spla.eigsh(
            op, k=k_int, which="LM", v0=v0, tol=0.0,
            maxiter=opts.max_iterations,
        )

    order = np.argsort(mu)[::-1][: opts.k]  # largest mu = smallest lambda
    a_lu = spla.splu(system.A.tocsc())
    out, worst = [], 0.0
    for idx in order:
        lam = 1.0 / mu[idx]
        u = vec[:, idx] / m_sqrt
        pair, res = _finalize(system, a_lu, lam, u, opts.tol)
        out.append(pair)
        worst = max(worst, res)
    out.sort(key=lambda p: p.lambda_h)  # stable: ascending within clusters
    if worst > opts.tol:
        raise NotConverged(
            f"worst residual {worst:.3e} exceeds tol {opts.tol:.1e}",
            residuals=[p.residual_norm for p in out],
        )
    return out


def dense_oracle_eigs(
    system: MixedSystem, k: int, cap: int = 5000
) -> list[MixedEigenpair]:
    """Dense verification oracle, independent of the Lanczos path.

    Forms the reduced matrix S = B A^-1 B^T column by column with direct
    inner solves, reduces the pencil (S, M) with the trivial Cholesky of
    the diagonal M, and calls a dense symmetric eigendecomposition.
    """
    n_cell = system.layout.n_cell
    if n_cell > cap:
        raise OracleCapExceeded(f"n_cell={n_cell} exceeds oracle cap {cap}")
    if k > n_cell:
        raise KTooLarge(f"k={k} exceeds spectrum size {n_cell}")

    a_lu = spla.splu(system.A.tocsc())
    bt = np.asarray(system.B.T.todense())
    z = a_lu.solve(bt)  # A^-1 B^T, one column per cell DOF
    s_dense = np.asarray(system.B.todense()) @ z
    s_dense = (s_dense + s_dense.T) / 2.0

    d_inv_sqrt = 1.0 / np.sqrt(system.M)
    c = d_inv_sqrt[:, None] * s_dense * d_inv_sqrt[None, :]
    vals, vecs = np.linalg.eigh(c)

    out = []
    for idx in range(k):
        lam = vals[idx]
        u = d_inv_sqrt * vecs[:, idx]
        pair, _ = _finalize(system, a_lu, lam, u, tol=1.0)
        out.append(pair)
    return out
