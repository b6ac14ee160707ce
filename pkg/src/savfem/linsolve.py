"""Solution of the coupled (c, mu) block system with a rank-one update.

Each implicit step couples concentration and chemical potential through a
2x2 block operator plus one rank-one term sigma * u v^T sitting in the
(mu-equation, c-unknown) block:

    [ B_cc   B_cmu  ] [c ]   [rhs_c ]
    [ B_muc  B_mumu ] [mu] + [rhs_mu],   B_muc <- B_muc + sigma u v^T.

The base operator is factorized (or solved iteratively) without the rank-one
term; the update is folded in with the Sherman-Morrison formula

    x = x0 - sigma (v^T x0_c) / (1 + sigma v^T x1_c) * x1,

where x0 solves A x0 = b and x1 solves A x1 = [0; u].  The full-operator
residual is checked after every solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SolverConfig",
    "BlockSystem",
    "SolveStats",
    "LinearSolveError",
    "SingularUpdateError",
    "apply_operator",
    "solve_rank_one_system",
]

SINGULAR_TOL = 1e-14


class LinearSolveError(RuntimeError):
    pass


class SingularUpdateError(LinearSolveError):
    """The Sherman-Morrison denominator 1 + sigma v^T A^{-1} u is numerically zero."""


@dataclass(frozen=True)
class SolverConfig:
    """How to solve the block systems.

    method : "direct" (sparse LU) or "krylov" (GMRES)
    rel_tolerance : accepted relative residual of the full operator
    preconditioner : for the Krylov path, "none" or "diagonal_block"
        (exact solves with the two diagonal blocks)
    """

    method: str = "direct"
    rel_tolerance: float = 1e-10
    max_iterations: int = 2000
    preconditioner: str = "none"

    def __post_init__(self):
        if self.method not in ("direct", "krylov"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not (0.0 < self.rel_tolerance <= 1e-2):
            raise ValueError("rel_tolerance must lie in (0, 1e-2]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.preconditioner not in ("none", "diagonal_block"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class BlockSystem:
    """One step's linear system; all blocks are N x N sparse matrices."""

    b_cc: sp.spmatrix
    b_cmu: sp.spmatrix
    b_muc: sp.spmatrix
    b_mumu: sp.spmatrix
    rank_one_scale: float
    rank_one_left: np.ndarray  # u, lives in the mu-equation rows
    rank_one_right: np.ndarray  # v, acts on the c unknowns
    rhs: np.ndarray  # (2N,)

    @property
    def n(self) -> int:
        return self.b_cc.shape[0]


@dataclass
class SolveStats:
    method: str
    iterations: int
    residual: float
    rel_residual: float
    woodbury_denominator: float


def apply_operator(system: BlockSystem, x: np.ndarray) -> np.ndarray:
    """Full operator (blocks plus rank-one term) applied to x = [c; mu]."""
    n = system.n
    xc, xm = x[:n], x[n:]
    yc = system.b_cc @ xc + system.b_cmu @ xm
    ym = system.b_muc @ xc + system.b_mumu @ xm
    if system.rank_one_scale != 0.0:
        ym = ym + system.rank_one_scale * np.dot(system.rank_one_right, xc) * system.rank_one_left
    return np.concatenate([yc, ym])


def _base_matrix(system: BlockSystem) -> sp.csc_matrix:
    return sp.bmat(
        [[system.b_cc, system.b_cmu], [system.b_muc, system.b_mumu]], format="csc"
    )


def _make_base_solver(system: BlockSystem, config: SolverConfig):
    a = _base_matrix(system)
    if config.method == "direct":
        lu = spla.splu(a)
        return lambda b: (lu.solve(b), 0)

    prec = None
    if config.preconditioner == "diagonal_block":
        lu_cc = spla.splu(sp.csc_matrix(system.b_cc))
        lu_mm = spla.splu(sp.csc_matrix(system.b_mumu))
        n = system.n

        def _apply(b):
            return np.concatenate([lu_cc.solve(b[:n]), lu_mm.solve(b[n:])])

        prec = spla.LinearOperator(a.shape, matvec=_apply)

    def _krylov(b):
        counter = {"it": 0}

        def _cb(_):
            counter["it"] += 1

        x, info = spla.gmres(
            a,
            b,
            rtol=config.rel_tolerance * 1e-2,
            atol=0.0,
            maxiter=config.max_iterations,
            M=prec,
            callback=_cb,
            callback_type="pr_norm",
        )
        if info != 0:
            raise LinearSolveError(
                f"GMRES did not converge within {config.max_iterations} iterations (info={info})"
            )
        return x, counter["it"]

    return _krylov


def solve_rank_one_system(system: BlockSystem, config: SolverConfig | None = None):
    """Solve the block system; returns (c, mu, stats).

    Raises SingularUpdateError when the Sherman-Morrison denominator is
    below 1e-14 in magnitude, and LinearSolveError when the full-operator
    residual exceeds rel_tolerance * ||rhs||.
    """
    config = config or SolverConfig()
    n = system.n
    solve = _make_base_solver(system, config)

    x0, it0 = solve(system.rhs)
    iterations = it0
    denom = 1.0
    if system.rank_one_scale != 0.0 and np.any(system.rank_one_left != 0.0):
        u_hat = np.concatenate([np.zeros(n), system.rank_one_left])
        x1, it1 = solve(u_hat)
        iterations += it1
        denom = 1.0 + system.rank_one_scale * np.dot(system.rank_one_right, x1[:n])
        if abs(denom) < SINGULAR_TOL:
            raise SingularUpdateError(
                f"rank-one update is singular: |1 + sigma v^T A^-1 u| = {abs(denom):.3e}"
            )
        x = x0 - x1 * (system.rank_one_scale * np.dot(system.rank_one_right, x0[:n]) / denom)
    else:
        x = x0

    res = apply_operator(system, x) - system.rhs
    res_norm = float(np.linalg.norm(res))
    rhs_norm = float(np.linalg.norm(system.rhs))
    rel = res_norm / rhs_norm if rhs_norm > 0 else res_norm
    if rel > config.rel_tolerance:
        raise LinearSolveError(
            f"block solve residual {rel:.3e} exceeds tolerance {config.rel_tolerance:.1e}"
        )
    stats = SolveStats(
        method=config.method,
        iterations=iterations,
        residual=res_norm,
        rel_residual=rel,
        woodbury_denominator=float(denom),
    )
    return x[:n], x[n:], stats
