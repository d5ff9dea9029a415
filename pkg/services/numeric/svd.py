"""
Thin SVD by one-sided Jacobi rotations.

The rotations run on the smaller dimension: for a wide matrix the
transpose is orthogonalized and the factors swapped back. Singular
vectors follow a pinned sign convention because they are later reused
as perturbations.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from services.core.errors import NonFinite, ZeroRow

logger = logging.getLogger(__name__)

MAX_SWEEPS = 60
EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray       # n x r
    sigma: np.ndarray   # r, descending
    V: np.ndarray       # d x r, right singular vectors as columns

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


def _round_robin(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: rounds of disjoint (i, j) pairs covering every pair once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (min(players[t], players[size - 1 - t]), max(players[t], players[size - 1 - t]))
            for t in range(size // 2)
            if players[t] >= 0 and players[size - 1 - t] >= 0
        ]
        if pairs:
            rounds.append((np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi_columns(A: np.ndarray):
    """
    Orthogonalize the columns of A (m x n, m >= n) with Hestenes rotations.

    Each round rotates a set of disjoint column pairs at once.

    Returns:
        (B, W): B = A @ W has mutually orthogonal columns, W orthogonal n x n
    """
    B = A.copy()
    m, n = B.shape
    W = np.eye(n)
    tol = np.sqrt(m) * EPS
    rounds = _round_robin(n)
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for I, J in rounds:
            bi, bj = B[:, I], B[:, J]
            alpha = np.einsum("ij,ij->j", bi, bi)
            beta = np.einsum("ij,ij->j", bj, bj)
            gamma = np.einsum("ij,ij->j", bi, bj)
            active = (alpha > 0.0) & (beta > 0.0) & (np.abs(gamma) > tol * np.sqrt(alpha * beta))
            if not np.any(active):
                continue
            rotated = True
            I, J = I[active], J[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta == 0.0, 1.0, np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta)))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            bi, bj = B[:, I], B[:, J]
            B[:, I] = c * bi - s * bj
            B[:, J] = s * bi + c * bj
            wi, wj = W[:, I], W[:, J]
            W[:, I] = c * wi - s * wj
            W[:, J] = s * wi + c * wj
        if not rotated:
            logger.debug(f"Jacobi converged after {sweep + 1} sweeps (n={n})")
            break
    else:
        logger.warning(f"⚠️ Jacobi SVD hit the sweep cap ({MAX_SWEEPS}) for n={n}")
    return B, W


def _orthonormal_columns(B: np.ndarray, sigma: np.ndarray, rank: int) -> np.ndarray:
    """Normalize the first `rank` columns and complete the rest to an orthonormal set."""
    Q = np.zeros_like(B)
    if rank > 0:
        Q[:, :rank] = B[:, :rank] / sigma[:rank]
    if rank < B.shape[1]:
        if rank > 0:
            full, _ = np.linalg.qr(Q[:, :rank], mode="complete")
        else:
            full = np.eye(B.shape[0])
        Q[:, rank:] = full[:, rank:B.shape[1]]
    return Q


def thin_svd(M: np.ndarray) -> SvdResult:
    """
    Thin SVD M = U diag(sigma) V^T with r = min(n, d).

    Raises:
        NonFinite: if M holds NaN or infinite entries
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or min(M.shape) < 1:
        raise ValueError(f"thin_svd expects a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix contains non-finite entries")

    n, d = M.shape
    wide = n < d
    A = M.T if wide else M

    B, W = _jacobi_columns(A)
    sigma = np.linalg.norm(B, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, B, W = sigma[order], B[:, order], W[:, order]

    cutoff = sigma[0] * max(A.shape) * EPS if sigma[0] > 0 else 0.0
    rank = int(np.sum(sigma > cutoff))
    sigma = np.where(sigma > cutoff, sigma, 0.0)
    left = _orthonormal_columns(B, sigma, rank)

    # A = left diag(sigma) W^T
    if wide:
        U, V = W, left
    else:
        U, V = left, W

    # sign convention: first nonzero component of every V column is positive
    for col in range(V.shape[1]):
        nonzero = np.flatnonzero(np.abs(V[:, col]) > 1e-14)
        if nonzero.size and V[nonzero[0], col] < 0:
            V[:, col] = -V[:, col]
            U[:, col] = -U[:, col]

    return SvdResult(U=U, sigma=sigma, V=V)


def normalize_rows(M: np.ndarray) -> np.ndarray:
    """Scale each row to unit l2 norm."""
    M = np.asarray(M, dtype=np.float64)
    norms = np.linalg.norm(M, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroRow(f"cannot normalize zero rows: {zero.tolist()}", rows=zero.tolist())
    return M / norms[:, None]
