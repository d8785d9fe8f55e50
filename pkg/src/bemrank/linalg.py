"""Numerical rank and small linear-algebra helpers shared by every module."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Relative rank tolerance. A singular value counts as nonzero iff it
#: exceeds ``sigma_max * max(rows, cols) * RANK_RTOL``.
RANK_RTOL = 1e-13


@dataclass(frozen=True)
class RankResult:
    """Outcome of a numerical rank computation.

    Attributes
    ----------
    rank : int
        Number of singular values above ``threshold``.
    singular_values : np.ndarray
        All singular values, descending.
    threshold : float
        Absolute cut-off that was applied.
    """

    rank: int
    singular_values: np.ndarray
    threshold: float

    @property
    def condition(self) -> float:
        """Ratio of largest to smallest retained singular value."""
        if self.rank == 0:
            return float("inf")
        return float(self.singular_values[0] / self.singular_values[self.rank - 1])


def numerical_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> RankResult:
    """Rank of ``a`` under the package-wide relative tolerance."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return RankResult(0, np.zeros(0), 0.0)
    s = np.linalg.svd(a, compute_uv=False)
    threshold = float(s[0]) * max(a.shape) * rtol if s.size else 0.0
    return RankResult(int(np.count_nonzero(s > threshold)), s, threshold)


def rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    return numerical_rank(a, rtol).rank


def projection_residual(basis: np.ndarray, vectors: np.ndarray) -> float:
    """Largest norm of the part of ``vectors`` outside ``span(basis)``.

    ``basis`` must have orthonormal columns.
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    resid = vectors - basis @ (basis.conj().T @ vectors)
    return float(np.max(np.linalg.norm(resid, axis=0)))
