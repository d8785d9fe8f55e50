"""Rank-nullity test of the BEM (RNC-BEM).

The test asks whether any orthonormal BEM direction ``e_q`` lies in the
null space of the block-diagonal pilot matrix ``theta_bar_l``. It is
evaluated three ways:

analytic
    For patterns whose nonzero columns are scaled harmonic vectors, the
    product ``theta_l(:, rho_j) @ w_iq(rho_j)`` collapses to a scalar
    multiple of ``f_m`` with ``m = <g_j + l>_{N_P}``. The scalar is
    ``psi``, a ``P_sep``-term sum of basis samples on the decimation grid
    ``n = m, m + N_P, ...``. ``Lambda(i, j) = 1`` iff that cell is nonzero.
numeric
    The same cell products computed as matrix-vector products.
direct
    ``theta_bar_l @ e_q`` itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .bem import BemMatrix
from .estimation import DopplerProjection, build_E, build_theta
from .geometry import SystemGeometry
from .pilots import PilotPattern

#: Relative tolerance for every zero/nonzero decision in this module.
ZERO_RTOL = 1e-10


def rho_index(geo: SystemGeometry, j: int) -> np.ndarray:
    """Columns ``j, j + L_P, ..., (N_P-1)*L_P + j`` of ``theta_l``."""
    return j + geo.L_P * np.arange(geo.N_P)


def gamma_offset(geo: SystemGeometry, j: int, i: int) -> int:
    """``p1(j) - P_b - i`` with ``p1(j)`` taken unreduced, i.e. ``j - w_P - i``."""
    return j - geo.w_P - i


def decimation_index(geo: SystemGeometry, g: int, l: int) -> np.ndarray:
    """Samples ``m + k*N_P`` (``k < P_sep``) with ``m = <g + l>_{N_P}``."""
    m = (g + l) % geo.N_P
    return m + geo.N_P * np.arange(geo.P_sep)


def psi(geo: SystemGeometry, b_q: np.ndarray, g: int, l: int, j: int, i: int) -> complex:
    """``sum_k b_q(n_k) * exp(2j*pi*gamma*n_k/N)`` over the decimation grid."""
    n = decimation_index(geo, g, l)
    gamma = gamma_offset(geo, j, i)
    phase = np.exp(2j * np.pi * ((gamma * n) % geo.N) / geo.N)
    return complex(np.sum(np.asarray(b_q)[n] * phase))


def psi_is_zero(value: complex, b_q: np.ndarray, p_sep: int) -> bool:
    """``|psi| <= ZERO_RTOL * P_sep * max|b_q|``.

    The scale is the largest entry of the whole basis vector: when every
    sample on the decimation grid is itself roundoff, a bound built from
    those samples alone would call roundoff nonzero.
    """
    return abs(value) <= ZERO_RTOL * p_sep * float(np.max(np.abs(b_q)))


@dataclass
class RncReport:
    """Lambda tables and verdicts for one transmitter.

    Arrays are indexed ``[l, q, i + B_c, j]``.

    Attributes
    ----------
    lambda_analytic : np.ndarray or None
        ``None`` when the pattern has no harmonic description.
    lambda_numeric : np.ndarray
    psi : np.ndarray or None
    direct : np.ndarray
        ``(L, Q)`` booleans, ``theta_bar_l @ e_q != 0``.
    w_zero : np.ndarray
        ``(O, Q)`` booleans, ``w_iq == 0``.
    """

    tx_index: int
    lambda_analytic: Optional[np.ndarray]
    lambda_numeric: np.ndarray
    psi: Optional[np.ndarray]
    direct: np.ndarray
    w_zero: np.ndarray
    mismatches: List[Dict[str, object]] = field(default_factory=list)

    @property
    def tables(self) -> np.ndarray:
        return self.lambda_analytic if self.lambda_analytic is not None else self.lambda_numeric

    @property
    def nonzero(self) -> np.ndarray:
        """``(L, Q)``: whether each ``Lambda^(l,q)`` has a nonzero entry."""
        return self.tables.any(axis=(2, 3))

    @property
    def passed(self) -> bool:
        return bool(self.nonzero.all())

    @property
    def direct_passed(self) -> bool:
        return bool(self.direct.all())

    @property
    def consistent(self) -> bool:
        return not self.mismatches

    def as_dict(self, verbose: bool = False) -> Dict[str, object]:
        out = {
            "tx": self.tx_index,
            "passed": self.passed,
            "direct_passed": self.direct_passed,
            "consistent": self.consistent,
            "analytic": self.lambda_analytic is not None,
            "zero_tables": [[int(l), int(q)] for l, q in np.argwhere(~self.nonzero)],
            "w_zero": [[int(i), int(q)] for i, q in np.argwhere(self.w_zero)],
            "mismatches": list(self.mismatches),
        }
        if verbose:
            L, Q = self.nonzero.shape
            out["lambda"] = [
                {"path": l, "q": q, "table": self.tables[l, q].astype(int).tolist()}
                for l in range(L) for q in range(Q)
            ]
        return out


def rnc_bem_check(geo: SystemGeometry, pattern: PilotPattern, bem: BemMatrix,
                  projection: Optional[DopplerProjection] = None) -> RncReport:
    """Evaluate RNC-BEM for one transmitter's pattern.

    The analytic tables require ``pattern.harmonics``; the numeric and
    direct checks work for any pattern. Disagreements are listed in
    :attr:`RncReport.mismatches`, never reconciled.
    """
    projection = projection or build_E(geo, bem)
    n_p, l_p, o, Q, L = geo.N_P, geo.L_P, geo.O, bem.Q, geo.L
    basis = bem.basis
    matrix = pattern.matrix
    harmonics = getattr(pattern, "harmonics", None)
    analytic_ok = harmonics is not None and len(harmonics) == l_p

    # w[i, s, r, q] = w_iq(s*L_P + r)
    w = np.stack([projection.basis_blocks[i] for i in geo.offsets]).reshape(o, n_p, l_p, Q)
    b_l1 = np.sum(np.abs(basis), axis=0)
    w_zero = (np.max(np.abs(w), axis=(1, 2)) <= ZERO_RTOL * b_l1[None, :] / geo.N)
    zero_cols = ~np.any(matrix != 0, axis=0)
    # |cell| = |alpha| (N_P/N) |psi|; this makes the cell test the psi test
    cell_scale = n_p * geo.P_sep * np.max(np.abs(basis), axis=0) / geo.N

    lam_num = np.zeros((L, Q, o, l_p), dtype=bool)
    lam_ana = np.zeros((L, Q, o, l_p), dtype=bool) if analytic_ok else None
    psi_tab = np.zeros((L, Q, o, l_p), dtype=complex) if analytic_ok else None
    direct = np.zeros((L, Q), dtype=bool)
    mismatches: List[Dict[str, object]] = []

    for l in range(L):
        theta = build_theta(geo, pattern, l).theta
        t3 = theta.reshape(n_p, n_p, l_p)  # [c, s, r]
        t_scale = np.max(np.abs(t3), axis=(0, 1))
        cells = np.einsum("csr,isrq->iqcr", t3, w)
        cell_max = np.max(np.abs(cells), axis=2)  # [i, q, r]
        bound = ZERO_RTOL * t_scale[None, None, :] * cell_scale[None, :, None]
        nonzero = (cell_max > bound) & ~w_zero[:, :, None] & ~zero_cols[None, None, :]
        lam_num[l] = np.transpose(nonzero, (1, 0, 2))

        # theta_bar_l e_q, one O-block per offset, without forming the kron
        stacked = np.einsum("cx,ixq->iqc", theta, w.reshape(o, n_p * l_p, Q))
        norm_bound = ZERO_RTOL * l_p * float(np.max(np.abs(theta))) * cell_scale
        direct[l] = np.any(np.max(np.abs(stacked), axis=2) > norm_bound[None, :], axis=0)

        if not analytic_ok:
            continue
        for q in range(Q):
            for a, i in enumerate(geo.offsets):
                for j, g in enumerate(harmonics):
                    if g is None or zero_cols[j]:
                        continue
                    value = psi(geo, basis[:, q], g, l, j, i)
                    psi_tab[l, q, a, j] = value
                    if w_zero[a, q]:
                        continue
                    lam_ana[l, q, a, j] = not psi_is_zero(value, basis[:, q], geo.P_sep)

        disagree = np.argwhere(lam_ana[l] != lam_num[l])
        for q, a, j in disagree:
            mismatches.append({"kind": "cell", "path": l, "q": int(q),
                               "offset": int(a - geo.B_c), "column": int(j)})

    tables = lam_ana if analytic_ok else lam_num
    if analytic_ok and _distinct_harmonics(geo, harmonics, matrix):
        # with distinct harmonics the cells are independent directions, so a
        # nonzero table and a nonzero product must coincide
        for l, q in np.argwhere(tables.any(axis=(2, 3)) != direct):
            mismatches.append({"kind": "direct", "path": int(l), "q": int(q)})

    return RncReport(getattr(pattern, "tx_index", 0), lam_ana, lam_num, psi_tab,
                     direct, w_zero, mismatches)


def _distinct_harmonics(geo, harmonics, matrix) -> bool:
    used = [g % geo.N_P for j, g in enumerate(harmonics)
            if g is not None and np.any(matrix[:, j] != 0)]
    return len(used) == len(set(used))
