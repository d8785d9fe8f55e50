"""Pilot-pattern matrices and their embedding into an OFDM symbol.

A pattern is an ``N_P x L_P`` matrix whose row ``c`` holds the symbols of
pilot cluster ``c``. Every pattern built here has columns that are either
zero or a scaled harmonic vector ``f_g``; the harmonic index of each column
is kept alongside the matrix so the analytic rank machinery can use it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .geometry import (
    GeometryError,
    Mode,
    SystemGeometry,
    build_index_matrix,
    check_feasibility,
    harmonic_vector,
)


class InfeasibleDesignError(ValueError):
    """A pattern design was refused because a required bound fails.

    Attributes
    ----------
    violated : list of str
        Names of the failing bounds.
    report : FeasibilityReport
    """

    def __init__(self, report):
        self.report = report
        self.violated = [c.name for c in report.violated]
        detail = ", ".join(f"{c.name} ({c.expression}: {c.lhs} vs {c.rhs})"
                           for c in report.violated)
        super().__init__(f"{report.mode.value} design refused: {detail}")


@dataclass(frozen=True)
class PilotPattern:
    """Pilot symbols of one transmitter.

    Attributes
    ----------
    matrix : np.ndarray
        ``N_P x L_P`` complex pattern.
    harmonics : tuple
        Per column, the harmonic index ``g`` with ``matrix[:, r] = scale*f_g``,
        or ``None`` for an all-zero column.
    tx_index : int
    mode : Mode or None
        ``None`` for hand-built patterns.
    chi : complex
        Common amplitude of the nonzero columns.
    """

    matrix: np.ndarray
    harmonics: Tuple[Optional[int], ...]
    tx_index: int = 0
    mode: Optional[Mode] = None
    chi: complex = 1.0

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))


def harmonic_pattern(geo: SystemGeometry, harmonics: Sequence[Optional[int]],
                     chi: complex = 1.0, tx_index: int = 0,
                     mode: Optional[Mode] = None) -> PilotPattern:
    """Pattern with column ``r`` equal to ``chi * f_{harmonics[r]}``.

    No feasibility check is made; aliased or colliding assignments are
    allowed, which is what negative controls need.
    """
    harmonics = tuple(None if g is None else int(g) for g in harmonics)
    if len(harmonics) != geo.L_P:
        raise ValueError(f"need {geo.L_P} column harmonics, got {len(harmonics)}")
    matrix = np.zeros((geo.N_P, geo.L_P), dtype=complex)
    for r, g in enumerate(harmonics):
        if g is not None:
            matrix[:, r] = chi * harmonic_vector(geo.N_P, g)
    return PilotPattern(matrix, harmonics, tx_index, mode, chi)


def design_harmonics(geo: SystemGeometry, mode, tx_index: int = 0):
    """Column harmonic indices of the boxed designs (no feasibility check)."""
    mode = Mode(mode)
    L, L_P = geo.L, geo.L_P
    if mode is Mode.HARMONIC_SISO:
        return [r * L for r in range(L_P)]
    if mode is Mode.HARMONIC_MIMO:
        return [tx_index * L_P * L + r * L for r in range(L_P)]
    cols = [None] * L_P
    cols[geo.w_P] = 0 if mode is Mode.FDKD_SISO else tx_index * L
    return cols


def design_pattern(geo: SystemGeometry, mode, tx_index: int = 0,
                   chi: complex = 1.0, n_tx: Optional[int] = None) -> PilotPattern:
    """Pattern of transmitter ``tx_index`` under design ``mode``.

    ``siso``
        columns ``f_0, f_L, ..., f_{(L_P-1)L}``
    ``mimo``
        columns ``f_{i*L_P*L + r*L}`` for transmitter ``i``
    ``fdkd``
        middle column ``chi * f_0``, the rest zero
    ``fdkd-mimo``
        middle column ``f_{i*L}``, the rest zero

    Raises
    ------
    InfeasibleDesignError
        If a required counting bound fails for ``n_tx`` transmitters
        (default ``geo.N_T``).
    """
    mode = Mode(mode)
    n_tx = geo.N_T if n_tx is None else n_tx
    report = check_feasibility(geo, mode, n_tx)
    if not report.passed:
        raise InfeasibleDesignError(report)
    if not 0 <= tx_index < n_tx:
        raise ValueError(f"tx_index {tx_index} outside 0..{n_tx - 1}")
    return harmonic_pattern(geo, design_harmonics(geo, mode, tx_index), chi, tx_index, mode)


def design_patterns(geo: SystemGeometry, mode, n_tx: Optional[int] = None,
                    chi: complex = 1.0):
    """Patterns for every transmitter."""
    mode = Mode(mode)
    n_tx = (geo.N_T if mode.is_mimo else 1) if n_tx is None else n_tx
    return [design_pattern(geo, mode, i, chi, n_tx) for i in range(n_tx)]


@dataclass(frozen=True)
class PilotVector:
    """Length-``N`` pilot vector and the complementary data subcarriers."""

    p: np.ndarray
    pilot_slots: np.ndarray
    data_slots: np.ndarray


def embed_pattern(pattern, geo: SystemGeometry) -> PilotVector:
    """Place ``pattern[c, r]`` on subcarrier ``Qmat[c, r] mod N``."""
    matrix = pattern.matrix if isinstance(pattern, PilotPattern) else np.asarray(pattern)
    if matrix.shape != (geo.N_P, geo.L_P):
        raise ValueError(f"pattern shape {matrix.shape} != {(geo.N_P, geo.L_P)}")
    slots = build_index_matrix(geo, reduced=True).ravel()
    if np.unique(slots).size != slots.size:
        raise GeometryError("two pattern cells map to one subcarrier")
    p = np.zeros(geo.N, dtype=complex)
    p[slots] = matrix.ravel()
    data = np.setdiff1d(np.arange(geo.N), slots)
    return PilotVector(p, slots, data)


def extract_pattern(p: np.ndarray, geo: SystemGeometry) -> np.ndarray:
    """Inverse of :func:`embed_pattern`."""
    slots = build_index_matrix(geo, reduced=True)
    return np.asarray(p)[slots]
