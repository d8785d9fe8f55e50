"""Channel-estimation matrix assembly and its full-column-rank suite.

Observation ordering is offset-major: row ``(i + B_c) * N_P + c`` of the
estimation matrix is subcarrier ``P_b + c*P_sep + i``. Columns are ordered
transmitter, then path, then BEM coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bem import BemMatrix
from .geometry import SystemGeometry, build_index_matrix, build_pilot_index_vector
from .linalg import RANK_RTOL, numerical_rank
from .pilots import PilotPattern

#: Relative tolerance for the pairwise theta-orthogonality test.
ORTHOGONALITY_RTOL = 1e-9


# ---------------------------------------------------------------------------
# Doppler-domain projection
# ---------------------------------------------------------------------------

def doppler_rows(geo: SystemGeometry, i: int) -> np.ndarray:
    """Inverse-DFT bins ``<N + p1(k) - P_b - i>`` picked by the offset-``i`` projector."""
    return (geo.N + build_pilot_index_vector(geo) - geo.P_b - i) % geo.N


def build_W(geo: SystemGeometry, i: int) -> np.ndarray:
    """Explicit ``N_P*L_P x N`` projector: selected rows of ``F^H / N``."""
    if abs(i) > geo.B_c:
        raise ValueError(f"offset {i} outside -B_c..B_c")
    rows = doppler_rows(geo, i)
    n = np.arange(geo.N)
    return np.exp(2j * np.pi * ((rows[:, None] * n[None, :]) % geo.N) / geo.N) / geo.N


def project(geo: SystemGeometry, b: np.ndarray, i: int) -> np.ndarray:
    """``build_W(geo, i) @ b`` computed with an inverse FFT."""
    spectrum = np.fft.ifft(np.asarray(b, dtype=complex), axis=0)
    return spectrum[doppler_rows(geo, i)]


@dataclass(frozen=True)
class DopplerProjection:
    """Doppler-domain images of a BEM.

    Attributes
    ----------
    blocks : dict
        ``i -> W_i @ B``.
    E : np.ndarray
        ``[W_{-B_c} B; ...; W_{B_c} B]``.
    basis_blocks : dict
        ``i -> W_i @ basis``; column ``q`` is the vector ``w_{i,q}``.
    e : np.ndarray
        Same stack built from the orthonormal basis; column ``q`` is ``e_q``.
    """

    blocks: Dict[int, np.ndarray]
    E: np.ndarray
    basis_blocks: Dict[int, np.ndarray]
    e: np.ndarray


def build_E(geo: SystemGeometry, bem: BemMatrix) -> DopplerProjection:
    if bem.N != geo.N:
        raise ValueError(f"BEM window {bem.N} != N={geo.N}")
    blocks = {i: project(geo, bem.B, i) for i in geo.offsets}
    basis_blocks = {i: project(geo, bem.basis, i) for i in geo.offsets}
    return DopplerProjection(
        blocks=blocks,
        E=np.vstack([blocks[i] for i in geo.offsets]),
        basis_blocks=basis_blocks,
        e=np.vstack([basis_blocks[i] for i in geo.offsets]),
    )


# ---------------------------------------------------------------------------
# pilot blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaBlocks:
    """Pilot-dependent blocks for one path of one transmitter.

    Attributes
    ----------
    stacked : np.ndarray
        ``2N_P x L_P``: the phase-rotated pattern on top of itself.
    theta : np.ndarray
        ``N_P x N_P*L_P`` concatenation of the windows ``R_s``.
    n_obs : int
        Number of diagonal copies in :attr:`theta_bar`.
    """

    path: int
    tx_index: int
    stacked: np.ndarray
    theta: np.ndarray
    n_obs: int

    @property
    def n_p(self) -> int:
        return self.theta.shape[0]

    def window(self, s: int) -> np.ndarray:
        """``R_s``: rows ``s .. s+N_P-1`` of :attr:`stacked`."""
        return self.stacked[s:s + self.n_p]

    @property
    def windows(self) -> List[np.ndarray]:
        return [self.window(s) for s in range(self.n_p)]

    @property
    def theta_bar(self) -> np.ndarray:
        """Block diagonal with ``n_obs`` copies of :attr:`theta`."""
        return np.kron(np.eye(self.n_obs), self.theta)


def pilot_phase(geo: SystemGeometry, l: int) -> np.ndarray:
    """``exp(-2j*pi*Qmat*l/N)`` for the unreduced index matrix."""
    qmat = build_index_matrix(geo)
    return np.exp(-2j * np.pi * ((qmat * l) % geo.N) / geo.N)


def build_theta(geo: SystemGeometry, pattern, l: int) -> ThetaBlocks:
    matrix = pattern.matrix if isinstance(pattern, PilotPattern) else np.asarray(pattern)
    if matrix.shape != (geo.N_P, geo.L_P):
        raise ValueError(f"pattern shape {matrix.shape} != {(geo.N_P, geo.L_P)}")
    rotated = pilot_phase(geo, l) * matrix
    n_p = geo.N_P
    # theta[c, s*L_P + r] = rotated[(c + s) mod N_P, r]
    idx = (np.arange(n_p)[:, None] + np.arange(n_p)[None, :]) % n_p
    theta = rotated[idx].reshape(n_p, n_p * geo.L_P)
    tx = pattern.tx_index if isinstance(pattern, PilotPattern) else 0
    return ThetaBlocks(l, tx, np.vstack([rotated, rotated]), theta, geo.O)


# ---------------------------------------------------------------------------
# estimation matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimationMatrix:
    """The ``V x N_T*L*Q`` channel-estimation matrix and its ingredients."""

    P: np.ndarray
    geo: SystemGeometry
    bem: BemMatrix
    patterns: Tuple[PilotPattern, ...]
    projection: DopplerProjection
    thetas: Dict[Tuple[int, int], ThetaBlocks]

    @property
    def n_tx(self) -> int:
        return len(self.patterns)

    @property
    def n_columns(self) -> int:
        return self.P.shape[1]

    def column_slice(self, tx: int, l: int) -> slice:
        q = self.bem.Q
        start = (tx * self.geo.L + l) * q
        return slice(start, start + q)

    def phi(self, tx: int, l: int) -> np.ndarray:
        return self.P[:, self.column_slice(tx, l)]


def assemble_P(geo: SystemGeometry, patterns: Sequence, bem: BemMatrix,
               projection: Optional[DopplerProjection] = None) -> EstimationMatrix:
    """Build the estimation matrix for one pattern per transmitter.

    Column block ``tx*L + l`` is ``[theta_l W_{-B_c} B; ...; theta_l W_{B_c} B]``.
    """
    if isinstance(patterns, PilotPattern):
        patterns = [patterns]
    patterns = tuple(patterns)
    if not patterns:
        raise ValueError("need at least one pilot pattern")
    for pat in patterns:
        if pat.matrix.shape != (geo.N_P, geo.L_P):
            raise ValueError(f"pattern shape {pat.matrix.shape} != {(geo.N_P, geo.L_P)}")
    if bem.Q != geo.Q:
        raise ValueError(f"BEM order {bem.Q} != Q={geo.Q}")
    projection = projection or build_E(geo, bem)

    thetas = {}
    columns = []
    for tx, pat in enumerate(patterns):
        for l in range(geo.L):
            blocks = build_theta(geo, pat, l)
            thetas[tx, l] = blocks
            columns.append(np.vstack([blocks.theta @ projection.blocks[i]
                                      for i in geo.offsets]))
    return EstimationMatrix(np.hstack(columns), geo, bem, patterns, projection, thetas)


def observation_vector(y: np.ndarray, geo: SystemGeometry) -> np.ndarray:
    """Demodulated outputs in estimation-matrix row order."""
    from .geometry import build_observation_indices

    _, p2 = build_observation_indices(geo)
    return np.asarray(y)[p2]


def reference_permutation(geo: SystemGeometry, n_tx: int = 1):
    """Row and column permutations to the cluster-major convention.

    In that convention rows run over the ``2B_c+1`` neighbours of one
    cluster before moving to the next, and columns run over paths fastest,
    then BEM coefficients, then transmitters. ``P[rows][:, cols]`` is the
    reordered matrix.
    """
    n_p, o, L, Q = geo.N_P, geo.O, geo.L, geo.Q
    c, i = np.divmod(np.arange(n_p * o), o)
    rows = i * n_p + c
    tx, rem = np.divmod(np.arange(n_tx * L * Q), L * Q)
    q, l = np.divmod(rem, L)
    cols = (tx * L + l) * Q + q
    return rows, cols


# ---------------------------------------------------------------------------
# rank suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrthogonalityResult:
    """Worst normalized cross-correlation ``|theta_a^H theta_b|_F / (|theta_a|_F |theta_b|_F)``."""

    max_ratio: float
    worst_pair: Optional[Tuple[Tuple[int, int], Tuple[int, int]]]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.tol


def theta_orthogonality(thetas: Dict[Tuple[int, int], ThetaBlocks],
                        tol: float = ORTHOGONALITY_RTOL) -> OrthogonalityResult:
    keys = sorted(thetas)
    # |theta_a^H theta_b|_F == |S_a U_a^H U_b S_b|_F, far cheaper than the product
    factors, norms = {}, {}
    for key in keys:
        u, s, _ = np.linalg.svd(thetas[key].theta, full_matrices=False)
        factors[key] = u * s[None, :]
        norms[key] = float(np.linalg.norm(s))
    worst, pair = 0.0, None
    for a_pos, a in enumerate(keys):
        for b in keys[a_pos + 1:]:
            denom = norms[a] * norms[b]
            if denom == 0:
                continue
            ratio = float(np.linalg.norm(factors[a].conj().T @ factors[b])) / denom
            if pair is None or ratio > worst:
                worst, pair = ratio, (a, b)
    return OrthogonalityResult(worst, pair, tol)


@dataclass
class RankReport:
    """Verdicts of every full-column-rank condition for one estimation matrix."""

    bemc_rank: int
    Q: int
    theta_orth: OrthogonalityResult
    phi_ranks: Dict[Tuple[int, int], int]
    final_rank: int
    n_columns: int
    rnc: List = field(default_factory=list)
    theta_ranks: Dict[Tuple[int, int], int] = field(default_factory=dict)
    condition_number: float = float("nan")
    tolerances: Dict[str, float] = field(default_factory=dict)

    @property
    def bemc_passed(self) -> bool:
        return self.bemc_rank == self.Q

    @property
    def phi_passed(self) -> bool:
        return all(r == self.Q for r in self.phi_ranks.values())

    @property
    def rnc_passed(self) -> bool:
        return all(r.passed for r in self.rnc)

    @property
    def full_column_rank(self) -> bool:
        return self.final_rank == self.n_columns

    @property
    def conditions_met(self) -> bool:
        """BEMC, theta-orthogonality and every ``rank(phi) = Q``."""
        return self.bemc_passed and self.theta_orth.passed and self.phi_passed

    @property
    def consistent(self) -> bool:
        return self.full_column_rank == self.conditions_met

    def as_dict(self, verbose: bool = False) -> Dict[str, object]:
        worst = self.theta_orth.worst_pair
        out = {
            "bemc": {"rank_E": self.bemc_rank, "Q": self.Q, "passed": self.bemc_passed},
            "theta_orthogonality": {
                "max_ratio": self.theta_orth.max_ratio,
                "worst_pair": None if worst is None else [list(worst[0]), list(worst[1])],
                "tol": self.theta_orth.tol,
                "passed": self.theta_orth.passed,
            },
            "phi_ranks": [
                {"tx": tx, "path": l, "rank": r} for (tx, l), r in sorted(self.phi_ranks.items())
            ],
            "theta_ranks": [
                {"tx": tx, "path": l, "rank": r} for (tx, l), r in sorted(self.theta_ranks.items())
            ],
            "rnc_bem": {
                "passed": self.rnc_passed,
                "consistent": all(r.consistent for r in self.rnc),
                "per_tx": [r.as_dict(verbose) for r in self.rnc],
            },
            "final": {
                "rank": self.final_rank,
                "columns": self.n_columns,
                "full_column_rank": self.full_column_rank,
                "condition_number": self.condition_number,
            },
            "conditions_met": self.conditions_met,
            "consistent": self.consistent,
            "tolerances": dict(self.tolerances),
        }
        return out


def rank_report(est: EstimationMatrix, rnc: bool = True,
                rtol: float = RANK_RTOL, orth_tol: float = ORTHOGONALITY_RTOL) -> RankReport:
    """Evaluate BEMC, theta-orthogonality, per-block ranks, RNC-BEM and ``rank(P)``."""
    from .rnc import ZERO_RTOL, rnc_bem_check

    geo = est.geo
    final = numerical_rank(est.P, rtol)
    phi_ranks = {key: numerical_rank(est.phi(*key), rtol).rank for key in sorted(est.thetas)}
    theta_ranks = {key: numerical_rank(blocks.theta, rtol).rank
                   for key, blocks in sorted(est.thetas.items())}
    rnc_reports = []
    if rnc:
        rnc_reports = [rnc_bem_check(geo, pat, est.bem, projection=est.projection)
                       for pat in est.patterns]
    return RankReport(
        bemc_rank=numerical_rank(est.projection.E, rtol).rank,
        Q=est.bem.Q,
        theta_orth=theta_orthogonality(est.thetas, orth_tol),
        phi_ranks=phi_ranks,
        final_rank=final.rank,
        n_columns=est.n_columns,
        rnc=rnc_reports,
        theta_ranks=theta_ranks,
        condition_number=final.condition,
        tolerances={"rank_rtol": rtol, "orthogonality_rtol": orth_tol,
                    "rnc_zero_rtol": ZERO_RTOL},
    )
