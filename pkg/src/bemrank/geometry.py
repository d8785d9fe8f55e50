"""System parameters, pilot/observation index algebra and feasibility bounds.

All indices are zero-based. Subcarrier addressing uses values reduced
modulo ``N``; phase terms keep the unreduced cluster indices (the two agree
because ``exp(-2j*pi*k*l/N)`` has period ``N`` in ``k``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np


class GeometryError(ValueError):
    """Raised when a parameter set violates a structural invariant."""


class Mode(str, enum.Enum):
    """Pilot-pattern family."""

    HARMONIC_SISO = "siso"
    FDKD_SISO = "fdkd"
    HARMONIC_MIMO = "mimo"
    FDKD_MIMO = "fdkd-mimo"

    @property
    def is_fdkd(self) -> bool:
        return self in (Mode.FDKD_SISO, Mode.FDKD_MIMO)

    @property
    def is_mimo(self) -> bool:
        return self in (Mode.HARMONIC_MIMO, Mode.FDKD_MIMO)


@dataclass(frozen=True)
class SystemGeometry:
    """Scalar parameters of one (MIMO-)OFDM symbol with clustered pilots.

    Parameters
    ----------
    N : int
        Number of subcarriers.
    N_P : int
        Number of pilot clusters.
    P_sep : int
        Spacing between the middle subcarriers of neighbouring clusters.
    P_b : int
        Middle subcarrier of cluster 0.
    L_P : int
        Pilot-cluster length, odd.
    B_c : int
        Observation half-width; ``O = 2*B_c + 1`` outputs per cluster are
        observed.
    L : int
        Number of resolvable paths (also the cyclic-prefix length).
    Q : int
        BEM order.
    f_D : float
        Normalized Doppler, dimensionless (Doppler times symbol duration).
    N_T : int
        Number of transmitters.
    """

    N: int
    N_P: int
    P_sep: int
    P_b: int
    L_P: int
    B_c: int
    L: int
    Q: int
    f_D: float = 0.0
    N_T: int = 1

    def __post_init__(self):
        for name in ("N", "N_P", "P_sep", "P_b", "L_P", "B_c", "L", "Q", "N_T"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise GeometryError(f"{name} must be an integer, got {value!r}")
        for name in ("N", "N_P", "P_sep", "L_P", "L", "Q", "N_T"):
            if getattr(self, name) < 1:
                raise GeometryError(f"{name} must be positive")
        if self.B_c < 0:
            raise GeometryError("B_c must be non-negative")
        if self.N != self.N_P * self.P_sep:
            raise GeometryError(
                f"N ({self.N}) must equal N_P*P_sep ({self.N_P}*{self.P_sep})")
        if self.L_P % 2 == 0:
            raise GeometryError(f"L_P must be odd, got {self.L_P}")
        if self.B_c > self.w_P:
            raise GeometryError(
                f"observation cluster (B_c={self.B_c}) exceeds pilot cluster "
                f"half-width w_P={self.w_P}")
        if self.L_P > self.P_sep:
            raise GeometryError(
                f"pilot clusters overlap: L_P={self.L_P} > P_sep={self.P_sep}")
        if self.f_D < 0:
            raise GeometryError("f_D must be non-negative")

    @property
    def w_P(self) -> int:
        return (self.L_P - 1) // 2

    @property
    def O(self) -> int:  # noqa: E743
        """Observation-cluster length."""
        return 2 * self.B_c + 1

    @property
    def G(self) -> int:
        """Guard length on each side of the observation cluster."""
        return (self.L_P - self.O) // 2

    @property
    def V(self) -> int:
        """Number of observed pilot subcarriers."""
        return self.N_P * self.O

    @property
    def delta_f(self) -> float:
        return 1.0 / self.N

    @property
    def delta_f1(self) -> float:
        return 1.0 / self.N_P

    @property
    def N_D(self) -> int:
        return self.N_P

    @property
    def L_D(self) -> int:
        return self.P_sep - self.L_P

    @property
    def w_D(self) -> float:
        return (self.L_D - 1) / 2

    @property
    def offsets(self) -> range:
        """Observation offsets ``-B_c..B_c``."""
        return range(-self.B_c, self.B_c + 1)

    def replace(self, **changes) -> "SystemGeometry":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, object]:
        return {
            "N": int(self.N), "N_P": int(self.N_P), "P_sep": int(self.P_sep),
            "P_b": int(self.P_b), "L_P": int(self.L_P), "B_c": int(self.B_c),
            "L": int(self.L), "Q": int(self.Q), "f_D": float(self.f_D),
            "N_T": int(self.N_T),
        }


#: Parameter sets S1-S4 used for the rank studies.
PRESETS: Dict[str, SystemGeometry] = {
    "s1": SystemGeometry(N=128, N_P=16, P_sep=8, P_b=1, L_P=3, B_c=1, L=4, Q=3, f_D=0.1),
    "s2": SystemGeometry(N=256, N_P=16, P_sep=16, P_b=1, L_P=3, B_c=1, L=4, Q=3, f_D=0.1),
    "s3": SystemGeometry(N=512, N_P=32, P_sep=16, P_b=1, L_P=3, B_c=1, L=4, Q=3, f_D=0.1),
    "s4": SystemGeometry(N=1024, N_P=64, P_sep=16, P_b=2, L_P=5, B_c=2, L=4, Q=5, f_D=0.3),
}


def preset(name: str, **changes) -> SystemGeometry:
    """Return a named parameter set, optionally with fields replaced."""
    try:
        geo = PRESETS[name.lower()]
    except KeyError:
        raise GeometryError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return geo.replace(**changes) if changes else geo


# ---------------------------------------------------------------------------
# index algebra
# ---------------------------------------------------------------------------

def build_index_matrix(geo: SystemGeometry, reduced: bool = False) -> np.ndarray:
    """``N_P x L_P`` matrix of pilot subcarrier indices, one row per cluster.

    Row ``c`` is ``P_b + c*P_sep - w_P, ..., P_b + c*P_sep + w_P``. Values
    are left unreduced unless ``reduced`` is set.
    """
    rows = geo.P_b - geo.w_P + geo.P_sep * np.arange(geo.N_P)[:, None]
    qmat = rows + np.arange(geo.L_P)[None, :]
    return qmat % geo.N if reduced else qmat


def build_pilot_index_vector(geo: SystemGeometry) -> np.ndarray:
    """Indices of every pilot subcarrier, cluster by cluster.

    Cluster ``c`` occupies entries ``[c*L_P, (c+1)*L_P)``.
    """
    p1 = build_index_matrix(geo, reduced=True).ravel()
    if np.unique(p1).size != p1.size:
        raise GeometryError("pilot clusters overlap")
    return p1


def build_observation_indices(geo: SystemGeometry):
    """Observation index vectors.

    Returns
    -------
    p2_offsets : dict
        ``i -> [<P_b + i + k*P_sep>]_k`` for ``|i| <= B_c``.
    p2 : np.ndarray
        Concatenation over ``i = -B_c..B_c``, length ``V``.
    """
    if geo.B_c > geo.w_P:
        raise GeometryError("B_c exceeds w_P")
    k = np.arange(geo.N_P)
    p2_offsets = {i: (geo.P_b + i + k * geo.P_sep) % geo.N for i in geo.offsets}
    p2 = np.concatenate([p2_offsets[i] for i in geo.offsets])
    return p2_offsets, p2


@dataclass(frozen=True)
class IndexVectors:
    p1: np.ndarray
    p2_offsets: Dict[int, np.ndarray]
    p2: np.ndarray
    qmat: np.ndarray
    qmat_reduced: np.ndarray


def index_vectors(geo: SystemGeometry) -> IndexVectors:
    p2_offsets, p2 = build_observation_indices(geo)
    return IndexVectors(
        p1=build_pilot_index_vector(geo),
        p2_offsets=p2_offsets,
        p2=p2,
        qmat=build_index_matrix(geo),
        qmat_reduced=build_index_matrix(geo, reduced=True),
    )


def harmonic_vector(n_p: int, i: int) -> np.ndarray:
    """``f_i(k) = exp(-2j*pi*i*k/n_p)`` for ``k = 0..n_p-1``.

    ``i`` may exceed ``n_p - 1``; the result then aliases onto ``i mod n_p``.
    """
    if n_p < 1:
        raise ValueError("n_p must be positive")
    k = np.arange(n_p)
    # reduce first so large indices keep full phase accuracy
    return np.exp(-2j * np.pi * ((i * k) % n_p) / n_p)


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    """One integer inequality from the rank analysis.

    ``required`` bounds must hold for the design to be attempted; the
    others are reported for information only.
    """

    name: str
    expression: str
    lhs: int
    rhs: int
    passed: bool
    required: bool = True

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name, "expression": self.expression,
            "lhs": self.lhs, "rhs": self.rhs,
            "passed": self.passed, "required": self.required,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    mode: Mode
    n_tx: int
    n_p: int
    checks: List[BoundCheck] = field(default_factory=list)
    max_harmonic: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    @property
    def violated(self) -> List[BoundCheck]:
        return [c for c in self.checks if c.required and not c.passed]

    @property
    def aliased(self) -> bool:
        """True when a design would need a harmonic index ``>= N_P``."""
        return self.max_harmonic is not None and self.max_harmonic >= self.n_p

    def __getitem__(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> Dict[str, object]:
        return {
            "mode": self.mode.value,
            "n_tx": self.n_tx,
            "passed": self.passed,
            "aliased": self.aliased,
            "max_harmonic": self.max_harmonic,
            "violated": [c.name for c in self.violated],
            "checks": [c.as_dict() for c in self.checks],
        }


def _le(name, expr, lhs, rhs, required=True):
    return BoundCheck(name, expr, int(lhs), int(rhs), bool(lhs <= rhs), required)


def _ge(name, expr, lhs, rhs, required=True):
    return BoundCheck(name, expr, int(lhs), int(rhs), bool(lhs >= rhs), required)


def check_feasibility(geo: SystemGeometry, mode, n_tx: Optional[int] = None) -> FeasibilityReport:
    """Evaluate the counting bounds that apply to ``mode``.

    Failures are report entries, never exceptions. ``n_tx`` defaults to
    ``geo.N_T``.
    """
    mode = Mode(mode)
    n_tx = geo.N_T if n_tx is None else int(n_tx)
    L, L_P, N_P, Q, O = geo.L, geo.L_P, geo.N_P, geo.Q, geo.O
    checks: List[BoundCheck] = []

    if not mode.is_mimo:
        checks.append(BoundCheck("single_transmitter", "N_T == 1", n_tx, 1, n_tx == 1))
    if mode is Mode.HARMONIC_SISO:
        checks.append(_le("harmonic_capacity", "L_P*L <= N_P", L_P * L, N_P))
        max_harmonic = L_P * L - 1
    elif mode is Mode.HARMONIC_MIMO:
        checks.append(_le("harmonic_mimo_capacity", "L_P*L*N_T <= N_P", L_P * L * n_tx, N_P))
        max_harmonic = L_P * L * n_tx - 1
    elif mode is Mode.FDKD_SISO:
        checks.append(_ge("fdkd_capacity", "N_P >= L", N_P, L))
        max_harmonic = L - 1
    else:
        checks.append(_le("fdkd_mimo_capacity", "L*N_T <= N_P", L * n_tx, N_P))
        max_harmonic = L * n_tx - 1

    if mode.is_fdkd:
        checks.append(_ge("observation_order", "2*B_c+1 >= Q", O, Q))
    else:
        checks.append(_ge("theta_bar_order", "(2*B_c+1)*L_P >= Q", O * L_P, Q))
    checks.append(_ge("pilot_cluster_order", "L_P >= Q", L_P, Q, required=geo.B_c == 0))

    all_pilot = (geo.N >= Q * N_P) and (N_P >= L)
    checks.append(BoundCheck(
        "all_pilot_consistency", "N/Q >= N_P >= L", geo.N // Q, N_P, all_pilot,
        required=False))
    return FeasibilityReport(mode, n_tx, N_P, checks, max_harmonic)
