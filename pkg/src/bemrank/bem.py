"""Basis expansion models for time-varying channel taps.

A tap observed over ``N`` samples is approximated as ``B @ h`` with an
``N x Q`` basis matrix ``B``. Four families are provided:

``P_BEM``
    centered, scaled monomials ``((n - (N-1)/2) / N) ** q``
``CE_BEM``
    complex exponentials ``exp(2j*pi*n*(q - (Q-1)/2) / N)``
``GCE_BEM``
    oversampled exponentials ``exp(2j*pi*n*(q - (Q-1)/2) / (K*N))``
``S_BEM``
    the ``Q`` most concentrated discrete prolate spheroidal sequences with
    half-bandwidth ``W`` (cycles/sample)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal.windows import dpss

from .linalg import numerical_rank


class BemKind(str, enum.Enum):
    P_BEM = "p"
    CE_BEM = "ce"
    GCE_BEM = "gce"
    S_BEM = "s"


class DegenerateBasisError(ValueError):
    """The basis matrix does not have full column rank."""


@dataclass(frozen=True)
class BemSpec:
    """Parameters of a BEM family.

    Parameters
    ----------
    kind : BemKind or str
    N : int
        Window length in samples.
    Q : int
        Number of basis functions.
    f_D : float
        Normalized Doppler (Doppler times OFDM symbol duration). Only
        S_BEM uses it.
    K : int
        Oversampling factor of GCE_BEM.
    bandwidth : float, optional
        S_BEM half-bandwidth in cycles/sample. Defaults to ``f_D / N``, i.e.
        ``f_D`` read as Doppler normalized to the subcarrier spacing.
    """

    kind: BemKind
    N: int
    Q: int
    f_D: float = 0.0
    K: int = 2
    bandwidth: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BemKind(self.kind))
        if self.Q < 1:
            raise ValueError("Q must be at least 1")
        if self.Q > self.N:
            raise ValueError(f"Q={self.Q} exceeds window length N={self.N}")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.kind is BemKind.S_BEM and self.slepian_bandwidth <= 0:
            raise ValueError("S_BEM needs a positive Doppler / bandwidth")

    @property
    def slepian_bandwidth(self) -> float:
        if self.bandwidth is not None:
            return float(self.bandwidth)
        return float(self.f_D) / self.N


@dataclass(frozen=True)
class BemMatrix:
    """A BEM basis matrix together with an orthonormal basis of its span.

    Attributes
    ----------
    spec : BemSpec
    B : np.ndarray
        ``N x Q`` complex basis matrix as constructed.
    basis : np.ndarray
        ``N x Q`` matrix with orthonormal columns spanning ``B``.
    concentrations : np.ndarray or None
        S_BEM only: in-band energy fractions of the sequences.
    """

    spec: BemSpec
    B: np.ndarray
    basis: np.ndarray
    concentrations: Optional[np.ndarray] = None

    @property
    def kind(self) -> BemKind:
        return self.spec.kind

    @property
    def N(self) -> int:
        return self.B.shape[0]

    @property
    def Q(self) -> int:
        return self.B.shape[1]


def _raw_matrix(spec: BemSpec):
    n = np.arange(spec.N)[:, None]
    q = np.arange(spec.Q)[None, :]
    centered = q - (spec.Q - 1) / 2
    if spec.kind is BemKind.CE_BEM:
        return np.exp(2j * np.pi * n * centered / spec.N), None
    if spec.kind is BemKind.GCE_BEM:
        return np.exp(2j * np.pi * n * centered / (spec.K * spec.N)), None
    if spec.kind is BemKind.P_BEM:
        return (((n - (spec.N - 1) / 2) / spec.N) ** q).astype(complex), None
    if spec.N <= 2:
        # scipy's dpss mishandles one- and two-sample windows
        return _kernel_slepians(spec.N, spec.slepian_bandwidth, spec.Q)
    # tridiagonal commuting-matrix solver; accurate for tiny time-bandwidth
    windows, ratios = dpss(spec.N, spec.N * spec.slepian_bandwidth, Kmax=spec.Q,
                           sym=True, norm=2, return_ratios=True)
    windows = np.atleast_2d(windows)
    return windows.T.astype(complex), np.atleast_1d(ratios)


def _kernel_slepians(n: int, w: float, q: int):
    """Dominant eigenvectors of the sinc kernel, sign-fixed like scipy's dpss."""
    d = np.arange(n)[:, None] - np.arange(n)[None, :]
    kernel = np.where(d == 0, 2 * w, np.sin(2 * np.pi * w * d) / (np.pi * np.where(d == 0, 1, d)))
    lam, vec = np.linalg.eigh(kernel)
    lam, vec = lam[::-1][:q], vec[:, ::-1][:, :q]
    for k in range(q):
        ref = vec[:, k].sum() if k % 2 == 0 else vec[0, k]
        if ref < 0:
            vec[:, k] = -vec[:, k]
    return vec.astype(complex), lam


def orthonormal_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of ``b``.

    Column ``q`` of the result spans the same nested subspace as the first
    ``q+1`` columns of ``b``, so an input that is already orthonormal comes
    back unchanged.

    Raises
    ------
    DegenerateBasisError
        If ``b`` is numerically rank deficient.
    """
    b = np.asarray(b, dtype=complex)
    result = numerical_rank(b)
    if result.rank < b.shape[1]:
        raise DegenerateBasisError(
            f"numerical rank {result.rank} < {b.shape[1]} columns")
    q, r = np.linalg.qr(b)
    phase = np.diag(r) / np.abs(np.diag(r))
    return q * phase[None, :]


def build_bem(spec: BemSpec) -> BemMatrix:
    """Construct the basis matrix of ``spec``."""
    b, ratios = _raw_matrix(spec)
    return BemMatrix(spec=spec, B=b, basis=orthonormal_basis(b), concentrations=ratios)


def bem(kind, N: int, Q: int, f_D: float = 0.0, **kwargs) -> BemMatrix:
    """Shorthand for ``build_bem(BemSpec(kind, N, Q, f_D, ...))``."""
    return build_bem(BemSpec(kind, N, Q, f_D, **kwargs))


@dataclass(frozen=True)
class BemFit:
    coefficients: np.ndarray
    residual_norm: np.ndarray


def fit_bem(bem_matrix, h_tap: np.ndarray) -> BemFit:
    """Least-squares BEM coefficients of one tap (``(N,)``) or several (``(L, N)``)."""
    b = bem_matrix.B if isinstance(bem_matrix, BemMatrix) else np.asarray(bem_matrix)
    h_tap = np.asarray(h_tap, dtype=complex)
    rhs = h_tap.T if h_tap.ndim == 2 else h_tap
    coef, *_ = np.linalg.lstsq(b, rhs, rcond=None)
    resid = np.linalg.norm(rhs - b @ coef, axis=0)
    if h_tap.ndim == 2:
        return BemFit(coef.T, resid)
    return BemFit(coef, np.float64(resid))
