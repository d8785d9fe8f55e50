"""Doubly-selective channel generation, OFDM demodulation and LS estimation.

Taps are stored as an ``(L, N)`` array: ``taps[l, n]`` is the gain of path
``l`` at sample ``L + n`` of the symbol, i.e. after the cyclic prefix is
dropped. The demodulated symbol vector is

    y = (1/N) F Htilde F^H x + noise,   Htilde[p, m] = taps[<p - m>, p]

with ``Htilde[p, m] = 0`` whenever ``<p - m> >= L``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bem import BemMatrix, fit_bem
from .estimation import EstimationMatrix, observation_vector
from .geometry import SystemGeometry
from .linalg import numerical_rank
from .pilots import PilotPattern, embed_pattern

#: Sinusoids per tap in the sum-of-sinusoids model.
N_SINUSOIDS = 32


class ChannelModel(str, enum.Enum):
    BEM_EXACT = "bem-exact"
    SUM_OF_SINUSOIDS = "sos"


class RankDeficientError(ValueError):
    """The estimation matrix has no left inverse."""


@dataclass(frozen=True)
class ChannelRealization:
    """One transmitter's channel over one OFDM symbol.

    Attributes
    ----------
    taps : np.ndarray
        ``(L, N)`` tap gains at samples ``L .. L+N-1``.
    coefficients : np.ndarray or None
        ``(L, Q)`` BEM coefficients; exact for BEM_EXACT, ``None`` otherwise.
    power_profile : np.ndarray
        Per-tap variance, summing to one.
    """

    taps: np.ndarray
    model: ChannelModel
    seed: Optional[int]
    power_profile: np.ndarray
    coefficients: Optional[np.ndarray] = None

    @property
    def L(self) -> int:
        return self.taps.shape[0]

    @property
    def N(self) -> int:
        return self.taps.shape[1]


def power_profile(L: int, kind: str = "uniform", decay: float = 1.0) -> np.ndarray:
    """Per-tap variances summing to one; ``exponential`` decays as ``exp(-l/decay)``."""
    if kind == "uniform":
        p = np.ones(L)
    elif kind == "exponential":
        p = np.exp(-np.arange(L) / decay)
    else:
        raise ValueError(f"unknown power profile {kind!r}")
    return p / p.sum()


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sum_of_sinusoids(geo: SystemGeometry, rng: np.random.Generator,
                     profile: np.ndarray, n_components: int = N_SINUSOIDS) -> np.ndarray:
    """Taps ``sqrt(P_l/M) * sum_m exp(j(2 pi f_D cos(a_m) t / N + phi_m))``.

    Angles and phases are uniform; ``t = L + n`` runs over the useful part
    of the symbol. The autocorrelation at lag ``tau`` tends to
    ``P_l * J0(2 pi f_D tau / N)``.
    """
    t = geo.L + np.arange(geo.N)
    alpha = rng.uniform(0, 2 * np.pi, size=(geo.L, n_components))
    phase = rng.uniform(0, 2 * np.pi, size=(geo.L, n_components))
    freq = geo.f_D * np.cos(alpha) / geo.N
    arg = 2 * np.pi * freq[:, :, None] * t[None, None, :] + phase[:, :, None]
    return np.sqrt(profile / n_components)[:, None] * np.exp(1j * arg).sum(axis=1)


def generate_channel(geo: SystemGeometry, model=ChannelModel.SUM_OF_SINUSOIDS, seed=None,
                     bem: Optional[BemMatrix] = None, profile: str = "uniform",
                     n_components: int = N_SINUSOIDS) -> ChannelRealization:
    """Draw one channel realization; identical seeds give identical channels.

    BEM_EXACT draws coefficients ``h_l ~ CN(0, P_l I)`` and sets
    ``taps[l] = B @ h_l``, so it needs ``bem``.
    """
    model = ChannelModel(model)
    rng = _rng(seed)
    prof = power_profile(geo.L, profile)
    seed_echo = seed if isinstance(seed, (int, np.integer)) else None
    if model is ChannelModel.BEM_EXACT:
        if bem is None:
            raise ValueError("BEM_EXACT needs a BEM")
        if bem.N != geo.N:
            raise ValueError(f"BEM window {bem.N} != N={geo.N}")
        coef = np.sqrt(prof)[:, None] * _cn(rng, (geo.L, bem.Q))
        return ChannelRealization(coef @ bem.B.T, model, seed_echo, prof, coef)
    taps = sum_of_sinusoids(geo, rng, prof, n_components)
    return ChannelRealization(taps, model, seed_echo, prof)


def channel_matrix(taps: np.ndarray) -> np.ndarray:
    """Time-domain ``N x N`` matrix ``Htilde`` of an ``(L, N)`` tap array."""
    L, N = taps.shape
    h = np.zeros((N, N), dtype=complex)
    p = np.arange(N)
    for l in range(L):
        h[p, (p - l) % N] += taps[l]
    return h


def apply_channel(taps: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Noiseless ``(1/N) F Htilde F^H x`` without forming any matrix."""
    s = np.fft.ifft(x)
    r = np.zeros_like(s)
    for l in range(taps.shape[0]):
        r += taps[l] * np.roll(s, l)
    return np.fft.fft(r)


@dataclass(frozen=True)
class OfdmFrame:
    x: np.ndarray
    y: np.ndarray
    y_bar: np.ndarray
    snr_db: Optional[float]


def qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    """Unit-energy QPSK symbols."""
    bits = rng.integers(0, 2, size=(n, 2))
    return ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])) / np.sqrt(2)


def transmit_vector(pattern: PilotPattern, geo: SystemGeometry, data: bool = False,
                    seed=None) -> np.ndarray:
    """``x = p + d`` with QPSK on every non-pilot subcarrier when ``data``."""
    pv = embed_pattern(pattern, geo)
    x = pv.p.copy()
    if data:
        x[pv.data_slots] = qpsk(_rng(seed), pv.data_slots.size)
    return x


def noise_variance(snr_db: Optional[float]) -> float:
    """Per-subcarrier noise variance against unit symbol energy."""
    return 0.0 if snr_db is None else float(10 ** (-snr_db / 10))


def ofdm_demodulate(x, channels, geo: SystemGeometry, snr_db: Optional[float] = None,
                    seed=None, noise: Optional[np.ndarray] = None) -> OfdmFrame:
    """Pass one transmit vector per transmitter through its channel and add noise.

    Parameters
    ----------
    x : array_like
        ``(N,)`` or ``(N_T, N)`` transmit vectors.
    channels : ChannelRealization, ndarray or sequence thereof
        One ``(L, N)`` tap set per transmitter.
    noise : np.ndarray, optional
        Unit-variance frequency-domain noise to scale instead of drawing
        fresh samples; lets several SNRs share one noise draw.
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if x.shape[1] != geo.N:
        raise ValueError(f"transmit vector length {x.shape[1]} != N={geo.N}")
    if isinstance(channels, ChannelRealization):
        channels = [channels]
    elif isinstance(channels, np.ndarray):
        channels = list(channels) if channels.ndim == 3 else [channels]
    taps = [c.taps if isinstance(c, ChannelRealization) else np.asarray(c) for c in channels]
    if len(taps) != x.shape[0]:
        raise ValueError(f"{x.shape[0]} transmit vectors but {len(taps)} channels")
    y = sum(apply_channel(t, xi) for t, xi in zip(taps, x))
    if snr_db is not None:
        if noise is None:
            # time-domain CN(0, s2) noise mapped through F / sqrt(N) keeps variance s2
            noise = np.fft.fft(_cn(_rng(seed), geo.N)) / np.sqrt(geo.N)
        y = y + np.sqrt(noise_variance(snr_db)) * noise
    out_x = x[0] if x.shape[0] == 1 else x
    return OfdmFrame(out_x, y, observation_vector(y, geo), snr_db)


@dataclass(frozen=True)
class EstimateResult:
    """LS estimate and, when the truth is known, its errors.

    Attributes
    ----------
    h_hat : np.ndarray
        ``N_T*L*Q`` coefficients in estimation-matrix column order.
    taps_hat : np.ndarray
        ``(N_T, L, N)`` reconstructed taps ``B @ h_l``.
    """

    h_hat: np.ndarray
    taps_hat: np.ndarray
    nmse_coeff: float = float("nan")
    nmse_taps: float = float("nan")
    nmse_taps_per_path: Optional[np.ndarray] = None


def stack_coefficients(channels: Sequence[ChannelRealization], bem: BemMatrix) -> np.ndarray:
    """True coefficient vector in column order; LS fits stand in for non-BEM channels."""
    parts = []
    for ch in channels:
        coef = ch.coefficients if ch.coefficients is not None else fit_bem(bem, ch.taps).coefficients
        parts.append(np.asarray(coef).ravel())
    return np.concatenate(parts)


def evaluate_nmse(truth: np.ndarray, estimate: np.ndarray, axis=None):
    """``|truth - estimate|^2 / |truth|^2``; NaN where the truth is zero."""
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {estimate.shape}")
    num = np.sum(np.abs(truth - estimate) ** 2, axis=axis)
    den = np.sum(np.abs(truth) ** 2, axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return float(out) if np.ndim(out) == 0 else out


def ls_estimate(est: EstimationMatrix, y_bar: np.ndarray,
                truth: Optional[Sequence[ChannelRealization]] = None) -> EstimateResult:
    """``h_hat = pinv(P) @ y_bar``.

    Raises
    ------
    RankDeficientError
        If ``P`` lacks full column rank, since the estimate is then not
        unique.
    """
    rank = numerical_rank(est.P)
    if rank.rank < est.n_columns:
        raise RankDeficientError(
            f"estimation matrix rank {rank.rank} < {est.n_columns} columns; "
            "check feasibility and theta orthogonality")
    h_hat = np.linalg.pinv(est.P) @ np.asarray(y_bar)
    L, Q = est.geo.L, est.bem.Q
    coef = h_hat.reshape(est.n_tx, L, Q)
    taps_hat = coef @ est.bem.B.T
    if truth is None:
        return EstimateResult(h_hat, taps_hat)
    if isinstance(truth, ChannelRealization):
        truth = [truth]
    true_taps = np.stack([ch.taps for ch in truth])
    per_path = evaluate_nmse(true_taps, taps_hat, axis=2)
    return EstimateResult(
        h_hat, taps_hat,
        nmse_coeff=evaluate_nmse(stack_coefficients(truth, est.bem), h_hat),
        nmse_taps=evaluate_nmse(true_taps, taps_hat),
        nmse_taps_per_path=per_path,
    )


@dataclass
class SimulationResult:
    """Per-SNR NMSE samples from :func:`simulate`."""

    snr_db: List[Optional[float]]
    nmse_coeff: Dict[Optional[float], List[float]] = field(default_factory=dict)
    nmse_taps: Dict[Optional[float], List[float]] = field(default_factory=dict)

    def summary(self) -> List[Dict[str, object]]:
        rows = []
        for snr in self.snr_db:
            c = np.asarray(self.nmse_coeff[snr])
            t = np.asarray(self.nmse_taps[snr])
            rows.append({
                "snr_db": snr,
                "trials": int(c.size),
                "nmse_coeff_mean": float(c.mean()) if c.size else None,
                "nmse_coeff_median": float(np.median(c)) if c.size else None,
                "nmse_taps_mean": float(t.mean()) if t.size else None,
                "nmse_taps_median": float(np.median(t)) if t.size else None,
            })
        return rows


def simulate(est: EstimationMatrix, snr_db: Sequence[Optional[float]], trials: int,
             seed: int = 0, model=ChannelModel.BEM_EXACT, data: bool = False,
             profile: str = "uniform") -> SimulationResult:
    """Monte-Carlo LS estimation with SNR points paired within each trial.

    Trial ``t`` draws channel, data and one unit noise vector from
    ``SeedSequence([seed, t])``; every SNR point reuses them, so SNR is the
    only thing that changes along a row.
    """
    snrs = list(snr_db)
    result = SimulationResult(snrs, {s: [] for s in snrs}, {s: [] for s in snrs})
    if trials <= 0:
        return result
    # refuse before drawing anything
    ls_estimate(est, np.zeros(est.P.shape[0], dtype=complex))
    geo = est.geo
    for t in range(trials):
        ch_seq, data_seq, noise_seq = np.random.SeedSequence([seed, t]).spawn(3)
        ch_rng = np.random.default_rng(ch_seq)
        channels = [generate_channel(geo, model, ch_rng, bem=est.bem, profile=profile)
                    for _ in est.patterns]
        data_rng = np.random.default_rng(data_seq)
        x = np.stack([transmit_vector(p, geo, data, data_rng) for p in est.patterns])
        unit = np.fft.fft(_cn(np.random.default_rng(noise_seq), geo.N)) / np.sqrt(geo.N)
        for snr in snrs:
            frame = ofdm_demodulate(x, channels, geo, snr, noise=unit)
            res = ls_estimate(est, frame.y_bar, channels)
            result.nmse_coeff[snr].append(res.nmse_coeff)
            result.nmse_taps[snr].append(res.nmse_taps)
    return result
