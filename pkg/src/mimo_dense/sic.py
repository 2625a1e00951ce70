"""LMMSE-SIC receiver chain.

Per-stage SINRs come from a backward rank-one-update recursion over the
interference-plus-noise inverse; the Gaussian rates they induce sum to the
log-det capacity.  Scalar AWGN mutual information for QPSK is evaluated by
Gauss-Hermite quadrature (a QPSK symbol over a complex AWGN channel splits
into two independent BPSK halves at the same SNR).  For tiny systems an
exponential-cost Monte Carlo oracle evaluates the exact vector mutual
information.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .arraykit import ArrayGeometry, dft_basis
from .capacity import CovarianceSpec
from .channel import AngularChannel

__all__ = [
    "EffectiveChannel",
    "SicTrace",
    "effective_matrix",
    "sic_sinrs",
    "sic_sinrs_direct",
    "run_sic",
    "gaussian_sic_rate",
    "bpsk_awgn_mi",
    "qpsk_awgn_mi",
    "qpsk_sic_lower_bound",
    "MonteCarloEstimate",
    "brute_force_qpsk_mi",
    "SinrDiagnostics",
    "sinr_diagnostics",
]

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(129)
_BRUTE_FORCE_MAX_STREAMS = 6
_QPSK_SYMBOLS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class EffectiveChannel:
    """Effective matrix seen by the symbol vector, with its normalized SNR."""

    a: np.ndarray
    gamma_tilde: float

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=complex)
        if a.ndim != 2:
            raise ValueError("effective channel must be a matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite effective channel entries")
        if self.gamma_tilde <= 0:
            raise ValueError("normalized SNR must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def streams(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class SicTrace:
    """Per-stage SINRs and the rate sums they induce.

    ``multiuser_efficiencies`` holds ``rho_m / (delta_t * gamma_tilde)``.
    """

    sinrs: np.ndarray
    gaussian_rate_nats: float
    qpsk_rate_nats: float
    multiuser_efficiencies: np.ndarray


def effective_matrix(
    ch: AngularChannel, cov: CovarianceSpec, gamma_tilde: float
) -> EffectiveChannel:
    """Effective channel ``A = U_r G U_t^H Q^{1/2}`` for precoded symbols.

    ``Q^{1/2}`` is the PSD root of the antenna-domain covariance; in the
    angular parameterization this reduces to ``U_r G sigma^{1/2} U_t^H``.
    """
    if cov.dim != ch.geom_t.elements:
        raise ValueError("covariance dimension does not match transmit antennas")
    u_r = dft_basis(ch.geom_r)
    u_t = dft_basis(ch.geom_t)
    a = u_r @ ch.gains @ cov.sqrt() @ u_t.conj().T
    return EffectiveChannel(a, gamma_tilde)


def sic_sinrs(eff: EffectiveChannel) -> np.ndarray:
    """Per-stage SINRs ``rho_m = gamma a_m^H Xi_m a_m``.

    ``Xi_m`` inverts identity plus the undetected-stream interference;
    starting from the last stage (no interference) each earlier inverse is
    a rank-one downdate with the newly-included column, so the whole chain
    costs O(M N^2).
    """
    gt = eff.gamma_tilde
    n, m_total = eff.a.shape
    xi = np.eye(n, dtype=complex)
    rho = np.zeros(m_total)
    for m in range(m_total - 1, -1, -1):
        col = eff.a[:, m]
        u = xi @ col
        quad = float(np.real(col.conj() @ u))
        rho[m] = gt * quad
        if m > 0:
            xi -= (gt / (1.0 + gt * quad)) * np.outer(u, u.conj())
    return rho


def sic_sinrs_direct(eff: EffectiveChannel) -> np.ndarray:
    """Reference SINRs with one explicit inversion per stage (O(M N^3))."""
    gt = eff.gamma_tilde
    n, m_total = eff.a.shape
    rho = np.zeros(m_total)
    for m in range(m_total):
        tail = eff.a[:, m + 1 :]
        xi = np.linalg.inv(np.eye(n) + gt * tail @ tail.conj().T)
        col = eff.a[:, m]
        rho[m] = gt * float(np.real(col.conj() @ xi @ col))
    return rho


def run_sic(eff: EffectiveChannel, delta_t: float) -> SicTrace:
    """Run the SIC chain and collect rates and efficiency statistics."""
    rho = sic_sinrs(eff)
    gaussian = float(np.log1p(rho).sum())
    qpsk = float(np.sum(qpsk_awgn_mi(rho)))
    eff_stats = rho / (float(delta_t) * eff.gamma_tilde)
    return SicTrace(rho, gaussian, qpsk, eff_stats)


def gaussian_sic_rate(trace: SicTrace) -> float:
    """Gaussian-signaling rate sum ``sum_m log(1 + rho_m)``.

    Equals the log-det constrained capacity of the same effective channel;
    SIC with Gaussian inputs loses nothing.
    """
    return float(np.log1p(trace.sinrs).sum())


def bpsk_awgn_mi(snr) -> float | np.ndarray:
    """Mutual information (nats) of BPSK over the real AWGN channel.

    ``y = sqrt(snr) b + n`` with equiprobable ``b = +-1`` and unit-variance
    noise, evaluated by 129-node Gauss-Hermite quadrature.  Monotone in the
    SNR and confined to ``[0, log 2]``.
    """
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0):
        raise ValueError("SNR must be nonnegative")
    s = snr[..., None]
    exponent = -2.0 * s - 2.0 * np.sqrt(2.0 * s) * _GH_NODES
    expect = (np.logaddexp(0.0, exponent) * _GH_WEIGHTS).sum(-1) / np.sqrt(np.pi)
    out = np.clip(np.log(2.0) - expect, 0.0, np.log(2.0))
    return out if out.ndim else float(out)


def qpsk_awgn_mi(rho) -> float | np.ndarray:
    """Mutual information (nats) of unit-power QPSK over complex AWGN.

    The real and imaginary halves are independent BPSK channels, each with
    half the signal power against half the noise power, so the total is
    ``2 * bpsk_awgn_mi(rho)``; confined to ``[0, log 4]``.
    """
    return 2.0 * bpsk_awgn_mi(rho)


def qpsk_sic_lower_bound(eff: EffectiveChannel) -> float:
    """Achievable-rate lower bound ``sum_m qpsk_awgn_mi(rho_m)`` in nats.

    Each SIC stage is lower-bounded by a scalar QPSK-over-Gaussian-noise
    channel at that stage's SINR; never exceeds the Gaussian rate sum.
    """
    return float(np.sum(qpsk_awgn_mi(sic_sinrs(eff))))


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float


def brute_force_qpsk_mi(
    eff: EffectiveChannel, sample_count: int, rng: np.random.Generator
) -> MonteCarloEstimate:
    """Monte Carlo estimate of the exact QPSK vector mutual information.

    Enumerates the full ``4^M`` constellation to evaluate the mixture
    likelihood, so it is restricted to ``M <= 6`` streams.  Reports the
    sample mean of the information density and its standard error.
    """
    m = eff.streams
    if m > _BRUTE_FORCE_MAX_STREAMS:
        raise ValueError(f"constellation enumeration limited to M <= {_BRUTE_FORCE_MAX_STREAMS}")
    if sample_count < 2:
        raise ValueError("need at least two samples")
    scaled = np.sqrt(eff.gamma_tilde) * eff.a
    constellation = np.array(list(itertools.product(_QPSK_SYMBOLS, repeat=m)))
    images = constellation @ scaled.T  # (4^M, N)
    k = images.shape[0]
    n_rx = scaled.shape[0]
    values = np.empty(sample_count)
    done = 0
    while done < sample_count:
        chunk = min(20_000, sample_count - done)
        idx = rng.integers(0, k, chunk)
        noise = (
            rng.standard_normal((chunk, n_rx)) + 1j * rng.standard_normal((chunk, n_rx))
        ) / np.sqrt(2.0)
        received = images[idx] + noise
        # log p(y) up to the common Gaussian constant, via logsumexp
        d2 = (np.abs(received[:, None, :] - images[None, :, :]) ** 2).sum(-1)
        log_mix = -d2
        peak = log_mix.max(axis=1, keepdims=True)
        log_py = peak[:, 0] + np.log(np.exp(log_mix - peak).sum(axis=1)) - np.log(k)
        log_py_given_b = -(np.abs(noise) ** 2).sum(-1)
        values[done : done + chunk] = log_py_given_b - log_py
        done += chunk
    return MonteCarloEstimate(
        float(values.mean()), float(values.std(ddof=1) / np.sqrt(sample_count))
    )


@dataclass(frozen=True)
class SinrDiagnostics:
    """Per-stage SINR bound checks and boundedness statistics.

    ``sinr_over_snr`` is ``rho_m / gamma_tilde``; ``column_bound`` is the
    squared norm of the corresponding effective column, which upper-bounds
    it (with equality only when a column sees no interference, e.g. the
    final stage).
    """

    sinr_over_snr: np.ndarray
    column_bound: np.ndarray
    bound_ok: np.ndarray
    max_multiuser_efficiency: float
    assumption3_stat: float


def sinr_diagnostics(
    eff: EffectiveChannel, geom_t: ArrayGeometry, cov: CovarianceSpec
) -> SinrDiagnostics:
    """Check the column-norm SINR bound and the precoder column statistic.

    The precoder statistic is ``max_m 2 L_t (Q)_{mm} / delta_t``; identity
    precoding gives exactly 2, main-lobe precoders stay below three times
    the largest scaled covariance eigenvalue.  Violations are reported,
    never raised.
    """
    rho = sic_sinrs(eff)
    ratio = rho / eff.gamma_tilde
    bound = (np.abs(eff.a) ** 2).sum(axis=0)
    ok = ratio <= bound * (1.0 + 1e-9) + 1e-15
    u_t = dft_basis(geom_t)
    q_diag = np.einsum("mj,jk,mk->m", u_t, cov.matrix, u_t.conj()).real
    stat = float((2.0 * geom_t.length * q_diag / geom_t.delta).max())
    max_eff = float((rho / (geom_t.delta * eff.gamma_tilde)).max()) if rho.size else 0.0
    return SinrDiagnostics(ratio, bound, ok, max_eff, stat)
