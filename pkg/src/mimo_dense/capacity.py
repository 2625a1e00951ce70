"""Gaussian constrained capacity, water-filling, covariance presets, and
the normalized capacity gaps between spacing configurations.

Capacities are evaluated in nats from the log-det form, working directly
with the input covariance expressed in the angular basis (``sigma =
U^H Q U``); the antenna-domain matrix ``Q`` never needs to be formed.
All results are normalized by the spatial degrees of freedom
``2 min{L_t, L_r}`` alongside the raw value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arraykit import ArrayGeometry, main_lobe_indices
from .channel import AngularChannel, PathSet, angular_gains, extend_matrix, truncate

__all__ = [
    "CovarianceKind",
    "CovarianceSpec",
    "CapacityResult",
    "constrained_capacity",
    "water_filling",
    "preset_covariance",
    "truncation_gap",
    "SpacingGapResult",
    "spacing_gap",
]

_HERMITIAN_TOL = 1e-12
_PSD_TOL = 1e-10
_TRACE_TOL = 1e-12


class CovarianceKind(enum.Enum):
    IDENTITY_SCALED = "identity_scaled"
    MAIN_LOBE_UNIFORM = "main_lobe_uniform"
    WATER_FILLED = "water_filled"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class CovarianceSpec:
    """Input covariance in the angular basis, trace at most one.

    The matrix must be Hermitian and positive semi-definite within
    tolerance; violations raise at construction.
    """

    kind: CovarianceKind
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance must be square")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m - m.conj().T).max(initial=0.0) > _HERMITIAN_TOL * scale:
            raise ValueError("covariance is not Hermitian within tolerance")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eigs.size and eigs[0] < -_PSD_TOL:
            raise ValueError(f"covariance has negative eigenvalue {eigs[0]:.3e}")
        if np.trace(m).real > 1.0 + _TRACE_TOL:
            raise ValueError(f"covariance trace {np.trace(m).real} exceeds the power budget")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def scaled_max_eigenvalue(self, length_t: int) -> float:
        """Largest eigenvalue of ``2 L_t sigma`` (boundedness diagnostic)."""
        eigs = np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)
        return float(2.0 * length_t * eigs[-1])

    def sqrt(self) -> np.ndarray:
        """PSD square root via eigendecomposition."""
        eigs, vecs = np.linalg.eigh((self.matrix + self.matrix.conj().T) / 2)
        if eigs[0] < -1e-8:
            raise ValueError(f"covariance not PSD enough for a root (min eig {eigs[0]:.3e})")
        root = vecs * np.sqrt(np.clip(eigs, 0.0, None))[None, :]
        return root @ vecs.conj().T


@dataclass(frozen=True)
class CapacityResult:
    """Capacity in nats, its normalization by ``2 min{L_t, L_r}``, and the
    eigenvalues of the Hermitian product ``G sigma G^H``."""

    nats: float
    normalized: float
    eigenvalues: np.ndarray

    @property
    def bits(self) -> float:
        return self.nats / np.log(2.0)


def _product_eigenvalues(ch: AngularChannel, cov: CovarianceSpec) -> np.ndarray:
    b = ch.gains @ cov.matrix @ ch.gains.conj().T
    eigs = np.linalg.eigvalsh((b + b.conj().T) / 2)
    floor = -_PSD_TOL * max(1.0, float(eigs[-1]) if eigs.size else 1.0)
    if eigs.size and eigs[0] < floor:
        raise ValueError(f"product matrix has negative eigenvalue {eigs[0]:.3e}")
    return np.clip(eigs, 0.0, None)


def constrained_capacity(
    ch: AngularChannel, cov: CovarianceSpec, gamma_tilde: float
) -> CapacityResult:
    """Constrained capacity ``log det(I + gamma G sigma G^H)`` in nats."""
    if cov.dim != ch.geom_t.elements:
        raise ValueError(f"covariance dimension {cov.dim} does not match {ch.geom_t.elements} antennas")
    if gamma_tilde <= 0:
        raise ValueError("normalized SNR must be positive")
    eigs = _product_eigenvalues(ch, cov)
    nats = float(np.log1p(gamma_tilde * eigs).sum())
    return CapacityResult(nats, nats / ch.dof, eigs)


def water_filling(ch: AngularChannel, gamma_tilde: float) -> CovarianceSpec:
    """Capacity-maximizing covariance by water-filling the singular modes.

    Power on mode ``i`` is ``max(0, mu - 1/(gamma d_i^2))`` with the level
    ``mu`` found by bisection so the powers sum to one.  Raises on an
    all-zero channel (no water level exists).
    """
    if gamma_tilde <= 0:
        raise ValueError("normalized SNR must be positive")
    _, svals, vh = np.linalg.svd(ch.gains)
    d2 = svals**2
    if not np.any(d2 > 0):
        raise ValueError("water-filling undefined for an all-zero channel")
    active = d2 > d2.max() * 1e-300
    inv = np.where(active, 1.0 / (gamma_tilde * np.where(active, d2, 1.0)), np.inf)
    lo = float(inv.min())  # total power 0 at this level
    hi = lo + 1.0  # the best mode alone already absorbs the budget
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.clip(mid - inv, 0.0, None).sum() > 1.0:
            hi = mid
        else:
            lo = mid
    mu = 0.5 * (lo + hi)
    power = np.clip(mu - inv, 0.0, None)
    total = power.sum()
    if not np.isclose(total, 1.0, atol=1e-8):
        raise RuntimeError(f"water level search failed, allocated {total}")
    power = power / total  # absorb bisection slack so the trace is exact
    m = ch.geom_t.elements
    full_power = np.zeros(m)
    full_power[: power.size] = power
    sigma = (vh.conj().T * full_power[None, :]) @ vh
    return CovarianceSpec(CovarianceKind.WATER_FILLED, sigma)


def preset_covariance(kind: CovarianceKind, geom_t: ArrayGeometry) -> CovarianceSpec:
    """Diagonal covariance presets in the angular basis.

    ``IDENTITY_SCALED`` spreads the unit budget over all beams;
    ``MAIN_LOBE_UNIFORM`` spreads it over the ``2 L_t + 1`` beams whose
    transmit patterns have main lobes.  With critical spacing the two
    coincide and ``I/(2 L_t)`` is returned.
    """
    m = geom_t.elements
    if kind is CovarianceKind.IDENTITY_SCALED:
        diag = np.full(m, float(Fraction(1, m)))
    elif kind is CovarianceKind.MAIN_LOBE_UNIFORM:
        if geom_t.separation == Fraction(1, 2):
            diag = np.full(m, float(Fraction(1, m)))
        else:
            diag = np.zeros(m)
            diag[main_lobe_indices(geom_t.length, m)] = float(
                Fraction(1, 2 * geom_t.length + 1)
            )
    else:
        raise ValueError(f"no preset for covariance kind {kind}")
    return CovarianceSpec(kind, np.diag(diag).astype(complex))


def truncation_gap(ch: AngularChannel, cov: CovarianceSpec, gamma_tilde: float) -> float:
    """Normalized capacity gap between a channel and its main-lobe truncation.

    Both capacities use the same covariance and SNR; the result is
    ``|C(G) - C(G_truncated)| / (2 min{L_t, L_r})``.
    """
    full = constrained_capacity(ch, cov, gamma_tilde)
    trunc = constrained_capacity(truncate(ch), cov, gamma_tilde)
    return abs(full.nats - trunc.nats) / ch.dof


@dataclass(frozen=True)
class SpacingGapResult:
    """Normalized capacity gap between critical and dense spacing, with the
    trace residual of the covariance-pairing condition."""

    gap: float
    condition_residual: float
    capacity_half: CapacityResult
    capacity_dense: CapacityResult


def _embed_dense_covariance(cov_dense: CovarianceSpec, geom_t: ArrayGeometry) -> CovarianceSpec:
    m = geom_t.elements
    side = cov_dense.dim
    if m >= side:
        matrix = extend_matrix(cov_dense.matrix, geom_t.length + 1, m - side)
    else:
        # Critical spacing: the compact covariance carries one extra slot
        # (the wrap-around beam).  Its row/column must be zero for the two
        # parameterizations to describe the same input.
        idx = geom_t.length
        row = np.delete(cov_dense.matrix[idx, :], idx)
        if np.abs(row).max(initial=0.0) > 1e-12 or abs(cov_dense.matrix[idx, idx]) > 1e-12:
            raise ValueError(
                "critical spacing cannot host power on the wrap-around beam slot"
            )
        keep = [i for i in range(side) if i != idx]
        matrix = cov_dense.matrix[np.ix_(keep, keep)]
    if matrix.shape != (m, m):
        raise ValueError(f"embedded covariance has shape {matrix.shape}, expected {(m, m)}")
    return CovarianceSpec(cov_dense.kind, matrix)


def spacing_gap(
    paths: PathSet,
    l_t: int,
    l_r: int,
    delta_t,
    delta_r,
    cov_half: CovarianceSpec,
    cov_dense: CovarianceSpec,
    gamma_tilde: float,
) -> SpacingGapResult:
    """Compare critical spacing against dense spacing on one path set.

    The critically spaced side uses ``cov_half`` (``2L_t x 2L_t``) with the
    full gain matrix; the densely spaced side embeds ``cov_dense``
    (``(2L_t+1) x (2L_t+1)``) onto the main-lobe beams and uses the
    truncated gain matrix.  Also reports the trace residual
    ``Tr{(E(cov_half) - cov_dense)^2}`` of the pairing condition.
    """
    if cov_half.dim != 2 * l_t:
        raise ValueError(f"critical-side covariance must be {2 * l_t} x {2 * l_t}")
    if cov_dense.dim != 2 * l_t + 1:
        raise ValueError(f"dense-side covariance must be {2 * l_t + 1} square")
    geom_t_half = ArrayGeometry(l_t, Fraction(1, 2))
    geom_r_half = ArrayGeometry(l_r, Fraction(1, 2))
    geom_t_dense = ArrayGeometry(l_t, delta_t)
    geom_r_dense = ArrayGeometry(l_r, delta_r)

    ch_half = angular_gains(paths, geom_t_half, geom_r_half)
    cap_half = constrained_capacity(ch_half, cov_half, gamma_tilde)

    ch_dense = truncate(angular_gains(paths, geom_t_dense, geom_r_dense))
    cov_embedded = _embed_dense_covariance(cov_dense, geom_t_dense)
    cap_dense = constrained_capacity(ch_dense, cov_embedded, gamma_tilde)

    diff = extend_matrix(cov_half.matrix, l_t, 1) - cov_dense.matrix
    residual = float(np.trace(diff @ diff).real)
    gap = abs(cap_half.nats - cap_dense.nats) / (2 * min(l_t, l_r))
    return SpacingGapResult(gap, residual, cap_half, cap_dense)
