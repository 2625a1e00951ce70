"""Channel construction: finite path sets, the angular-domain gain matrix,
spatial-domain reconstruction, and the truncation / extension / shrink
operators used to compare antenna spacings.

The physical channel is a finite sum over propagation paths; each path has
a complex attenuation and a pair of directional cosines (departure and
arrival).  The angular representation collects the path sum against the
transmit and receive array kernels on the beam grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .arraykit import ArrayGeometry, array_kernel, dft_basis, main_lobe_indices, signature

__all__ = [
    "PathSet",
    "AngularChannel",
    "DomainRestriction",
    "rayleigh_instance",
    "angular_gains",
    "spatial_channel",
    "spatial_from_paths",
    "normalized_snr",
    "truncate",
    "extend_matrix",
    "shrink",
]

_MAX_REJECTION_DRAWS = 10**6


@dataclass(frozen=True)
class DomainRestriction:
    """Restriction of directional cosines to ``[-(1 - s/L), 1 - s/L]``.

    ``s_l`` is the value, at this array length, of a slowly diverging
    integer sequence (grows without bound, but slower than ``L``).
    """

    s_l: int
    length: int

    def __post_init__(self) -> None:
        if not 1 <= self.s_l <= self.length:
            raise ValueError(f"need 1 <= s_l <= L, got s_l={self.s_l}, L={self.length}")

    @classmethod
    def sqrt_rule(cls, length: int) -> "DomainRestriction":
        """Default rule ``s_L = ceil(sqrt(L))``."""
        return cls(math.isqrt(length - 1) + 1 if length > 1 else 1, length)

    @property
    def bound(self) -> float:
        return 1.0 - self.s_l / self.length

    def contains(self, omega: float | np.ndarray) -> bool | np.ndarray:
        return np.abs(omega) <= self.bound

    def grid(self, points: int) -> np.ndarray:
        """Uniform grid over the restricted interval."""
        return np.linspace(-self.bound, self.bound, points)


@dataclass(frozen=True)
class PathSet:
    """Finite set of propagation paths.

    Attributes:
        attenuation: complex gains per path.
        omega_t: transmit directional cosines in ``[-1, 1]``.
        omega_r: receive directional cosines in ``[-1, 1]``.
    """

    attenuation: np.ndarray
    omega_t: np.ndarray
    omega_r: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.attenuation, dtype=complex, ndmin=1)
        ot = np.array(self.omega_t, dtype=float, ndmin=1)
        orr = np.array(self.omega_r, dtype=float, ndmin=1)
        if not (a.shape == ot.shape == orr.shape) or a.ndim != 1:
            raise ValueError("attenuation and cosine arrays must be 1-D and equal length")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite attenuation")
        for arr in (a, ot, orr):
            arr.setflags(write=False)
        object.__setattr__(self, "attenuation", a)
        object.__setattr__(self, "omega_t", ot)
        object.__setattr__(self, "omega_r", orr)

    def __len__(self) -> int:
        return self.attenuation.shape[0]

    @classmethod
    def empty(cls) -> "PathSet":
        return cls(np.zeros(0, complex), np.zeros(0), np.zeros(0))

    @property
    def total_power(self) -> float:
        """Sum of squared attenuation magnitudes."""
        return float(np.sum(np.abs(self.attenuation) ** 2))

    def power_exceeds(self, bound: float) -> bool:
        """Flag (never drop) instances whose total power passes a bound."""
        return self.total_power > bound

    def restricted_to(self, rest_t: DomainRestriction, rest_r: DomainRestriction) -> bool:
        """Whether every path cosine lies in the restricted intervals."""
        return bool(np.all(rest_t.contains(self.omega_t)) and np.all(rest_r.contains(self.omega_r)))

    def to_json(self) -> str:
        """Serialize as ``{"paths": [{re, im, omega_t, omega_r}, ...]}``."""
        paths = [
            {
                "re": float(a.real),
                "im": float(a.imag),
                "omega_t": float(ot),
                "omega_r": float(orr),
            }
            for a, ot, orr in zip(self.attenuation, self.omega_t, self.omega_r)
        ]
        return json.dumps({"paths": paths})

    @classmethod
    def from_json(cls, text: str) -> "PathSet":
        doc = json.loads(text)
        paths = doc["paths"]
        if not paths:
            return cls.empty()
        a = np.array([complex(p["re"], p["im"]) for p in paths])
        ot = np.array([p["omega_t"] for p in paths])
        orr = np.array([p["omega_r"] for p in paths])
        return cls(a, ot, orr)


@dataclass(frozen=True)
class AngularChannel:
    """Angular-domain gain matrix together with its two array geometries."""

    gains: np.ndarray
    geom_t: ArrayGeometry
    geom_r: ArrayGeometry

    def __post_init__(self) -> None:
        g = np.asarray(self.gains, dtype=complex)
        expected = (self.geom_r.elements, self.geom_t.elements)
        if g.shape != expected:
            raise ValueError(f"gain matrix shape {g.shape} does not match geometry {expected}")
        g = np.array(g)  # private copy
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def shape(self) -> tuple[int, int]:
        return self.gains.shape

    @property
    def dof(self) -> int:
        """Maximum spatial degrees of freedom ``2 min{L_t, L_r}``."""
        return 2 * min(self.geom_t.length, self.geom_r.length)

    def scaled_sigma_max(self) -> float:
        """Largest singular value of ``gains / sqrt(2 min{L_t, L_r})``.

        Instances whose value exceeds a configured bound are tagged by the
        harness, never dropped.
        """
        if self.gains.size == 0:
            return 0.0
        top = np.linalg.svd(self.gains, compute_uv=False)[0]
        return float(top / np.sqrt(self.dof))


def rayleigh_instance(
    p_count: int,
    geom_t: ArrayGeometry,
    geom_r: ArrayGeometry,
    rng: np.random.Generator,
    restriction_t: DomainRestriction | None = None,
    restriction_r: DomainRestriction | None = None,
) -> PathSet:
    """Draw a ``P``-path Rayleigh instance.

    Attenuations are i.i.d. circular complex Gaussian with variance ``1/P``;
    departure and arrival angles are uniform on ``[0, 2 pi)`` and enter via
    their cosines.  With a restriction, angles are rejection-resampled
    (keeping the conditional distribution uniform on the retained set)
    until both cosines lie inside their restricted intervals.
    """
    if p_count < 1:
        raise ValueError("need at least one path")
    a = (rng.standard_normal(p_count) + 1j * rng.standard_normal(p_count)) * np.sqrt(
        0.5 / p_count
    )
    omega_t = np.cos(rng.uniform(0.0, 2.0 * np.pi, p_count))
    omega_r = np.cos(rng.uniform(0.0, 2.0 * np.pi, p_count))
    if restriction_t is not None or restriction_r is not None:
        ok_t = restriction_t.contains(omega_t) if restriction_t else np.ones(p_count, bool)
        ok_r = restriction_r.contains(omega_r) if restriction_r else np.ones(p_count, bool)
        bad = ~(ok_t & ok_r)
        draws = 0
        while np.any(bad):
            count = int(bad.sum())
            draws += count
            if draws > _MAX_REJECTION_DRAWS * p_count:
                raise RuntimeError("rejection resampling exceeded draw budget; restriction degenerate")
            omega_t[bad] = np.cos(rng.uniform(0.0, 2.0 * np.pi, count))
            omega_r[bad] = np.cos(rng.uniform(0.0, 2.0 * np.pi, count))
            ok_t = restriction_t.contains(omega_t) if restriction_t else np.ones(p_count, bool)
            ok_r = restriction_r.contains(omega_r) if restriction_r else np.ones(p_count, bool)
            bad = ~(ok_t & ok_r)
    return PathSet(a, omega_t, omega_r)


def angular_gains(paths: PathSet, geom_t: ArrayGeometry, geom_r: ArrayGeometry) -> AngularChannel:
    """Angular gain matrix of a path set.

    Entry ``(n, m)`` is ``sqrt(4 L_t L_r) * sum_p a_p k_r(n/L_r - omega_r,p)
    * conj(k_t(m/L_t - omega_t,p))`` with ``k`` the array kernels.  An empty
    path set yields the all-zero matrix.
    """
    l_t, l_r = geom_t.length, geom_r.length
    big_m, big_n = geom_t.elements, geom_r.elements
    if len(paths) == 0:
        return AngularChannel(np.zeros((big_n, big_m), complex), geom_t, geom_r)
    n = np.arange(big_n)
    m = np.arange(big_m)
    f_r = np.asarray(array_kernel(geom_r, n[:, None] / l_r - paths.omega_r[None, :]))
    f_t = np.asarray(array_kernel(geom_t, m[:, None] / l_t - paths.omega_t[None, :]))
    gains = np.sqrt(4.0 * l_t * l_r) * np.einsum(
        "np,p,mp->nm", f_r, paths.attenuation, f_t.conj()
    )
    return AngularChannel(gains, geom_t, geom_r)


def spatial_channel(ch: AngularChannel) -> np.ndarray:
    """Spatial-domain channel matrix recovered from the angular gains.

    Returns ``U_r G U_t^H / sqrt(4 delta_t delta_r)``; agrees with the
    direct per-path construction of :func:`spatial_from_paths`.
    """
    u_r = dft_basis(ch.geom_r)
    u_t = dft_basis(ch.geom_t)
    scale = np.sqrt(4.0 * ch.geom_t.delta * ch.geom_r.delta)
    return (u_r @ ch.gains @ u_t.conj().T) / scale


def spatial_from_paths(paths: PathSet, geom_t: ArrayGeometry, geom_r: ArrayGeometry) -> np.ndarray:
    """Direct spatial construction ``sqrt(NM) sum_p a_p s_r s_t^H``."""
    big_m, big_n = geom_t.elements, geom_r.elements
    h = np.zeros((big_n, big_m), complex)
    for a, ot, orr in zip(paths.attenuation, paths.omega_t, paths.omega_r):
        h += a * np.outer(signature(geom_r, orr), signature(geom_t, ot).conj())
    return np.sqrt(big_n * big_m) * h


def normalized_snr(gamma: float, delta_t: float, delta_r: float) -> float:
    """Normalized SNR ``gamma / (4 delta_t delta_r)``.

    At least ``gamma``, with equality only for critical spacing on both
    sides; the excess is the power gain of dense spacing.
    """
    if gamma <= 0:
        raise ValueError("SNR must be positive")
    delta_t, delta_r = float(delta_t), float(delta_r)
    if not (0 < delta_t <= 0.5 and 0 < delta_r <= 0.5):
        raise ValueError("separations must lie in (0, 1/2]")
    return gamma / (4.0 * delta_t * delta_r)


def truncate(ch: AngularChannel) -> AngularChannel:
    """Zero every gain outside the main-lobe index sets.

    Rows keep ``[0:L_r] + [N-L_r:N)``, columns keep ``[0:L_t] + [M-L_t:M)``.
    With critical spacing on both sides the sets cover everything and a
    copy is returned.
    """
    rows = main_lobe_indices(ch.geom_r.length, ch.geom_r.elements)
    cols = main_lobe_indices(ch.geom_t.length, ch.geom_t.elements)
    out = np.zeros_like(ch.gains)
    out[np.ix_(rows, cols)] = ch.gains[np.ix_(rows, cols)]
    return AngularChannel(out, ch.geom_t, ch.geom_r)


def extend_matrix(a: np.ndarray, n: int, k: int) -> np.ndarray:
    """Insert ``k`` all-zero columns and rows after the first ``n`` of each.

    Removing the inserted rows and columns recovers ``a`` exactly; the
    trace of a square matrix is preserved.
    """
    a = np.asarray(a)
    rows, cols = a.shape
    if k < 0:
        raise ValueError("insertion count must be nonnegative")
    if not 0 <= n <= min(rows, cols):
        raise ValueError(f"split index {n} outside [0, {min(rows, cols)}]")
    out = np.zeros((rows + k, cols + k), dtype=a.dtype)
    out[:n, :n] = a[:n, :n]
    out[:n, n + k :] = a[:n, n:]
    out[n + k :, :n] = a[n:, :n]
    out[n + k :, n + k :] = a[n:, n:]
    return out


def _shrink_order(length: int, elements: int) -> np.ndarray:
    # Keep the main-lobe indices, then move index L to the last position.
    return np.concatenate(
        [np.arange(length), np.arange(elements - length, elements), [length]]
    )


def shrink(ch_truncated: AngularChannel) -> np.ndarray:
    """Collapse a truncated matrix onto its ``(2L_r+1) x (2L_t+1)`` support.

    Drops the all-zero rows and columns left by :func:`truncate` and moves
    the row ``L_r`` and column ``L_t`` (the wrap-around beams) to the last
    positions.  Requires dense spacing on both sides, so that the dropped
    index sets are nonempty.
    """
    geom_t, geom_r = ch_truncated.geom_t, ch_truncated.geom_r
    if geom_t.elements <= 2 * geom_t.length or geom_r.elements <= 2 * geom_r.length:
        raise ValueError("shrink needs dense spacing (delta < 1/2) on both sides")
    rows = _shrink_order(geom_r.length, geom_r.elements)
    cols = _shrink_order(geom_t.length, geom_t.elements)
    return ch_truncated.gains[np.ix_(rows, cols)]
