"""Uniform linear array primitives: spatial signatures, the inner-product
kernel, the periodic sinc, and the angular DFT basis.

A uniform linear array is described by its normalized length ``L`` (in
carrier wavelengths), the normalized element separation ``delta = L/N``,
and the element count ``N``.  The separation is kept as an exact rational
so that the comb identities of the kernel (exact zeros and ones on the
grid ``k/L``) survive index arithmetic.

The kernel is defined on all of the reals.  Physical callers pass
directional cosines in ``[-1, 1]``; diagnostic callers may pass anything.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "ArrayGeometry",
    "signature",
    "array_kernel",
    "periodic_sinc",
    "dft_basis",
    "basis_expand",
    "beam_pattern",
    "main_lobe_indices",
]

# Window for detecting the removable singularity of the periodic sinc when
# the argument is a float rather than an exact rational.
_SINGULARITY_WINDOW = 1e-9


def _as_separation(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1_000_000)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, tuple) and len(value) == 2:
        return Fraction(*value)
    raise TypeError(f"cannot interpret {value!r} as an exact separation")


@dataclass(frozen=True)
class ArrayGeometry:
    """Geometry of a uniform linear array.

    Attributes:
        length: normalized array length ``L`` (positive integer).
        separation: normalized element separation, an exact rational in
            ``(0, 1/2]`` with ``length / separation`` integral.
        elements: element count ``N = L / delta``.
    """

    length: int
    separation: Fraction
    elements: int

    def __init__(self, length: int, separation) -> None:
        separation = _as_separation(separation)
        if length < 1 or int(length) != length:
            raise ValueError(f"array length must be a positive integer, got {length}")
        if not (0 < separation <= Fraction(1, 2)):
            raise ValueError(f"separation must lie in (0, 1/2], got {separation}")
        elements = Fraction(length) / separation
        if elements.denominator != 1:
            raise ValueError(
                f"L/delta = {length}/{separation} is not an integer element count"
            )
        object.__setattr__(self, "length", int(length))
        object.__setattr__(self, "separation", separation)
        object.__setattr__(self, "elements", int(elements))
        # N * delta == L is exact by construction; N >= 2L <=> delta <= 1/2.

    @classmethod
    def from_elements(cls, length: int, elements: int) -> "ArrayGeometry":
        """Build from length and element count, deriving ``delta = L/N``."""
        return cls(length, Fraction(length, elements))

    @property
    def delta(self) -> float:
        """Separation as a float, for numeric work."""
        return float(self.separation)


def signature(geom: ArrayGeometry, omega: float) -> np.ndarray:
    """Unit spatial signature for directional cosine ``omega``.

    Entry ``n`` is ``exp(-2 pi j n delta omega) / sqrt(N)``; the Euclidean
    norm is 1.  ``omega`` outside ``[-1, 1]`` is permitted for diagnostics.
    """
    n = np.arange(geom.elements)
    return np.exp(-2j * np.pi * n * (geom.delta * omega)) / np.sqrt(geom.elements)


def _sinpi(x: np.ndarray) -> np.ndarray:
    """sin(pi*x) with exact zeros at integer x (argument reduced mod 2)."""
    k = np.round(x)
    s = np.sin(np.pi * (x - k))
    return np.where(k % 2 == 0, s, -s)


def periodic_sinc(n: int, x) -> float | np.ndarray:
    """Periodic sinc ``sin(pi x) / (n sin(pi x / n))``.

    The removable singularities at ``x = k n`` take the value 1.  When ``x``
    is an exact rational the singularity test is exact; floats use a
    ``1e-9`` window.  Finite for every real ``x``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if isinstance(x, Rational) and not isinstance(x, int):
        if (Fraction(x) / n).denominator == 1:
            return 1.0
        x = float(x)
    x = np.asarray(x, dtype=float)
    dist = x - n * np.round(x / n)
    singular = np.abs(dist) < _SINGULARITY_WINDOW
    denom = n * _sinpi(x / n)
    out = np.where(singular, 1.0, _sinpi(x) / np.where(singular, 1.0, denom))
    return out if out.ndim else float(out)


def array_kernel(geom: ArrayGeometry, omega, method: str = "closed"):
    """Inner-product kernel of two spatial signatures at cosine offset ``omega``.

    Equals ``(delta/L) * sum_n exp(2 pi j n delta omega)``, oriented so that
    ``signature(omega) = sum_k array_kernel(k/L - omega) signature(k/L)``
    reconstructs exactly.  The closed form
    ``exp(pi j (L - delta) omega) * periodic_sinc(N, L omega)`` is the
    default (O(1) per point), with ``method="direct"`` retained for
    verification.  Values 1 at offsets that are multiples of the period
    ``1/delta`` and exact zeros on the rest of the grid ``k/L``.

    Accepts scalars or arrays and broadcasts.
    """
    big_n = geom.elements
    omega = np.asarray(omega, dtype=float)
    if method == "direct":
        n = np.arange(big_n).reshape((big_n,) + (1,) * omega.ndim)
        out = np.exp(2j * np.pi * n * (geom.delta * omega)).sum(axis=0) / big_n
        return out if out.ndim else complex(out)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    x = geom.length * omega
    dist = x - big_n * np.round(x / big_n)
    singular = np.abs(dist) < _SINGULARITY_WINDOW
    denom = big_n * _sinpi(x / big_n)
    mag = np.where(singular, 1.0, _sinpi(x) / np.where(singular, 1.0, denom))
    phase = np.exp(1j * np.pi * (geom.length - geom.delta) * omega)
    out = np.where(singular, 1.0 + 0j, phase * mag)
    return out if out.ndim else complex(out)


@functools.lru_cache(maxsize=64)
def dft_basis(geom: ArrayGeometry) -> np.ndarray:
    """Unitary angular basis: column ``n`` is ``signature(geom, n/L)``.

    Coincides with the ``N``-point DFT matrix scaled by ``1/sqrt(N)``.
    The returned array is cached and read-only.
    """
    cols = [signature(geom, n / geom.length) for n in range(geom.elements)]
    u = np.column_stack(cols)
    u.setflags(write=False)
    return u


def basis_expand(geom: ArrayGeometry, omega: float) -> np.ndarray:
    """Expansion coefficients of ``signature(geom, omega)`` in the DFT basis.

    Coefficient ``k`` is ``array_kernel(geom, k/L - omega)``; summing
    ``coeff_k * signature(geom, k/L)`` reconstructs the signature.
    """
    k = np.arange(geom.elements)
    return np.asarray(array_kernel(geom, k / geom.length - omega))


def beam_pattern(geom: ArrayGeometry, k: int, phi_grid: np.ndarray) -> np.ndarray:
    """Beamforming pattern ``|kernel(k/L - cos(phi))|`` over an angle grid."""
    if not 0 <= k < geom.elements:
        raise ValueError(f"beam index {k} outside [0:{geom.elements})")
    phi_grid = np.asarray(phi_grid, dtype=float)
    return np.abs(array_kernel(geom, k / geom.length - np.cos(phi_grid)))


def main_lobe_indices(length: int, elements: int) -> np.ndarray:
    """Indices ``[0:L] + [N-L:N)`` whose beam patterns have main lobes.

    For the critically spaced case (``N = 2L``) this is all of ``[0:N)``.
    """
    if elements == 2 * length:
        return np.arange(elements)
    return np.concatenate(
        [np.arange(length + 1), np.arange(elements - length, elements)]
    )
