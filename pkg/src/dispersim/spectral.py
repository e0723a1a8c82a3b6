"""Periodic Fourier discretization: grids, fields, derivatives, norms.

Conventions used throughout the package:

* grid nodes ``x_i = i * P / N`` for ``i = 0 .. N-1`` on a domain of
  period ``P``;
* a real field is represented as ``psi(x) = sum_j psi_hat_j * exp(i k_j x)``
  with ``k_j = 2*pi*j / P`` and mode numbers ``j = -N/2+1 .. N/2``;
* the forward transform carries the ``1/N`` factor, i.e.
  ``psi_hat = fft(psi) / N``, so Parseval reads
  ``||psi||_L2^2 = P * sum_j |psi_hat_j|^2``.

Coefficients are stored in FFT layout (index ``i`` holds mode
``j = i`` for ``i <= N/2`` and ``j = i - N`` above), with the Nyquist
slot counted as ``+N/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

__all__ = [
    "SpectralGrid",
    "Field",
    "NormBundle",
    "make_grid",
    "derivative",
    "dealias",
    "sup_norm_refined",
    "norms",
]

SUP_FACTORS = (1, 2, 4, 8)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid with its wavenumber table and dealias mask."""

    n_modes: int
    period: float
    spacing: float
    x: np.ndarray              # nodal coordinates, shape (N,)
    mode_numbers: np.ndarray   # integer j in FFT layout, Nyquist stored as +N/2
    wavenumbers: np.ndarray    # k_j = 2*pi*j / P
    dealias_mask: np.ndarray   # True iff |j| <= N/3 (2/3 rule)

    def __post_init__(self):
        for name in ("x", "mode_numbers", "wavenumbers", "dealias_mask"):
            getattr(self, name).setflags(write=False)

    @property
    def nyquist_index(self) -> int:
        return self.n_modes // 2


def make_grid(n_modes: int, period: float) -> SpectralGrid:
    """Build a SpectralGrid with N modes on a domain of length ``period``."""
    if n_modes % 2 != 0 or n_modes < 8:
        raise ValueError(f"n_modes must be even and >= 8, got {n_modes}")
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    n = int(n_modes)
    j = np.concatenate([np.arange(0, n // 2 + 1), np.arange(-n // 2 + 1, 0)])
    grid = SpectralGrid(
        n_modes=n,
        period=float(period),
        spacing=float(period) / n,
        x=np.arange(n) * (float(period) / n),
        mode_numbers=j,
        wavenumbers=(2.0 * np.pi / float(period)) * j,
        dealias_mask=np.abs(j) <= n // 3,
    )
    return grid


class Field:
    """One scalar-field snapshot held in nodal and/or spectral form.

    Either representation is computed lazily from the other; reads never
    mutate observable state beyond that sync. A Field must not be synced
    concurrently from two threads.
    """

    __slots__ = ("grid", "_nodal", "_spectral")

    def __init__(self, grid: SpectralGrid, nodal=None, spectral=None):
        if nodal is None and spectral is None:
            raise ValueError("Field needs a nodal or spectral representation")
        self.grid = grid
        self._nodal = None if nodal is None else np.asarray(nodal, dtype=np.float64)
        self._spectral = None if spectral is None else np.asarray(spectral, dtype=np.complex128)
        for arr in (self._nodal, self._spectral):
            if arr is not None and arr.shape != (grid.n_modes,):
                raise ValueError(f"representation shape {arr.shape} does not match grid ({grid.n_modes},)")

    @classmethod
    def from_nodal(cls, grid: SpectralGrid, values) -> "Field":
        return cls(grid, nodal=values)

    @classmethod
    def from_spectral(cls, grid: SpectralGrid, coefficients) -> "Field":
        return cls(grid, spectral=coefficients)

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "Field":
        return cls(grid, nodal=np.zeros(grid.n_modes), spectral=np.zeros(grid.n_modes, dtype=np.complex128))

    @property
    def nodal(self) -> np.ndarray:
        if self._nodal is None:
            self._nodal = np.fft.ifft(self._spectral * self.grid.n_modes).real
        return self._nodal

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            self._spectral = np.fft.fft(self._nodal) / self.grid.n_modes
        return self._spectral

    def copy(self) -> "Field":
        return Field(
            self.grid,
            nodal=None if self._nodal is None else self._nodal.copy(),
            spectral=None if self._spectral is None else self._spectral.copy(),
        )

    def imag_residue(self) -> float:
        """Max |Im| of the inverse transform; a reality check, ~1e-16 normally."""
        return float(np.max(np.abs(np.fft.ifft(self.spectral * self.grid.n_modes).imag), initial=0.0))

    def __repr__(self):
        return f"Field(N={self.grid.n_modes}, P={self.grid.period:g})"


def derivative(field: Field, m: int) -> Field:
    """Spectral m-th derivative, m in 1..4.

    The Nyquist mode is zeroed for odd m: its odd derivative is not
    representable as a real field on the grid.
    """
    if not 1 <= m <= 4:
        raise ValueError(f"derivative order must be in 1..4, got {m}")
    grid = field.grid
    symbol = (1j * grid.wavenumbers) ** m
    coeffs = field.spectral * symbol
    if m % 2 == 1:
        coeffs[grid.nyquist_index] = 0.0
    return Field.from_spectral(grid, coeffs)


def dealias(field: Field) -> Field:
    """Zero all modes with |j| > N/3 (2/3 rule for quadratic products)."""
    return Field.from_spectral(field.grid, np.where(field.grid.dealias_mask, field.spectral, 0.0))


def _refined_nodal(field: Field, factor: int) -> np.ndarray:
    """Field values on the factor*N grid via zero-padded spectral resampling."""
    grid = field.grid
    n = grid.n_modes
    if factor == 1:
        return field.nodal
    m = factor * n
    padded = np.zeros(m, dtype=np.complex128)
    spec = field.spectral
    half = n // 2
    padded[: half + 1] = spec[: half + 1]
    padded[m - half + 1:] = spec[half + 1:]
    # Split the Nyquist coefficient across +N/2 and -N/2 so the trig
    # interpolant is real and reproduces the original nodes exactly.
    padded[half] = 0.5 * spec[half]
    padded[m - half] = 0.5 * spec[half]
    return np.fft.ifft(padded * m).real


def sup_norm_refined(field: Field, factor: int) -> float:
    """Max |psi| over the factor*N-point resampled grid.

    Refined grids nest (each factor-2a grid contains the factor-a grid),
    so the result is nondecreasing in factor.
    """
    if factor not in SUP_FACTORS:
        raise ValueError(f"refinement factor must be one of {SUP_FACTORS}, got {factor}")
    return float(np.max(np.abs(_refined_nodal(field, factor))))


@dataclass(frozen=True)
class NormBundle:
    """L2 norm, derivative seminorms, refined sup norms and the mean."""

    l2: float
    seminorm_1: float
    seminorm_2: float
    seminorm_3: float
    seminorm_4: float
    sup_psi: float
    sup_dpsi: float
    mean: float

    @property
    def h2_total(self) -> float:
        return float(np.sqrt(self.l2 ** 2 + self.seminorm_1 ** 2 + self.seminorm_2 ** 2))


def _parseval_l2(grid: SpectralGrid, coeffs: np.ndarray) -> float:
    return float(np.sqrt(grid.period * np.sum(np.abs(coeffs) ** 2)))


def norms(field: Field, sup_factor: int = 4) -> NormBundle:
    """All monitored norms of a field in one bundle.

    L2 quantities come from Parseval under the 1/N coefficient
    convention; sup norms are evaluated on the ``sup_factor``-refined grid.
    """
    grid = field.grid
    spec = field.spectral
    k = grid.wavenumbers
    seminorms = []
    for m in (1, 2, 3, 4):
        coeffs = spec * (1j * k) ** m
        if m % 2 == 1:
            coeffs[grid.nyquist_index] = 0.0
        seminorms.append(_parseval_l2(grid, coeffs))
    dpsi = derivative(field, 1)
    return NormBundle(
        l2=_parseval_l2(grid, spec),
        seminorm_1=seminorms[0],
        seminorm_2=seminorms[1],
        seminorm_3=seminorms[2],
        seminorm_4=seminorms[3],
        sup_psi=sup_norm_refined(field, sup_factor),
        sup_dpsi=sup_norm_refined(dpsi, sup_factor),
        mean=float(spec[0].real),
    )
