"""Independent ground truth for verifying the spectral solver.

Three unrelated error probes, so agreement rules out correlated bugs:

* closed-form modal evolution of the linear / linearly-convected
  problem (exact to roundoff);
* a self-convergence reference (2x modes, dt/2) restricted back to the
  coarse grid;
* a pointwise PDE residual built entirely from high-order centered
  finite differences and a central time difference - no spectral
  machinery at all.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .flux import FluxModel
from .spectral import Field, SpectralGrid

__all__ = [
    "LinearOracle",
    "linear_solution",
    "reference_run",
    "restrict_to_grid",
    "fd_residual",
    "fornberg_weights",
    "periodic_fd_derivative",
]


@dataclass(frozen=True)
class LinearOracle:
    """Exact modal solution of the linear problem with flux f(u) = c*u.

    Each (amplitude, wavenumber, phase) mode evolves as
    a * exp(-nu*k^4*t) * sin(k*x + phase + (delta*k^3 - c*k)*t).
    """

    modes: tuple          # ((amplitude, wavenumber, phase), ...)
    delta: float
    nu: float
    c: float = 0.0

    def evaluate(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for amplitude, k, phase in self.modes:
            decay = np.exp(-self.nu * k**4 * t)
            drift = (self.delta * k**3 - self.c * k) * t
            out += amplitude * decay * np.sin(k * x + phase + drift)
        return out


def linear_solution(oracle: LinearOracle, t: float, grid: SpectralGrid) -> Field:
    """Sample the exact modal evolution on the grid."""
    for _, k, _ in oracle.modes:
        j = k * grid.period / (2.0 * np.pi)
        if abs(j - round(j)) > 1e-9 or abs(round(j)) > grid.n_modes // 2 - 1:
            raise ValueError(
                f"wavenumber {k:g} is not representable on the grid "
                f"(mode index must be an integer with |j| <= {grid.n_modes // 2 - 1})")
    return Field.from_nodal(grid, oracle.evaluate(t, grid.x))


def reference_run(config: RunConfig) -> Field:
    """Rerun at 2x modes and dt/2; return the final state on the coarse grid."""
    from .driver import run

    fine = replace(
        config,
        grid=replace(config.grid, n_modes=2 * config.grid.n_modes),
        stepper=replace(
            config.stepper,
            dt=0.5 * config.stepper.dt,
            snapshot_stride=2 * config.stepper.snapshot_stride,
            checkpoint_stride=0,
        ),
    )
    result = run(fine)
    return restrict_to_grid(result.final_field, config.make_grid())


def restrict_to_grid(field: Field, coarse: SpectralGrid) -> Field:
    """Spectral truncation of a finer-grid field onto ``coarse`` (same period)."""
    if abs(field.grid.period - coarse.period) > 1e-12 * coarse.period:
        raise ValueError("restriction requires matching periods")
    nf = field.grid.n_modes
    nc = coarse.n_modes
    if nf < nc:
        raise ValueError(f"cannot restrict {nf} modes onto {nc}")
    spec_f = field.spectral
    spec_c = np.zeros(nc, dtype=np.complex128)
    half = nc // 2
    spec_c[:half] = spec_f[:half]
    spec_c[half + 1:] = spec_f[nf - half + 1:]
    # coarse Nyquist slot absorbs both +-nc/2 fine modes
    spec_c[half] = spec_f[half] + (spec_f[nf - half] if nf > nc else 0.0)
    return Field.from_spectral(coarse, spec_c)


def fornberg_weights(m: int, offsets) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at offset 0.

    Classic recursion on arbitrary stencil offsets (in units of the grid
    spacing); returns w with f^(m)(x) ~ sum_i w_i f(x + offsets_i*h) / h^m.
    """
    x = np.asarray(offsets, dtype=np.float64)
    n = len(x)
    if m >= n:
        raise ValueError(f"need more than {m} points for derivative order {m}")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0]
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


# Centered stencils of formal order 8 (order 7 rounds up by symmetry for
# the even derivatives); wide enough that spatial truncation error sits
# far below the O(dt^2) time difference at verification resolutions.
_FD_RADII = {1: 4, 2: 4, 3: 5, 4: 5}


def periodic_fd_derivative(values: np.ndarray, m: int, spacing: float) -> np.ndarray:
    """m-th derivative of periodic nodal data by 8th-order central differences."""
    r = _FD_RADII[m]
    offsets = np.arange(-r, r + 1)
    w = fornberg_weights(m, offsets)
    out = np.zeros_like(values)
    for o, wo in zip(offsets, w):
        if wo != 0.0:
            out += wo * np.roll(values, -o)
    return out / spacing**m


def fd_residual(snapshots, dt: float, model: FluxModel, u_tilde: float,
                delta: float, nu: float) -> float:
    """Max-norm PDE residual from three equally spaced snapshots.

    Central time difference across the outer pair, 8th-order centered
    finite differences in space at the middle snapshot: expected
    O(dt^2) + O(h^8) for a smooth resolved state.
    """
    f_prev, f_mid, f_next = snapshots
    h = f_mid.grid.spacing
    u_prev, u_mid, u_next = f_prev.nodal, f_mid.nodal, f_next.nodal
    dpsi_dt = (u_next - u_prev) / (2.0 * dt)
    flux_vals = model.f(u_mid + u_tilde)
    residual = (
        dpsi_dt
        + periodic_fd_derivative(flux_vals, 1, h)
        + delta * periodic_fd_derivative(u_mid, 3, h)
        + nu * periodic_fd_derivative(u_mid, 4, h)
    )
    return float(np.max(np.abs(residual)))
