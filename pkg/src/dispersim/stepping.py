"""Time stepping: exact linear propagator, phi functions, ETDRK4, CNAB2.

The linear part of the evolution is diagonal in Fourier space with
per-mode symbol ``lambda_j = i*delta*k_j^3 - nu*k_j^4`` and extremely
stiff at high wavenumbers (k^4); both schemes therefore treat it
implicitly or exactly. ETDRK4 integrates it exactly through the matrix
exponential and phi-function coefficients; CNAB2 (Crank-Nicolson plus
second-order Adams-Bashforth on the convective term) is retained as an
independent cross-check scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .flux import FluxModel, FluxOverflowError, neg_ddx_dealiased_symbol
from .spectral import SpectralGrid

__all__ = [
    "LinearSymbol",
    "build_symbol",
    "phi_functions",
    "Etdrk4Stepper",
    "Cnab2Stepper",
    "make_stepper",
    "SCHEMES",
]

SCHEMES = ("etdrk4", "imex_cnab2")

# Below this magnitude of z = lambda*dt the closed-form phi expressions
# lose digits to cancellation and a truncated Taylor series is exact to
# machine precision instead.
PHI_SERIES_RADIUS = 0.5
_PHI_SERIES_TERMS = 24


@dataclass(frozen=True)
class LinearSymbol:
    """Per-mode multipliers of the stiff linear operator."""

    values: np.ndarray  # lambda_j, complex, FFT layout
    delta: float
    nu: float

    def __post_init__(self):
        self.values.setflags(write=False)


def build_symbol(grid: SpectralGrid, delta: float, nu: float) -> LinearSymbol:
    """lambda_j = i*delta*k_j^3 - nu*k_j^4 on the grid's wavenumber table.

    The dispersive (odd, imaginary) part is zeroed on the Nyquist mode so
    the propagator maps real fields to real fields.
    """
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    k = grid.wavenumbers
    disp = delta * k**3
    disp = disp.copy()
    disp[grid.nyquist_index] = 0.0
    values = 1j * disp - nu * k**4
    return LinearSymbol(values=values, delta=float(delta), nu=float(nu))


def _phi_series(w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi_1..phi_3 by truncated Taylor series, exact for |w| < ~0.5."""
    shape = w.shape
    phi1 = np.zeros(shape, dtype=np.complex128)
    phi2 = np.zeros(shape, dtype=np.complex128)
    phi3 = np.zeros(shape, dtype=np.complex128)
    # phi_m(w) = sum_{n>=0} w^n / (n+m)!  evaluated by Horner from the top
    for n in range(_PHI_SERIES_TERMS, -1, -1):
        phi1 = phi1 * w + 1.0 / _factorial(n + 1)
        phi2 = phi2 * w + 1.0 / _factorial(n + 2)
        phi3 = phi3 * w + 1.0 / _factorial(n + 3)
    return phi1, phi2, phi3


def _factorial(n: int) -> float:
    out = 1.0
    for i in range(2, n + 1):
        out *= i
    return out


def phi_functions(z, dt: float):
    """phi_0(z*dt) .. phi_3(z*dt) for scalar or array ``z``.

    phi_0 = exp(w), phi_1 = (exp(w)-1)/w, phi_2 = (exp(w)-1-w)/w^2,
    phi_3 = (exp(w)-1-w-w^2/2)/w^3, with the series branch taking over
    near w = 0 where the closed forms cancel catastrophically.
    """
    w = np.asarray(z, dtype=np.complex128) * dt
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    phi0 = np.exp(w)
    small = np.abs(w) < PHI_SERIES_RADIUS
    ws = np.where(small, w, 0.0)          # keep the series branch finite
    wl = np.where(small, 1.0, w)          # avoid 0-division in the direct branch
    s1, s2, s3 = _phi_series(ws)
    ew = np.exp(wl)
    d1 = (ew - 1.0) / wl
    d2 = (ew - 1.0 - wl) / wl**2
    d3 = (ew - 1.0 - wl - 0.5 * wl**2) / wl**3
    phi1 = np.where(small, s1, d1)
    phi2 = np.where(small, s2, d2)
    phi3 = np.where(small, s3, d3)
    if scalar:
        return complex(phi0[0]), complex(phi1[0]), complex(phi2[0]), complex(phi3[0])
    return phi0, phi1, phi2, phi3


class _NonlinearRhs:
    """Dealiased pseudo-spectral evaluation of -d/dx f(psi + u_tilde)."""

    def __init__(self, grid: SpectralGrid, model: FluxModel, u_tilde: float):
        self.grid = grid
        self.model = model
        self.u_tilde = float(u_tilde)
        # fused -(ik)*mask/N so the forward-transform normalization costs nothing
        self._sym = neg_ddx_dealiased_symbol(grid) / grid.n_modes
        self._u = np.empty(grid.n_modes)
        self._f = np.empty(grid.n_modes)

    def __call__(self, psi_hat: np.ndarray, out: np.ndarray) -> None:
        n = self.grid.n_modes
        tmp = np.fft.ifft(psi_hat)
        np.multiply(tmp.real, float(n), out=self._u)
        self._u += self.u_tilde
        kernels.nodal_flux(self.model.kernel_kind, self.model.kernel_params, self._u, self._f)
        fhat = np.fft.fft(self._f)
        if not np.isfinite(fhat[0]):
            raise FluxOverflowError(
                f"flux {self.model.label} overflowed during stepping "
                f"(|u| up to {np.max(np.abs(self._u)):.3g})"
            )
        kernels.apply_symbol(self._sym, fhat, out)


class Etdrk4Stepper:
    """Fourth-order exponential time differencing Runge-Kutta step.

    The diagonal linear symbol is propagated exactly; only the dealiased
    convective term is sampled at the four stages, so a purely linear
    problem is advanced without any time-discretization error and the
    mean mode (lambda_0 = 0, zero-mean forcing) is preserved exactly.
    """

    order = 4
    needs_history = False

    def __init__(self, symbol: LinearSymbol, grid: SpectralGrid, model: FluxModel,
                 u_tilde: float, dt: float):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.dt = float(dt)
        self.rhs = _NonlinearRhs(grid, model, u_tilde)
        lam = symbol.values
        self.e_full = np.exp(lam * self.dt)
        self.e_half = np.exp(lam * (0.5 * self.dt))
        _, p1h, _, _ = phi_functions(lam, 0.5 * self.dt)
        _, p1, p2, p3 = phi_functions(lam, self.dt)
        self.q_half = (0.5 * self.dt) * p1h
        self.f1 = self.dt * (p1 - 3.0 * p2 + 4.0 * p3)
        self.f2 = self.dt * (2.0 * p2 - 4.0 * p3)
        self.f3 = self.dt * (4.0 * p3 - p2)
        self.q2 = 2.0 * self.q_half
        self.neg_q = -self.q_half
        n = grid.n_modes
        self._n0, self._n1, self._n2, self._n3 = (np.empty(n, dtype=np.complex128) for _ in range(4))
        self._a = np.empty(n, dtype=np.complex128)
        self._c = np.empty(n, dtype=np.complex128)

    def step(self, psi_hat: np.ndarray, out: np.ndarray) -> bool:
        """One step; returns False when the new state is nonfinite."""
        self.rhs(psi_hat, self._n0)
        kernels.stage_combine(self.e_half, psi_hat, self.q_half, self._n0, self._a)
        self.rhs(self._a, self._n1)
        kernels.stage_combine(self.e_half, psi_hat, self.q_half, self._n1, self._c)
        self.rhs(self._c, self._n2)
        kernels.stage_combine2(self.e_half, self._a, self.q2, self._n2, self.neg_q, self._n0, self._c)
        self.rhs(self._c, self._n3)
        ok = kernels.final_combine(self.e_full, psi_hat, self.f1, self._n0,
                                   self.f2, self._n1, self._n2, self.f3, self._n3, out)
        return bool(ok)

    def history_state(self):
        return None

    def restore_history(self, state) -> None:
        if state is not None:
            raise ValueError("etdrk4 carries no multistep history")


class Cnab2Stepper:
    """Crank-Nicolson (linear) + Adams-Bashforth-2 (convective) step.

    Two-step scheme: the first step after construction (or after a
    restart without history) falls back to a forward-Euler treatment of
    the convective term, which keeps the overall order at two.
    """

    order = 2
    needs_history = True

    def __init__(self, symbol: LinearSymbol, grid: SpectralGrid, model: FluxModel,
                 u_tilde: float, dt: float):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.dt = float(dt)
        self.rhs = _NonlinearRhs(grid, model, u_tilde)
        lam = symbol.values
        self.num = 1.0 + (0.5 * self.dt) * lam
        self.inv_den = 1.0 / (1.0 - (0.5 * self.dt) * lam)
        n = grid.n_modes
        self._n_prev: np.ndarray | None = None
        self._n_cur = np.empty(n, dtype=np.complex128)
        self._scratch = np.empty(n, dtype=np.complex128)

    def step(self, psi_hat: np.ndarray, out: np.ndarray) -> bool:
        self.rhs(psi_hat, self._n_cur)
        if self._n_prev is None:
            self._n_prev = self._n_cur.copy()
        ok = kernels.cnab2_combine(self.inv_den, self.num, psi_hat,
                                   self._n_cur, self._n_prev, self.dt, out)
        self._n_prev, self._n_cur = self._n_cur, self._n_prev
        return bool(ok)

    def history_state(self):
        return None if self._n_prev is None else self._n_prev.copy()

    def restore_history(self, state) -> None:
        self._n_prev = None if state is None else np.asarray(state, dtype=np.complex128).copy()


def make_stepper(scheme: str, symbol: LinearSymbol, grid: SpectralGrid,
                 model: FluxModel, u_tilde: float, dt: float):
    if scheme == "etdrk4":
        return Etdrk4Stepper(symbol, grid, model, u_tilde, dt)
    if scheme == "imex_cnab2":
        return Cnab2Stepper(symbol, grid, model, u_tilde, dt)
    raise ValueError(f"unknown scheme {scheme!r} (expected one of {SCHEMES})")
