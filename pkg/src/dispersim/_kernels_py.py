"""Pure-numpy implementations of the time-stepping hot kernels.

Signature-compatible with the compiled extension ``dispersim._kernels``;
selected automatically when the extension is unavailable. Arithmetic is
written with the same association order as the C loops so both backends
agree to the last bit on finite data.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

FLUX_BURGERS = 0
FLUX_POLY = 1
FLUX_POWERLAW = 2


def nodal_flux(kind: int, params: np.ndarray, u: np.ndarray, out: np.ndarray) -> None:
    """Evaluate the convective flux f(u) on nodal values into ``out``."""
    if kind == FLUX_BURGERS:
        np.multiply(u, u, out=out)
        out *= 0.5
    elif kind == FLUX_POLY:
        out[:] = params[-1]
        for c in params[-2::-1]:
            out *= u
            out += c
    elif kind == FLUX_POWERLAW:
        np.multiply(u, np.abs(u) ** params[0], out=out)
    else:
        raise ValueError(f"unknown flux kind id {kind}")


def apply_symbol(sym: np.ndarray, fhat: np.ndarray, out: np.ndarray) -> None:
    """out = sym * fhat, elementwise (diagonal spectral operator)."""
    np.multiply(sym, fhat, out=out)


def stage_combine(e: np.ndarray, psi: np.ndarray, c: np.ndarray, n: np.ndarray, out: np.ndarray) -> None:
    """out = e*psi + c*n (one exponential Runge-Kutta stage)."""
    np.multiply(e, psi, out=out)
    out += c * n


def stage_combine2(
    e: np.ndarray,
    psi: np.ndarray,
    c1: np.ndarray,
    n1: np.ndarray,
    c2: np.ndarray,
    n2: np.ndarray,
    out: np.ndarray,
) -> None:
    """out = e*psi + c1*n1 + c2*n2."""
    np.multiply(e, psi, out=out)
    out += c1 * n1
    out += c2 * n2


def final_combine(
    e: np.ndarray,
    psi: np.ndarray,
    f1: np.ndarray,
    n0: np.ndarray,
    f2: np.ndarray,
    n1: np.ndarray,
    n2: np.ndarray,
    f3: np.ndarray,
    n3: np.ndarray,
    out: np.ndarray,
) -> int:
    """out = e*psi + f1*n0 + f2*(n1+n2) + f3*n3; returns 0 if nonfinite."""
    np.multiply(e, psi, out=out)
    out += f1 * n0
    out += f2 * (n1 + n2)
    out += f3 * n3
    return int(np.isfinite(out.view(np.float64)).all())


def cnab2_combine(
    inv_den: np.ndarray,
    num: np.ndarray,
    psi: np.ndarray,
    n: np.ndarray,
    n_prev: np.ndarray,
    h: float,
    out: np.ndarray,
) -> int:
    """out = inv_den * (num*psi + h*(1.5*n - 0.5*n_prev)); returns 0 if nonfinite."""
    np.multiply(num, psi, out=out)
    out += h * (1.5 * n - 0.5 * n_prev)
    out *= inv_den
    return int(np.isfinite(out.view(np.float64)).all())
