"""Convective flux models, growth-condition screening, nonlinear term.

A flux enters the evolution only through the composition f(psi + u_tilde)
with the constant far-field value; the solver always advances the
deviation psi. Three families are supported:

* ``burgers``        f(u) = u^2 / 2
* ``poly:[c0,c1,..]`` f(u) = c0 + c1*u + c2*u^2 + ...
* ``powerlaw:p``     f(u) = u*|u|^p, p = 0 or p >= 1

Each model carries a declared growth exponent q in [0, 5] limiting
|f''(u)| to polynomial growth of that order; ``validate_growth`` screens
the declaration on a sampled interval. The screen is evidence, not a
proof: a global analytic growth bound cannot be certified by finitely
many samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectral import Field

__all__ = [
    "FluxModel",
    "GrowthReport",
    "FluxOverflowError",
    "burgers",
    "polynomial",
    "powerlaw",
    "parse_flux_spec",
    "validate_growth",
    "nonlinear_term",
]

# A declared exponent is accepted when the sampled ratio |f''|/(1+|u|^q)
# grows by less than this factor across the outer 10% of the range
# (saturating ratio) rather than demanding literal monotone decrease,
# which a correct-but-approaching-its-asymptote ratio fails.
TAIL_GROWTH_TOL = 0.05

Q_MAX = 5.0


class FluxOverflowError(ArithmeticError):
    """Flux evaluation produced nonfinite values at extreme nodal data."""


@dataclass(frozen=True)
class FluxModel:
    """Convective flux with first and second derivatives."""

    kind: str                  # "burgers" | "poly" | "powerlaw"
    label: str
    q_declared: float
    kernel_kind: int
    kernel_params: np.ndarray  # poly coefficients, or [p] for powerlaw

    def __post_init__(self):
        if not 0.0 <= self.q_declared <= Q_MAX:
            raise ValueError(
                f"q_declared must lie in [0, {Q_MAX}] (growth hypothesis), got {self.q_declared}"
            )
        self.kernel_params.setflags(write=False)

    def f(self, u):
        scalar = np.ndim(u) == 0
        u_arr = np.ascontiguousarray(np.atleast_1d(u), dtype=np.float64)
        out = np.empty_like(u_arr)
        kernels.nodal_flux(self.kernel_kind, self.kernel_params, u_arr, out)
        return float(out[0]) if scalar else out

    def f_prime(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "burgers":
            out = u.copy()
        elif self.kind == "poly":
            c = self.kernel_params
            dc = c[1:] * np.arange(1, len(c))
            out = _horner(dc, u)
        else:
            p = self.kernel_params[0]
            out = (p + 1.0) * np.abs(u) ** p
        return out if out.ndim else float(out)

    def f_second(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "burgers":
            out = np.ones_like(u)
        elif self.kind == "poly":
            c = self.kernel_params
            if len(c) < 3:
                out = np.zeros_like(u)
            else:
                ddc = c[2:] * np.arange(2, len(c)) * np.arange(1, len(c) - 1)
                out = _horner(ddc, u)
        else:
            p = self.kernel_params[0]
            if p == 0.0:
                out = np.zeros_like(u)
            else:
                out = p * (p + 1.0) * np.sign(u) * np.abs(u) ** (p - 1.0)
        return out if out.ndim else float(out)


def _horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    if len(coeffs) == 0:
        return np.zeros_like(u)
    acc = np.full_like(u, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * u + c
    return acc


def burgers(q_declared: float = 0.0) -> FluxModel:
    return FluxModel("burgers", "burgers", q_declared, kernels.FLUX_BURGERS, np.array([0.0]))


def polynomial(coeffs, q_declared: float | None = None) -> FluxModel:
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 1 or len(c) == 0:
        raise ValueError("polynomial flux needs a nonempty coefficient list")
    if q_declared is None:
        q_declared = max(0.0, float(len(c) - 3))  # degree of f''
    label = "poly:" + json.dumps([float(v) for v in c], separators=(",", ":"))
    return FluxModel("poly", label, q_declared, kernels.FLUX_POLY, c)


def powerlaw(p: float, q_declared: float | None = None) -> FluxModel:
    # p in (0, 1) would put an unbounded f'' singularity at u = 0; p = 0
    # is the exactly linear flux and stays admissible.
    if p < 0.0 or 0.0 < p < 1.0:
        raise ValueError(f"powerlaw exponent must be 0 or >= 1, got {p}")
    if q_declared is None:
        q_declared = max(0.0, float(p - 1.0))
    return FluxModel("powerlaw", f"powerlaw:{p:g}", q_declared, kernels.FLUX_POWERLAW,
                     np.array([float(p)]))


def parse_flux_spec(spec: str, q_declared: float | None = None) -> FluxModel:
    """Parse a flux specification string.

    Accepted forms: ``burgers``, ``poly:[c0,c1,...]`` (JSON number list),
    ``powerlaw:p``. Numbers go through the standard float parser, so the
    text round-trips bit-exactly through ``repr``.
    """
    spec = spec.strip()
    if spec == "burgers":
        return burgers(q_declared if q_declared is not None else 0.0)
    if spec.startswith("poly:"):
        try:
            coeffs = json.loads(spec[len("poly:"):])
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed polynomial coefficient list in {spec!r}: {exc}") from exc
        if not isinstance(coeffs, list) or not all(isinstance(v, (int, float)) for v in coeffs):
            raise ValueError(f"polynomial flux spec must carry a JSON number list, got {spec!r}")
        return polynomial(coeffs, q_declared)
    if spec.startswith("powerlaw:"):
        try:
            p = float(spec[len("powerlaw:"):])
        except ValueError as exc:
            raise ValueError(f"malformed powerlaw exponent in {spec!r}") from exc
        return powerlaw(p, q_declared)
    raise ValueError(f"unknown flux spec {spec!r} (expected burgers, poly:[...], powerlaw:p)")


@dataclass(frozen=True)
class GrowthReport:
    """Sampled evidence for |f''(u)| <= C*(1+|u|^q) on [-U, U]."""

    q_tested: float
    u_max: float
    c_estimate: float
    tail_growth: float   # max ratio over outer 10%, relative to ratio at 0.9*U
    satisfied: bool


def validate_growth(model: FluxModel, q: float, u_max: float, samples: int = 2001) -> GrowthReport:
    """Screen the growth declaration |f''| <= O(1)*(1+|u|^q) by sampling.

    ``satisfied`` requires a finite ratio supremum and a saturating (not
    polynomially growing) ratio over the outer 10% of both range ends.
    """
    if not 0.0 <= q <= Q_MAX:
        raise ValueError(f"growth exponent q must lie in [0, {Q_MAX}], got {q}")
    if not u_max > 0:
        raise ValueError(f"u_max must be positive, got {u_max}")
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    n = samples if samples % 2 == 1 else samples + 1  # odd => includes u = 0
    u = np.linspace(-u_max, u_max, n)
    ratio = np.abs(model.f_second(u)) / (1.0 + np.abs(u) ** q)
    c_estimate = float(np.max(ratio))

    tail_growth = 0.0
    ok = bool(np.isfinite(c_estimate))
    for tail in (ratio[u >= 0.9 * u_max], ratio[u <= -0.9 * u_max][::-1]):
        # tail ordered by increasing |u|
        base = float(tail[0])
        peak = float(np.max(tail))
        growth = peak / base if base > 0.0 else (1.0 if peak == 0.0 else np.inf)
        tail_growth = max(tail_growth, growth)
        ok = ok and growth <= 1.0 + TAIL_GROWTH_TOL
    return GrowthReport(q_tested=float(q), u_max=float(u_max), c_estimate=c_estimate,
                        tail_growth=tail_growth, satisfied=ok)


def nonlinear_term(psi: Field, model: FluxModel, u_tilde: float) -> Field:
    """Pseudo-spectral evaluation of -d/dx f(psi + u_tilde), dealiased."""
    grid = psi.grid
    total = psi.nodal + u_tilde
    fvals = np.empty_like(total)
    kernels.nodal_flux(model.kernel_kind, model.kernel_params, total, fvals)
    fhat = np.fft.fft(fvals) / grid.n_modes
    if not np.isfinite(fhat[0]):
        raise FluxOverflowError(
            f"flux {model.label} overflowed at nodal values up to {np.max(np.abs(total)):.3g}"
        )
    sym = neg_ddx_dealiased_symbol(grid)
    out = np.empty_like(fhat)
    kernels.apply_symbol(sym, fhat, out)
    return Field.from_spectral(grid, out)


def neg_ddx_dealiased_symbol(grid) -> np.ndarray:
    """Fused spectral operator -(i k) * dealias_mask (Nyquist inside the cut)."""
    return np.where(grid.dealias_mask, -1j * grid.wavenumbers, 0.0 + 0.0j)
