"""Experiment configuration: TOML ingestion, validation, initial data.

A run is fully declarative: grid, physics coefficients, flux spec,
initial data, stepper and diagnostics settings, output directory, seed.
Validation collects every violation instead of stopping at the first,
and each rejection names the violated hypothesis or limit. The config
digest (sha256 over every semantic field, output location excluded)
guards checkpoint/restart compatibility.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .flux import FluxModel, parse_flux_spec
from .spectral import Field, SpectralGrid, make_grid, sup_norm_refined
from .stepping import SCHEMES

__all__ = [
    "ConfigError",
    "GridConfig",
    "PhysicsConfig",
    "FluxConfig",
    "InitialDataSpec",
    "StepperConfig",
    "DiagnosticsConfig",
    "RunConfig",
    "load_config",
    "parse_config_dict",
    "config_digest",
    "build_initial_data",
    "DEFAULT_PERIOD",
]

DEFAULT_PERIOD = 40.0 * np.pi
OUTPUT_DIR_ENV = "DISPERSIM_OUT"

# Initial data whose spectrum has not decayed to this fraction of its
# peak by the highest represented mode is rejected as under-resolved.
RESOLVABILITY_TAIL = 1e-10

INITIAL_DATA_KINDS = ("gaussian", "sech2", "random_bandlimited", "mode_sum")


class ConfigError(ValueError):
    """Invalid configuration; carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))


@dataclass(frozen=True)
class GridConfig:
    n_modes: int
    period: float = DEFAULT_PERIOD


@dataclass(frozen=True)
class PhysicsConfig:
    delta: float = 0.0
    nu: float = 0.0
    u_tilde: float = 0.0


@dataclass(frozen=True)
class FluxConfig:
    spec: str = "burgers"
    q_declared: float = 0.0


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str
    amplitude: float = 1.0
    center: float | None = None      # defaults to period/2
    width: float = 1.0
    k_max: float = 1.0               # random_bandlimited only
    seed: int = 0
    modes: tuple = ()                # mode_sum: ((amplitude, wavenumber, phase), ...)
    zero_mean: bool = True


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "etdrk4"
    snapshot_stride: int = 10
    checkpoint_stride: int = 0       # 0 disables periodic checkpoints


@dataclass(frozen=True)
class DiagnosticsConfig:
    tolerance: float = 1e-3
    sup_refinement: int = 4
    decay_threshold_ratio: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig
    physics: PhysicsConfig
    flux: FluxConfig
    initial_data: InitialDataSpec
    stepper: StepperConfig
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output_dir: str = "out"
    seed: int = 0

    def make_grid(self) -> SpectralGrid:
        return make_grid(self.grid.n_modes, self.grid.period)

    def make_flux(self) -> FluxModel:
        return parse_flux_spec(self.flux.spec, self.flux.q_declared)

    def semantic_dict(self) -> dict:
        """Everything that affects the trajectory (output location excluded)."""
        d = asdict(self)
        d.pop("output_dir")
        return d


def config_digest(config: RunConfig) -> str:
    payload = json.dumps(_hexify(config.semantic_dict()), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _hexify(obj):
    # floats via float.hex so the digest never depends on decimal formatting
    if isinstance(obj, float):
        return obj.hex()
    if isinstance(obj, dict):
        return {k: _hexify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_hexify(v) for v in obj]
    return obj


def _get(table: dict, section: str, key: str, default=None):
    return table.get(section, {}).get(key, default)


def parse_config_dict(raw: dict, source: str = "<config>") -> RunConfig:
    """Build a validated RunConfig from a parsed TOML table.

    Raises ConfigError listing every violation when the table is invalid.
    """
    violations: list[str] = []

    def check(cond: bool, message: str) -> None:
        if not cond:
            violations.append(message)

    n_modes = _get(raw, "grid", "n_modes")
    check(n_modes is not None, "grid.n_modes is required")
    if n_modes is not None:
        check(isinstance(n_modes, int) and n_modes % 2 == 0 and n_modes >= 8,
              f"grid.n_modes must be an even integer >= 8 (got {n_modes})")
    period = _get(raw, "grid", "period", DEFAULT_PERIOD)
    check(period > 0, f"grid.period must be positive (got {period})")

    nu = _get(raw, "physics", "nu", 0.0)
    check(nu >= 0, f"physics.nu must satisfy nu >= 0 (dissipation hypothesis; got {nu})")
    delta = _get(raw, "physics", "delta", 0.0)
    u_tilde = _get(raw, "physics", "u_tilde", 0.0)

    flux_spec = _get(raw, "flux", "spec", "burgers")
    q_declared = _get(raw, "flux", "q_declared", 0.0)
    check(0.0 <= q_declared <= 5.0,
          f"flux.q_declared must lie in [0, 5] (growth hypothesis 0 <= q <= 5; got {q_declared})")
    if 0.0 <= q_declared <= 5.0:
        try:
            parse_flux_spec(flux_spec, q_declared)
        except ValueError as exc:
            check(False, f"flux.spec: {exc}")

    dt = _get(raw, "stepper", "dt")
    t_end = _get(raw, "stepper", "t_end")
    check(dt is not None and dt > 0, f"stepper.dt must be a positive real (got {dt})")
    check(t_end is not None and t_end > 0, f"stepper.t_end must be a positive real (got {t_end})")
    scheme = _get(raw, "stepper", "scheme", "etdrk4")
    check(scheme in SCHEMES, f"stepper.scheme must be one of {SCHEMES} (got {scheme!r})")
    snapshot_stride = _get(raw, "stepper", "snapshot_stride", 10)
    check(isinstance(snapshot_stride, int) and snapshot_stride >= 1,
          f"stepper.snapshot_stride must be a positive integer (got {snapshot_stride})")
    checkpoint_stride = _get(raw, "stepper", "checkpoint_stride", 0)
    check(isinstance(checkpoint_stride, int) and checkpoint_stride >= 0,
          f"stepper.checkpoint_stride must be a nonnegative integer (got {checkpoint_stride})")
    if (isinstance(checkpoint_stride, int) and checkpoint_stride > 0
            and isinstance(snapshot_stride, int) and snapshot_stride >= 1):
        # checkpointed fields double as previous-snapshot fields on restart
        check(checkpoint_stride % snapshot_stride == 0,
              f"stepper.checkpoint_stride ({checkpoint_stride}) must be a multiple of "
              f"snapshot_stride ({snapshot_stride}) so checkpoints land on snapshots")

    tolerance = _get(raw, "diagnostics", "tolerance", 1e-3)
    check(tolerance > 0, f"diagnostics.tolerance must be positive (got {tolerance})")
    sup_refinement = _get(raw, "diagnostics", "sup_refinement", 4)
    check(sup_refinement in (1, 2, 4, 8),
          f"diagnostics.sup_refinement must be one of (1, 2, 4, 8) (got {sup_refinement})")
    threshold_ratio = _get(raw, "diagnostics", "decay_threshold_ratio", 0.1)
    check(threshold_ratio > 0, f"diagnostics.decay_threshold_ratio must be positive (got {threshold_ratio})")

    seed = raw.get("seed", 0)
    id_table = raw.get("initial_data", {})
    kind = id_table.get("kind")
    check(kind in INITIAL_DATA_KINDS,
          f"initial_data.kind must be one of {INITIAL_DATA_KINDS} (got {kind!r})")
    width = id_table.get("width", 1.0)
    if kind in ("gaussian", "sech2"):
        check(width > 0, f"initial_data.width must be positive (got {width})")
    modes = id_table.get("modes", [])
    if kind == "mode_sum":
        check(len(modes) > 0, "initial_data.modes must be a nonempty list of [amplitude, wavenumber, phase]")
        check(all(len(m) == 3 for m in modes),
              "initial_data.modes entries must be [amplitude, wavenumber, phase] triples")

    output_dir = os.environ.get(OUTPUT_DIR_ENV) or _get(raw, "output", "directory", "out")

    if violations:
        raise ConfigError([f"{source}: {v}" for v in violations])

    spec = InitialDataSpec(
        kind=kind,
        amplitude=float(id_table.get("amplitude", 1.0)),
        center=(float(id_table["center"]) if "center" in id_table else None),
        width=float(width),
        k_max=float(id_table.get("k_max", 1.0)),
        seed=int(id_table.get("seed", seed)),
        modes=tuple(tuple(float(v) for v in m) for m in modes),
        zero_mean=bool(id_table.get("zero_mean", True)),
    )
    config = RunConfig(
        grid=GridConfig(n_modes=int(n_modes), period=float(period)),
        physics=PhysicsConfig(delta=float(delta), nu=float(nu), u_tilde=float(u_tilde)),
        flux=FluxConfig(spec=str(flux_spec), q_declared=float(q_declared)),
        initial_data=spec,
        stepper=StepperConfig(dt=float(dt), t_end=float(t_end), scheme=str(scheme),
                              snapshot_stride=int(snapshot_stride),
                              checkpoint_stride=int(checkpoint_stride)),
        diagnostics=DiagnosticsConfig(tolerance=float(tolerance),
                                      sup_refinement=int(sup_refinement),
                                      decay_threshold_ratio=float(threshold_ratio)),
        output_dir=str(output_dir),
        seed=int(seed),
    )
    # Initial data must actually be constructible on the grid.
    try:
        build_initial_data(config.initial_data, config.make_grid())
    except ConfigError as exc:
        raise ConfigError([f"{source}: {v}" for v in exc.violations]) from exc
    return config


def config_from_dict(d: dict) -> RunConfig:
    """Rebuild a RunConfig from ``dataclasses.asdict`` output (e.g. a checkpoint)."""
    id_ = dict(d["initial_data"])
    id_["modes"] = tuple(tuple(float(v) for v in m) for m in id_.get("modes", ()))
    return RunConfig(
        grid=GridConfig(**d["grid"]),
        physics=PhysicsConfig(**d["physics"]),
        flux=FluxConfig(**d["flux"]),
        initial_data=InitialDataSpec(**id_),
        stepper=StepperConfig(**d["stepper"]),
        diagnostics=DiagnosticsConfig(**d["diagnostics"]),
        output_dir=d.get("output_dir", "out"),
        seed=int(d.get("seed", 0)),
    )


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"{path}: TOML parse error: {exc}"]) from exc
    return parse_config_dict(raw, source=str(path))


def build_initial_data(spec: InitialDataSpec, grid: SpectralGrid) -> Field:
    """Construct the initial deviation field on the grid.

    Random kinds are fully determined by their seed; ``zero_mean``
    subtracts the nodal mean after construction.
    """
    x = grid.x
    center = spec.center if spec.center is not None else 0.5 * grid.period
    if spec.kind == "gaussian":
        values = spec.amplitude * np.exp(-(((x - center) / spec.width) ** 2))
        field_ = Field.from_nodal(grid, values)
        _check_resolved(field_, f"gaussian width {spec.width:g}")
    elif spec.kind == "sech2":
        values = spec.amplitude / np.cosh((x - center) / spec.width) ** 2
        field_ = Field.from_nodal(grid, values)
        _check_resolved(field_, f"sech2 width {spec.width:g}")
    elif spec.kind == "random_bandlimited":
        field_ = _random_bandlimited(grid, spec.amplitude, spec.k_max, spec.seed)
    elif spec.kind == "mode_sum":
        values = np.zeros_like(x)
        for amplitude, wavenumber, phase in spec.modes:
            j = wavenumber * grid.period / (2.0 * np.pi)
            if abs(j - round(j)) > 1e-9 or abs(round(j)) > grid.n_modes // 2:
                raise ConfigError(
                    [f"mode_sum wavenumber {wavenumber:g} is not representable on the grid "
                     f"(needs integer mode index |j| <= {grid.n_modes // 2})"])
            values += amplitude * np.sin(wavenumber * x + phase)
        field_ = Field.from_nodal(grid, values)
    else:
        raise ConfigError([f"unknown initial data kind {spec.kind!r}"])

    if spec.zero_mean:
        field_ = Field.from_nodal(grid, field_.nodal - np.mean(field_.nodal))
    if not np.all(np.isfinite(field_.nodal)):
        raise ConfigError(["initial data evaluated to nonfinite values"])
    return field_


def _check_resolved(field_: Field, what: str) -> None:
    spec = field_.spectral
    peak = float(np.max(np.abs(spec)))
    if peak == 0.0:
        return
    n = field_.grid.n_modes
    j = np.abs(field_.grid.mode_numbers)
    tail = float(np.max(np.abs(spec[j >= n // 2 - 1])))
    if tail > RESOLVABILITY_TAIL * peak:
        raise ConfigError(
            [f"initial data under-resolved: {what} leaves a spectral tail of "
             f"{tail / peak:.2e} of peak at the highest modes (limit {RESOLVABILITY_TAIL:g}); "
             f"increase n_modes or widen the profile"])


def _random_bandlimited(grid: SpectralGrid, amplitude: float, k_max: float, seed: int) -> Field:
    rng = np.random.default_rng(seed)
    k = grid.wavenumbers
    j = grid.mode_numbers
    band = (j > 0) & (np.abs(k) <= k_max) & (j < grid.n_modes // 2)
    if not np.any(band):
        raise ConfigError(
            [f"random_bandlimited: no representable modes with 0 < k <= {k_max:g} "
             f"(smallest nonzero wavenumber is {2 * np.pi / grid.period:g})"])
    coeffs = np.zeros(grid.n_modes, dtype=np.complex128)
    draws = rng.standard_normal((int(np.sum(band)), 2))
    coeffs[band] = draws[:, 0] + 1j * draws[:, 1]
    # mirror for a real-valued field
    idx = np.nonzero(band)[0]
    coeffs[-idx] = np.conj(coeffs[idx])
    field_ = Field.from_spectral(grid, coeffs)
    sup = sup_norm_refined(field_, 4)
    if sup > 0:
        field_ = Field.from_spectral(grid, coeffs * (amplitude / sup))
    return field_
