"""Run driver: fixed-step advancement, snapshots, checkpoint/restart.

A run is strictly sequential and deterministic: identical config and
build produce bit-identical trajectories. Checkpoints capture the full
stepper state (spectral field, multistep history, ledger accumulators)
with hexadecimal float encoding, so a restarted run replays the exact
floating-point operation sequence of the uninterrupted one.

Checkpoint steps are constrained to snapshot steps; that way the
checkpointed field doubles as the previous-snapshot field needed to
continue the pairwise balance residuals and trapezoid accumulators.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import ConfigError, RunConfig, build_initial_data, config_digest
from .flux import FluxModel, validate_growth
from .spectral import Field, NormBundle, SpectralGrid, norms, sup_norm_refined
from .stepping import LinearSymbol, build_symbol, make_stepper

__all__ = [
    "BlowUpError",
    "CheckpointMismatchError",
    "Checkpoint",
    "RunResult",
    "RunWriter",
    "run",
    "restart",
    "load_checkpoint",
    "save_checkpoint",
]

CHECKPOINT_FORMAT = "dispersim-checkpoint"
CHECKPOINT_VERSION = 1


class BlowUpError(RuntimeError):
    """State became nonfinite: under-resolution / stiffness blow-up."""

    def __init__(self, t: float, step: int):
        self.t = t
        self.step = step
        super().__init__(
            f"nonfinite state at t={t:.6g} (step {step}); the run is under-resolved "
            f"or outside the global-existence hypotheses; refine dt or n_modes"
        )


class CheckpointMismatchError(ValueError):
    """Checkpoint cannot continue under the supplied configuration."""


@dataclass(frozen=True)
class Checkpoint:
    """Exact restartable solver state at one snapshot step."""

    step_index: int
    t: float
    config_digest: str
    state: np.ndarray                    # complex spectral field
    stepper_history: np.ndarray | None   # multistep schemes only
    record: diag.DiagnosticsRecord
    config: RunConfig


@dataclass
class RunResult:
    config: RunConfig
    records: list[diag.DiagnosticsRecord]
    final_field: Field
    final_step: int
    checkpoints: list[Checkpoint]
    wall_seconds: float


def _growth_screen(model: FluxModel, u_tilde: float, psi0: Field) -> None:
    # Range the solution plausibly explores: far field plus a doubled
    # initial amplitude envelope.
    u_max = max(1.0, abs(u_tilde) + 2.0 * sup_norm_refined(psi0, 4))
    report = validate_growth(model, model.q_declared, u_max)
    if not report.satisfied:
        raise ConfigError(
            [f"flux {model.label} violates the declared growth bound "
             f"|f''(u)| <= C*(1+|u|^{model.q_declared:g}) on [-{u_max:g}, {u_max:g}] "
             f"(ratio grows by {report.tail_growth:.3g}x near the range ends); "
             f"raise q_declared or choose a different flux"]
        )


def run(config: RunConfig, writer: "RunWriter | None" = None, on_snapshot=None) -> RunResult:
    """Advance from t=0 to t_end, emitting snapshots and checkpoints."""
    grid = config.make_grid()
    model = config.make_flux()
    psi0 = build_initial_data(config.initial_data, grid)
    _growth_screen(model, config.physics.u_tilde, psi0)
    symbol = build_symbol(grid, config.physics.delta, config.physics.nu)
    stepper = make_stepper(config.stepper.scheme, symbol, grid, model,
                           config.physics.u_tilde, config.stepper.dt)
    state = np.ascontiguousarray(psi0.spectral, dtype=np.complex128).copy()
    nb0 = norms(psi0, sup_factor=config.diagnostics.sup_refinement)
    record0 = diag.initial_record(psi0, 0.0, field_norms=nb0)
    if writer is not None:
        writer.write_record(record0)
    if on_snapshot is not None:
        on_snapshot(0, 0.0, psi0, record0)
    return _drive(config, grid, model, symbol, stepper, state,
                  start_step=0, record=record0, prev_field=psi0,
                  writer=writer, on_snapshot=on_snapshot)


def restart(checkpoint: Checkpoint, config: RunConfig | None = None,
            writer: "RunWriter | None" = None, on_snapshot=None) -> RunResult:
    """Continue a checkpointed run to t_end.

    The supplied config (defaulting to the one embedded in the
    checkpoint) must carry the same semantic digest; states at common
    times then agree bit-identically with the uninterrupted run.
    """
    if config is None:
        config = checkpoint.config
    digest = config_digest(config)
    if digest != checkpoint.config_digest:
        raise CheckpointMismatchError(
            f"config digest {digest[:12]}... does not match checkpoint digest "
            f"{checkpoint.config_digest[:12]}...; restarts require an identical "
            f"semantic configuration"
        )
    grid = config.make_grid()
    model = config.make_flux()
    symbol = build_symbol(grid, config.physics.delta, config.physics.nu)
    stepper = make_stepper(config.stepper.scheme, symbol, grid, model,
                           config.physics.u_tilde, config.stepper.dt)
    stepper.restore_history(checkpoint.stepper_history)
    state = np.ascontiguousarray(checkpoint.state, dtype=np.complex128).copy()
    prev_field = Field.from_spectral(grid, state.copy())
    return _drive(config, grid, model, symbol, stepper, state,
                  start_step=checkpoint.step_index, record=checkpoint.record,
                  prev_field=prev_field, writer=writer, on_snapshot=on_snapshot)


def _drive(config: RunConfig, grid: SpectralGrid, model: FluxModel, symbol: LinearSymbol,
           stepper, state: np.ndarray, start_step: int, record: diag.DiagnosticsRecord,
           prev_field: Field, writer, on_snapshot) -> RunResult:
    sc = config.stepper
    nu = config.physics.nu
    u_tilde = config.physics.u_tilde
    sup_factor = config.diagnostics.sup_refinement
    dt = sc.dt
    n_total = int(round(sc.t_end / dt))
    snapshot_stride = sc.snapshot_stride
    checkpoint_stride = sc.checkpoint_stride

    records = [record]
    checkpoints: list[Checkpoint] = []
    scratch = np.empty_like(state)
    last_snapshot_step = start_step
    prev_balance_terms = None  # cached (g, rhs) of prev_field for the pair residual

    t_start = time.perf_counter()
    for step in range(start_step + 1, n_total + 1):
        ok = stepper.step(state, scratch)
        state, scratch = scratch, state
        if not ok:
            raise BlowUpError(t=step * dt, step=step)

        at_snapshot = step % snapshot_stride == 0 or step == n_total
        if at_snapshot:
            t = step * dt
            field = Field.from_spectral(grid, state.copy())
            nb = norms(field, sup_factor=sup_factor)
            dt_since = (step - last_snapshot_step) * dt
            if prev_balance_terms is None:
                prev_balance_terms = diag.h2_balance_terms(prev_field, nu, model, u_tilde)
            cur_terms = diag.h2_balance_terms(field, nu, model, u_tilde)
            residual = diag.h2_balance_from_terms(prev_balance_terms, cur_terms, dt_since)
            record = diag.advance_record(record, field, nu, dt_since,
                                         h2_balance=residual, field_norms=nb)
            records.append(record)
            if writer is not None:
                writer.write_record(record)
            if on_snapshot is not None:
                on_snapshot(step, t, field, record)
            prev_field = field
            prev_balance_terms = cur_terms
            last_snapshot_step = step

            if checkpoint_stride and step % checkpoint_stride == 0:
                cp = Checkpoint(
                    step_index=step,
                    t=t,
                    config_digest=config_digest(config),
                    state=state.copy(),
                    stepper_history=stepper.history_state(),
                    record=record,
                    config=config,
                )
                checkpoints.append(cp)
                if writer is not None:
                    writer.write_checkpoint(cp)
    wall = time.perf_counter() - t_start

    final_field = Field.from_spectral(grid, state.copy())
    result = RunResult(config=config, records=records, final_field=final_field,
                       final_step=n_total, checkpoints=checkpoints, wall_seconds=wall)
    if writer is not None:
        writer.finalize(result)
    return result


# --- checkpoint serialization -------------------------------------------------

def _hex_list(values: np.ndarray) -> list[str]:
    return [float(v).hex() for v in values]


def _from_hex_list(items) -> np.ndarray:
    return np.array([float.fromhex(s) for s in items], dtype=np.float64)


def _record_to_json(record: diag.DiagnosticsRecord) -> dict:
    d = asdict(record)
    return {k: (_hexify_rec(v) if isinstance(v, dict) else float(v).hex())
            for k, v in d.items()}


def _hexify_rec(d: dict) -> dict:
    return {k: float(v).hex() for k, v in d.items()}


def _record_from_json(d: dict) -> diag.DiagnosticsRecord:
    nb = NormBundle(**{k: float.fromhex(v) for k, v in d["norms"].items()})
    rest = {k: float.fromhex(v) for k, v in d.items() if k != "norms"}
    return diag.DiagnosticsRecord(norms=nb, **rest)


def save_checkpoint(cp: Checkpoint, path) -> Path:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config_digest": cp.config_digest,
        "config": asdict(cp.config),
        "step_index": cp.step_index,
        "t": float(cp.t).hex(),
        "state_re": _hex_list(cp.state.real),
        "state_im": _hex_list(cp.state.imag),
        "history_re": None if cp.stepper_history is None else _hex_list(cp.stepper_history.real),
        "history_im": None if cp.stepper_history is None else _hex_list(cp.stepper_history.imag),
        "record": _record_to_json(cp.record),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True))
    return path


def load_checkpoint(path) -> Checkpoint:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointMismatchError(f"{path} is not a dispersim checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointMismatchError(
            f"{path} has checkpoint version {payload.get('version')}, expected {CHECKPOINT_VERSION}")
    from .config import config_from_dict

    state = _from_hex_list(payload["state_re"]) + 1j * _from_hex_list(payload["state_im"])
    history = None
    if payload["history_re"] is not None:
        history = _from_hex_list(payload["history_re"]) + 1j * _from_hex_list(payload["history_im"])
    return Checkpoint(
        step_index=int(payload["step_index"]),
        t=float.fromhex(payload["t"]),
        config_digest=payload["config_digest"],
        state=state,
        stepper_history=history,
        record=_record_from_json(payload["record"]),
        config=config_from_dict(payload["config"]),
    )


# --- file output --------------------------------------------------------------

class RunWriter:
    """CSV ledger, checkpoint files, final state and summary for one run.

    Outputs are byte-identical across repeated invocations of the same
    config on the same build: fixed column order, 17-significant-digit
    floats, sorted JSON keys, and no wall-clock content.
    """

    def __init__(self, out_dir, config: RunConfig):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.checkpoint_paths: list[Path] = []
        self._ledger = open(self.out_dir / "ledger.csv", "w")
        self._ledger.write(diag.csv_header() + "\n")

    def write_record(self, record: diag.DiagnosticsRecord) -> None:
        self._ledger.write(diag.csv_row(record) + "\n")

    def write_checkpoint(self, cp: Checkpoint) -> None:
        path = self.out_dir / f"checkpoint_{cp.step_index:010d}.json"
        self.checkpoint_paths.append(save_checkpoint(cp, path))

    def finalize(self, result: RunResult) -> None:
        final_cp = Checkpoint(
            step_index=result.final_step,
            t=result.records[-1].t,
            config_digest=config_digest(result.config),
            state=np.ascontiguousarray(result.final_field.spectral),
            stepper_history=None,
            record=result.records[-1],
            config=result.config,
        )
        save_checkpoint(final_cp, self.out_dir / "final_state.json")
        summary = {
            "config": asdict(result.config),
            "config_digest": config_digest(result.config),
            "n_snapshots": len(result.records),
            "final": {
                "t": f"{result.records[-1].t:.17g}",
                "l2": f"{result.records[-1].norms.l2:.17g}",
                "sup_psi": f"{result.records[-1].norms.sup_psi:.17g}",
                "sup_dpsi": f"{result.records[-1].norms.sup_dpsi:.17g}",
                "mean": f"{result.records[-1].norms.mean:.17g}",
                "energy_residual": f"{result.records[-1].energy_residual:.17g}",
                "apriori_int8": f"{result.records[-1].apriori_int8:.17g}",
                "apriori_int83": f"{result.records[-1].apriori_int83:.17g}",
            },
            "checkpoints": [p.name for p in self.checkpoint_paths],
        }
        if len(result.records) >= 10:
            decay = diag.decay_report(result.records,
                                      result.config.diagnostics.decay_threshold_ratio)
            summary["decay"] = {
                k: (v if v is None or isinstance(v, int) else f"{v:.17g}")
                for k, v in asdict(decay).items()
            }
        (self.out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1))
        self._ledger.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if not self._ledger.closed:
            self._ledger.close()
        return False
