"""
Fixed-step RK4 integration of registered evolution systems.

Fields live on a periodic ``FieldGrid`` and take values in a Grassmann algebra
with ``SimConfig.generators`` generators, so every component of an odd field
is evolved alongside the bosonic body.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from skdv_core.algebra.poly import DiffPoly
from skdv_core.config.models import FermionMode, SimConfig
from skdv_core.exceptions import ConfigError, NumericalError
from skdv_core.models.registry import ModelDef, get_model
from skdv_core.numerics.grassmann import GrassmannAlgebra, GrassmannValue, algebra
from skdv_core.numerics.grid import FieldGrid, eval_density
from skdv_core.utils.helpers import ensure_directory
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

# RK4 stability interval on the imaginary axis is |z| <= 2*sqrt(2)
RK4_DISPERSIVE_LIMIT = 2.8
TAIL_TOLERANCE = 1e-10

# Auxiliary fields fixed by a constraint: field -> (source, derivative order)
AUXILIARY_FIELDS = {"psi": ("xi", 1)}

State = dict[str, GrassmannValue]


def _periodic_offset(x: np.ndarray, x0: float, length: float) -> np.ndarray:
    return np.mod(x - x0 + length / 2, length) - length / 2


def soliton_ic(
    kappa: float, x0: float, grid: FieldGrid, potential: bool = False
) -> np.ndarray:
    """
    KdV one-soliton ``2 kappa^2 sech^2(kappa (x - x0))`` sampled on ``grid``.

    With ``potential`` the velocity potential is returned instead:
    ``2 kappa tanh(kappa d) - 4 kappa d / L`` with ``d`` the periodic offset
    from ``x0``. The linear term removes the jump at the boundary, so the
    x-derivative is the soliton minus its mean.
    """
    if kappa <= 0:
        raise ValueError("Soliton parameter kappa must be positive")
    tail = 2 * kappa**2 / math.cosh(min(kappa * grid.length / 2, 700.0)) ** 2
    if tail > TAIL_TOLERANCE:
        logger.warning(
            "Soliton tails reach the boundary", kappa=kappa, length=grid.length, tail=tail
        )
    offset = _periodic_offset(grid.x, x0, grid.length)
    if potential:
        return 2 * kappa * np.tanh(kappa * offset) - 4 * kappa * offset / grid.length
    return 2 * kappa**2 / np.cosh(kappa * offset) ** 2


def fermion_profile(mode: FermionMode, grid: FieldGrid) -> GrassmannValue:
    """``amplitude * sech(width (x - center)) * g_generator``."""
    offset = _periodic_offset(grid.x, mode.center, grid.length)
    profile = mode.amplitude / np.cosh(mode.width * offset)
    return GrassmannValue.monomial(grid.algebra, 1 << (mode.generator - 1), profile)


def initial_state(cfg: SimConfig, model: ModelDef, grid: FieldGrid) -> State:
    """Assemble the initial fields of ``model`` from ``cfg.initial``."""
    spec = cfg.initial
    state: State = {s.name: grid.zeros() for s in model.fields.dynamical()}
    if spec.boson not in state:
        raise ConfigError(f"Model '{model.name}' has no field '{spec.boson}'")
    body = np.zeros(grid.points)
    for soliton in spec.solitons:
        body += soliton_ic(soliton.kappa, soliton.x0, grid, model.potential_form)
    state[spec.boson] = state[spec.boson] + GrassmannValue.scalar(grid.algebra, body)

    for mode in spec.fermions:
        if mode.field not in state:
            raise ConfigError(f"Model '{model.name}' has no field '{mode.field}'")
        if not model.fields[mode.field].odd:
            raise ConfigError(f"Fermion mode targets the even field '{mode.field}'")
        state[mode.field] = state[mode.field] + fermion_profile(mode, grid)

    for name, (source, order) in AUXILIARY_FIELDS.items():
        if name in state and source in state:
            state[name] = grid.differentiate(state[source], order)
    return state


def stability_number(cfg: SimConfig) -> float:
    """``dt * k_max^3`` for the third-order dispersive term."""
    return cfg.dt * (cfg.grid.points * math.pi / cfg.grid.length) ** 3


@dataclass
class SimReport:
    """Time series of monitored functionals plus the final fields."""

    model: str
    grid: FieldGrid
    times: list[float] = field(default_factory=list)
    monitors: dict[str, list[GrassmannValue]] = field(default_factory=dict)
    final_state: State = field(default_factory=dict)
    steps: int = 0

    @property
    def algebra(self) -> GrassmannAlgebra:
        return self.grid.algebra

    def series(self, name: str, mask: int = 0) -> np.ndarray:
        """One Grassmann component of a monitored functional over time."""
        return np.array([float(value.component(mask)) for value in self.monitors[name]])

    def drift(self, name: str) -> float:
        """``max_t |Q(t) - Q(0)| / |Q(0)|`` taken over all Grassmann components."""
        values = self.monitors[name]
        start = values[0].norm()
        if start == 0:
            return max(value.norm() for value in values)
        return max((value - values[0]).norm() for value in values) / start

    def write_timeseries_csv(self, path: Path) -> Path:
        """One row per output time; even Grassmann components get a ``_g12`` style suffix."""
        ensure_directory(path.parent)
        masks = self.algebra.masks(odd=False)
        names = sorted(self.monitors)
        header = ["t"] + [
            name if mask == 0 else f"{name}_{self.algebra.label(mask)}"
            for name in names
            for mask in masks
        ]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for i, t in enumerate(self.times):
                row = [f"{t:.10g}"]
                for name in names:
                    value = self.monitors[name][i]
                    row.extend(f"{float(value.component(mask)):.17g}" for mask in masks)
                writer.writerow(row)
        logger.info("Wrote time series", path=str(path), rows=len(self.times))
        return path

    def write_final_state_csv(self, path: Path) -> Path:
        """Columns ``x`` then every field component, ``u`` for the body and ``u_g12`` etc."""
        ensure_directory(path.parent)
        masks = list(range(self.algebra.size))
        names = sorted(self.final_state)
        header = ["x"] + [
            name if mask == 0 else f"{name}_{self.algebra.label(mask)}"
            for name in names
            for mask in masks
        ]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for j, x in enumerate(self.grid.x):
                row = [f"{x:.10g}"]
                for name in names:
                    data = self.final_state[name].data
                    row.extend(f"{data[mask, j]:.17g}" for mask in masks)
                writer.writerow(row)
        logger.info("Wrote final state", path=str(path), points=self.grid.points)
        return path


class Integrator:
    """RK4 stepper for ``phi_t = rhs(phi)`` on a periodic grid."""

    def __init__(self, model: ModelDef, grid: FieldGrid, dealias: bool = True):
        if not model.equations:
            raise ConfigError(f"Model '{model.name}' has no evolution equations")
        self.model = model
        self.grid = grid
        self.dealias = dealias
        self.flows: dict[str, DiffPoly] = model.flows

    def rhs(self, state: Mapping[str, GrassmannValue]) -> State:
        sampled = self.grid.with_fields(state)
        result: State = {}
        for name in state:
            flow = self.flows.get(name)
            if flow is None:
                result[name] = self.grid.zeros()
                continue
            value = eval_density(flow, sampled)
            result[name] = self.grid.dealias(value) if self.dealias else value
        return result

    def step(self, state: State, dt: float) -> State:
        k1 = self.rhs(state)
        k2 = self.rhs(_axpy(state, k1, dt / 2))
        k3 = self.rhs(_axpy(state, k2, dt / 2))
        k4 = self.rhs(_axpy(state, k3, dt))
        return {
            name: state[name] + (k1[name] + k2[name] * 2 + k3[name] * 2 + k4[name]) * (dt / 6)
            for name in state
        }

    def monitor(self, state: State, names: list[str]) -> dict[str, GrassmannValue]:
        sampled = self.grid.with_fields(state)
        return {
            name: self.grid.integrate(eval_density(self.model.conserved[name], sampled))
            for name in names
        }


def _axpy(state: State, rate: State, h: float) -> State:
    return {name: state[name] + rate[name] * h for name in state}


def _monitor_names(cfg: SimConfig, model: ModelDef) -> list[str]:
    names = []
    for name in cfg.monitors:
        if name in model.conserved:
            names.append(name)
        else:
            logger.warning(
                "Model has no conserved density for monitor", model=model.name, monitor=name
            )
    return names


def integrate(cfg: SimConfig, model: Optional[ModelDef] = None) -> SimReport:
    """
    Run one simulation.

    Raises:
        NumericalError: the state stopped being finite; the error carries the
            last finite state and its time
        NonlocalError: a nonlocal term met a nonzero-mean argument
    """
    model = model or get_model(cfg.model, cfg.params)
    grid = FieldGrid(cfg.grid.length, cfg.grid.points, algebra(cfg.generators))
    number = stability_number(cfg)
    if number > RK4_DISPERSIVE_LIMIT:
        logger.warning(
            "Time step exceeds the RK4 dispersive stability bound",
            dt=cfg.dt,
            bound=RK4_DISPERSIVE_LIMIT,
            value=round(number, 3),
        )

    stepper = Integrator(model, grid, cfg.dealias)
    state = initial_state(cfg, model, grid)
    names = _monitor_names(cfg, model)
    report = SimReport(model=model.name, grid=grid)

    def record(t: float) -> None:
        report.times.append(t)
        for name, value in stepper.monitor(state, names).items():
            report.monitors.setdefault(name, []).append(value)

    logger.info(
        "Starting simulation",
        model=model.name,
        points=grid.points,
        generators=cfg.generators,
        steps=cfg.steps,
    )
    record(0.0)
    for n in range(1, cfg.steps + 1):
        candidate = stepper.step(state, cfg.dt)
        if not all(value.isfinite() for value in candidate.values()):
            error = NumericalError(
                "Simulation produced non-finite values", last_valid_time=(n - 1) * cfg.dt
            )
            error.last_valid_state = state
            logger.error("Simulation aborted", step=n, time=(n - 1) * cfg.dt)
            raise error
        state = candidate
        if n % cfg.output_every == 0 or n == cfg.steps:
            record(n * cfg.dt)

    report.final_state = state
    report.steps = cfg.steps
    logger.info("Simulation finished", model=model.name, t_final=cfg.steps * cfg.dt)
    return report
