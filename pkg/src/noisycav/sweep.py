"""Parameter sweeps over noise intensity, decay rates and time.

A sweep evaluates the reduced two-atom concurrence (plus photon number,
excited populations and numerical health data) on a rectangular grid of one
or two swept parameters. When one axis is time, each grid column comes from
a single trajectory recorded at the requested times; otherwise every cell is
an independent evolution to the evaluation time. Cells are independent and
may be computed by a process pool; results are keyed by grid coordinates, so
the output does not depend on scheduling order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import IntegratorError, IntegratorSettings, evolve
from .entanglement import concurrence
from .model import ATOM_A, ATOM_B, SystemConfig, build_model, ground_state, standard_observables
from .qops import assert_density_matrix, partial_trace

SWEEPABLE = ("n_thermal", "kappa", "gamma", "time")


def bright_mode_half_period(cfg: SystemConfig) -> float:
    """Evaluation time 1/(2 g) with g = sqrt(g_a^2 + g_b^2)."""
    g = cfg.coupling
    if g == 0:
        raise ValueError("evaluation time 1/(2g) undefined for zero coupling")
    return 1.0 / (2.0 * g)


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; choose from {SWEEPABLE}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError(f"axis {self.parameter} has no values")
        if any(v2 < v1 for v1, v2 in zip(values, values[1:])):
            raise ValueError(f"axis {self.parameter} values must be ascending")
        if any(v < 0 for v in values):
            raise ValueError(f"axis {self.parameter} values must be nonnegative")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """Grid definition: base config, one or two axes, and the evaluation time."""

    base: SystemConfig
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    evaluation_time: float = 0.0
    initial_state: object = "ground"  # "ground" or a composite density matrix

    def __post_init__(self):
        if self.axis2 is not None and self.axis1.parameter == self.axis2.parameter:
            raise ValueError(f"axis parameters must be distinct, both are {self.axis1.parameter!r}")
        if not self._has_time_axis() and self.evaluation_time <= 0:
            raise ValueError("evaluation_time must be positive when time is not a sweep axis")
        if isinstance(self.initial_state, str):
            if self.initial_state != "ground":
                raise ValueError(f"unknown initial state tag {self.initial_state!r}")
        else:
            assert_density_matrix(np.asarray(self.initial_state))

    def _has_time_axis(self) -> bool:
        return self.axis1.parameter == "time" or (
            self.axis2 is not None and self.axis2.parameter == "time"
        )

    def initial_density_matrix(self) -> np.ndarray:
        if isinstance(self.initial_state, str):
            return ground_state(self.base)
        return np.asarray(self.initial_state, dtype=complex)


@dataclass(frozen=True)
class SweepCell:
    axis1_value: float
    axis2_value: float | None
    concurrence: float
    mean_photon: float
    p_ee_a: float
    p_ee_b: float
    trace_residual: float
    min_eigenvalue: float


@dataclass(eq=False)
class SweepResult:
    spec: SweepSpec
    cells: list[list[SweepCell]]  # shape |axis1| x (|axis2| or 1)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cells), len(self.cells[0])

    def concurrence_grid(self) -> np.ndarray:
        return np.array([[cell.concurrence for cell in row] for row in self.cells])


def _with_parameter(cfg: SystemConfig, parameter: str, value: float) -> SystemConfig:
    return replace(cfg, **{parameter: value})


def _run_trajectory_task(task):
    """One trajectory, sampled at the requested times; returns per-time records.

    Module-level so process pools can pickle it. Integrator failures are
    re-raised with the offending cell coordinates prepended.
    """
    cfg, times, rho0, settings, label = task
    model = build_model(cfg)
    obs = standard_observables(cfg)
    obs.pop("mode_b_pop", None)
    try:
        traj = evolve(model, rho0, settings, record_times=times, observables=obs)
    except IntegratorError as err:
        raise type(err)(f"{label}: {err}") from None
    records = []
    for idx in range(len(traj.times)):
        atoms = partial_trace(traj.states[idx], model.layout, (ATOM_A, ATOM_B))
        records.append(
            (
                concurrence(atoms).value,
                float(traj.observables["mean_photon"][idx]),
                float(traj.observables["p_ee_a"][idx]),
                float(traj.observables["p_ee_b"][idx]),
                float(traj.trace_residuals[idx]),
                float(traj.min_eigenvalues[idx]),
            )
        )
    return records


def run_sweep(spec: SweepSpec, settings: IntegratorSettings, workers: int = 1) -> SweepResult:
    """Evaluate the grid. `workers` > 1 distributes trajectories over processes."""
    rho0 = spec.initial_density_matrix()
    a1, a2 = spec.axis1, spec.axis2

    # Each task is one trajectory; `targets` maps its per-time records to cells.
    tasks = []
    targets = []  # list of lists of (i, j) aligned with each task's records
    if a2 is None:
        if a1.parameter == "time":
            tasks.append((spec.base, list(a1.values), rho0, settings, "time column"))
            targets.append([(i, 0) for i in range(len(a1))])
        else:
            for i, v in enumerate(a1.values):
                cfg = _with_parameter(spec.base, a1.parameter, v)
                tasks.append((cfg, [spec.evaluation_time], rho0, settings, f"{a1.parameter}={v:g}"))
                targets.append([(i, 0)])
    elif a1.parameter == "time":
        for j, v in enumerate(a2.values):
            cfg = _with_parameter(spec.base, a2.parameter, v)
            tasks.append((cfg, list(a1.values), rho0, settings, f"{a2.parameter}={v:g}"))
            targets.append([(i, j) for i in range(len(a1))])
    elif a2.parameter == "time":
        for i, v in enumerate(a1.values):
            cfg = _with_parameter(spec.base, a1.parameter, v)
            tasks.append((cfg, list(a2.values), rho0, settings, f"{a1.parameter}={v:g}"))
            targets.append([(i, j) for j in range(len(a2))])
    else:
        for i, v1 in enumerate(a1.values):
            for j, v2 in enumerate(a2.values):
                cfg = _with_parameter(
                    _with_parameter(spec.base, a1.parameter, v1), a2.parameter, v2
                )
                label = f"{a1.parameter}={v1:g}, {a2.parameter}={v2:g}"
                tasks.append((cfg, [spec.evaluation_time], rho0, settings, label))
                targets.append([(i, j)])

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trajectory_task, tasks))
    else:
        results = [_run_trajectory_task(task) for task in tasks]

    n1 = len(a1)
    n2 = len(a2) if a2 is not None else 1
    grid: list[list[SweepCell | None]] = [[None] * n2 for _ in range(n1)]
    for task_targets, records in zip(targets, results):
        for (i, j), rec in zip(task_targets, records):
            grid[i][j] = SweepCell(
                axis1_value=a1.values[i],
                axis2_value=a2.values[j] if a2 is not None else None,
                concurrence=rec[0],
                mean_photon=rec[1],
                p_ee_a=rec[2],
                p_ee_b=rec[3],
                trace_residual=rec[4],
                min_eigenvalue=rec[5],
            )
    return SweepResult(spec=spec, cells=[[cell for cell in row] for row in grid])


@dataclass(frozen=True)
class SummaryRow:
    fixed_value: float
    argmax_value: float | None
    max_concurrence: float
    interior: bool
    product_at_argmax: float | None


def resonance_summary(result: SweepResult, swept: str = "axis2") -> list[SummaryRow]:
    """Location and height of the concurrence maximum along one axis.

    With swept="axis2" (default) each row fixes an axis1 value and scans
    axis2; swept="axis1" transposes that. Identically zero slices are flagged
    with argmax None. `interior` is True when the maximum sits strictly
    between the endpoints of the swept axis. `product_at_argmax` is
    fixed * argmax (None for time axes), the quantity that is roughly constant
    along the resonance ridge of a noise-vs-decay map.
    """
    if result.spec.axis2 is None:
        raise ValueError("resonance_summary needs a two-axis sweep")
    if swept not in ("axis1", "axis2"):
        raise ValueError(f"swept must be 'axis1' or 'axis2', got {swept!r}")

    grid = result.concurrence_grid()
    if swept == "axis1":
        grid = grid.T
        fixed_axis, swept_axis = result.spec.axis2, result.spec.axis1
    else:
        fixed_axis, swept_axis = result.spec.axis1, result.spec.axis2

    product_defined = fixed_axis.parameter != "time" and swept_axis.parameter != "time"
    rows = []
    for i, fixed in enumerate(fixed_axis.values):
        series = grid[i]
        k = int(np.argmax(series))
        peak = float(series[k])
        if peak <= 0.0:
            rows.append(SummaryRow(fixed, None, 0.0, False, None))
            continue
        argmax = float(swept_axis.values[k])
        interior = 0 < k < len(swept_axis) - 1
        product = fixed * argmax if product_defined else None
        rows.append(SummaryRow(fixed, argmax, peak, interior, product))
    return rows


def has_interior_extremum(values, band: float = 1e-6) -> bool:
    """True if some interior point is a strict extremum beyond the noise band."""
    v = np.asarray(values, dtype=float)
    for i in range(1, len(v) - 1):
        if v[i] > max(v[i - 1], v[i + 1]) + band:
            return True
        if v[i] < min(v[i - 1], v[i + 1]) - band:
            return True
    return False


def _linspace(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, n))


def preset_spec(name: str, base: SystemConfig, points: int = 31) -> SweepSpec:
    """Figure-reproduction grids behind the CLI presets fig2/fig3/fig4.

    fig2: noise intensity in [0,3] versus time in [0,5];
    fig3: noise intensity in [0,3] versus cavity decay in (0,5] at t = 1/(2g);
    fig4: noise intensity in [0,3] versus atomic decay in [0,1] at t = 1/(2g).
    """
    if name == "fig2":
        return SweepSpec(
            base=base,
            axis1=SweepAxis("n_thermal", _linspace(0.0, 3.0, points)),
            axis2=SweepAxis("time", _linspace(0.0, 5.0, points)),
        )
    if name == "fig3":
        kappas = tuple(5.0 * k / points for k in range(1, points + 1))
        return SweepSpec(
            base=base,
            axis1=SweepAxis("n_thermal", _linspace(0.0, 3.0, points)),
            axis2=SweepAxis("kappa", kappas),
            evaluation_time=bright_mode_half_period(base),
        )
    if name == "fig4":
        return SweepSpec(
            base=base,
            axis1=SweepAxis("n_thermal", _linspace(0.0, 3.0, points)),
            axis2=SweepAxis("gamma", _linspace(0.0, 1.0, points)),
            evaluation_time=bright_mode_half_period(base),
        )
    raise ValueError(f"unknown preset {name!r}; choose fig2, fig3 or fig4")


def product_spread(rows: list[SummaryRow]) -> tuple[float, float] | None:
    """(mean, relative spread) of product_at_argmax over rows that have one."""
    products = [r.product_at_argmax for r in rows if r.product_at_argmax is not None]
    if not products:
        return None
    mean = float(np.mean(products))
    if mean == 0:
        return mean, 0.0
    return mean, float((max(products) - min(products)) / mean)
