"""Time evolution and stationary solutions of the master equation.

The right-hand side is

    drho/dt = -i[H, rho] + sum_k rate_k (2 L_k rho L_k^dag
                                         - L_k^dag L_k rho - rho L_k^dag L_k),

integrated with fixed-step classical RK4. After every step the state is
re-Hermitized as (rho + rho^dag)/2; the pre-enforcement Hermiticity drift and
the trace drift are checked against the per-step tolerance, and recorded
states must pass the density-matrix gates. Accuracy is certified by step
halving, not by an embedded error estimator.

A vectorized superoperator (column-stacking convention,
vec(A X B) = (B^T kron A) vec(X)) provides an independent oracle for the
right-hand side and the linear system behind the steady-state solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import LindbladModel
from .qops import POSITIVITY_TOL, assert_density_matrix, expectation, partial_trace


class IntegratorError(RuntimeError):
    """Base class for aborted time evolutions."""


class TraceDriftError(IntegratorError):
    """Trace left 1 by more than the tolerance; the step size is too large."""


class HermiticityDriftError(IntegratorError):
    """Pre-symmetrization Hermiticity defect exceeded the tolerance."""


class PositivityLossError(IntegratorError):
    """A recorded state developed a negative eigenvalue beyond the gate."""


class RankDeficientError(RuntimeError):
    """The steady-state manifold is degenerate (or empty of dissipation)."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Fixed-step RK4 parameters. Times are in the units set by the couplings."""

    dt: float = 0.002
    t_max: float = 5.0
    tolerance: float = 1e-8
    record_stride: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be nonnegative, got {self.t_max}")
        if self.t_max > 0 and self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if not 0 < self.tolerance <= 1e-4:
            raise ValueError(f"tolerance must lie in (0, 1e-4], got {self.tolerance}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")


@dataclass
class Trajectory:
    """Recorded time series: states plus derived observables and health data."""

    times: np.ndarray
    states: list[np.ndarray]
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    trace_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    min_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced: bool = False

    def __post_init__(self):
        n = len(self.times)
        if len(self.states) != n:
            raise ValueError("times and states lengths disagree")
        for values in self.observables.values():
            if len(values) != n:
                raise ValueError("observable series length disagrees with times")


def lindblad_rhs(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """Master-equation right-hand side, written exactly as the equation reads."""
    h = model.hamiltonian
    if rho.shape != h.shape:
        raise ValueError(f"state shape {rho.shape} does not match model dimension {h.shape[0]}")
    out = -1j * (h @ rho - rho @ h)
    for rate, lop in model.collapse_terms:
        ldag = lop.conj().T
        ldl = ldag @ lop
        out = out + rate * (2.0 * (lop @ rho @ ldag) - ldl @ rho - rho @ ldl)
    return out


def make_rhs(model: LindbladModel):
    """Precomputed evaluator algebraically identical to `lindblad_rhs`.

    Folds the Hamiltonian and the anticommutator parts into a single matrix
    M = iH + sum_k rate_k L_k^dag L_k, so each evaluation is

        rhs(rho) = -(M rho + rho M^dag) + sum_k 2 rate_k L_k rho L_k^dag,

    with the jump terms stacked for batched matmul. Agreement with
    `lindblad_rhs` is pinned by tests.
    """
    h = model.hamiltonian
    d = h.shape[0]
    sink = np.zeros((d, d), dtype=complex)
    jumps = []
    for rate, lop in model.collapse_terms:
        if rate == 0:
            continue
        sink = sink + rate * (lop.conj().T @ lop)
        jumps.append(np.sqrt(2.0 * rate) * lop)
    m = 1j * h + sink
    mdag = m.conj().T
    if jumps:
        a = np.stack(jumps)
        adag = a.conj().transpose(0, 2, 1)

        def rhs(rho: np.ndarray) -> np.ndarray:
            return ((a @ rho) @ adag).sum(axis=0) - (m @ rho + rho @ mdag)

    else:

        def rhs(rho: np.ndarray) -> np.ndarray:
            return -(m @ rho + rho @ mdag)

    return rhs


def _rk4_step(rhs, rho: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + (0.5 * h) * k1)
    k3 = rhs(rho + (0.5 * h) * k2)
    k4 = rhs(rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def evolve(
    model: LindbladModel,
    rho0: np.ndarray,
    settings: IntegratorSettings,
    record_times=None,
    observables: dict[str, np.ndarray] | None = None,
    reduce_to=None,
) -> Trajectory:
    """Integrate from rho0, recording states, observables and health data.

    By default records every `record_stride`-th step plus t=0 and t_max.
    Explicit `record_times` (ascending, >= 0) override that grid; steps are
    shortened where needed so every record time is hit exactly, and never
    exceed `settings.dt`. With `reduce_to` set (an iterable of layout slots),
    stored states are partial traces over the complement; diagnostics are
    always computed on the composite state.
    """
    assert_density_matrix(rho0)
    d = model.dim
    if rho0.shape != (d, d):
        raise ValueError(f"initial state shape {rho0.shape} does not match model dimension {d}")

    if record_times is None:
        stride_dt = settings.record_stride * settings.dt
        n_rec = int(math.floor(settings.t_max / stride_dt + 1e-9))
        record_times = [k * stride_dt for k in range(n_rec + 1)]
        if record_times[-1] < settings.t_max - 1e-12:
            record_times.append(settings.t_max)
    record_times = [float(t) for t in record_times]
    if any(t < 0 for t in record_times):
        raise ValueError("record times must be nonnegative")
    if any(t2 < t1 for t1, t2 in zip(record_times, record_times[1:])):
        raise ValueError("record times must be ascending")

    rhs = make_rhs(model)
    observables = observables or {}
    tol = settings.tolerance

    rho = np.array(rho0, dtype=complex)
    times_out: list[float] = []
    states: list[np.ndarray] = []
    obs_out: dict[str, list[float]] = {name: [] for name in observables}
    trace_res: list[float] = []
    min_eigs: list[float] = []

    t_prev = 0.0
    for t_rec in record_times:
        span = t_rec - t_prev
        if span > 1e-12 * max(1.0, t_rec):
            n_steps = max(1, math.ceil(span / settings.dt - 1e-9))
            h = span / n_steps
            for _ in range(n_steps):
                rho_raw = _rk4_step(rhs, rho, h)
                herm_drift = float(np.abs(rho_raw - rho_raw.conj().T).max())
                if herm_drift > tol:
                    raise HermiticityDriftError(
                        f"Hermiticity drift {herm_drift:.3e} exceeds tolerance {tol:.1e} near t={t_prev:.6g}"
                    )
                rho = 0.5 * (rho_raw + rho_raw.conj().T)
                drift = float(abs(rho.trace().real - 1.0))
                if drift > tol:
                    raise TraceDriftError(
                        f"trace drift {drift:.3e} exceeds tolerance {tol:.1e} near t={t_prev:.6g}; reduce dt"
                    )
            t_prev = t_rec

        residual = float(abs(rho.trace().real - 1.0))
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if min_eig < -100.0 * tol or min_eig < -POSITIVITY_TOL:
            raise PositivityLossError(
                f"smallest eigenvalue {min_eig:.3e} at t={t_rec:.6g} violates the positivity gate"
            )
        times_out.append(t_rec)
        stored = partial_trace(rho, model.layout, reduce_to) if reduce_to is not None else rho.copy()
        states.append(stored)
        trace_res.append(residual)
        min_eigs.append(min_eig)
        for name, op in observables.items():
            obs_out[name].append(expectation(op, rho))

    return Trajectory(
        times=np.array(times_out),
        states=states,
        observables={name: np.array(vals) for name, vals in obs_out.items()},
        trace_residuals=np.array(trace_res),
        min_eigenvalues=np.array(min_eigs),
        reduced=reduce_to is not None,
    )


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return mat.reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def vectorize_superoperator(model: LindbladModel) -> np.ndarray:
    """Matrix  L  with  L vec(rho) = vec(lindblad_rhs(model, rho))  for all rho."""
    h = model.hamiltonian
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    liouv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, lop in model.collapse_terms:
        ldl = lop.conj().T @ lop
        liouv = liouv + rate * (
            2.0 * np.kron(lop.conj(), lop) - np.kron(eye, ldl) - np.kron(ldl.T, eye)
        )
    return liouv


def steady_state(model: LindbladModel, residual_tol: float = 1e-8) -> np.ndarray:
    """Unique stationary state of the model.

    Solves L vec(rho) = 0 with the unit-trace condition by replacing the first
    row of the superoperator with the vectorized trace functional. Degenerate
    stationary manifolds (extra null directions, e.g. undamped atoms) raise
    RankDeficientError rather than returning an arbitrary representative.
    """
    if not any(rate > 0 for rate, _ in model.collapse_terms):
        raise RankDeficientError("no dissipation: every density matrix commuting with H is stationary")
    liouv = vectorize_superoperator(model)
    d = model.dim

    svals = np.linalg.svd(liouv, compute_uv=False)
    nullity = int(np.sum(svals < svals[0] * 1e-10))
    if nullity != 1:
        raise RankDeficientError(
            f"steady-state manifold has dimension {nullity}; the stationary state is not unique"
        )

    a = liouv.copy()
    a[0, :] = 0.0
    a[0, :: d + 1] = 1.0  # trace functional hits the vectorized diagonal
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    rho = unvec(np.linalg.solve(a, b), d)
    rho = 0.5 * (rho + rho.conj().T)

    residual = float(np.abs(liouv @ vec(rho)).max())
    if residual > residual_tol:
        raise RankDeficientError(
            f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e}; system is near-degenerate"
        )
    assert_density_matrix(rho)
    return rho


def steady_state_residual(model: LindbladModel, rho: np.ndarray) -> float:
    """Sup-norm of L vec(rho); zero for an exact stationary state."""
    return float(np.abs(vectorize_superoperator(model) @ vec(rho)).max())
