"""Physical model assembly for two two-level atoms in a thermally driven cavity.

The default evolution frame is the interaction picture, where only the
resonant atom-cavity exchange survives:

    H_I = sum_i g_i (|g>_i<e| a^dag + h.c.),   i in {a, b}.

The lab frame adds the free energies (omega/2) sigma_z per atom and
omega_f a^dag a and is kept for cross-checking; the dissipative part is
frame independent. Dissipation follows the rate-times-anticommutator
convention

    rate * (2 L rho L^dag - L^dag L rho - rho L^dag L),

so `kappa` and `gamma` mean exactly what the figure parameters mean: total
cavity decay 2*kappa, spontaneous emission rate 2*gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .qops import (
    SpaceLayout,
    annihilation,
    basis_state,
    dagger,
    embed,
    excited_projector,
    number_operator,
    pauli_z,
    sigma_minus,
    sigma_plus,
)

ATOM_A, ATOM_B, CAVITY = 0, 1, 2

FRAMES = ("interaction", "lab")


@dataclass(frozen=True)
class SystemConfig:
    """All physical parameters, in natural units (hbar = 1, rates angular).

    Defaults are the parameter set used throughout the concurrence maps:
    resonant atoms and cavity, g_a = g_b = 1, kappa = 2, gamma = 0.2.
    """

    omega: float = 1.0
    omega_f: float = 1.0
    g_a: float = 1.0
    g_b: float = 1.0
    kappa: float = 2.0
    gamma: float = 0.2
    n_thermal: float = 0.0
    cutoff: int = 5

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if self.omega_f < 0:
            raise ValueError(f"omega_f must be nonnegative, got {self.omega_f}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.n_thermal < 0:
            raise ValueError(f"n_thermal must be nonnegative, got {self.n_thermal}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff}")

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout((2, 2, self.cutoff + 1))

    @property
    def coupling(self) -> float:
        """Effective collective coupling g = sqrt(g_a^2 + g_b^2)."""
        return math.hypot(self.g_a, self.g_b)


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus (rate, collapse operator) pairs on one composite space."""

    hamiltonian: np.ndarray
    collapse_terms: tuple[tuple[float, np.ndarray], ...]
    layout: SpaceLayout

    def __post_init__(self):
        d = self.layout.dim
        if self.hamiltonian.shape != (d, d):
            raise ValueError(f"Hamiltonian shape {self.hamiltonian.shape} does not match layout dim {d}")
        defect = float(np.abs(self.hamiltonian - self.hamiltonian.conj().T).max())
        if defect > 1e-10:
            raise ValueError(f"Hamiltonian not Hermitian: defect {defect:.3e}")
        for rate, op in self.collapse_terms:
            if rate < 0:
                raise ValueError(f"collapse rate must be nonnegative, got {rate}")
            if op.shape != (d, d):
                raise ValueError(f"collapse operator shape {op.shape} does not match layout dim {d}")

    @property
    def dim(self) -> int:
        return self.layout.dim


def build_interaction_hamiltonian(cfg: SystemConfig) -> np.ndarray:
    """Resonant exchange Hamiltonian on the composite space (default frame).

    Built as X + X^dag so the result is Hermitian exactly.
    """
    layout = cfg.layout
    adag = embed(dagger(annihilation(cfg.cutoff)), CAVITY, layout)
    lower_a = embed(sigma_minus(), ATOM_A, layout)
    lower_b = embed(sigma_minus(), ATOM_B, layout)
    x = (cfg.g_a * lower_a + cfg.g_b * lower_b) @ adag
    return x + dagger(x)


def build_lab_hamiltonian(cfg: SystemConfig) -> np.ndarray:
    """Free atomic and cavity energies plus the exchange coupling."""
    layout = cfg.layout
    h0 = 0.5 * cfg.omega * (embed(pauli_z(), ATOM_A, layout) + embed(pauli_z(), ATOM_B, layout))
    h0 = h0 + cfg.omega_f * embed(number_operator(cfg.cutoff), CAVITY, layout)
    return h0 + build_interaction_hamiltonian(cfg)


def build_collapse_terms(cfg: SystemConfig) -> list[tuple[float, np.ndarray]]:
    """Cavity thermal damping plus per-atom spontaneous emission.

    Four families: (kappa(n_T+1), a), (kappa n_T, a^dag), (gamma, sigma_minus)
    for each atom. Zero-rate terms are omitted.
    """
    layout = cfg.layout
    terms: list[tuple[float, np.ndarray]] = []
    cooling = cfg.kappa * (cfg.n_thermal + 1.0)
    heating = cfg.kappa * cfg.n_thermal
    if cooling > 0:
        terms.append((cooling, embed(annihilation(cfg.cutoff), CAVITY, layout)))
    if heating > 0:
        terms.append((heating, embed(dagger(annihilation(cfg.cutoff)), CAVITY, layout)))
    if cfg.gamma > 0:
        terms.append((cfg.gamma, embed(sigma_minus(), ATOM_A, layout)))
        terms.append((cfg.gamma, embed(sigma_minus(), ATOM_B, layout)))
    return terms


def build_model(cfg: SystemConfig, frame: str = "interaction") -> LindbladModel:
    """Full open-system model in the requested frame.

    The dissipative part is identical in both frames; only the Hamiltonian
    changes. On resonance (omega == omega_f) the two frames give the same
    reduced-atom entanglement dynamics.
    """
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    h = build_interaction_hamiltonian(cfg) if frame == "interaction" else build_lab_hamiltonian(cfg)
    return LindbladModel(h, tuple(build_collapse_terms(cfg)), cfg.layout)


def build_cavity_model(cfg: SystemConfig) -> LindbladModel:
    """Cavity-only model (no atoms in the space): thermal damping of one mode.

    This is the configuration whose stationary state is the geometric thermal
    distribution; with atoms present and g = gamma = 0 the steady state would
    be degenerate instead.
    """
    layout = SpaceLayout((cfg.cutoff + 1,))
    a = annihilation(cfg.cutoff)
    terms: list[tuple[float, np.ndarray]] = []
    cooling = cfg.kappa * (cfg.n_thermal + 1.0)
    heating = cfg.kappa * cfg.n_thermal
    if cooling > 0:
        terms.append((cooling, a))
    if heating > 0:
        terms.append((heating, dagger(a)))
    return LindbladModel(np.zeros((cfg.cutoff + 1,) * 2, dtype=complex), tuple(terms), layout)


def collective_mode_operators(cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Raising operators of the collective atomic modes A (bright) and B (dark).

    sigma_A+ = (g_a sigma_a+ + g_b sigma_b+) / g,
    sigma_B+ = (g_b sigma_a+ - g_a sigma_b+) / g,  g = sqrt(g_a^2 + g_b^2),

    embedded on the composite space. Mode A carries the whole cavity coupling;
    mode B drops out of the coherent dynamics and is only damped.
    """
    g = cfg.coupling
    if g == 0:
        raise ValueError("collective modes undefined: both couplings are zero")
    layout = cfg.layout
    raise_a = embed(sigma_plus(), ATOM_A, layout)
    raise_b = embed(sigma_plus(), ATOM_B, layout)
    sigma_a_plus = (cfg.g_a * raise_a + cfg.g_b * raise_b) / g
    sigma_b_plus = (cfg.g_b * raise_a - cfg.g_a * raise_b) / g
    return sigma_a_plus, sigma_b_plus


def ground_state(cfg: SystemConfig) -> np.ndarray:
    """|g>_a |g>_b |0>_c as a density matrix on the composite space."""
    ket = basis_state(cfg.layout.dim, 0)
    return np.outer(ket, ket.conj())


def standard_observables(cfg: SystemConfig) -> dict[str, np.ndarray]:
    """Named expectation operators recorded along trajectories.

    mode_b_pop is present only when the collective modes exist (g > 0).
    """
    layout = cfg.layout
    obs = {
        "mean_photon": embed(number_operator(cfg.cutoff), CAVITY, layout),
        "p_ee_a": embed(excited_projector(), ATOM_A, layout),
        "p_ee_b": embed(excited_projector(), ATOM_B, layout),
    }
    if cfg.coupling > 0:
        _, sigma_b_plus = collective_mode_operators(cfg)
        obs["mode_b_pop"] = sigma_b_plus @ dagger(sigma_b_plus)
    return obs


def truncation_tail_mass(n_thermal: float, cutoff: int) -> float:
    """Thermal weight beyond the Fock cutoff, (n_T/(1+n_T))^(cutoff+1).

    Reported as a truncation-quality diagnostic whenever n_thermal > 0.
    """
    if n_thermal <= 0:
        return 0.0
    return (n_thermal / (1.0 + n_thermal)) ** (cutoff + 1)


@dataclass(frozen=True)
class ModeBReport:
    decoupled: bool
    max_population: float
    bound: float


def verify_mode_b_decoupling(
    cfg: SystemConfig,
    t_max: float = 10.0,
    dt: float = 0.002,
    bound: float = 1e-8,
) -> ModeBReport:
    """Dynamical check that the dark collective mode stays unpopulated.

    Evolves from |g,g,0> (which is the collective ground state) and bounds
    the mode-B excitation number along the trajectory. This is the dynamical
    statement behind treating mode B as frozen; it is not an operator
    commutation identity.
    """
    from .dynamics import IntegratorSettings, evolve

    _, sigma_b_plus = collective_mode_operators(cfg)
    n_b = sigma_b_plus @ dagger(sigma_b_plus)
    settings = IntegratorSettings(dt=dt, t_max=t_max, record_stride=25)
    model = build_model(cfg)
    traj = evolve(model, ground_state(cfg), settings, observables={"mode_b_pop": n_b})
    max_pop = float(np.max(traj.observables["mode_b_pop"]))
    return ModeBReport(decoupled=max_pop <= bound, max_population=max_pop, bound=bound)


def override(cfg: SystemConfig, **changes) -> SystemConfig:
    """New config with the given fields replaced (validation re-runs)."""
    return replace(cfg, **changes)
