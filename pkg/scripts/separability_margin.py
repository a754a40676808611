#!/usr/bin/env python3
"""Map the separability margin of the thermally driven two-atom system.

For each (noise intensity, time) cell this records l1 - l2 - l3 - l4, the
unclamped spin-flip eigenvalue combination of the reduced two-atom state
(concurrence is its positive part). Starting from |g,g,0> the margin stays
negative across the whole grid: the symmetric coherence built through the
bus is always outmatched by the bunching-fed double excitation, so the atoms
never cross the separability boundary. The CSV makes that margin and its
distance to zero inspectable.
"""

import argparse
from pathlib import Path

import numpy as np

from noisycav.dynamics import IntegratorSettings, evolve
from noisycav.entanglement import concurrence
from noisycav.model import ATOM_A, ATOM_B, SystemConfig, build_model, ground_state


def margin_map(n_thermal_values, times, base, dt):
    rows = []
    for n_t in n_thermal_values:
        cfg = SystemConfig(
            omega=base.omega, omega_f=base.omega_f, g_a=base.g_a, g_b=base.g_b,
            kappa=base.kappa, gamma=base.gamma, n_thermal=float(n_t), cutoff=base.cutoff,
        )
        traj = evolve(
            build_model(cfg),
            ground_state(cfg),
            IntegratorSettings(dt=dt, t_max=max(times)),
            record_times=list(times),
            reduce_to=(ATOM_A, ATOM_B),
        )
        for t, state in zip(traj.times, traj.states):
            l1, l2, l3, l4 = concurrence(state).lambdas
            rows.append((float(n_t), float(t), l1 - l2 - l3 - l4))
    return rows


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="separability_margin.csv")
    parser.add_argument("--nt-max", type=float, default=3.0)
    parser.add_argument("--nt-points", type=int, default=16)
    parser.add_argument("--t-max", type=float, default=5.0)
    parser.add_argument("--t-points", type=int, default=20)
    parser.add_argument("--dt", type=float, default=0.002)
    args = parser.parse_args(argv)

    n_ts = np.linspace(0.0, args.nt_max, args.nt_points)
    times = np.linspace(args.t_max / args.t_points, args.t_max, args.t_points)
    rows = margin_map(n_ts, times, SystemConfig(), args.dt)

    lines = ["n_thermal,t,margin"]
    lines += [f"{n_t:.12g},{t:.12g},{m:.12g}" for n_t, t, m in rows]
    Path(args.out).write_text("\n".join(lines) + "\n")

    peak = max(m for _, _, m in rows)
    where = [(n_t, t) for n_t, t, m in rows if m == peak][0]
    print(f"wrote {args.out}; largest margin {peak:.3e} at n_T={where[0]:.3g}, t={where[1]:.3g} "
          f"({'entangled' if peak > 0 else 'separable everywhere'})")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
