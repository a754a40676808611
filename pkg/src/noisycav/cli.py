"""Command-line interface: evolve, steady and sweep subcommands.

Configuration is a plain key=value document ('#' comments allowed). Every key
is validated against a closed list so a typo like "gama" is an error rather
than a silently ignored default. Output is CSV or JSON with deterministic
formatting: repeated runs on the same platform produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 integrator failure,
4 degenerate steady state.
"""

from __future__ import annotations

import json
import os
import sys
from argparse import ArgumentParser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import (
    IntegratorError,
    IntegratorSettings,
    RankDeficientError,
    evolve,
    steady_state,
    steady_state_residual,
)
from .entanglement import concurrence
from .model import (
    ATOM_A,
    ATOM_B,
    CAVITY,
    SystemConfig,
    build_cavity_model,
    build_model,
    ground_state,
    standard_observables,
    truncation_tail_mass,
)
from .qops import partial_trace
from .sweep import (
    SweepAxis,
    SweepSpec,
    bright_mode_half_period,
    preset_spec,
    product_spread,
    resonance_summary,
    run_sweep,
)

EVOLVE_HEADER = "t,concurrence,p_ee_a,p_ee_b,mean_photon,mode_b_pop,trace_residual"
SWEEP_HEADER = "axis1_name,axis1_value,axis2_name,axis2_value,concurrence,mean_photon,trace_residual"
SUMMARY_HEADER = "fixed_value,argmax_value,max_concurrence,interior,product_at_argmax"

_FLOAT_KEYS = ("omega", "omega_f", "g_a", "g_b", "kappa", "gamma", "n_thermal",
               "dt", "t_max", "tolerance")
_INT_KEYS = ("cutoff", "record_stride")
_SYSTEM_KEYS = ("omega", "omega_f", "g_a", "g_b", "kappa", "gamma", "n_thermal", "cutoff")
_INTEGRATOR_KEYS = ("dt", "t_max", "tolerance", "record_stride")
_OUTPUT_KEYS = ("out", "format")
_ALL_KEYS = _SYSTEM_KEYS + _INTEGRATOR_KEYS + _OUTPUT_KEYS


class ConfigError(ValueError):
    """Malformed or out-of-domain configuration input."""


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    integrator: IntegratorSettings
    out: str | None = None
    fmt: str = "csv"


def _parse_value(key: str, raw: str, where: str):
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{where}: value for {key} is not a number: {raw!r}") from None
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: value for {key} is not an integer: {raw!r}") from None
    if key == "format":
        if raw not in ("csv", "json"):
            raise ConfigError(f"{where}: format must be csv or json, got {raw!r}")
        return raw
    return raw  # out: a path string


def _parse_document(text: str) -> list[tuple[str, str, object]]:
    """key=value lines -> [(key, where, typed value)]; rejects unknown keys."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line.strip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        where = f"line {lineno}"
        if key not in _ALL_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        pairs.append((key, where, _parse_value(key, raw, where)))
    return pairs


def _build_run_config(pairs) -> RunConfig:
    system_kwargs, integrator_kwargs, output = {}, {}, {}
    for key, where, value in pairs:
        if key in _SYSTEM_KEYS:
            system_kwargs[key] = value
        elif key in _INTEGRATOR_KEYS:
            integrator_kwargs[key] = value
        else:
            output[key] = value
    try:
        system = SystemConfig(**system_kwargs)
        integrator = IntegratorSettings(**integrator_kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return RunConfig(
        system=system,
        integrator=integrator,
        out=output.get("out"),
        fmt=output.get("format", "csv"),
    )


def parse_config(text: str) -> RunConfig:
    """Typed run configuration from a key=value document, defaults applied."""
    return _build_run_config(_parse_document(text))


def _fmt(x: float) -> str:
    """12 significant digits, deterministic."""
    return f"{x:.12g}"


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _report_truncation_tail(cfg: SystemConfig, n_thermal_max: float | None = None) -> None:
    n_t = cfg.n_thermal if n_thermal_max is None else n_thermal_max
    if n_t > 0:
        tail = truncation_tail_mass(n_t, cfg.cutoff)
        print(
            f"note: thermal weight beyond the Fock cutoff (n_T={n_t:g}, N={cfg.cutoff}): {tail:.3e}",
            file=sys.stderr,
        )


def cmd_evolve(run_cfg: RunConfig) -> int:
    cfg = run_cfg.system
    model = build_model(cfg)
    obs = standard_observables(cfg)
    traj = evolve(
        model,
        ground_state(cfg),
        run_cfg.integrator,
        observables=obs,
        reduce_to=(ATOM_A, ATOM_B),
    )
    n = len(traj.times)
    conc = [concurrence(traj.states[i]).value for i in range(n)]
    mode_b = traj.observables.get("mode_b_pop", np.full(n, float("nan")))

    records = [
        {
            "t": float(traj.times[i]),
            "concurrence": conc[i],
            "p_ee_a": float(traj.observables["p_ee_a"][i]),
            "p_ee_b": float(traj.observables["p_ee_b"][i]),
            "mean_photon": float(traj.observables["mean_photon"][i]),
            "mode_b_pop": float(mode_b[i]),
            "trace_residual": float(traj.trace_residuals[i]),
        }
        for i in range(n)
    ]
    out = run_cfg.out or f"evolve.{run_cfg.fmt}"
    if run_cfg.fmt == "csv":
        lines = [EVOLVE_HEADER]
        lines += [",".join(_fmt(rec[col]) for col in EVOLVE_HEADER.split(",")) for rec in records]
        _write(out, "\n".join(lines) + "\n")
    else:
        _write(out, json.dumps({"records": records}, indent=2) + "\n")
    _report_truncation_tail(cfg)
    return 0


def cmd_steady(run_cfg: RunConfig, cavity_only: bool = False) -> int:
    cfg = run_cfg.system
    model = build_cavity_model(cfg) if cavity_only else build_model(cfg)
    rho = steady_state(model)
    residual = steady_state_residual(model, rho)

    if cavity_only:
        photons = np.real(np.diag(rho))
        atoms = None
        conc = None
    else:
        photons = np.real(np.diag(partial_trace(rho, model.layout, (CAVITY,))))
        atoms = partial_trace(rho, model.layout, (ATOM_A, ATOM_B))
        conc = concurrence(atoms).value

    out = run_cfg.out or f"steady.{run_cfg.fmt}"
    if run_cfg.fmt == "csv":
        lines = ["field,value"]
        if atoms is not None:
            for i in range(4):
                for j in range(4):
                    lines.append(f"rho_atoms_re_{i}_{j},{_fmt(atoms[i, j].real)}")
            for i in range(4):
                for j in range(4):
                    lines.append(f"rho_atoms_im_{i}_{j},{_fmt(atoms[i, j].imag)}")
            lines.append(f"concurrence,{_fmt(conc)}")
        for k, p in enumerate(photons):
            lines.append(f"photon_{k},{_fmt(p)}")
        lines.append(f"liouvillian_residual,{_fmt(residual)}")
        _write(out, "\n".join(lines) + "\n")
    else:
        payload = {
            "reduced_atoms_re": None if atoms is None else [[float(x) for x in row] for row in atoms.real],
            "reduced_atoms_im": None if atoms is None else [[float(x) for x in row] for row in atoms.imag],
            "concurrence": conc,
            "photon_distribution": [float(p) for p in photons],
            "liouvillian_residual": residual,
        }
        _write(out, json.dumps(payload, indent=2) + "\n")
    _report_truncation_tail(cfg)
    return 0


def cmd_sweep(run_cfg: RunConfig, spec: SweepSpec, workers: int = 1) -> int:
    result = run_sweep(spec, run_cfg.integrator, workers=workers)
    a1, a2 = spec.axis1, spec.axis2

    records = []
    for row in result.cells:
        for cell in row:
            records.append(
                {
                    "axis1_name": a1.parameter,
                    "axis1_value": cell.axis1_value,
                    "axis2_name": a2.parameter if a2 is not None else None,
                    "axis2_value": cell.axis2_value,
                    "concurrence": cell.concurrence,
                    "mean_photon": cell.mean_photon,
                    "trace_residual": cell.trace_residual,
                }
            )

    out = run_cfg.out or f"sweep.{run_cfg.fmt}"
    if run_cfg.fmt == "csv":
        lines = [SWEEP_HEADER]
        for rec in records:
            lines.append(
                ",".join(
                    [
                        rec["axis1_name"],
                        _fmt(rec["axis1_value"]),
                        rec["axis2_name"] or "",
                        "" if rec["axis2_value"] is None else _fmt(rec["axis2_value"]),
                        _fmt(rec["concurrence"]),
                        _fmt(rec["mean_photon"]),
                        _fmt(rec["trace_residual"]),
                    ]
                )
            )
        _write(out, "\n".join(lines) + "\n")
    else:
        _write(out, json.dumps({"records": records}, indent=2) + "\n")

    if a2 is not None:
        rows = resonance_summary(result)
        summary_path = f"{out}.summary.{run_cfg.fmt}"
        if run_cfg.fmt == "csv":
            lines = [SUMMARY_HEADER]
            for r in rows:
                lines.append(
                    ",".join(
                        [
                            _fmt(r.fixed_value),
                            "none" if r.argmax_value is None else _fmt(r.argmax_value),
                            _fmt(r.max_concurrence),
                            "true" if r.interior else "false",
                            "" if r.product_at_argmax is None else _fmt(r.product_at_argmax),
                        ]
                    )
                )
            _write(summary_path, "\n".join(lines) + "\n")
        else:
            payload = [
                {
                    "fixed_value": r.fixed_value,
                    "argmax_value": r.argmax_value,
                    "max_concurrence": r.max_concurrence,
                    "interior": r.interior,
                    "product_at_argmax": r.product_at_argmax,
                }
                for r in rows
            ]
            _write(summary_path, json.dumps({"rows": payload}, indent=2) + "\n")
        spread = product_spread(rows)
        if spread is not None:
            mean, rel = spread
            print(
                f"note: axis1*axis2 at the per-row concurrence maximum: mean {mean:.6g}, "
                f"relative spread {rel:.3g}",
                file=sys.stderr,
            )

    n_t_max = None
    for axis in (a1, a2):
        if axis is not None and axis.parameter == "n_thermal":
            n_t_max = max(axis.values)
    _report_truncation_tail(spec.base, n_thermal_max=n_t_max)
    return 0


def _parse_axis(raw: str) -> SweepAxis:
    parts = raw.split(":")
    if len(parts) != 4:
        raise ConfigError(f"axis must be PARAM:LO:HI:N, got {raw!r}")
    name, lo, hi, n = parts
    try:
        lo_f, hi_f, n_i = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"axis bounds/count malformed in {raw!r}") from None
    if n_i < 1:
        raise ConfigError(f"axis point count must be >= 1, got {n_i}")
    try:
        return SweepAxis(name, tuple(np.linspace(lo_f, hi_f, n_i)))
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _sweep_spec_from_args(run_cfg: RunConfig, args) -> SweepSpec:
    if args.preset:
        return preset_spec(args.preset, run_cfg.system, points=args.points)
    if not args.axis1:
        raise ConfigError("sweep needs --preset or --axis1")
    axis1 = _parse_axis(args.axis1)
    axis2 = _parse_axis(args.axis2) if args.axis2 else None
    has_time = axis1.parameter == "time" or (axis2 is not None and axis2.parameter == "time")
    eval_time = args.at_time
    if eval_time is None and not has_time:
        eval_time = bright_mode_half_period(run_cfg.system)
    try:
        return SweepSpec(
            base=run_cfg.system,
            axis1=axis1,
            axis2=axis2,
            evaluation_time=0.0 if has_time else eval_time,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="noisycav",
        description="Two atoms in a thermally driven leaky cavity: trajectories, "
        "steady states and concurrence sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("evolve", "time-evolve from |g,g,0> and tabulate concurrence and populations"),
        ("steady", "solve for the stationary state"),
        ("sweep", "concurrence over a one- or two-parameter grid"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="key=value configuration file")
        sp.add_argument("--out", help="output path (default <command>.<format>)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
        sp.add_argument("--cutoff", type=int, help="override the Fock cutoff")
        sp.add_argument(
            "--set",
            dest="assignments",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one configuration key (repeatable)",
        )
        if name == "steady":
            sp.add_argument(
                "--cavity-only",
                action="store_true",
                help="drop the atoms: thermally damped cavity mode alone",
            )
        if name == "sweep":
            sp.add_argument("--preset", choices=("fig2", "fig3", "fig4"), help="figure-reproduction grid")
            sp.add_argument("--points", type=int, default=31, help="grid points per preset axis")
            sp.add_argument("--axis1", metavar="PARAM:LO:HI:N", help="first sweep axis")
            sp.add_argument("--axis2", metavar="PARAM:LO:HI:N", help="second sweep axis")
            sp.add_argument("--at-time", dest="at_time", type=float,
                            help="evaluation time when time is not an axis (default 1/(2g))")
            sp.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                            help="parallel trajectory workers")
    return parser


def _load_run_config(args) -> RunConfig:
    pairs = []
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as err:
            raise ConfigError(f"cannot read config file {args.config}: {err}") from None
        pairs.extend(_parse_document(text))
    for raw in args.assignments:
        if "=" not in raw:
            raise ConfigError(f"--set expects KEY=VALUE, got {raw!r}")
        key, value = (part.strip() for part in raw.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"--set: unknown key {key!r}")
        pairs.append((key, "--set", _parse_value(key, value, "--set")))
    if args.cutoff is not None:
        pairs.append(("cutoff", "--cutoff", args.cutoff))
    run_cfg = _build_run_config(pairs)
    if args.out:
        run_cfg = RunConfig(run_cfg.system, run_cfg.integrator, args.out, run_cfg.fmt)
    if args.format:
        run_cfg = RunConfig(run_cfg.system, run_cfg.integrator, run_cfg.out, args.format)
    return run_cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        run_cfg = _load_run_config(args)
        if args.command == "evolve":
            return cmd_evolve(run_cfg)
        if args.command == "steady":
            return cmd_steady(run_cfg, cavity_only=args.cavity_only)
        spec = _sweep_spec_from_args(run_cfg, args)
        return cmd_sweep(run_cfg, spec, workers=args.workers)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except RankDeficientError as err:
        print(f"degenerate steady state: {err}", file=sys.stderr)
        return 4
    except IntegratorError as err:
        print(f"integrator failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
