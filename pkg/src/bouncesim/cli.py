"""Command-line front end: ``bounce-sim <subcommand>``.

Subcommands
-----------
fields
    Solve the qubit-state-conditioned classical fields for the configured
    pulse and write the input/intracavity/output envelopes as a table.
compensate
    Synthesize the weak-port compensation pulse for a parity pair and report
    the residual matching cost.
me-sweep
    Unconditioned master-equation amplitude sweep; writes final coherences
    and populations per amplitude.
sme-run
    Stochastic-trajectory ensemble at the configured pulse; writes the
    integrated measurement outcomes and the ensemble-mean state.
tomo
    Simulate and reconstruct tomography of a density matrix read from a
    table; reports the reconstruction and trace distance to the input.
measures
    Entanglement measures of a density matrix read from a table.
full
    Full experiment sweep (fields -> compensation -> trajectories ->
    classification -> post-selection -> measures) emitting figure tables.

Density-matrix tables are plain-text 4x4 complex matrices in
``numpy.savetxt`` format.  Exit status is 0 on success; any error prints a
one-line diagnostic to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import compensation, fields, harness, master_eq, measures, sme, tomography
from .params import default_config, load_config


def _load(args):
    source = args.config if args.config else default_config()
    return load_config(source)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_rho(path: Path, rho: np.ndarray):
    np.savetxt(path, rho, fmt="%.12e")


def _load_rho(path: str) -> np.ndarray:
    rho = np.loadtxt(path, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix in {path}, got {rho.shape}")
    return rho


def _cmd_fields(args):
    p, grid, pulses = _load(args)
    sol = fields.solve_fields_fourier(pulses, p)
    out = _out_dir(args)
    cols = [grid.times]
    header = ["time_s"]
    for name, arr in (("alpha", sol.alpha), ("z", sol.z)):
        for i in range(2):
            cols += [arr[i].real, arr[i].imag]
            header += [f"{name}{i}_re", f"{name}{i}_im"]
    for name, arr in (("beta", sol.beta), ("y", sol.y)):
        for i in range(2):
            for j in range(2):
                cols += [arr[i, j].real, arr[i, j].imag]
                header += [f"{name}{i}{j}_re", f"{name}{i}{j}_im"]
    np.savetxt(
        out / "fields.csv", np.column_stack(cols), delimiter=",",
        header=",".join(header), comments="",
    )
    power = fields.integrated_output_power(sol)
    print(
        f"fields written to {out / 'fields.csv'}; "
        f"max photon numbers chip1 {power['n_alpha_max'].max():.3g}, "
        f"chip2 {power['n_beta_max'].max():.3g}"
    )


def _pair(name: str):
    return {"odd": compensation.ODD_PAIR, "even": compensation.EVEN_PAIR}[name]


def _cmd_compensate(args):
    p, grid, pulses = _load(args)
    pair = _pair(args.pair)
    eps_w = compensation.synthesize_compensation(
        pulses.eps_s, p, pair, grid=grid
    )
    sol = fields.solve_fields_fourier(pulses.with_weak(eps_w), p)
    cost = compensation.matching_cost(sol, pair)
    out = _out_dir(args)
    np.savetxt(
        out / "compensation.csv",
        np.column_stack(
            [grid.times, pulses.eps_s.real, pulses.eps_s.imag,
             eps_w.real, eps_w.imag]
        ),
        delimiter=",",
        header="time_s,eps_s_re,eps_s_im,eps_w_re,eps_w_im",
        comments="",
    )
    print(
        f"{args.pair} compensation written to {out / 'compensation.csv'}; "
        f"relative matching cost {cost:.3e}"
    )


def _cmd_me_sweep(args):
    p, grid, pulses = _load(args)
    amplitudes = np.asarray(args.amplitudes, dtype=float)
    data = master_eq.dephasing_sweep(
        amplitudes, p, args.mode, grid,
        plateau=pulses.plateau, rise=pulses.rise,
    )
    out = _out_dir(args)
    cols = [amplitudes]
    header = ["amplitude"]
    for m, (a, b) in enumerate(master_eq.COHERENCE_PAIRS):
        cols += [data.coherences[:, m].real, data.coherences[:, m].imag]
        header += [f"rho{a}{b}_re", f"rho{a}{b}_im"]
    for k in range(4):
        cols.append(data.populations[:, k])
        header.append(f"pop{k}")
    np.savetxt(
        out / "me_sweep.csv", np.column_stack(cols), delimiter=",",
        header=",".join(header), comments="",
    )
    print(f"sweep over {amplitudes.size} amplitudes -> {out / 'me_sweep.csv'}")


def _cmd_sme_run(args):
    p, grid, pulses = _load(args)
    sol = fields.solve_fields_fourier(pulses, p)
    theta = p.theta if p.theta is not None else sme.optimal_readout_angle(sol)
    ensemble = sme.sme_ensemble(
        master_eq.PLUS_PLUS, sol, p, args.n_traj, seed=args.seed, theta=theta
    )
    weights = sme.integration_weights(sol, theta=theta)
    outcomes = sme.integrate_record(ensemble.records, weights, grid.dt)
    out = _out_dir(args)
    np.savetxt(
        out / "outcomes.csv",
        np.column_stack([outcomes.real, outcomes.imag]),
        delimiter=",", header="outcome_re,outcome_im", comments="",
    )
    rho_mean = ensemble.rho_final.mean(axis=0)
    _save_rho(out / "rho_mean.txt", rho_mean / np.trace(rho_mean).real)
    print(
        f"{args.n_traj} trajectories -> {out / 'outcomes.csv'}; "
        f"theta = {theta:.4f} rad"
    )


def _cmd_tomo(args):
    rho = _load_rho(args.rho)
    re = tomography.ResidualExcitation(args.residual_q1, args.residual_q2)
    dataset = tomography.simulate_tomography(
        rho, shots=args.shots, re=re, seed=args.seed
    )
    correction = re if args.correct else None
    rho_hat = tomography.reconstruct(dataset, correction=correction)
    out = _out_dir(args)
    _save_rho(out / "rho_reconstructed.txt", rho_hat)
    dist = 0.5 * np.abs(np.linalg.eigvalsh(rho_hat - rho)).sum()
    print(
        f"reconstruction -> {out / 'rho_reconstructed.txt'}; "
        f"trace distance to input {dist:.3e}"
    )


def _cmd_measures(args):
    rho = _load_rho(args.rho)
    report = measures.entanglement_report(
        rho, parity=args.parity, fraction_kept=args.fraction,
        rep_rate=args.rep_rate,
    )
    print(
        f"C={report.concurrence:.4f} F_B={report.bell_fidelity:.4f} "
        f"(phase {report.best_bell_phase:.4f} rad) E_N={report.log_negativity:.4f} "
        f"ebit_rate={report.ebit_rate:.1f}/s"
    )


def _cmd_full(args):
    p, grid, pulses = _load(args)
    plan = harness.ExperimentPlan(
        amplitudes=tuple(args.amplitudes),
        fractions=tuple(args.fractions),
        mode=args.mode,
        n_trajectories=args.n_traj,
        seed=args.seed,
        plateau=pulses.plateau,
        rise=pulses.rise,
        ring_down=harness.PROTOCOL_DURATION - pulses.plateau - 2 * pulses.rise,
        dt=grid.dt,
    )
    bundle = harness.run_full(plan, p)
    files = harness.emit_tables(bundle, _out_dir(args))
    for f in files:
        print(f"wrote {f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bounce-sim",
        description="Cascaded two-chip entanglement-by-measurement simulator",
    )
    parser.add_argument("--config", help="YAML configuration path")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--out", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fields", help="solve conditioned classical fields")

    c = sub.add_parser("compensate", help="synthesize a compensation pulse")
    c.add_argument("--pair", choices=("odd", "even"), default="odd")

    c = sub.add_parser("me-sweep", help="master-equation amplitude sweep")
    c.add_argument("--amplitudes", type=float, nargs="+", required=True)
    c.add_argument("--mode", choices=("none", "odd", "even"), default="odd")

    c = sub.add_parser("sme-run", help="stochastic-trajectory ensemble")
    c.add_argument("--n-traj", type=int, default=1000)

    c = sub.add_parser("tomo", help="simulate and reconstruct tomography")
    c.add_argument("--rho", required=True, help="4x4 density-matrix table")
    c.add_argument("--shots", type=int, default=None)
    c.add_argument("--residual-q1", type=float, default=0.0)
    c.add_argument("--residual-q2", type=float, default=0.0)
    c.add_argument(
        "--correct", action="store_true",
        help="apply residual-excitation correction in reconstruction",
    )

    c = sub.add_parser("measures", help="entanglement measures of a state")
    c.add_argument("--rho", required=True, help="4x4 density-matrix table")
    c.add_argument("--parity", choices=("odd", "even"), default="odd")
    c.add_argument("--fraction", type=float, default=1.0)
    c.add_argument("--rep-rate", type=float, default=10e3)

    c = sub.add_parser("full", help="full experiment sweep with tables")
    c.add_argument("--amplitudes", type=float, nargs="+", required=True)
    c.add_argument(
        "--fractions", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0]
    )
    c.add_argument("--mode", choices=("none", "odd", "even"), default="odd")
    c.add_argument("--n-traj", type=int, default=4000)
    return parser


_HANDLERS = {
    "fields": _cmd_fields,
    "compensate": _cmd_compensate,
    "me-sweep": _cmd_me_sweep,
    "sme-run": _cmd_sme_run,
    "tomo": _cmd_tomo,
    "measures": _cmd_measures,
    "full": _cmd_full,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _HANDLERS[args.command](args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"bounce-sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
