"""Command-line driver: ``gsg <subcommand> --config FILE --out DIR``.

Each subcommand writes long-format CSV files plus a JSON summary into the
output directory and finishes with ``manifest.json``.  Failures print a
one-line JSON object ``{"error_class": ..., "message": ...}`` on stderr and
exit with 2 (configuration), 3 (numerical) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config, to_dict
from .emit import Emitter
from .entanglement import (
    branch_distances,
    casimir_polder_ratio,
    entanglement_entropy,
    joint_state,
    negativity,
    phase_matrix,
    pure_negativity,
    sphere_radius,
)
from .errors import GsgError
from .gsg_dynamics import (
    GsgParams,
    branch_trajectories,
    density_peaks,
    fock_oracle_evolve,
    position_density,
    superposition_extent,
)
from .optimizer import (
    FAMILIES,
    optimize,
    partner_state,
    ridge_width,
    sweep_decoherence,
    sweep_spin,
    sweep_theta_surface,
    sweep_time,
    table_values,
)
from .spin_states import SpinState, coherent_spin_state, husimi_q, m_values

SUBCOMMANDS = ("evolve", "husimi", "entangle", "optimize", "sweep", "decohere", "oracle-check", "tables")
ORACLE_TOL = 1e-6

UNITS = {
    "theta": "rad", "theta_A": "rad", "theta_B": "rad", "delta_theta": "rad", "delta_phi": "rad",
    "tau": "s", "entropy": "nats",
}


def _col(name, rate_unit=None):
    if name == "rate":
        return f"rate_{rate_unit}"
    base = name[:-4] if name.endswith("_opt") else name
    unit = UNITS.get(base)
    return f"{name}_{unit}" if unit else name


def _jtag(j):
    return f"j{j:g}"


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    outputs: list  # [{"path", "sha256"}]
    tool_version: str
    wall_time_s: float
    distance_mode: str
    summary: dict


def single_state(cfg: RunConfig) -> SpinState:
    """Mass-A state for the point subcommands: family parameters taken from the config."""
    fam, run = cfg.family, cfg.run
    theta = math.pi / 2 if fam.theta is None else fam.theta
    point = {"theta": theta, "chi": run.chi, "delta_theta": run.delta_theta_rad, "delta_phi": run.delta_phi_rad}
    return fam.state(cfg.experiment.j, point)


def _trap(cfg: RunConfig, k=None) -> GsgParams:
    run = cfg.run
    return GsgParams.from_k(run.trap_mass_kg, run.trap_omega_rad_per_s,
                            run.coupling_k if k is None else k, run.lande_g)


def run_evolve(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    state = single_state(cfg)
    params = _trap(cfg)
    dx, extent = superposition_extent(params, state.j)
    half = extent / 2 + 6 * params.sigma_x
    x = np.linspace(-half, half, cfg.run.n_x)
    times = [f * params.t_split for f in cfg.run.t_over_ts]
    dens_rows, traj_rows = [], []
    for t in times:
        p = position_density(state, params, t, x)
        dens_rows.extend((t, xi, pi) for xi, pi in zip(x, p))
        tr = branch_trajectories(params, state.j, t)
        traj_rows.extend(zip([t] * state.dim, tr.m, tr.x, tr.p, tr.phase))
    em.csv("evolve_density.csv", ["t_s", "x_m", "density_per_m"], dens_rows)
    em.csv("evolve_trajectories.csv", ["t_s", "m", "x_m", "p_kg_m_per_s", "phase_rad"], traj_rows)
    p_split = position_density(state, params, params.t_split, x)
    peaks = density_peaks(p_split)
    spacing = float(np.mean(np.diff(x[peaks]))) if peaks.size > 1 else float("nan")
    summary = dict(
        j=state.j, k=params.k, t_split_s=params.t_split, sigma_x_m=params.sigma_x,
        delta_x_m=dx, total_extent_m=extent, grid_cell_m=float(x[1] - x[0]),
        peak_count_at_t_split=int(peaks.size), peak_positions_m=x[peaks], mean_peak_spacing_m=spacing,
    )
    em.summary("evolve_summary.json", summary)
    return summary


def run_husimi(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    state = single_state(cfg)
    hq = husimi_q(state, cfg.run.n_theta, cfg.run.n_phi)
    rows = ((t, p, hq.q[a, b]) for a, t in enumerate(hq.theta) for b, p in enumerate(hq.phi))
    em.csv("husimi_q.csv", ["theta_rad", "phi_rad", "q"], rows)
    a, b = np.unravel_index(int(np.argmax(hq.q)), hq.q.shape)
    summary = dict(j=state.j, normalization=hq.normalization(), q_max=float(hq.q[a, b]),
                   argmax_theta_rad=float(hq.theta[a]), argmax_phi_rad=float(hq.phi[b]),
                   amplitudes_re=state.amplitudes.real, amplitudes_im=state.amplitudes.imag)
    em.summary("husimi_summary.json", summary)
    return summary


def run_entangle(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    exp = cfg.experiment
    a = single_state(cfg)
    b = partner_state(a, exp.geometry)
    phases = phase_matrix(exp)
    dist = branch_distances(exp)
    psi = joint_state(a, b, phases, exp.k)
    rho = cfg.decoherence.apply(psi.density_matrix())
    report = negativity(rho)
    m = m_values(exp.j)
    em.csv("entangle_phases.csv", ["m_a", "m_b", "distance_m", "phase_rad"],
           ((m[i], m[k], dist[i, k], phases[i, k]) for i in range(exp.dim) for k in range(exp.dim)))
    coeffs = report.gellmann_coefficients()
    em.csv("entangle_witness_gellmann.csv", ["index_a", "index_b", "coefficient"],
           ((i, k, coeffs[i, k]) for i in range(coeffs.shape[0]) for k in range(coeffs.shape[1])
            if abs(coeffs[i, k]) > 1e-14))
    run = cfg.run
    radius = sphere_radius(exp.mass_a, run.sphere_density_kg_per_m3)
    cp = casimir_polder_ratio(radius, run.sphere_permittivity, exp.delta_s, exp.mass_a, exp.mass_b)
    summary = dict(
        entropy_nats=entanglement_entropy(psi), pure_negativity=pure_negativity(psi),
        negativity=report.negativity, negative_eigenvalues=report.negative_eigenvalues,
        witness_expectation=report.expectation(rho), schmidt_coefficients=psi.schmidt_coefficients(),
        decohered=bool(cfg.decoherence.gamma_short or cfg.decoherence.gamma_long),
        casimir_polder=dict(sphere_radius_m=radius, separation_m=exp.delta_s, v_cp_j=cp.v_cp,
                            v_grav_j=cp.v_grav, grav_over_cp=cp.ratio, warning=cp.warning),
    )
    em.summary("entangle_summary.json", summary)
    return summary


def _decoherence_or_none(cfg):
    d = cfg.decoherence
    return d if (d.gamma_short or d.gamma_long) else None


def run_optimize(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    run = cfg.run
    res = optimize(cfg.family, cfg.experiment, run.objective, run.grid_n, run.refine,
                   _decoherence_or_none(cfg), threads)
    em.csv("optimize_grid.csv", [_col(h) for h in res.header()], res.rows())
    summary = dict(family=res.family, objective=res.objective, optimum=res.optimum,
                   optimum_value=res.optimum_value,
                   grid_n=res.metadata["grid_n"], refine=res.metadata["refine"])
    em.summary("optimize_summary.json", summary)
    return summary


def run_sweep(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    exp, run, fam = cfg.experiment, cfg.run, cfg.family
    summary = {"theta_surface": {}, "family_grid": {}}
    # (theta_A, theta_B) surfaces for coherent states, one file per spin
    for j in run.j_list:
        surf = sweep_theta_surface(exp.with_(j=j), run.surface_grid_n, run.objective, threads)
        em.csv(f"sweep_theta_surface_{_jtag(j)}.csv", [_col(h) for h in surf.header()], surf.rows())
        entry = dict(optimum=surf.optimum, optimum_value=surf.optimum_value)
        if run.objective == "entropy" and exp.geometry == "parallel":
            entry["ridge_fwhm_rad"] = ridge_width(surf)
        summary["theta_surface"][_jtag(j)] = entry
    # objective over the family's own free parameters, symmetry-reduced
    rows, header = [], None
    for j in run.j_list:
        res = optimize(fam, exp.with_(j=j), run.objective, run.surface_grid_n, True, None, threads)
        header = ["j"] + [_col(h) for h in res.header()]
        rows.extend([j] + r for r in res.rows())
        summary["family_grid"][_jtag(j)] = dict(optimum=res.optimum, optimum_value=res.optimum_value)
    em.csv("sweep_family_grid.csv", header, rows)
    # interaction-time dependence with the optimum re-located at every tau
    taus = run.tau_grid_s if run.tau_grid_s is not None else tuple(np.linspace(0.0, exp.tau, 21))
    rows, summary["time"] = [], {}
    for j in run.j_list:
        res = sweep_time(fam, exp.with_(j=j), taus, run.objective, run.grid_n, threads)
        header = ["j"] + [_col(h) for h in res.header()]
        rows.extend([j] + r for r in res.rows())
        summary["time"][_jtag(j)] = dict(final=float(res.values[-1]))
    em.csv("sweep_time.csv", header, rows)
    res = sweep_spin(fam, exp, run.j_list, run.objective, run.grid_n, threads)
    em.csv("sweep_spin.csv", [_col(h) for h in res.header()], res.rows())
    summary["spin"] = dict(values=res.values, asymptote=res.metadata["asymptote"])
    em.summary("sweep_summary.json", summary)
    return summary


def run_decohere(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    exp, run = cfg.experiment, cfg.run
    summary = {}
    for limit, grid, unit in (("short", run.short_rate_grid_hz, "hz"),
                              ("long", run.long_rate_grid_hz_per_m2, "hz_per_m2")):
        res = sweep_decoherence(exp, grid, limit, run.j_list, cfg.family, run.decoherence_grid_n, threads)
        em.csv(f"decohere_{limit}.csv", [_col(h, unit) for h in res.header()], res.rows())
        vals = res.values
        lo, hi = int(np.argmin(res.axes["j"])), int(np.argmax(res.axes["j"]))
        crossing = [float(r) for r, a, b in zip(res.axes["rate"], vals[lo], vals[hi]) if a < b]
        summary[limit] = dict(
            j=res.axes["j"], rate=res.axes["rate"], negativity=vals, extras=res.extras,
            ordering_preserved=bool(np.all(np.diff(vals, axis=0) <= 1e-12)),
            smallest_j_beats_largest_at=crossing[0] if crossing else None,
        )
    em.summary("decohere_summary.json", summary)
    return summary


def run_oracle_check(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    run = cfg.run
    rows = []
    for j in run.oracle_j_list:
        state = coherent_spin_state(j, math.pi / 2)
        for k in run.oracle_k_list:
            params = _trap(cfg, k)
            for f in run.oracle_t_over_ts:
                r = fock_oracle_evolve(state, params, f * params.t_split)
                rows.append((j, k, f, r.fidelity, r.norm, float(np.nanmin(r.vacuum_overlap)),
                             r.top_occupancy, r.joint.shape[1]))
    em.csv("oracle_check.csv", ["j", "k", "t_over_ts", "fidelity", "norm", "vacuum_overlap_min",
                                "top_occupancy", "n_fock"], rows)
    fid = min(r[3] for r in rows)
    closure = [r[5] for r in rows if r[2] > 0 and float(r[2]) % 2 == 0]
    summary = dict(min_fidelity=fid, fidelity_pass=fid >= 1 - ORACLE_TOL,
                   min_closure_vacuum_overlap=min(closure) if closure else None,
                   closure_pass=all(c >= 1 - ORACLE_TOL for c in closure), tolerance=ORACLE_TOL)
    em.summary("oracle_check_summary.json", summary)
    return summary


def run_tables(cfg: RunConfig, em: Emitter, threads=1) -> dict:
    js = cfg.run.j_list
    summary = {"geometry": "parallel", "j": js}
    for objective, name, col in (("entropy", "table_entropy.csv", "entropy_nats"),
                                 ("negativity", "table_negativity.csv", "negativity")):
        table = table_values(cfg.experiment, FAMILIES, js, objective, threads)
        em.csv(name, ["family", "j", col], ((fam, j, v) for fam in FAMILIES for j, v in zip(js, table[fam])))
        summary[objective] = table
    em.summary("tables_summary.json", summary)
    return summary


RUNNERS = {
    "evolve": run_evolve, "husimi": run_husimi, "entangle": run_entangle, "optimize": run_optimize,
    "sweep": run_sweep, "decohere": run_decohere, "oracle-check": run_oracle_check, "tables": run_tables,
}

HELP = {
    "evolve": "branch trajectories and position density of one interferometer",
    "husimi": "Husimi-Q map of the configured spin state",
    "entangle": "phases, entropy, negativity and witness for one state pair",
    "optimize": "optimize the configured family at one spin",
    "sweep": "theta surfaces, family grids, time and spin dependence",
    "decohere": "optimal negativity against short and long wavelength rates",
    "oracle-check": "closed-form dynamics against a truncated Fock evolution",
    "tables": "optimized entropy and negativity for every family and spin",
}


def run_subcommand(name: str, cfg: RunConfig, out_dir, threads=1) -> RunManifest:
    if name not in RUNNERS:
        raise GsgError(f"unknown subcommand {name!r}; expected one of {list(SUBCOMMANDS)}")
    start = time.perf_counter()
    snapshot = to_dict(cfg)
    em = Emitter(Path(out_dir), snapshot=snapshot)
    summary = RUNNERS[name](cfg, em, threads)
    wall = time.perf_counter() - start
    body = em.manifest(subcommand=name, config=snapshot, tool_version=__version__, wall_time_s=wall,
                       distance_mode=cfg.experiment.distance_mode)
    return RunManifest(name, snapshot, body["outputs"], __version__, wall, cfg.experiment.distance_mode, summary)


class UsageError(GsgError):
    error_class = "usage-error"
    exit_code = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gsg", description="Gravity-induced entanglement of spin-split masses.")
    parser.add_argument("--version", action="version", version=f"gsg {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--preset", help="named parameter preset, e.g. paper-2017-screened")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
        p.add_argument("--seed", type=int, default=None, help="reserved; every path is deterministic")
    return parser


def _fail(exc: GsgError) -> int:
    sys.stderr.write(json.dumps({"error_class": exc.error_class, "message": str(exc)}) + "\n")
    return exc.exit_code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        cfg = parse_config(args.config, preset=args.preset)
        manifest = run_subcommand(args.subcommand, cfg, args.out, args.threads)
    except GsgError as exc:
        return _fail(exc)
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(json.dumps({"error_class": "eigensolver", "message": str(exc)}) + "\n")
        return 3
    print(json.dumps({"subcommand": manifest.subcommand, "outputs": [o["path"] for o in manifest.outputs],
                      "wall_time_s": round(manifest.wall_time_s, 3)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
