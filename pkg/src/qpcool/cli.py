"""Command-line runner: scenario orchestration and deterministic emission.

Subcommands
-----------
dispersion   spectrum CSV (mode_index, k_m, eps_k, u1_abs2, v1_abs2)
filter       filter profile CSV (eps, re_F, im_F, abs_F); modulated
             pulses also get the step-limit profile as *_asymptotic.csv
elements     element-table CSV (j, k_index, q_index, family, value)
cool-edge    edge trajectory/steady CSVs; --engine kinetic|gaussian|both;
             with a `betas` axis, a floor CSV of steady-state fidelities
cool-bulk    bulk kinetic trajectory + steady-spectrum CSVs
noise-sweep  steady densities vs gamma/theta^2 over sizes and phases
thermal      Fermi-comparison CSV for the Hermitian-coupling protocol
verify       cross-module consistency report (oracle vs fast paths)

Every run writes a manifest JSON with the resolved parameters.  Exit
codes: 0 success, 2 parse/validation error, 3 engine error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Scenario, parse_config, validate_scenario
from .errors import ParseError, QpcoolError, ValidationError
from .output import write_csv, write_manifest
from .pulses import filter_value, mcp_filter_asymptotic
from .spectrum import diagonalize, gap
from .wick import element_table
from . import gaussian as gauss
from . import kinetics as kin


def _load_scenario(args) -> Scenario:
    if args.config:
        sc = parse_config(Path(args.config).read_text())
    else:
        sc = Scenario()
    if getattr(args, "engine", None):
        sc.engine = args.engine
        validate_scenario(sc)
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    return sc


def _emit_manifest(sc: Scenario, outdir: Path, extra=None):
    payload = sc.to_manifest()
    payload["code_version"] = __version__
    if extra:
        payload.update(extra)
    return write_manifest(outdir / f"{sc.name}_manifest.json", payload)


def _sample_grid(cycles: int, samples: int) -> np.ndarray:
    if samples <= 0 or cycles <= 0:
        return np.arange(cycles + 1)
    pts = np.unique(np.concatenate([
        [0, cycles], np.geomspace(1, cycles, samples).astype(int)]))
    return pts


# --------------------------------------------------------------------------
# subcommand bodies


def run_dispersion(sc: Scenario, outdir: Path) -> list:
    spec = diagonalize(sc.params())
    rows = [
        (k, spec.quasimomenta[k], spec.quasienergies[k],
         abs(spec.bogoliubov_u[0, k]) ** 2, abs(spec.bogoliubov_v[0, k]) ** 2)
        for k in range(spec.n_modes)
    ]
    path = write_csv(outdir / f"{sc.name}_spectrum.csv",
                     ("mode_index", "k_m", "eps_k", "u1_abs2", "v1_abs2"), rows)
    files = [path]
    for n_extra in sc.sweep_n_sites:
        spec2 = diagonalize(sc.params(n_sites=n_extra))
        rows = [
            (k, spec2.quasimomenta[k], spec2.quasienergies[k],
             abs(spec2.bogoliubov_u[0, k]) ** 2, abs(spec2.bogoliubov_v[0, k]) ** 2)
            for k in range(spec2.n_modes)
        ]
        files.append(write_csv(outdir / f"{sc.name}_spectrum_N{n_extra}.csv",
                               ("mode_index", "k_m", "eps_k", "u1_abs2", "v1_abs2"), rows))
    return files


def run_filter(sc: Scenario, outdir: Path) -> list:
    files = []
    grid = np.linspace(-np.pi, np.pi, 2048)
    for ps in sc.pulses:
        pulse = ps.build()
        vals = filter_value(pulse, grid)
        rows = [(e, v.real, v.imag, abs(v)) for e, v in zip(grid, vals)]
        files.append(write_csv(outdir / f"{sc.name}_{ps.label()}_filter.csv",
                               ("eps", "re_F", "im_F", "abs_F"), rows))
        if ps.kind == "mcp":
            asym = mcp_filter_asymptotic(ps.param, grid)
            rows = [(e, v, 0.0, abs(v)) for e, v in zip(grid, asym)]
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_filter_asymptotic.csv",
                ("eps", "re_F", "im_F", "abs_F"), rows))
    return files


_FAMILIES = ("sigma_single_plus", "sigma_single_minus", "sigma_pair_plus",
             "sigma_pair_minus", "sigma_scatter_minus", "z_pair", "z_scatter")


def run_elements(sc: Scenario, outdir: Path) -> list:
    spec = diagonalize(sc.params())
    table = element_table(spec)
    arrays = {
        "sigma_single_plus": table.single_plus,
        "sigma_single_minus": table.single_minus,
        "sigma_pair_plus": table.pair_plus,
        "sigma_pair_minus": table.pair_minus,
        "sigma_scatter_minus": table.scatter_minus,
        "z_pair": table.z_pair,
        "z_scatter": table.z_scatter,
    }
    rows = []
    for fam in _FAMILIES:
        arr = arrays[fam]
        if arr.ndim == 2:
            for j in range(arr.shape[0]):
                for k in range(arr.shape[1]):
                    rows.append((j + 1, k, -1, fam, arr[j, k]))
        else:
            for j in range(arr.shape[0]):
                for k in range(arr.shape[1]):
                    for q in range(arr.shape[2]):
                        if arr[j, k, q] != 0.0:
                            rows.append((j + 1, k, q, fam, arr[j, k, q]))
    path = write_csv(outdir / f"{sc.name}_elements.csv",
                     ("j", "k_index", "q_index", "family", "value"), rows)
    return [path]


def _trajectory_rows(samples, theta, majorana_index):
    rows = []
    for cyc, n in samples:
        st = kin.OccupationState(n=n)
        dens = kin.density(st)
        _, logfid = kin.fidelity(st, majorana_index)
        rows.append((cyc, cyc * theta**2, dens, logfid))
    return rows


def run_cool_edge(sc: Scenario, outdir: Path) -> list:
    spec = diagonalize(sc.params())
    n_edges = 2 if sc.edges == "both" else 1
    files = []
    if sc.betas:
        files.append(_edge_floor_csv(sc, outdir, spec, n_edges))
        return files
    samp = _sample_grid(sc.cycles, sc.samples)
    for ps in sc.pulses:
        pulse = ps.build()
        merged = {}
        if sc.engine in ("kinetic", "both"):
            rates = kin.edge_rates(spec, pulse, sc.theta, edges=n_edges)
            traj = kin.edge_evolve(kin.OccupationState(n=np.full(spec.n_modes, 0.5)),
                                   rates, sc.cycles, sample_cycles=samp)
            rows = _trajectory_rows(traj, sc.theta, spec.majorana_index)
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_trajectory_kinetic.csv",
                ("cycle", "t_rescaled", "density", "log_fidelity_per_qubit"),
                rows, source="kinetic"))
            merged["kinetic"] = rows
            ss = kin.edge_steady_state(rates)
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_steady_kinetic.csv",
                ("mode_index", "eps_k", "n_inf"),
                [(k, spec.quasienergies[k], ss.n[k]) for k in range(spec.n_modes)],
                source="kinetic"))
        if sc.engine in ("gaussian", "both"):
            traj = gauss.run_protocol(sc.params(), pulse, sc.theta, sc.cycles, spec,
                                      edges=sc.edges, sample_cycles=samp)
            samples = list(zip(traj.cycles, traj.occupations))
            rows = _trajectory_rows(samples, sc.theta, spec.majorana_index)
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_trajectory_gaussian.csv",
                ("cycle", "t_rescaled", "density", "log_fidelity_per_qubit"),
                rows, source="gaussian"))
            merged["gaussian"] = rows
            gam = gauss.steady_state_covariance(sc.params(), pulse, sc.theta, sc.edges)
            n_inf = gauss.occupations(gam, spec)
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_steady_gaussian.csv",
                ("mode_index", "eps_k", "n_inf"),
                [(k, spec.quasienergies[k], n_inf[k]) for k in range(spec.n_modes)],
                source="gaussian"))
        if len(merged) == 2:
            rows = [
                (ck, tk, dk, fk, dg, fg)
                for (ck, tk, dk, fk), (_, _, dg, fg) in zip(merged["kinetic"],
                                                            merged["gaussian"])
            ]
            files.append(write_csv(
                outdir / f"{sc.name}_{ps.label()}_trajectory_overlay.csv",
                ("cycle", "t_rescaled", "density_kinetic", "logfid_kinetic",
                 "density_gaussian", "logfid_gaussian"), rows, source="both"))
    return files


def _edge_floor_csv(sc: Scenario, outdir: Path, spec, n_edges):
    """Steady-state log-infidelity vs beta for pulses at T = t_over_beta * beta."""
    from .pulses import make_mcp, make_scp

    rows = []
    for beta in sc.betas:
        T = int(round(sc.t_over_beta * beta))
        for kind in ("mcp", "scp"):
            pulse = make_mcp(T, float(beta)) if kind == "mcp" else make_scp(T, 0.3)
            rates = kin.edge_rates(spec, pulse, sc.theta, edges=n_edges)
            ss = kin.edge_steady_state(rates)
            _, logfid = kin.fidelity(ss, spec.majorana_index)
            logfid_g = ""
            if sc.engine in ("gaussian", "both"):
                gam = gauss.steady_state_covariance(sc.params(), pulse, 0.001, sc.edges)
                n_inf = gauss.occupations(gam, spec)
                _, logfid_g = kin.fidelity(kin.OccupationState(n=n_inf),
                                           spec.majorana_index)
            rows.append((beta, T, kind, logfid, logfid_g))
    return write_csv(outdir / f"{sc.name}_floor.csv",
                     ("beta", "T", "pulse", "logfid_kinetic", "logfid_gaussian"), rows)


def run_cool_bulk(sc: Scenario, outdir: Path) -> list:
    spec = diagonalize(sc.params())
    table = element_table(spec)
    noise = kin.NoiseParams(gamma_d=sc.gamma_d, gamma_phi=sc.gamma_phi)
    files = []
    samp = _sample_grid(sc.cycles, sc.samples)
    for ps in sc.pulses:
        pulse = ps.build()
        rates = kin.bulk_rates(spec, pulse, sc.theta, table)
        if sc.gamma_d or sc.gamma_phi:
            rates = kin.noisy_rates(rates, table, noise, pulse.T)
        state = kin.OccupationState(n=np.full(spec.n_modes, 0.5))
        traj = kin.evolve(state, rates, sc.cycles, sample_cycles=samp)
        rows = _trajectory_rows(traj, sc.theta, spec.majorana_index)
        files.append(write_csv(
            outdir / f"{sc.name}_{ps.label()}_trajectory_kinetic.csv",
            ("cycle", "t_rescaled", "density", "log_fidelity_per_qubit"),
            rows, source="kinetic"))
        ss = kin.steady_state(rates)
        files.append(write_csv(
            outdir / f"{sc.name}_{ps.label()}_steady_kinetic.csv",
            ("mode_index", "eps_k", "n_inf"),
            [(k, spec.quasienergies[k], ss.n[k]) for k in range(spec.n_modes)],
            source="kinetic"))
    return files


def _sweep_unit(args):
    """One (phase point, size) column of the noise sweep; worker-safe."""
    from .pulses import make_mcp, make_scp

    (j_, g_, n_sites, pulse_desc, theta, grid, betas, t_over_beta) = args
    from .spectrum import ModelParams

    spec = diagonalize(ModelParams(j_, g_, n_sites))
    table = element_table(spec)
    kind, T0, param = pulse_desc
    pulse = make_mcp(T0, param) if kind == "mcp" else make_scp(T0, param)
    base = kin.bulk_rates(spec, pulse, theta, table)
    rows = []
    opt_rows = []
    for gr in grid:
        gamma = gr * theta**2
        noise = kin.NoiseParams(gamma_d=gamma, gamma_phi=gamma)
        ss = kin.steady_state(kin.noisy_rates(base, table, noise, pulse.T))
        n_inf = kin.density(ss, exclude_majorana=True,
                            majorana_index=spec.majorana_index)
        _, logfid = kin.fidelity(ss, spec.majorana_index)
        rows.append((gr, n_sites, spec.params.phase, n_inf, logfid))
        for pkind in ("mcp", "scp") if betas else ():
            # per-point optimization over beta at T = t_over_beta * beta
            best = (None, np.inf)
            for beta in betas:
                T = int(round(t_over_beta * beta))
                p2 = make_mcp(T, float(beta)) if pkind == "mcp" else make_scp(T, 0.3)
                r2 = kin.noisy_rates(kin.bulk_rates(spec, p2, theta, table),
                                     table, noise, T)
                _, lf = kin.fidelity(kin.steady_state(r2), spec.majorana_index)
                if lf < best[1]:
                    best = (beta, lf)
            opt_rows.append((gr, n_sites, spec.params.phase, pkind,
                             best[0], best[1]))
    return rows, opt_rows


def run_noise_sweep(sc: Scenario, outdir: Path, jobs: int = 1) -> list:
    from .config import _STANDARD_POINTS

    phases = sc.sweep_phases or [("pm" if sc.params().phase == "PM" else "afm")]
    sizes = sc.sweep_n_sites or [sc.n_sites]
    grid = sc.sweep_gamma_over_theta2 or list(np.geomspace(1e-6, 1e-1, 11))
    ps = sc.pulses[0]
    units = []
    for phase in phases:
        j_, g_ = _STANDARD_POINTS[phase] if phase in _STANDARD_POINTS \
            else (sc.J, sc.g)
        for n_sites in sizes:
            units.append((j_, g_, n_sites, (ps.kind, ps.T, ps.param), sc.theta,
                          list(grid), list(sc.betas), sc.t_over_beta))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_unit, units))
    else:
        results = [_sweep_unit(u) for u in units]

    rows = [r for unit_rows, _ in results for r in unit_rows]
    opt_rows = [r for _, unit_opt in results for r in unit_opt]
    files = [write_csv(outdir / f"{sc.name}_sweep.csv",
                       ("gamma_over_theta2", "N_S", "phase", "n_inf",
                        "log_fidelity_per_qubit"), rows)]
    if opt_rows:
        files.append(write_csv(
            outdir / f"{sc.name}_sweep_optimized.csv",
            ("gamma_over_theta2", "N_S", "phase", "pulse", "best_beta",
             "log_fidelity_per_qubit"), opt_rows))
    return files


def run_thermal(sc: Scenario, outdir: Path) -> list:
    from .pulses import make_mcp

    spec = diagonalize(sc.params())
    table = element_table(spec)
    betas = sc.betas or [4.0, 8.0, 12.0]
    rows = []
    for beta in betas:
        T = int(round(5 * beta))
        pulse = make_mcp(T, float(beta))
        rates = kin.hermitian_z_rates(spec, pulse, sc.theta, table)
        ss = kin.steady_state(rates)
        fermi = kin.gibbs_target(spec, 1.0 / (2.0 * beta))
        for k in range(spec.n_modes):
            rows.append((beta, k, spec.quasienergies[k], ss.n[k], fermi.n[k]))
    path = write_csv(outdir / f"{sc.name}_thermal.csv",
                     ("beta", "mode_index", "eps_k", "n_inf", "n_fermi"), rows)
    return [path]


# --------------------------------------------------------------------------
# verify


def run_verify(perturb_jw: bool = False, out=sys.stdout) -> bool:
    """Cross-module consistency checks with pass/fail lines."""
    from .oracle import DenseChannel, eigenstate_matrix_elements, ptrace
    from .pulses import make_mcp, make_scp
    from .spectrum import ModelParams

    checks = []

    def report(name, dev, tol):
        ok = dev <= tol
        checks.append(ok)
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}: max deviation {dev:.3e} (tol {tol:.0e})\n")

    # elements vs dense oracle
    for (j_, g_, label) in ((0.1, 0.2, "PM"), (0.2, 0.1, "AFM")):
        par = ModelParams(j_, g_, 4)
        spec = diagonalize(par)
        table = element_table(spec)
        if perturb_jw:
            from .oracle import DenseModes
            import qpcool.oracle as orc
            dm = DenseModes(spec, jw_sign_flip=True)
            dev = 0.0
            for jj in range(1, 5):
                op = orc.sigma_minus_site(jj, 4)
                for k in range(4):
                    val = abs(np.vdot(dm.vacuum, op @ dm.state([k]))) ** 2
                    dev = max(dev, abs(val - table.single_minus[jj - 1, k]))
        else:
            dev = float(np.max(np.abs(
                table.single_minus - eigenstate_matrix_elements(spec, "single_minus"))))
            for fam, arr in (("single_plus", table.single_plus),
                             ("z_pair", table.z_pair)):
                dev = max(dev, float(np.max(np.abs(
                    arr - eigenstate_matrix_elements(spec, fam)))))
            if label == "AFM":
                dev = max(dev, float(np.max(np.abs(
                    table.pair_minus - eigenstate_matrix_elements(spec, "pair_minus")))))
        report(f"wick-vs-oracle elements ({label}, N=4)", dev, 1e-8)

    # gaussian channel vs dense channel
    par = ModelParams(0.15, 0.3, 3)
    spec = diagonalize(par)
    pulse = make_mcp(6, 3.0)
    ch = DenseChannel(par, pulse, 0.1, layout="edge", edges="both",
                      jw_sign_flip=perturb_jw)
    lay = gauss.EdgeLayout(3, "both")
    kc = gauss.cycle_matrix(par, pulse, 0.1, "both")
    gam = gauss.init_covariance(3, "both")
    rho = np.eye(8, dtype=complex) / 8
    dev = 0.0
    for _ in range(30):
        rho = ptrace(ch.cycle_rho_full(rho), ch.system_sites, ch.n_qubits)
        gam = gauss.reset(kc @ gam @ kc.T, lay)
        dev = max(dev, float(np.max(np.abs(gam - ch.covariance(ch.embed_system(rho))))))
    report("gaussian-vs-oracle covariance (N=3, 30 cycles)", dev, 1e-10)

    # kinetics vs gaussian: edge steady state
    par = ModelParams(0.1, 0.2, 8)
    spec = diagonalize(par)
    pulse = make_mcp(12, 4.0)
    rates = kin.edge_rates(spec, pulse, 0.001, edges=2)
    nk = kin.edge_steady_state(rates).n
    ng = gauss.occupations(gauss.steady_state_covariance(par, pulse, 0.001, "both"), spec)
    report("kinetics-vs-gaussian steady state (N=8)", float(np.max(np.abs(nk - ng))), 1e-3)

    # filter closed form
    rng = np.random.default_rng(0)
    dev = 0.0
    from .pulses import scp_filter_closed_form
    for _ in range(200):
        T = int(rng.integers(1, 100))
        h = float(rng.uniform(-1, 1))
        e = float(rng.uniform(-np.pi, np.pi))
        p = make_scp(T, h)
        dev = max(dev, abs(abs(complex(filter_value(p, e)))
                           - abs(float(scp_filter_closed_form(T, h, e)))))
    report("scp filter closed form (200 random triples)", dev, 1e-12)

    ok = all(checks)
    out.write(("all checks passed\n" if ok else "FAILURES present\n"))
    return ok


# --------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qpcool", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, default=None, help="scenario config path")
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--seed", type=int, default=None, help="tie-breaking seed")

    for name in ("dispersion", "filter", "elements", "cool-bulk", "noise-sweep"):
        p = sub.add_parser(name)
        add_common(p)
    p = sub.add_parser("thermal")
    add_common(p)
    p.add_argument("--beta", type=float, nargs="+", default=None,
                   help="broadening values; overrides the config's betas")
    p = sub.add_parser("cool-edge")
    add_common(p)
    p.add_argument("--engine", choices=("kinetic", "gaussian", "both"), default=None)
    p = sub.add_parser("verify")
    p.add_argument("--perturb-jw", action="store_true", help=argparse.SUPPRESS)

    args = parser.parse_args(argv)

    try:
        if args.command == "verify":
            return 0 if run_verify(perturb_jw=args.perturb_jw) else 3
        sc = _load_scenario(args)
        if getattr(args, "beta", None):
            sc.betas = list(args.beta)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        runner = {
            "dispersion": run_dispersion,
            "filter": run_filter,
            "elements": run_elements,
            "cool-edge": run_cool_edge,
            "cool-bulk": run_cool_bulk,
            "thermal": run_thermal,
        }
        if args.command == "noise-sweep":
            files = run_noise_sweep(sc, outdir, jobs=args.jobs)
        else:
            files = runner[args.command](sc, outdir)
        _emit_manifest(sc, outdir, extra={"command": args.command,
                                          "files": [Path(f).name for f in files]})
        return 0
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QpcoolError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
