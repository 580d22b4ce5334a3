"""Command-line interface.

Subcommands: eig, veff, twostate, fluct, sample, canonical. Each reads a
single JSON configuration file (unknown keys rejected), computes first and
writes data files only on success. Exit codes: 0 success, 1 validation
failure, 2 configuration error, 3 solver error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import constrain, sampling, thermal, twostate
from .constrain import CSV_SCHEMA_HEADER
from .errors import (
    ConfigurationError,
    SolverError,
    UsageError,
    ValidationFailure,
    WfGibbsError,
)
from .lattice import GridSpec, ModelParams
from .spectra import lowest_eigenpairs, parity_of
from .lattice import assemble_hamiltonian

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_TOP_KEYS = {"model", "grid", "seed", "output",
             "eig", "veff", "twostate", "fluct", "sample", "canonical"}

_SECTION_DEFAULTS = {
    "eig": {"k": 4, "tol": 1e-10},
    "veff": {"masses": None, "n_q": 81, "frac": 0.995},
    "twostate": {"masses": None, "n_q": 201},
    "fluct": {"masses": None, "t_min": 1e-2, "t_max": 1e2, "n_t": 60, "n_q": 161},
    "sample": {"n_basis": 24, "beta": 2.0, "chains": 4, "steps_per_chain": 50_000,
               "burn_in": 5_000, "proposal_scale": 0.3, "keep_coefficients": False,
               "validate": "none", "tolerance_se": 3.0, "tv_tolerance": 0.05},
    "canonical": {"beta": 1.0, "k_max": 16},
}


def _reject_unknown(d: dict, allowed, where: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "model" not in raw:
        raise ConfigurationError("config requires a 'model' section")
    cfg = {
        "model": ModelParams.from_dict(raw["model"]),
        "grid": GridSpec.from_dict(raw["grid"]) if "grid" in raw else None,
        "seed": int(raw.get("seed", 0)),
        "output": raw.get("output", "out"),
    }
    for name, defaults in _SECTION_DEFAULTS.items():
        section = dict(defaults)
        if name in raw:
            if not isinstance(raw[name], dict):
                raise ConfigurationError(f"section '{name}' must be an object")
            _reject_unknown(raw[name], defaults, f"section '{name}'")
            section.update(raw[name])
        cfg[name] = section
    return cfg


def _with_mass(mp: ModelParams, mass: float) -> ModelParams:
    return ModelParams(mass, mp.hbar, mp.potential)


def _masses(cfg, section) -> list:
    masses = cfg[section]["masses"]
    return [float(m) for m in masses] if masses else [cfg["model"].mass]


def _write_csv(path: Path, columns: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA_HEADER + "\n")
        fh.write(f"# columns: {columns}\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=float)


def _mass_tag(mass: float) -> str:
    return f"{mass:g}".replace(".", "p")


# --- subcommands -------------------------------------------------------------


def cmd_eig(cfg, out: Path) -> int:
    mp, grid = cfg["model"], cfg["grid"] or constrain.default_grid(cfg["model"])
    section = cfg["eig"]
    op = assemble_hamiltonian(mp, grid)
    pairs = lowest_eigenpairs(op, int(section["k"]), float(section["tol"]))
    rows = []
    for i, pair in enumerate(pairs, start=1):
        parity = parity_of(pair, grid) if grid.is_symmetric else "none"
        print(f"E_{i} = {pair.energy:.9g}  parity={parity}  residual={pair.residual:.3e}")
        rows.append((i, pair.energy, parity, pair.residual))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "eig.csv", "k,energy,parity,residual", rows)
    _write_json(out / "eig.json", {
        "model": mp.to_dict(), "grid": grid.to_dict(),
        "energies": [p.energy for p in pairs],
    })
    return EXIT_OK


def cmd_veff(cfg, out: Path) -> int:
    section = cfg["veff"]
    status = EXIT_OK
    results = []
    for mass in _masses(cfg, "veff"):
        mp = _with_mass(cfg["model"], mass)
        grid = cfg["grid"] or constrain.default_grid(mp)
        ts = twostate.build_two_state(mp, grid)
        q_grid = constrain.fig_q_grid(ts.d, int(section["n_q"]), float(section["frac"]))
        table = constrain.effective_potential(mp, q_grid, grid=grid)
        if table.meta["failed_points"]:
            status = EXIT_SOLVER
        u, rescaled_exact = twostate.rescale(table, table.v_eff, table.q)
        arc = -np.sqrt(1.0 - u**2)
        results.append((mass, ts, table, u, rescaled_exact, arc))

    out.mkdir(parents=True, exist_ok=True)
    for mass, ts, table, u, rescaled_exact, arc in results:
        tag = _mass_tag(mass)
        _write_csv(out / f"veff_m{tag}.csv", "q_over_d,rescaled_exact,rescaled_two_state",
                   zip(u.tolist(), rescaled_exact.tolist(), arc.tolist()))
        table.save(out / f"veff_table_m{tag}.csv")
        print(f"m={mass}: E1={ts.e1:.9g} E2={ts.e2:.9g} d={ts.d:.9g} "
              f"failed_points={len(table.meta['failed_points'])}")
    return status


def cmd_twostate(cfg, out: Path) -> int:
    section = cfg["twostate"]
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for mass in _masses(cfg, "twostate"):
        mp = _with_mass(cfg["model"], mass)
        ts = twostate.build_two_state(mp, cfg["grid"])
        q = np.linspace(-ts.d, ts.d, int(section["n_q"]))
        v = np.array([twostate.two_state_veff(ts, qi) for qi in q])
        tag = _mass_tag(mass)
        _write_csv(out / f"two_state_m{tag}.csv", "q,v_eff",
                   zip(q.tolist(), v.tolist()))
        summary[str(mass)] = {"e1": ts.e1, "e2": ts.e2, "d": ts.d}
        print(f"m={mass}: E1={ts.e1:.9g} E2={ts.e2:.9g} d={ts.d:.9g}")
    _write_json(out / "two_state.json", summary)
    return EXIT_OK


def _two_state_reference_curve(t_grid) -> np.ndarray:
    """Universal rescaled two-state fluctuation curve (unit dipole)."""
    ref = constrain.EffectivePotentialTable(
        q=np.linspace(-1.0, 1.0, 801),
        v_eff=-np.sqrt(1.0 - np.linspace(-1.0, 1.0, 801) ** 2),
        lam=np.zeros(801),
        meta={"e1": -1.0, "e2": 1.0, "d": 1.0, "model": {"mass": 1.0}},
        bounded_support=True,
    )
    curve = thermal.fluctuation_curve(ref, 1.0 / np.asarray(t_grid))
    return curve.delta_q_over_d


def cmd_fluct(cfg, out: Path) -> int:
    section = cfg["fluct"]
    t_grid = np.logspace(np.log10(float(section["t_min"])),
                         np.log10(float(section["t_max"])), int(section["n_t"]))
    reference = _two_state_reference_curve(t_grid)
    results, summary = [], {}
    for mass in _masses(cfg, "fluct"):
        mp = _with_mass(cfg["model"], mass)
        ts = twostate.build_two_state(mp, cfg["grid"])
        betas = 2.0 / (t_grid * ts.splitting)
        table = thermal.table_for_betas(mp, betas, n_q=int(section["n_q"]),
                                        grid=cfg["grid"])
        curve = thermal.fluctuation_curve(table, betas)
        # restricted variant: same V_eff confined to |q| <= d
        q_res = np.linspace(-ts.d, ts.d, 201)
        clipped = constrain.EffectivePotentialTable(
            q_res, table.interpolate(q_res), np.zeros_like(q_res),
            table.meta, bounded_support=True)
        restricted = thermal.fluctuation_curve(clipped, betas)
        results.append((mass, curve, restricted))
        summary[str(mass)] = {
            "e1": ts.e1, "e2": ts.e2, "d": ts.d,
            "delta_p": curve.delta_p.tolist(),
            "max_full_vs_restricted": float(
                np.max(np.abs(curve.delta_q_over_d - restricted.delta_q_over_d))),
        }

    out.mkdir(parents=True, exist_ok=True)
    for mass, curve, restricted in results:
        tag = _mass_tag(mass)
        _write_csv(
            out / f"fluct_m{tag}.csv",
            "rescaled_temperature,delta_q_over_d,delta_q_over_d_restricted,mean_q",
            zip(curve.rescaled_temperature.tolist(), curve.delta_q_over_d.tolist(),
                restricted.delta_q_over_d.tolist(), curve.mean_q.tolist()))
        print(f"m={mass}: delta_q/d ranges "
              f"[{curve.delta_q_over_d.min():.4g}, {curve.delta_q_over_d.max():.4g}]")
    _write_csv(out / "fluct_two_state.csv", "rescaled_temperature,delta_q_over_d",
               zip(t_grid.tolist(), reference.tolist()))
    _write_json(out / "fluct.json", summary)
    return EXIT_OK


def _validate_sample(mode, run, tm, mp, cfg, section):
    """Return (passed, report) comparing the run against its oracle."""
    moments = run.moment_summary()
    n_se = float(section["tolerance_se"])
    if mode == "none":
        return True, {"mode": "none", "moments": moments}
    if mode == "harmonic":
        pot = mp.potential
        expected = {
            "mean_q": 0.0, "mean_p": 0.0,
            "var_q": 1.0 / (run.beta * mp.mass * pot.omega**2),
            "var_p": mp.mass / run.beta,
        }
    elif mode == "two_level":
        if tm.n != 2:
            raise ConfigurationError("two_level validation requires n_basis=2")
        expected = sampling.oracle_two_level(
            tm.energies[0], tm.energies[1], tm.q_matrix, run.beta, tm.p_matrix_imag)
    elif mode == "marginal":
        return _validate_marginal(run, mp, cfg, section)
    else:
        raise ConfigurationError(f"unknown validation mode {mode!r}")

    checks, passed = {}, True
    for key, target in expected.items():
        se = max(moments[f"{key}_se"], 1e-300)
        ok = abs(moments[key] - target) <= n_se * se
        checks[key] = {"estimate": moments[key], "expected": target,
                       "se": se, "pass": ok}
        passed = passed and ok
        print(f"{'PASS' if ok else 'FAIL'} {key}: {moments[key]:.6g} "
              f"vs {target:.6g} (se {se:.2g})")
    return passed, {"mode": mode, "moments": moments, "checks": checks}


def _validate_marginal(run, mp, cfg, section):
    """Total-variation comparison of the empirical q histogram against the
    exp(-beta V_eff) marginal."""
    q = run.q
    span = 1.05 * float(np.max(np.abs(q)))
    table = constrain.effective_potential(
        mp, np.linspace(-span, span, 121), grid=cfg["grid"])
    bins = np.linspace(-span, span, 102)
    hist, _ = np.histogram(q, bins=bins)
    hist = hist / hist.sum()
    qq, dens = thermal.position_marginal(table, run.beta)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(qq))])
    cdf /= cdf[-1]
    model_mass = np.diff(np.interp(bins, qq, cdf))
    tv = 0.5 * float(np.abs(hist - model_mass).sum())
    tol = float(section["tv_tolerance"])
    ok = tv < tol
    print(f"{'PASS' if ok else 'FAIL'} total-variation: {tv:.4g} (tolerance {tol})")
    return ok, {"mode": "marginal", "tv_distance": tv, "tolerance": tol,
                "moments": run.moment_summary()}


def cmd_sample(cfg, out: Path, threads: int = 1) -> int:
    section = cfg["sample"]
    mp = cfg["model"]
    tm = sampling.build_truncated_model(mp, int(section["n_basis"]), cfg["grid"])
    chain_cfg = sampling.ChainConfig(
        chain_count=int(section["chains"]),
        steps_per_chain=int(section["steps_per_chain"]),
        burn_in=int(section["burn_in"]),
        seed=cfg["seed"],
        proposal_scale=float(section["proposal_scale"]),
        keep_coefficients=bool(section["keep_coefficients"]),
    )
    run = sampling.sample_ensemble(tm, float(section["beta"]), chain_cfg, threads=threads)
    passed, report = _validate_sample(section["validate"], run, tm, mp, cfg, section)

    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for chain in range(run.chain_count):
        for step in range(run.steps_per_chain):
            rows.append((run.samples[chain, step, 0], run.samples[chain, step, 1],
                         chain, step))
    _write_csv(out / "samples.csv", "q,p,chain,step", rows)
    _write_json(out / "sample_run.json", {
        "model": mp.to_dict(),
        "beta": run.beta,
        "seed": run.seed,
        "chains": run.chain_count,
        "steps_per_chain": run.steps_per_chain,
        "burn_in": run.burn_in,
        "acceptance_rate": run.acceptance_rate,
        "integrated_autocorrelation_time": run.integrated_autocorrelation_time,
        "validation": report,
    })
    print(f"acceptance={run.acceptance_rate:.3f} "
          f"iat={run.integrated_autocorrelation_time:.1f}")
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_canonical(cfg, out: Path) -> int:
    section = cfg["canonical"]
    mp = cfg["model"]
    beta = float(section["beta"])
    atoms = thermal.canonical_atoms(mp, beta, int(section["k_max"]), cfg["grid"])

    # effective-potential dispersion at the same beta for the contrast line
    q_max = thermal.required_q_range(mp, beta)
    table = constrain.effective_potential(
        mp, np.linspace(-q_max, q_max, 81), grid=cfg["grid"])
    curve = thermal.fluctuation_curve(table, [beta])
    canonical_dq = atoms.dispersion()

    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "canonical_atoms.csv", "weight,q_k",
               zip(atoms.weights.tolist(), atoms.positions.tolist()))
    _write_json(out / "canonical.json", {
        "beta": beta,
        "z": atoms.z,
        "canonical_delta_q": canonical_dq,
        "ensemble_delta_q": float(curve.delta_q[0]),
    })
    print(f"canonical delta_q = {canonical_dq:.6g}; "
          f"wave-function-ensemble delta_q = {curve.delta_q[0]:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfgibbs",
        description="Statistics of quantum expectation values under Gibbs "
                    "ensembles over wave functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("eig", "veff", "twostate", "fluct", "sample", "canonical"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent chains")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        out = Path(args.out if args.out is not None else cfg["output"])
        if args.command == "eig":
            return cmd_eig(cfg, out)
        if args.command == "veff":
            return cmd_veff(cfg, out)
        if args.command == "twostate":
            return cmd_twostate(cfg, out)
        if args.command == "fluct":
            return cmd_fluct(cfg, out)
        if args.command == "sample":
            return cmd_sample(cfg, out, threads=args.threads)
        if args.command == "canonical":
            return cmd_canonical(cfg, out)
        raise ConfigurationError(f"unknown command {args.command}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, ValidationFailure, WfGibbsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
