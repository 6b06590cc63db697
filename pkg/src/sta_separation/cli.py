"""Command-line experiment runner.

Subcommands ``optimize``, ``line-search``, ``verify`` and ``noise``.  Exit
codes: 0 success, 1 configuration or input error, 2 total run failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .cost import CostContext
from .core import derive_endpoints
from .errors import ConfigError, DegenerateCloud, IonCollision, NonPhysical, NonPhysicalEndpoint
from .inverse import controls_for
from .line import default_nu_grid, fit_line, nu_sweep
from .optimizers import OptimizerRun, SolutionCloud, sweep_times
from .verifier import noise_study, verify_params, verify_waveforms

log = logging.getLogger("sta_separation")

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2


def _context(cfg: io.ExperimentConfig) -> CostContext:
    return CostContext(cfg.physical, cfg.objective, derive_endpoints(cfg.physical), cfg.n_samples)


def _tf_tag(t_final: float) -> str:
    return f"{t_final * 1e6:.2f}us"


def _e_exc(ctx: CostContext, params) -> float:
    try:
        return verify_params(params, ctx.config, ctx.endpoints, ctx.n_samples).e_exc
    except (NonPhysical, IonCollision):
        return math.nan


def cmd_optimize(cfg: io.ExperimentConfig) -> int:
    out = Path(cfg.output_dir)
    prov = cfg.provenance()
    if not cfg.methods:
        log.warning("no methods configured; nothing to do")
        return EXIT_OK
    ctx = _context(cfg)
    unit = cfg.physical.energy_unit
    cloud, records, table = SolutionCloud(), [], []
    for spec in cfg.methods:
        log.info("sweeping %s over %d final times", spec.method, len(cfg.t_grid))
        for run in sweep_times(spec, cfg.t_grid, ctx):
            ctx_t = ctx.with_t_final(run.t_final)
            ok = math.isfinite(run.best_value) and run.best_value < cfg.objective.sentinel
            e_exc = _e_exc(ctx_t, run.best_params) if ok else math.nan
            rec = run.to_dict()
            rec.update(e_exc=e_exc, cost=ctx_t.report(run.best_params).to_json() if ok else None)
            records.append(rec)
            if ok:
                cloud.add(run, e_exc)
            table.append((run.t_final, run.method, run.best_value / unit, e_exc / unit, *run.best_params.free))
    io.write_jsonl(out / "runs.jsonl", records, prov)
    io.write_jsonl(out / "cloud.jsonl", [e.__dict__ for e in cloud.entries], prov)

    cma = {t: e for t, m, _, e, *_ in table if m == "CMA"}
    rows = [(t, m, f, e, e / cma[t] if t in cma and cma[t] > 0 else math.nan, *a) for t, m, f, e, *a in table]
    header = ("t_final", "method", "objective_over_hbar_omega0", "e_exc_over_hbar_omega0", "e_exc_over_cma", "a10", "a11", "a12")
    io.write_csv(out / "summary.csv", header, rows, prov)
    if not cloud.entries:
        log.error("every optimization run failed")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_line_search(cfg: io.ExperimentConfig, cloud_path) -> int:
    out = Path(cfg.output_dir)
    prov = cfg.provenance()
    records = io.read_jsonl(cloud_path)
    cloud = SolutionCloud.from_records(records)
    try:
        fit = fit_line(cloud, cfg.line_search.trim)
    except DegenerateCloud as exc:
        raise ConfigError(f"cloud {cloud_path}: {exc}") from exc
    log.info("line fit residual_rms = %.6g", fit.residual_rms)
    ls = cfg.line_search
    nu_grid = np.array(ls.nu_grid) if ls.nu_grid is not None else default_nu_grid(fit, cloud, ls.n_nu, ls.extension)
    io.write_json(out / "line_fit.json", fit.to_dict(), prov)

    ctx = _context(cfg)
    unit = cfg.physical.energy_unit
    summary, results = [], []
    for t_f in ls.t_grid:
        res = nu_sweep(fit, nu_grid, t_f, ctx, ls.jump_factor, budget=ls.budget)
        results.append(res.to_dict())
        tag = _tf_tag(t_f)
        rows = [(s.nu, s.e_exc / unit, int(s.converged), *s.refined.free) for s in res.samples]
        io.write_csv(out / f"nu_sweep_{tag}.csv", ("nu", "e_exc_over_hbar_omega0", "converged", "a10", "a11", "a12"), rows, prov)
        best, local = res.best_sample(), res.local_sample()
        cma = [e for e in cloud.for_time(t_f) if e.method == "CMA"]
        cma_e = cma[0].e_exc if cma else math.nan
        if best is not None:
            io.write_params(out / f"params_best_{tag}.json", best.refined.free, t_f, f"best_{tag}", prov)
        if local is not None:
            io.write_params(out / f"params_local_{tag}.json", local.refined.free, t_f, f"local_{tag}", prov)
        if cma:
            io.write_params(out / f"params_cma_{tag}.json", cma[0].point, t_f, f"cma_{tag}", prov)
        b_e = best.e_exc if best else math.nan
        ratio = cma_e / b_e if best and b_e > 0 else math.nan
        lo, hi = res.smooth_boundary or (math.nan, math.nan)
        summary.append((
            t_f, b_e / unit, (local.e_exc if local else math.nan) / unit, cma_e / unit, ratio,
            best.nu if best else math.nan, local.nu if local else math.nan, lo, hi,
        ))
        log.info("t_f = %s: improvement over CMA x%.3g", tag, ratio)
    io.write_jsonl(out / "nu_sweeps.jsonl", results, prov)
    header = ("t_final", "best_over_hbar_omega0", "local_over_hbar_omega0", "cma_over_hbar_omega0",
              "cma_over_best", "nu_best", "nu_local", "smooth_lo", "smooth_hi")
    io.write_csv(out / "line_summary.csv", header, summary, prov)
    if all(math.isnan(row[1]) for row in summary):
        return EXIT_FAILURE
    return EXIT_OK


def _params_context(cfg, pf: io.ParamsFile) -> CostContext:
    ctx = _context(cfg)
    return ctx.with_t_final(pf.t_final) if pf.t_final is not None else ctx


def cmd_verify(cfg: io.ExperimentConfig, params_paths) -> int:
    out = Path(cfg.output_dir)
    prov = cfg.provenance()
    unit = cfg.physical.energy_unit
    files = [io.read_params(p) for p in params_paths]
    failures = 0
    for pf in files:
        ctx = _params_context(cfg, pf)
        params = ctx.params(pf.free)
        try:
            wf = controls_for(ctx.config, ctx.endpoints, params, ctx.n_samples)
            rep = verify_waveforms(wf, ctx.config)
        except (NonPhysical, IonCollision) as exc:
            log.error("%s: rejected (%s)", pf.label, exc)
            failures += 1
            continue
        io.write_waveforms(out / f"waveforms_{pf.label}.csv", wf, prov)
        rec = {
            "label": pf.label,
            "t_final": ctx.config.t_final,
            "free": list(pf.free),
            "e_exc_over_hbar_omega0": rep.e_exc / unit,
            "beta_max": wf.beta_max(),
            "report": rep.to_dict(),
        }
        io.write_json(out / f"verify_{pf.label}.json", rec, prov)
        log.info("%s: E_exc = %.6g hbar omega0, beta_max = %.6g J/m^4", pf.label, rep.e_exc / unit, wf.beta_max())
    if failures == len(files):
        return EXIT_CONFIG
    return EXIT_OK


def crossover_sigma(sigmas, mean_a, mean_b, comparable_ratio: float = 0.9):
    """First sigma at which protocol ``a`` loses its advantage: ``mean_a >= comparable_ratio * mean_b``."""
    for s, a, b in zip(sigmas, mean_a, mean_b):
        if math.isfinite(a) and math.isfinite(b) and a >= comparable_ratio * b:
            return s
    return None


def cmd_noise(cfg: io.ExperimentConfig, params_paths) -> int:
    out = Path(cfg.output_dir)
    prov = cfg.provenance()
    unit = cfg.physical.energy_unit
    files = [io.read_params(p) for p in params_paths]
    nz = cfg.noise
    rows, ensembles, means = [], [], {}
    for k, pf in enumerate(files):
        ctx = _params_context(cfg, pf)
        params = ctx.params(pf.free)
        for j, sigma in enumerate(nz.sigmas):
            seed = int(np.random.SeedSequence([cfg.master_seed, j]).generate_state(1)[0])
            try:
                st = noise_study(params, sigma, nz.n_draws, seed, ctx.config, ctx.endpoints, ctx.n_samples, nz.per_sample)
            except (NonPhysical, IonCollision) as exc:
                log.error("%s: nominal protocol failed (%s)", pf.label, exc)
                break
            ensembles.append({"label": pf.label, **st.to_dict()})
            rows.append((pf.label, sigma, st.nominal / unit, st.mean / unit, st.median / unit, st.max / unit, st.n_failed))
            means.setdefault(pf.label, []).append(st.mean)
    io.write_jsonl(out / "noise_ensembles.jsonl", ensembles, prov)
    io.write_csv(out / "noise_sweep.csv", ("label", "sigma", "nominal", "mean", "median", "max", "n_failed"), rows, prov)
    labels = list(means)
    cross = []
    for a in labels:
        for b in labels:
            if a != b and len(means[a]) == len(means[b]) == len(nz.sigmas):
                s = crossover_sigma(nz.sigmas, means[a], means[b], nz.comparable_ratio)
                cross.append((a, b, "" if s is None else s))
    io.write_csv(out / "noise_crossover.csv", ("protocol", "reference", "crossover_sigma"), cross, prov)
    return EXIT_OK if ensembles else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--seed", type=int, help="override master_seed")
    common.add_argument("--mode", choices=("harmonic", "cubic"), help="override the objective mode")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sta-separation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="sweep every configured method over t_grid")
    p = sub.add_parser("line-search", parents=[common], help="fit the line of minima and sweep nu")
    p.add_argument("--cloud", help="cloud JSON-lines file (default: <out>/cloud.jsonl)")
    p = sub.add_parser("verify", parents=[common], help="export waveforms and full-Hamiltonian E_exc")
    p.add_argument("--params", action="append", required=True, help="params JSON file (repeatable)")
    p = sub.add_parser("noise", parents=[common], help="multiplicative control-noise study")
    p.add_argument("--params", action="append", required=True, help="params JSON file (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = io.load_config(args.config).with_overrides(args.seed, args.mode, args.out)
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "line-search":
            return cmd_line_search(cfg, args.cloud or Path(cfg.output_dir) / "cloud.jsonl")
        if args.command == "verify":
            return cmd_verify(cfg, args.params)
        return cmd_noise(cfg, args.params)
    except (ConfigError, NonPhysicalEndpoint, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
