"""Batch experiment runner: configs in, CSV + JSON + snapshots + figures out.

Subcommands:

    pcflab run <config.yaml>     run one experiment from a config file
    pcflab verify [--only C3,C8] run the acceptance matrix
    pcflab cone <config.yaml>    existence-time calculator on curve data
    pcflab describe <model>      print a model geometry's data

Exit codes: 0 success, 2 config validation error, 3 singularity encountered,
4 acceptance criterion failure.  The output root defaults to the config's
directory and can be overridden with the PCFLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np
import yaml

from . import acceptance, chart, cone, containers, genkahler, grf
from . import homogeneous as hg
from . import plots, potential, sampling
from .errors import PcflabError, SingularityError, ValidationError
from .frames import hermitian_to_riemannian
from .grid import ChartGrid

EXPERIMENTS = ("torus_pcf", "potential_pcf", "homogeneous", "grf_coupled",
               "twisted_ma", "cone", "fixedpoint_checks")


def _need(cfg, key, typ=None, path=""):
    here = f"{path}.{key}" if path else key
    if key not in cfg:
        raise ValidationError(f"missing config field {here!r}", field=here)
    val = cfg[key]
    if typ is not None and not isinstance(val, typ):
        raise ValidationError(f"config field {here!r} has wrong type "
                              f"(expected {typ})", field=here)
    return val


def load_config(path):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}", field="config")
    except yaml.YAMLError as exc:
        raise ValidationError(f"config parse error: {exc}", field="config")
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a mapping", field="config")
    exp = _need(cfg, "experiment", str)
    if exp not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {exp!r}; choose from "
                              f"{EXPERIMENTS}", field="experiment")
    cfg.setdefault("seed", 0)
    cfg.setdefault("output", exp)
    tolblock = cfg.get("tolerances", {})
    for k, v in tolblock.items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ValidationError(f"tolerances.{k} must be positive",
                                  field=f"tolerances.{k}")
    return cfg


def _outdir(cfg, cfg_path):
    root = os.environ.get("PCFLAB_OUT")
    if root is None:
        root = os.path.dirname(os.path.abspath(cfg_path)) or "."
    out = os.path.join(root, str(cfg["output"]))
    os.makedirs(out, exist_ok=True)
    return out


def _grid_from(cfg):
    block = cfg.get("grid", {})
    n = block.get("points_per_axis", 16)
    periods = block.get("periods", [2 * math.pi] * 4)
    return ChartGrid(points_per_axis=int(n), periods=tuple(periods))


def _json_dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if o == math.inf:
        return "infinity"
    return str(o)


def run_torus_pcf(cfg, outdir, want_plots):
    grid = _grid_from(cfg)
    geo = cfg.get("geometry", {})
    rng = np.random.default_rng(int(cfg["seed"]))
    hf, modes, _ = sampling.random_pluriclosed_metric(
        grid, rng, amplitude=float(geo.get("amplitude", 0.2)),
        kmax=int(geo.get("kmax", 2)), nmodes=int(geo.get("nmodes", 8)))
    gamma = np.zeros((4, 4))
    gamma[0, 1], gamma[1, 0] = 1.0, -1.0
    gamma[2, 3], gamma[3, 2] = -1.0, 1.0
    res = chart.run_chart_flow(hf, t_end=float(geo.get("t_end", 1.0)),
                               gamma=gamma,
                               record_every=int(geo.get("record_every", 5)),
                               normalized=bool(geo.get("normalized", False)))
    rows = list(zip(res.times, res.pluriclosed_residuals, res.rate_norms,
                    res.min_eigs, res.flat_distances, res.volumes,
                    res.pairings))
    containers.write_csv(os.path.join(outdir, "series.csv"),
                         ["t", "pluriclosed_residual", "rate_norm",
                          "min_eigenvalue", "flat_distance", "volume",
                          "gamma_pairing"], rows)
    containers.write_snapshot(os.path.join(outdir, "final_metric.pcfs"),
                              grid, {"metric": res.final.G},
                              meta={"experiment": "torus_pcf",
                                    "t": float(res.times[-1])})
    summary = {
        "experiment": "torus_pcf",
        "certifies": ["pluriclosed_preservation", "pairing_conservation",
                      "flat_convergence_trend"],
        "max_pluriclosed_residual": float(res.pluriclosed_residuals.max()),
        "pairing_drift": float(np.abs(res.pairings - res.pairings[0]).max()),
        "final_flat_distance": float(res.flat_distances[-1]),
        "singular": res.singular,
    }
    figures = plots.plot_chart_flow(outdir, res) if want_plots else []
    summary["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    return 3 if res.singular else 0


def run_potential_pcf(cfg, outdir, want_plots):
    grid = _grid_from(cfg)
    geo = cfg.get("geometry", {})
    rng = np.random.default_rng(int(cfg["seed"]))
    spectral = geo.get("alpha_modes")
    if spectral:
        modes = [(tuple(int(v) for v in m["k"]), int(m["component"]),
                  complex(m["re"], m.get("im", 0.0))) for m in spectral]
    else:
        modes = sampling.random_alpha_modes(
            rng, kmax=int(geo.get("kmax", 2)),
            amplitude=float(geo.get("amplitude", 0.15)),
            nmodes=int(geo.get("nmodes", 8)))
    a0 = potential.PotentialForm(sampling.alpha_from_modes(grid, modes), grid)
    res = potential.run_potential_flow(
        a0, t_end=float(geo.get("t_end", 5.0)),
        record_every=int(geo.get("record_every", 20)))
    rows = list(zip(res.times, res.flat_distances, res.torsion_l2,
                    res.det_w_defects))
    containers.write_csv(os.path.join(outdir, "series.csv"),
                         ["t", "flat_distance", "torsion_l2", "detW_defect"],
                         rows)
    containers.write_snapshot(os.path.join(outdir, "final_metric.pcfs"),
                              grid, {"metric": res.final_metric.G,
                                     "alpha": res.final.alpha},
                              meta={"experiment": "potential_pcf"})
    summary = {
        "experiment": "potential_pcf",
        "certifies": ["flat_convergence", "unit_det_generalized_metric",
                      "torsion_decay_trend"],
        "final_flat_distance": float(res.flat_distances[-1]),
        "max_detW_defect": float(res.det_w_defects.max()),
        "torsion_l2_final": float(res.torsion_l2[-1]),
        "singular": res.singular,
    }
    figures = plots.plot_potential_flow(outdir, res) if want_plots else []
    summary["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    return 3 if res.singular else 0


def run_homogeneous(cfg, outdir, want_plots):
    geo = cfg.get("geometry", {})
    name = _need(geo, "model", str, "geometry")
    model = hg.build_model(name)
    params = geo.get("initial_params", [0.7, 1.3, 0.1, -0.05])
    m0 = hg.InvariantMetric(np.asarray(params, dtype=float)).validate()
    traj = hg.integrate(model, m0, t_end=float(geo.get("t_end", 1000.0)),
                        normalized=bool(geo.get("normalized", False)),
                        method=str(geo.get("method", "RK45")))
    cls = hg.classify_asymptotics(model, traj)
    rows = [(t, *p, rm, *eigs, rm * t)
            for t, p, rm, eigs in zip(traj.times, traj.params, traj.rm_norms,
                                      traj.eigenvalues)]
    containers.write_csv(os.path.join(outdir, "trajectory.csv"),
                         ["t", "p1", "p2", "re_z", "im_z", "rm_norm",
                          "eig1", "eig2", "eig3", "eig4", "rm_times_t"], rows)
    summary = {
        "experiment": "homogeneous", "model": name,
        "certifies": ["singularity_type_classification", "collapse_profile"],
        "classification": cls.verdict,
        "statistic_final": cls.stat_final,
        "collapse_profile": None if cls.collapse_profile is None
        else [float(v) for v in cls.collapse_profile],
        "detail": cls.detail,
        "singular": traj.singular,
    }
    if not traj.singular and traj.t_final >= 100:
        smax = traj.t_final
        s_list = [smax / 8, smax / 4, smax / 2, smax]
        bl = hg.blowdown(model, traj, s_list)
        summary["blowdown"] = {
            "s": list(bl.s_values),
            "soliton_defects": [float(v) for v in bl.soliton_defects],
            "self_similarity_defects": [float(v) for v in bl.ss_defects],
        }
    figures = plots.plot_homogeneous(outdir, traj) if want_plots else []
    summary["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    return 3 if traj.singular else 0


def run_grf_coupled(cfg, outdir, want_plots):
    grid = _grid_from(cfg)
    geo = cfg.get("geometry", {})
    rng = np.random.default_rng(int(cfg["seed"]))
    hf, _, _ = sampling.random_pluriclosed_metric(
        grid, rng, amplitude=float(geo.get("amplitude", 0.3)),
        kmax=int(geo.get("kmax", 2)), nmodes=int(geo.get("nmodes", 6)))
    g0, H0, _ = grf.pluriclosed_to_grf(hf)
    st0 = grf.GRFState(g0, H0, np.zeros(grid.shape), grid).validate()
    rep = grf.coupled_flow_report(st0, t_end=float(geo.get("t_end", 0.04)),
                                  dt=float(geo.get("dt", 0.002)))
    lam, _ = grf.lambda_lowest(g0, H0, grid)
    rows = list(zip(rep["times"], rep["F"], rep["dF_dt"], rep["integrand"],
                    rep["mass"]))
    containers.write_csv(os.path.join(outdir, "energy.csv"),
                         ["t", "F", "dF_dt", "integrand", "weighted_volume"],
                         rows)
    summary = {
        "experiment": "grf_coupled",
        "certifies": ["energy_monotonicity", "conjugate_heat_conservation",
                      "lowest_eigenvalue"],
        "monotone": rep["monotone"],
        "mass_drift": rep["mass_drift"],
        "lambda_lowest": float(lam),
    }
    figures = plots.plot_grf(outdir, rep) if want_plots else []
    summary["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    return 0


def run_twisted_ma(cfg, outdir, want_plots):
    grid = _grid_from(cfg)
    geo = cfg.get("geometry", {})
    rng = np.random.default_rng(int(cfg["seed"]))
    f0 = sampling.random_real_scalar(grid, rng,
                                     amplitude=float(geo.get("amplitude", 0.05)),
                                     kmax=int(geo.get("kmax", 1)))
    s0 = genkahler.SplitPotential(f0, grid)
    res = genkahler.run_twisted_flow(s0, t_end=float(geo.get("t_end", 1.0)),
                                     record_every=int(geo.get("record_every", 5)))
    rows = list(zip(res.times, res.sup_f, res.consistency))
    containers.write_csv(os.path.join(outdir, "series.csv"),
                         ["t", "sup_f", "tensor_consistency"], rows)
    summary = {
        "experiment": "twisted_ma",
        "certifies": ["scalar_tensor_consistency", "flat_decay_trend"],
        "final_sup_f": float(res.sup_f[-1]),
        "max_tensor_consistency": float(np.nanmax(res.consistency)),
        "singular": res.singular,
    }
    figures = plots.plot_twisted(outdir, res) if want_plots else []
    summary["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    return 3 if res.singular else 0


def _cone_problem(cfg):
    geo = cfg.get("geometry", cfg)
    curves = []
    for c in geo.get("curves", []):
        curves.append(cone.Curve(str(c.get("name", f"c{len(curves)}")),
                                 int(_need(c, "self_intersection", int,
                                           "curves")),
                                 int(_need(c, "canonical_pairing", int,
                                           "curves")),
                                 float(_need(c, "area", (int, float),
                                             "curves"))))
    kahler = bool(geo.get("kahler", False))
    gp = geo.get("gamma_pairing")
    return cone.ConeProblem(curves, gamma_pairing=gp, kahler=kahler).validate()


def run_cone(cfg, outdir, want_plots):
    problem = _cone_problem(cfg)
    result = cone.as_json_dict(problem)
    result["experiment"] = "cone"
    result["certifies"] = ["formal_existence_time"]
    tau = cone.tau_star(problem)
    horizon = 2.0 * tau if math.isfinite(tau) else 10.0
    ts = np.linspace(0, horizon, 41)
    rows = []
    for t in ts:
        vals = cone.class_trajectory(problem, float(t))["curve_pairings"]
        rows.append((float(t), *[vals[c.name] for c in problem.curves]))
    containers.write_csv(os.path.join(outdir, "trajectory.csv"),
                         ["t"] + [c.name for c in problem.curves], rows)
    figures = plots.plot_cone(outdir, problem, tau) if want_plots else []
    result["figures"] = [os.path.basename(f) for f in figures]
    _json_dump(os.path.join(outdir, "summary.json"), result)
    return 0


def run_fixedpoint_checks(cfg, outdir, want_plots):
    res3 = acceptance.criterion_3()
    res11 = acceptance.criterion_11()
    grid = ChartGrid(points_per_axis=int(cfg.get("grid", {})
                                         .get("points_per_axis", 8)))
    rng = np.random.default_rng(int(cfg["seed"]))
    hf, _, _ = sampling.random_pluriclosed_metric(grid, rng, amplitude=0.15,
                                                  kmax=2, nmodes=6)
    gauge = grf.gauge_equivalence_check(hf, pluriclosed_tol=1e-6)
    flat = chart.flat_metric(grid)
    rate_flat, _ = chart.pcf_rhs(flat, with_report=False)
    summary = {
        "experiment": "fixedpoint_checks",
        "certifies": ["flat_fixed_point", "hopf_fixed_point",
                      "gauge_equivalence", "sign_sensitivity"],
        "flat_rate_norm": float(np.abs(rate_flat).max()),
        "hopf": res3.details,
        "hopf_passed": res3.passed,
        "gauge_defect": gauge["defect"],
        "negative_control": res11.details,
        "negative_control_passed": res11.passed,
    }
    rows = [("flat_rate_norm", summary["flat_rate_norm"]),
            ("hopf_rate_norm", res3.details["rate_norm"]),
            ("gauge_defect", gauge["defect"])]
    containers.write_csv(os.path.join(outdir, "checks.csv"),
                         ["check", "value"], rows)
    _json_dump(os.path.join(outdir, "summary.json"), summary)
    ok = res3.passed and res11.passed and gauge["defect"] < 1e-4
    return 0 if ok else 4


RUNNERS = {
    "torus_pcf": run_torus_pcf,
    "potential_pcf": run_potential_pcf,
    "homogeneous": run_homogeneous,
    "grf_coupled": run_grf_coupled,
    "twisted_ma": run_twisted_ma,
    "cone": run_cone,
    "fixedpoint_checks": run_fixedpoint_checks,
}


def cmd_run(args):
    cfg = load_config(args.config)
    outdir = _outdir(cfg, args.config)
    np.random.seed(int(cfg["seed"]))   # belt and braces for determinism
    want_plots = cfg.get("plots", True) and not args.no_plots
    try:
        status = RUNNERS[cfg["experiment"]](cfg, outdir, want_plots)
    except SingularityError as exc:
        _json_dump(os.path.join(outdir, "summary.json"),
                   {"experiment": cfg["experiment"], "singular": True,
                    "reason": str(exc)})
        print(f"singularity: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {outdir}")
    return status


def cmd_verify(args):
    select = None
    if args.only:
        select = {s.strip().upper() for s in args.only.split(",")}
    results = acceptance.run_all(select=select)
    print(f"{'criterion':10s} {'status':7s} description")
    failed = 0
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.cid:10s} {status:7s} {r.description} ({r.runtime:.1f}s)")
        if not r.passed:
            failed += 1
    if args.report:
        _json_dump(args.report, [
            {"cid": r.cid, "description": r.description, "passed": r.passed,
             "details": r.details, "runtime": r.runtime} for r in results])
    print(f"\n{len(results) - failed}/{len(results)} criteria passed")
    return 4 if failed else 0


def cmd_cone(args):
    cfg = load_config(args.config) if args.config.endswith((".yaml", ".yml")) \
        else {"experiment": "cone", "seed": 0, "output": "cone"}
    if cfg.get("experiment") != "cone":
        raise ValidationError("config is not a cone experiment",
                              field="experiment")
    outdir = _outdir(cfg, args.config)
    status = run_cone(cfg, outdir, not args.no_plots)
    print(f"wrote {outdir}")
    return status


def cmd_describe(args):
    model = hg.build_model(args.model)
    print(f"model {model.name}")
    print("nonzero brackets [e_i, e_j] = c^k_ij e_k:")
    for i in range(4):
        for j in range(i + 1, 4):
            terms = [f"{model.c[k, i, j]:+g} e{k + 1}" for k in range(4)
                     if abs(model.c[k, i, j]) > 0]
            if terms:
                print(f"  [e{i + 1}, e{j + 1}] = {' '.join(terms)}")
    print("complex structure J (columns are images of the basis):")
    for row in model.J:
        print("  " + "  ".join(f"{v:+.0f}" for v in row))
    print(f"jacobi defect {hg.jacobi_defect(model.c):.2e}, "
          f"nijenhuis defect {hg.nijenhuis_defect(model.c, model.J):.2e}")
    m = hg.InvariantMetric(np.array([0.7, 1.3, 0.1, -0.05]))
    rate = hg.invariant_pcf_rhs(model, m)
    print(f"sample flow rate at params {list(m.params)}: "
          f"{np.array2string(rate, precision=5)}")
    if args.model == "Hopf":
        print("round-product metric is a fixed point: |rate| = "
              f"{np.abs(hg.invariant_pcf_rhs(model, hg.hopf_round_metric())).max():.2e}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="pcflab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
    p_run.set_defaults(fn=cmd_run)

    p_ver = sub.add_parser("verify", help="run the acceptance matrix")
    p_ver.add_argument("--only", help="comma-separated criterion ids")
    p_ver.add_argument("--report", help="write a JSON report here")
    p_ver.set_defaults(fn=cmd_verify)

    p_cone = sub.add_parser("cone", help="existence-time calculator")
    p_cone.add_argument("config")
    p_cone.add_argument("--no-plots", action="store_true")
    p_cone.set_defaults(fn=cmd_cone)

    p_desc = sub.add_parser("describe", help="print a model geometry")
    p_desc.add_argument("model", choices=hg.MODEL_NAMES)
    p_desc.set_defaults(fn=cmd_describe)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"config error ({exc.field}): {exc}", file=sys.stderr)
        return 2
    except SingularityError as exc:
        print(f"singularity: {exc}", file=sys.stderr)
        return 3
    except PcflabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
