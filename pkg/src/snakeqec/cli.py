"""Command line front end.

Nine subcommands cover every experiment in the package; each run writes
CSV tables plus a JSON manifest, and ``replay`` re-executes a manifest
to reproduce the CSV bytes exactly.  Configuration is resolved as
defaults < config file < [subcommand] section < SNAKEQEC_* environment
< flags, and the manifest stores the final merged mapping.

One master seed feeds every run; sampling code derives per-shot streams
by counter splitting, so results do not depend on --workers.
"""

from __future__ import annotations

import argparse
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dephasing import OUParams, ShuttleTrajectory, infidelity_curve, sample_ou_phase
from .distributions import AngleDistribution
from .io import (
    DENSITY_SCHEMA,
    DEPHASING_SCHEMA,
    GAP_DENSITY_SCHEMA,
    GAP_HIST_SCHEMA,
    MONITOR_RMS_SCHEMA,
    PERCOLATION_SCHEMA,
    RATE_SCHEMA,
    RESILIENCE_SCHEMA,
    ROUTE_SCHEMA,
    RunManifest,
    env_overrides,
    load_config,
    read_json,
    read_manifest,
    read_table,
    write_csv,
    write_json,
    write_manifest,
)
from .latticework import (
    TimingParams,
    build_lattice,
    percolation_estimate,
    percolation_threshold,
    route_snake,
)
from .monitor import (
    MonitorConfig,
    detection_threshold,
    false_negative_rate,
    false_positive_rate,
    postselected_angle_density,
    qfi_factor,
    task2_rms,
)
from .montecarlo import (
    ExperimentConfig,
    default_omega_grid,
    estimate_logical_rate,
    gap_angle_distribution,
    gap_statistics,
    postselected_rate,
    threshold_scan,
    wilson_interval,
)
from .resilience import (
    LogLinearRate,
    ResilienceInputs,
    extrapolate_loglinear,
    extrapolate_rate_models,
    resilience_report,
)
from .surgery import (
    PureState,
    apply_cnot,
    fidelity,
    hydra_state,
    run_interacting_protocol,
    run_single_snake_protocol,
)

__all__ = ["main", "build_parser"]

_SQRT2 = math.sqrt(2.0)
_PHI_GRID = tuple(-math.pi + k * math.pi / 4 for k in range(8))
_RMS_GRID = tuple(k * math.pi / 4 for k in range(-3, 5))

# key -> (default, kind); kinds drive coercion of file/env/flag values
_SPECS: dict[str, dict[str, tuple[object, str]]] = {
    "threshold": {
        "d": ([3, 5, 7], "intlist"),
        "p": (1e-3, "float"),
        "omega": (list(default_omega_grid()), "floatlist"),
        "shots": (20_000, "int"),
        "seed": (0, "int"),
        "workers": (None, "int?"),
        "confidence": (0.95, "float"),
    },
    "gap-stats": {
        "d": ([3, 5, 7], "intlist"),
        "p": (1e-3, "float"),
        "omega": (0.0, "float"),
        "omega_grid": (list(default_omega_grid()), "floatlist"),
        "gmin": ("half", "rule"),
        "shots": (20_000, "int"),
        "density": (True, "bool"),
        "seed": (0, "int"),
        "workers": (None, "int?"),
    },
    "postselect": {
        "d": ([7], "intlist"),
        "p": (1e-3, "float"),
        "omega": (list(default_omega_grid()), "floatlist"),
        "gmin": ("half", "rule"),
        "shots": (20_000, "int"),
        "raw": (True, "bool"),
        "seed": (0, "int"),
        "workers": (None, "int?"),
    },
    "monitor": {
        "N": (900, "int"),
        "lam": (0.002, "float"),
        "omega": (list(_RMS_GRID), "floatlist"),
        "omega_max": (0.3, "float"),
        "omega_hat_max": (0.075, "float"),
        "nu": (1, "int"),
        "batch": (None, "int?"),
        "rms": (True, "bool"),
        "seed": (0, "int"),
    },
    "dephasing": {
        "encoding": ("both", "str"),
        "separation": ([100e-9], "floatlist"),
        "speed": ([0.1, 10 ** -0.5, 1.0, 10 ** 0.5, 10.0], "floatlist"),
        "corr_length": (100e-9, "float"),
        "corr_time": (20e-6, "float"),
        "variance_scale": (None, "float?"),
        "coupling": (OUParams().coupling, "float"),
        "samples": (0, "int"),
        "seed": (0, "int"),
    },
    "surgery-verify": {
        "phi": (list(_PHI_GRID), "floatlist"),
        "states": (5, "int"),
        "heads": (5, "int"),
        "tol": (1e-10, "float"),
        "seed": (0, "int"),
    },
    "route": {
        "scenario": (None, "str?"),
        "speed": (10.0, "float"),
        "pitch": (100e-9, "float"),
        "seed": (0, "int"),
    },
    "percolation": {
        "topology": ("square", "str"),
        "mode": ("bond", "str"),
        "size": (64, "int"),
        "trials": (2000, "int"),
        "fraction": ([0.1, 0.3, 0.5, 0.7, 0.9], "floatlist"),
        "threshold": (False, "bool"),
        "seed": (0, "int"),
    },
    "resilience": {
        "rates": (None, "str?"),
        "gap_density": (None, "str?"),
        "mon_density": (None, "str?"),
        "d": ([3, 5, 7, 9, 11, 13], "intlist"),
        "lam": (0.002, "float"),
        "rho": (0.01, "float"),
        "rejection": (0.1, "float"),
        "omega_max": (0.3, "float"),
        "omega_hat_max": (0.075, "float"),
        "seed": (0, "int"),
    },
}


# ----------------------------------------------------------------------
# configuration plumbing


def _as_list(value):
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _coerce(key: str, kind: str, value):
    none_like = value is None or (
        isinstance(value, str) and value.lower() in ("none", "null"))
    try:
        if kind.endswith("?") and none_like:
            return None
        if kind in ("int", "int?"):
            if isinstance(value, bool) or isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        if kind in ("float", "float?"):
            return float(value)
        if kind in ("str", "str?"):
            if not isinstance(value, str):
                raise ValueError
            return value
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise ValueError
        if kind == "intlist":
            return [int(v) for v in _as_list(value)]
        if kind == "floatlist":
            return [float(v) for v in _as_list(value)]
        if kind == "rule":
            try:
                return int(value)
            except (TypeError, ValueError):
                return str(value)
    except (TypeError, ValueError):
        raise ValueError(f"invalid value {value!r} for config key {key!r}") from None
    raise ValueError(f"unhandled config kind {kind!r}")


def coerce_config(sub: str, mapping: dict) -> dict:
    """Fill defaults and type-check one subcommand's configuration."""
    spec = _SPECS[sub]
    unknown = set(mapping) - set(spec)
    if unknown:
        raise ValueError(f"unknown config keys for {sub}: {sorted(unknown)}")
    out = {}
    for key, (default, kind) in spec.items():
        value = mapping.get(key, default)
        out[key] = None if value is None else _coerce(key, kind, value)
    return out


def _resolve(sub: str, args: argparse.Namespace) -> dict:
    spec = _SPECS[sub]
    merged: dict = {}
    if args.config:
        file_cfg = load_config(args.config)
        section = file_cfg.get(sub, {})
        if not isinstance(section, dict):
            raise ValueError(f"config section [{sub}] must be a table")
        unknown = set(section) - set(spec)
        if unknown:
            raise ValueError(
                f"unknown config keys in [{sub}]: {sorted(unknown)}")
        # top-level scalars are shared across subcommands; keys a
        # subcommand does not know are simply not for it
        merged.update({k: v for k, v in file_cfg.items()
                       if k in spec and not isinstance(v, dict)})
        merged.update(section)
    lower = {k.lower(): k for k in spec}
    for key, value in env_overrides().items():
        if key in lower:
            merged[lower[key]] = value
    for key in spec:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    return coerce_config(sub, merged)


# ----------------------------------------------------------------------
# runners (cfg dict -> artifacts on disk)


def _experiment_config(cfg: dict, grid, g_min_rule=None) -> ExperimentConfig:
    kwargs = dict(
        distances=tuple(cfg["d"]), p=cfg["p"], omega_grid=tuple(grid),
        shots=cfg["shots"], seed=cfg["seed"], workers=cfg["workers"],
    )
    if g_min_rule is not None:
        kwargs["g_min_rule"] = g_min_rule
    return ExperimentConfig(**kwargs)


def _run_threshold(cfg, outdir, manifest_name):
    config = _experiment_config(cfg, cfg["omega"])
    est = threshold_scan(config)
    rows = []
    for d, per_d in zip(est.distances, est.rates):
        for omega, r in zip(est.omegas, per_d):
            rows.append((d, config.p, omega, 0, "raw", r.shots, r.accepted,
                         r.failures, r.rate, r.ci_low, r.ci_high, config.seed))
    write_csv(outdir / "threshold.csv", RATE_SCHEMA, rows, manifest_name)
    payload = {
        "found": est.found, "omega_th": est.omega_th,
        "ci_low": est.ci_low, "ci_high": est.ci_high,
        "crossings": list(est.crossings), "distances": list(est.distances),
        "manifest": manifest_name,
    }
    write_json(outdir / "threshold.json", payload)
    if est.found:
        summary = (f"threshold: omega_th={est.omega_th:.4f} "
                   f"ci=[{est.ci_low:.4f}, {est.ci_high:.4f}]")
    else:
        summary = "threshold: no crossing located"
    return ["threshold.csv", "threshold.json"], summary, 0


def _run_gap_stats(cfg, outdir, manifest_name):
    config = _experiment_config(cfg, cfg["omega_grid"], cfg["gmin"])
    hist_rows = []
    per_d = {}
    for d in config.distances:
        g_min = config.g_min(d)
        gaps, fails = gap_statistics(config, d, cfg["omega"])
        for gap in sorted(set(gaps) | set(fails)):
            hist_rows.append((d, config.p, cfg["omega"], g_min, gap,
                              gaps.get(gap, 0), fails.get(gap, 0), config.seed))
        rejected = sum(n for g, n in gaps.items() if g < g_min)
        lo, hi = wilson_interval(rejected, config.shots)
        per_d[str(d)] = {
            "g_min": g_min, "rejection_rate": rejected / config.shots,
            "ci_low": lo, "ci_high": hi, "shots": config.shots,
        }
    write_csv(outdir / "gap_hist.csv", GAP_HIST_SCHEMA, hist_rows, manifest_name)
    write_json(outdir / "gap_summary.json",
               {"per_distance": per_d, "omega": cfg["omega"],
                "manifest": manifest_name})
    outputs = ["gap_hist.csv", "gap_summary.json"]
    if cfg["density"]:
        dens_rows = []
        for d in config.distances:
            dist = gap_angle_distribution(config, d)
            dens_rows.extend((d, w, v) for w, v in zip(dist.grid, dist.density))
        write_csv(outdir / "gap_density.csv", GAP_DENSITY_SCHEMA,
                  dens_rows, manifest_name)
        outputs.append("gap_density.csv")
    bits = " ".join(f"d={d}:{v['rejection_rate']:.4f}" for d, v in per_d.items())
    return outputs, f"gap-stats: rejection {bits}", 0


def _run_postselect(cfg, outdir, manifest_name):
    config = _experiment_config(cfg, cfg["omega"], cfg["gmin"])
    rows = []
    for d in config.distances:
        g_min = config.g_min(d)
        for omega in config.omega_grid:
            est = postselected_rate(config, d, omega)
            rows.append((d, config.p, omega, g_min, "postselected", est.shots,
                         est.accepted, est.failures, est.rate, est.ci_low,
                         est.ci_high, config.seed))
            if cfg["raw"]:
                raw = estimate_logical_rate(config, d, omega)
                rows.append((d, config.p, omega, 0, "raw", raw.shots,
                             raw.accepted, raw.failures, raw.rate, raw.ci_low,
                             raw.ci_high, config.seed))
    write_csv(outdir / "postselect.csv", RATE_SCHEMA, rows, manifest_name)
    write_json(outdir / "postselect.json", {
        "distances": list(config.distances),
        "g_min": {str(d): config.g_min(d) for d in config.distances},
        "n_rows": len(rows), "manifest": manifest_name,
    })
    return (["postselect.csv", "postselect.json"],
            f"postselect: {len(rows)} rate points", 0)


def _run_monitor(cfg, outdir, manifest_name):
    mcfg = MonitorConfig(N=cfg["N"], lam=cfg["lam"],
                         omega_max=cfg["omega_max"],
                         omega_hat_max=cfg["omega_hat_max"],
                         nu=cfg["nu"], n=cfg["batch"])
    payload = {
        "N": mcfg.N, "lam": mcfg.lam, "k_cut": detection_threshold(mcfg),
        "false_positive": false_positive_rate(mcfg),
        "false_negative": false_negative_rate(mcfg),
        "qfi_factor": qfi_factor(mcfg.lam),
        "manifest": manifest_name,
    }
    write_json(outdir / "monitor.json", payload)
    density = postselected_angle_density(mcfg)
    write_csv(outdir / "monitor_density.csv", DENSITY_SCHEMA,
              zip(density.grid, density.density), manifest_name)
    outputs = ["monitor.json", "monitor_density.csv"]
    if cfg["rms"]:
        rms_rows = []
        for omega in cfg["omega"]:
            stats = task2_rms(omega, mcfg)
            rms_rows.append((mcfg.N, mcfg.lam, mcfg.nu, mcfg.n or 0, omega,
                             stats.rms, stats.cr_bound, stats.noisy_cr_bound,
                             stats.rms / stats.noisy_cr_bound))
        write_csv(outdir / "monitor_rms.csv", MONITOR_RMS_SCHEMA,
                  rms_rows, manifest_name)
        outputs.append("monitor_rms.csv")
    summary = (f"monitor: k_cut={payload['k_cut']} "
               f"fp={payload['false_positive']:.4f} "
               f"fn={payload['false_negative']:.3e}")
    return outputs, summary, 0


def _run_dephasing(cfg, outdir, manifest_name):
    params = OUParams(corr_length=cfg["corr_length"],
                      corr_time=cfg["corr_time"],
                      variance_scale=cfg["variance_scale"],
                      coupling=cfg["coupling"])
    if cfg["encoding"] == "both":
        encodings = ("LD", "ST")
    else:
        encodings = (cfg["encoding"],)
    rows = []
    for enc in encodings:
        for pt in infidelity_curve(enc, cfg["separation"], cfg["speed"], params):
            rows.append((pt.encoding, pt.separation, pt.speed,
                         pt.infidelity, pt.variance, "quadrature"))
        if cfg["samples"] > 0:
            for sep in cfg["separation"]:
                for speed in cfg["speed"]:
                    traj = ShuttleTrajectory(speed=speed, separation=sep,
                                             encoding=enc)
                    sd = sample_ou_phase(traj, params, trials=cfg["samples"],
                                         seed=cfg["seed"])
                    w = sd.w
                    var = -2.0 * math.log(w) if w > 0 else math.inf
                    rows.append((enc, sd.separation if enc == "ST" else sep,
                                 speed, (1.0 - w) / 2.0, var, "sampled"))
    write_csv(outdir / "dephasing.csv", DEPHASING_SCHEMA, rows, manifest_name)
    write_json(outdir / "dephasing.json", {
        "encodings": list(encodings), "n_rows": len(rows),
        "manifest": manifest_name,
    })
    return (["dephasing.csv", "dephasing.json"],
            f"dephasing: {len(rows)} curve points", 0)


def _random_pm_state(rng) -> tuple[PureState, complex, complex]:
    raw = rng.normal(size=2) + 1j * rng.normal(size=2)
    raw = raw / np.linalg.norm(raw)
    return PureState.from_plus_minus(raw[0], raw[1]), raw[0], raw[1]


def _run_surgery_verify(cfg, outdir, manifest_name):
    rng = np.random.default_rng(cfg["seed"])
    tol = cfg["tol"]
    states = [_random_pm_state(rng) for _ in range(cfg["states"])]
    checks = []

    def record(name, fids):
        worst = min(fids)
        checks.append({"name": name, "cases": len(fids),
                       "min_fidelity": worst, "pass": worst >= 1.0 - tol})

    # forward teleport hands the head the input exactly when no defect hit
    fids = []
    for psi, _, _ in states:
        for m in (0, 1):
            out, _ = run_single_snake_protocol(psi, False, 0.0, outcomes=(m,))
            fids.append(fidelity(out, psi))
    record("teleport_forward", fids)

    # retreat to the tail undoes any defect rotation on the head
    fids = []
    for phi in cfg["phi"]:
        for psi, _, _ in states:
            for m in (0, 1):
                out, _ = run_single_snake_protocol(psi, True, phi, outcomes=(m,))
                fids.append(fidelity(out, psi))
    record("teleport_back", fids)

    pairs = [(states[i][0], states[(i + 1) % len(states)][0])
             for i in range(len(states))]
    fids = []
    for psi, chi in pairs:
        expected = apply_cnot(
            PureState(np.kron(psi.amplitudes, chi.amplitudes)), 0, 1)
        for m1 in (0, 1):
            for m2 in (0, 1):
                out, _ = run_interacting_protocol(
                    psi, chi, True, 0.0, outcomes=(m1, m2))
                fids.append(fidelity(out, expected))
    record("interacting_success", fids)

    fids = []
    for phi in cfg["phi"]:
        for psi, chi in pairs:
            expected = PureState(np.kron(psi.amplitudes, chi.amplitudes))
            for m1 in (0, 1):
                for m2 in (0, 1):
                    out, _ = run_interacting_protocol(
                        psi, chi, False, phi, outcomes=(m1, m2))
                    fids.append(fidelity(out, expected))
    record("interacting_failure", fids)

    plus = np.array([1.0, 1.0]) / _SQRT2
    minus = np.array([1.0, -1.0]) / _SQRT2
    fids = []
    for psi, alpha, beta in states:
        vec_p, vec_m = plus, minus
        for k in range(1, cfg["heads"] + 1):
            vec_p = np.kron(vec_p, plus)
            vec_m = np.kron(vec_m, minus)
            expected = PureState(alpha * vec_p + beta * vec_m)
            fids.append(fidelity(hydra_state(psi, k, seed=cfg["seed"]), expected))
    record("hydra", fids)

    all_pass = all(c["pass"] for c in checks)
    write_json(outdir / "surgery.json", {
        "checks": checks, "all_pass": all_pass, "tolerance": tol,
        "manifest": manifest_name,
    })
    worst = min(c["min_fidelity"] for c in checks)
    status = "all checks passed" if all_pass else "FAILED"
    return (["surgery.json"],
            f"surgery-verify: {status} (min fidelity {worst:.12f})",
            0 if all_pass else 1)


def _run_route(cfg, outdir, manifest_name):
    if not cfg["scenario"]:
        raise ValueError("route needs a scenario file (--scenario)")
    scenario = read_json(cfg["scenario"])
    for key in ("topology", "width", "height", "l1", "l2"):
        if key not in scenario:
            raise ValueError(f"scenario lacks required key {key!r}")
    graph = build_lattice(str(scenario["topology"]), int(scenario["width"]),
                          int(scenario["height"]), int(scenario["l1"]),
                          int(scenario["l2"]))
    edges = [tuple(map(tuple, e)) for e in scenario.get("deactivated_edges", [])]
    tiles = [tuple(t) for t in scenario.get("deactivated_tiles", [])]
    if edges or tiles:
        graph = graph.deactivate(edges, tiles)
    timing = TimingParams(speed=cfg["speed"], dot_pitch=cfg["pitch"])
    rows = []
    reachable = 0
    for idx, (src, dst) in enumerate(scenario.get("queries", [])):
        src, dst = tuple(src), tuple(dst)
        route = route_snake(graph, src, dst, timing)
        label = (f"{src[0]}:{src[1]}", f"{dst[0]}:{dst[1]}")
        if route is None:
            rows.append((idx, *label, 0, 0, 0, 0.0))
        else:
            reachable += 1
            rows.append((idx, *label, 1, len(route.edges),
                         route.increments, route.duration))
    write_csv(outdir / "route.csv", ROUTE_SCHEMA, rows, manifest_name)
    write_json(outdir / "route.json", {
        "topology": scenario["topology"], "n_queries": len(rows),
        "reachable": reachable, "manifest": manifest_name,
    })
    return (["route.csv", "route.json"],
            f"route: {reachable}/{len(rows)} queries reachable", 0)


def _run_percolation(cfg, outdir, manifest_name):
    rows = []
    for q in cfg["fraction"]:
        prob = percolation_estimate(cfg["topology"], q, cfg["size"],
                                    cfg["trials"], cfg["seed"], cfg["mode"])
        hits = round(prob * cfg["trials"])
        lo, hi = wilson_interval(hits, cfg["trials"])
        rows.append((cfg["topology"], cfg["mode"], cfg["size"], cfg["trials"],
                     cfg["seed"], q, prob, lo, hi))
    write_csv(outdir / "percolation.csv", PERCOLATION_SCHEMA, rows, manifest_name)
    payload = {"topology": cfg["topology"], "mode": cfg["mode"],
               "size": cfg["size"], "trials": cfg["trials"],
               "manifest": manifest_name}
    summary = f"percolation: {len(rows)} fractions"
    if cfg["threshold"]:
        critical = percolation_threshold(cfg["topology"], cfg["mode"],
                                         cfg["size"], cfg["trials"], cfg["seed"])
        payload["critical_fraction"] = critical
        summary += f", critical fraction {critical:.5f}"
    write_json(outdir / "percolation.json", payload)
    return ["percolation.csv", "percolation.json"], summary, 0


def _fit_rate_models(rate_rows) -> tuple[dict[int, LogLinearRate], dict[int, float]]:
    """Per-distance failure-rate fits and unconditioned rates from a table."""
    post: dict[int, list] = {}
    raw0: dict[int, float] = {}
    for row in rate_rows:
        if row["method"] == "postselected":
            post.setdefault(row["d"], []).append(
                (row["omega"], row["rate"], row["failures"], row["accepted"]))
        elif row["method"] == "raw" and row["omega"] == 0.0:
            raw0[row["d"]] = row["rate"]
    simulated = sorted(set(post) & set(raw0))
    if len(simulated) < 2:
        raise ValueError(
            "rates file needs postselected curves plus raw omega=0 rows "
            "for at least two distances")
    models = {}
    for d in simulated:
        baseline = None
        points = []
        for omega, rate, failures, accepted in sorted(post[d]):
            if omega == 0.0:
                baseline = rate if rate > 0 else (failures + 1) / accepted
            elif rate > 0:
                points.append((omega, rate))
        if baseline is None:
            raise ValueError(f"no postselected omega=0 row for d={d}")
        # fit only the exponential regime; floor-level points flatten it
        grown = [(w, r) for w, r in points if r > 3.0 * baseline]
        if len(grown) >= 2:
            points = grown
        if len(points) < 2:
            raise ValueError(f"d={d}: need two positive postselected rates")
        models[d] = LogLinearRate.from_samples(
            [w for w, _ in points], [r for _, r in points], baseline)
    return models, raw0


def _run_resilience(cfg, outdir, manifest_name):
    for key in ("rates", "gap_density"):
        if not cfg[key]:
            raise ValueError(f"resilience needs --{key.replace('_', '-')}")
    rate_rows = read_table(cfg["rates"], RATE_SCHEMA)
    gap_rows = read_table(cfg["gap_density"], GAP_DENSITY_SCHEMA)
    models, raw0 = _fit_rate_models(rate_rows)
    simulated = sorted(models)

    distances = sorted(set(cfg["d"]))
    models_all = extrapolate_rate_models(models, distances)
    # a raw run that saw zero failures is below MC resolution, not rate zero
    resolved = sorted(d for d, v in raw0.items() if v > 0)
    pl_all = {}
    for d in distances:
        if raw0.get(d, 0.0) > 0:
            pl_all[d] = raw0[d]
        elif len(resolved) >= 2:
            pl_all[d] = float(extrapolate_loglinear(
                resolved, [raw0[d0] for d0 in resolved], d))
        else:
            raise ValueError(
                "need positive raw omega=0 rates for at least two distances")

    gap_cols: dict[int, tuple[list, list]] = {}
    for row in gap_rows:
        grid, dens = gap_cols.setdefault(row["d"], ([], []))
        grid.append(row["omega"])
        dens.append(row["density"])
    gap_dists = {d: AngleDistribution(np.array(g), np.array(v))
                 for d, (g, v) in gap_cols.items()}
    # distances beyond the sampled set reuse the widest simulated filter
    gap_fallback = gap_dists[max(gap_dists)]

    mon_shared = None
    if cfg["mon_density"]:
        rows = read_table(cfg["mon_density"], DENSITY_SCHEMA)
        mon_shared = AngleDistribution(
            np.array([r["omega"] for r in rows]),
            np.array([r["density"] for r in rows]))

    table = []
    per_d = {}
    for d in distances:
        p_mon = mon_shared or postselected_angle_density(MonitorConfig(
            N=d * d, lam=cfg["lam"], omega_max=cfg["omega_max"],
            omega_hat_max=cfg["omega_hat_max"]))
        inputs = ResilienceInputs(
            p_mon=p_mon, p_gap=gap_dists.get(d, gap_fallback),
            rate_model=models_all[d], logical_rate=pl_all[d],
            defect_rate=cfg["rho"], rejection_rate=cfg["rejection"])
        rep = resilience_report(inputs)
        table.append((d, rep["logical_rate"], rep["defect_rate"],
                      rep["rejection_rate"], rep["cutoff_angle"],
                      rep["integral"], rep["ratio"], rep["rejection_term"],
                      rep["defect_term"], rep["subdominant_bound"],
                      rep["total"]))
        model = models_all[d]
        rep.update(slope=model.slope, intercept=model.intercept,
                   baseline=model.baseline, extrapolated=d not in simulated)
        per_d[str(d)] = rep
    ratios = [row[6] for row in table]
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    write_csv(outdir / "resilience.csv", RESILIENCE_SCHEMA, table, manifest_name)
    write_json(outdir / "resilience.json", {
        "per_distance": per_d, "distances": distances,
        "simulated_distances": simulated, "ratio_decreasing": decreasing,
        "rates_file": str(Path(cfg["rates"]).resolve()),
        "gap_density_file": str(Path(cfg["gap_density"]).resolve()),
        "manifest": manifest_name,
    })
    summary = (f"resilience: max integral/P_L ratio {max(ratios):.3e}, "
               f"decreasing={decreasing}")
    return ["resilience.csv", "resilience.json"], summary, 0


_RUNNERS = {
    "threshold": _run_threshold,
    "gap-stats": _run_gap_stats,
    "postselect": _run_postselect,
    "monitor": _run_monitor,
    "dephasing": _run_dephasing,
    "surgery-verify": _run_surgery_verify,
    "route": _run_route,
    "percolation": _run_percolation,
    "resilience": _run_resilience,
}


def _execute(sub: str, cfg: dict, outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_name = f"{sub.replace('-', '_')}_manifest.json"
    outputs, summary, code = _RUNNERS[sub](cfg, outdir, manifest_name)
    manifest = RunManifest(
        subcommand=sub, config=cfg, seed=int(cfg.get("seed", 0)),
        version=__version__,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        outputs=tuple(outputs),
    )
    write_manifest(outdir / manifest_name, manifest)
    print(summary)
    return code


# ----------------------------------------------------------------------
# argument parsing


def _add_common(sp, workers=False):
    sp.add_argument("--out", default="results", help="output directory")
    sp.add_argument("--config", default=None,
                    help="key-value or JSON config file; flags override it")
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    if workers:
        sp.add_argument("--workers", type=int, default=None,
                        help="process count; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snakeqec",
        description="Mobile snake-code experiments with reproducible artifacts.")
    parser.add_argument("--version", action="version",
                        version=f"snakeqec {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("threshold", help="locate the defect-angle threshold")
    sp.add_argument("--d", help="comma-separated odd distances")
    sp.add_argument("--p", type=float, default=None, help="physical error rate")
    sp.add_argument("--omega", help="comma-separated defect angles")
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--confidence", type=float, default=None)
    _add_common(sp, workers=True)

    sp = sub.add_parser("gap-stats", help="gap histograms and rejection rates")
    sp.add_argument("--d", help="comma-separated odd distances")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--omega", type=float, default=None,
                    help="defect angle for the histogram")
    sp.add_argument("--omega-grid", dest="omega_grid",
                    help="angles for the accepted-angle density")
    sp.add_argument("--gmin", default=None,
                    help="gap cut: zero, half, half-plus or an integer")
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--density", action=argparse.BooleanOptionalAction,
                    default=None, help="also sample the accepted-angle density")
    _add_common(sp, workers=True)

    sp = sub.add_parser("postselect", help="gap-conditioned logical rates")
    sp.add_argument("--d", help="comma-separated odd distances")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--omega", help="comma-separated defect angles")
    sp.add_argument("--gmin", default=None)
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--raw", action=argparse.BooleanOptionalAction,
                    default=None, help="include unconditioned rows")
    _add_common(sp, workers=True)

    sp = sub.add_parser("monitor", help="link-monitor detection and estimation")
    sp.add_argument("--N", type=int, default=None, help="monitor ensemble size")
    sp.add_argument("--lam", type=float, default=None, help="noise strength")
    sp.add_argument("--omega", help="angles for the RMS table")
    sp.add_argument("--omega-max", dest="omega_max", type=float, default=None)
    sp.add_argument("--omega-hat-max", dest="omega_hat_max", type=float,
                    default=None)
    sp.add_argument("--nu", type=int, default=None)
    sp.add_argument("--batch", type=int, default=None, help="split-batch size")
    sp.add_argument("--rms", action=argparse.BooleanOptionalAction,
                    default=None)
    _add_common(sp)

    sp = sub.add_parser("dephasing", help="shuttling dephasing curves")
    sp.add_argument("--encoding", choices=("LD", "ST", "both"), default=None)
    sp.add_argument("--separation", help="comma-separated pair separations (m)")
    sp.add_argument("--speed", help="comma-separated speeds (m/s)")
    sp.add_argument("--corr-length", dest="corr_length", type=float,
                    default=None)
    sp.add_argument("--corr-time", dest="corr_time", type=float, default=None)
    sp.add_argument("--coupling", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None,
                    help="also sample the sheet this many times per point")
    _add_common(sp)

    sp = sub.add_parser("surgery-verify",
                        help="exact checks of the merge/split protocols")
    sp.add_argument("--phi", help="comma-separated defect angles")
    sp.add_argument("--states", type=int, default=None,
                    help="random input states per check")
    sp.add_argument("--heads", type=int, default=None,
                    help="largest multi-head register to verify")
    sp.add_argument("--tol", type=float, default=None)
    _add_common(sp)

    sp = sub.add_parser("route", help="shortest active route on a latticework")
    sp.add_argument("--scenario", default=None,
                    help="JSON lattice + defect + query description")
    sp.add_argument("--speed", type=float, default=None)
    sp.add_argument("--pitch", type=float, default=None)
    _add_common(sp)

    sp = sub.add_parser("percolation", help="spanning probability under defects")
    sp.add_argument("--topology", default=None,
                    choices=("square", "hexagonal", "rectangular"))
    sp.add_argument("--mode", default=None, choices=("bond", "site"))
    sp.add_argument("--size", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--fraction", help="comma-separated deactivation fractions")
    sp.add_argument("--threshold", action=argparse.BooleanOptionalAction,
                    default=None, help="also locate the critical fraction")
    _add_common(sp)

    sp = sub.add_parser("resilience",
                        help="end-to-end defect resilience from saved tables")
    sp.add_argument("--rates", default=None, help="rate CSV from postselect")
    sp.add_argument("--gap-density", dest="gap_density", default=None,
                    help="accepted-angle density CSV from gap-stats")
    sp.add_argument("--mon-density", dest="mon_density", default=None,
                    help="monitor density CSV; default derives N=d*d per distance")
    sp.add_argument("--d", help="comma-separated distances to report")
    sp.add_argument("--lam", type=float, default=None)
    sp.add_argument("--rho", type=float, default=None,
                    help="post-monitoring defect probability")
    sp.add_argument("--rejection", type=float, default=None,
                    help="gap rejection rate entering the resummation")
    sp.add_argument("--omega-max", dest="omega_max", type=float, default=None)
    sp.add_argument("--omega-hat-max", dest="omega_hat_max", type=float,
                    default=None)
    _add_common(sp)

    sp = sub.add_parser("replay", help="re-run a manifest bit for bit")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", default="results", help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "replay":
            manifest = read_manifest(args.manifest)
            if manifest.subcommand not in _RUNNERS:
                raise ValueError(
                    f"manifest names unknown subcommand {manifest.subcommand!r}")
            cfg = coerce_config(manifest.subcommand, manifest.config)
            return _execute(manifest.subcommand, cfg, Path(args.out))
        cfg = _resolve(args.subcommand, args)
        return _execute(args.subcommand, cfg, Path(args.out))
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
