"""Experiment drivers: one dataset per figure, plus verify and maps.

Every experiment resolves its parameters from flat key-value strings,
computes through the library modules (with heavy stages cached), and
emits CSV files plus a JSON metadata record.  CSV content is a pure
function of the resolved parameters, so repeated runs are bit-identical;
metadata carries provenance (resolved config, package version, wall
time, cache statistics) and is allowed to differ between runs.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .appendix_boson import BosonCoupledSpec, coupling_sweep, write_sweep_csv
from .cache import cache_key, load as cache_load, resolve_cache_dir, store
from .config import parse_int, parse_number
from .dynamics import coherent_state, default_time_grid, evolve, \
    max_qfi_scan, qfi_timeseries
from .errors import ConfigError
from .hamiltonian import CONFIG_FIELDS, spec_from_mapping
from .husimi import default_quadrature, husimi_map, localization_series
from .metrology import default_echo_times, error_size_scan, error_time_scan, \
    write_size_scan_csv, write_time_scan_csv
from .spectrum import EigenScanRecord, eigenstate_qfi_scan
from .verify import all_passed, format_table, run_verification

log = logging.getLogger("scarsim")

SPEC_DEFAULTS = {"d": "1", "L": "10", "gamma": "2", "lambda": "1",
                 "perturbation": "0"}

EXPERIMENT_DEFAULTS = {
    "fig1": {"N": "8", "omega": "2", "eta": "pi/2", "perturbation": "1e-5"},
    "fig2": {"N": "8", "omega": "0", "chi": "2"},
    "fig3": {"omega": "0", "chi": "2"},
    "fig4": {"chi": "2"},
    "verify": {},
    "husimi-map": {"N": "6", "omega": "0", "chi": "2", "eta": "pi/2"},
    "appendix": {"N": "4", "omega": "0", "eta": "pi/2", "chi": "0"},
}

EXTRA_KEYS = {
    "fig1": frozenset(),
    "fig2": frozenset({"n_times"}),
    "fig3": frozenset({"n_list", "n_times"}),
    "fig4": frozenset({"n_list", "n_times"}),
    "verify": frozenset({"seed"}),
    "husimi-map": frozenset({"snapshot_t"}),
    "appendix": frozenset({"omega_a", "n_max", "J_list"}),
}


class ExperimentContext:
    """Output tracking, caching, and provenance for one run."""

    def __init__(self, out_dir, cache_dir=None, threads: int = 1):
        self.out_dir = Path(out_dir)
        self.cache_dir = resolve_cache_dir(cache_dir)
        self.threads = max(1, int(threads))
        self.files: list[Path] = []
        self.resolved: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0

    def cached(self, task: dict, compute):
        key = cache_key(task)
        arrays = cache_load(self.cache_dir, key)
        if arrays is not None:
            self.hits += 1
            log.info("cache hit  %s (%s)", key[:12], task.get("experiment"))
            return arrays
        self.misses += 1
        log.info("cache miss %s (%s)", key[:12], task.get("experiment"))
        arrays = compute()
        store(self.cache_dir, key, arrays, task)
        return arrays

    def emit(self, name: str) -> Path:
        path = self.out_dir / name
        self.files.append(path)
        return path

    def pmap(self, fn, items):
        items = list(items)
        if self.threads <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))


def _resolve_mapping(params: dict, experiment: str, **forced) -> dict:
    mapping = dict(SPEC_DEFAULTS)
    mapping.update(EXPERIMENT_DEFAULTS[experiment])
    for key in CONFIG_FIELDS:
        if key in params:
            mapping[key] = params[key]
    mapping.update(forced)
    missing = [k for k in CONFIG_FIELDS if k not in mapping]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    return {k: mapping[k] for k in CONFIG_FIELDS}


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse n_list {text!r}") from None
    if not values:
        raise ConfigError("n_list is empty")
    return values


def _eta_tag(eta_text: str) -> str:
    return "".join(ch for ch in eta_text if ch.isalnum())


def _eta_choices(params: dict) -> list[str]:
    return [params["eta"]] if "eta" in params else ["0", "pi/2"]


def _write_rows_csv(path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float)
                              else str(v) for v in row) + "\n")


def run_fig1(params: dict, ctx: ExperimentContext) -> bool:
    chis = [params["chi"]] if "chi" in params else ["0", "2"]
    for chi_text in chis:
        mapping = _resolve_mapping(params, "fig1", chi=chi_text)
        spec = spec_from_mapping(mapping)
        ctx.resolved[f"chi={chi_text}"] = mapping
        task = {"experiment": "fig1", **mapping}

        def compute():
            record = eigenstate_qfi_scan(spec)
            return {"energies": record.energies,
                    "qfi_densities": record.qfi_densities,
                    "scar_overlaps": record.scar_overlaps,
                    "sector": np.array(record.sector)}

        arrays = ctx.cached(task, compute)
        record = EigenScanRecord(energies=arrays["energies"],
                                 qfi_densities=arrays["qfi_densities"],
                                 scar_overlaps=arrays["scar_overlaps"],
                                 sector=str(arrays["sector"].item()))
        record.write_csv(ctx.emit(f"fig1_chi{chi_text}.csv"))
    return True


def run_fig2(params: dict, ctx: ExperimentContext) -> bool:
    n_times = parse_int(params.get("n_times", "400"))
    for eta_text in _eta_choices(params):
        mapping = _resolve_mapping(params, "fig2", eta=eta_text)
        spec = spec_from_mapping(mapping)
        ctx.resolved[f"eta={eta_text}"] = mapping
        if spec.chi == 0:
            raise ConfigError("the twisting time grid needs chi != 0")
        times = default_time_grid(spec.N, spec.chi, n_points=n_times)
        task = {"experiment": "fig2", "n_times": n_times, **mapping}

        def compute():
            psi0 = coherent_state(spec.N, math.pi / 2, 0.0)
            traj = evolve(spec, psi0, times)
            return {"times": times,
                    "f": qfi_timeseries(traj),
                    "I": localization_series(traj.states,
                                             default_quadrature(spec.N)),
                    "fidelity": traj.fidelity_series}

        arrays = ctx.cached(task, compute)
        rows = zip(arrays["times"].tolist(), arrays["f"].tolist(),
                   arrays["I"].tolist(), arrays["fidelity"].tolist())
        _write_rows_csv(ctx.emit(f"fig2_eta{_eta_tag(eta_text)}.csv"),
                        "t,f,I,fidelity", rows)
    return True


def run_fig3(params: dict, ctx: ExperimentContext) -> bool:
    n_list = _parse_n_list(params.get("n_list", "4,6,8"))
    n_times = parse_int(params.get("n_times", "400"))
    points = []
    for eta_text in _eta_choices(params):
        for N in n_list:
            mapping = _resolve_mapping(params, "fig3", N=str(N), eta=eta_text)
            ctx.resolved[f"N={N},eta={eta_text}"] = mapping
            points.append((N, eta_text, mapping))

    def one_point(point):
        N, eta_text, mapping = point
        spec = spec_from_mapping(mapping)
        if spec.chi == 0:
            raise ConfigError("the twisting time grid needs chi != 0")
        task = {"experiment": "fig3", "n_times": n_times, **mapping}

        def compute():
            row = max_qfi_scan([spec], n_points=n_times)[0]
            return {"max_f": np.array(row["max_f"]),
                    "argmax_t": np.array(row["argmax_t"])}

        arrays = ctx.cached(task, compute)
        return (N, parse_number(eta_text), float(arrays["max_f"]),
                float(arrays["argmax_t"]))

    rows = ctx.pmap(one_point, points)
    rows.sort(key=lambda row: (row[1], row[0]))
    _write_rows_csv(ctx.emit("fig3.csv"), "N,eta,max_f,argmax_t", rows)
    return True


def run_fig4(params: dict, ctx: ExperimentContext) -> bool:
    n_list = _parse_n_list(params.get("n_list", "4,6"))
    n_times = parse_int(params.get("n_times", "48"))
    chi = parse_number(params.get("chi", EXPERIMENT_DEFAULTS["fig4"]["chi"]))
    if chi == 0:
        raise ConfigError("the echo protocol needs chi != 0")
    times = default_echo_times(chi, n_times)

    def one_curve(point):
        N, eta_text = point
        eta = parse_number(eta_text)
        task = {"experiment": "fig4", "N": N, "eta": eta_text,
                "chi": repr(chi), "n_times": n_times}

        def compute():
            grid, errors = error_time_scan(N, eta, chi=chi, times=times)
            return {"times": grid, "errors": errors}

        return ctx.cached(task, compute)

    for eta_text in _eta_choices(params):
        curves = ctx.pmap(one_curve, [(N, eta_text) for N in n_list])
        eta = parse_number(eta_text)
        tag = _eta_tag(eta_text)
        ctx.resolved[f"eta={eta_text}"] = {"n_list": n_list, "chi": chi,
                                           "n_times": n_times}
        biggest = curves[-1]
        write_time_scan_csv(ctx.emit(f"fig4a_eta{tag}.csv"),
                            biggest["times"], biggest["errors"], eta)
        rows = []
        for N, curve in zip(n_list, curves):
            k = int(np.argmin(curve["errors"]))
            rows.append({"N": N,
                         "min_delta_eps": float(curve["errors"][k]),
                         "argmin_t": float(curve["times"][k]),
                         "eta": eta, "sql": N ** -0.5, "hl": 1.0 / N})
        write_size_scan_csv(ctx.emit(f"fig4b_eta{tag}.csv"), rows)
    return True


def run_verify(params: dict, ctx: ExperimentContext) -> bool:
    seed = parse_int(params.get("seed", "7"))
    results = run_verification(seed)
    table = format_table(results)
    print(table)
    with open(ctx.emit("verify.txt"), "w") as fh:
        fh.write(table + "\n")
    return all_passed(results)


def run_husimi_map(params: dict, ctx: ExperimentContext) -> bool:
    mapping = _resolve_mapping(params, "husimi-map")
    spec = spec_from_mapping(mapping)
    ctx.resolved["spec"] = mapping
    if "snapshot_t" in params:
        snapshot_t = parse_number(params["snapshot_t"])
    elif spec.chi != 0:
        snapshot_t = math.pi * spec.N / (2 * abs(spec.chi))
    else:
        raise ConfigError("snapshot_t is required when chi = 0")
    task = {"experiment": "husimi-map", "snapshot_t": repr(snapshot_t),
            **mapping}

    def compute():
        psi0 = coherent_state(spec.N, math.pi / 2, 0.0)
        if snapshot_t > 0:
            traj = evolve(spec, psi0, np.array([snapshot_t]))
            state = traj.states[:, -1]
        else:
            state = psi0
        return {"rows": husimi_map(state, default_quadrature(spec.N))}

    arrays = ctx.cached(task, compute)
    rows = [tuple(map(float, row)) for row in arrays["rows"]]
    _write_rows_csv(ctx.emit("husimi_map.csv"), "theta,phi,Q", rows)
    return True


def run_appendix(params: dict, ctx: ExperimentContext) -> bool:
    mapping = _resolve_mapping(params, "appendix", chi="0")
    base = spec_from_mapping(mapping)
    ctx.resolved["spec"] = mapping
    omega_a = parse_number(params.get("omega_a", "10"))
    n_max = parse_int(params.get("n_max", "6"))
    J_text = params.get("J_list", "0.02,0.04,0.08")
    try:
        J_values = [float(part) for part in J_text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse J_list {J_text!r}") from None
    if not J_values:
        raise ConfigError("J_list is empty")

    probe = BosonCoupledSpec(base=base, omega_a=omega_a,
                             J=max(J_values, key=abs), n_max=n_max)
    if probe.J != 0:
        t_star = math.pi * base.N / (2 * abs(probe.chi_eff))
    else:
        t_star = 20.0
    times = np.linspace(0.0, t_star, 25)
    task = {"experiment": "appendix", "omega_a": repr(omega_a),
            "n_max": n_max, "J_list": J_text, **mapping}

    def compute():
        rows = coupling_sweep(base, omega_a, J_values, times, n_max=n_max)
        return {name: np.array([row[name] for row in rows])
                for name in ("J", "chi_eff", "residual", "max_infidelity")}

    arrays = ctx.cached(task, compute)
    rows = [{name: float(arrays[name][k])
             for name in ("J", "chi_eff", "residual", "max_infidelity")}
            for k in range(len(J_values))]
    write_sweep_csv(ctx.emit("appendix.csv"), rows)
    return True


RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "verify": run_verify,
    "husimi-map": run_husimi_map,
    "appendix": run_appendix,
}


def run_experiment(experiment: str, params: dict, out_dir,
                   cache_dir=None, threads: int = 1) -> tuple[bool, list]:
    """Run one experiment; returns (ok, files).  Cleans up on failure."""
    if experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from "
                          + ", ".join(sorted(RUNNERS)))
    ctx = ExperimentContext(out_dir, cache_dir, threads)
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    start = time.monotonic()
    try:
        ok = RUNNERS[experiment](params, ctx)
    except BaseException:
        for path in ctx.files:
            Path(path).unlink(missing_ok=True)
        raise
    metadata = {
        "experiment": experiment,
        "params": params,
        "resolved": ctx.resolved,
        "package_version": __version__,
        "wall_time_s": round(time.monotonic() - start, 3),
        "cache": {"hits": ctx.hits, "misses": ctx.misses},
        "files": [Path(p).name for p in ctx.files],
        "ok": ok,
    }
    meta_path = ctx.emit(f"{experiment}_metadata.json")
    with open(meta_path, "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ok, ctx.files
