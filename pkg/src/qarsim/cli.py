"""Command-line front end: config ingestion, experiment runs, CSV/JSON output.

Config files are flat ``key = value`` text with dotted paths::

    model.kind = crossed_effective
    model.crossed.nu_hz = 5.0e6
    model.crossed.delta_hz = 1.0e8
    sweep.axis1.path = model.crossed.kappa_b_hz

Unit handling happens exactly once, at ingestion: ``*_hz`` keys are cyclic
frequencies (multiplied by 2*pi), ``*_k`` kelvin, ``*_m`` metres (mirror
offsets, converted to misalignment angles via d*omega/c), ``*_qps``
quanta per second.  With ``units = natural`` the numeric values are taken
as-is (hbar = k_B = 1) and metre keys are rejected.

Verbs: ``steady``, ``sweep``, ``evolve``, ``diagnose``, ``compare``,
``validate-config``.  Exit codes: 0 success, 2 config error, 3 solver
failure, 4 memory pre-flight rejection.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, analytics, models, solvers

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class MemoryBudgetError(RuntimeError):
    """Estimated solver memory exceeds the configured budget."""


# schema: key -> (type, default); None default means required-if-used
_COMMON_KEYS = {
    "units": (str, "si"),
    "model.kind": (str, None),
    "model.tier": (str, ""),
    "threads": (int, 0),
    "seed": (int, 0),
    "solver.method": (str, "auto"),
    "solver.rtol": (float, 1e-10),
    "solver.maxiter": (int, 2000),
    "solver.memory_budget_gib": (float, 8.0),
    "solver.lu_fill_factor": (float, 30.0),
    "output.json_summary": (bool, False),
    "evolve.t_end_s": (float, 0.0),
    "evolve.points": (int, 200),
    "evolve.n0": (float, 0.0),
    "evolve.rtol": (float, 1e-8),
    "compare.t_end_s": (float, 0.0),
    "compare.points": (int, 40),
    "compare.n0": (float, 1.0),
    "compare.include_full": (bool, False),
    "diagnose.threshold": (float, 0.1),
}
_SINGLE_KEYS = {
    "model.single.nu_hz": (float, None),
    "model.single.epsilon_hz": (float, None),
    "model.single.g_hz": (float, None),
    "model.single.eta": (float, None),
    "model.single.lambda_qps": (float, 0.0),
    "model.single.kappa_hz": (float, None),
    "model.single.nbar_b": (float, None),
    "model.single.nbar_a_inv": (float, 0.0),
    "model.single.nbar_sigma": (float, 0.0),
    "model.single.gamma_hz": (float, None),
    "model.single.quadrature_points": (int, 100),
    "model.single.d_phonon": (int, None),
    "model.single.d_photon": (int, None),
}
_CROSSED_KEYS = {
    "model.crossed.nu_hz": (float, None),
    "model.crossed.epsilon_hz": (float, None),
    "model.crossed.delta_hz": (float, None),
    # g_hz / kappa_hz set both cavities at once (sweep-friendly); the
    # per-cavity keys win when both forms are present
    "model.crossed.g_hz": (float, float("nan")),
    "model.crossed.kappa_hz": (float, float("nan")),
    "model.crossed.g_b_hz": (float, float("nan")),
    "model.crossed.g_c_hz": (float, float("nan")),
    "model.crossed.eta": (float, None),
    "model.crossed.d_b_m": (float, 0.0),
    "model.crossed.d_c_m": (float, 0.0),
    "model.crossed.delta_b_rad": (float, float("nan")),
    "model.crossed.delta_c_rad": (float, float("nan")),
    "model.crossed.kappa_b_hz": (float, float("nan")),
    "model.crossed.kappa_c_hz": (float, float("nan")),
    "model.crossed.lambda_qps": (float, 0.0),
    "model.crossed.gamma_hz": (float, None),
    "model.crossed.t_h_k": (float, None),
    "model.crossed.t_r_k": (float, None),
    "model.crossed.nbar_a_inv": (float, float("nan")),
    "model.crossed.quadrature_points": (int, 100),
    "model.crossed.d_phonon": (int, None),
    "model.crossed.d_photon_b": (int, None),
    "model.crossed.d_photon_c": (int, None),
}
_SWEEP_AXIS_KEYS = ("path", "min", "max", "count", "scale")


def _sweep_schema():
    out = {}
    for axis in ("sweep.axis1", "sweep.axis2"):
        out[f"{axis}.path"] = (str, "")
        out[f"{axis}.min"] = (float, 0.0)
        out[f"{axis}.max"] = (float, 0.0)
        out[f"{axis}.count"] = (int, 1)
        out[f"{axis}.scale"] = (str, "linear")
    return out


SCHEMA = {**_COMMON_KEYS, **_SINGLE_KEYS, **_CROSSED_KEYS, **_sweep_schema()}


def _coerce(key: str, text: str, lineno: int):
    typ, _ = SCHEMA[key]
    try:
        if typ is bool:
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        return typ(text)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None


def parse_config(path: str) -> dict:
    """Read a flat dotted-key config file into a raw (pre-conversion) dict."""
    raw = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = _coerce(key, value, lineno)
    return raw


def resolve_defaults(raw: dict) -> dict:
    """Materialize every schema default relevant to the declared model."""
    kind = raw.get("model.kind")
    if kind not in ("single", "crossed_full", "crossed_effective"):
        raise ConfigError(f"model.kind must be single|crossed_full|crossed_effective, got {kind!r}")
    keys = dict(_COMMON_KEYS)
    keys.update(_SINGLE_KEYS if kind == "single" else _CROSSED_KEYS)
    keys.update(_sweep_schema())
    resolved = {}
    for key, (_, default) in sorted(keys.items()):
        if key in raw:
            resolved[key] = raw[key]
        elif default is not None:
            resolved[key] = default
        else:
            raise ConfigError(f"missing required key {key!r}")
    extra = set(raw) - set(keys)
    if extra:
        raise ConfigError(f"keys not applicable to model.kind={kind}: {sorted(extra)}")
    return resolved


def _freq(value: float, natural: bool) -> float:
    return value if natural else TWO_PI * value


def build_params(cfg: dict):
    """Convert a resolved config into a params dataclass (units applied here)."""
    natural = cfg["units"] == "natural"
    if cfg["units"] not in ("si", "natural"):
        raise ConfigError(f"units must be si|natural, got {cfg['units']!r}")
    units = models.NATURAL if natural else models.SI
    kind = cfg["model.kind"]
    try:
        if kind == "single":
            tier = models.SingleCavityTier(cfg["model.tier"] or "lda_rwa")
            return models.SingleCavityParams(
                nu=_freq(cfg["model.single.nu_hz"], natural),
                epsilon=_freq(cfg["model.single.epsilon_hz"], natural),
                g=_freq(cfg["model.single.g_hz"], natural),
                eta=cfg["model.single.eta"],
                lam=cfg["model.single.lambda_qps"],
                kappa=_freq(cfg["model.single.kappa_hz"], natural),
                nbar_b=cfg["model.single.nbar_b"],
                gamma_sp=_freq(cfg["model.single.gamma_hz"], natural),
                d_phonon=cfg["model.single.d_phonon"],
                d_photon=cfg["model.single.d_photon"],
                tier=tier,
                nbar_a_inv=cfg["model.single.nbar_a_inv"],
                nbar_sigma=cfg["model.single.nbar_sigma"],
                quadrature_points=cfg["model.single.quadrature_points"],
                units=units,
            )
        default_tier = ("full_with_atom" if kind == "crossed_full"
                        else "effective_large_delta")
        tier = models.CrossedTier(cfg["model.tier"] or default_tier)
        epsilon = _freq(cfg["model.crossed.epsilon_hz"], natural)
        omega_c = epsilon + _freq(cfg["model.crossed.delta_hz"], natural)
        omega_b = omega_c - _freq(cfg["model.crossed.nu_hz"], natural)

        def misalignment(which, omega):
            direct = cfg[f"model.crossed.delta_{which}_rad"]
            mirror = cfg[f"model.crossed.d_{which}_m"]
            if not math.isnan(direct):
                return direct
            if natural and mirror != 0.0:
                raise ConfigError(
                    f"model.crossed.d_{which}_m needs SI units; "
                    f"use delta_{which}_rad in natural mode")
            return mirror * omega / models.C0

        def per_cavity(which: str, quantity: str) -> float:
            value = cfg[f"model.crossed.{quantity}_{which}_hz"]
            if math.isnan(value):
                value = cfg[f"model.crossed.{quantity}_hz"]
            if math.isnan(value):
                raise ConfigError(
                    f"set model.crossed.{quantity}_{which}_hz or "
                    f"model.crossed.{quantity}_hz")
            return value

        nbar_a_inv = cfg["model.crossed.nbar_a_inv"]
        return models.CrossedCavityParams(
            nu=_freq(cfg["model.crossed.nu_hz"], natural),
            epsilon=epsilon,
            omega_c=omega_c,
            g_b=_freq(per_cavity("b", "g"), natural),
            g_c=_freq(per_cavity("c", "g"), natural),
            eta=cfg["model.crossed.eta"],
            delta_b=misalignment("b", omega_b),
            delta_c=misalignment("c", omega_c),
            kappa_b=_freq(per_cavity("b", "kappa"), natural),
            kappa_c=_freq(per_cavity("c", "kappa"), natural),
            lam=cfg["model.crossed.lambda_qps"],
            gamma_sp=_freq(cfg["model.crossed.gamma_hz"], natural),
            t_h=cfg["model.crossed.t_h_k"],
            t_r=cfg["model.crossed.t_r_k"],
            d_phonon=cfg["model.crossed.d_phonon"],
            d_photon_b=cfg["model.crossed.d_photon_b"],
            d_photon_c=cfg["model.crossed.d_photon_c"],
            tier=tier,
            nbar_a_inv=None if math.isnan(nbar_a_inv) else nbar_a_inv,
            quadrature_points=cfg["model.crossed.quadrature_points"],
            units=units,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None


def build_model(cfg: dict):
    params = build_params(cfg)
    kind = cfg["model.kind"]
    if kind == "single":
        return models.build_single_cavity(params)
    if kind == "crossed_full":
        return models.build_crossed_full(params)
    return models.build_crossed_effective(params)


def estimate_memory_bytes(cfg: dict) -> int:
    """Pre-flight estimate: superoperator nonzeros x 16 bytes x LU fill factor.

    The recoil channel is dense across the phonon pair, which dominates the
    count for the atom-retaining models; ladder-type channels contribute a
    few entries per superoperator row.
    """
    kind = cfg["model.kind"]
    if kind == "single":
        d_ph = cfg["model.single.d_phonon"]
        d_rest = cfg["model.single.d_photon"]  # photon factor; atom adds nnz 1
        dim = d_ph * d_rest * 2
        recoil = (d_ph ** 2 * d_rest) ** 2 if cfg["model.single.eta"] > 0 \
            else dim * dim
        nnz = 14 * dim * dim + recoil
    else:
        d_ph = cfg["model.crossed.d_phonon"]
        d_rest = cfg["model.crossed.d_photon_b"] * cfg["model.crossed.d_photon_c"]
        if kind == "crossed_full":
            dim = d_ph * d_rest * 2
            recoil = (d_ph ** 2 * d_rest) ** 2 if cfg["model.crossed.eta"] > 0 \
                else dim * dim
            nnz = 16 * dim * dim + recoil
        else:
            dim = d_ph * d_rest
            nnz = 16 * dim * dim
    n = dim * dim
    method = cfg["solver.method"]
    dense_rows = nnz > solvers.DIRECT_DENSITY_CUTOFF * n
    if method == "dense" or (method == "auto" and dim <= solvers.DENSE_CUTOFF):
        return 16 * n * n
    if method == "iterative" or (method == "auto" and dense_rows):
        return int(16 * nnz * 10)  # assembled matrix + capped ILU fill
    return int(16 * nnz * cfg["solver.lu_fill_factor"])


def preflight(cfg: dict):
    budget = cfg["solver.memory_budget_gib"] * 2 ** 30
    estimate = estimate_memory_bytes(cfg)
    if estimate > budget:
        raise MemoryBudgetError(
            f"estimated solver memory {estimate / 2**30:.2f} GiB exceeds "
            f"budget {cfg['solver.memory_budget_gib']:.2f} GiB")


def _thread_count(cfg: dict, flag: int | None) -> int:
    if cfg.get("threads", 0) > 0:
        return cfg["threads"]
    if flag is not None and flag > 0:
        return flag
    env = os.environ.get("QARSIM_THREADS", "")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"QARSIM_THREADS must be an integer, got {env!r}") from None
        if n > 0:
            return n
    return 1


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def provenance_lines(cfg: dict, verb: str, threads: int) -> list[str]:
    lines = [f"# qarsim {__version__}", f"# verb = {verb}",
             f"# effective_threads = {threads}"]
    for key in sorted(cfg):
        lines.append(f"# {key} = {_fmt(cfg[key])}")
    return lines


def write_csv(out, prov: list[str], header: list[str], rows: list[list]):
    buf = io.StringIO()
    for line in prov:
        buf.write(line + "\r\n")
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    data = buf.getvalue()
    if out is None:
        sys.stdout.write(data)
    else:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(data)


def write_json(out, payload: dict):
    data = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    if out is None:
        sys.stdout.write(data)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(data)


# ---------------------------------------------------------------------------
# verbs


def _steady_point(cfg: dict) -> dict:
    build = build_model(cfg)
    result = solvers.steady_state(build.generator, method=cfg["solver.method"],
                                  rtol=cfg["solver.rtol"],
                                  maxiter=cfg["solver.maxiter"])
    out = {}
    for name, op in build.observables.items():
        out[name] = result.expectation(op)
    currents = solvers.stationary_currents(build, result.rho)
    for label, value in currents.items():
        out[f"current_{label}"] = value
    out["residual"] = result.residual
    out["trace_defect"] = result.trace_defect
    out["min_eigenvalue"] = result.min_eigenvalue
    out["method"] = result.method
    return out


def _observable_columns(cfg: dict) -> list[str]:
    kind = cfg["model.kind"]
    if kind == "single":
        obs = ["n_a", "n_b", "p_up"]
        channels = ["a", "b", "sigma"]
    elif kind == "crossed_full":
        obs = ["n_a", "n_b", "n_c", "p_up"]
        channels = ["a", "b", "c", "sigma"]
    else:
        obs = ["n_a", "n_b", "n_c"]
        channels = ["a", "b", "c", "se"]
    return obs + [f"current_{c}" for c in channels] \
        + ["residual", "trace_defect", "min_eigenvalue", "method"]


def run_steady(cfg: dict, out, fmt: str, threads: int) -> int:
    preflight(cfg)
    t0 = time.monotonic()
    point = _steady_point(cfg)
    wall = time.monotonic() - t0
    cols = _observable_columns(cfg)
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "steady", "result": point,
                         "wall_time_s": wall})
    else:
        write_csv(out, provenance_lines(cfg, "steady", threads), cols,
                  [[point[c] for c in cols]])
    return 0


def _axes(cfg: dict):
    axes = []
    for name in ("sweep.axis1", "sweep.axis2"):
        path = cfg[f"{name}.path"]
        if not path:
            continue
        if path not in SCHEMA or SCHEMA[path][0] not in (float, int):
            raise ConfigError(f"{name}.path {path!r} is not a numeric config key")
        count = cfg[f"{name}.count"]
        if count < 1:
            raise ConfigError(f"{name}.count must be >= 1")
        lo, hi = cfg[f"{name}.min"], cfg[f"{name}.max"]
        scale = cfg[f"{name}.scale"]
        if scale == "linear":
            values = np.linspace(lo, hi, count)
        elif scale == "log":
            if lo <= 0 or hi <= 0:
                raise ConfigError(f"{name}: log scale needs positive bounds")
            values = np.geomspace(lo, hi, count)
        else:
            raise ConfigError(f"{name}.scale must be linear|log, got {scale!r}")
        if count == 1:
            values = np.array([lo])
        axes.append((path, [float(v) for v in values]))
    if not axes:
        raise ConfigError("sweep requires at least sweep.axis1.path")
    return axes


def _sweep_worker(args):
    cfg, overrides = args
    local = dict(cfg)
    local.update(overrides)
    try:
        return _steady_point(local), ""
    except Exception as exc:  # per-row capture, sweep continues
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: dict, out, fmt: str, threads: int) -> int:
    axes = _axes(cfg)
    preflight(cfg)
    grid = [{}]
    for path, values in axes:
        grid = [dict(g, **{path: v}) for g in grid for v in values]
    tasks = [(cfg, overrides) for overrides in grid]
    t0 = time.monotonic()
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]
    wall = time.monotonic() - t0
    cols = [path for path, _ in axes] + _observable_columns(cfg) + ["error"]
    rows = []
    for overrides, (point, err) in zip(grid, results):
        row = [overrides[path] for path, _ in axes]
        if point is None:
            row += [""] * len(_observable_columns(cfg)) + [err]
        else:
            row += [point[c] for c in _observable_columns(cfg)] + [""]
        rows.append(row)
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "sweep", "columns": cols,
                         "rows": rows, "wall_time_s": wall})
    else:
        write_csv(out, provenance_lines(cfg, "sweep", threads), cols, rows)
    return 0


def _initial_state(build, n0: float) -> np.ndarray:
    """Product state: phonon thermal with mean n0, everything else ground."""
    blocks = []
    for factor in build.space.factors:
        d = factor.dim
        pops = np.zeros(d)
        if factor.label == "a" and n0 > 0:
            ratio = n0 / (1.0 + n0)
            pops = ratio ** np.arange(d)
            pops /= pops.sum()
        else:
            pops[0] = 1.0
        blocks.append(np.diag(pops).astype(complex))
    state = blocks[0]
    for block in blocks[1:]:
        state = np.kron(state, block)
    return state


def run_evolve(cfg: dict, out, fmt: str, threads: int) -> int:
    preflight(cfg)
    t_end = cfg["evolve.t_end_s"]
    if t_end <= 0:
        raise ConfigError("evolve.t_end_s must be positive")
    build = build_model(cfg)
    rho0 = _initial_state(build, cfg["evolve.n0"])
    times = np.linspace(0.0, t_end, cfg["evolve.points"])
    traj = solvers.evolve(build.generator, rho0, times, build.observables,
                          rtol=cfg["evolve.rtol"])
    names = sorted(traj.expectations)
    rows = [[t] + [traj.expectations[n][i] for n in names]
            for i, t in enumerate(traj.times)]
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "evolve",
                         "times": list(map(float, traj.times)),
                         "expectations": {n: list(map(float, traj.expectations[n]))
                                          for n in names},
                         "trace_drift": traj.trace_drift})
    else:
        write_csv(out, provenance_lines(cfg, "evolve", threads),
                  ["time_s"] + names, rows)
    return 0


def run_diagnose(cfg: dict, out, fmt: str, threads: int) -> int:
    if cfg["model.kind"] == "single":
        raise ConfigError("diagnose applies to crossed-cavity models")
    params = build_params(cfg)
    report = models.regime_diagnostics(params, threshold=cfg["diagnose.threshold"])
    rows = [[c.name, c.ratio, report.threshold, c.passed]
            for c in report.conditions]
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "diagnose",
                         "threshold": report.threshold,
                         "all_pass": report.all_pass,
                         "conditions": {c.name: {"ratio": c.ratio,
                                                 "passed": c.passed}
                                        for c in report.conditions}})
    else:
        write_csv(out, provenance_lines(cfg, "diagnose", threads),
                  ["condition", "ratio", "threshold", "passed"], rows)
    return 0


def run_compare(cfg: dict, out, fmt: str, threads: int) -> int:
    """Cross-validate simulation against the closed-form relaxation law.

    Evolves the effective model, fits the exponential approach of the phonon
    population, and compares rate and plateau with the analytic predictions;
    optionally also solves the atom-retaining model for its stationary n_a.
    """
    if cfg["model.kind"] == "single":
        raise ConfigError("compare applies to crossed-cavity models")
    preflight(cfg)
    eff_cfg = dict(cfg)
    eff_cfg["model.kind"] = "crossed_effective"
    if cfg["model.tier"] in ("", "full_with_atom"):
        eff_cfg["model.tier"] = "effective_large_delta"
    params = build_params(eff_cfg)
    gamma_pred = analytics.cooling_rate(params)
    n_inf_pred = analytics.phonon_steady(params)

    build = models.build_crossed_effective(params)
    steady = solvers.steady_state(build.generator, method=cfg["solver.method"],
                                  rtol=cfg["solver.rtol"],
                                  maxiter=cfg["solver.maxiter"])
    n_a = steady.expectation(build.observables["n_a"])

    t_end = cfg["compare.t_end_s"]
    if t_end <= 0:
        t_end = 5.0 / gamma_pred
    rho0 = _initial_state(build, cfg["compare.n0"])
    times = np.linspace(0.0, t_end, cfg["compare.points"])
    traj = solvers.evolve(build.generator, rho0, times,
                          {"n_a": build.observables["n_a"]},
                          rtol=cfg["evolve.rtol"])
    fit = analytics.fit_exponential_relaxation(traj.times,
                                               traj.expectations["n_a"])
    point = {
        "fitted_gamma": fit.gamma_cool,
        "analytic_gamma": gamma_pred,
        "gamma_rel_err": abs(fit.gamma_cool - gamma_pred) / gamma_pred,
        "steady_n_a": n_a,
        "analytic_n_inf": n_inf_pred,
        "n_a_rel_err": abs(n_a - n_inf_pred) / n_inf_pred
        if n_inf_pred > 0 else float("nan"),
        "residual": steady.residual,
    }
    if cfg["compare.include_full"]:
        full_cfg = dict(cfg)
        full_cfg["model.kind"] = "crossed_full"
        full_cfg["model.tier"] = "full_with_atom"
        fb = build_model(full_cfg)
        fr = solvers.steady_state(fb.generator, method=cfg["solver.method"],
                                  rtol=cfg["solver.rtol"],
                                  maxiter=cfg["solver.maxiter"])
        full_na = fr.expectation(fb.observables["n_a"])
        point["full_n_a"] = full_na
        point["full_vs_eff_rel_err"] = abs(full_na - n_a) / full_na
    cols = list(point)
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "compare", "result": point})
    else:
        write_csv(out, provenance_lines(cfg, "compare", threads), cols,
                  [[point[c] for c in cols]])
    return 0


def run_validate(cfg: dict, out, fmt: str, threads: int) -> int:
    build_params(cfg)  # full validation, including derived quantities
    if fmt == "json":
        write_json(out, {"config": cfg, "verb": "validate-config", "valid": True})
    else:
        lines = provenance_lines(cfg, "validate-config", threads)
        text = "\n".join(line[2:] for line in lines) + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
    return 0


_VERBS = {
    "steady": run_steady,
    "sweep": run_sweep,
    "evolve": run_evolve,
    "diagnose": run_diagnose,
    "compare": run_compare,
    "validate-config": run_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qarsim",
        description="Cavity-QED absorption refrigerator simulator")
    parser.add_argument("verb", choices=sorted(_VERBS))
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--threads", type=int, default=None,
                        help="sweep worker count (config key wins)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)

    try:
        raw = parse_config(args.config)
        cfg = resolve_defaults(raw)
        threads = _thread_count(cfg, args.threads)
        return _VERBS[args.verb](cfg, args.out, args.format, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MemoryBudgetError as exc:
        print(f"memory pre-flight: {exc}", file=sys.stderr)
        return 4
    except (solvers.SteadyStateError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
