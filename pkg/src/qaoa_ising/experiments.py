"""Named reproduction experiments: configuration, deterministic output, and the runners.

Every experiment writes plot-ready CSV and/or JSON into an output directory.
Floats are printed with 17 significant digits and every CSV row / JSON
document carries a hash of the normalised configuration, so identical
configurations produce byte-identical files.  Wall-clock timestamps go to
the log only.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import dynamics, ed, fermion, gradient, optimize
from .model import ChainSpec, QaoaAngles

log = logging.getLogger(__name__)

OUT_ENV = "QAOA_ISING_OUT"
DEFAULT_OUT = "results"

EXPERIMENTS = ("bound-scan", "regular", "degeneracy", "compare-schedules", "collapse", "field-scan", "validate")
STOCHASTIC = {"degeneracy", "validate"}


class ConfigError(ValueError):
    """Bad or missing configuration; maps to exit code 2."""


# --- parameter parsing -------------------------------------------------------

def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _float(v):
    return float(v)


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _list(conv):
    def parse(v):
        if isinstance(v, (list, tuple)):
            return [conv(x) for x in v]
        return [conv(x) for x in str(v).replace(";", ",").split(",") if x.strip()]
    return parse


# name -> (parser, default); defaults reproduce the published figures
PARAMS = {
    "bound-scan": {
        "n_sites": (_list(_int), "50,8"),
        "p_min": (_int, 1),
        "p_max": (_int, 16),
        "tol_bound": (_float, 1e-6),
        "tol_zero": (_float, 1e-8),
    },
    "regular": {
        "n_sites": (_int, 1024),
        "p_target": (_int, 64),
        "p_start": (_int, 2),
        "random_starts": (_int, 0),
    },
    "degeneracy": {
        "n_sites": (_int, 50),
        "p_list": (_list(_int), "1,2,3"),
        "n_starts": (_list(_int), "200,500,2000"),
        "cluster_tol": (_float, 1e-4),
        "energy_tol": (_float, 1e-7),
    },
    "compare-schedules": {
        "n_sites": (_int, 1024),
        "taus": (_list(_float), "8,16,32,64,128,256,512"),
        "dt_digital": (_float, 1.0),
        "gap_floor_min": (_float, 0.02),
        "gap_floor_max": (_float, 1.0),
        "gap_floor_count": (_int, 12),
        "optimal_p_max": (_int, 256),
    },
    "collapse": {
        "n_sites": (_int, 1024),
        "p_max": (_int, 64),
        "window_lo": (_float, 0.25),
        "window_hi": (_float, 0.75),
    },
    "field-scan": {
        "fields": (_list(_float), "0,0.25,0.5"),
        "p": (_int, 128),
        "n_eval_per_p": (_int, 4),
    },
    "validate": {
        "n_sets": (_int, 10),
        "ed_sizes": (_list(_int), "4,6,8,10"),
        "p_max": (_int, 5),
        "fields": (_list(_float), "0,0.5"),
        "grad_sets": (_int, 20),
        "grad_p_max": (_int, 16),
        "oracle_tol": (_float, 1e-10),
        "grad_tol": (_float, 1e-6),
        "corrupt_rotation_sign": (_bool, False),
    },
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict
    seed: int | None
    out_dir: Path
    threads: int = 1

    def normalized(self) -> dict:
        """Everything that affects results; output location and thread count are excluded."""
        return {"experiment": self.experiment, "seed": self.seed, "params": dict(sorted(self.params.items()))}

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.normalized(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _validate(experiment, params):
    p = params
    for key in ("n_sites",):
        vals = p.get(key)
        if vals is None:
            continue
        for n in vals if isinstance(vals, list) else [vals]:
            if n < 4 or n % 2:
                raise ConfigError(f"{key} must be even and >= 4, got {n}")
    if experiment == "bound-scan" and not 1 <= p["p_min"] <= p["p_max"]:
        raise ConfigError("need 1 <= p_min <= p_max")
    if experiment == "regular":
        try:
            optimize.doubling_levels(p["p_target"], p["p_start"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if p["random_starts"] < 0:
            raise ConfigError("random_starts must be >= 0")
    if experiment == "degeneracy":
        if len(p["p_list"]) != len(p["n_starts"]):
            raise ConfigError("p_list and n_starts must have equal length")
        for depth, n in zip(p["p_list"], p["n_starts"]):
            if not 1 <= depth <= 6:
                raise ConfigError("degeneracy enumeration supports 1 <= P <= 6")
            if 2 * depth >= p["n_sites"]:
                raise ConfigError("degeneracy enumeration needs 2P < n_sites")
            if n < 1:
                raise ConfigError("n_starts must be positive")
    if experiment == "compare-schedules":
        if any(t <= 0 for t in p["taus"]) or len(p["taus"]) < 3:
            raise ConfigError("need at least three positive taus")
        if any(abs(t / p["dt_digital"] - round(t / p["dt_digital"])) > 1e-9 for t in p["taus"]):
            raise ConfigError("every tau must be a multiple of dt_digital")
        if not 0 < p["gap_floor_min"] <= p["gap_floor_max"] or p["gap_floor_count"] < 1:
            raise ConfigError("bad gap-floor grid")
        try:
            optimize.doubling_levels(p["optimal_p_max"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if experiment == "collapse":
        try:
            optimize.doubling_levels(p["p_max"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 <= p["window_lo"] < p["window_hi"] <= 1:
            raise ConfigError("need 0 <= window_lo < window_hi <= 1")
    if experiment == "field-scan":
        if any(h < 0 or h >= 1 for h in p["fields"]):
            raise ConfigError("fields must lie in [0, 1)")
        try:
            optimize.doubling_levels(p["p"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if p["n_eval_per_p"] < 3:
            raise ConfigError("n_eval_per_p must be >= 3 so that 2P < n_eval")
    if experiment == "validate":
        if any(n > ed.MAX_SITES for n in p["ed_sizes"]):
            raise ConfigError(f"ed_sizes capped at {ed.MAX_SITES}")
        if any(n < 4 or n % 2 for n in p["ed_sizes"]):
            raise ConfigError("ed_sizes must be even and >= 4")
        if p["p_max"] < 1 or p["grad_p_max"] < 1 or p["n_sets"] < 1 or p["grad_sets"] < 1:
            raise ConfigError("validate sizes must be positive")


def make_config(experiment, overrides=None, seed=None, out_dir=None, threads=1) -> RunConfig:
    """Resolve defaults, parse overrides and validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    schema = PARAMS[experiment]
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(schema)
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {experiment}: {', '.join(sorted(unknown))}")
    params = {}
    for name, (conv, default) in schema.items():
        raw = overrides.get(name, default)
        try:
            params[name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from None
    _validate(experiment, params)
    if seed is not None:
        try:
            seed = _int(seed)
        except ValueError as exc:
            raise ConfigError(f"seed: {exc}") from None
        if seed < 0:
            raise ConfigError("seed must be non-negative")
    if experiment in STOCHASTIC and seed is None:
        raise ConfigError(f"experiment {experiment} needs a seed")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    out = Path(out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    return RunConfig(experiment, params, seed, out, threads)


def load_config(path=None, experiment=None, seed=None, out_dir=None, threads=None, overrides=None) -> RunConfig:
    """Read an INI file and apply command-line overrides on top.

    The ``[run]`` section may set ``experiment``, ``seed``, ``out`` and
    ``threads``; parameters live in a section named after the experiment.
    """
    file_params = {}
    run = {}
    if path is not None:
        cp = configparser.ConfigParser()
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if cp.has_section("run"):
            run = dict(cp["run"])
        experiment = experiment or run.get("experiment")
        if experiment and cp.has_section(experiment):
            file_params = dict(cp[experiment])
    if not experiment:
        raise ConfigError("no experiment given (--experiment or [run] experiment)")
    file_params.update(overrides or {})
    seed = seed if seed is not None else run.get("seed")
    out_dir = out_dir or run.get("out")
    if threads is None:
        try:
            threads = _int(run.get("threads", 1))
        except ValueError as exc:
            raise ConfigError(f"threads: {exc}") from None
    return make_config(experiment, file_params, seed, out_dir, threads)


# --- deterministic writers ---------------------------------------------------

def fmt(x) -> str:
    """17-significant-digit text for floats, plain text for everything else."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"refusing to write non-finite value {x}")
        return format(float(x), ".17g")
    return str(x)


def _json_text(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_text(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json_text(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _json_text(v, indent + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return fmt(obj)


def write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_json_text(obj) + "\n")
    return path


def write_csv(path: Path, columns, rows, config_hash: str) -> Path:
    """CSV with a fixed column order; ``config_hash`` is always the last column."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns) + ["config_hash"])
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns] + [config_hash])
    return path


@contextmanager
def _executor(threads):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            yield ex
    else:
        yield None


def _pmap(ex, fn, *iterables):
    return list(map(fn, *iterables)) if ex is None else list(ex.map(fn, *iterables))


def _result_doc(cfg, **body):
    return {"experiment": cfg.experiment, "config_hash": cfg.config_hash, "config": cfg.normalized(), **body}


# --- experiments ---------------------------------------------------------------

BOUND_COLUMNS = ("N", "P", "eps_res_opt", "bound", "saturated", "converged", "grad_norm")


def run_bound_scan(cfg: RunConfig) -> dict:
    """Consecutive ladder ``P = p_min..p_max`` per ring; compares with ``1/(2P+2)`` or zero."""
    p = cfg.params
    rows = []
    for n in p["n_sites"]:
        ladder = optimize.regular_ladder(range(p["p_min"], p["p_max"] + 1), ChainSpec(n))
        for res in ladder:
            bound = 1.0 / (2 * res.p + 2) if 2 * res.p < n else 0.0
            tol = p["tol_bound"] if 2 * res.p < n else p["tol_zero"]
            rows.append({"N": n, "P": res.p, "eps_res_opt": res.eps_res, "bound": bound,
                         "saturated": abs(res.eps_res - bound) < tol, "converged": res.converged,
                         "grad_norm": res.grad_norm})
    path = write_csv(cfg.out_dir / "bound_scan.csv", BOUND_COLUMNS, rows, cfg.config_hash)
    return {"files": [path], "rows": rows, "ok": all(r["saturated"] for r in rows)}


LADDER_COLUMNS = ("P", "eps_res", "tau", "n_iter", "t_cc", "cum_iter", "cum_t_cc", "grad_norm", "converged")
SCHEDULE_COLUMNS = ("P", "m", "gamma", "beta", "s")


def run_regular(cfg: RunConfig) -> dict:
    """Doubling ladder with cost accounting, optionally against random-start optimisation."""
    p = cfg.params
    chain = ChainSpec(p["n_sites"])
    ladder = optimize.regular_ladder(optimize.doubling_levels(p["p_target"], p["p_start"]), chain)
    cost = optimize.cost_accounting(ladder)
    rows, sched = [], []
    for res, c in zip(ladder, cost):
        rows.append({"P": res.p, "eps_res": res.eps_res, "tau": fermion.schedule_duration(res.angles),
                     "n_iter": c["n_iter"], "t_cc": c["t_cc"], "cum_iter": c["cum_iter"],
                     "cum_t_cc": c["cum_t_cc"], "grad_norm": res.grad_norm, "converged": res.converged})
        s = res.angles.schedule_values()
        for m in range(res.p):
            sched.append({"P": res.p, "m": m + 1, "gamma": res.angles.gammas[m], "beta": res.angles.betas[m],
                          "s": s[m]})
    files = [write_csv(cfg.out_dir / "regular_ladder.csv", LADDER_COLUMNS, rows, cfg.config_hash),
             write_csv(cfg.out_dir / "regular_schedules.csv", SCHEDULE_COLUMNS, sched, cfg.config_hash)]
    doc = _result_doc(cfg, levels=[r.to_dict() for r in ladder])
    if p["random_starts"] > 0:
        if cfg.seed is None:
            raise ConfigError("random_starts > 0 needs a seed")
        rng = np.random.default_rng(cfg.seed)
        starts = [optimize.random_angles(p["p_target"], rng) for _ in range(p["random_starts"])]
        with _executor(cfg.threads) as ex:
            runs = _pmap(ex, optimize.minimize, starts, [chain] * len(starts))
        iters = [r.n_iterations for r in runs]
        doc["random_start"] = {"P": p["p_target"], "n_iterations": iters, "mean_iterations": float(np.mean(iters)),
                               "ladder_cum_iterations": cost[-1]["cum_iter"]}
    files.append(write_json(cfg.out_dir / "regular.json", doc))
    return {"files": files, "ladder": ladder, "doc": doc, "ok": True}


def run_degeneracy(cfg: RunConfig) -> dict:
    """Distinct global minima from seeded restarts, one seed stream per depth."""
    p = cfg.params
    chain = ChainSpec(p["n_sites"])
    results = []
    with _executor(cfg.threads) as ex:
        for i, (depth, n_starts) in enumerate(zip(p["p_list"], p["n_starts"])):
            search = optimize.enumerate_minima(depth, chain, n_starts, seed=cfg.seed + i,
                                               cluster_tol=p["cluster_tol"], energy_tol=p["energy_tol"],
                                               executor=ex)
            results.append({"P": depth, "n_distinct": search.n_distinct, "expected": 2**depth,
                            "bound": 1.0 / (2 * depth + 2), "n_starts": n_starts, "n_dropped": search.n_dropped,
                            "n_non_global": search.n_non_global,
                            "minima": [m.to_dict() for m in search.minima]})
    path = write_json(cfg.out_dir / "degeneracy.json", _result_doc(cfg, results=results))
    return {"files": [path], "results": results, "ok": all(r["n_distinct"] == r["expected"] for r in results)}


SCALING_COLUMNS = ("schedule_name", "tau", "P", "dt", "eps_res")


def _scaling_point(name, tau, chain, dt_digital, floors):
    # one (schedule, tau) cell; top-level so process pools can pickle it
    if name == "linear-QA":
        sched = dynamics.linear_schedule(tau)
        return dynamics.bloch_evolve(sched, chain).eps_res, 0, dynamics.default_dt(tau), None
    if name == "linear-dQA":
        rep = dynamics.digitized_evolve(dynamics.linear_schedule(tau), chain, dt_digital)
        return rep.eps_res, int(round(tau / dt_digital)), dt_digital, None
    if name == "RC-QA":
        g, rep = dynamics.tune_roland_cerf(tau, chain, floors)
        return rep.eps_res, 0, dynamics.default_dt(tau), g
    g, rep = dynamics.tune_roland_cerf(tau, chain, floors, digital=True, dt_m=dt_digital)
    return rep.eps_res, int(round(tau / dt_digital)), dt_digital, g


def _fit_doc(points, window=None, upper_half=False):
    try:
        fit = dynamics.scaling_fit(points, window)
    except ValueError as exc:
        # too few points inside the window
        return {"error": str(exc)}
    doc = dataclasses.asdict(fit)
    doc["fit_window"] = list(fit.fit_window)
    if upper_half:
        # upper half of the tau window on the logarithmic axis
        lo, hi = window or fit.fit_window
        mid = math.sqrt(lo * hi)
        upper = [pt for pt in points if mid <= pt[0] <= hi]
        doc["upper_half_min_tau"] = mid
        doc["upper_half_exponent"] = dynamics.scaling_fit(upper).exponent if len(upper) >= 3 else None
    return doc


def run_compare_schedules(cfg: RunConfig) -> dict:
    """Residual energy vs annealing time for linear, Roland-Cerf and optimal digitized schedules."""
    p = cfg.params
    chain = ChainSpec(p["n_sites"])
    floors = tuple(float(g) for g in np.geomspace(p["gap_floor_min"], p["gap_floor_max"], p["gap_floor_count"]))
    names = ("linear-QA", "linear-dQA", "RC-QA", "RC-dQA")
    cells = [(name, tau) for name in names for tau in p["taus"]]
    with _executor(cfg.threads) as ex:
        out = _pmap(ex, _scaling_point, [c[0] for c in cells], [c[1] for c in cells], [chain] * len(cells),
                    [p["dt_digital"]] * len(cells), [floors] * len(cells))
    rows, tuned = [], {}
    for (name, tau), (eps, depth, dt, g) in zip(cells, out):
        rows.append({"schedule_name": name, "tau": tau, "P": depth, "dt": dt, "eps_res": eps})
        if g is not None:
            tuned.setdefault(name, []).append({"tau": tau, "gap_floor": g})

    ladder = optimize.regular_schedule(p["optimal_p_max"], chain)
    for res in ladder:
        tau = fermion.schedule_duration(res.angles)
        rows.append({"schedule_name": "optimal-dQA", "tau": tau, "P": res.p, "dt": tau / res.p,
                     "eps_res": res.eps_res})

    fits = {}
    window = (min(p["taus"]), max(p["taus"]))
    for name in names:
        fits[name] = _fit_doc([(r["tau"], r["eps_res"]) for r in rows if r["schedule_name"] == name])
    # the optimal levels are fitted over the same tau window as the baselines; all levels kept for reference
    opt = [(r["tau"], r["eps_res"]) for r in rows if r["schedule_name"] == "optimal-dQA"]
    fits["optimal-dQA"] = _fit_doc(opt, window, upper_half=True)
    fits["optimal-dQA-all-levels"] = _fit_doc(opt, upper_half=True)
    files = [write_csv(cfg.out_dir / "scaling.csv", SCALING_COLUMNS, rows, cfg.config_hash),
             write_json(cfg.out_dir / "scaling_fits.json",
                        _result_doc(cfg, fits=fits, gap_floors=list(floors), tuned_gap_floor=tuned))]
    return {"files": files, "rows": rows, "fits": fits, "ok": True}


COLLAPSE_COLUMNS = ("P", "m", "t_scaled", "s_scaled", "s")


def run_collapse(cfg: RunConfig) -> dict:
    """Rescaled regular schedules ``(t/tau, (s - 1/2) tau)`` and their pairwise distances."""
    p = cfg.params
    ladder = optimize.regular_schedule(p["p_max"], ChainSpec(p["n_sites"]))
    curves = dynamics.collapse_transform(ladder)
    rows = []
    for res, cur in zip(ladder, curves):
        s = res.angles.schedule_values()
        for m in range(res.p):
            rows.append({"P": res.p, "m": m + 1, "t_scaled": cur[m, 0], "s_scaled": cur[m, 1], "s": s[m]})
    pairs = []
    lo, hi = p["window_lo"], p["window_hi"]
    for (ra, ca), (rb, cb) in zip(zip(ladder, curves), zip(ladder[1:], curves[1:])):
        pairs.append({"P_a": ra.p, "P_b": rb.p, "distance": dynamics.collapse_distance(ca, cb),
                      "window_distance": dynamics.collapse_distance(ca, cb, (lo, hi))})
    monotone = [{"P": r.p, "monotone": bool(np.all(np.diff(r.angles.schedule_values()) > 0))} for r in ladder]
    files = [write_csv(cfg.out_dir / "collapse.csv", COLLAPSE_COLUMNS, rows, cfg.config_hash),
             write_json(cfg.out_dir / "collapse.json",
                        _result_doc(cfg, window=[lo, hi], pairs=pairs, monotone=monotone))]
    return {"files": files, "pairs": pairs, "monotone": monotone, "ok": True}


FIELD_COLUMNS = ("h", "m", "s_m", "gamma", "beta")


def flat_point(s) -> tuple[int, float]:
    """Step index (1-based, left of the pair) and ``s`` value where ``ds/dm`` is smallest."""
    ds = np.diff(s)
    i = int(np.argmin(ds))
    return i + 1, float(0.5 * (s[i] + s[i + 1]))


def run_field_scan(cfg: RunConfig) -> dict:
    """Regular schedules at depth ``p`` for several transverse fields, evaluated on ``n_eval_per_p * P`` sites."""
    p = cfg.params
    depth = p["p"]
    rows, summary = [], []
    for h in p["fields"]:
        chain = ChainSpec(p["n_eval_per_p"] * depth, field=h)
        ladder = optimize.regular_schedule(depth, chain, n_eval_per_p=p["n_eval_per_p"])
        res = ladder[-1]
        s = res.angles.schedule_values(h)
        for m in range(depth):
            rows.append({"h": h, "m": m + 1, "s_m": s[m], "gamma": res.angles.gammas[m],
                         "beta": res.angles.betas[m]})
        m_flat, s_flat = flat_point(s)
        summary.append({"h": h, "P": depth, "n_eval": p["n_eval_per_p"] * depth, "eps_res": res.eps_res,
                        "converged": res.converged, "grad_norm": res.grad_norm,
                        "monotone": bool(np.all(np.diff(s) > 0)), "m_flat": m_flat, "s_flat": s_flat,
                        "s_critical": 1.0 / (2.0 - h)})
    files = [write_csv(cfg.out_dir / "field_scan.csv", FIELD_COLUMNS, rows, cfg.config_hash),
             write_json(cfg.out_dir / "field_scan.json", _result_doc(cfg, levels=summary))]
    return {"files": files, "summary": summary, "ok": True}


def _fermion_eps(angles, n, h, corrupt=False):
    if corrupt:
        # negative control: driver rotations turned the wrong way
        angles = QaoaAngles(angles.gammas, -angles.betas)
    chain = ChainSpec(n, field=h)
    if h == 0.0:
        return fermion.residual_energy(angles, chain).eps_res
    return fermion.energy_expectation(angles, chain).eps_res


def check_oracle(rng, sizes, p_max, fields, n_sets, tol, corrupt=False) -> dict:
    worst = 0.0
    cases = 0
    for n in sizes:
        for depth in range(1, p_max + 1):
            for h in fields:
                for _ in range(n_sets):
                    a = QaoaAngles.from_vector(rng.uniform(0.0, np.pi / 2, 2 * depth))
                    err = abs(_fermion_eps(a, n, h, corrupt) - ed.eps_res_ed(a, n, h).eps_res)
                    worst = max(worst, err)
                    cases += 1
    return {"name": "oracle_equivalence", "passed": worst < tol, "max_error": worst, "tol": tol, "n_cases": cases}


def check_gradient(rng, p_max, fields, n_sets, tol) -> dict:
    worst = 0.0
    for i in range(n_sets):
        depth = int(rng.integers(1, p_max + 1))
        h = fields[i % len(fields)]
        a = QaoaAngles.from_vector(rng.uniform(0.0, np.pi / 2, 2 * depth))
        chain = ChainSpec(50, field=h)
        g = gradient.value_and_gradient(a, chain)[1].to_vector()
        fd = gradient.finite_diff_gradient(a, chain).to_vector()
        worst = max(worst, float(np.max(np.abs(g - fd) / np.abs(fd))))
    return {"name": "gradient_check", "passed": worst < tol, "max_error": worst, "tol": tol, "n_cases": n_sets}


def check_invariants(rng, n_sets) -> dict:
    worst = 0.0
    for _ in range(n_sets):
        depth = int(rng.integers(1, 9))
        a = QaoaAngles.from_vector(rng.uniform(-np.pi, np.pi, 2 * depth))
        taus = fermion.propagate_modes(a, fermion.k_grid("PBC", 20))
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(taus, axis=1) - 1.0))))
        shifted = QaoaAngles.from_vector(a.to_vector() + np.pi / 2 * rng.integers(-2, 3, 2 * depth))
        worst = max(worst, abs(fermion.evaluate(a, ChainSpec(20)) - fermion.evaluate(shifted, ChainSpec(20))))
        eps = fermion.evaluate(a, ChainSpec(20))
        if not 0.0 <= eps <= 1.0:
            worst = max(worst, 1.0)
    eighth = QaoaAngles([np.pi / 8], [np.pi / 8])
    worst = max(worst, abs(fermion.evaluate(eighth, ChainSpec(50)) - 0.25))
    tol = 1e-12
    return {"name": "invariants", "passed": worst < tol, "max_error": worst, "tol": tol, "n_cases": n_sets + 1}


def run_validate(cfg: RunConfig) -> dict:
    """Oracle equivalence, gradient check and invariants; ``ok`` is false if any fails."""
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    checks = [
        check_oracle(rng, p["ed_sizes"], p["p_max"], p["fields"], p["n_sets"], p["oracle_tol"],
                     corrupt=p["corrupt_rotation_sign"]),
        check_gradient(rng, p["grad_p_max"], p["fields"], p["grad_sets"], p["grad_tol"]),
        check_invariants(rng, p["n_sets"]),
    ]
    ok = all(c["passed"] for c in checks)
    path = write_json(cfg.out_dir / "validate.json", _result_doc(cfg, checks=checks, passed=ok))
    return {"files": [path], "checks": checks, "ok": ok}


RUNNERS = {
    "bound-scan": run_bound_scan,
    "regular": run_regular,
    "degeneracy": run_degeneracy,
    "compare-schedules": run_compare_schedules,
    "collapse": run_collapse,
    "field-scan": run_field_scan,
    "validate": run_validate,
}


def run(cfg: RunConfig) -> dict:
    return RUNNERS[cfg.experiment](cfg)
