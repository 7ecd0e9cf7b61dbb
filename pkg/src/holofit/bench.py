"""Experiment orchestration: reproducible benchmark runs emitting CSV
rows plus a metadata record, one cell per (dimension, sample count, seed).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import version as pkg_version
from pathlib import Path

import numpy as np

from .expansions import anisotropic_set, coefficients, sigma_s, truncation_floor
from .fem1d import DiscretizedSpace, default_diffusion, diffusion_target
from .indexsets import IndexSet, hyperbolic_cross, intrinsic_weights
from .networks import compile_feature_class, train_last_layer
from .sampling import build_system, draw_samples, l2_error
from .srlasso import SRLassoProblem, default_lambda, predict, prune_coefficients, solve
from .targets import RateModel, bernstein_param, log_factor, test_function_product

__all__ = ["run_experiment", "cmd_bestterm", "cmd_learn", "cmd_learn_dnn", "cmd_fem", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

COLUMNS = {
    "bestterm": ["experiment", "d", "s", "sigma_s", "alg_ref", "exp_ref", "floor",
                 "build_id", "seed", "config_digest"],
    "learn": ["experiment", "d", "m", "seed", "noise_scale", "lambda", "n_hci", "N",
              "l2_error", "l2_stderr", "objective", "gamma_certificate", "iterations",
              "support_size", "pruned_size", "pruned_error", "solve_seconds",
              "build_id", "config_digest"],
    "learn-dnn": ["experiment", "d", "m", "seed", "noise_scale", "lambda", "n_hci", "N",
                  "l2_error", "l2_stderr", "objective", "gamma_certificate", "iterations",
                  "support_size", "pruned_size", "pruned_error", "solve_seconds",
                  "delta", "width", "depth", "perturbation_norm", "perturbation_bound",
                  "dnn_l2_error", "error_ratio", "build_id", "config_digest"],
    "fem": ["experiment", "d", "m", "seed", "K", "noise_scale", "lambda", "n_hci", "N",
            "l2_error", "l2_stderr", "budget_approximation", "budget_measurement",
            "budget_discretization", "budget_optimization", "budget_total",
            "objective", "gamma_certificate", "solve_seconds",
            "build_id", "config_digest"],
}

_ALLOWED_KEYS = {
    "bestterm": {"schema_version", "experiment", "seed", "target", "dims", "s_max",
                 "floor_tolerance", "candidate_cap"},
    "learn": {"schema_version", "experiment", "seed", "target", "m_grid", "seeds",
              "noise_scale", "lambda_policy", "n_policy", "gamma", "budget",
              "n_mc", "prune_denominator", "eps"},
    "learn-dnn": {"schema_version", "experiment", "seed", "target", "m_grid", "seeds",
                  "noise_scale", "lambda_policy", "n_policy", "gamma", "budget",
                  "n_mc", "prune_denominator", "eps", "delta"},
    "fem": {"schema_version", "experiment", "seed", "fem", "m_grid", "seeds",
            "noise_scale", "lambda_policy", "n_policy", "gamma", "budget",
            "n_mc", "eps", "forcing_scale"},
}


def build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except Exception:
        pass
    return f"holofit-{pkg_version('holofit')}"


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def validate_config(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ValueError("config must be a JSON object")
    exp = config.get("experiment")
    if exp not in _ALLOWED_KEYS:
        raise ValueError(f"unknown experiment {exp!r}; expected one of {sorted(_ALLOWED_KEYS)}")
    if config.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"config schema_version must be {SCHEMA_VERSION}")
    unknown = set(config) - _ALLOWED_KEYS[exp]
    if unknown:
        raise ValueError(f"unknown config keys for {exp}: {sorted(unknown)}")
    return config


def _make_target(spec: dict):
    kind = spec.get("kind", "product")
    if kind != "product":
        raise ValueError(f"unknown target kind {kind!r}")
    d = int(spec["d"])
    deltas = spec.get("deltas", "i^1.5")
    if deltas == "i^1.5":
        deltas = [(i + 1) ** 1.5 for i in range(d)]
    return test_function_product(d, np.asarray(deltas, dtype=float))


def _cell_seed(master: int, *parts) -> int:
    tag = ":".join(str(p) for p in (master, *parts)).encode()
    return int.from_bytes(hashlib.sha256(tag).digest()[:8], "little") % (2**62)


def _lambda_from(policy: dict, m: int, eps: float) -> float:
    mode = policy.get("mode", "c_over_sqrt_m")
    if mode == "c_over_sqrt_m":
        return float(policy.get("c", 0.3)) / math.sqrt(m)
    if mode == "default":
        return default_lambda(m, eps)
    if mode == "fixed":
        return float(policy["value"])
    raise ValueError(f"unknown lambda policy {mode!r}")


def _hci_n_from(policy: dict, m: int, d: int, eps: float) -> int:
    mode = policy.get("mode", "cover_dims")
    if mode == "cover_dims":
        return d + 1
    if mode == "fixed":
        return int(policy["n"])
    if mode == "theory":
        _, n = log_factor(max(m, 3), eps)
        return n
    raise ValueError(f"unknown n policy {mode!r}")


# ---------------------------------------------------------------------------
# best s-term benchmark


def cmd_bestterm(config: dict) -> list[dict]:
    """Tail errors of the best s-term truncation for the product target.

    Coefficients are taken on an anisotropic candidate set grown until the
    exact truncation floor is negligible next to the smallest reported
    sigma_s; algebraic (C/s) and exponential reference curves are fitted
    on the middle third of the s range.
    """
    target_spec = dict(config.get("target", {"kind": "product"}))
    dims = config.get("dims", [4, 8, 16, 32])
    s_max = int(config.get("s_max", 200))
    floor_tol = float(config.get("floor_tolerance", 0.05))
    cap = int(config.get("candidate_cap", 400_000))
    rows = []
    for d in dims:
        spec = dict(target_spec)
        spec["d"] = d
        target = _make_target(spec)
        deltas = target.meta["deltas"]
        rhos = np.array([bernstein_param(dl) for dl in deltas])
        log_rates = np.log(rhos)
        budget = 2.0 * float(np.min(log_rates))
        C = None
        floor = 1.0
        for _ in range(40):
            Lam = anisotropic_set(log_rates, budget)
            if len(Lam) > cap:
                break
            if len(Lam) > 4 * s_max:
                C = coefficients(target, Lam)
                floor = truncation_floor(target, C)
                smallest = sigma_s(C, s_max)
                if floor <= floor_tol * max(smallest, 1e-300) or floor < 1e-12:
                    break
            budget += max(0.5, 0.25 * float(np.min(log_rates)))
        if C is None:
            Lam = anisotropic_set(log_rates, budget)
            C = coefficients(target, Lam)
            floor = truncation_floor(target, C)
        s_values = np.arange(0, s_max + 1)
        sig = np.array([sigma_s(C, int(s)) for s in s_values])
        fit_lo, fit_hi = s_max // 3, 2 * s_max // 3
        mask = (s_values >= fit_lo) & (s_values <= fit_hi) & (sig > 3 * floor)
        if not np.any(mask):
            mask = (s_values >= 1) & (sig > 0)
        alg = RateModel(kind="algebraic", p=2.0 / 3.0).fit(s_values[mask], sig[mask])
        expm = RateModel(kind="exponential", rho=rhos).fit(s_values[mask], sig[mask])
        alg_ref = alg.evaluate(np.maximum(s_values, 1))
        exp_ref = expm.evaluate(s_values)
        for i, s in enumerate(s_values):
            rows.append({
                "experiment": "bestterm", "d": d, "s": int(s),
                "sigma_s": f"{sig[i]:.12e}",
                "alg_ref": f"{alg_ref[i]:.12e}",
                "exp_ref": f"{exp_ref[i]:.12e}",
                "floor": f"{floor:.12e}",
            })
    return rows


# ---------------------------------------------------------------------------
# learning experiments


def _learn_cell(target, config, d, m, rep, master, feature_cache=None):
    eps = float(config.get("eps", 1e-3))
    noise_scale = float(config.get("noise_scale", 0.0))
    gamma = float(config.get("gamma", 1e-6))
    budget = int(config.get("budget", 400_000))
    n_mc = int(config.get("n_mc", 4000))
    n = _hci_n_from(config.get("n_policy", {}), m, d, eps)
    Lam = hyperbolic_cross(n)
    lam = _lambda_from(config.get("lambda_policy", {}), m, eps)
    cell_seed = _cell_seed(master, d, m, rep)
    eval_seed = _cell_seed(master, "mc", d, m, rep)
    points = draw_samples(m, d, cell_seed)
    system = build_system(target, Lam, points, noise_scale=noise_scale, seed=cell_seed)
    prob = SRLassoProblem(
        A=system.A, F=system.F, weights=intrinsic_weights(Lam), lam=lam, index_set=Lam
    )
    t0 = time.perf_counter()
    sol = solve(prob, gamma=gamma, budget=budget)
    solve_seconds = time.perf_counter() - t0
    err, stderr = l2_error(
        target, lambda pts: predict(Lam, sol.Z, pts), n_mc, eval_seed
    )
    denom = int(config.get("prune_denominator", 8))
    keep = max(1, min(len(Lam), m // denom))
    _, pruned = prune_coefficients(sol, keep, prob=prob)
    perr, _ = l2_error(
        target, lambda pts: predict(Lam, pruned.Z, pts), n_mc, eval_seed
    )
    row = {
        "experiment": config["experiment"], "d": d, "m": m, "seed": rep,
        "noise_scale": noise_scale, "lambda": f"{lam:.6e}", "n_hci": n, "N": len(Lam),
        "l2_error": f"{err:.12e}", "l2_stderr": f"{stderr:.3e}",
        "objective": f"{sol.objective:.12e}",
        "gamma_certificate": f"{sol.gamma_certificate:.3e}",
        "iterations": sol.iterations, "support_size": int(len(sol.support(1e-10))),
        "pruned_size": keep, "pruned_error": f"{perr:.12e}",
        "solve_seconds": f"{solve_seconds:.3f}",
    }
    if config["experiment"] == "learn-dnn":
        delta = float(config.get("delta", 1e-4))
        key = (n, delta)
        cls = feature_cache[key]
        t1 = time.perf_counter()
        trained = train_last_layer(cls, system, lam, gamma=gamma, budget=budget)
        dnn_err, _ = l2_error(target, trained.predict, n_mc, eval_seed)
        row.update({
            "delta": delta,
            "width": trained.feature_class.feature_network.width,
            "depth": trained.feature_class.feature_network.depth,
            "perturbation_norm": f"{trained.solution.info['perturbation_norm']:.6e}",
            "perturbation_bound": f"{trained.solution.info['perturbation_bound']:.6e}",
            "dnn_l2_error": f"{dnn_err:.12e}",
            "error_ratio": f"{dnn_err / max(err, 1e-300):.6f}",
        })
    return row


def cmd_learn(config: dict, threads: int = 1) -> list[dict]:
    """Sample-complexity sweep of the sparse polynomial learner."""
    target = _make_target(config["target"])
    d = target.dim
    master = int(config.get("seed", 0))
    m_grid = [int(m) for m in config.get("m_grid", [50, 100, 200, 400, 800])]
    reps = int(config.get("seeds", 5))
    feature_cache = None
    if config["experiment"] == "learn-dnn":
        eps = float(config.get("eps", 1e-3))
        delta = float(config.get("delta", 1e-4))
        feature_cache = {}
        for m in m_grid:
            n = _hci_n_from(config.get("n_policy", {}), m, d, eps)
            if (n, delta) not in feature_cache:
                feature_cache[(n, delta)] = compile_feature_class(hyperbolic_cross(n), delta)
    cells = [(m, rep) for m in m_grid for rep in range(reps)]
    runner = lambda cell: _learn_cell(
        target, config, d, cell[0], cell[1], master, feature_cache
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(runner, cells))
    else:
        rows = [runner(c) for c in cells]
    rows.sort(key=lambda r: (r["d"], r["m"], r["seed"]))
    return rows


def cmd_learn_dnn(config: dict, threads: int = 1) -> list[dict]:
    """Learning sweep with the trained handcrafted network head-to-head."""
    return cmd_learn(config, threads)


# ---------------------------------------------------------------------------
# Hilbert-valued learning with the FEM backend


def _fem_cell(target, space, disc_estimate, config, m, rep, master):
    d = target.dim
    eps = float(config.get("eps", 1e-3))
    noise_scale = float(config.get("noise_scale", 0.0))
    gamma = float(config.get("gamma", 1e-5))
    budget = int(config.get("budget", 200_000))
    n_mc = int(config.get("n_mc", 600))
    n = _hci_n_from(config.get("n_policy", {}), m, d, eps)
    Lam = hyperbolic_cross(n)
    lam = _lambda_from(config.get("lambda_policy", {}), m, eps)
    cell_seed = _cell_seed(master, "fem", m, rep)
    eval_seed = _cell_seed(master, "fem-mc", m, rep)
    points = draw_samples(m, d, cell_seed)
    system = build_system(
        target, Lam, points, noise_scale=noise_scale, seed=cell_seed, gram=space.gram
    )
    prob = SRLassoProblem(
        A=system.A, F=system.F, weights=intrinsic_weights(Lam), lam=lam,
        gram=space.gram, index_set=Lam,
    )
    t0 = time.perf_counter()
    sol = solve(prob, gamma=gamma, budget=budget)
    solve_seconds = time.perf_counter() - t0
    err, stderr = l2_error(
        target, lambda pts: predict(Lam, sol.Z, pts), n_mc, eval_seed, gram=space.gram
    )
    from .targets import error_budget

    budget_rec = error_budget(
        approx=err, noise_norm=noise_scale, m=m,
        disc=disc_estimate, gamma=sol.gamma_certificate,
    )
    return {
        "experiment": "fem", "d": d, "m": m, "seed": rep, "K": space.K,
        "noise_scale": noise_scale, "lambda": f"{lam:.6e}", "n_hci": n, "N": len(Lam),
        "l2_error": f"{err:.12e}", "l2_stderr": f"{stderr:.3e}",
        "budget_approximation": f"{budget_rec.approximation:.12e}",
        "budget_measurement": f"{budget_rec.measurement:.12e}",
        "budget_discretization": f"{budget_rec.discretization:.12e}",
        "budget_optimization": f"{budget_rec.optimization:.12e}",
        "budget_total": f"{budget_rec.total:.12e}",
        "objective": f"{sol.objective:.12e}",
        "gamma_certificate": f"{sol.gamma_certificate:.3e}",
        "solve_seconds": f"{solve_seconds:.3f}",
    }


def discretization_estimate(coeff, space, forcing, seed: int, n_probe: int = 8) -> float:
    """Mesh-refinement estimate of the V-norm discretization error.

    Compares solves on the given mesh against a 4x refinement at a few
    random parameter values; coarse hat functions embed exactly in the
    fine space, so the difference norm is computed there.
    """
    from .fem1d import HilbertPoint, assemble_and_solve, norm_V
    from .sampling import rng_from

    fine = DiscretizedSpace(4 * (space.K + 1) - 1)
    fine_nodes = fine.nodes
    rng = rng_from(seed, 9)
    worst = 0.0
    for _ in range(n_probe):
        y = rng.uniform(-1.0, 1.0, coeff.n_modes)
        coarse_u = assemble_and_solve(coeff, y, forcing, space)
        fine_u = assemble_and_solve(coeff, y, forcing, fine)
        lifted = coarse_u.evaluate(fine_nodes)
        diff = HilbertPoint(coeffs=fine_u.coeffs - lifted, space=fine)
        worst = max(worst, norm_V(diff))
    return worst


def cmd_fem(config: dict, threads: int = 1) -> list[dict]:
    """Hilbert-valued learning run against the parametric diffusion solver."""
    fem_spec = dict(config.get("fem", {}))
    K = int(fem_spec.get("K", 31))
    d = int(fem_spec.get("d", 4))
    floor = float(fem_spec.get("r", 0.1))
    mode_scale = float(fem_spec.get("mode_scale", 0.9))
    forcing_scale = float(config.get("forcing_scale", 10.0))
    space = DiscretizedSpace(K)
    coeff = default_diffusion(d, floor=floor, mode_scale=mode_scale)
    forcing = lambda x: np.full_like(x, forcing_scale)
    target = diffusion_target(coeff, space, forcing)
    master = int(config.get("seed", 0))
    disc = discretization_estimate(coeff, space, forcing, master)
    m_grid = [int(m) for m in config.get("m_grid", [50, 100, 200, 400])]
    reps = int(config.get("seeds", 3))
    cells = [(m, rep) for m in m_grid for rep in range(reps)]
    runner = lambda cell: _fem_cell(target, space, disc, config, cell[0], cell[1], master)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(runner, cells))
    else:
        rows = [runner(c) for c in cells]
    rows.sort(key=lambda r: (r["m"], r["seed"]))
    return rows


# ---------------------------------------------------------------------------
# entry point shared by all experiments


def run_experiment(config: dict, out_dir, threads: int = 1) -> Path:
    """Validate the config, run the experiment and write results + metadata.

    Emits ``results.csv`` and ``meta.json`` under ``out_dir``; every row
    carries the build id, the seed and the config digest so reruns are
    attributable and reproducible.
    """
    config = validate_config(config)
    exp = config["experiment"]
    digest = config_digest(config)
    bid = build_id()
    if exp == "bestterm":
        rows = cmd_bestterm(config)
    elif exp == "learn":
        rows = cmd_learn(config, threads)
    elif exp == "learn-dnn":
        rows = cmd_learn_dnn(config, threads)
    else:
        rows = cmd_fem(config, threads)
    master = int(config.get("seed", 0))
    for row in rows:
        row.setdefault("seed", master)
        row["build_id"] = bid
        row["config_digest"] = digest
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = COLUMNS[exp]
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in cols})
    meta = {
        "schema_version": SCHEMA_VERSION,
        "experiment": exp,
        "config": config,
        "config_digest": digest,
        "build_id": bid,
        "columns": cols,
        "n_rows": len(rows),
    }
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return out / "results.csv"
