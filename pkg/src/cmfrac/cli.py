"""Config-driven experiment runner.

Usage::

    cmfrac <verb> --config experiment.json --out results/

Verbs: weights, solve, volterra, stability, converge, decay, pde, truncation.
Each run writes CSV files plus ``summary.json`` (resolved parameters, results
and the outcome of any embedded checks).  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure.

A config may hold a ``runs`` list; each entry is merged over the base config
and executed into ``<out>/run_<i>``.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .analysis import (
    convergence_table,
    decay_rate_fit,
    energy_inequality_gap,
    monotonicity_report,
    truncation_error,
)
from .csvio import write_csv
from .mlf import UnsupportedDomainError, mittag_leffler
from .pdelab import (
    AdvDiffOperator,
    eigenvalues_advdiff,
    solve_subdiffusion,
    spectral_reference,
    write_eigen_csv,
    write_field_csv,
)
from .presets import make_rhs, preset_dim
from .schemes import SchemeWeights, make_weights, sum_kernel_weights, volterra_exp_weights
from .seqkit import check_cm
from .solver import (
    ExpKernel,
    FODEProblem,
    SingularStepError,
    StandardKernel,
    StepFailureError,
    SumKernel,
    VolterraProblem,
    num_steps,
    solve_backward_euler,
    solve_fode,
    solve_linear_test,
    solve_volterra,
)
from .stability import boundary_locus, instability_radius, is_stable_empirical, max_arg, write_grid_csv

__all__ = ["ConfigError", "run_experiment", "main", "VERBS"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


_MISSING = object()


def _get(cfg: Dict[str, Any], path: str, kind: Optional[type] = None, default: Any = _MISSING):
    node: Any = cfg
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            if default is _MISSING:
                raise ConfigError(path, "required field is missing")
            return default
        node = node[key]
    if kind is float:
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ConfigError(path, f"expected a number, got {node!r}")
        return float(node)
    if kind is int:
        if isinstance(node, bool) or not isinstance(node, int):
            raise ConfigError(path, f"expected an integer, got {node!r}")
        return node
    if kind is not None and not isinstance(node, kind):
        raise ConfigError(path, f"expected {kind.__name__}, got {node!r}")
    return node


def _positive(cfg, path, kind=float, default=_MISSING):
    v = _get(cfg, path, kind, default)
    if v is not None and not v > 0:
        raise ConfigError(path, f"must be positive, got {v}")
    return v


def _scheme(cfg, N: int) -> SchemeWeights:
    kind = _get(cfg, "scheme.kind", str)
    alpha = _get(cfg, "scheme.alpha", float)
    params = {k: float(v) for k, v in _get(cfg, "scheme", dict).items() if k in ("theta", "C", "t1")}
    try:
        return make_weights(kind, alpha, max(N, 2), **params)
    except ValueError as exc:
        raise ConfigError("scheme", str(exc)) from None


def _rhs(cfg):
    name = _get(cfg, "problem.preset", str)
    params = _get(cfg, "problem.params", dict, {})
    try:
        f, jac = make_rhs(name, **params)
    except ValueError as exc:
        raise ConfigError("problem.preset", str(exc)) from None
    return name, f, jac


def _initial_values(cfg, dim: int) -> List[np.ndarray]:
    if _get(cfg, "problem.initial_values", list, None) is not None:
        raw = _get(cfg, "problem.initial_values", list)
    else:
        raw = [_get(cfg, "problem.u0")]
    out = []
    for i, v in enumerate(raw):
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        if arr.shape != (dim,):
            raise ConfigError(f"problem.initial_values[{i}]", f"expected {dim} component(s), got {v!r}")
        out.append(arr)
    return out


def _mono_summary(values: np.ndarray) -> Dict[str, Any]:
    rep = monotonicity_report(values)
    return {"direction": rep.direction.value, "strict": rep.strict, "first_break": rep.first_break}


# ---------------------------------------------------------------------------
# verbs


def _run_weights(cfg, out: Path) -> Dict[str, Any]:
    N = _positive(cfg, "numerics.N", int)
    w = _scheme(cfg, N)
    write_csv(out / "weights.csv", "weights", ["index", "omega", "a"], w.to_csv_rows())
    rep = check_cm(w.a, min(20, N - 1) if N > 1 else 1)
    return {"scheme": w.label, "alpha": w.alpha, "N": N, "a_is_cm": rep.is_cm, "min_difference": rep.min_difference}


def _run_solve(cfg, out: Path) -> Dict[str, Any]:
    h = _positive(cfg, "numerics.h")
    T = _positive(cfg, "numerics.T")
    name, f, jac = _rhs(cfg)
    dim = preset_dim(name)
    u0s = _initial_values(cfg, dim)
    N = num_steps(T, h)
    kind = _get(cfg, "scheme.kind", str)
    runs = []
    for i, u0 in enumerate(u0s):
        if kind == "backward_euler":
            traj = solve_backward_euler(f, u0, T, h, jacobian=jac)
            w = None
        else:
            w = _scheme(cfg, N + 1)
            traj = solve_fode(FODEProblem(w.alpha, f, u0, T, jac), w, h)
        traj.to_csv(out / f"trajectory_{i}.csv")
        rec: Dict[str, Any] = {"u0": u0.tolist(), "final": traj.values[-1].tolist()}
        rec["monotonicity"] = _mono_summary(traj.scalar if dim == 1 else traj.norms())
        if w is not None:
            gap, scale = energy_inequality_gap(w, traj)
            rec["energy_inequality_holds"] = bool(np.all(gap <= 1e-10 * scale))
        runs.append(rec)
    return {"preset": name, "h": h, "T": T, "N": N, "scheme": kind, "runs": runs}


def _kernel(cfg):
    ktype = _get(cfg, "kernel.type", str)
    if ktype == "exp":
        alpha = _get(cfg, "kernel.alpha", float)
        gamma = _get(cfg, "kernel.gamma", float)
        return ExpKernel(alpha, gamma)
    if ktype == "standard":
        return StandardKernel(_get(cfg, "kernel.alpha", float))
    if ktype == "sum":
        terms = _get(cfg, "kernel.terms", list)
        try:
            return SumKernel(tuple((float(c), float(a)) for c, a in terms))
        except (TypeError, ValueError) as exc:
            raise ConfigError("kernel.terms", str(exc)) from None
    raise ConfigError("kernel.type", f"unknown kernel type {ktype!r}")


def _run_volterra(cfg, out: Path) -> Dict[str, Any]:
    h = _positive(cfg, "numerics.h")
    T = _positive(cfg, "numerics.T")
    name, f, jac = _rhs(cfg)
    try:
        kernel = _kernel(cfg)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("kernel", str(exc)) from None
    N = num_steps(T, h) + 1
    variant = _get(cfg, "kernel.variant", str, "theta_cq")
    theta = _get(cfg, "kernel.theta", float, 2.0)
    try:
        if isinstance(kernel, ExpKernel):
            vw = volterra_exp_weights(kernel.alpha, kernel.gamma, h, variant, N, theta=theta)
        elif isinstance(kernel, StandardKernel):
            vw = volterra_exp_weights(kernel.alpha, 0.0, h, variant, N, theta=theta)
        else:
            vw = sum_kernel_weights(kernel.terms, h, N, scheme=_get(cfg, "kernel.scheme", str, "gl"))
    except ValueError as exc:
        raise ConfigError("kernel", str(exc)) from None
    cm = check_cm(vw.b, 10)
    runs = []
    for i, u0 in enumerate(_initial_values(cfg, preset_dim(name))):
        traj = solve_volterra(VolterraProblem(kernel, f, u0, T, jac), vw)
        traj.to_csv(out / f"trajectory_{i}.csv")
        runs.append({"u0": u0.tolist(), "final": traj.values[-1].tolist(), "monotonicity": _mono_summary(traj.scalar)})
    return {"preset": name, "kernel": repr(kernel), "variant": vw.variant.value, "h": h, "T": T, "b_is_cm": cm.is_cm, "runs": runs}


def _run_stability(cfg, out: Path) -> Dict[str, Any]:
    mode = _get(cfg, "mode", str, "locus")
    if mode == "locus":
        N = _positive(cfg, "numerics.N", int)
        res = _positive(cfg, "numerics.resolution", int, 4096)
        w = _scheme(cfg, N)
        loc = boundary_locus(w, res)
        loc.to_csv(out / "locus.csv")
        return {
            "scheme": w.label,
            "alpha": w.alpha,
            "N": N,
            "resolution": res,
            "max_arg": max_arg(loc),
            "max_arg_over_pi": max_arg(loc) / math.pi,
            "instability_radius": instability_radius(loc),
        }
    if mode != "grid":
        raise ConfigError("mode", f"expected 'locus' or 'grid', got {mode!r}")
    N = _positive(cfg, "numerics.N", int)
    h = _positive(cfg, "numerics.h")
    radii = [float(r) for r in _get(cfg, "grid.radii", list)]
    angles = [float(a) * math.pi for a in _get(cfg, "grid.angles_over_pi", list)]
    w = _scheme(cfg, N)
    reps = [is_stable_empirical(w.alpha, r * complex(math.cos(a), math.sin(a)), w, h, N) for r in radii for a in angles]
    write_grid_csv(out / "grid.csv", reps)
    return {"scheme": w.label, "alpha": w.alpha, "h": h, "N": N, "stable_fraction": sum(r.stable for r in reps) / len(reps)}


def _run_converge(cfg, out: Path) -> Dict[str, Any]:
    T = _positive(cfg, "numerics.T")
    hs = [float(h) for h in _get(cfg, "numerics.h_list", list)]
    name, f, jac = _rhs(cfg)
    (u0,) = _initial_values(cfg, preset_dim(name))
    kind = _get(cfg, "scheme.kind", str)
    alpha = _get(cfg, "scheme.alpha", float)
    ref_kind = _get(cfg, "reference", str, "self")
    reference = None
    if ref_kind == "mittag-leffler":
        if name != "linear":
            raise ConfigError("reference", "the Mittag-Leffler reference needs the linear preset")
        lam = float(_get(cfg, "problem.params", dict, {}).get("lam", -1.0))
        reference = lambda t: u0[0] * mittag_leffler(alpha, lam * np.asarray(t) ** alpha)  # noqa: E731
    elif ref_kind != "self":
        raise ConfigError("reference", f"expected 'self' or 'mittag-leffler', got {ref_kind!r}")
    p = FODEProblem(alpha, f, u0, T, jac)
    try:
        table = convergence_table(p, lambda n: _scheme(cfg, n + 1), hs, reference)
    except (ConfigError, UnsupportedDomainError):
        raise
    except ValueError as exc:
        raise ConfigError("numerics.h_list", str(exc)) from None
    table.to_csv(out / "convergence.csv")
    return {
        "preset": name,
        "reference": ref_kind,
        "errors": table.errors.tolist(),
        "strictly_decreasing": table.strictly_decreasing,
    }


def _run_decay(cfg, out: Path) -> Dict[str, Any]:
    N = _positive(cfg, "numerics.N", int)
    h = _positive(cfg, "numerics.h")
    lam = _get(cfg, "problem.lam", float, -1.0)
    w = _scheme(cfg, N + 1)
    traj = solve_linear_test(w.alpha, lam, w, h, N)
    traj.to_csv(out / "trajectory.csv")
    exponent, prefactor = decay_rate_fit(traj)
    cm = check_cm(traj.scalar, 8)
    return {"scheme": w.label, "alpha": w.alpha, "lam": lam, "exponent": exponent, "prefactor": prefactor, "is_cm": cm.is_cm}


def _initial_field(cfg, op: AdvDiffOperator) -> np.ndarray:
    kind = _get(cfg, "pde.u0", str, "sin")
    if kind == "sin":
        return np.sin(2 * np.pi * op.x)
    if kind == "random":
        return np.random.default_rng(_get(cfg, "pde.seed", int, 0)).standard_normal(op.size)
    if kind == "bump":
        return np.exp(-100.0 * (op.x - 0.5) ** 2)
    raise ConfigError("pde.u0", f"expected 'sin', 'random' or 'bump', got {kind!r}")


def _run_pde(cfg, out: Path) -> Dict[str, Any]:
    d = _get(cfg, "pde.d", float)
    D = _positive(cfg, "pde.D")
    Nx = _positive(cfg, "pde.Nx", int)
    boundary = _get(cfg, "pde.boundary", str, "periodic")
    h = _positive(cfg, "numerics.h")
    T = _positive(cfg, "numerics.T")
    try:
        op = AdvDiffOperator(d, D, Nx, boundary)
    except ValueError as exc:
        raise ConfigError("pde", str(exc)) from None
    if boundary == "periodic":
        write_eigen_csv(out / "eigenvalues.csv", eigenvalues_advdiff(d, D, Nx))
    u0 = _initial_field(cfg, op)
    N = num_steps(T, h)
    w = _scheme(cfg, N + 1)
    traj = solve_subdiffusion(op, u0, w, h, N)
    snaps = [float(t) for t in _get(cfg, "numerics.snapshots", list, [T])]
    for t in snaps:
        n = int(round(t / h))
        if not 0 <= n <= N:
            raise ConfigError("numerics.snapshots", f"time {t} outside [0, {T}]")
        write_field_csv(out / f"field_t{t:g}.csv", op, traj.values[n])
    sup0 = float(np.max(np.abs(u0)))
    supmax = float(np.max(np.abs(traj.values)))
    summary = {
        "d": d,
        "D": D,
        "Nx": Nx,
        "boundary": boundary,
        "scheme": w.label,
        "sup_initial": sup0,
        "sup_max": supmax,
        "bounded": supmax <= sup0 * (1 + 1e-8),
    }
    if d == 0:
        ref = spectral_reference(op, u0, w.alpha, N * h)
        summary["reference_error"] = float(np.max(np.abs(traj.values[-1] - ref)))
    return summary


def _run_truncation(cfg, out: Path) -> Dict[str, Any]:
    N = _positive(cfg, "numerics.N", int)
    h = _positive(cfg, "numerics.h")
    beta = _get(cfg, "problem.beta", float, 1.0)
    linear_part = _get(cfg, "problem.linear_part", bool, False)
    w = _scheme(cfg, N + 1)
    a = w.alpha
    t = h * np.arange(N + 1)
    g1 = math.gamma(1 + a)
    u = beta * t**a / g1
    f = np.full_like(t, beta)
    if linear_part:
        u = u + t
        f = f + t ** (1 - a) / math.gamma(2 - a)
    r = truncation_error(w, u, f, h)
    write_csv(out / "truncation.csv", "truncation", ["n", "t", "r"], [(n, float(t[n]), float(r[n])) for n in range(N + 1)])
    return {"scheme": w.label, "alpha": a, "r1": float(r[1]), "r1_closed_form": beta * (1 / g1 - 1), "r_last": float(r[-1])}


VERBS: Dict[str, Callable[[Dict[str, Any], Path], Dict[str, Any]]] = {
    "weights": _run_weights,
    "solve": _run_solve,
    "volterra": _run_volterra,
    "stability": _run_stability,
    "converge": _run_converge,
    "decay": _run_decay,
    "pde": _run_pde,
    "truncation": _run_truncation,
}

_KIND_TO_VERB = {"stability-locus": "stability", "stability-grid": "stability"}


def _merge(base: Dict[str, Any], over: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else copy.deepcopy(v)
    return out


def _resolve_verb(cfg: Dict[str, Any], verb: Optional[str]) -> str:
    kind = cfg.get("kind")
    if kind is not None and not isinstance(kind, str):
        raise ConfigError("kind", "must be a string")
    from_kind = _KIND_TO_VERB.get(kind, kind) if kind else None
    if verb is None:
        if from_kind is None:
            raise ConfigError("kind", "required when no verb is given")
        verb = from_kind
    elif from_kind is not None and from_kind != verb:
        raise ConfigError("kind", f"config is for {kind!r} but verb is {verb!r}")
    if verb not in VERBS:
        raise ConfigError("kind", f"unknown experiment kind {verb!r}")
    return verb


def _write_summary(out: Path, summary: Dict[str, Any]):
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run_experiment(cfg: Dict[str, Any], out_dir, verb: Optional[str] = None) -> Dict[str, Any]:
    """Run one experiment and return its summary record.

    Raises
    ------
    ConfigError
        For invalid configurations.
    StepFailureError, SingularStepError, UnsupportedDomainError
        For numerical failures.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    verb = _resolve_verb(cfg, verb)
    if cfg.get("kind") in ("stability-locus", "stability-grid"):
        cfg = dict(cfg, mode=cfg.get("mode", cfg["kind"].split("-")[1]))
    out = Path(out_dir)
    runs = cfg.get("runs")
    base = {k: v for k, v in cfg.items() if k != "runs"}
    if runs is None:
        out.mkdir(parents=True, exist_ok=True)
        result = VERBS[verb](base, out)
        summary = {"version": __version__, "verb": verb, "config": base, "result": result}
        _write_summary(out, summary)
        return summary
    if not isinstance(runs, list) or not all(isinstance(r, dict) for r in runs):
        raise ConfigError("runs", "must be a list of objects")
    results = []
    for i, over in enumerate(runs):
        sub = _merge(base, over)
        sub_out = out / f"run_{i}"
        sub_out.mkdir(parents=True, exist_ok=True)
        res = VERBS[verb](sub, sub_out)
        _write_summary(sub_out, {"version": __version__, "verb": verb, "config": sub, "result": res})
        results.append(res)
    summary = {"version": __version__, "verb": verb, "config": cfg, "result": {"runs": results}}
    _write_summary(out, summary)
    return summary


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmfrac", description="CM-preserving fractional scheme experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sp = sub.add_parser(verb, help=f"run a '{verb}' experiment")
        sp.add_argument("--config", required=True, type=Path, help="JSON experiment file")
        sp.add_argument("--out", required=True, type=Path, help="output directory")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = json.loads(args.config.read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run_experiment(cfg, args.out, args.verb)
    except (StepFailureError, SingularStepError, UnsupportedDomainError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(summary["result"], sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
